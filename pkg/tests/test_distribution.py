import numpy as np
import pytest

from curtailseq import (
    Design,
    StopKind,
    brute_force_oracle,
    build_distribution,
    exact_power,
    expectation,
    expected_sample_size,
    nb_pmf,
    stagewise_compare,
    terminal_pmf,
)
from curtailseq.distribution import support_table


@pytest.fixture(scope="module")
def dist34():
    return build_distribution(Design.from_thresholds(3, 4))


class TestBuildDistribution:
    def test_published_support_chain(self, dist622):
        chain = [(o.m, o.s) for o in dist622.support]
        expected = [(m, m - 17) for m in range(17, 23)] + [(m, 6) for m in range(22, 5, -1)]
        assert chain == expected

    def test_single_all_response_path(self, dist49, dist622, dist34):
        for dist in (dist34, dist49, dist622):
            top = dist.support[-1]
            assert (top.m, top.s) == (dist.design.u, dist.design.u)
            assert top.path_count == 1

    def test_two_paths_to_early_futility(self, dist34):
        # enumerated by hand over the 2^4 response sequences
        assert dist34.outcome(3, 1).path_count == 2

    def test_kinds_partition_support(self, dist49):
        for o in dist49.support:
            if o.kind is StopKind.EFFICACY:
                assert o.s == dist49.design.u
                assert dist49.design.u <= o.m <= dist49.design.K
            else:
                assert o.s == dist49.design.futility_bound(o.m)
                assert o.m >= dist49.design.first_futility_stage()

    @pytest.mark.parametrize("u,K", [(1, 1), (1, 6), (3, 3), (3, 4), (4, 9), (6, 22), (5, 5)])
    def test_path_census(self, u, K):
        # every stopped prefix completes to 2^(K-m) full sequences
        dist = build_distribution(Design.from_thresholds(u, K))
        census = sum(o.path_count * 2 ** (K - o.m) for o in dist.support)
        assert census == 2 ** K

    @pytest.mark.parametrize("u,K", [(1, 1), (2, 7), (3, 4), (4, 9), (6, 22)])
    def test_normalization(self, u, K):
        dist = build_distribution(Design.from_thresholds(u, K))
        for p in np.arange(0.0, 1.0001, 0.05):
            assert abs(dist.pmf_vector(float(p)).sum() - 1.0) < 1e-12


class TestTerminalPmf:
    def test_early_futility_value(self, dist34):
        # brute-force enumeration of the 16 sequences gives 4/16
        assert terminal_pmf(dist34, 2, 0, 0.5) == pytest.approx(0.25, abs=1e-14)

    def test_efficacy_stops_follow_first_passage_mass(self, dist49):
        for o in dist49.support:
            if o.kind is StopKind.EFFICACY:
                for p in (0.1, 0.4, 0.9):
                    assert terminal_pmf(dist49, o.m, o.s, p) == pytest.approx(
                        nb_pmf(dist49.design.u, o.m, p), rel=1e-12)

    def test_not_in_support(self, dist49):
        with pytest.raises(ValueError):
            terminal_pmf(dist49, 5, 2, 0.3)

    def test_degenerate_rates(self, dist49):
        assert terminal_pmf(dist49, 6, 0, 0.0) == 1.0
        assert terminal_pmf(dist49, 4, 4, 1.0) == 1.0
        assert terminal_pmf(dist49, 9, 4, 0.0) == 0.0


class TestStagewiseCompare:
    def test_published_chain_order(self, dist622):
        a = dist622.outcome(17, 0)
        b = dist622.outcome(18, 1)
        assert stagewise_compare(dist622, a, b) == -1

    def test_last_futility_before_latest_efficacy(self, dist622):
        a = dist622.outcome(22, 6)
        b = dist622.outcome(21, 6)
        assert stagewise_compare(dist622, a, b) == -1

    def test_reflexive_equality(self, dist622):
        o = dist622.outcome(10, 6)
        assert stagewise_compare(dist622, o, o) == 0

    def test_total_order_properties(self, dist49):
        outcomes = dist49.support
        for a in outcomes:
            for b in outcomes:
                c_ab = stagewise_compare(dist49, a, b)
                assert c_ab == -stagewise_compare(dist49, b, a)
                if c_ab == 0:
                    assert (a.m, a.s) == (b.m, b.s)
                for c in outcomes:
                    if c_ab <= 0 and stagewise_compare(dist49, b, c) <= 0:
                        assert stagewise_compare(dist49, a, c) <= 0

    def test_foreign_outcome_rejected(self, dist49, dist622):
        with pytest.raises(ValueError):
            stagewise_compare(dist49, dist622.outcome(17, 0), dist49.support[0])


class TestExpectation:
    def test_certain_response(self, dist49):
        assert expected_sample_size(dist49, 1.0) == pytest.approx(4.0)

    def test_certain_nonresponse(self, dist49):
        assert expected_sample_size(dist49, 0.0) == pytest.approx(6.0)

    def test_power_matches_design_search_value(self, dist49):
        assert exact_power(dist49, 0.1) == pytest.approx(0.008, abs=1e-3)

    def test_power_equals_tail_sum_everywhere(self, dist622):
        from curtailseq.design import stopping_probability_sum

        for p in (0.05, 0.2, 0.35, 0.8):
            tail = stopping_probability_sum(6, 22, p)
            assert exact_power(dist622, p) == pytest.approx(tail, rel=1e-12)

    def test_generic_engine_matches_specializations(self, dist49):
        for p in (0.15, 0.5):
            assert expectation(dist49, p, lambda m, s: m) == pytest.approx(
                expected_sample_size(dist49, p))
            assert expectation(dist49, p, lambda m, s: float(s == dist49.design.u)) == (
                pytest.approx(exact_power(dist49, p)))


class TestBruteForceOracle:
    def test_total_mass(self, dist34):
        oracle = brute_force_oracle(dist34.design, 0.5)
        assert sum(oracle.values()) == pytest.approx(1.0, abs=1e-12)

    def test_all_response_stop_value(self, dist34):
        oracle = brute_force_oracle(dist34.design, 0.1)
        assert oracle[(3, 3)] == pytest.approx(0.001, abs=1e-15)

    def test_matches_lattice_counts(self, dist34, dist49):
        for dist in (dist34, dist49):
            for p in (0.1, 0.3, 0.5, 0.7):
                oracle = brute_force_oracle(dist.design, p)
                assert set(oracle) == {(o.m, o.s) for o in dist.support}
                for o in dist.support:
                    assert oracle[(o.m, o.s)] == pytest.approx(
                        terminal_pmf(dist, o.m, o.s, p), abs=1e-12)

    def test_size_bound(self, design622):
        with pytest.raises(ValueError):
            brute_force_oracle(design622, 0.5)


class TestSupportTable:
    def test_columns_and_pmf_values(self, dist34):
        rows = support_table(dist34, p_values=[0.5])
        assert [r["m"] for r in rows] == [o.m for o in dist34.support]
        total = sum(r["f_at_0.5"] for r in rows)
        assert total == pytest.approx(1.0, abs=1e-12)
