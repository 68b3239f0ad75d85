import math

import numpy as np
import pytest

from curtailseq import (
    Design,
    DesignSearchError,
    Hypotheses,
    StageDecision,
    classify_state,
    futility_boundaries,
    nb_pmf,
    operating_characteristics,
    search_design,
)


class TestNbPmf:
    def test_worked_example_alpha(self):
        # cumulative first-passage mass for u=3 within K=4 at the null rate
        assert nb_pmf(3, 3, 0.1) + nb_pmf(3, 4, 0.1) == pytest.approx(0.0037, abs=1e-12)

    def test_worked_example_power(self):
        assert nb_pmf(3, 3, 0.55) + nb_pmf(3, 4, 0.55) == pytest.approx(0.3909, abs=1e-4)

    def test_all_response_path(self):
        for u in (1, 2, 5, 17):
            for p in (0.0, 0.2, 0.9, 1.0):
                assert nb_pmf(u, u, p) == pytest.approx(p ** u, abs=1e-15)

    def test_closed_form_small_case(self):
        assert nb_pmf(2, 4, 0.5) == pytest.approx(3 * 0.5 ** 4, rel=1e-12)

    @pytest.mark.parametrize("s,k", [(0, 3), (4, 3), (-1, 2)])
    def test_domain_errors(self, s, k):
        with pytest.raises(ValueError):
            nb_pmf(s, k, 0.5)

    def test_p_out_of_range(self):
        with pytest.raises(ValueError):
            nb_pmf(2, 3, 1.5)

    @pytest.mark.parametrize("n", [1, 5, 12, 25])
    @pytest.mark.parametrize("p", [0.05, 0.3, 0.5, 0.85])
    def test_first_passage_tail_equals_binomial_tail(self, n, p):
        # Reaching s successes within n trials == at least s successes among n.
        for s in range(1, n + 1):
            fp = sum(nb_pmf(s, k, p) for k in range(s, n + 1))
            direct = sum(
                math.comb(n, x) * p ** x * (1 - p) ** (n - x) for x in range(s, n + 1)
            )
            assert fp == pytest.approx(direct, abs=1e-12)


class TestOperatingCharacteristics:
    def test_smallest_design_cell(self):
        oc = operating_characteristics(2, 2, Hypotheses(0.1, 0.55))
        assert oc.alpha_actual == pytest.approx(0.01, abs=1e-12)
        assert oc.power == pytest.approx(0.3025, abs=1e-12)

    def test_selected_design_cell(self):
        oc = operating_characteristics(4, 9, Hypotheses(0.1, 0.55))
        assert oc.alpha_actual == pytest.approx(0.008, abs=1e-3)
        assert oc.power == pytest.approx(0.83, abs=1e-2)

    def test_infeasible_cell_exceeds_level(self):
        oc = operating_characteristics(3, 7, Hypotheses(0.1, 0.55))
        assert oc.alpha_actual == pytest.approx(0.0256, abs=1e-4)
        assert oc.alpha_actual > 0.025

    def test_alpha_nondecreasing_in_K(self):
        hyp = Hypotheses(0.2, 0.4)
        alphas = [operating_characteristics(5, K, hyp).alpha_actual for K in range(5, 40)]
        assert all(a <= b + 1e-15 for a, b in zip(alphas, alphas[1:]))

    def test_invalid_thresholds(self):
        with pytest.raises(ValueError):
            operating_characteristics(5, 4, Hypotheses(0.1, 0.3))


class TestFutilityBoundaries:
    def test_final_stage_is_u_minus_one(self):
        for u, K in [(1, 1), (3, 4), (6, 22), (10, 49)]:
            assert futility_boundaries(u, K)[-1] == u - 1

    def test_unit_steps(self):
        l = futility_boundaries(6, 22)
        assert all(b - a == 1 for a, b in zip(l, l[1:]))

    def test_published_staircase(self):
        l = futility_boundaries(6, 22)
        assert [l[k - 1] for k in range(17, 23)] == [0, 1, 2, 3, 4, 5]
        assert l[15] < 0

    def test_small_design_values(self):
        assert futility_boundaries(3, 4) == (-1, 0, 1, 2)


class TestClassifyState:
    def test_futility_at_first_reachable_stage(self, design622):
        assert classify_state(design622, 17, 0) is StageDecision.STOP_FUTILITY

    def test_efficacy_at_threshold(self, design622):
        assert classify_state(design622, 10, 6) is StageDecision.STOP_EFFICACY

    def test_early_stage_continues(self, design622):
        # k < u: efficacy unreachable and the futility bound is negative
        assert classify_state(design622, 5, 5) is StageDecision.CONTINUE

    def test_domain_errors(self, design622):
        with pytest.raises(ValueError):
            classify_state(design622, 5, 6)
        with pytest.raises(ValueError):
            classify_state(design622, 0, 0)
        with pytest.raises(ValueError):
            classify_state(design622, 23, 1)

    def test_exactly_one_decision(self, design49):
        for k in range(1, design49.K + 1):
            for s in range(0, k + 1):
                decision = classify_state(design49, k, s)
                is_eff = s >= design49.u
                is_fut = s <= design49.futility_bound(k)
                assert [is_eff, is_fut, not (is_eff or is_fut)].count(True) == 1
                assert (decision is StageDecision.STOP_EFFICACY) == is_eff

    def test_stop_is_absorbing_along_paths(self, design49):
        rng = np.random.default_rng(5)
        for _ in range(200):
            draws = rng.random(design49.K) < rng.random()
            s = 0
            stopped = False
            for k in range(1, design49.K + 1):
                s += int(draws[k - 1])
                decision = classify_state(design49, k, s)
                if stopped and s >= design49.u:
                    assert decision is StageDecision.STOP_EFFICACY
                if decision is StageDecision.STOP_EFFICACY:
                    stopped = True


class TestSearchDesign:
    def test_reference_problem(self, hyp_01_055):
        result = search_design(hyp_01_055)
        assert (result.design.u, result.design.K) == (4, 9)
        assert result.feasible_k == (9, 10, 11)
        assert result.k_max == 11

    def test_wider_problem(self, hyp_01_035):
        result = search_design(hyp_01_035)
        assert (result.design.u, result.design.K) == (6, 22)

    def test_constraints_hold_by_recomputation(self):
        for p0, p1 in [(0.1, 0.4), (0.2, 0.45), (0.3, 0.5)]:
            hyp = Hypotheses(p0, p1)
            design = search_design(hyp).design
            oc = operating_characteristics(design.u, design.K, hyp)
            assert oc.alpha_actual <= hyp.alpha_nom
            assert oc.power >= 1 - hyp.beta_nom

    def test_feasible_range_boundary(self, hyp_01_055):
        result = search_design(hyp_01_055)
        beyond = operating_characteristics(result.design.u, result.k_max + 1, hyp_01_055)
        assert beyond.alpha_actual > hyp_01_055.alpha_nom

    def test_search_exhausted(self):
        with pytest.raises(DesignSearchError):
            search_design(Hypotheses(0.4, 0.41, 1e-6, 1e-6), u_cap=5)


class TestDesignType:
    def test_round_trip_json(self, design49):
        doc = design49.to_json()
        assert Design.from_json(doc) == design49

    def test_json_document_fields(self, design49):
        doc = design49.to_dict()
        assert set(doc) == {"p0", "p1", "alpha", "beta", "u", "K", "l",
                            "alpha_actual", "power"}
        assert doc["l"][-1] == design49.u - 1

    def test_rejects_inconsistent_bounds(self):
        with pytest.raises(ValueError):
            Design(u=3, K=4, l=(0, 0, 1, 2))

    def test_bare_design_has_no_document(self):
        design = Design.from_thresholds(3, 4)
        with pytest.raises(ValueError):
            design.to_dict()


class TestHypotheses:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(p0=0.5, p1=0.4),
            dict(p0=0.0, p1=0.4),
            dict(p0=0.1, p1=1.0),
            dict(p0=0.1, p1=0.3, alpha_nom=0.0),
            dict(p0=0.1, p1=0.3, beta_nom=1.0),
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            Hypotheses(**kwargs)

    def test_equal_rates_rejected(self):
        with pytest.raises(ValueError, match="p0 must be < p1"):
            Hypotheses(0.3, 0.3)
