import numpy as np
import pytest

from curtailseq import (
    ScenarioGrid,
    compare_designs,
    emit_results,
    evaluate_estimation,
    evaluate_oc,
    exact_power,
    expected_sample_size,
    simulate_trial,
)
from curtailseq.estimation import bias_function
from curtailseq.intervals import exact_coverage, support_intervals
from curtailseq.simulation import (
    CSV_COLUMNS,
    rows_from_csv,
    rows_to_csv,
    _substream,
)


class TestScenarioGrid:
    def test_default_rates(self):
        grid = ScenarioGrid.default()
        assert grid.p_true[0] == 0.05
        assert grid.p_true[-1] == 0.6
        assert len(grid.p_true) == 12

    def test_default_pairs(self):
        grid = ScenarioGrid.default()
        assert len(grid.hypothesis_pairs) == 12
        assert all(p1 > p0 for p0, p1 in grid.hypothesis_pairs)
        assert grid.hypothesis_pairs[0] == (0.1, 0.25)
        assert (0.3, 0.5) in grid.hypothesis_pairs

    def test_hypotheses_levels(self):
        hyp = ScenarioGrid.default().hypotheses()[0]
        assert hyp.alpha_nom == 0.025
        assert hyp.beta_nom == pytest.approx(0.2)


class TestSimulateTrial:
    def test_certain_nonresponse_path(self, dist49):
        rng = _substream(1, 0, 0)
        outcome = simulate_trial(dist49, 0.0, rng)
        assert (outcome.m, outcome.s) == (6, 0)

    def test_certain_response_path(self, dist49):
        rng = _substream(1, 0, 0)
        outcome = simulate_trial(dist49, 1.0, rng)
        assert (outcome.m, outcome.s) == (4, 4)

    def test_outcomes_live_in_support(self, dist49):
        rng = _substream(2, 0, 0)
        for _ in range(200):
            outcome = simulate_trial(dist49, 0.4, rng)
            assert dist49.order_index(outcome.m, outcome.s) >= 0


class TestEvaluateOc:
    def test_exact_matches_distribution_engine(self, design49, dist49):
        rows = evaluate_oc(design49, [0.1, 0.55])
        assert rows[0].power == pytest.approx(exact_power(dist49, 0.1))
        assert rows[1].asn == pytest.approx(expected_sample_size(dist49, 0.55))

    def test_power_floor_beyond_alternative(self, design49):
        rows = evaluate_oc(design49, [0.55, 0.6])
        assert all(row.power >= 0.8 for row in rows)

    def test_expected_size_shrinks_at_both_ends(self, design49):
        grid = ScenarioGrid.default().p_true
        rows = evaluate_oc(design49, grid)
        asn = [row.asn for row in rows]
        peak = int(np.argmax(asn))
        assert 0 < peak < len(asn) - 1  # curtailment trims both tails
        beyond = [row.asn for row in rows if row.p_true >= 0.55]
        assert all(a >= b for a, b in zip(beyond, beyond[1:]))

    def test_monte_carlo_within_four_standard_errors(self, design49, design622):
        n_rep = 20_000
        for design, rates in [(design49, (0.1, 0.55)), (design622, (0.1, 0.35))]:
            for p in rates:
                exact_row = evaluate_oc(design, [p])[0]
                mc_row = evaluate_oc(design, [p], mode="montecarlo",
                                     n_rep=n_rep, seed=3)[0]
                se_power = np.sqrt(exact_row.power * (1 - exact_row.power) / n_rep)
                assert abs(mc_row.power - exact_row.power) <= 4 * se_power
                assert abs(mc_row.asn - exact_row.asn) <= 4 * (design.K / np.sqrt(n_rep))

    def test_comparator_rows(self, hyp_01_055):
        from curtailseq import fixed_exact_design, simon_search

        fixed = fixed_exact_design(hyp_01_055)
        rows = evaluate_oc(fixed, [0.55], hypotheses=hyp_01_055)
        assert rows[0].design == "fixed"
        assert rows[0].asn == fixed.N
        simon = simon_search(hyp_01_055, "minimax")
        rows = evaluate_oc(simon, [0.0], hypotheses=hyp_01_055)
        assert rows[0].asn == simon.n1

    def test_row_count_matches_grid(self, design49):
        grid = ScenarioGrid.default().p_true
        assert len(evaluate_oc(design49, grid)) == len(grid)

    def test_comparison_row_count(self, hyp_01_055):
        rows = compare_designs(hyp_01_055, [0.1, 0.55])
        assert len(rows) == 4 * 2  # four designs, two rates, nothing dropped

    def test_mode_validation(self, design49):
        with pytest.raises(ValueError):
            evaluate_oc(design49, [0.5], mode="approximate")


class TestEvaluateEstimation:
    def test_exact_bias_matches_bias_function(self, design49, dist49):
        row = evaluate_estimation(design49, [0.3])[0]
        assert row.bias["naive"] == pytest.approx(bias_function(dist49, 0.3), abs=1e-12)

    def test_exact_coverage_matches_interval_engine(self, design49, dist49):
        row = evaluate_estimation(design49, [0.4])[0]
        for method in ("cp", "jt", "dufsat"):
            ivs = support_intervals(dist49, method, 0.025)
            assert row.coverage[method] == pytest.approx(
                exact_coverage(dist49, ivs, 0.4), abs=1e-12)

    def test_monte_carlo_close_to_exact(self, design49):
        exact_row = evaluate_estimation(design49, [0.55])[0]
        mc_row = evaluate_estimation(design49, [0.55], mode="montecarlo",
                                     n_rep=20_000, seed=11)[0]
        assert mc_row.bias["naive"] == pytest.approx(exact_row.bias["naive"], abs=0.01)
        assert mc_row.coverage["cp"] == pytest.approx(exact_row.coverage["cp"], abs=0.02)

    def test_rmse_nonnegative(self, design49):
        row = evaluate_estimation(design49, [0.2])[0]
        assert all(v >= 0 for v in row.rmse.values())


class TestDeterminism:
    def test_same_seed_same_rows(self, design49):
        a = evaluate_oc(design49, [0.3, 0.55], mode="montecarlo", n_rep=5_000, seed=9)
        b = evaluate_oc(design49, [0.3, 0.55], mode="montecarlo", n_rep=5_000, seed=9)
        assert rows_to_csv(a) == rows_to_csv(b)

    def test_different_seeds_differ(self, design49):
        a = evaluate_oc(design49, [0.3], mode="montecarlo", n_rep=5_000, seed=9)
        b = evaluate_oc(design49, [0.3], mode="montecarlo", n_rep=5_000, seed=10)
        assert a[0].power != b[0].power

    def test_exact_rows_are_seed_free(self, design49):
        rows = evaluate_oc(design49, [0.3])
        assert rows[0].seed is None
        assert rows[0].n_rep is None


class TestEmitResults:
    def test_empty_rows_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_results([], "csv", str(tmp_path / "x.csv"))

    def test_csv_round_trip(self, design49, tmp_path):
        rows = evaluate_estimation(design49, [0.2, 0.4])
        path = emit_results(rows, "csv", str(tmp_path / "rows.csv"))
        with open(path) as fh:
            text = fh.read()
        parsed = rows_from_csv(text)
        assert rows_to_csv(parsed) == text
        assert text.splitlines()[0] == ",".join(CSV_COLUMNS)

    def test_plot_json_panel_structure(self, hyp_01_055, tmp_path):
        import json

        rows = compare_designs(hyp_01_055, [0.1, 0.55])
        path = emit_results(rows, "plotjson", str(tmp_path / "rows.json"))
        doc = json.loads(open(path).read())
        assert doc["schema_version"] == 1
        panel = doc["panels"][0]
        assert panel["hypotheses"] == "p0=0.1,p1=0.55"
        names = {series["design"] for series in panel["series"]}
        assert names == {"proposed", "fixed", "simon_minimax", "simon_optimal"}

    def test_unknown_format(self, design49, tmp_path):
        rows = evaluate_oc(design49, [0.3])
        with pytest.raises(ValueError):
            emit_results(rows, "parquet", str(tmp_path / "x"))
