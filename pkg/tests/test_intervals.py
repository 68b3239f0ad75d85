import numpy as np
import pytest
from scipy.stats import binom

from curtailseq import (
    cp_interval,
    dufsat_interval,
    exact_coverage,
    jt_interval,
    midp_cp_interval,
    midp_jt_interval,
    support_intervals,
)
from curtailseq.intervals import (
    METHODS,
    expected_length,
    interval_table,
    minimum_cardinality_region,
)

ALPHA = 0.025


class TestCpInterval:
    def test_zero_responders_lower_bound(self):
        assert cp_interval(17, 0, ALPHA).lower == 0.0

    def test_all_responders_upper_bound(self):
        assert cp_interval(6, 6, ALPHA).upper == 1.0

    def test_endpoints_solve_tail_equations(self):
        iv = cp_interval(22, 6, ALPHA)
        assert binom.sf(5, 22, iv.lower) == pytest.approx(ALPHA, abs=1e-8)
        assert binom.cdf(6, 22, iv.upper) == pytest.approx(ALPHA, abs=1e-8)

    def test_alpha_validation(self):
        with pytest.raises(ValueError):
            cp_interval(10, 3, 0.6)
        with pytest.raises(ValueError):
            cp_interval(5, 6, ALPHA)


class TestJtInterval:
    def test_least_element_clamps_lower(self, dist622):
        assert jt_interval(dist622, 17, 0, ALPHA).lower == 0.0

    def test_least_element_upper_closed_form(self, dist622):
        iv = jt_interval(dist622, 17, 0, ALPHA)
        assert iv.upper == pytest.approx(1 - 0.025 ** (1 / 17), abs=1e-6)

    def test_greatest_element_clamps_upper(self, dist622):
        assert jt_interval(dist622, 6, 6, ALPHA).upper == 1.0

    def test_not_in_support(self, dist49):
        with pytest.raises(ValueError):
            jt_interval(dist49, 5, 2, ALPHA)


class TestMidpVariants:
    def test_nested_inside_exact(self, dist49):
        for o in dist49.support:
            cp = cp_interval(o.m, o.s, ALPHA)
            mcp = midp_cp_interval(o.m, o.s, ALPHA)
            assert mcp.lower >= cp.lower - 1e-12
            assert mcp.upper <= cp.upper + 1e-12
            jt = jt_interval(dist49, o.m, o.s, ALPHA)
            mjt = midp_jt_interval(dist49, o.m, o.s, ALPHA)
            assert mjt.lower >= jt.lower - 1e-12
            assert mjt.upper <= jt.upper + 1e-12

    def test_least_element_upper_closed_form(self, dist622):
        iv = midp_jt_interval(dist622, 17, 0, ALPHA)
        assert iv.upper == pytest.approx(1 - 0.05 ** (1 / 17), abs=1e-6)

    def test_zero_responders_lower_bound_preserved(self):
        assert midp_cp_interval(9, 0, ALPHA).lower == 0.0


class TestDufsat:
    def test_region_contains_modal_outcome(self, dist49):
        for p in (0.05, 0.3, 0.55, 0.9):
            region = minimum_cardinality_region(dist49, p, ALPHA)
            f = dist49.pmf_vector(p)
            assert region.start <= int(np.argmax(f)) <= region.stop
            assert f[region.start:region.stop + 1].sum() >= 1 - 2 * ALPHA

    def test_interval_brackets_naive_estimate(self, dist49):
        for o in dist49.support:
            iv = dufsat_interval(dist49, o.m, o.s, ALPHA)
            assert iv.lower - 1e-4 <= o.s / o.m <= iv.upper + 1e-4

    def test_grid_coverage(self, dist49):
        ivs = support_intervals(dist49, "dufsat", ALPHA)
        for p in np.arange(0.01, 0.995, 0.01):
            assert exact_coverage(dist49, ivs, float(p)) >= 1 - 2 * ALPHA

    def test_not_in_support(self, dist49):
        with pytest.raises(ValueError):
            dufsat_interval(dist49, 3, 3, ALPHA)


class TestCoverageProperties:
    @pytest.mark.parametrize("method,floor", [
        ("cp", 0.95), ("jt", 0.95), ("midp-cp", 0.92), ("midp-jt", 0.92),
    ])
    def test_floor_on_rate_grid(self, dist49, method, floor):
        ivs = support_intervals(dist49, method, ALPHA)
        worst = min(
            exact_coverage(dist49, ivs, float(p)) for p in np.arange(0.01, 0.995, 0.01)
        )
        assert worst >= floor

    def test_expected_length_positive_and_below_one(self, dist49):
        ivs = support_intervals(dist49, "jt", ALPHA)
        for p in (0.1, 0.5):
            assert 0.0 < expected_length(dist49, ivs, p) < 1.0


class TestEndpointMonotonicity:
    @pytest.mark.parametrize("method", METHODS)
    def test_endpoints_nondecreasing_along_ordering(self, dist49, method):
        ivs = support_intervals(dist49, method, ALPHA)
        lowers = [iv.lower for iv in ivs]
        uppers = [iv.upper for iv in ivs]
        assert all(a <= b + 1e-9 for a, b in zip(lowers, lowers[1:]))
        assert all(a <= b + 1e-9 for a, b in zip(uppers, uppers[1:]))


class TestSerialization:
    def test_interval_json(self, dist622):
        iv = jt_interval(dist622, 17, 0, ALPHA)
        doc = iv.to_dict()
        assert doc == {"method": "jt", "level": 0.95,
                       "lower": iv.lower, "upper": iv.upper}

    def test_batch_table_has_all_methods(self, dist49):
        rows = interval_table(dist49, ALPHA)
        assert len(rows) == len(dist49.support)
        for tag in ("cp", "jt", "midp_cp", "midp_jt", "dufsat"):
            assert f"{tag}_lower" in rows[0]
            assert f"{tag}_upper" in rows[0]
