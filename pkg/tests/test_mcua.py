import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import benefit_for, random_instance
from enforcement.errors import ParameterError, StructuralError
from enforcement.mcua import Segment, build_mcua, eval_mcua, location_mcua, location_value_function
from enforcement.model import PAYOFF, REVENUE, Contract, Location, UserType


def two_type_location():
    return Location("a", (UserType(2, benefit_for(0.25, 1, 1), 0), UserType(1, benefit_for(0.5, 1, 1), 0)))


class TestValueFunction:
    def test_revenue_breakpoint_values(self):
        vf = location_value_function(two_type_location(), 1, 1, REVENUE, 0.5)
        assert [b.sigma for b in vf.breakpoints] == pytest.approx([0.0, 0.25, 0.5])
        assert vf(0.25) == pytest.approx(0.75)
        assert vf(0.5) == pytest.approx(0.5)
        # left limit at the second threshold: only the second type still defaults
        assert vf.breakpoints[2].value_left_limit == pytest.approx(0.5)

    def test_payoff_single_type_jump(self):
        loc = Location("a", (UserType(1, 1, 1),))
        vf = location_value_function(loc, 1, 1, PAYOFF, 0.5)
        assert vf(0.5) == pytest.approx(1.0)
        assert vf(0.49) == pytest.approx(0.49)
        assert vf.breakpoints[-1].value_left_limit == pytest.approx(0.5)

    def test_zero_at_origin(self):
        for mode in (REVENUE, PAYOFF, Contract(0.4)):
            assert location_value_function(two_type_location(), 1, 1, mode, 0.7)(0.0) == 0.0

    def test_rejects_bad_domain_and_empty_location(self):
        with pytest.raises(ParameterError):
            location_value_function(two_type_location(), 1, 1, PAYOFF, 0.0)
        with pytest.raises(StructuralError):
            location_value_function(Location("x", ()), 1, 1, PAYOFF, 0.5)


class TestBuild:
    def test_revenue_two_segments(self):
        segs = build_mcua(location_value_function(two_type_location(), 1, 1, REVENUE, 0.5))
        assert [(s.slope, s.width) for s in segs] == [pytest.approx((3.0, 0.25)), pytest.approx((0.0, 0.25))]

    def test_single_type_payoff_chord(self):
        d, k = 1.0, 1.0
        segs = build_mcua(location_value_function(Location("a", (UserType(1, d, 1),)), k, 1, PAYOFF, 0.5))
        assert len(segs) == 1
        assert segs[0].slope == pytest.approx((d + k) / d)
        assert segs[0].width == pytest.approx(0.5)

    def test_concave_input_is_reproduced(self):
        # revenue with one type is linear up to its threshold: the hull is the function itself
        loc = Location("a", (UserType(3, benefit_for(0.6, 2, 1), 0),))
        vf = location_value_function(loc, 2, 1, REVENUE, 0.6)
        segs = build_mcua(vf)
        for s in np.linspace(0, 0.6, 61):
            assert eval_mcua(segs, s) == pytest.approx(vf(s), abs=1e-9)

    def test_widths_cover_domain(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            loc = random_instance(rng, 1, 4).locations[0]
            t = float(rng.uniform(0.05, 1))
            segs = location_mcua(loc, 1.3, 1.0, PAYOFF, t)
            assert sum(s.width for s in segs) == pytest.approx(t)

    def test_hull_touches_generating_points(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            inst = random_instance(rng, 1, 4)
            vf = location_value_function(inst.locations[0], inst.fine, inst.deter_prob, REVENUE, 1.0)
            segs = build_mcua(vf)
            running = 0.0
            vertices = {round(s.start_sigma, 12) for s in segs} | {round(segs[-1].end_sigma, 12)}
            for bp in vf.breakpoints:
                running = max(running, bp.value_at)
                if round(bp.sigma, 12) in vertices:
                    assert eval_mcua(segs, bp.sigma) == pytest.approx(running, abs=1e-9)

    def test_empty_domain(self):
        assert location_mcua(two_type_location(), 1, 1, PAYOFF, 0.0) == []


class TestEval:
    segs = [Segment("a", 4.0, 0.25, 0.0, 0.0), Segment("a", 1.0, 0.5, 0.25, 1.0)]

    def test_endpoints_and_midpoint(self):
        assert eval_mcua(self.segs, 0.0) == 0.0
        assert eval_mcua(self.segs, 0.75) == pytest.approx(1.5)
        assert eval_mcua(self.segs, 0.125) == pytest.approx(0.5)

    def test_constant_continuation(self):
        assert eval_mcua(self.segs, 0.9) == pytest.approx(1.5)

    def test_negative_sigma(self):
        with pytest.raises(ParameterError):
            eval_mcua(self.segs, -0.1)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(0, 10), st.floats(0.02, 0.95), st.floats(0, 3)), min_size=1, max_size=4
    ),
    st.sampled_from([REVENUE, PAYOFF, Contract(0.5)]),
    st.floats(0.05, 1.0),
    st.sampled_from([0.0, 0.5, 1.0]),
)
def test_dominance_concavity_monotonicity(rows, mode, t, beta):
    k = 1.0
    loc = Location("a", tuple(UserType(c, benefit_for(tau, k, beta), p) for c, tau, p in rows))
    vf = location_value_function(loc, k, beta, mode, t)
    segs = build_mcua(vf)
    slopes = [s.slope for s in segs]
    assert all(s >= 0 for s in slopes)
    assert all(a >= b - 1e-9 for a, b in zip(slopes, slopes[1:]))
    for s in np.linspace(0, t, 101):
        assert eval_mcua(segs, s) >= vf(s) - 1e-9
