import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from formflex.deflection import (BeamLoadCase, beam_oracle, closure_state, deflection_profile,
                                 free_end_deflection, load_case, segment_force, tip_deflection,
                                 tip_value)
from formflex.errors import DomainError
from formflex.geometry import LipGeometry, beam_length, make_grid, segment_inertia

from conftest import D_THETA, Q, rel

# 30-digit mpmath evaluations of the closed forms for the worked example
F_CANON = 1.51554445662276763
Y_TIP_FAITHFUL = 2.88675134594812882e-4
Y_TIP_MECH = 0.025


def test_segment_force(env, geom):
    assert segment_force(env, 0.0, geom, D_THETA) == 0.0
    assert rel(segment_force(env, Q, geom, D_THETA), F_CANON) < 1e-14


def canonical_case(geom, interpretation):
    return BeamLoadCase(F_CANON, beam_length(geom), geom.E, segment_inertia(geom, D_THETA), interpretation)


def test_profile_root_and_tip(geom):
    case = canonical_case(geom, "paper_faithful")
    assert deflection_profile(case, 0.0) == 0.0
    assert rel(deflection_profile(case, case.l), Y_TIP_FAITHFUL) < 1e-13
    mech = canonical_case(geom, "mechanics_consistent")
    assert rel(deflection_profile(mech, mech.l), Y_TIP_MECH) < 1e-13


def test_mechanics_tip_is_faithful_tip_over_length(geom):
    faithful = canonical_case(geom, "paper_faithful")
    mech = canonical_case(geom, "mechanics_consistent")
    assert rel(deflection_profile(mech, mech.l), deflection_profile(faithful, faithful.l) / faithful.l) < 1e-14


def test_profile_domain(geom):
    case = canonical_case(geom, "paper_faithful")
    for x in (-1e-9, case.l * 1.001):
        with pytest.raises(DomainError):
            deflection_profile(case, x)
    with pytest.raises(DomainError):
        BeamLoadCase(1.0, 0.01, 5e6, 1e-12, "nonlinear")


@given(st.floats(0.0, 100.0), st.sampled_from(["paper_faithful", "mechanics_consistent"]))
def test_profile_monotone(f, interpretation):
    case = BeamLoadCase(f, 0.0115, 5e6, 2.3e-12, interpretation)
    y = deflection_profile(case, np.linspace(0.0, case.l, 257))
    assert y[0] == 0.0
    assert np.all(np.diff(y) >= 0.0)


def test_tip_deflection_both_paths(env, geom):
    direct = free_end_deflection(env, Q, geom, D_THETA)
    composed = tip_value(env, Q, geom, D_THETA)
    assert rel(direct, Y_TIP_FAITHFUL) < 1e-14
    assert rel(composed, direct) < 1e-12
    res = tip_deflection(geom, env, Q, D_THETA)
    assert res.y_tip == composed
    assert res.x[0] == 0.0 and res.y[0] == 0.0 and len(res.profile) == 101
    assert res.interpretation == "paper_faithful" and res.flow_mode == "total"
    assert res.warnings == ()


def test_tip_zero_flow(env, geom):
    assert tip_deflection(geom, env, 0.0, make_grid()).y_tip == 0.0


def test_halving_d_theta_quadruples_tip(env, geom):
    assert rel(tip_value(env, Q, geom, D_THETA / 2), 4 * tip_value(env, Q, geom, D_THETA)) < 1e-13


def test_large_deflection_warning(env, geom):
    res = tip_deflection(geom, env, 0.05, make_grid(), interpretation="mechanics_consistent")
    assert res.y_tip > beam_length(geom) / 10
    assert any("large deflection" in w for w in res.warnings)


def test_apportioned_mechanics_independent_of_grid(env, geom):
    tips = [tip_value(env, Q, geom, make_grid(n).d_theta, "apportioned", "mechanics_consistent")
            for n in (9, 18, 36, 72, 144)]
    assert max(tips) - min(tips) < 1e-12 * tips[0]


geometries = st.builds(
    lambda r, dr, alpha, b, E: LipGeometry(r, r + dr, alpha, b, E),
    st.floats(0.005, 0.05), st.floats(0.001, 0.03), st.floats(0.0, 1.45),
    st.floats(2e-4, 5e-3), st.floats(1e5, 1e9),
)


@settings(max_examples=300)
@given(geometries, st.floats(1e-4, 0.05), st.floats(1e-3, 2 * math.pi))
def test_composition_identity(g, q, d_theta):
    from formflex.pneumatics import AirEnvironment
    env = AirEnvironment()
    assert rel(tip_value(env, q, g, d_theta), free_end_deflection(env, q, g, d_theta)) < 1e-12


@pytest.mark.parametrize("interpretation", ["paper_faithful", "mechanics_consistent"])
@pytest.mark.parametrize("flow_mode", ["total", "apportioned"])
def test_power_law_exponents(env, geom, flow_mode, interpretation):
    def slope(fn, p0):
        h = 1.001
        return (math.log(fn(p0 * h)) - math.log(fn(p0 / h))) / (2 * math.log(h))

    tip = lambda **kw: tip_value(env, kw.get("q", Q), kw.get("g", geom), kw.get("d", D_THETA),
                                 flow_mode, interpretation)
    assert slope(lambda q: tip(q=q), Q) == pytest.approx(2.0, abs=1e-6)
    assert slope(lambda b: tip(g=geom.replace(b=b)), geom.b) == pytest.approx(-3.0, abs=1e-6)
    assert slope(lambda e: tip(g=geom.replace(E=e)), geom.E) == pytest.approx(-1.0, abs=1e-6)
    expected = {("total", "paper_faithful"): -2.0, ("total", "mechanics_consistent"): -2.0,
                ("apportioned", "paper_faithful"): 0.0, ("apportioned", "mechanics_consistent"): 0.0}
    assert slope(lambda d: tip(d=d), D_THETA) == pytest.approx(expected[flow_mode, interpretation], abs=1e-6)


def test_oracle_unit_case_converges():
    errs = [abs(beam_oracle(1.0, 1.0, 1.0, 1.0, n) - 0.125) for n in (65, 129, 257, 513, 1025)]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-6


def test_oracle_zero_load_and_validation():
    assert beam_oracle(0.0, 1.0, 1.0, 1.0, 20) == 0.0
    with pytest.raises(DomainError):
        beam_oracle(1.0, 1.0, 1.0, 1.0, 15)


def test_oracle_matches_mechanics_tip(env, geom):
    case = load_case(env, Q, geom, D_THETA, interpretation="mechanics_consistent")
    tip = beam_oracle(case.f / case.l, case.l, case.e, case.i, 1000)
    assert rel(tip, Y_TIP_MECH) < 1e-3


def test_oracle_second_order():
    ns = [33, 65, 129, 257, 513]
    errs = [abs(beam_oracle(3.0, 0.7, 2.0, 0.5, n) - 3.0 * 0.7**4 / 8.0) for n in ns]
    orders = [math.log(a / b) / math.log((nb - 1) / (na - 1))
              for a, b, na, nb in zip(errs, errs[1:], ns, ns[1:])]
    for p in orders:
        assert p == pytest.approx(2.0, abs=0.3)


def test_closure_state():
    assert closure_state(0.0, 0.0) == (True, 0.0)
    assert closure_state(2.8868e-4, 1e-4) == (True, 0.0)
    sealed, gap = closure_state(0.0, 1e-4)
    assert not sealed and gap == 1e-4
    with pytest.raises(DomainError):
        closure_state(0.0, -1.0)
