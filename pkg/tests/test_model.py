"""Reaction builders, linearization, symmetries, serialization."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gfkpp import model as M
from gfkpp.errors import (
    AssumptionViolationError,
    DegenerateReactionError,
    NotAnEquilibriumError,
)


def test_quadratic_eval():
    f = M.quadratic(1.0)
    assert f(0.5) == pytest.approx(0.25, abs=1e-15)
    assert f(0.0) == 0.0
    assert f(1.0) == pytest.approx(0.0, abs=1e-15)
    assert f.deriv(0.0) == pytest.approx(1.0)
    assert f.deriv(1.0) == pytest.approx(-1.0)


def test_cubic_eval_interior_root():
    f = M.cubic(1.0, 0.3)
    assert abs(f(0.3)) <= 1e-12
    assert f.roots == (0.0, 0.3, 1.0)
    # sign pattern of the two-well shape
    assert f(0.15) < 0.0 < f(0.65)


def test_growth_rate_reaction():
    f = M.reaction_from_growth_rates(2.0, 1.0)
    assert f.kind == "quadratic" and f.k == pytest.approx(1.0)
    with pytest.raises(DegenerateReactionError):
        M.reaction_from_growth_rates(1.0, 1.0)
    g = M.reaction_from_growth_rates(0.0, 1.0)
    assert g.k == pytest.approx(-1.0)  # legal, handled by the mirrored case


def test_logistic_reaction_interior_root():
    f = M.reaction_from_logistic(1.0, 1.0, 0.5, 0.5)
    # root of (r1-r2) - (r1/a1) p + (r2/a2)(1-p), solved independently
    r1 = r2 = 1.0
    a = 0.5
    p_c = (r1 - r2 + r2 / a) / (r1 / a + r2 / a)
    assert p_c == pytest.approx(0.5)
    assert any(abs(r - p_c) < 1e-9 for r in f.interior_roots)
    assert abs(f(p_c)) <= 1e-12


def test_logistic_allee_form():
    # equal rates, alpha < 1: cubic form k p (1-p)(p - p0) with |k| > r1 + r2
    f = M.reaction_from_logistic(1.0, 1.0, 0.8, 0.8)
    assert len(f.roots) == 3
    assert abs(f.coeffs[-1]) == pytest.approx(2.5)  # r1/a1 + r2/a2 > r1 + r2
    assert f.interior_roots[0] == pytest.approx(0.5)


def test_logistic_limits_to_growth_rates():
    f = M.reaction_from_logistic(2.0, 1.0, 1e8, 1e8)
    g = M.reaction_from_growth_rates(2.0, 1.0)
    fc = np.zeros(4)
    fc[: len(f.coeffs)] = f.coeffs
    gc = np.zeros(4)
    gc[: len(g.coeffs)] = g.coeffs
    assert np.max(np.abs(fc - gc)) <= 1e-6


def test_logistic_rejects_bad_capacity():
    with pytest.raises(AssumptionViolationError):
        M.reaction_from_logistic(1.0, 1.0, -0.5, 0.5)


def test_polynomial_validation():
    with pytest.raises(AssumptionViolationError):
        M.polynomial([0.5, 1.0, -1.0])  # f(0) != 0
    with pytest.raises(AssumptionViolationError):
        M.polynomial([0.0, 1.0, 1.0])  # f(1) != 0
    with pytest.raises(DegenerateReactionError):
        M.polynomial([0.0, 0.0, 1.0, -1.0])  # double root at 0


def test_linearize_double_root():
    m = M.make_model(1.0)
    eq = M.linearize(m, 2.0, 0.0)
    assert eq.etype == M.STABLE_NODE
    assert eq.lambda_plus.real == pytest.approx(-1.0, abs=1e-12)
    assert eq.lambda_minus.real == pytest.approx(-1.0, abs=1e-12)


def test_linearize_against_quadratic_formula():
    # independent oracle: roots of z^2 - beta z + alpha via numpy
    m = M.make_model(1.0)
    c = 3.0
    eq = M.linearize(m, c, 0.0)
    beta = (0.0 - c) / 1.0
    alpha = 1.0
    z = np.sort(np.roots([1.0, -beta, alpha]))
    assert eq.lambda_minus.real == pytest.approx(z[0], abs=1e-12)
    assert eq.lambda_plus.real == pytest.approx(z[1], abs=1e-12)
    # frozen values of (-3 +- sqrt(5))/2
    assert eq.lambda_plus.real == pytest.approx(-0.3819660112501051, abs=1e-12)
    assert eq.lambda_minus.real == pytest.approx(-2.618033988749895, abs=1e-12)


def test_linearize_symmetric_saddle():
    m = M.make_model(1.0)
    eq = M.linearize(m, 0.0, 1.0)
    assert eq.etype == M.SADDLE
    assert eq.lambda_plus.real == pytest.approx(1.0, abs=1e-12)
    assert eq.lambda_minus.real == pytest.approx(-1.0, abs=1e-12)


def test_linearize_rejects_non_equilibrium():
    m = M.make_model(1.0)
    with pytest.raises(NotAnEquilibriumError):
        M.linearize(m, 1.0, 0.4)


def test_etype_table():
    m = M.make_model(1.0)
    assert M.linearize(m, 3.0, 0.0).etype == M.STABLE_NODE
    assert M.linearize(m, 1.0, 0.0).etype == M.SPIRAL_SINK
    assert M.linearize(m, -3.0, 0.0).etype == M.UNSTABLE_NODE
    assert M.linearize(m, -1.0, 0.0).etype == M.SPIRAL_SOURCE
    assert M.linearize(m, 0.0, 1.0).etype == M.SADDLE
    mc = M.make_model(1.0, p0=0.5)
    assert M.linearize(mc, 0.0, 0.5).etype == M.CENTER


def test_origin_oscillation_threshold():
    # real eigenvalues at 0 iff c outside (M(0) - 2 sqrt(f'(0) D(0)), M(0) + ...)
    m = M.make_model(1.0, d1=2.0, d2=0.7, m1=0.5, m2=-1.0)
    thr = 2.0 * math.sqrt(1.0 * 2.0)
    for c in np.linspace(0.5 - 2.0 * thr, 0.5 + 2.0 * thr, 41):
        eq = M.linearize(m, c, 0.0)
        real = abs(eq.lambda_plus.imag) == 0.0
        outside = c >= 0.5 + thr or c <= 0.5 - thr
        assert real == outside, f"c={c}"


@settings(max_examples=50, deadline=None)
@given(
    k=st.floats(0.2, 3.0),
    d1=st.floats(0.2, 3.0),
    d2=st.floats(0.2, 3.0),
    m1=st.floats(-3.0, 3.0),
    m2=st.floats(-3.0, 3.0),
    c=st.floats(-5.0, 5.0),
    root=st.sampled_from([0.0, 1.0]),
)
def test_vieta_identities(k, d1, d2, m1, m2, c, root):
    m = M.make_model(k, d1=d1, d2=d2, m1=m1, m2=m2)
    eq = M.linearize(m, c, root)
    assert abs(eq.lambda_plus + eq.lambda_minus - eq.beta) <= 1e-12
    assert abs(eq.lambda_plus * eq.lambda_minus - eq.alpha) <= 1e-12


def test_sym1_structured_kinds_exact():
    f = M.quadratic(1.5)
    m = M.GfkppModel(d1=1.0, d2=2.0, m1=0.25, m2=-0.5, reaction=f)
    m1 = M.apply_sym1(m)
    assert m1.reaction.k == -1.5
    assert (m1.d1, m1.d2, m1.m1, m1.m2) == (2.0, 1.0, -0.5, 0.25)
    assert M.apply_sym1(m1) == m  # exact involution

    mc = M.make_model(1.0, p0=0.25)
    mc1 = M.apply_sym1(mc)
    assert mc1.reaction.p0 == 0.75
    assert M.apply_sym1(mc1) == mc


def test_sym1_cubic_interior_root_mirrors():
    mc = M.make_model(1.0, p0=0.3)
    assert M.apply_sym1(mc).reaction.p0 == pytest.approx(0.7, abs=1e-15)


def test_sym1_polynomial_involution():
    f = M.polynomial([0.0, 0.06, 0.29, -1.0, 0.65])
    m = M.GfkppModel(d1=1.0, d2=1.0, m1=0.0, m2=0.0, reaction=f)
    back = M.apply_sym1(M.apply_sym1(m)).reaction.coeffs
    assert np.max(np.abs(np.array(back) - np.array(f.coeffs))) <= 1e-14


def test_sym1_reaction_identity():
    # fhat(P) = -f(1-P) pointwise
    f = M.cubic(2.0, 0.4)
    fh = M.apply_sym1(M.make_model(reaction=f)).reaction
    for p in np.linspace(0.0, 1.0, 21):
        assert fh(p) == pytest.approx(-f(1.0 - p), abs=1e-14)


def test_sym2_involution_and_fixed_point():
    m = M.make_model(1.0, m1=1.0, m2=3.0)
    m2 = M.apply_sym2(m)
    assert (m2.m1, m2.m2) == (-1.0, -3.0)
    assert M.apply_sym2(m2) == m
    m0 = M.make_model(1.0)
    assert M.apply_sym2(m0) == m0


def test_restrict_model_keeps_edge_linearization():
    mc = M.make_model(1.0, d1=1.0, d2=3.0, m1=0.5, m2=2.0, p0=0.25)
    piece = M.restrict_model(mc, 0.25, 1.0)
    assert piece.reaction.roots == (0.0, 1.0)
    # slopes at the interval ends survive the affine remap
    assert piece.reaction.deriv(0.0) == pytest.approx(mc.reaction.deriv(0.25), rel=1e-12)
    assert piece.reaction.deriv(1.0) == pytest.approx(mc.reaction.deriv(1.0), rel=1e-12)
    assert piece.d1 == pytest.approx(mc.diffusion(0.25))
    assert piece.m1 == pytest.approx(mc.advection(0.25))


def test_restrict_requires_roots():
    m = M.make_model(1.0)
    with pytest.raises(AssumptionViolationError):
        M.restrict_model(m, 0.2, 1.0)


def test_potential_antiderivative():
    f = M.quadratic(1.0)
    F = f.antiderivative()
    assert F.derivative_coeffs == f.coeffs  # coefficient identity
    assert F(0.0) == 0.0
    assert F(1.0) == pytest.approx(1.0 / 6.0, abs=1e-15)
    # local maximum of the potential at the saddle-side root
    assert F(1.0) > F(0.9) > F(0.5)


def test_serialization_roundtrip():
    models = [
        M.make_model(1.5, d1=0.5, d2=2.0, m1=-1.0, m2=3.0),
        M.make_model(1.0, p0=0.3, m2=1.0),
        M.make_model(coeffs=[0.0, 0.06, 0.29, -1.0, 0.65]),
    ]
    for m in models:
        text = M.model_to_config(m)
        back = M.model_from_config(text)
        assert back == m


def test_config_parsing_is_exact_decimal():
    m = M.model_from_config("d1 = 1.25\nd2=0.5\nm1= -0.75\nm2 =2\n"
                            "reaction.kind = quadratic\nreaction.k = 0.1")
    assert m.d1 == 1.25 and m.d2 == 0.5 and m.m1 == -0.75 and m.m2 == 2.0
    assert m.reaction.k == 0.1
