import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quakebend.bend import QuakebendFamily, quakebend_by_marking
from quakebend.ptorus import SYMMETRIC_L_GAMMA, Slope, fuchsian_orthogonal
from quakebend.shearbend import (
    SYMMETRIC_SHEARS,
    ComplexShears,
    InadmissibleShearsError,
    NonConvergenceError,
    RepresentationTangent,
    chart_jacobian,
    cusp_condition_fast,
    cusp_residual,
    cusp_sum_defect,
    fit_shears_to_representation,
    holonomy_from_shears,
    project_and_invert,
    shear_traces,
    shears_from_csv,
    shears_to_csv,
)

BASE = fuchsian_orthogonal(SYMMETRIC_L_GAMMA)
part = st.floats(-1.5, 1.5)
small = st.floats(-0.6, 0.6)


def admissible(a, b, c, d, k=0):
    s1, s2 = complex(a, b), complex(c, d)
    return ComplexShears(s1, s2, 2j * math.pi * k - s1 - s2)


def test_symmetric_point():
    x, y, z = shear_traces(SYMMETRIC_SHEARS)
    assert x == pytest.approx(2 * math.sqrt(2), abs=1e-9)
    assert y == pytest.approx(2 * math.sqrt(2), abs=1e-9)
    assert z == pytest.approx(4, abs=1e-9)
    assert cusp_residual(SYMMETRIC_SHEARS) <= 1e-12


@given(part, small, part, small, st.integers(-2, 2))
def test_admissible_shears_give_parabolic_commutator(a, b, c, d, k):
    s = admissible(a, b, c, d, k)
    g = holonomy_from_shears(s)
    assert g.commutator_residual() <= 1e-9
    assert g.trace_triple().markov_residual() <= 1e-8 * max(1, abs(g.X.trace) * abs(g.Y.trace))
    assert cusp_condition_fast(s)


@given(part, part)
def test_real_shears_are_fuchsian(a, c):
    g = holonomy_from_shears(admissible(a, 0, c, 0))
    assert g.is_real()


@given(part, small, part, small, st.floats(-1, 1), st.floats(-1, 1))
def test_commutator_trace_formula(a, b, c, d, e, f):
    s = ComplexShears(complex(a, b), complex(c, d), complex(e, f))
    assert cusp_residual(s) == pytest.approx(2 * abs(cmath.cosh(s.sum) - 1), rel=1e-6, abs=1e-12)


def test_off_locus_perturbation_is_visible():
    s = SYMMETRIC_SHEARS
    bad = ComplexShears(s.s1 + 0.1, s.s2, s.s3)
    assert cusp_residual(bad) > 1e-3
    assert not cusp_condition_fast(bad)
    with pytest.raises(InadmissibleShearsError) as e:
        holonomy_from_shears(bad)
    assert e.value.residual > 1e-3


def test_modularity():
    s = ComplexShears(0.3 + 0.2j, -0.5, 0.7j)
    t = ComplexShears(s.s1 + 2j * math.pi, s.s2, s.s3)
    assert cusp_residual(s) == pytest.approx(cusp_residual(t), rel=1e-9)
    assert cusp_sum_defect(s) == pytest.approx(cusp_sum_defect(t))


def test_fast_predicate_agrees_on_sample(rng):
    for _ in range(100):
        a, c = rng.uniform(-1.5, 1.5, 2)
        b, d = rng.uniform(-0.6, 0.6, 2)
        s = admissible(a, b, c, d, int(rng.integers(-1, 2)))
        assert cusp_condition_fast(s) and cusp_residual(s) <= 1e-9


def test_fit_recovers_shears():
    star = admissible(0.9, 0.2, -0.4, -0.1)
    seed = ComplexShears(star.s1 + 1e-2, star.s2 - 1e-2, star.s3)
    fit = fit_shears_to_representation(shear_traces(star), seed)
    assert np.abs(fit.array() - star.array()).max() < 1e-8
    assert max(abs(u - v) for u, v in zip(shear_traces(fit), shear_traces(star))) <= 1e-10


def test_fit_of_fuchsian_group_is_real():
    fit = fit_shears_to_representation(BASE.trace_triple(), ComplexShears(0.6, -0.6, 0.05))
    assert np.abs(fit.array().imag).max() < 1e-8
    assert np.abs(fit.array() - SYMMETRIC_SHEARS.array()).max() < 1e-8


@pytest.mark.parametrize("t", [-0.3, -0.1, 0.2, 0.3])
def test_fit_follows_quakebend(t):
    seed = fit_shears_to_representation(BASE.trace_triple(), SYMMETRIC_SHEARS)
    target = quakebend_by_marking(QuakebendFamily(BASE, Slope(0, 1), t)).trace_triple()
    fit = fit_shears_to_representation(target, seed)
    assert np.abs(fit.array().imag).max() > 1e-3
    assert max(abs(u - v) for u, v in zip(shear_traces(fit), target)) <= 1e-8


def test_fit_failure_reports_residual():
    with pytest.raises(NonConvergenceError) as e:
        fit_shears_to_representation((1e6, 1e6, 1e6), SYMMETRIC_SHEARS, max_steps=3)
    assert e.value.residual > 1e-10


def test_jacobian_at_symmetric_point():
    jac = chart_jacobian(SYMMETRIC_SHEARS)
    assert jac.cauchy_riemann <= 1e-6
    assert jac.gram_det > 1e-6
    for t in jac.real:
        assert np.abs(t.d.imag).max() <= 1e-8


def test_jacobian_needs_admissible_point():
    with pytest.raises(InadmissibleShearsError):
        chart_jacobian(ComplexShears(1.0, 0.0, 0.0))


def test_projection_fixes_p_and_kills_ip():
    jac = chart_jacobian(SYMMETRIC_SHEARS)
    pr = project_and_invert(jac.real[1], SYMMETRIC_SHEARS, jac)
    assert np.abs(pr.p.d - jac.real[1].d).max() < 1e-9
    assert np.allclose(pr.preimage, [0, 1, -1], atol=1e-9)
    pr = project_and_invert(RepresentationTangent(1j * jac.real[0].d), SYMMETRIC_SHEARS, jac)
    assert np.abs(pr.p.d).max() < 1e-9


def test_csv_roundtrip():
    rows = [SYMMETRIC_SHEARS, ComplexShears(0.1 + 0.2j, -0.3j, 0.5)]
    text = shears_to_csv(rows)
    assert text.splitlines()[0] == "re1,im1,re2,im2,re3,im3"
    back = shears_from_csv(text)
    assert all(np.allclose(a.array(), b.array(), rtol=1e-14, atol=0) for a, b in zip(back, rows))


def test_reduced_shears():
    s = ComplexShears(1 + 7j, 0, -3.5j).reduced()
    assert -math.pi < s.s1.imag <= math.pi and -math.pi < s.s3.imag <= math.pi
