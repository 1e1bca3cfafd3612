import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quakebend import bend
from quakebend.bend import (
    QuakebendFamily,
    NotStabilizedError,
    boundary_length_function,
    c2_experiment,
    enumerate_crossings,
    quakebend_by_crossings,
    quakebend_by_marking,
    quakebend_group_by_crossings,
    truncation_table,
)
from quakebend.isom3 import normalized_trace
from quakebend.ptorus import SYMMETRIC_L_GAMMA, Slope, fuchsian_orthogonal

BASE = fuchsian_orthogonal(SYMMETRIC_L_GAMMA)
SLOPES = [Slope(0, 1), Slope(1, 0), Slope(1, 1), Slope(1, 2), Slope(2, 3)]


def test_zero_bend_is_identity():
    fam = QuakebendFamily(BASE, Slope(1, 2), 0.0)
    assert quakebend_by_marking(fam) is BASE
    assert quakebend_by_crossings(BASE, Slope(1, 2), 0.0, "xyX").close_to(BASE.evaluate("xyX"), 0)


def test_single_crossing_for_y():
    lifts = enumerate_crossings(BASE, Slope(0, 1), "y")
    assert len(lifts) == 1


def test_crossings_are_ordered():
    lifts = enumerate_crossings(BASE, Slope(0, 1), "YxY")
    assert len(lifts) == 2
    assert lifts[0].position < lifts[1].position


def test_slope_word_commutes_with_its_own_crossings():
    # xi = bending word itself: its axis is a lift, crossed by nothing transversally
    assert enumerate_crossings(BASE, Slope(0, 1), "x") == []


@pytest.mark.parametrize("slope, word", [(Slope(0, 1), "YxY"), (Slope(1, 2), "yxY")])
def test_explicit_radius_agrees_with_adaptive(slope, word):
    ctx = bend._context(BASE, slope)
    a = enumerate_crossings(BASE, slope, word)
    b = enumerate_crossings(BASE, slope, word, search_radius=8.0)
    assert [ctx.key(c.word) for c in a] == [ctx.key(c.word) for c in b]


def test_too_small_radius_is_reported():
    with pytest.raises(NotStabilizedError):
        enumerate_crossings(BASE, Slope(2, 3), "xyxyxy", search_radius=2.0)


@pytest.mark.parametrize("slope", SLOPES, ids=str)
@pytest.mark.parametrize("word", ["xy", "Yx", "yyX", "xYXy"])
def test_two_constructions_agree(slope, word):
    t = 0.7
    a = quakebend_by_crossings(BASE, slope, t, word)
    b = quakebend_by_marking(QuakebendFamily(BASE, slope, t)).evaluate(word)
    assert abs(normalized_trace(a) - normalized_trace(b)) < 1e-9


@given(st.floats(-1.5, 1.5), st.sampled_from(SLOPES))
def test_bending_preserves_invariants(t, slope):
    g = quakebend_by_marking(QuakebendFamily(BASE, slope, t))
    assert g.commutator_residual() <= 1e-9
    assert g.trace_triple().markov_residual() <= 1e-8
    tr0 = BASE.evaluate(slope.word).trace
    assert abs(g.evaluate(slope.word).trace - tr0) <= 1e-12 * max(1.0, abs(tr0))


def test_crossing_group_is_homomorphism():
    g = quakebend_group_by_crossings(BASE, Slope(1, 1), 0.4)
    direct = quakebend_by_crossings(BASE, Slope(1, 1), 0.4, "xyXY")
    assert abs(normalized_trace(g.evaluate("xyXY")) - normalized_trace(direct)) < 1e-9


def test_closed_form_trace_of_y():
    for t in np.linspace(-1.5, 1.5, 7):
        y = quakebend_by_marking(QuakebendFamily(BASE, Slope(0, 1), float(t))).evaluate("y").trace
        assert abs(abs(y) - 2 * math.sqrt(2) * math.cos(t / 2)) < 1e-10


@pytest.mark.parametrize("slope, word", [(Slope(0, 1), "Y"), (Slope(2, 3), "XY"), (Slope(1, 2), "yxY")])
def test_truncation_decays(slope, word):
    reps = truncation_table(BASE, slope, 0.5, word, range(1, 21))
    errs = [r.error for r in reps]
    for r in range(3, 11):
        assert errs[r] <= 0.9 * errs[r - 1]
    assert errs[-1] <= 1e-8
    norms = [r.max_prefix_norm for r in reps]
    assert max(norms) <= 10 * norms[2]


def test_truncation_at_zero_bend_is_exact():
    reps = truncation_table(BASE, Slope(1, 2), 0.0, "xyxY", [1, 5])
    assert all(r.error == 0 and r.gap == 0 for r in reps)


def test_truncation_exact_matches_crossing_product():
    rep = truncation_table(BASE, Slope(1, 2), 0.3, "yyX", [2])[0]
    assert rep.exact.close_to(quakebend_by_crossings(BASE, Slope(1, 2), 0.3, "yyX"), 1e-10)


def test_truncation_needs_positive_depth():
    with pytest.raises(ValueError):
        truncation_table(BASE, Slope(0, 1), 0.3, "y", [0])


def test_boundary_length_function_values():
    F = boundary_length_function(SYMMETRIC_L_GAMMA)
    assert F(0.0) == pytest.approx(0.5)
    assert F(0.7) == pytest.approx(0.5)
    # F = tanh^2(L/2) with cosh(L/2) = sqrt 2 cos(t/2); at t = -pi/3 that is 1/3
    assert F(-math.pi / 3) == pytest.approx(1 / 3, abs=1e-12)
    # Taylor: 1/2 - t^2/8 on the left
    assert F(-1e-2) == pytest.approx(0.5 - 1e-4 / 8, abs=1e-9)


def test_c2_experiment_rows():
    rows = c2_experiment(SYMMETRIC_L_GAMMA, [-0.2, 0.0, 0.2])
    assert [r.t for r in rows] == [-0.2, 0.0, 0.2]
    csv = bend.c2_csv(rows)
    assert csv.splitlines()[0] == "t,x_re,x_im,y_re,y_im,z_re,z_im,L,F"
    assert len(csv.splitlines()) == 4
