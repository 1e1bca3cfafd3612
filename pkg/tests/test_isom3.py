import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quakebend.isom3 import (
    INF,
    ClassificationError,
    GeometryError,
    Isometry,
    Kind,
    OrientedGeodesic,
    axis_of,
    classify,
    complex_length,
    normalized_trace,
    product_perturbation_gap,
    rotation_about,
    rotation_about_axis,
    sign_normalized,
    subsequence_product_bound,
    translation_along,
)

finite = st.floats(-3, 3, allow_nan=False)
cplx = st.builds(complex, finite, finite)


def random_isometry(rng, scale=1.0):
    a = scale * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    return Isometry(a + 2 * np.eye(2))


def test_normalization_to_unit_determinant():
    g = Isometry([[2, 1], [1, 3]])
    assert abs(g.det - 1) < 1e-14


def test_singular_matrix_rejected():
    with pytest.raises(GeometryError):
        Isometry([[1, 2], [2, 4]])


def test_normalized_trace_sign_convention():
    assert normalized_trace(Isometry([[-2, 0], [0, -0.5]])) == 2.5
    t = normalized_trace(Isometry(np.diag([1j, -1j])))
    assert t == 0
    g = Isometry([[-1j, 0.3], [0, 1j]])
    assert sign_normalized(g).trace == normalized_trace(g)


@pytest.mark.parametrize(
    "m, kind",
    [
        (np.diag([2.0, 0.5]), Kind.LOXODROMIC),
        (np.diag([cmath.exp(0.3j), cmath.exp(-0.3j)]), Kind.ELLIPTIC),
        ([[1, 1], [0, 1]], Kind.PARABOLIC),
        (np.eye(2), Kind.IDENTITY),
        (-np.eye(2), Kind.IDENTITY),
    ],
)
def test_classify(m, kind):
    assert classify(Isometry(m)).kind is kind


def test_complex_length_of_diagonal():
    lam = complex(1.3, 0.4)
    g = Isometry(np.diag([cmath.exp(lam / 2), cmath.exp(-lam / 2)]))
    cl = complex_length(g)
    assert abs(cl.value - lam) < 1e-12
    # the same map written with the inverse eigenvalue first
    h = Isometry(np.diag([cmath.exp(-lam / 2), cmath.exp(lam / 2)]))
    assert abs(complex_length(h).value - lam) < 1e-12


def test_axis_orientation_follows_attraction():
    g = Isometry(np.diag([3.0, 1 / 3]))
    ax = axis_of(g)
    assert ax.attracting == INF or math.isinf(ax.attracting.real)
    assert abs(ax.repelling) < 1e-12


def test_parabolic_has_no_axis():
    with pytest.raises(ClassificationError):
        axis_of(Isometry([[1, 1], [0, 1]]))


@given(cplx, cplx, st.floats(0.1, 3), st.floats(-3, 3))
def test_translation_along_has_requested_length(a, b, ell, theta):
    if abs(a - b) < 1e-2:
        return
    g = OrientedGeodesic(a, b)
    f = translation_along(g, complex(ell, theta))
    cl = complex_length(f)
    assert abs(cl.length - ell) < 1e-7
    assert abs(cmath.exp(1j * cl.angle) - cmath.exp(1j * theta)) < 1e-6
    assert abs(f.act(a) - a) < 1e-7 * max(1, abs(a))


@given(st.floats(-6, 6))
def test_closed_form_rotation_matches_frame_rotation(angle):
    f = Isometry([[2.0, 1.0], [1.0, 1.0]])
    a = rotation_about_axis(f, angle)
    b = rotation_about(axis_of(f), angle)
    assert a.close_to(b, 1e-10)


def test_rotation_about_axis_rejects_elliptic():
    with pytest.raises(ClassificationError):
        rotation_about_axis(Isometry(np.diag([1j, -1j])), 0.2)


def test_subsequence_bound_counts_empty_product():
    # the identity has Frobenius norm sqrt 2, so R >= sqrt 2 even for contractions
    assert subsequence_product_bound([0.1 * np.eye(2)]) == pytest.approx(math.sqrt(2))


def test_subsequence_bound_exhaustive_brute_force(rng):
    from itertools import combinations

    mats = [rng.standard_normal((2, 2)) for _ in range(5)]
    best = math.sqrt(2)
    for k in range(1, 6):
        for idx in combinations(range(5), k):
            m = np.eye(2)
            for i in idx:
                m = m @ mats[i]
            best = max(best, np.linalg.norm(m))
    assert subsequence_product_bound(mats) == pytest.approx(best, rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.floats(-6, -1))
def test_perturbation_bound_holds(seed, n, log_size):
    rng = np.random.default_rng(seed)
    mats = [random_isometry(rng, 0.3).m for _ in range(n)]
    eps = [10**log_size * rng.standard_normal((2, 2)) for _ in range(n)]
    gap = product_perturbation_gap(mats, eps)
    assert gap.lhs <= gap.rhs


def test_perturbation_equality_case_is_exact(rng):
    mats = [random_isometry(rng).m for _ in range(4)]
    gap = product_perturbation_gap(mats, [np.zeros((2, 2))] * 4)
    assert gap.lhs == 0 and gap.rhs == 0


def test_perturbation_length_mismatch():
    with pytest.raises(ValueError):
        product_perturbation_gap([np.eye(2)], [])
