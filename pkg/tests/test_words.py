import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quakebend.words import (
    Automorphism,
    homology,
    inverse_word,
    reduce_word,
    reduced_words,
    slope_automorphism,
    slope_word,
    substitute,
)

words = st.text(alphabet="xXyY", max_size=12)
coprime = st.tuples(st.integers(-13, 13), st.integers(0, 13)).filter(
    lambda pq: pq != (0, 0) and np.gcd(*pq) == 1
)


def test_reduction():
    assert reduce_word("xXyYx") == "x"
    assert reduce_word("xyYX") == ""


@given(words)
def test_inverse_cancels(w):
    assert reduce_word(w + inverse_word(w)) == ""


def test_reduced_word_count():
    # 1 + 4 + 4*3 + ... + 4*3^5
    assert len(list(reduced_words(6))) == 1 + sum(4 * 3**k for k in range(6))


@pytest.mark.parametrize(
    "p, q, word", [(0, 1, "x"), (1, 0, "y"), (1, 1, "xy"), (1, 2, "xxy"), (2, 3, "xxyxy"), (-1, 1, "xY")]
)
def test_slope_words(p, q, word):
    assert slope_word(p, q) == word


@given(coprime)
def test_slope_word_homology(pq):
    p, q = pq
    w = slope_word(p, q)
    if q == 0:
        p = abs(p)
    assert homology(w) == (q, p)


def test_non_coprime_slope_rejected():
    with pytest.raises(ValueError):
        slope_word(2, 4)


@given(coprime)
def test_slope_automorphism_inverts(pq):
    phi = slope_automorphism(*pq)
    assert phi.images[0] == slope_word(*pq)
    assert phi.inverse(phi("x")) == "x" and phi.inverse(phi("y")) == "y"
    assert round(np.linalg.det(phi.homology)) == 1


@given(st.tuples(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5)), words)
def test_automorphism_from_homology(m, w):
    a, b, c, d = m
    if abs(a * d - b * c) != 1:
        return
    phi = Automorphism([[a, b], [c, d]])
    assert np.array_equal(phi.homology, [[a, b], [c, d]])
    assert reduce_word(phi.inverse(phi(w))) == reduce_word(w)
    hx = homology(phi("x"))
    assert hx == (a, c)


def test_substitute_reduces():
    assert substitute("xX", "xy", "y") == ""
