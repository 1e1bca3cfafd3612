"""Marked once-punctured-torus groups.

A marked group is a pair (X, Y) of unit-determinant matrices whose commutator
XYX^-1Y^-1 is parabolic with trace -2. Words use x, y for the generators and
X, Y for their inverses.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import words as _words
from .isom3 import (
    ComplexLength,
    GeometryError,
    Isometry,
    Kind,
    classify,
    complex_length,
    sign_normalized,
)

MARKOV_TOL = 1e-8
COMMUTATOR_TOL = 1e-9
_MEMO_SIZE = 200_000


class TraceTriple(NamedTuple):
    x: complex
    y: complex
    z: complex

    def markov_residual(self) -> float:
        x, y, z = self
        return abs(x * x + y * y + z * z - x * y * z)

    def format(self) -> str:
        return ",".join(f"{v.real:.15g},{v.imag:.15g}" for v in map(complex, self))


@dataclass(frozen=True)
class Slope:
    """Slope p/q of a simple closed curve, stored in lowest terms with q >= 0."""

    p: int
    q: int

    def __post_init__(self):
        p, q = _words.normalize_slope(int(self.p), int(self.q))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def parse(cls, text: str) -> "Slope":
        text = text.strip().lower()
        if text in ("inf", "infinity", "oo"):
            return cls(1, 0)
        if "/" in text:
            num, den = text.split("/", 1)
            return cls(int(num), int(den))
        return cls(int(text), 1)

    @property
    def word(self) -> str:
        return _words.slope_word(self.p, self.q)

    def __str__(self):
        return f"{self.p}/{self.q}"


def slope_word(s: Slope) -> str:
    """Primitive word of the slope: 0 -> x, infinity -> y, 1 -> xy, mediants concatenate."""
    return s.word


@dataclass(frozen=True)
class MarkedGroup:
    X: Isometry
    Y: Isometry

    @cached_property
    def _gens(self) -> dict:
        return {"x": self.X.m, "y": self.Y.m, "X": self.X.inverse().m, "Y": self.Y.inverse().m}

    @cached_property
    def _memo(self) -> dict:
        return {}

    def evaluate(self, word: str) -> Isometry:
        memo = self._memo
        hit = memo.get(word)
        if hit is not None:
            return hit
        gens = self._gens
        m = np.eye(2, dtype=complex)
        for ch in word:
            try:
                m = m @ gens[ch]
            except KeyError:
                raise ValueError(f"invalid letter {ch!r} in word {word!r}") from None
        # a product of unit-determinant factors; renormalizing would only add the
        # cancellation error of ad - bc for long words
        g = Isometry(m, normalize=False)
        if len(memo) > _MEMO_SIZE:
            memo.clear()
        memo[word] = g
        return g

    def commutator(self) -> Isometry:
        return self.evaluate("xyXY")

    def commutator_residual(self) -> float:
        return abs(complex(self.commutator().trace) + 2)

    def trace_triple(self) -> TraceTriple:
        """(tr X, tr Y, tr XY) with X, Y sign-normalized and z taken from their product."""
        X, Y = sign_normalized(self.X), sign_normalized(self.Y)
        return TraceTriple(complex(X.trace), complex(Y.trace), complex((X @ Y).trace))

    def validate(self, tol: float = COMMUTATOR_TOL) -> "MarkedGroup":
        res = self.commutator_residual()
        if res > tol:
            raise GeometryError(f"commutator is not parabolic: |tr[X,Y] + 2| = {res:.3e}")
        for name, g in (("X", self.X), ("Y", self.Y)):
            if classify(g).kind in (Kind.PARABOLIC, Kind.IDENTITY):
                raise GeometryError(f"generator {name} is {classify(g).kind.value}")
        return self

    def is_real(self, tol: float = 1e-12) -> bool:
        return all(np.abs(g.m.imag).max() <= tol for g in (self.X, self.Y))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = [f"{g}_{e}_{part}" for g in "XY" for e in "abcd" for part in ("re", "im")]
        w.writerow(header)
        row = []
        for g in (self.X, self.Y):
            for v in g.m.ravel():
                row += [f"{v.real:.15g}", f"{v.imag:.15g}"]
        w.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "MarkedGroup":
        rows = list(csv.reader(io.StringIO(text)))
        vals = [float(v) for v in rows[1]]
        z = [complex(vals[i], vals[i + 1]) for i in range(0, 16, 2)]
        return cls(Isometry(z[:4]), Isometry(z[4:]))


def fuchsian_orthogonal(l_gamma: float) -> MarkedGroup:
    """Fuchsian group whose generator axes (0, inf) and (-1, 1) meet orthogonally at i.

    X translates by l_gamma; Y translates by 2u where cosh(l_gamma/2) tanh(u) = 1,
    which is exactly the condition tr[X,Y] = -2.
    """
    if not (isinstance(l_gamma, (int, float)) and math.isfinite(l_gamma)) or l_gamma <= 0:
        raise GeometryError(f"l_gamma must be a positive length, got {l_gamma}")
    a = l_gamma / 2
    u = math.atanh(1.0 / math.cosh(a))
    X = Isometry([[math.exp(a), 0], [0, math.exp(-a)]], normalize=False)
    Y = Isometry([[math.cosh(u), math.sinh(u)], [math.sinh(u), math.cosh(u)]], normalize=False)
    return MarkedGroup(X, Y)


SYMMETRIC_L_GAMMA = 2 * math.acosh(math.sqrt(2))


def _marking_homology(M) -> np.ndarray:
    M = np.array(M, dtype=object).reshape(2, 2)
    if not all(float(v).is_integer() for v in M.ravel()):
        raise ValueError("marking matrix must have integer entries")
    a, b, c, d = (int(v) for v in M.ravel())
    det = a * d - b * c
    if abs(det) != 1:
        raise ValueError(f"marking matrix must have determinant +-1, got {det}")
    # a slope p/q has homology (q, p); z -> (az+b)/(cz+d) acts on it by [[d, c], [b, a]]
    Mh = np.array([[d, c], [b, a]], dtype=int)
    inv = np.array([[a, -c], [-b, d]], dtype=int) * (d * a - c * b)
    assert np.array_equal(Mh @ inv, np.eye(2, dtype=int))
    return inv


def change_marking(g: MarkedGroup, M) -> MarkedGroup:
    """Re-mark g so that slope s in the old marking becomes slope M.s = (as+b)/(cs+d)."""
    phi = _words.Automorphism(_marking_homology(M))
    return MarkedGroup(g.evaluate(phi.images[0]), g.evaluate(phi.images[1]))


def marking_automorphism(M) -> _words.Automorphism:
    """Automorphism whose images are the new generators written in the old ones."""
    return _words.Automorphism(_marking_homology(M))


def act_on_slope(M, s: Slope) -> Slope:
    a, b, c, d = (int(v) for v in np.array(M).ravel())
    return Slope(a * s.p + b * s.q, c * s.p + d * s.q)


def length_of_slope(g: MarkedGroup, s: Slope) -> ComplexLength:
    return complex_length(g.evaluate(s.word))


def trace_recursion(x: complex, y: complex, z: complex, s: Slope) -> complex:
    """Trace of the slope word from the triple via tr(AB) = tr A tr B - tr(AB^-1).

    Independent of matrix products; valid for slopes in [0, inf].
    """
    if s.p < 0:
        raise ValueError("trace recursion implemented for nonnegative slopes")
    if s.q == 0:
        return y
    if s.p == 0:
        return x
    # Farey triangle (left, right, mediant) with traces; the difference of the
    # parents' words is the previous mediant on the other side
    target = Fraction(s.p, s.q)
    left, right = (Fraction(0), x), (None, y)
    # tr of left * right^-1 for the current neighbours (x y^-1 at the start)
    diff = x * y - z
    while True:
        lf = left[0]
        rf = right[0]
        num = lf.numerator + (rf.numerator if rf is not None else 1)
        den = lf.denominator + (rf.denominator if rf is not None else 0)
        med = Fraction(num, den)
        tr_med = left[1] * right[1] - diff
        if med == target:
            return tr_med
        if target < med:
            # new pair (left, med); left * med^-1 = right^-1 up to conjugacy
            diff = right[1]
            right = (med, tr_med)
        else:
            diff = left[1]
            left = (med, tr_med)
