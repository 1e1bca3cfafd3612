"""Complex shear-bend coordinates for the once-punctured torus.

The torus is cut along three edges into two ideal triangles. A path in the
dual graph crossing an edge of complex shear s picks up E(s) = diag(e^{s/2}, e^{-s/2})
and turning left or right inside a triangle picks up L = [[1, 1], [0, 1]] or
R = [[1, 0], [1, 1]]. The generators follow the two dual loops

    X = L E(s1) R E(s3),    Y = R E(s2) L E(s3),

so every matrix entry is holomorphic in the shears. Real shears give Fuchsian
groups, imaginary parts bend. Direct expansion gives

    tr[X, Y] = -2 cosh(s1 + s2 + s3),

so the commutator is parabolic exactly when s1 + s2 + s3 lies in 2 pi i Z.
"""

from __future__ import annotations

import cmath
import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .isom3 import GeometryError, Isometry
from .ptorus import MarkedGroup, TraceTriple

ADMISSIBLE_TOL = 1e-9
FIT_TOL = 1e-10
FIT_MAX_STEPS = 50
JACOBIAN_STEP = 1e-4
GRAM_MIN = 1e-12

_L = np.array([[1, 1], [0, 1]], dtype=complex)
_R = np.array([[1, 0], [1, 1]], dtype=complex)
_D = np.diag([0.5, -0.5]).astype(complex)

# admissible directions: the shear sum is unchanged along u1 and u2
SHEAR_DIRECTIONS = (np.array([1.0, -1.0, 0.0]), np.array([0.0, 1.0, -1.0]))


class InadmissibleShearsError(GeometryError):
    def __init__(self, msg: str, residual: float):
        super().__init__(msg)
        self.residual = residual


class NonConvergenceError(ArithmeticError):
    def __init__(self, msg: str, residual: float):
        super().__init__(msg)
        self.residual = residual


class DegenerateChartError(GeometryError):
    pass


def _E(s: complex) -> np.ndarray:
    h = cmath.exp(s / 2)
    return np.array([[h, 0], [0, 1 / h]])


@dataclass(frozen=True)
class ComplexShears:
    s1: complex
    s2: complex
    s3: complex

    def __post_init__(self):
        for name in ("s1", "s2", "s3"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    def __iter__(self):
        return iter((self.s1, self.s2, self.s3))

    def array(self) -> np.ndarray:
        return np.array(list(self), dtype=complex)

    @classmethod
    def from_array(cls, a) -> "ComplexShears":
        return cls(*(complex(v) for v in a))

    def reduced(self) -> "ComplexShears":
        """Imaginary parts brought into (-pi, pi]."""

        def red(z):
            im = math.remainder(z.imag, 2 * math.pi)
            return complex(z.real, math.pi if im == -math.pi else im)

        return ComplexShears(*(red(z) for z in self))

    @property
    def sum(self) -> complex:
        return complex(self.s1 + self.s2 + self.s3)

    @property
    def admissible(self) -> bool:
        return cusp_residual(self) <= ADMISSIBLE_TOL

    def to_row(self) -> list[str]:
        return [f"{v:.15g}" for z in self for v in (z.real, z.imag)]


SYMMETRIC_SHEARS = ComplexShears(math.log(2), -math.log(2), 0.0)
CSV_HEADER = ["re1", "im1", "re2", "im2", "re3", "im3"]


def _generators(s: Sequence[complex]) -> tuple[np.ndarray, np.ndarray]:
    E1, E2, E3 = (_E(v) for v in s)
    return _L @ E1 @ _R @ E3, _R @ E2 @ _L @ E3


def _traces(s) -> np.ndarray:
    X, Y = _generators(s)
    return np.array([np.trace(X), np.trace(Y), np.trace(X @ Y)])


def _trace_jacobian(s) -> np.ndarray:
    """d(tr X, tr Y, tr XY)/d(s1, s2, s3), using dE(s)/ds = E(s) diag(1/2, -1/2)."""
    E1, E2, E3 = (_E(v) for v in s)
    X, Y = _L @ E1 @ _R @ E3, _R @ E2 @ _L @ E3
    dX = [_L @ E1 @ _D @ _R @ E3, np.zeros((2, 2)), X @ _D]
    dY = [np.zeros((2, 2)), _R @ E2 @ _D @ _L @ E3, Y @ _D]
    J = np.empty((3, 3), dtype=complex)
    for j in range(3):
        J[0, j] = np.trace(dX[j])
        J[1, j] = np.trace(dY[j])
        J[2, j] = np.trace(dX[j] @ Y + X @ dY[j])
    return J


def cusp_residual(s: ComplexShears) -> float:
    """|tr[X, Y] + 2| for the holonomy of s, computed from the matrices."""
    X, Y = _generators(list(s))
    Xi = np.array([[X[1, 1], -X[0, 1]], [-X[1, 0], X[0, 0]]])
    Yi = np.array([[Y[1, 1], -Y[0, 1]], [-Y[1, 0], Y[0, 0]]])
    return float(abs(np.trace(X @ Y @ Xi @ Yi) + 2))


def cusp_sum_defect(s: ComplexShears) -> float:
    """Distance of s1 + s2 + s3 to 2 pi i Z (the linear form of the cusp condition)."""
    S = s.sum
    return abs(complex(S.real, math.remainder(S.imag, 2 * math.pi)))


def cusp_condition_fast(s: ComplexShears, tol: float = ADMISSIBLE_TOL) -> bool:
    """Admissibility from the linear form: |tr[X,Y] + 2| = 2 |cosh d - 1| for defect d."""
    d = cusp_sum_defect(s)
    return 2 * abs(cmath.cosh(d) - 1) <= tol


def holonomy_from_shears(s: ComplexShears, check: bool = True) -> MarkedGroup:
    if check:
        res = cusp_residual(s)
        if res > ADMISSIBLE_TOL:
            raise InadmissibleShearsError(f"shears off the cusp locus: |tr[X,Y] + 2| = {res:.3e}", res)
    X, Y = _generators(list(s))
    return MarkedGroup(Isometry(X, normalize=False), Isometry(Y, normalize=False))


def shear_traces(s: ComplexShears) -> TraceTriple:
    return TraceTriple(*(complex(v) for v in _traces(list(s))))


def fit_shears_to_representation(
    target: TraceTriple, seed: ComplexShears, tol: float = FIT_TOL, max_steps: int = FIT_MAX_STEPS
) -> ComplexShears:
    """Gauss-Newton for (tr X, tr Y, tr XY) = target on the cusp locus.

    The shear sum is pinned to the multiple of 2 pi i nearest the seed's.
    """
    goal = np.array(list(target), dtype=complex)
    k = round(seed.sum.imag / (2 * math.pi))
    s = seed.array()

    def residual(s):
        F = np.concatenate([_traces(s) - goal, [s.sum() - 2j * math.pi * k]])
        return F, float(np.abs(F).max())

    res = math.inf
    try:
        for it in range(max_steps + 1):
            F, res = residual(s)
            if res <= tol:
                return ComplexShears.from_array(s)
            if it == max_steps or not math.isfinite(res):
                break
            J = np.vstack([_trace_jacobian(s), np.ones((1, 3))])
            step = np.linalg.lstsq(J, -F, rcond=None)[0]
            s = s + step
    except (ArithmeticError, np.linalg.LinAlgError):
        res = math.inf
    raise NonConvergenceError(f"shear fit did not converge in {max_steps} steps (residual {res:.3e})", res)


# tangent space of the trace chart ---------------------------------------------


@dataclass(frozen=True)
class RepresentationTangent:
    """Derivative of the trace chart (x, y, z) along a path of representations."""

    d: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.d)):
            raise ValueError("tangent has non-finite entries")

    def realified(self) -> np.ndarray:
        return np.concatenate([self.d.real, self.d.imag])


@dataclass(frozen=True)
class ChartJacobian:
    real: tuple[RepresentationTangent, ...]  # spans P
    imaginary: tuple[RepresentationTangent, ...]  # spans iP
    cauchy_riemann: float
    gram_det: float


def _directional(s: np.ndarray, u: np.ndarray, h: float) -> np.ndarray:
    def central(h):
        return (_traces(s + h * u) - _traces(s - h * u)) / (2 * h)

    # one Richardson level removes the h^2 term of the central quotient
    return (4 * central(h / 2) - central(h)) / 3


def chart_jacobian(s: ComplexShears, h: float = JACOBIAN_STEP) -> ChartJacobian:
    res = cusp_residual(s)
    if res > ADMISSIBLE_TOL:
        raise InadmissibleShearsError(f"shears off the cusp locus: residual {res:.3e}", res)
    a = s.array()
    real = tuple(RepresentationTangent(_directional(a, u.astype(complex), h)) for u in SHEAR_DIRECTIONS)
    imag = tuple(RepresentationTangent(_directional(a, 1j * u, h)) for u in SHEAR_DIRECTIONS)
    cr = max(float(np.abs(b.d - 1j * a_.d).max()) for a_, b in zip(real, imag))
    V = np.array([t.realified() for t in real + imag]).T
    return ChartJacobian(real, imag, cr, float(np.linalg.det(V.T @ V)))


@dataclass(frozen=True)
class Projection:
    p: RepresentationTangent  # component in P
    q: RepresentationTangent  # v = p + i q
    preimage: np.ndarray  # real shear direction mapped to p
    residual: float  # distance of v from P + iP


def project_and_invert(v: RepresentationTangent, s0: ComplexShears, jac: ChartJacobian | None = None) -> Projection:
    """Split v = p + i q with p, q in P and pull p back to a real shear direction."""
    jac = jac or chart_jacobian(s0)
    if not jac.gram_det > GRAM_MIN:
        raise DegenerateChartError(f"P + iP is degenerate (Gram determinant {jac.gram_det:.3e})")
    V = np.array([t.realified() for t in jac.real + jac.imaginary]).T
    coef, *_ = np.linalg.lstsq(V, v.realified(), rcond=None)
    a, b = coef[:2], coef[2:]
    p = sum(c * t.d for c, t in zip(a, jac.real))
    q = sum(c * t.d for c, t in zip(b, jac.real))
    preimage = sum(c * u for c, u in zip(a, SHEAR_DIRECTIONS))
    resid = float(np.linalg.norm(V @ coef - v.realified()))
    return Projection(RepresentationTangent(np.asarray(p)), RepresentationTangent(np.asarray(q)), preimage, resid)


# CSV ------------------------------------------------------------------------------


def shears_to_csv(rows: Sequence[ComplexShears]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for s in rows:
        w.writerow(s.to_row())
    return buf.getvalue()


def shears_from_csv(text: str) -> list[ComplexShears]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError(f"expected header {','.join(CSV_HEADER)}")
    out = []
    for row in rows[1:]:
        if not row:
            continue
        v = [float(x) for x in row]
        if len(v) != 6:
            raise ValueError("shear rows need 6 columns")
        out.append(ComplexShears(complex(v[0], v[1]), complex(v[2], v[3]), complex(v[4], v[5])))
    return out


__all__ = [
    "ComplexShears",
    "SYMMETRIC_SHEARS",
    "InadmissibleShearsError",
    "NonConvergenceError",
    "DegenerateChartError",
    "holonomy_from_shears",
    "shear_traces",
    "cusp_residual",
    "cusp_sum_defect",
    "cusp_condition_fast",
    "fit_shears_to_representation",
    "RepresentationTangent",
    "ChartJacobian",
    "chart_jacobian",
    "Projection",
    "project_and_invert",
    "shears_to_csv",
    "shears_from_csv",
]
