"""Orientation-preserving isometries of hyperbolic 3-space as SL(2, C) matrices.

Points of the sphere at infinity are extended complex numbers; ``INF`` stands
for the point at infinity. Matrices are kept at unit determinant, and every
quantity read off a trace is reported up to the global sign of the matrix.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

INF = complex(math.inf, 0.0)

DET_TOL = 1e-12
PARABOLIC_TOL = 1e-9
ENDPOINT_SEPARATION = 1e-9
MAX_EXHAUSTIVE = 12


class GeometryError(ValueError):
    """Raised when a geometric construction is degenerate."""


class ClassificationError(GeometryError):
    """Raised when an operation needs a different isometry type."""

    def __init__(self, message, classification):
        super().__init__(message)
        self.classification = classification


def is_infinite(z) -> bool:
    return cmath.isinf(z)


def chordal_distance(z, w) -> float:
    """Chordal distance on the Riemann sphere (diameter 2)."""
    if is_infinite(z) and is_infinite(w):
        return 0.0
    if is_infinite(z):
        z, w = w, z
    if is_infinite(w):
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2)
    return 2.0 * abs(z - w) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


class Isometry:
    """A unit-determinant 2x2 complex matrix ``[[a, b], [c, d]]``."""

    __slots__ = ("m",)

    def __init__(self, m, normalize: bool = True):
        m = np.array(m, dtype=complex).reshape(2, 2)
        if normalize:
            det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            if det == 0 or not cmath.isfinite(det):
                raise GeometryError(f"matrix is not invertible (det={det})")
            m = m / cmath.sqrt(det)
        m.setflags(write=False)
        self.m = m

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(np.eye(2), normalize=False)

    @classmethod
    def diag(cls, u) -> "Isometry":
        return cls([[u, 0], [0, 1 / u]])

    @property
    def a(self):
        return self.m[0, 0]

    @property
    def b(self):
        return self.m[0, 1]

    @property
    def c(self):
        return self.m[1, 0]

    @property
    def d(self):
        return self.m[1, 1]

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    @property
    def trace(self):
        return self.a + self.d

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return compose(self, other)

    def __neg__(self) -> "Isometry":
        return Isometry(-self.m, normalize=False)

    def inverse(self) -> "Isometry":
        return Isometry([[self.d, -self.b], [-self.c, self.a]], normalize=False)

    def act(self, z):
        """Apply the Moebius map z -> (az + b)/(cz + d)."""
        a, b, c, d = self.a, self.b, self.c, self.d
        if is_infinite(z):
            return INF if c == 0 else a / c
        den = c * z + d
        if den == 0:
            return INF
        return (a * z + b) / den

    def conjugate_by(self, w: "Isometry") -> "Isometry":
        """Return ``w self w^-1``."""
        return w @ self @ w.inverse()

    def close_to(self, other: "Isometry", tol: float = 1e-9) -> bool:
        """Equality in PSL(2, C): up to the sign of the matrix."""
        return min(np.abs(self.m - other.m).max(), np.abs(self.m + other.m).max()) <= tol

    def __repr__(self):
        return f"Isometry({self.m.tolist()!r})"


def compose(f: Isometry, g: Isometry) -> Isometry:
    return Isometry(f.m @ g.m)


def normalized_trace(f: Isometry) -> complex:
    """Trace of the sign representative with Re >= 0 (ties: Im >= 0)."""
    t = complex(f.trace)
    if t.real < 0 or (t.real == 0 and t.imag < 0):
        t = -t
    return t


def sign_normalized(f: Isometry) -> Isometry:
    """The matrix sign representative whose trace is ``normalized_trace(f)``."""
    t = complex(f.trace)
    if t.real < 0 or (t.real == 0 and t.imag < 0):
        return -f
    return f


def operator_norm(f) -> float:
    """Frobenius norm; accepts an Isometry or any square array."""
    m = f.m if isinstance(f, Isometry) else np.asarray(f)
    return float(np.linalg.norm(m))


@dataclass(frozen=True)
class OrientedGeodesic:
    """Geodesic of H^3 given by its endpoints, oriented repelling -> attracting."""

    attracting: complex
    repelling: complex

    def __post_init__(self):
        if chordal_distance(self.attracting, self.repelling) < ENDPOINT_SEPARATION:
            raise GeometryError(
                f"degenerate geodesic: endpoints {self.attracting} and {self.repelling} coincide"
            )

    def reversed(self) -> "OrientedGeodesic":
        return OrientedGeodesic(self.repelling, self.attracting)

    def transformed(self, w: Isometry) -> "OrientedGeodesic":
        return OrientedGeodesic(w.act(self.attracting), w.act(self.repelling))

    def standard_frame(self) -> Isometry:
        """A Moebius map sending 0 to the repelling and infinity to the attracting end."""
        att, rep = self.attracting, self.repelling
        if is_infinite(att):
            return Isometry([[1, rep], [0, 1]])
        if is_infinite(rep):
            return Isometry([[att, -1], [1, 0]])
        return Isometry([[att, rep], [1, 1]])


def translation_along(g: OrientedGeodesic, complex_len: complex) -> Isometry:
    """Loxodromic with axis g and complex translation length ``complex_len``."""
    frame = g.standard_frame()
    half = complex_len / 2
    core = Isometry([[cmath.exp(half), 0], [0, cmath.exp(-half)]], normalize=False)
    return frame @ core @ frame.inverse()


def rotation_about(g: OrientedGeodesic, angle: float) -> Isometry:
    """Elliptic rotation by ``angle`` about g.

    Rotation about the geodesic from 0 to infinity is diag(e^{i angle/2}, e^{-i angle/2}).
    """
    if not math.isfinite(angle):
        raise GeometryError(f"rotation angle must be finite, got {angle}")
    return translation_along(g, 1j * angle)


def rotation_about_axis(f: Isometry, angle: float) -> Isometry:
    """Rotation by ``angle`` about ``axis_of(f)`` for loxodromic f, in closed form.

    With eigenvalue mu at the attracting end, N = (f - f^-1)/(mu - 1/mu) has
    eigenvalue +1 there and -1 at the repelling end, so the rotation is
    cos(angle/2) I + i sin(angle/2) N. No eigenvectors are formed.
    """
    if not math.isfinite(angle):
        raise GeometryError(f"rotation angle must be finite, got {angle}")
    cls = classify(f)
    if cls.kind is not Kind.LOXODROMIC:
        raise ClassificationError(f"closed-form rotation needs a loxodromic, got {cls.kind.value}", cls)
    (_, mu), _ = _fixed_points(f)
    a, b, c, d = f.a, f.b, f.c, f.d
    N = np.array([[a - d, 2 * b], [2 * c, d - a]]) / (mu - 1 / mu)
    m = math.cos(angle / 2) * np.eye(2) + 1j * math.sin(angle / 2) * N
    return Isometry(m)


class Kind(Enum):
    IDENTITY = "identity"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"
    LOXODROMIC = "loxodromic"


class IsometryClass(NamedTuple):
    kind: Kind
    margin: float


def classify(f: Isometry) -> IsometryClass:
    """Classify by tr^2; ``margin`` is |tr^2 - 4|."""
    t2 = complex(f.trace) ** 2
    margin = abs(t2 - 4)
    if margin <= PARABOLIC_TOL:
        off = min(np.abs(f.m - np.eye(2)).max(), np.abs(f.m + np.eye(2)).max())
        kind = Kind.IDENTITY if off <= math.sqrt(PARABOLIC_TOL) else Kind.PARABOLIC
        return IsometryClass(kind, margin)
    if abs(t2.imag) <= 1e-12 * max(1.0, abs(t2)) and 0.0 <= t2.real < 4.0:
        return IsometryClass(Kind.ELLIPTIC, margin)
    return IsometryClass(Kind.LOXODROMIC, margin)


class ComplexLength(NamedTuple):
    length: float
    angle: float

    @property
    def value(self) -> complex:
        return complex(self.length, self.angle)


def _eigenpoint(f: Isometry, mu: complex) -> complex:
    # eigenvector (z, 1) of eigenvalue mu; pick the better-conditioned candidate
    a, b, c, d = f.a, f.b, f.c, f.d
    v1 = (b, mu - a)
    v2 = (mu - d, c)
    v = v1 if abs(v1[0]) + abs(v1[1]) >= abs(v2[0]) + abs(v2[1]) else v2
    if abs(v[1]) <= 1e-14 * abs(v[0]):
        return INF
    return v[0] / v[1]


def _sphere_key(z):
    if is_infinite(z):
        return (1, 0.0, 0.0)
    return (0, round(z.real, 9), round(z.imag, 9))


def _fixed_points(f: Isometry):
    """Return ((attracting, mu_att), (repelling, mu_rep))."""
    cls = classify(f)
    if cls.kind in (Kind.IDENTITY, Kind.PARABOLIC):
        raise ClassificationError(f"{cls.kind.value} isometry has no axis", cls)
    t = complex(f.trace)
    root = cmath.sqrt(t * t - 4)
    mu1, mu2 = (t + root) / 2, (t - root) / 2
    p1, p2 = _eigenpoint(f, mu1), _eigenpoint(f, mu2)
    if cls.kind is Kind.LOXODROMIC:
        if abs(mu1) >= abs(mu2):
            return (p1, mu1), (p2, mu2)
        return (p2, mu2), (p1, mu1)
    # elliptic: no dynamics, so order the fixed points on the sphere
    if _sphere_key(p1) >= _sphere_key(p2):
        return (p1, mu1), (p2, mu2)
    return (p2, mu2), (p1, mu1)


def axis_of(f: Isometry) -> OrientedGeodesic:
    """Axis of a loxodromic or elliptic isometry, oriented toward its attracting end.

    Elliptic axes carry no dynamical orientation; the larger fixed point in the
    order (finite < infinity, then by real and imaginary part) is called attracting.
    """
    (att, _), (rep, _) = _fixed_points(f)
    return OrientedGeodesic(att, rep)


def complex_length(f: Isometry) -> ComplexLength:
    """Complex translation length l + i theta with l >= 0, theta in (-pi, pi].

    Uses the eigenvalue at the attracting fixed point, so ``2 cosh((l + i theta)/2)``
    equals the trace up to sign, and the rotation sign follows the orientation of
    ``axis_of(f)``.
    """
    (_, mu_att), _ = _fixed_points(f)
    lam = 2 * cmath.log(mu_att)
    length = max(lam.real, 0.0)
    theta = math.pi - math.fmod(math.pi - lam.imag, 2 * math.pi)
    if theta > math.pi:
        theta -= 2 * math.pi
    elif theta <= -math.pi:
        theta += 2 * math.pi
    return ComplexLength(length, theta)


class PerturbationGap(NamedTuple):
    lhs: float
    rhs: float


def subsequence_product_bound(mats: Sequence) -> float:
    """Largest Frobenius norm over all ordered subsequence products, empty one included."""
    mats = [np.asarray(getattr(a, "m", a), dtype=complex) for a in mats]
    if len(mats) > MAX_EXHAUSTIVE:
        raise ValueError(f"exhaustive enumeration supports n <= {MAX_EXHAUSTIVE}, got {len(mats)}")
    size = mats[0].shape[0]
    prods = np.eye(size, dtype=complex)[None]
    for a in mats:
        prods = np.concatenate([prods, prods @ a])
    return float(np.linalg.norm(prods, axis=(1, 2)).max())


def product_perturbation_gap(mats: Sequence, perturbations: Sequence) -> PerturbationGap:
    """Both sides of the product perturbation bound.

    lhs = ||prod(A_i + e_i) - prod(A_i)||, rhs = R (exp(n R E) - 1) where R bounds
    every ordered subsequence product and E = max ||e_i||.
    """
    if len(mats) != len(perturbations):
        raise ValueError(f"length mismatch: {len(mats)} matrices, {len(perturbations)} perturbations")
    if not mats:
        raise ValueError("need at least one matrix")
    A = [np.asarray(getattr(a, "m", a), dtype=complex) for a in mats]
    eps = [np.asarray(getattr(e, "m", e), dtype=complex) for e in perturbations]
    size = A[0].shape[0]
    exact = np.eye(size, dtype=complex)
    perturbed = np.eye(size, dtype=complex)
    for a, e in zip(A, eps):
        exact = exact @ a
        perturbed = perturbed @ (a + e)
    lhs = float(np.linalg.norm(perturbed - exact))
    R = subsequence_product_bound(A)
    E = max(float(np.linalg.norm(e)) for e in eps)
    rhs = R * math.expm1(len(A) * R * E)
    return PerturbationGap(lhs, rhs)

