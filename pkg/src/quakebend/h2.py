"""Upper half-plane helpers for Fuchsian groups (real matrices, real endpoints)."""

from __future__ import annotations

import math

import numpy as np

from .isom3 import GeometryError, OrientedGeodesic, is_infinite


def distance(z: complex, w: complex) -> float:
    """Hyperbolic distance in the upper half-plane."""
    if z.imag <= 0 or w.imag <= 0:
        raise GeometryError(f"points must lie in the upper half-plane: {z}, {w}")
    return math.acosh(1.0 + abs(z - w) ** 2 / (2.0 * z.imag * w.imag))


def _real(z):
    if is_infinite(z):
        return z
    if abs(z.imag) > 1e-8 * max(1.0, abs(z)):
        raise GeometryError(f"endpoint {z} is not on the real line")
    return complex(z.real, 0.0)


def normalizer(g: OrientedGeodesic):
    """Orientation-preserving real Moebius map (as a callable and its derivative)
    sending g's repelling end to 0 and attracting end to infinity."""
    att, rep = _real(g.attracting), _real(g.repelling)
    if is_infinite(att):
        return (lambda z: z - rep.real), (lambda z: 1.0)
    if is_infinite(rep):
        a = att.real
        return (lambda z: -1.0 / (z - a)), (lambda z: 1.0 / (z - a) ** 2)
    a, r = att.real, rep.real
    s = 1.0 if r > a else -1.0
    # s (z - r)/(z - a) has determinant s (r - a) > 0
    return (lambda z: s * (z - r) / (z - a)), (lambda z: s * (r - a) / (z - a) ** 2)


def normalizer_matrix(g: OrientedGeodesic) -> np.ndarray:
    """Unit-determinant real matrix of ``normalizer(g)``."""
    att, rep = _real(g.attracting), _real(g.repelling)
    if is_infinite(att):
        m = np.array([[1.0, -rep.real], [0.0, 1.0]])
    elif is_infinite(rep):
        m = np.array([[0.0, -1.0], [1.0, -att.real]])
    else:
        a, r = att.real, rep.real
        s = 1.0 if r > a else -1.0
        m = np.array([[s, -s * r], [1.0, -a]])
    return m / math.sqrt(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def act_stable(m: np.ndarray, z: complex) -> complex:
    """Action of a real unit-determinant matrix, with the imaginary part taken as
    Im z / |cz + d|^2 so it stays accurate for images very close to the real line."""
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    den = c * z + d
    w = (a * z + b) / den
    return complex(w.real, z.imag / abs(den) ** 2)


def _hyperboloid(z: complex) -> np.ndarray:
    x, y = z.real, z.imag
    return np.array([(1 + x * x + y * y) / (2 * y), x / y, (x * x + y * y - 1) / (2 * y)])


def midpoint(p: complex, q: complex) -> complex:
    """Hyperbolic midpoint, computed on the hyperboloid (stable near the boundary)."""
    v = _hyperboloid(p) + _hyperboloid(q)
    # back to the upper half-plane: z = (v1 + i) / (v0 - v2)
    s = v[0] - v[2]
    # |v| on the hyperboloid is sqrt(2 + 2 cosh d(p, q)); avoid the cancellation in v.v
    norm = math.sqrt(4.0 + abs(p - q) ** 2 / (p.imag * q.imag))
    return complex(v[1] / s, norm / s)


def side(g: OrientedGeodesic, p: complex) -> int:
    """+1 if p lies to the left of g (looking toward the attracting end), -1 if right."""
    T, _ = normalizer(g)
    x = T(p).real
    if x == 0:
        return 0
    return 1 if x < 0 else -1


def geodesic_through(p: complex, q: complex) -> OrientedGeodesic:
    """The geodesic through two points of the upper half-plane, oriented from p to q."""
    if abs(p - q) == 0:
        raise GeometryError("points coincide")
    dx = q.real - p.real
    if abs(dx) <= 1e-15 * max(1.0, abs(p), abs(q)):
        x = complex(0.5 * (p.real + q.real), 0.0)
        inf = complex(math.inf, 0.0)
        return OrientedGeodesic(inf, x) if q.imag > p.imag else OrientedGeodesic(x, inf)
    c = (abs(q) ** 2 - abs(p) ** 2) / (2.0 * dx)
    r = abs(p - c)
    lo, hi = complex(c - r, 0.0), complex(c + r, 0.0)
    return OrientedGeodesic(hi, lo) if dx > 0 else OrientedGeodesic(lo, hi)


def _image_of_end(g: OrientedGeodesic, e) -> float:
    """normalizer(g) applied to a boundary point (math.inf for infinity)."""
    att, rep = _real(g.attracting), _real(g.repelling)
    if is_infinite(e):
        if is_infinite(att):
            return math.inf
        if is_infinite(rep):
            return 0.0
        return 1.0 if rep.real > att.real else -1.0
    e = _real(e).real
    if not is_infinite(att) and e == att.real:
        return math.inf
    T, _ = normalizer(g)
    return T(e).real


def crossing_point(arc: OrientedGeodesic, g: OrientedGeodesic):
    """Intersection point of two geodesics, or None if they do not cross."""
    a = _image_of_end(arc, g.attracting)
    b = _image_of_end(arc, g.repelling)
    if math.isinf(a) or math.isinf(b) or a * b >= 0:
        return None
    return _pull_back(arc, 1j * math.sqrt(-a * b))


def _pull_back(arc: OrientedGeodesic, w: complex) -> complex:
    """Inverse of ``normalizer(arc)`` applied to w."""
    att, rep = _real(arc.attracting), _real(arc.repelling)
    if is_infinite(att):
        return w + rep.real
    if is_infinite(rep):
        return att.real - 1.0 / w
    a, r = att.real, rep.real
    s = 1.0 if r > a else -1.0
    # w = s (z - r)/(z - a)  =>  z = (a w - s r)/(w - s)
    return (a * w - s * r) / (w - s)


def position_along(arc: OrientedGeodesic, base: complex, p: complex) -> float:
    """Signed hyperbolic distance from base to p, both on arc, in arc's direction."""
    T, _ = normalizer(arc)
    return math.log(T(p).imag / T(base).imag)


def direction_at(g: OrientedGeodesic, p: complex) -> complex:
    """Euclidean unit tangent of g at a point p on it, pointing to the attracting end."""
    _, dT = normalizer(g)
    v = 1j / dT(p)
    return v / abs(v)


def intersection(g: OrientedGeodesic, h: OrientedGeodesic) -> complex:
    p = crossing_point(g, h)
    if p is None:
        raise GeometryError("geodesics do not intersect")
    return p


def jitter_along_bisector(g: OrientedGeodesic, h: OrientedGeodesic, amount: float = 1e-3) -> complex:
    """Intersection of g and h moved by hyperbolic distance ~amount along their bisector."""
    p = intersection(g, h)
    v = direction_at(g, p) + direction_at(h, p)
    v /= abs(v)
    return p + amount * p.imag * v


__all__ = [
    "distance",
    "normalizer",
    "side",
    "normalizer_matrix",
    "act_stable",
    "midpoint",
    "geodesic_through",
    "crossing_point",
    "position_along",
    "direction_at",
    "intersection",
    "jitter_along_bisector",
]
