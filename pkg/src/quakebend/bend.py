"""Bending (quakebend) deformations along a weighted simple closed curve.

Two independent constructions of the bent holonomy rho_t are provided:

* by marking: re-mark so the bending curve is a generator A, rotate the other
  generator B about the axis of A by t, and mark back;
* by crossings: multiply rotations by t about every lift of the bending curve
  crossed by the geodesic arc from a base point p0 to xi.p0, ordered from p0.

Truncated versions of the second construction replace each lift by the
geodesic through two orbit points reached by following its periodic word r
full periods each way, which converges exponentially in r.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import h2
from .isom3 import (
    GeometryError,
    Isometry,
    Kind,
    OrientedGeodesic,
    axis_of,
    classify,
    complex_length,
    operator_norm,
    rotation_about_axis,
)
from .ptorus import MarkedGroup, Slope, fuchsian_orthogonal
from .words import inverse_word, reduce_word, slope_automorphism

# Sign relating the left-orientation rule to the rotation angle, calibrated once
# against quakebend_by_marking (slope 0, xi = xy, t = 0.1) and frozen.
ROTATION_SIGN = 1

BASE_JITTER = 1e-3
STABILIZATION_STEP = 2.0


class NotStabilizedError(GeometryError):
    """Crossing set changed when the search radius was enlarged."""


@dataclass(frozen=True)
class QuakebendFamily:
    base: MarkedGroup
    slope: Slope
    t: float


def quakebend_by_marking(fam: QuakebendFamily) -> MarkedGroup:
    """rho_t with rho_t(A) = A and rho_t(B) = R_{axis A}^t B in a marking where the
    bending curve is the first generator A, expressed back in the original marking."""
    if fam.t == 0:
        return fam.base
    phi = slope_automorphism(fam.slope.p, fam.slope.q)
    A = fam.base.evaluate(phi.images[0])
    B = fam.base.evaluate(phi.images[1])
    R = rotation_about_axis(A, fam.t)
    bent = MarkedGroup(A, R @ B)
    return MarkedGroup(bent.evaluate(phi.inverse_images[0]), bent.evaluate(phi.inverse_images[1]))


@dataclass(frozen=True)
class CrossingLift:
    word: str  # coset representative w; the lift is rho_0(w) . axis(A)
    element: Isometry
    geodesic: OrientedGeodesic  # oriented with the base point on its left
    position: float  # distance from p0 along the arc to the crossing point
    forward: bool  # True if the orientation agrees with w A w^-1's translation


def _point_array(mats: np.ndarray, p: complex) -> np.ndarray:
    return (mats[:, 0, 0] * p + mats[:, 0, 1]) / (mats[:, 1, 0] * p + mats[:, 1, 1])


def _dist_array(z: np.ndarray, p: complex) -> np.ndarray:
    return np.arccosh(1.0 + np.abs(z - p) ** 2 / (2.0 * z.imag * p.imag))


_INV = {"x": "X", "X": "x", "y": "Y", "Y": "y"}


class _Context:
    """Per (base, slope) data: bending element, base point and an orbit ball."""

    def __init__(self, base: MarkedGroup, slope: Slope):
        if not base.is_real(1e-12):
            raise GeometryError("crossing constructions need a Fuchsian (real) base group")
        self.base = base
        self.slope = slope
        self.W = slope.word
        self.A = base.evaluate(self.W)
        if classify(self.A).kind is not Kind.LOXODROMIC:
            raise GeometryError("bending curve must be hyperbolic in the base group")
        self.axis = axis_of(self.A)
        self.ell = complex_length(self.A).length
        # rotation about the axis of A by angle b is cos(b/2) I + i sin(b/2) N
        self.N = (rotation_about_axis(self.A, math.pi).m / 1j).real
        self.p0 = h2.jitter_along_bisector(axis_of(base.X), axis_of(base.Y), BASE_JITTER)
        self.gen = {ch: base.evaluate(ch).m.real for ch in "xXyY"}
        self.step = max(h2.distance(self.p0, complex(Isometry(m).act(self.p0))) for m in self.gen.values())
        T, _ = h2.normalizer(self.axis)
        w = T(self.p0)
        self.axis_distance = math.asinh(abs(w.real) / w.imag)
        self._ball_radius = -1.0
        self._ball_words: list[str] = []
        self._ball_mats = np.zeros((0, 2, 2))
        self._ball_dist = np.zeros(0)
        self._gen_lifts: dict[str, list[str]] = {}
        self._crossings: dict[tuple, list] = {}

    # orbit ball -----------------------------------------------------------
    def ball(self, radius: float):
        if radius > self._ball_radius:
            self._grow_ball(radius)
        keep = self._ball_dist <= radius
        idx = np.nonzero(keep)[0]
        return [self._ball_words[i] for i in idx], self._ball_mats[idx], self._ball_dist[idx]

    def _grow_ball(self, radius: float):
        # breadth-first over reduced words, pruning a generator step beyond the radius
        limit = radius + self.step
        words_all = [""]
        mats_all = [np.eye(2)[None]]
        dist_all = [np.zeros(1)]
        frontier_words = [""]
        frontier = np.eye(2)[None]
        while frontier_words:
            new_words, new_mats = [], []
            for ch, g in self.gen.items():
                ok = [i for i, w in enumerate(frontier_words) if not w or w[-1] != _INV[ch]]
                if not ok:
                    continue
                m = frontier[ok] @ g
                new_mats.append(m)
                new_words.extend(frontier_words[i] + ch for i in ok)
            if not new_words:
                break
            mats = np.concatenate(new_mats)
            d = _dist_array(_point_array(mats, self.p0), self.p0)
            keep = d <= limit
            idx = np.nonzero(keep)[0]
            frontier_words = [new_words[i] for i in idx]
            frontier = mats[idx]
            words_all.extend(frontier_words)
            mats_all.append(frontier)
            dist_all.append(d[idx])
        self._ball_words = words_all
        self._ball_mats = np.concatenate(mats_all)
        self._ball_dist = np.concatenate(dist_all)
        self._ball_radius = radius

    # lifts ----------------------------------------------------------------
    def key(self, rep: str) -> str:
        """The conjugate w A w^-1 as a reduced word; equal iff the lifts coincide."""
        return reduce_word(rep + self.W + inverse_word(rep))

    def lift_geodesic(self, m: np.ndarray) -> OrientedGeodesic:
        return self.axis.transformed(Isometry(m, normalize=False))

    def separating(self, radius: float, p: complex, q: complex) -> dict[str, str]:
        """Lifts w.axis(A) with w in the orbit ball that separate p and q."""
        words, mats, _ = self.ball(radius)
        found: dict[str, str] = {}
        for w, m in zip(words, mats):
            g = self.lift_geodesic(m)
            if h2.side(g, p) * h2.side(g, q) < 0:
                k = self.key(w)
                if k not in found or len(w) < len(found[k]):
                    found[k] = w
        return found

    def generator_lifts(self, ch: str) -> list[str]:
        if ch not in self._gen_lifts:
            q = complex(Isometry(self.gen[ch]).act(self.p0))
            # a crossing lift has a coset representative within this displacement
            radius = h2.distance(self.p0, q) + self.ell / 2 + self.axis_distance + 1.0
            a = self.separating(radius, self.p0, q)
            b = self.separating(radius + STABILIZATION_STEP, self.p0, q)
            if set(a) != set(b):
                raise NotStabilizedError(f"lifts crossing generator {ch} not stabilized at radius {radius:.2f}")
            self._gen_lifts[ch] = sorted(a.values(), key=lambda w: (len(w), w))
        return self._gen_lifts[ch]


_CONTEXTS: dict[tuple, _Context] = {}


def _context(base: MarkedGroup, slope: Slope) -> _Context:
    key = (base.X.m.tobytes(), base.Y.m.tobytes(), slope.p, slope.q)
    ctx = _CONTEXTS.get(key)
    if ctx is None:
        if len(_CONTEXTS) > 64:
            _CONTEXTS.clear()
        ctx = _CONTEXTS[key] = _Context(base, slope)
    return ctx


def base_point(base: MarkedGroup) -> complex:
    """The jittered intersection point of the generator axes."""
    return h2.jitter_along_bisector(axis_of(base.X), axis_of(base.Y), BASE_JITTER)


def enumerate_crossings(
    base: MarkedGroup, slope: Slope, xi: str, search_radius: float | None = None
) -> list[CrossingLift]:
    """Lifts of the bending curve crossing the arc from p0 to xi.p0, ordered from p0.

    With ``search_radius`` D, lifts are searched among translates by group
    elements moving p0 at most D, and the result must agree with radius D + 2.
    Without it, the arc is replaced by the broken path through the prefixes of
    xi; lifts of each generator segment are found with a provably sufficient
    radius (also stabilization-checked) and kept when crossed an odd number of times.
    """
    ctx = _context(base, slope)
    xi = reduce_word(xi)
    key = (xi, search_radius)
    if key not in ctx._crossings:
        ctx._crossings[key] = _enumerate(ctx, xi, search_radius)
    return list(ctx._crossings[key])


def _enumerate(ctx: _Context, xi: str, search_radius: float | None) -> list[CrossingLift]:
    base = ctx.base
    p0 = ctx.p0
    g_xi = base.evaluate(xi)
    q = complex(g_xi.act(p0))
    if not xi:
        return []
    if search_radius is not None:
        a = ctx.separating(search_radius, p0, q)
        b = ctx.separating(search_radius + STABILIZATION_STEP, p0, q)
        if set(a) != set(b):
            raise NotStabilizedError(
                f"crossing set changed between radius {search_radius} and "
                f"{search_radius + STABILIZATION_STEP}; use a larger search radius"
            )
        reps = a
    else:
        counts: dict[str, int] = {}
        reps = {}
        prefix = ""
        for ch in xi:
            for w in ctx.generator_lifts(ch):
                rep = reduce_word(prefix + w)
                k = ctx.key(rep)
                counts[k] = counts.get(k, 0) + 1
                if k not in reps or len(rep) < len(reps[k]):
                    reps[k] = rep
            prefix += ch
        reps = {k: reps[k] for k, c in counts.items() if c % 2 == 1}
    arc = h2.geodesic_through(p0, q)
    out = []
    for rep in reps.values():
        m = base.evaluate(rep)
        g = ctx.axis.transformed(m)
        s0, s1 = h2.side(g, p0), h2.side(g, q)
        if s0 * s1 >= 0:
            raise GeometryError(f"lift {rep!r} does not separate the arc endpoints")
        pt = h2.crossing_point(arc, g)
        forward = s0 > 0
        out.append(CrossingLift(rep, m, g if forward else g.reversed(), h2.position_along(arc, p0, pt), forward))
    out.sort(key=lambda c: c.position)
    for a, b in zip(out, out[1:]):
        if not b.position > a.position:
            raise GeometryError("crossing positions are not strictly ordered")
    return out


def _telescoped(base: MarkedGroup, pieces, xi: str, with_norms: bool = True):
    """Product rho(u_1) L_1 rho(u_1^-1 u_2) L_2 ... L_p rho(u_p^-1 xi).

    Each piece (u_i, L_i) is a rotation written in the frame of the group element
    u_i; the rotation about u_i.g is rho(u_i) L_i rho(u_i)^-1. Telescoping keeps
    every factor well conditioned even for lifts far from the base point.
    Returns the product and the largest norm of the rotation prefixes.
    """
    m = np.eye(2, dtype=complex)
    prev = ""
    norms = [operator_norm(m)]
    for u, L in pieces:
        m = m @ base.evaluate(reduce_word(inverse_word(prev) + u)).m @ L
        prev = u
        if with_norms:
            norms.append(operator_norm(m @ base.evaluate(inverse_word(u)).m))
    m = m @ base.evaluate(reduce_word(inverse_word(prev) + xi)).m
    return Isometry(m), max(norms)


def _exact_pieces(ctx: "_Context", lifts: Sequence[CrossingLift], t: float):
    out = []
    for c in lifts:
        angle = ROTATION_SIGN * t if c.forward else -ROTATION_SIGN * t
        out.append((c.word, math.cos(angle / 2) * np.eye(2) + 1j * math.sin(angle / 2) * ctx.N))
    return out


def quakebend_by_crossings(
    base: MarkedGroup, slope: Slope, t: float, xi: str, search_radius: float | None = None
) -> Isometry:
    """rho_t(xi) = R_{g_1}^t ... R_{g_p}^t rho_0(xi) over the ordered crossing lifts."""
    xi = reduce_word(xi)
    if t == 0:
        return base.evaluate(xi)
    ctx = _context(base, slope)
    lifts = enumerate_crossings(base, slope, xi, search_radius)
    return _telescoped(base, _exact_pieces(ctx, lifts, t), xi, with_norms=False)[0]


def quakebend_group_by_crossings(base: MarkedGroup, slope: Slope, t: float) -> MarkedGroup:
    return MarkedGroup(quakebend_by_crossings(base, slope, t, "x"), quakebend_by_crossings(base, slope, t, "y"))


# truncation ----------------------------------------------------------------


@dataclass(frozen=True)
class TruncationReport:
    r: int
    truncated: Isometry
    exact: Isometry
    error: float
    gap: float
    max_prefix_norm: float


def _power_prefix(W: str, j: int) -> str:
    """First j letters of W^infinity (j >= 0) or of (W^-1)^infinity (j < 0)."""
    src = W if j >= 0 else inverse_word(W)
    n = abs(j)
    return (src * (n // len(src) + 1))[:n]


@dataclass(frozen=True)
class _Corridor:
    """One crossing lift seen from the orbit point of p0 nearest its crossing.

    ``frame`` is a group word u and ``K`` a real unit-determinant matrix such that
    the lift is rho_0(u) K^-1 (0, inf), oriented toward infinity when ``forward``.
    In this frame the periodic word acts as z -> e^ell z and p0 sits at ``z0``.
    """

    frame: str
    K: np.ndarray
    z0: complex
    ell: float
    forward: bool


def _corridor(ctx: _Context, lift: CrossingLift, xi_q: complex) -> _Corridor:
    base = ctx.base
    W = ctx.W
    n = len(W)
    arc = h2.geodesic_through(ctx.p0, xi_q)
    pt = h2.crossing_point(arc, lift.geodesic)
    # slide the representative along the lift to the orbit point nearest the crossing
    best = None
    for j in range(-3 * n, 3 * n + 1):
        z = complex(base.evaluate(lift.word + _power_prefix(W, j)).act(ctx.p0))
        d = h2.distance(z, pt)
        if best is None or d < best[0]:
            best = (d, j)
    j = best[1]
    frame = reduce_word(lift.word + _power_prefix(W, j))
    rot = j % n
    Wr = W[rot:] + W[:rot]  # periodic word read from the chosen orbit point
    K = h2.normalizer_matrix(axis_of(base.evaluate(Wr)))
    return _Corridor(frame, K, h2.act_stable(K, ctx.p0), ctx.ell, lift.forward)


def _corridor_rotation(c: _Corridor, t: float, r: int | None):
    """Local rotation L and, for depth r, the perturbation Delta = L_r - L.

    L rotates about (0, inf). The depth-r approximant is the geodesic through the
    developed orbit points e^{-r ell} z0 and e^{r ell} z0 (r periods each way);
    it has endpoints u, v with u v = |z0|^2, so Delta is formed without cancellation.
    """
    angle = ROTATION_SIGN * t if c.forward else -ROTATION_SIGN * t
    e = np.exp(0.5j * angle)
    L = np.diag([e, 1 / e])
    if r is None:
        return L, np.zeros((2, 2), dtype=complex)
    rho = abs(c.z0)
    cos_theta = c.z0.real / rho
    s = r * c.ell
    if abs(cos_theta) < 1e-300 or s > 700:
        return L, np.zeros((2, 2), dtype=complex)
    # circle through rho e^{+-s} e^{i theta}: center rho cosh(s)/cos(theta), u v = rho^2
    center = rho * math.cosh(s) / cos_theta
    v = center + math.copysign(math.sqrt(center * center - rho * rho), center)
    u = rho * rho / v
    sig = e - 1 / e
    den = v - u
    delta = np.array([[u * sig / den, -u * v * sig / den], [sig / den, -u * sig / den]])
    return L, delta


def _frame_pieces(ctx: _Context, corridors, t: float, r, xi: str):
    """Factors G_0, ..., G_p, local rotations L_i and their depth-r perturbations.

    The product G_0 L_1 G_1 ... L_p G_p equals rho(u_1) K_1^-1 L_1 K_1 rho(u_1^-1 u_2) ...
    with G_i = K_i rho(u_i^-1 u_{i+1}) K_{i+1}^-1.
    """
    base = ctx.base
    Gs, Ls, Ds = [], [], []
    prev_word, prev_K = "", np.eye(2)
    for c in corridors:
        Kinv = np.array([[c.K[1, 1], -c.K[0, 1]], [-c.K[1, 0], c.K[0, 0]]])
        Gs.append(prev_K @ base.evaluate(reduce_word(inverse_word(prev_word) + c.frame)).m @ Kinv)
        L, D = _corridor_rotation(c, t, r)
        Ls.append(L)
        Ds.append(D)
        prev_word, prev_K = c.frame, c.K
    Gs.append(prev_K @ base.evaluate(reduce_word(inverse_word(prev_word) + xi)).m)
    return Gs, Ls, Ds


def _product(Gs, Ls):
    m = Gs[0]
    for L, G in zip(Ls, Gs[1:]):
        m = m @ L @ G
    return m


def _product_difference(Gs, La, Lb):
    """prod(G, La) - prod(G, Lb) via sum_i [..La_{<i}..] (La_i - Lb_i) [..Lb_{>i}..]."""
    p = len(La)
    suffix = [None] * (p + 1)
    suffix[p] = np.eye(2, dtype=complex)
    for i in range(p - 1, -1, -1):
        suffix[i] = Lb[i] @ Gs[i + 1] @ suffix[i + 1]
    total = np.zeros((2, 2), dtype=complex)
    prefix = Gs[0].astype(complex)
    for i in range(p):
        total = total + prefix @ (La[i] - Lb[i]) @ Gs[i + 1] @ suffix[i + 1]
        prefix = prefix @ La[i] @ Gs[i + 1]
    return total


def _prefix_norm(ctx: _Context, Gs, Ls, corridors) -> float:
    # rotation prefixes R_1 ... R_k = (G_0 L_1 G_1 ... L_k) K_k rho(u_k)^-1
    m = Gs[0].astype(complex)
    norms = [1.0]
    for k, (L, c) in enumerate(zip(Ls, corridors)):
        m = m @ L
        norms.append(operator_norm(m @ c.K @ ctx.base.evaluate(inverse_word(c.frame)).m))
        m = m @ Gs[k + 1]
    return max(norms)


def truncated_holonomy(
    base: MarkedGroup, slope: Slope, t: float, xi: str, r: int, search_radius: float | None = None
) -> TruncationReport:
    """Truncated rotation product at depth r, compared with the exact product."""
    return truncation_table(base, slope, t, xi, [r], search_radius)[0]


def truncation_table(
    base: MarkedGroup, slope: Slope, t: float, xi: str, rs: Sequence[int], search_radius: float | None = None
) -> list[TruncationReport]:
    """Errors of the depth-r truncations of rho_t(xi).

    Depth r develops each crossed lift r full periods of the bending word each
    way from the orbit point of p0 nearest the crossing and replaces the lift by
    the geodesic through the two outer orbit points. ``error`` is the Frobenius
    distance to the exact product and ``gap`` the distance to depth r + 1; both
    are assembled from the per-lift perturbations, so they stay accurate far
    below the rounding level of the products themselves.
    """
    if any(r < 1 for r in rs):
        raise ValueError("truncation depth r must be >= 1")
    ctx = _context(base, slope)
    xi = reduce_word(xi)
    lifts = enumerate_crossings(base, slope, xi, search_radius)
    xi_q = complex(base.evaluate(xi).act(ctx.p0))
    corridors = [_corridor(ctx, lift, xi_q) for lift in lifts]
    Gs, Ls, _ = _frame_pieces(ctx, corridors, t, None, xi)
    exact = _product(Gs, Ls)
    out = []
    for r in rs:
        _, _, D = _frame_pieces(ctx, corridors, t, r, xi)
        _, _, D_next = _frame_pieces(ctx, corridors, t, r + 1, xi)
        La = [L + d for L, d in zip(Ls, D)]
        Lb = [L + d for L, d in zip(Ls, D_next)]
        err = np.linalg.norm(_product_difference(Gs, La, Ls))
        gap = np.linalg.norm(_product_difference(Gs, Lb, La))
        out.append(
            TruncationReport(r, Isometry(_product(Gs, La), normalize=False), Isometry(exact, normalize=False),
                             float(err), float(gap), _prefix_norm(ctx, Gs, La, corridors))
        )
    return out


# boundary-length experiment -----------------------------------------------


@dataclass(frozen=True)
class C2Row:
    t: float
    x: complex
    y: complex
    z: complex
    L: float
    F: float
    flagged: bool = False


def boundary_length_function(l_gamma: float) -> Callable[[float], float]:
    """F(t) = tanh^2(L_t/2) for t <= 0 (L_t the length of rho_t(y)) and the constant
    tanh^2(l_0(y)/2) for t >= 0."""
    base = fuchsian_orthogonal(l_gamma)
    F0 = math.tanh(complex_length(base.Y).length / 2) ** 2
    slope = Slope(0, 1)

    def F(t: float) -> float:
        if t >= 0:
            return F0
        Y = quakebend_by_marking(QuakebendFamily(base, slope, t)).Y
        if classify(Y).kind is not Kind.LOXODROMIC:
            return 0.0
        return math.tanh(complex_length(Y).length / 2) ** 2

    return F


def c2_experiment(l_gamma: float, ts: Sequence[float]) -> list[C2Row]:
    base = fuchsian_orthogonal(l_gamma)
    slope = Slope(0, 1)
    F = boundary_length_function(l_gamma)
    rows = []
    for t in ts:
        g = quakebend_by_marking(QuakebendFamily(base, slope, float(t)))
        x, y, z = g.trace_triple()
        kind = classify(g.Y).kind
        flagged = kind is not Kind.LOXODROMIC or abs(y) <= 2
        L = complex_length(g.Y).length if kind in (Kind.LOXODROMIC, Kind.ELLIPTIC) else 0.0
        rows.append(C2Row(float(t), x, y, z, L, F(float(t)), flagged))
    return rows


def _fmt(v: float) -> str:
    return f"{v:.15g}"


C2_HEADER = ["t", "x_re", "x_im", "y_re", "y_im", "z_re", "z_im", "L", "F"]
TRUNCATION_HEADER = ["r", "error", "gap", "max_prefix_norm"]


def c2_csv(rows: Sequence[C2Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(C2_HEADER)
    for r in rows:
        w.writerow([_fmt(r.t), _fmt(r.x.real), _fmt(r.x.imag), _fmt(r.y.real), _fmt(r.y.imag),
                    _fmt(r.z.real), _fmt(r.z.imag), _fmt(r.L), _fmt(r.F)])
    return buf.getvalue()


def truncation_csv(reports: Sequence[TruncationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRUNCATION_HEADER)
    for rep in reports:
        w.writerow([rep.r, _fmt(rep.error), _fmt(rep.gap), _fmt(rep.max_prefix_norm)])
    return buf.getvalue()


__all__ = [
    "QuakebendFamily",
    "CrossingLift",
    "TruncationReport",
    "C2Row",
    "NotStabilizedError",
    "ROTATION_SIGN",
    "quakebend_by_marking",
    "enumerate_crossings",
    "quakebend_by_crossings",
    "quakebend_group_by_crossings",
    "truncated_holonomy",
    "truncation_table",
    "boundary_length_function",
    "c2_experiment",
    "c2_csv",
    "truncation_csv",
    "base_point",
]
