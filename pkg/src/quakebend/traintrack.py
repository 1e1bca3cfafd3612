"""Train tracks on the once-punctured torus, weight systems and edge paths.

Both standard tracks have three oriented branches and two switches:

    c : s2 -> s1,   a : s1 -> s2 (the y direction),   b : s1 -> s2 (the x direction)

so the switch relation reads w_c = w_a + w_b at both switches. The positive
track carries slopes in [0, inf], the negative one slopes in [-inf, 0]; they
differ only in the left/right order of a and b at the switches, which is what
the order on edge paths sees.
"""

from __future__ import annotations

import cmath
import heapq
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .words import normalize_slope, slope_word

SWITCH_TOL = 1e-10


@dataclass(frozen=True)
class Switch:
    name: str
    incoming: tuple[str, ...]  # branch heads, left to right looking along the track
    outgoing: tuple[str, ...]  # branch tails, left to right


@dataclass(frozen=True)
class TrainTrack:
    name: str
    branches: tuple[str, ...]
    switches: tuple[Switch, ...]

    def __post_init__(self):
        heads = Counter(b for s in self.switches for b in s.incoming)
        tails = Counter(b for s in self.switches for b in s.outgoing)
        for b in self.branches:
            if heads[b] != 1 or tails[b] != 1:
                raise ValueError(f"branch {b!r} must have exactly one head and one tail")
        for s in self.switches:
            if not s.incoming or not s.outgoing:
                raise ValueError(f"switch {s.name!r} needs an end on each side")

    def head(self, branch: str) -> Switch:
        return next(s for s in self.switches if branch in s.incoming)

    def tail(self, branch: str) -> Switch:
        return next(s for s in self.switches if branch in s.outgoing)

    def follows(self, u: str, v: str) -> bool:
        """True if v can be traversed right after u (through a switch, side to side)."""
        return self.head(u) is self.tail(v)


POSITIVE = TrainTrack(
    "positive",
    ("a", "b", "c"),
    (Switch("s1", ("c",), ("a", "b")), Switch("s2", ("b", "a"), ("c",))),
)
NEGATIVE = TrainTrack(
    "negative",
    ("a", "b", "c"),
    (Switch("s1", ("c",), ("b", "a")), Switch("s2", ("a", "b"), ("c",))),
)
TRACKS = {t.name: t for t in (POSITIVE, NEGATIVE)}


class WeightKind(Enum):
    NONNEGATIVE = "nonnegative"
    REAL = "real"
    ANGLE = "angle"  # modulo 2 pi
    COMPLEX = "complex"  # imaginary part modulo 2 pi


def _residual(kind: WeightKind, v: complex) -> float:
    if kind is WeightKind.ANGLE:
        return abs(math.remainder(v.real, 2 * math.pi))
    if kind is WeightKind.COMPLEX:
        return abs(complex(v.real, math.remainder(v.imag, 2 * math.pi)))
    return abs(v)


@dataclass(frozen=True)
class WeightSystem:
    track: TrainTrack
    kind: WeightKind
    values: Mapping[str, complex]

    def __post_init__(self):
        missing = [b for b in self.track.branches if b not in self.values]
        if missing:
            raise ValueError(f"missing weights for branches {missing}")
        if self.kind is WeightKind.NONNEGATIVE and any(v < 0 for v in self.values.values()):
            raise ValueError("nonnegative weight system has a negative weight")

    def __add__(self, other: "WeightSystem") -> "WeightSystem":
        if other.track is not self.track or other.kind is not self.kind:
            raise ValueError("weight systems live on different tracks or kinds")
        return WeightSystem(self.track, self.kind, {b: self.values[b] + other.values[b] for b in self.track.branches})

    def scaled(self, s) -> "WeightSystem":
        kind = self.kind
        if kind is WeightKind.NONNEGATIVE and s < 0:
            kind = WeightKind.REAL
        return WeightSystem(self.track, kind, {b: s * v for b, v in self.values.items()})

    def to_table(self) -> str:
        lines = [f"# track {self.track.name}, kind {self.kind.value}", "branch,value"]
        for b in self.track.branches:
            v = complex(self.values[b])
            lines.append(f"{b},{v.real:.15g}" if v.imag == 0 else f"{b},{v.real:.15g}{v.imag:+.15g}j")
        return "\n".join(lines) + "\n"


def validate_switch_relations(track: TrainTrack, W: WeightSystem) -> float:
    """Largest |incoming sum - outgoing sum| over switches (in the quotient for modular kinds)."""
    for b in track.branches:
        if b not in W.values:
            raise KeyError(f"no weight on branch {b!r}")
    worst = 0.0
    for s in track.switches:
        diff = sum(W.values[b] for b in s.incoming) - sum(W.values[b] for b in s.outgoing)
        worst = max(worst, _residual(W.kind, complex(diff)))
    return worst


def track_for_slope(p: int, q: int) -> TrainTrack:
    p, q = normalize_slope(p, q)
    return NEGATIVE if p < 0 else POSITIVE


def carry_slope(p: int, q: int) -> tuple[str, WeightSystem]:
    """Integer weights a = |p|, b = |q|, c = |p| + |q| carrying the slope-p/q curve."""
    p, q = normalize_slope(p, q)
    track = track_for_slope(p, q)
    values = {"a": abs(p), "b": abs(q), "c": abs(p) + abs(q)}
    return track.name, WeightSystem(track, WeightKind.NONNEGATIVE, values)


# edge paths -----------------------------------------------------------------


@dataclass(frozen=True)
class EdgePath:
    branches: tuple[str, ...]
    track: TrainTrack = POSITIVE

    def __post_init__(self):
        if not self.branches:
            raise ValueError("empty edge path")
        for u, v in zip(self.branches, self.branches[1:]):
            if not self.track.follows(u, v):
                raise ValueError(f"branches {u!r}, {v!r} are not consecutive on the track")

    def __len__(self):
        return len(self.branches)

    @property
    def center(self) -> int | None:
        n = len(self.branches)
        return n // 2 if n % 2 else None

    def __str__(self):
        return "".join(self.branches)


@dataclass(frozen=True)
class CyclicEdgeWord:
    """Branches crossed, in order, by a carried closed curve (one period)."""

    branches: tuple[str, ...]
    track: TrainTrack = POSITIVE
    proper_power: bool = False

    def __post_init__(self):
        n = len(self.branches)
        if n == 0:
            raise ValueError("empty cyclic word")
        for i in range(n):
            if not self.track.follows(self.branches[i], self.branches[(i + 1) % n]):
                raise ValueError("cyclic word is not traversable")
        if _is_proper_power(self.branches) and not self.proper_power:
            raise ValueError("cyclic word is a proper power; pass proper_power=True to allow it")

    @classmethod
    def for_slope(cls, p: int, q: int) -> "CyclicEdgeWord":
        """Edge word of the slope curve: c before every letter, y -> a and x -> b."""
        p, q = normalize_slope(p, q)
        out = []
        for ch in slope_word(p, q):
            out += ["c", "a" if ch in "yY" else "b"]
        return cls(tuple(out), track_for_slope(p, q))

    def __len__(self):
        return len(self.branches)

    def subword(self, start: int, length: int) -> tuple[str, ...]:
        n = len(self.branches)
        return tuple(self.branches[(start + i) % n] for i in range(length))

    def count(self, path: Sequence[str]) -> int:
        """Occurrences of path as a cyclic subword per period."""
        path = tuple(path)
        return sum(self.subword(i, len(path)) == path for i in range(len(self.branches)))


def _is_proper_power(seq: Sequence[str]) -> bool:
    n = len(seq)
    return any(n % d == 0 and tuple(seq) == tuple(seq[:d]) * (n // d) for d in range(1, n))


@dataclass(frozen=True)
class DiracMeasure:
    """Transverse measure of mass ``weight`` on the curve of a cyclic edge word."""

    word: CyclicEdgeWord
    weight: float = 1.0

    def weights(self) -> WeightSystem:
        counts = Counter(self.word.branches)
        kind = WeightKind.NONNEGATIVE if self.weight >= 0 else WeightKind.REAL
        return WeightSystem(self.word.track, kind, {b: self.weight * counts[b] for b in self.word.track.branches})


def edge_path_mass(measure, path) -> float:
    """Mass of the set of leaves following ``path``.

    For a Dirac measure this is weight times the number of occurrences per
    period; a bare weight system only determines the mass of single branches.
    """
    branches = tuple(path.branches if isinstance(path, (EdgePath, CyclicEdgeWord)) else path)
    if isinstance(measure, DiracMeasure):
        track = measure.word.track
        EdgePath(branches, track)
        return measure.weight * measure.word.count(branches)
    if isinstance(measure, WeightSystem):
        if len(branches) != 1:
            raise ValueError("a weight system determines masses of single branches only")
        if branches[0] not in measure.values:
            raise ValueError(f"branch {branches[0]!r} not carried")
        return measure.values[branches[0]]
    raise TypeError(f"unsupported measure {type(measure).__name__}")


def chop(path: EdgePath) -> EdgePath:
    """Remove the two end branches of an odd path of length >= 3."""
    n = len(path)
    if n < 3 or n % 2 == 0:
        raise ValueError(f"chop needs an odd path of length >= 3, got {n}")
    return EdgePath(path.branches[1:-1], path.track)


def _side(track: TrainTrack, order: tuple[str, ...], branch: str) -> int:
    return order.index(branch)


def compare(d1: EdgePath, d2: EdgePath) -> int | None:
    """-1 if d1 lies left of d2, +1 if right, 0 if equal, None if incomparable.

    Paths of equal odd length are comparable when they share the central
    branch: the nearest switch where they split apart decides, and a split on
    both ends must agree (carried leaves do not cross).
    """
    if len(d1) != len(d2) or d1.center is None or d1.track is not d2.track:
        return None
    c = d1.center
    a, b = d1.branches, d2.branches
    if a[c] != b[c]:
        return None
    track = d1.track
    verdicts = []
    for i in range(c + 1, len(a)):  # forward: branch tails at a common switch
        if a[i] != b[i]:
            order = track.tail(a[i]).outgoing
            verdicts.append(-1 if _side(track, order, a[i]) < _side(track, order, b[i]) else 1)
            break
    for i in range(c - 1, -1, -1):  # backward: branch heads at a common switch
        if a[i] != b[i]:
            order = track.head(a[i]).incoming
            verdicts.append(-1 if _side(track, order, a[i]) < _side(track, order, b[i]) else 1)
            break
    if not verdicts:
        return 0
    if len(set(verdicts)) > 1:
        return None
    return verdicts[0]


def precedes(d1: EdgePath, d2: EdgePath) -> bool:
    return compare(d1, d2) == -1


def gamma_r_subwords(word: CyclicEdgeWord, r: int) -> list[tuple[EdgePath, int]]:
    """Distinct length-(2r+1) cyclic subwords with their multiplicities per period.

    The list is a topological order of the precedence relation; incomparable
    paths keep their first-occurrence order along the period.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    n = 2 * r + 1
    first: dict[tuple[str, ...], int] = {}
    counts: Counter = Counter()
    for i in range(len(word)):
        s = word.subword(i, n)
        counts[s] += 1
        first.setdefault(s, i)
    paths = sorted(first, key=first.get)
    objs = [EdgePath(p, word.track) for p in paths]
    m = len(objs)
    succ = [[] for _ in range(m)]
    indeg = [0] * m
    for i in range(m):
        for j in range(m):
            if i != j and precedes(objs[i], objs[j]):
                succ[i].append(j)
                indeg[j] += 1
    heap = [i for i in range(m) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        i = heapq.heappop(heap)
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, j)
    if len(order) != m:
        raise ValueError("precedence relation has a cycle")
    return [(objs[i], counts[paths[i]]) for i in order]


__all__ = [
    "Switch",
    "TrainTrack",
    "POSITIVE",
    "NEGATIVE",
    "TRACKS",
    "WeightKind",
    "WeightSystem",
    "validate_switch_relations",
    "track_for_slope",
    "carry_slope",
    "EdgePath",
    "CyclicEdgeWord",
    "DiracMeasure",
    "edge_path_mass",
    "chop",
    "compare",
    "precedes",
    "gamma_r_subwords",
]
