"""One-sided numerical derivatives and tangent-map checks.

A map is tangentiable at x when the one-sided directional derivatives
lim_{h -> 0+} (f(x + h v) - f(x))/h exist (locally uniformly in v). These are
estimated on a geometric step schedule with Richardson extrapolation, which
removes the O(h) and O(h^2) terms of the difference quotients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

NOISE_FLOOR = 1e-12
EXISTS_DISPERSION = 1e-5


class NonFiniteValueError(ArithmeticError):
    pass


@dataclass(frozen=True)
class StepSchedule:
    h0: float = 1e-2
    rho: float = 0.5
    k: int = 8

    def __post_init__(self):
        if not self.h0 > 0:
            raise ValueError("h0 must be positive")
        if not 0 < self.rho < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if self.k < 3:
            raise ValueError("need at least 3 levels")
        if self.h0 * self.rho**self.k <= NOISE_FLOOR:
            raise ValueError("finest step falls below the noise floor")

    def steps(self) -> np.ndarray:
        return self.h0 * self.rho ** np.arange(self.k)

    def halved(self) -> "StepSchedule":
        return StepSchedule(self.h0 / 2, self.rho, self.k)


DEFAULT_SCHEDULE = StepSchedule()


@dataclass(frozen=True)
class OneSidedDerivative:
    estimate: np.ndarray  # finest raw difference quotient
    value: np.ndarray  # extrapolated
    dispersion: float

    def __float__(self):
        return float(np.real_if_close(self.value).reshape(-1)[0])


@dataclass(frozen=True)
class SecondDifferenceReport:
    right: float
    left: float
    gap: float
    first_right: float
    first_left: float  # ordinary left derivative f'(x-)


def _eval(f, z) -> np.ndarray:
    v = np.atleast_1d(np.asarray(f(z)))
    v = v.astype(complex if np.iscomplexobj(v) else float)
    if not np.all(np.isfinite(v)):
        raise NonFiniteValueError(f"non-finite value at {z!r}")
    return v


def _richardson(q: np.ndarray, rho: float) -> np.ndarray:
    """Two elimination passes for errors of order h and h^2 (rows indexed by level)."""
    r1 = (q[1:] - rho * q[:-1]) / (1 - rho)
    return (r1[1:] - rho**2 * r1[:-1]) / (1 - rho**2)


def _extrapolate(q: np.ndarray, rho: float) -> tuple[np.ndarray, float]:
    r2 = _richardson(q, rho)
    tail = r2[-3:] if len(r2) >= 3 else r2
    dispersion = max(float(np.linalg.norm(a - b)) for a in tail for b in tail)
    return r2[-1], dispersion


def one_sided_derivative(
    f: Callable, x, direction=1.0, schedule: StepSchedule = DEFAULT_SCHEDULE
) -> OneSidedDerivative:
    """lim_{h -> 0+} (f(x + h direction) - f(x))/h.

    ``direction`` may be a scalar (for maps of a real variable) or a vector.
    """
    x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    v = np.asarray(direction, dtype=float) if np.ndim(direction) else float(direction)
    f0 = _eval(f, x)
    if np.all(np.asarray(v) == 0):
        zero = np.zeros_like(f0)
        return OneSidedDerivative(zero, zero, 0.0)
    q = np.array([(_eval(f, x + h * v) - f0) / h for h in schedule.steps()])
    value, dispersion = _extrapolate(q, schedule.rho)
    return OneSidedDerivative(q[-1], value, dispersion)


def tangent_map(f: Callable, x, schedule: StepSchedule = DEFAULT_SCHEDULE) -> Callable:
    """v -> extrapolated one-sided derivative of f at x in direction v."""
    return lambda v: one_sided_derivative(f, x, v, schedule).value


def second_one_sided_difference(f: Callable, x: float, schedule: StepSchedule = DEFAULT_SCHEDULE) -> SecondDifferenceReport:
    """One-sided second derivatives 2 (f(x +- h) - f(x) -+ h f'(x+-))/h^2, extrapolated."""
    f0 = _eval(f, x)
    out = {}
    for sgn in (1.0, -1.0):
        T = one_sided_derivative(f, x, sgn, schedule).value  # = sgn f'(x sgn)
        q = np.array([2 * (_eval(f, x + sgn * h) - f0 - h * T) / h**2 for h in schedule.steps()])
        value, _ = _extrapolate(q, schedule.rho)
        out[sgn] = (float(np.real(value[0])), float(np.real(sgn * T[0])))
    right, left = out[1.0][0], out[-1.0][0]
    return SecondDifferenceReport(right, left, abs(right - left), out[1.0][1], out[-1.0][1])


def homogeneity_check(T: Callable, directions: Iterable, scales: Sequence[float]) -> float:
    """max ||T(a v) - a T(v)|| over sampled directions v and scales a >= 0."""
    worst = 0.0
    for v in directions:
        v = np.asarray(v, dtype=float) if np.ndim(v) else float(v)
        Tv = np.asarray(T(v))
        for a in scales:
            if a < 0:
                raise ValueError("homogeneity is only positive")
            worst = max(worst, float(np.linalg.norm(np.asarray(T(a * v)) - a * Tv)))
    return worst


def inverse_tangent_check(
    phi: Callable, phi_inv: Callable, x, directions: Iterable, schedule: StepSchedule = DEFAULT_SCHEDULE
) -> float:
    """max ||T_{phi(x)} phi^-1 (T_x phi (v)) - v|| over the directions."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(phi(x), dtype=float)
    Tphi = tangent_map(phi, x, schedule)
    Tinv = tangent_map(phi_inv, y, schedule)
    worst = 0.0
    for v in directions:
        v = np.asarray(v, dtype=float)
        w = np.real(Tphi(v))
        worst = max(worst, float(np.linalg.norm(np.real(Tinv(w)) - v)))
    return worst


def tangent_map_exists(
    f: Callable, x, directions: Iterable, schedule: StepSchedule = DEFAULT_SCHEDULE, tol: float = EXISTS_DISPERSION
) -> bool:
    """Dispersion <= tol in every direction and estimates stable under halving h0."""
    for v in directions:
        a = one_sided_derivative(f, x, v, schedule)
        b = one_sided_derivative(f, x, v, schedule.halved())
        if a.dispersion > tol or b.dispersion > tol:
            return False
        if np.linalg.norm(a.value - b.value) > max(10 * max(a.dispersion, b.dispersion), tol):
            return False
    return True


__all__ = [
    "StepSchedule",
    "DEFAULT_SCHEDULE",
    "OneSidedDerivative",
    "SecondDifferenceReport",
    "NonFiniteValueError",
    "one_sided_derivative",
    "tangent_map",
    "second_one_sided_difference",
    "homogeneity_check",
    "inverse_tangent_check",
    "tangent_map_exists",
]
