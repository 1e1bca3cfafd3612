"""Command-line front end.

Exit codes: 0 pass, 1 configuration error, 2 invariant violation, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import bend, shearbend
from .isom3 import GeometryError, product_perturbation_gap
from .ptorus import SYMMETRIC_L_GAMMA, MarkedGroup, Slope, TraceTriple, fuchsian_orthogonal
from .tangent import NonFiniteValueError, second_one_sided_difference

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_NONCONVERGENCE = 0, 1, 2, 3

FIRST_DERIVATIVE_TOL = 1e-3
MIN_GAP = 0.1
DECAY_RATIO = 0.9
DECAY_RANGE = (3, 10)
PREFIX_GROWTH = 10.0
FUZZ_INSTANCES = 1000
FUZZ_MAX_N = 8
MARKOV_TOL = 1e-8
COMMUTATOR_TOL = 1e-9


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    l_gamma: float = SYMMETRIC_L_GAMMA
    slope: Slope = field(default_factory=lambda: Slope(0, 1))
    t_min: float = -0.5
    t_max: float = 0.5
    t_count: int = 21
    r_min: int = 1
    r_max: int = 20
    seed: int = 0
    out: str | None = None
    # converge
    t: float = 0.5
    word: str = "Y"
    # fuzz
    rhs_scale: float = 1.0
    inject_adversarial: bool = False

    def validate(self) -> "RunConfig":
        if not (math.isfinite(self.l_gamma) and self.l_gamma > 0):
            raise ConfigError("--l-gamma must be a positive length")
        if self.t_count < 3 or self.t_count % 2 == 0:
            raise ConfigError("--t-count must be odd and at least 3")
        if not self.t_min < self.t_max:
            raise ConfigError("--t-min must be below --t-max")
        if self.r_min < 1 or self.r_max < self.r_min:
            raise ConfigError("need 1 <= --r-min <= --r-max")
        if self.seed < 0:
            raise ConfigError("--seed must be an unsigned integer")
        if not self.rhs_scale > 0:
            raise ConfigError("--rhs-scale must be positive")
        return self

    def t_grid(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.t_count)


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _f(v: float) -> str:
    return f"{v:.15g}"


# subcommands ------------------------------------------------------------------------


def cmd_c2(cfg: RunConfig) -> int:
    ts = cfg.t_grid()
    if not np.any(ts == 0.0):
        # linspace may miss 0 by rounding; accept it only when exact to the grid spacing
        i = int(np.argmin(np.abs(ts)))
        if abs(ts[i]) > 1e-12 * (cfg.t_max - cfg.t_min):
            raise ConfigError("the t grid must contain t = 0")
        ts[i] = 0.0
    rows = bend.c2_experiment(cfg.l_gamma, ts)
    _emit(bend.c2_csv(rows), cfg.out)
    F = bend.boundary_length_function(cfg.l_gamma)
    rep = second_one_sided_difference(F, 0.0)
    print(
        f"F'(0-)={_f(rep.first_left)} F'(0+)={_f(rep.first_right)} "
        f"F''(0-)={_f(rep.left)} F''(0+)={_f(rep.right)} gap={_f(rep.gap)}"
    )
    ok = max(abs(rep.first_left), abs(rep.first_right)) <= FIRST_DERIVATIVE_TOL and rep.gap >= MIN_GAP
    return EXIT_OK if ok else EXIT_INVARIANT


def decay_verdict(reports: Sequence[bend.TruncationReport]) -> tuple[bool, float, float]:
    """(pass, worst ratio error(r+1)/error(r) on the decay range, worst prefix growth)."""
    err = {rep.r: rep.error for rep in reports}
    worst = 0.0
    lo, hi = DECAY_RANGE
    for r in range(lo, hi + 1):
        if r in err and r + 1 in err and err[r] > 0:
            worst = max(worst, err[r + 1] / err[r])
        elif r in err and r + 1 in err and err[r + 1] > 0:
            worst = math.inf
    norms = {rep.r: rep.max_prefix_norm for rep in reports}
    ref = norms.get(lo, min(norms.values()))
    growth = max(norms.values()) / ref
    return worst <= DECAY_RATIO and growth <= PREFIX_GROWTH, worst, growth


def cmd_converge(cfg: RunConfig) -> int:
    base = fuchsian_orthogonal(cfg.l_gamma)
    rs = list(range(cfg.r_min, cfg.r_max + 1))
    reports = bend.truncation_table(base, cfg.slope, cfg.t, cfg.word, rs)
    _emit(bend.truncation_csv(reports), cfg.out)
    ok, worst, growth = decay_verdict(reports)
    print(
        f"slope={cfg.slope} word={cfg.word} t={_f(cfg.t)} worst_ratio={_f(worst)} "
        f"error(r_max)={_f(reports[-1].error)} prefix_growth={_f(growth)}"
    )
    return EXIT_OK if ok else EXIT_NONCONVERGENCE


def _random_sl2(rng: np.random.Generator, scale: float) -> np.ndarray:
    a = scale * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    a -= np.trace(a) / 2 * np.eye(2)
    # exp of a traceless matrix has unit determinant
    w, v = np.linalg.eig(a)
    return v @ np.diag(np.exp(w)) @ np.linalg.inv(v)


ADVERSARIAL = {"mats": [[[1.0]]] * 8, "eps": [[[0.1]]] * 8}


def _perturbation_instance(rng: np.random.Generator):
    n = int(rng.integers(1, FUZZ_MAX_N + 1))
    mats = [_random_sl2(rng, 0.3) for _ in range(n)]
    size = 10.0 ** rng.uniform(-6, -1)
    eps = [size * (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) for _ in range(n)]
    return mats, eps


def _ser(mats) -> list:
    return [[[[z.real, z.imag] for z in row] for row in np.asarray(m, dtype=complex)] for m in mats]


def cmd_fuzz(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    failures = []
    tightest = None
    lines = ["kind,index,n,lhs,rhs,margin"]
    instances = [_perturbation_instance(rng) for _ in range(FUZZ_INSTANCES)]
    if cfg.inject_adversarial:
        instances.append(([np.array(m) for m in ADVERSARIAL["mats"]], [np.array(e) for e in ADVERSARIAL["eps"]]))
    for i, (mats, eps) in enumerate(instances):
        gap = product_perturbation_gap(mats, eps)
        scale = 0.5 if (cfg.inject_adversarial and i == len(instances) - 1) else cfg.rhs_scale
        rhs = gap.rhs * scale
        margin = rhs - gap.lhs
        if tightest is None or margin < tightest[0]:
            tightest = (margin, i, len(mats), gap.lhs, rhs)
        if gap.lhs > rhs:
            failures.append({"kind": "perturbation", "index": i, "lhs": gap.lhs, "rhs": rhs,
                             "mats": _ser(mats), "eps": _ser(eps)})
    # equality case: zero perturbation gives lhs = rhs = 0
    mats, _ = instances[0]
    zero = product_perturbation_gap(mats, [np.zeros((2, 2))] * len(mats))
    if zero.lhs != 0 or zero.rhs != 0:
        failures.append({"kind": "perturbation-equality", "lhs": zero.lhs, "rhs": zero.rhs})
    # invariants on random admissible shears and quakebend parameters
    for i in range(100):
        s1 = complex(rng.uniform(-1.5, 1.5), rng.uniform(-0.5, 0.5))
        s2 = complex(rng.uniform(-1.5, 1.5), rng.uniform(-0.5, 0.5))
        s = shearbend.ComplexShears(s1, s2, -s1 - s2)
        _check_group(shearbend.holonomy_from_shears(s), f"shears {i}", failures, {"shears": s.to_row()})
    slopes = [Slope(0, 1), Slope(1, 0), Slope(1, 1), Slope(1, 2), Slope(2, 3), Slope(-1, 2)]
    for i in range(100):
        l_gamma = float(rng.uniform(0.5, 3.0))
        slope = slopes[int(rng.integers(len(slopes)))]
        t = float(rng.uniform(-1.5, 1.5))
        g = bend.quakebend_by_marking(bend.QuakebendFamily(fuchsian_orthogonal(l_gamma), slope, t))
        _check_group(g, f"quakebend {i}", failures, {"l_gamma": l_gamma, "slope": str(slope), "t": t})
    margin, idx, n, lhs, rhs = tightest
    lines.append(f"tightest,{idx},{n},{_f(lhs)},{_f(rhs)},{_f(margin)}")
    lines.append(f"failures,{len(failures)},,,,")
    report = "\n".join(lines) + "\n"
    if failures:
        report += json.dumps(failures[0], sort_keys=True) + "\n"
    _emit(report, cfg.out)
    verdict = "PASS" if not failures else "FAIL"
    print(f"fuzz seed={cfg.seed} instances={len(instances)} {verdict} tightest_index={idx} margin={_f(margin)}")
    return EXIT_OK if not failures else EXIT_INVARIANT


def _check_group(g: MarkedGroup, label: str, failures: list, data: dict):
    markov = g.trace_triple().markov_residual()
    comm = g.commutator_residual()
    if markov > MARKOV_TOL or comm > COMMUTATOR_TOL:
        failures.append({"kind": "invariant", "label": label, "markov": markov, "commutator": comm, **data})


def _parse_shears(text: str) -> shearbend.ComplexShears:
    v = [float(x) for x in text.split(",")]
    if len(v) != 6:
        raise ConfigError("--shears needs re1,im1,re2,im2,re3,im3")
    return shearbend.ComplexShears(complex(v[0], v[1]), complex(v[2], v[3]), complex(v[4], v[5]))


def cmd_shears(cfg: RunConfig, action: str, shears: str | None) -> int:
    s = _parse_shears(shears) if shears else shearbend.SYMMETRIC_SHEARS
    if action == "forward":
        g = shearbend.holonomy_from_shears(s)
        tr = g.trace_triple()
        _emit("x_re,x_im,y_re,y_im,z_re,z_im\n" + tr.format() + "\n", cfg.out)
        print(f"cusp_residual={_f(shearbend.cusp_residual(s))} markov_residual={_f(tr.markov_residual())}")
        return EXIT_OK
    if action == "fit":
        base = fuchsian_orthogonal(cfg.l_gamma)
        seed = shearbend.fit_shears_to_representation(base.trace_triple(), s)
        target = bend.quakebend_by_marking(bend.QuakebendFamily(base, cfg.slope, cfg.t)).trace_triple()
        fitted = shearbend.fit_shears_to_representation(target, seed)
        back = shearbend.shear_traces(fitted)
        err = max(abs(a - b) for a, b in zip(back, target))
        _emit(shearbend.shears_to_csv([fitted]), cfg.out)
        print(f"roundtrip_trace_error={_f(err)}")
        return EXIT_OK
    jac = shearbend.chart_jacobian(s)
    lines = ["direction,dx_re,dx_im,dy_re,dy_im,dz_re,dz_im"]
    names = ["u1", "u2", "i*u1", "i*u2"]
    for name, tan in zip(names, jac.real + jac.imaginary):
        lines.append(name + "," + TraceTriple(*tan.d).format())
    _emit("\n".join(lines) + "\n", cfg.out)
    print(f"cauchy_riemann={_f(jac.cauchy_riemann)} gram_det={_f(jac.gram_det)}")
    return EXIT_OK if jac.gram_det > 1e-6 else EXIT_INVARIANT


# argument parsing ------------------------------------------------------------------


def _common(p: argparse.ArgumentParser):
    p.add_argument("--l-gamma", type=float, default=SYMMETRIC_L_GAMMA)
    p.add_argument("--slope", default="0", help="p/q, an integer, or inf")
    p.add_argument("--t-min", type=float, default=-0.5)
    p.add_argument("--t-max", type=float, default=0.5)
    p.add_argument("--t-count", type=int, default=21)
    p.add_argument("--r-min", type=int, default=1)
    p.add_argument("--r-max", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output path (standard output if omitted)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quakebend", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    p = sub.add_parser("c2", help="one-sided second derivatives of the boundary-length function")
    _common(p)
    p = sub.add_parser("converge", help="truncated crossing products versus depth r")
    _common(p)
    p.add_argument("--t", type=float, default=0.5, help="bending parameter")
    p.add_argument("--word", default="Y", help="group element xi as a word in x, y, X, Y")
    p = sub.add_parser("fuzz", help="seeded perturbation-bound and invariant suite")
    _common(p)
    p.add_argument("--rhs-scale", type=float, default=1.0, help="scale the bound (self-test)")
    p.add_argument("--inject-adversarial", action="store_true", help="add an instance that fails at half the bound")
    p = sub.add_parser("shears", help="shear-bend chart: forward, fit or jacobian")
    p.add_argument("action", choices=["forward", "fit", "jacobian"])
    _common(p)
    p.add_argument("--t", type=float, default=0.2, help="bending parameter of the fit target")
    p.add_argument("--shears", default=None, help="re1,im1,re2,im2,re3,im3 (default: symmetric triple)")
    return parser




def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    try:
        cfg = RunConfig(
            subcommand=args.subcommand,
            l_gamma=args.l_gamma,
            slope=Slope.parse(args.slope),
            t_min=args.t_min,
            t_max=args.t_max,
            t_count=args.t_count,
            r_min=args.r_min,
            r_max=args.r_max,
            seed=args.seed,
            out=args.out,
            t=getattr(args, "t", 0.5),
            word=getattr(args, "word", "Y"),
            rhs_scale=getattr(args, "rhs_scale", 1.0),
            inject_adversarial=getattr(args, "inject_adversarial", False),
        ).validate()
        if cfg.subcommand == "c2":
            return cmd_c2(cfg)
        if cfg.subcommand == "converge":
            return cmd_converge(cfg)
        if cfg.subcommand == "fuzz":
            return cmd_fuzz(cfg)
        return cmd_shears(cfg, args.action, args.shears)
    # GeometryError is a ValueError, so the order of these clauses matters
    except (shearbend.NonConvergenceError, NonFiniteValueError, bend.NotStabilizedError) as e:
        print(f"non-convergence: {e}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (GeometryError, ArithmeticError) as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
