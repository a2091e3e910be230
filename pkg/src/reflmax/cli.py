"""Command-line front end.

Every subcommand builds an :class:`OutputEnvelope` and renders it as CSV,
JSON or an aligned table. Exit codes: 0 success, 1 a reported check
failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import closed_form as cf
from .checks import REFERENCE_CONSTANTS, run_matrix
from .core_model import (
    joint_distribution,
    joint_distribution_float,
    marginal_max,
    marginal_position,
    max_distribution_float,
)
from .monte_carlo import SimConfig, run
from .serialization import (
    DIST_COLUMNS,
    MAX_COLUMNS,
    Check,
    OutputEnvelope,
    joint_rows,
    max_rows,
    position_rows,
)

EXACT_CAP = 4096
TRIG_CAP = 10**7
FULL_ROWS_N = 2000


class UsageError(Exception):
    pass


def cmd_dist(n: int, use_float: bool = False, cap: int = EXACT_CAP) -> OutputEnvelope:
    if n < 1:
        raise UsageError("--n must be >= 1")
    params = {"n": n, "mode": "float" if use_float else "exact"}
    if not use_float:
        if n > cap:
            raise UsageError(f"--n {n} exceeds the exact-mode cap {cap}; pass --float")
        t = joint_distribution(n)
        rows = joint_rows(t) + position_rows(marginal_position(t))
        rows += [
            {"kind": "max", "n": r["N"], "x": None, "a": r["a"], "numerator": r["numerator"],
             "log2_denominator": r["log2_denominator"], "float_value": r["Q"]}
            for r in max_rows(marginal_max(t))
        ]
    else:
        p = joint_distribution_float(n)
        rows = []
        xs, as_ = np.nonzero(p)
        for x, a in sorted(zip(xs.tolist(), as_.tolist()), key=lambda t: (t[1], t[0])):
            rows.append({"kind": "joint", "n": n, "x": x, "a": a, "float_value": float(p[x, a])})
        for x, v in enumerate(p.sum(axis=1)):
            if v:
                rows.append({"kind": "position", "n": n, "x": x, "float_value": float(v)})
        for a, v in enumerate(p.sum(axis=0)):
            if v:
                rows.append({"kind": "max", "n": n, "a": a, "float_value": float(v)})
    return OutputEnvelope("dist", params, rows, DIST_COLUMNS)


def cmd_maxdist(
    n: int, route: str = "trig", use_float: bool = False, cap: int = EXACT_CAP
) -> OutputEnvelope:
    if n < 1:
        raise UsageError("--n must be >= 1")
    params = {"N": n, "route": route}
    if route == "dp":
        if use_float:
            dist = max_distribution_float(n)
            params["mode"] = "float"
        else:
            if n > cap:
                raise UsageError(f"--n {n} exceeds the dp cap {cap}; use --float or --route trig")
            dist = marginal_max(joint_distribution(n))
            params["mode"] = "exact"
        total = float(sum(float(p) for p in dist.pmf.values()))
    elif route == "trig":
        if n > TRIG_CAP:
            raise UsageError(f"--n {n} exceeds the trig cap {TRIG_CAP}")
        if n <= FULL_ROWS_N:
            dist = cf.max_distribution(n)
        else:
            dist = cf.max_distribution(n, tail_cut=1e-18)
            params["tail_cut"] = 1e-18
        total = math.fsum(dist.pmf.values())
    else:
        raise UsageError(f"unknown route {route!r}")
    rows = max_rows(dist, route=route)
    err = abs(total - 1.0)
    checks = [Check("normalization |sum Q - 1|", err <= 1e-10, err, 1e-10)]
    return OutputEnvelope("maxdist", params, rows, MAX_COLUMNS, checks)


CONSTANT_ROWS = [
    ("mean_S_over_sqrt_n", "lim E(S_n)/sqrt(n)", "sqrt(2/pi)"),
    ("var_S_over_n", "lim Var(S_n)/n", "1 - 2/pi"),
    ("mean_A_over_sqrt_n", "lim* E(A_n)/sqrt(n)", "sqrt(pi/2)"),
    ("second_moment_A_over_n", "lim* E(A_n^2)/n", "2G"),
    ("var_A_over_n", "lim* Var(A_n)/n", "2G - pi/2"),
]


def cmd_constants() -> OutputEnvelope:
    table = asy.comparison_table()
    rows = [
        {"name": key, "quantity": label, "closed_form": closed, "value": table[key],
         "reference": REFERENCE_CONSTANTS.get(key)}
        for key, label, closed in CONSTANT_ROWS
    ]
    return OutputEnvelope("constants", {}, rows, ["name", "quantity", "closed_form", "value", "reference"])


def density_grid(gamma_min: float, gamma_max: float, steps: int) -> list[float]:
    """Log-spaced grid; gamma = 1 is inserted when it lies strictly inside."""
    if not (0 < gamma_min < gamma_max):
        raise UsageError("need 0 < --gamma-min < --gamma-max")
    if steps < 2:
        raise UsageError("--steps must be >= 2")
    grid = np.geomspace(gamma_min, gamma_max, steps)
    if gamma_min < 1.0 < gamma_max:
        grid = np.union1d(grid, [1.0])
    return grid.tolist()


def cmd_density(gammas: list[float]) -> OutputEnvelope:
    if not gammas or min(gammas) <= 0:
        raise UsageError("gamma values must be > 0")
    rows, bad = [], []
    slack = 4 * np.finfo(float).eps
    for g in gammas:
        pt = asy.limiting_density(g)
        lo, hi, alpha = asy.first_term_bounds(g)
        if not (lo * (1 - slack) <= pt.density <= hi * (1 + slack)):
            bad.append(g)
        rows.append({"gamma": g, "density": pt.density, "branch": pt.branch, "lower_bound": lo,
                     "upper_bound": hi, "alpha": alpha, "theta_sum": pt.theta_sum})
    checks = [Check("one-term bounds bracket every row", not bad, bad or "all bracketed", "alpha")]
    return OutputEnvelope(
        "density",
        {"gamma_min": min(gammas), "gamma_max": max(gammas), "points": len(gammas)},
        rows,
        ["gamma", "density", "branch", "lower_bound", "upper_bound", "alpha", "theta_sum"],
        checks,
    )


def cmd_simulate(n: int, trials: int, seed: int, workers: int = 1) -> OutputEnvelope:
    if n < 1 or trials < 1:
        raise UsageError("--n and --trials must be >= 1")
    s = run(SimConfig(n, trials, seed, workers))
    rows = []
    for a in range(1, max(s.hist_A) + 1):
        count = s.hist_A.get(a, 0)
        p = cf.max_pmf(n, a)
        sd = math.sqrt(trials * p * (1 - p)) if 0 < p < 1 else 0.0
        z = (count - trials * p) / sd if sd > 0 else 0.0
        rows.append({"a": a, "count": count, "empirical_prob": count / trials, "exact_prob": p,
                     "z_score": z})
    params = {"n": n, "trials": trials, "seed": seed}
    summary = {k: v for k, v in s.to_dict().items() if k not in params and not k.startswith("hist")}
    return OutputEnvelope(
        "simulate",
        params,
        rows,
        ["a", "count", "empirical_prob", "exact_prob", "z_score"],
        summary=summary,
    )


def cmd_verify(level: str) -> OutputEnvelope:
    # the checks themselves are the payload; no separate row block
    return OutputEnvelope("verify", {"level": level}, [], [], run_matrix(level))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json", "table"], default="table",
                        help="output format (default: table)")
    common.add_argument("--json", dest="format", action="store_const", const="json",
                        help="shorthand for --format json")
    common.add_argument("--out", type=Path, help="write output to this file instead of stdout")

    p = argparse.ArgumentParser(
        prog="reflmax",
        description="Running maximum of the symmetric walk reflected at the origin.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dist", parents=[common], help="exact joint law and both marginals")
    d.add_argument("--n", type=int, required=True, help="number of steps (>= 1)")
    d.add_argument("--float", action="store_true", help="64-bit float DP (no exact cap)")
    d.add_argument("--cap", type=int, default=EXACT_CAP, help=f"exact-mode cap (default {EXACT_CAP})")

    m = sub.add_parser("maxdist", parents=[common], help="law of the maximum Q_N(a)")
    m.add_argument("--n", type=int, required=True, help="number of steps N (>= 1)")
    m.add_argument("--route", choices=["dp", "trig"], default="trig",
                   help="dp: dynamic programming, trig: closed trigonometric sum (default)")
    m.add_argument("--float", action="store_true", help="float DP on the dp route")
    m.add_argument("--cap", type=int, default=EXACT_CAP, help=f"exact dp cap (default {EXACT_CAP})")

    sub.add_parser("constants", parents=[common], help="limiting moment constants")

    g = sub.add_parser("density", parents=[common], help="limiting density of the maximum")
    g.add_argument("--gamma-min", type=float, default=0.1)
    g.add_argument("--gamma-max", type=float, default=10.0)
    g.add_argument("--steps", type=int, default=41, help="log-spaced grid points (default 41)")
    g.add_argument("--gamma", type=float, help="evaluate a single gamma instead of a grid")

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo walks")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)

    v = sub.add_parser("verify", parents=[common], help="run the cross-validation matrix")
    v.add_argument("--level", choices=["quick", "full"], default="quick")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "dist":
            env = cmd_dist(args.n, args.float, args.cap)
        elif args.command == "maxdist":
            env = cmd_maxdist(args.n, args.route, args.float, args.cap)
        elif args.command == "constants":
            env = cmd_constants()
        elif args.command == "density":
            if args.gamma is not None:
                env = cmd_density([args.gamma])
            else:
                env = cmd_density(density_grid(args.gamma_min, args.gamma_max, args.steps))
        elif args.command == "simulate":
            env = cmd_simulate(args.n, args.trials, args.seed, args.workers)
        else:
            env = cmd_verify(args.level)
    except (UsageError, ValueError) as exc:
        parser.error(str(exc))

    text = env.render(args.format)
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        args.out.write_text(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # downstream pager or head closed early; not an error for us
            sys.stdout = None
    return 0 if env.ok else 1


if __name__ == "__main__":
    sys.exit(main())
