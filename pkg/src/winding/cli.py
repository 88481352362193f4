"""Command-line front end: ``winding {density,expand,lll,simulate,verify}``.

Every command prints one table, CSV by default (``--format json`` for JSON).
CSV output starts with ``# key=value`` metadata lines, then a header row.
Floats are written in shortest round-trip form.

Exit codes: 0 ok, 1 a verification check failed, 2 bad usage or input,
3 a quadrature did not converge, 4 a simulated path ran out of steps.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from . import expansion as ex
from .density import density_f1, density_f2, interval_probability
from .errors import NonConvergence, StepBudgetExceeded, WindingError
from .montecarlo import MAX_STEPS, SimConfig, estimate_interval_prob, histogram_density, sample_batch
from .numerics import DEFAULT_SPEC, QuadratureSpec
from .verify import SUITES, run_suite

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_QUAD, EXIT_BUDGET = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError("row length does not match columns")
        self.rows.append(list(row))

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in self.metadata.items():
            buf.write(f"# {k}={_cell(v) if not isinstance(v, dict) else json.dumps(v, sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [[_json_cell(v) for v in r] for r in self.rows]
        return json.dumps({"metadata": self.metadata, "columns": self.columns, "rows": rows}, indent=1) + "\n"


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_cell(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def read_csv(text: str) -> tuple[list[str], list[list[str]]]:
    """Parse CSV output back into ``(columns, rows)``; metadata lines are skipped."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    r = list(csv.reader(lines))
    return r[0], r[1:]


# ---------------------------------------------------------------------------
# argument parsing


def parse_number(s: str) -> float:
    s = s.strip().lower()
    if s in ("inf", "+inf", "infinity"):
        return math.inf
    if s in ("-inf", "-infinity"):
        return -math.inf
    try:
        return float(s)
    except ValueError:
        raise UsageError(f"not a number: {s!r}") from None


def parse_grid(s: str, log: bool) -> list[float]:
    """Comma list, or ``start:stop:count`` (log-spaced if ``log``, else linear)."""
    s = s.strip()
    if s.count(":") == 2:
        a, b, n = s.split(":")
        lo, hi = parse_number(a), parse_number(b)
        try:
            count = int(n)
        except ValueError:
            raise UsageError(f"bad grid count in {s!r}") from None
        if count < 1:
            raise UsageError("grid count must be >= 1")
        if log:
            if not (lo > 0 and hi > 0):
                raise UsageError("log-spaced grids need positive ends")
            return [float(v) for v in np.geomspace(lo, hi, count)]
        return [float(v) for v in np.linspace(lo, hi, count)]
    vals = [parse_number(v) for v in s.split(",") if v.strip()]
    if not vals:
        raise UsageError("empty grid")
    return vals


def _spec(args) -> QuadratureSpec:
    rel = args.tol
    if rel is None and os.environ.get("WINDING_TOL"):
        try:
            rel = float(os.environ["WINDING_TOL"])
        except ValueError:
            raise UsageError("WINDING_TOL must be a number") from None
    if rel is None:
        return DEFAULT_SPEC
    if not 0 < rel < 1:
        raise UsageError("tolerance must lie in (0, 1)")
    return replace(DEFAULT_SPEC, rel_tol=rel)


def _meta(command: str, args, spec: QuadratureSpec | None = None, seed=None) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command", "format")}
    meta = {"command": command, "version": __version__, "parameters": params}
    if seed is not None:
        meta["seed"] = seed
    if spec is not None:
        meta["rel_tol"] = spec.rel_tol
        meta["abs_tol"] = spec.abs_tol
    return meta


# ---------------------------------------------------------------------------
# commands


def cmd_density(args) -> ResultTable:
    spec = _spec(args)
    thetas = parse_grid(args.theta_grid, log=False)
    cols = {"f1": ["theta", "f1"], "f2": ["theta", "f2"], "both": ["theta", "f1", "f2", "abs_diff"]}[args.formula]
    table = ResultTable(cols, metadata=_meta("density", args, spec))
    for th in thetas:
        if args.formula == "f1":
            table.add(th, density_f1(th, args.t, args.rho, spec))
        elif args.formula == "f2":
            table.add(th, density_f2(th, args.t, args.rho, spec))
        else:
            f1 = density_f1(th, args.t, args.rho, spec)
            f2 = density_f2(th, args.t, args.rho, spec)
            table.add(th, f1, f2, abs(f1 - f2))
    return table


def cmd_expand(args) -> ResultTable:
    spec = _spec(args)
    thetas = parse_grid(args.theta_grid, log=False)
    ts = parse_grid(args.t_grid, log=True)
    N = args.N
    meta = _meta("expand", args, spec)
    if args.coeffs:
        if args.mode == "spitzer":
            table = ResultTable(["n", "theta", "t", "A_n", "c_n", "C_n"], metadata=meta)
            for n in range(N + 1):
                for th in thetas:
                    for t in ts:
                        table.add(n, th, t, ex.A_theta(n, th), ex.c_coeff(n, args.rho),
                                  ex.C_coeff(n, t, args.rho, spec))
        else:
            table = ResultTable(["n", "theta", "g_n"], metadata=meta)
            for n in range(N + 1):
                for th in thetas:
                    table.add(n, th, float(ex.g_eval(n, th)))
        return table

    if args.mode == "spitzer":
        table = ResultTable(["t", "theta", "partial_sum", "exact", "residual", "residual_scaled",
                             "residual_weighted"], metadata=meta)
        for t in ts:
            L = ex.log_sqrt(t)
            for th in thetas:
                s = ex.theorem1_sum(th, t, args.rho, N, spec)
                exact = ex.scaled_density(th, t, args.rho, spec)
                r = exact - s
                table.add(t, th, s, exact, r, r * L ** (N + 1), r * L ** (N + 1) * (1 + th * th) ** (N / 2 + 1))
    else:
        table = ResultTable(["t", "theta", "partial_sum", "exact", "residual", "residual_scaled"], metadata=meta)
        for t in ts:
            L = ex.log_sqrt(t)
            for th in thetas:
                s = ex.theorem2_sum(th, t, N, spec)
                exact = L * density_f2(th, t, 1.0, spec)
                table.add(t, th, s, exact, exact - s, (exact - s) * L ** (N + 1))
    return table


def cmd_lll(args) -> ResultTable:
    spec = _spec(args)
    alpha, beta = parse_number(args.alpha), parse_number(args.beta)
    if not alpha < beta:
        raise UsageError("need alpha < beta")
    table = ResultTable(["t", "exact", "expansion", "residual"], metadata=_meta("lll", args, spec))
    for t in parse_grid(args.t_grid, log=True):
        exact = ex.lll_exact(alpha, beta, t, spec)
        approx = ex.lll_correction(alpha, beta, t, args.N)
        table.add(t, exact, approx, exact - approx)
    return table


def cmd_simulate(args) -> ResultTable:
    spec = _spec(args)
    cfg = SimConfig(t=args.t, rho=args.rho, n_paths=args.n_paths, h_max=args.h_max,
                    kappa=args.kappa, master_seed=args.seed, max_steps=args.max_steps)
    meta = _meta("simulate", args, spec, seed=args.seed)
    if (args.alpha is None) != (args.beta is None):
        raise UsageError("--alpha and --beta go together")
    if args.alpha is not None:
        alpha, beta = parse_number(args.alpha), parse_number(args.beta)
        if not alpha < beta:
            raise UsageError("need alpha < beta")
        samples = sample_batch(cfg, threads=args.threads)
        p, se = estimate_interval_prob(samples, alpha, beta)
        exact = interval_probability(alpha, beta, args.t, args.rho, spec)
        table = ResultTable(["alpha", "beta", "p_hat", "std_err", "exact", "z"], metadata=meta)
        table.add(alpha, beta, p, se, exact, (p - exact) / se if se > 0 else 0.0)
        return table

    lo, hi = parse_number(args.lo), parse_number(args.hi)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi) or args.bins < 1:
        raise UsageError("histogram needs finite --lo < --hi and --bins >= 1")
    edges = np.linspace(lo, hi, args.bins + 1)
    samples = sample_batch(cfg, threads=args.threads)
    hist = histogram_density(samples, edges)
    table = ResultTable(["bin_center", "mc_density", "std_err", "exact_density", "z"], metadata=meta)
    for a, b, d, se in zip(edges[:-1], edges[1:], hist.densities, hist.std_errors):
        exact = interval_probability(a, b, args.t, args.rho, spec) / (b - a)
        z = (d - exact) / se if se > 0 else 0.0
        table.add(0.5 * (a + b), d, se, exact, z)
    return table


def cmd_verify(args) -> ResultTable:
    suites = SUITES if args.suite == "all" else (args.suite,)
    table = ResultTable(["suite", "check", "observed", "threshold", "status"],
                        metadata=_meta("verify", args, seed=args.seed))
    for s in suites:
        for c in run_suite(s, args.seed):
            table.add(s, c.name, c.observed, c.threshold, "PASS" if c.passed else "FAIL")
    return table


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="winding", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tol=True):
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if tol:
            sp.add_argument("--tol", type=float, default=None,
                            help="relative quadrature tolerance (default 1e-10, or $WINDING_TOL)")

    d = sub.add_parser("density", help="evaluate the winding density")
    d.add_argument("--theta-grid", required=True, help="comma list or start:stop:count (linear)")
    d.add_argument("--t", type=float, required=True)
    d.add_argument("--rho", type=float, default=1.0)
    d.add_argument("--formula", choices=("f1", "f2", "both"), default="f2")
    common(d)
    d.set_defaults(func=cmd_density)

    e = sub.add_parser("expand", help="large-time expansions and their residuals")
    e.add_argument("--mode", choices=("spitzer", "local"), required=True)
    e.add_argument("--N", type=int, default=1)
    e.add_argument("--t-grid", default="1e4", help="comma list or start:stop:count (log-spaced)")
    e.add_argument("--theta-grid", default="0")
    e.add_argument("--rho", type=float, default=1.0, help="starting radius (spitzer mode)")
    e.add_argument("--coeffs", action="store_true", help="emit coefficient tables instead")
    common(e)
    e.set_defaults(func=cmd_expand)

    ll = sub.add_parser("lll", help="corrections to the local limit theorem")
    ll.add_argument("--alpha", required=True)
    ll.add_argument("--beta", required=True)
    ll.add_argument("--t-grid", required=True)
    ll.add_argument("--N", type=int, default=1)
    common(ll)
    ll.set_defaults(func=cmd_lll)

    s = sub.add_parser("simulate", help="Monte Carlo winding angles")
    s.add_argument("--t", type=float, default=10.0)
    s.add_argument("--rho", type=float, default=1.0)
    s.add_argument("--n-paths", type=int, default=10**6)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--bins", type=int, default=40)
    s.add_argument("--lo", default="-6")
    s.add_argument("--hi", default="6")
    s.add_argument("--alpha", default=None)
    s.add_argument("--beta", default=None)
    s.add_argument("--h-max", type=float, default=None, help="largest time step (default t/1000)")
    s.add_argument("--kappa", type=float, default=0.01)
    s.add_argument("--max-steps", type=int, default=MAX_STEPS, help="per-path step cap")
    s.add_argument("--threads", type=int, default=1)
    common(s)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run invariant suites")
    v.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    v.add_argument("--seed", type=int, default=0)
    common(v, tol=False)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        table = args.func(args)
    except NonConvergence as e:
        print(f"error: quadrature did not converge ({e.label or 'integral'}): {e}", file=sys.stderr)
        return EXIT_QUAD
    except StepBudgetExceeded as e:
        print(f"error: step budget exceeded on path {e.path_index}: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, WindingError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    out = table.to_json() if args.format == "json" else table.to_csv()
    sys.stdout.write(out)
    if args.command == "verify" and any(r[-1] != "PASS" for r in table.rows):
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
