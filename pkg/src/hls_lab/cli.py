"""Command-line entry point: ``hls-lab <command> [options]``.

Exit codes: 0 all checks passed, 1 a check failed, 2 invalid parameters,
3 an output file could not be written.  Reports are JSON
``{meta, records, summary}`` or CSV (records only).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .bubbles import BubbleParams, constants, critical_bubble, tangent_fields
from .distance import comparison_verify, nearest_bubble_P, orthogonality_check
from .operators import apply_P2s_direct, funk_hecke_multiplier, multiplier_table, staggered_angles
from .oracles import (
    OracleConfig,
    fd_derivative,
    gamma_crosscheck,
    holder_inequality_scan,
    mp_constants,
    vector_inequality_scan,
)
from .sphere import Params, build_grid, lp_norm
from .stability import (
    SurveyConfig,
    constant_mode_slope,
    dual_chain_check,
    local_expansion_check,
    make_ps_sequence,
    quotient_survey,
    sign_split,
    struwe_run,
)

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    n: int
    s: float
    L: int
    m: int
    fmt: str = "json"
    output: str | None = None
    seed: int = 20240611
    slack: float = 5.0  # percent
    emit_plot: str | None = None
    options: dict = field(default_factory=dict)

    @property
    def params(self) -> Params:
        return Params(self.n, self.s)

    @property
    def slack_fraction(self) -> float:
        return self.slack / 100.0


@dataclass
class Outcome:
    records: list
    summary: dict
    passed: bool
    tolerances: dict
    plot: list = field(default_factory=list)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HLS_LAB_THREADS", "1")))
    except ValueError:
        return 1


# Commands


def cmd_constants(cfg: RunConfig) -> Outcome:
    p = cfg.params
    c = constants(p)
    lam = multiplier_table(p, cfg.L).lambdas
    records = [{"l": l, "lambda": float(v)} for l, v in enumerate(lam)]
    decreasing = bool(np.all(np.diff(lam) < 0))
    w = 4.0 * p.s / (p.n + 2.0 * p.s)
    el_gap = abs(c.c_crit**w * lam[0] - 1.0)
    summary = dict(c.as_dict(), lambda_strictly_decreasing=decreasing, euler_lagrange_gap=el_gap)
    return Outcome(
        records,
        summary,
        decreasing and el_gap <= 1e-12,
        {"euler_lagrange_gap": 1e-12},
        [(r["l"], r["lambda"]) for r in records],
    )


def cmd_survey(cfg: RunConfig) -> Outcome:
    o = cfg.options
    sc = SurveyConfig(
        degrees=tuple(o.get("degrees") or (0, 2, 3, 4)),
        eps=tuple(o.get("eps") or (1e-2, 1e-3)),
        betas=tuple(o.get("betas") or (0.95, 1.0, 1.05)),
        zetas=tuple(o.get("zetas") or (0.0, 0.4)),
    )
    grid = build_grid(cfg.params, cfg.L, cfg.m)
    rep = quotient_survey(cfg.params, sc, grid, workers=_threads())
    summary = rep.summary(cfg.slack_fraction)
    return Outcome(
        [dataclasses.asdict(r) for r in rep.records],
        summary,
        summary["passed"],
        {"slack": cfg.slack_fraction, "conformal_deviation": 0.01},
        [(r.eps, r.quotient) for r in rep.records],
    )


def cmd_expansion(cfg: RunConfig) -> Outcome:
    o = cfg.options
    grid = build_grid(cfg.params, cfg.L, cfg.m)
    ladder = tuple(o.get("eps") or (1e-2, 5e-3, 2.5e-3))
    reports = [
        local_expansion_check(cfg.params, l, b, ladder, grid)
        for l in (o.get("degrees") or (2, 3, 4))
        for b in (o.get("betas") or (0.95, 1.0, 1.05))
    ]
    got, expected = constant_mode_slope(cfg.params, grid, ladder)
    const_rel = abs(got - expected) / expected
    passed = all(r.passed and r.bound_holds for r in reports) and const_rel <= 1e-3
    summary = {
        "max_rel_error": max(r.rel_error for r in reports),
        "all_bounds_hold": all(r.bound_holds for r in reports),
        "constant_mode_slope": got,
        "constant_mode_expected": expected,
        "constant_mode_rel_error": const_rel,
        "passed": passed,
    }
    return Outcome(
        [r.as_dict() for r in reports],
        summary,
        passed,
        {"slope_rel": 1e-3},
        [(r.l, r.slope) for r in reports],
    )


def cmd_struwe(cfg: RunConfig) -> Outcome:
    o = cfg.options
    grid = build_grid(cfg.params, cfg.L, cfg.m)
    seq = make_ps_sequence(grid, "perturbation", int(o.get("k_max") or 12), int(o.get("degree") or 2))
    rep = struwe_run(seq)
    rep.slack = cfg.slack_fraction
    c = constants(cfg.params).c_crit
    tests = {
        "harmonic_3": grid.harmonic(3),
        "bubble_plus_harmonics": grid.constant(0.3 * c) + 0.5 * grid.harmonic(2) + 0.3 * grid.harmonic(5),
    }
    gaps = {name: sign_split(f) for name, f in tests.items()}
    worst_gap = max(max(abs(g.gap_pos), abs(g.gap_neg)) for g in gaps.values())
    conc = make_ps_sequence(grid, "concentration", 6)
    norms = [lp_norm(t.field, cfg.params.p) for t in conc]
    drift = max(abs(x / norms[0] - 1.0) for x in norms)
    summary = dict(
        rep.summary(),
        sign_split_max_gap=worst_gap,
        concentration_norm_drift=drift,
    )
    passed = rep.passed and worst_gap <= 1e-9 and drift <= 1e-8
    summary["passed"] = passed
    return Outcome(
        [dataclasses.asdict(r) for r in rep.records],
        summary,
        passed,
        {"slack": cfg.slack_fraction, "sign_split": 1e-9, "concentration_norm": 1e-8},
        [(r.k, r.ratio) for r in rep.records],
    )


def cmd_dual(cfg: RunConfig) -> Outcome:
    o = cfg.options
    grid = build_grid(cfg.params, cfg.L, cfg.m)
    d = constants(cfg.params).d_crit
    degree = int(o.get("degree") or 2)
    eps_list = o.get("eps") or (0.0, 1e-3, 1e-2, 5e-2)
    records = []
    for e in eps_list:
        r = dual_chain_check(grid.constant(d) + e * grid.harmonic(degree))
        records.append(dict(eps=float(e), **r.as_dict()))
    passed = all(
        r["pointwise_error"] <= 1e-12 and r["identity_error"] <= 1e-5 and r["forced_holds"] for r in records
    )
    summary = {
        "max_identity_error": max(r["identity_error"] for r in records),
        "forced_chain_holds": all(r["forced_holds"] for r in records),
        "displayed_chain_holds_count": sum(r["displayed_holds"] for r in records),
        "truncation_flags": sum(r["truncation_flag"] for r in records),
        "passed": passed,
    }
    return Outcome(
        records,
        summary,
        passed,
        {"pointwise": 1e-12, "identity": 1e-5},
        [(r["eps"], r["lhs"]) for r in records],
    )


def cmd_compare(cfg: RunConfig) -> Outcome:
    o = cfg.options
    grid = build_grid(cfg.params, cfg.L, cfg.m)
    c = constants(cfg.params).c_crit
    records = []
    for l in o.get("degrees") or (2, 3, 4):
        for e in o.get("eps") or (1e-3, 1e-2):
            u = grid.constant(c) + e * grid.harmonic(l)
            cmp = comparison_verify(u)
            orth = orthogonality_check(u, nearest_bubble_P(u))
            records.append(
                dict(l=int(l), eps=float(e), **dataclasses.asdict(cmp), orthogonality=orth.value, degenerate=orth.degenerate)
            )
    passed = all(r["holds"] and (r["degenerate"] or r["orthogonality"] <= 1e-6) for r in records)
    summary = {
        "min_ratio": min(r["ratio"] for r in records),
        "max_ratio": max(r["ratio"] for r in records),
        "K_cmp": constants(cfg.params).K_cmp,
        "max_orthogonality": max(r["orthogonality"] for r in records),
        "passed": passed,
    }
    return Outcome(records, summary, passed, {"orthogonality": 1e-6, "ratio_floor": 1e-7}, [(r["eps"], r["ratio"]) for r in records])


def cmd_selftest(cfg: RunConfig) -> Outcome:
    oc = OracleConfig(seed=cfg.seed)
    p = cfg.params
    grid = build_grid(p, cfg.L, cfg.m)
    records = []

    def add(name: str, value: float, tol: float, ok: bool | None = None):
        records.append({"check": name, "value": float(value), "tolerance": tol, "passed": bool(value <= tol if ok is None else ok)})

    add("gamma_crosscheck", gamma_crosscheck(oc.gamma_grid), oc.gamma_tol)
    mp = mp_constants(p.n, p.s)
    c = constants(p)
    add("constant_S", abs(c.S / mp["S"] - 1.0), 1e-12)
    add("constant_c_crit", abs(c.c_crit / mp["c_crit"] - 1.0), 1e-12)
    beta = p.hls_power
    scan = holder_inequality_scan([beta], oc.holder_samples, oc.seed)[beta]
    add("holder_scan", scan.worst, scan.bound)
    vec = vector_inequality_scan(p.q, oc.vector_grid)
    add("vector_inequality", vec.bound - vec.worst, 0.0, vec.holds)
    bp = BubbleParams(c.c_crit, 0.4)
    _, dz = tangent_fields(p, bp, grid)
    i = grid.m // 3
    fd = fd_derivative(lambda z: float(critical_bubble(grid, z).values[i]), 0.4, oc.fd_ladder)
    add("tangent_fd", abs(fd.value - dz.values[i]), oc.fd_tol)
    t = staggered_angles(grid, 12)
    worst = 0.0
    for l in range(0, 9):
        Y = grid.harmonic(l)
        ref = funk_hecke_multiplier(p, l) * Y.at(t)
        worst = max(worst, float(np.max(np.abs(apply_P2s_direct(Y, t) - ref)) / np.max(np.abs(ref))))
    add("direct_operator", worst, 1e-4)
    passed = all(r["passed"] for r in records)
    return Outcome(records, {"checks": len(records), "passed": passed}, passed, {r["check"]: r["tolerance"] for r in records})


COMMANDS: dict[str, Callable[[RunConfig], Outcome]] = {
    "constants": cmd_constants,
    "survey": cmd_survey,
    "expansion": cmd_expansion,
    "struwe": cmd_struwe,
    "dual": cmd_dual,
    "compare": cmd_compare,
    "selftest": cmd_selftest,
}


# Serialization


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def render(cfg: RunConfig, out: Outcome) -> str:
    if cfg.fmt == "csv":
        buf = io.StringIO()
        rows = [_clean(r) for r in out.records]
        if rows:
            keys = list(rows[0])
            w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: json.dumps(v) if isinstance(v, list) else v for k, v in r.items()})
        return buf.getvalue()
    report = {
        "meta": {
            "command": cfg.command,
            "n": cfg.n,
            "s": cfg.s,
            "L": cfg.L,
            "m": cfg.m,
            "seed": cfg.seed,
            "version": __version__,
            "tolerances": out.tolerances,
        },
        "records": out.records,
        "summary": out.summary,
    }
    return json.dumps(_clean(report), indent=2, allow_nan=False) + "\n"


def _plot_csv(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y"])
    for x, y in points:
        w.writerow([_clean(x), _clean(y)])
    return buf.getvalue()


# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=3, help="sphere dimension")
    common.add_argument("--s", type=float, default=1.0, help="fractional order, 0 < s < n/2")
    common.add_argument("--L", type=int, default=32, help="spectral cutoff")
    common.add_argument("--m", type=int, default=None, help="quadrature nodes (default 2L+16)")
    common.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
    common.add_argument("--output", default=None, help="report path (default: stdout)")
    common.add_argument("--seed", type=int, default=20240611)
    common.add_argument("--slack", type=float, default=5.0, help="percent slack for asymptotic bounds, in (0, 20]")
    common.add_argument("--emit-plot", default=None, metavar="PATH", help="write x,y CSV columns for plotting")

    parser = argparse.ArgumentParser(prog="hls-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("constants", parents=[common], help="sharp constants and multiplier table")
    sp = sub.add_parser("survey", parents=[common], help="stability quotient survey")
    sp.add_argument("--eps", type=float, nargs="+")
    sp.add_argument("--degrees", type=int, nargs="+")
    sp.add_argument("--betas", type=float, nargs="+")
    sp.add_argument("--zetas", type=float, nargs="+")
    sp = sub.add_parser("expansion", parents=[common], help="first-order expansion slopes")
    sp.add_argument("--eps", type=float, nargs="+", help="Richardson ladder")
    sp.add_argument("--degrees", type=int, nargs="+")
    sp.add_argument("--betas", type=float, nargs="+")
    sp = sub.add_parser("struwe", parents=[common], help="Palais-Smale sequence and bubble extraction")
    sp.add_argument("--k-max", type=int, default=12, dest="k_max")
    sp.add_argument("--degree", type=int, default=2)
    sp = sub.add_parser("dual", parents=[common], help="Sobolev/HLS duality chain")
    sp.add_argument("--eps", type=float, nargs="+")
    sp.add_argument("--degree", type=int, default=2)
    sp = sub.add_parser("compare", parents=[common], help="L^p versus H^{-s} projections")
    sp.add_argument("--eps", type=float, nargs="+")
    sp.add_argument("--degrees", type=int, nargs="+")
    sub.add_parser("selftest", parents=[common], help="oracle suites")
    return parser


_COMMON = {"command", "n", "s", "L", "m", "fmt", "output", "seed", "slack", "emit_plot"}


def _config(ns: argparse.Namespace) -> RunConfig:
    m = ns.m if ns.m is not None else 2 * ns.L + 16
    opts = {k: v for k, v in vars(ns).items() if k not in _COMMON}
    return RunConfig(ns.command, ns.n, ns.s, ns.L, m, ns.fmt, ns.output, ns.seed, ns.slack, ns.emit_plot, opts)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    cfg = _config(ns)
    try:
        if not 0.0 < cfg.slack <= 20.0:
            raise ValueError("slack must lie in (0, 20] percent")
        build_grid(cfg.params, cfg.L, cfg.m)
    except ValueError as exc:
        print(f"hls-lab: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        out = COMMANDS[cfg.command](cfg)
    except ValueError as exc:
        print(f"hls-lab: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        _write(cfg.output, render(cfg, out))
        if cfg.emit_plot:
            _write(cfg.emit_plot, _plot_csv(out.plot))
    except OSError as exc:
        print(f"hls-lab: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if out.passed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
