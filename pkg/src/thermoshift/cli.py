"""Command-line entry point: ``thermoshift run|verify|schema``.

Exit status is 0 when every enabled check passes, 2 on a check failure and
3 on an input error.  ``THERMOSHIFT_THREADS`` caps the worker threads used
for the eps-grid fan-out.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .demos import support_shift
from .errors import ConstructionError, InputError, ThermoshiftError
from .metastability import SplittingReport, splitting_limit
from .potential import PerturbedFamily
from .shift_core import MarkovShift
from .verify import SUITES, run_suite

log = logging.getLogger("thermoshift")

EXIT_OK = 0
EXIT_CHECK = 2
EXIT_INPUT = 3


def _workers() -> int:
    raw = os.environ.get("THERMOSHIFT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"THERMOSHIFT_THREADS must be an integer, got {raw!r}") from None


def _load_json(path: Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from None


def _inline_or_file(cfg: dict, key: str, base: Path) -> dict:
    if key in cfg:
        return cfg[key]
    return _load_json(base / cfg[f"{key}_file"])


def _grid(eps: Sequence[float]) -> tuple[float, ...]:
    grid = tuple(float(e) for e in eps)
    if any(e <= 0 for e in grid):
        raise InputError("eps grid entries must be positive")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise InputError("eps grid must be strictly decreasing")
    return grid


def _fmt_state(s) -> str:
    return str(s)


# ---------------------------------------------------------------------------
# shift experiments


def shift_columns(report: SplittingReport) -> tuple[list[str], list[list]]:
    """CSV columns and rows of a splitting report, one row per eps."""
    m0 = report.maximal.m0
    cols = ["eps", "lambda"]
    for q, cv in enumerate(report.curves, 1):
        cols.append(f"Q{q}_mass")
        cols += [f"Q{q}_delta_U{k + 1}" for k in range(m0)]
        cols += [f"Q{q}_c_U{i + 1}_U{j + 1}" for i in range(m0) for j in range(m0) if i != j]
        cols += [f"Q{q}_tilde_{lab}" for lab in cv.tilde_labels]
        cols += [f"Q{q}_cb_U{i + 1}_U{j + 1}" for (i, j) in sorted(cv.cb_ratio)]
    cols += ["test_error", "outside_mass"]
    rows = []
    for n, e in enumerate(report.eps):
        row = [float(e), float(report.lambdas[n])]
        for cv in report.curves:
            row.append(float(cv.muQ_mass[n]))
            row += [float(x) for x in cv.delta[n]]
            row += [float(cv.c[n][i, j]) for i in range(m0) for j in range(m0) if i != j]
            row += [float(x) for x in cv.tilde_delta[n]]
            row += [float(cv.cb_ratio[key][n]) for key in sorted(cv.cb_ratio)]
        row += [float(report.test_errors[n]), float(report.outside_mass[n])]
        rows.append(row)
    return cols, rows


def shift_summary(report: SplittingReport) -> dict:
    mx = report.maximal
    final = report.curves[-1]
    return {
        "kind": "shift-experiment",
        "ok": report.ok,
        "eps": list(report.eps),
        "global_pressure": mx.P_global,
        "maximal_components": [[_fmt_state(s) for s in c] for c in mx.components],
        "component_pressures": list(mx.pressures),
        "Q_schedule": [[_fmt_state(s) for s in cv.Q] for cv in report.curves],
        "a_Q": {"value": final.a_Q.value, "uncertainty": final.a_Q.uncertainty, "converged": final.a_Q.converged},
        "delta_eps_limit": [{"value": d.value, "uncertainty": d.uncertainty, "converged": d.converged} for d in final.delta_limit],
        "delta": report.delta,
        "delta_sum": report.delta_sum,
        "mu_limit": report.mu_limit,
        "a4": {"eta": report.a4_eta, "passed": report.a4_pass},
        "checks": report.checks,
        "check_values": report.check_values,
        "warnings": list(report.warnings),
    }


def _run_shift(cfg: dict, base: Path, out_base: Path) -> bool:
    fam_doc = _inline_or_file(cfg, "family", base)
    if "shift" in cfg or "shift_file" in cfg:
        shift = MarkovShift.from_dict(_inline_or_file(cfg, "shift", base))
    elif "matrix" in fam_doc:
        mat = fam_doc["matrix"]
        if "base" not in mat or "slope" not in mat:
            raise InputError("matrix family needs 'base' and 'slope'")
        shift = support_shift(mat["base"], mat["slope"])
    else:
        raise InputError("config needs 'shift' or 'shift_file' unless the family is given by matrices")
    if "eps" in cfg:
        fam_doc = {**fam_doc, "eps": list(_grid(cfg["eps"]))}
        fam_doc.pop("eps_grid", None)
    family = PerturbedFamily.from_dict(fam_doc, shift)
    _grid(family.grid)

    Q = cfg["Q"]
    schedule = None if Q == "default" else [[shift.space.states[shift.space.index_of(s)] for s in q] for q in Q]
    tol = cfg.get("tolerances", {})
    report = splitting_limit(
        family,
        shift,
        Q_schedule=schedule,
        depth=cfg.get("depth"),
        pressure_tol=tol.get("pressure", 1e-9),
        eta=tol.get("eta", 1e-3),
        extrapolation_tol=tol.get("extrapolation", 1e-4),
        ratio_tol=tol.get("ratio", 1e-2),
        workers=_workers(),
    )
    cols, rows = shift_columns(report)
    comment = (
        "eps, lambda (Perron eigenvalue); per Q set q: Qq_mass = mu_eps(Q), Qq_delta_Uk = delta_eps(Q,k), "
        "Qq_c_Ui_Uj = gap coefficients, Qq_tilde_* = finite-eps splitting weights per class met by Q, "
        "Qq_cb_Ui_Uj = c/b ratios; test_error = max indicator error against the limit measure; "
        "outside_mass = mu_eps(S minus last Q)"
    )
    out = cfg["output"]
    if "csv" in out:
        io.write_csv(out_base / out["csv"], cols, rows, comment)
    summary = shift_summary(report)
    if "json" in out:
        io.write_json(out_base / out["json"], summary)
    _report(summary["checks"], summary["check_values"], summary["warnings"])
    print("delta = " + ", ".join(f"{x:.6g}" for x in report.delta))
    return report.ok


# ---------------------------------------------------------------------------
# interval experiments


def _interval_rows(report) -> tuple[list[str], list[list]]:
    m = len(report.classes)
    cols = ["eps"] + [f"p_{k + 1}" for k in range(m)] + [f"mass_{k + 1}" for k in range(m)]
    cols += ["lebesgue_error", "lebesgue_straddle", "outside_mass", "gap", "limit_l1"]
    rows = []
    for n, r in enumerate(report.records):
        row = [float(r.eps)] + [float(x) for x in r.p.delta] + [float(x) for x in r.component_mass]
        row += [float(r.lebesgue_error), float(r.lebesgue_straddle), float(r.outside_mass), float(r.gap), float(report.limit_l1[n])]
        rows.append(row)
    return cols, rows


def interval_summary(report) -> dict:
    conditions = {}
    for key, clause in report.conditions.items():
        if key == "convergence_table":
            conditions[key] = np.asarray(clause).tolist()
        else:
            conditions[key] = {"passed": clause.passed, "value": clause.value, "detail": clause.detail}
    mc = None
    if report.mc is not None:
        mc = {
            "eps": report.mc_eps,
            "iterates": report.mc.iterates,
            "orbits": report.mc.orbits,
            "burn_in": report.mc.burn_in,
            "l1": report.mc_l1,
            "group_mass": report.mc.group_mass,
            "group_stderr": report.mc.group_stderr,
            "cells": report.mc.masses,
            "spectral_cells": report.mc_spectral_cells,
        }
    return {
        "kind": "interval-experiment",
        "ok": report.ok,
        "eps": list(report.eps),
        "Q": list(report.Q),
        "edge_classes": [list(c) for c in report.classes],
        "p_limit": [{"value": p.value, "uncertainty": p.uncertainty, "converged": p.converged} for p in report.p_limit],
        "limit_cells": report.limit_cells,
        "cell_boundaries": report.cell_boundaries,
        "monte_carlo": mc,
        "conditions": conditions,
        "checks": report.checks,
        "check_values": report.check_values,
        "warnings": list(report.warnings),
    }


def _run_interval(cfg: dict, base: Path, out_base: Path) -> bool:
    from .interval_app import PerturbedIntervalFamily, splitting_experiment

    doc = _inline_or_file(cfg, "system", base)
    if "eps" in cfg:
        doc = {**doc, "eps": list(_grid(cfg["eps"]))}
    name = Path(cfg["system_file"]).stem if "system_file" in cfg else doc.get("name", "system")
    fam = PerturbedIntervalFamily.from_dict(doc, name)
    _grid(fam.grid)
    Q = cfg.get("Q", "all")
    mc = cfg.get("monte_carlo", {})
    tol = cfg.get("tolerances", {})
    report = splitting_experiment(
        fam,
        Q=None if Q == "all" else Q,
        cell_depth=cfg.get("cell_depth", 8),
        lebesgue_depth=cfg.get("lebesgue_depth", 10),
        mc_iterates=mc.get("iterates", 10**6),
        mc_orbits=mc.get("orbits", 20000),
        mc_eps=mc.get("eps"),
        seed=cfg.get("seed", 0),
        depth=cfg.get("depth", 1),
        eta=tol.get("eta", 1e-3),
        workers=_workers(),
    )
    cols, rows = _interval_rows(report)
    comment = (
        "eps; p_k = splitting weight of edge class k; mass_k = invariant mass on class k; "
        "lebesgue_error = max |nu(pi^-1 cell) - |cell|| over dyadic cells; outside_mass = mass off Q; "
        "gap = spectral gap of the transfer operator; limit_l1 = L1 distance of cell masses to the limit mixture"
    )
    out = cfg["output"]
    if "csv" in out:
        io.write_csv(out_base / out["csv"], cols, rows, comment)
    summary = interval_summary(report)
    if "json" in out:
        io.write_json(out_base / out["json"], summary)
    _report(summary["checks"], summary["check_values"], summary["warnings"])
    print("p = " + ", ".join(f"{p.value:.6g}" for p in report.p_limit))
    return report.ok


# ---------------------------------------------------------------------------
# verify


def _verify(suite: str, seed: int, json_path: Path | None = None) -> bool:
    result = run_suite(suite, seed)
    print(f"{suite} (seed {seed}, {result.seconds:.2f} s)")
    for p in result.properties:
        print(("  PASS " if p.ok else "  FAIL ") + p.line())
    if json_path is not None:
        io.write_json(json_path, result.to_dict())
    if not result.ok:
        failing = [{"property": p.name, "tol": p.tol, "instances": p.failures} for p in result.properties if not p.ok]
        sys.stderr.write(io.dumps({"suite": suite, "seed": seed, "failures": failing}))
    return result.ok


def _report(checks: dict, values: dict, warnings: Sequence[str]) -> None:
    for name in sorted(checks):
        print(f"{'PASS' if checks[name] else 'FAIL'} {name}")
    for name, value in sorted(values.items()):
        log.info("%s = %r", name, value)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)


def run(config: str | Path, out_dir: str | Path | None = None) -> int:
    """Execute a config file and return the exit status."""
    path = Path(config)
    cfg = io.validate_config(_load_json(path))
    base = path.parent
    out_base = Path(out_dir) if out_dir is not None else Path.cwd()
    kind = cfg["kind"]
    if kind == "shift-experiment":
        ok = _run_shift(cfg, base, out_base)
    elif kind == "interval-experiment":
        ok = _run_interval(cfg, base, out_base)
    else:
        out = cfg.get("output", {})
        ok = _verify(cfg["suite"], cfg.get("seed", 0), out_base / out["json"] if "json" in out else None)
    return EXIT_OK if ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermoshift", description="Metastable splitting of perturbed Gibbs measures.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log check values and progress")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out-dir", help="directory for relative output paths (default: current directory)")
    p_ver = sub.add_parser("verify", help="run a randomized property suite")
    p_ver.add_argument("suite", choices=SUITES)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--json", help="write the suite result here")
    p_sch = sub.add_parser("schema", help="print the JSON schemas of the config kinds")
    p_sch.add_argument("kind", nargs="?", choices=sorted(io.SCHEMAS))
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "schema":
            sys.stdout.write(io.dumps(io.SCHEMAS[args.kind] if args.kind else io.SCHEMAS))
            return EXIT_OK
        if args.command == "verify":
            return EXIT_OK if _verify(args.suite, args.seed, Path(args.json) if args.json else None) else EXIT_CHECK
        return run(args.config, args.out_dir)
    except (InputError, ConstructionError) as exc:
        print(f"thermoshift: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ThermoshiftError as exc:
        print(f"thermoshift: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
