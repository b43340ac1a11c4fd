"""Command-line entry points.

Four subcommands drive the package end to end, all reading the same run
file format (see :mod:`radlab.config`):

``classify``
    Evaluate both convergence criteria and print the predicted boundary
    class as JSON.
``solve``
    Integrate the radial system, write ``trajectory.csv`` and
    ``report.json`` into ``--out``, and print the report.
``sweep``
    Evaluate the configured parameter sweep row by row, printing and
    writing ``atlas.csv``; ``--solve`` adds a numerical run per row.
``verify``
    Run every inequality check against a solved (or supplied) trajectory
    and exit nonzero when any check fails.

Output is deterministic for a fixed config and seed: floats print in
shortest round-trip form, JSON keys keep a fixed order, and CSV rows
follow the sweep order given in the file.

Exit codes: 0 on success, 1 when validation or verification fails,
2 on configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .classify import Domain, numeric_classify, predict, reconcile
from .config import ConfigError, RunConfig, load_config
from .criteria import BorderlineUndecidable, CriterionKind, criterion
from .problem import InvalidProblem, ProblemSpec, validate_assumptions
from .solver import (
    SolverError,
    TerminationReason,
    blowup_envelope_check,
    march,
    relative_residuals,
)
from .verify import TrajectoryData, check_sandwich, trajectory_reports

__all__ = ["main"]

#: Number of gradient samples drawn for the sandwich inequality check.
SANDWICH_SAMPLES = 64

_TRAJECTORY_COLUMNS = ("r", "u", "v", "du", "dv", "res_eq1", "res_eq2")


def _fmt(value: float) -> str:
    """Shortest exact decimal form of a float (native, not numpy, repr)."""
    return repr(float(value))


def _print_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def _problem_echo(config: RunConfig) -> dict:
    return {
        "p": config.p,
        "alpha": config.alpha,
        "n": config.n,
        "f1": config.f1,
        "f2": config.f2,
        "g1": config.g1,
        "g2": config.g2,
        "h": config.h,
        "omega": config.omega,
    }


def _validation_payload(config: RunConfig, report) -> dict:
    return {
        "problem": _problem_echo(config),
        "validation": {
            "ok": report.ok,
            "errors": list(report.errors),
            "warnings": list(report.warnings),
            "k1": report.k1,
            "k2": report.k2,
        },
    }


def _sandwich_report(config: RunConfig, spec: ProblemSpec):
    """The gradient-bound ordering check on reproducible random samples."""
    rng = np.random.default_rng(config.seed)
    samples = 10.0 ** rng.uniform(-2.0, 2.0, SANDWICH_SAMPLES)
    return check_sandwich(spec.h, spec.p, samples)


# --------------------------------------------------------------------------
# classify


def cmd_classify(config: RunConfig) -> int:
    spec = config.spec()
    report = validate_assumptions(spec)
    if not report.ok:
        _print_json(_validation_payload(config, report))
        return 1

    balanced = spec.gradient_balanced
    notes: list[str] = []
    criteria: dict[str, dict | None] = {"unweighted": None, "weighted": None}
    if balanced:
        for key, kind in (
            ("unweighted", CriterionKind.UNWEIGHTED),
            ("weighted", CriterionKind.WEIGHTED),
        ):
            try:
                criteria[key] = criterion(spec, kind).to_dict()
            except BorderlineUndecidable as exc:
                notes.append(f"{key} criterion undecided: {exc}")

    classification = predict(spec, config.domain())
    payload = {
        "problem": _problem_echo(config),
        "theta": spec.theta if balanced else None,
        "delta": spec.delta if balanced else None,
        "k1": spec.k1,
        "k2": spec.k2,
        "criterion_unweighted": criteria["unweighted"],
        "criterion_weighted": criteria["weighted"],
        "predicted_class": classification.label.value,
        "notes": list(classification.details) + notes,
    }
    _print_json(payload)
    return 0


# --------------------------------------------------------------------------
# solve


def _trajectory_csv_text(spec: ProblemSpec, solution) -> str:
    res1, res2 = relative_residuals(
        spec, solution.r, solution.v, solution.w, solution.dv
    )
    lines = [",".join(_TRAJECTORY_COLUMNS)]
    for row in zip(solution.r, solution.u, solution.v, solution.w,
                   solution.dv, res1, res2):
        lines.append(",".join(_fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def cmd_solve(config: RunConfig, out_dir: str) -> int:
    spec = config.spec()
    report = validate_assumptions(spec)
    if not report.ok:
        _print_json(_validation_payload(config, report))
        return 1

    domain = config.domain()
    predicted = predict(spec, domain)
    payload: dict = {
        "problem": _problem_echo(config),
        "termination": None,
        "R0": None,
        "r_end": None,
        "v_final": None,
        "numeric_class": None,
        "predicted_class": predicted.label.value,
        "reconcile": None,
        "verify": None,
        "envelope": None,
        "stats": None,
        "notes": [],
        "trajectory_csv": None,
    }

    os.makedirs(out_dir, exist_ok=True)
    try:
        solution = march(spec, config.u0, config.v0, config.solver_options())
    except (SolverError, InvalidProblem) as exc:
        payload["notes"] = [f"solver failed: {exc}"]
        _write_report(out_dir, payload)
        _print_json(payload)
        return 0

    numeric = numeric_classify(solution, domain)
    csv_text = _trajectory_csv_text(spec, solution)
    with open(os.path.join(out_dir, "trajectory.csv"), "w", encoding="utf-8") as fh:
        fh.write(csv_text)

    checks = trajectory_reports(solution)
    checks.append(_sandwich_report(config, spec))

    envelope = None
    if (
        solution.terminated is TerminationReason.BLOW_UP
        and solution.R0 is not None
    ):
        try:
            envelope = blowup_envelope_check(solution, spec).to_dict()
        except SolverError as exc:
            payload["notes"].append(f"envelope fit unavailable: {exc}")

    payload.update(
        termination=solution.terminated.value,
        R0=solution.R0,
        r_end=solution.r_end,
        v_final=solution.v_final,
        numeric_class=numeric.label.value,
        reconcile=reconcile(predicted, numeric),
        verify=[check.to_dict() for check in checks],
        envelope=envelope,
        stats={
            "nodes": int(len(solution.r)),
            "bootstrap_nodes": int(solution.bootstrap_nodes),
            "sweeps": int(solution.sweeps),
            "rhs_evals": int(solution.rhs_evals),
        },
        notes=payload["notes"] + list(solution.notes),
        trajectory_csv="trajectory.csv",
    )
    _write_report(out_dir, payload)
    _print_json(payload)
    return 0


def _write_report(out_dir: str, payload: dict) -> None:
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, indent=2) + "\n")


# --------------------------------------------------------------------------
# sweep


def _sweep_row(
    config: RunConfig, parameter: str, value: float | None, solve: bool
) -> dict[str, str]:
    row = {
        "parameter": parameter,
        "value": "" if value is None else _fmt(value),
        "unweighted": "",
        "weighted": "",
        "predicted_class": "",
        "numeric_class": "",
        "agree": "",
        "error": "",
    }
    try:
        spec = config.spec()
    except InvalidProblem as exc:
        row["error"] = str(exc)
        return row
    report = validate_assumptions(spec)
    if not report.ok:
        row["error"] = "; ".join(report.errors)
        return row

    if spec.gradient_balanced:
        try:
            row["unweighted"] = criterion(spec, CriterionKind.UNWEIGHTED).verdict.value
            row["weighted"] = criterion(spec, CriterionKind.WEIGHTED).verdict.value
        except BorderlineUndecidable as exc:
            row["error"] = str(exc)

    predicted = predict(spec, config.domain())
    row["predicted_class"] = predicted.label.value

    if solve:
        try:
            solution = march(spec, config.u0, config.v0, config.solver_options())
        except (SolverError, InvalidProblem) as exc:
            row["error"] = str(exc)
            return row
        numeric = numeric_classify(solution, config.domain())
        row["numeric_class"] = numeric.label.value
        row["agree"] = "true" if reconcile(predicted, numeric)["agree"] else "false"
    return row


def cmd_sweep(config: RunConfig, out_dir: str, solve: bool) -> int:
    if config.sweep_parameter is None:
        jobs: list[tuple[RunConfig, str, float | None]] = [(config, "", None)]
    else:
        jobs = [
            (config.with_value(config.sweep_parameter, value),
             config.sweep_parameter, value)
            for value in config.sweep_values
        ]

    with ThreadPoolExecutor(max_workers=min(8, len(jobs))) as pool:
        rows = list(
            pool.map(lambda job: _sweep_row(job[0], job[1], job[2], solve), jobs)
        )

    fieldnames = ["parameter", "value", "unweighted", "weighted", "predicted_class"]
    if solve:
        fieldnames += ["numeric_class", "agree"]
    fieldnames.append("error")

    buffer = io.StringIO()
    writer = csv.DictWriter(
        buffer, fieldnames=fieldnames, extrasaction="ignore", lineterminator="\n"
    )
    writer.writeheader()
    writer.writerows(rows)
    text = buffer.getvalue()

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "atlas.csv"), "w", encoding="utf-8") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return 0


# --------------------------------------------------------------------------
# verify


def _load_trajectory(
    path: str, spec: ProblemSpec, options
) -> TrajectoryData:
    """Read a trajectory CSV: the first five columns must be r,u,v,du,dv."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty trajectory file") from None
        if tuple(header[:5]) != _TRAJECTORY_COLUMNS[:5]:
            raise ValueError(
                f"{path}: expected columns r,u,v,du,dv, got {','.join(header[:5])}"
            )
        columns: list[list[float]] = [[], [], [], [], []]
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) < 5:
                raise ValueError(f"{path}: line {lineno}: fewer than 5 columns")
            for store, cell in zip(columns, cells):
                try:
                    store.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: line {lineno}: non-numeric value {cell!r}"
                    ) from None
    r, u, v, du, dv = (np.asarray(col, dtype=float) for col in columns)
    return TrajectoryData(spec=spec, options=options, r=r, u=u, v=v, w=du, dv=dv)


def cmd_verify(config: RunConfig, trajectory_path: str | None) -> int:
    spec = config.spec()
    report = validate_assumptions(spec)
    if not report.ok:
        _print_json(_validation_payload(config, report))
        return 1

    try:
        if trajectory_path is not None:
            subject = _load_trajectory(trajectory_path, spec, config.solver_options())
        else:
            subject = march(spec, config.u0, config.v0, config.solver_options())
    except (SolverError, InvalidProblem, OSError, ValueError) as exc:
        _print_json({"reports": [], "pass": False, "error": str(exc)})
        return 1

    checks = trajectory_reports(subject)
    checks.append(_sandwich_report(config, spec))
    payload = {
        "reports": [check.to_dict() for check in checks],
        "pass": all(check.passed for check in checks),
    }
    _print_json(payload)
    return 0 if payload["pass"] else 1


# --------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radlab",
        description="Positive radial solutions of a quasilinear elliptic "
        "system: criteria, integration, classification, verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to a run file")
        cmd.add_argument(
            "--seed", type=int, default=None,
            help="override the config's random seed",
        )
        return cmd

    add("classify", "evaluate the convergence criteria and predict the class")

    solve = add("solve", "integrate the system and write trajectory + report")
    solve.add_argument(
        "--out", default=".", help="directory for trajectory.csv and report.json"
    )

    sweep = add("sweep", "evaluate the configured parameter sweep")
    sweep.add_argument("--out", default=".", help="directory for atlas.csv")
    sweep.add_argument(
        "--solve", action="store_true",
        help="also integrate each row and record the numeric class",
    )

    verify = add("verify", "run every inequality check; nonzero exit on failure")
    verify.add_argument(
        "--trajectory", default=None,
        help="check this trajectory CSV instead of solving first",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print("error: invalid run configuration", file=sys.stderr)
        for error in exc.errors:
            print(f"  {error}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)

    if args.command == "classify":
        return cmd_classify(config)
    if args.command == "solve":
        return cmd_solve(config, args.out)
    if args.command == "sweep":
        return cmd_sweep(config, args.out, args.solve)
    return cmd_verify(config, args.trajectory)
