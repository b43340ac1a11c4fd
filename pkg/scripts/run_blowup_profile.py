#!/usr/bin/env python3
"""Resolve one blow-up trajectory and report its boundary asymptotics.

The script integrates a power-law problem until v crosses the blow-up
threshold, fits the gradient growth exponent sigma from the final decade
(u' ~ (R0 - r)^-sigma), compares it against the closed-form rate, checks
the two-sided tail envelope, and writes the near-boundary profile to CSV
as ln-distance / ln-value pairs ready for plotting.

Examples:
    python3 scripts/run_blowup_profile.py --q 4
    python3 scripts/run_blowup_profile.py --p 1.5 --q 2 --out tail.csv
"""

import argparse
import sys

import numpy as np

from radlab.classify import Domain, blow_up_rates, numeric_classify
from radlab.expressions import parse_expr
from radlab.problem import ProblemSpec
from radlab.solver import (
    SolverOptions,
    TerminationReason,
    blowup_envelope_check,
    march,
)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--p", type=float, default=2.0)
    parser.add_argument("--alpha", type=float, default=0.0)
    parser.add_argument("--m", type=int, default=1)
    parser.add_argument("--beta", type=int, default=0)
    parser.add_argument("--q", type=int, default=4)
    parser.add_argument("--u0", type=float, default=1.0)
    parser.add_argument("--v0", type=float, default=1.0)
    parser.add_argument("--target-radius", type=float, default=20.0)
    parser.add_argument("--rel-tol", type=float, default=1e-8)
    parser.add_argument("--out", default="blowup_profile.csv")
    args = parser.parse_args(argv)

    spec = ProblemSpec(
        p=args.p, alpha=args.alpha, n=3,
        f1=parse_expr("1"), f2=parse_expr("1"),
        g1=parse_expr("t" if args.m == 1 else f"t^{args.m}"),
        g2=parse_expr("1" if args.beta == 0 else f"t^{args.beta}"),
        h=parse_expr("t" if args.q == 1 else f"t^{args.q}"),
    )

    run = march(spec, args.u0, args.v0, SolverOptions(
        target_radius=args.target_radius, rel_tol=args.rel_tol))
    print(f"termination: {run.terminated.value} at r = {run.r_end:.6g} "
          f"({len(run.r)} nodes, {run.rhs_evals} rhs evaluations)")
    if run.terminated is not TerminationReason.BLOW_UP:
        print("no blow-up inside the target radius; nothing to profile")
        return 1

    print(f"extrapolated blow-up radius R0 = {run.R0:.10g}")
    label = numeric_classify(run, Domain.BALL)
    print(f"numeric class: {label.label.value}")
    for note in label.details:
        print(f"  {note}")

    rates = blow_up_rates(spec)
    if rates is not None:
        b, sigma = rates
        print(f"closed-form rates: v ~ (R0 - r)^-{b:g}, u' ~ (R0 - r)^-{sigma:g}")

    try:
        env = blowup_envelope_check(run, spec)
        print(f"tail envelope: C1 = {env.C1:.8g}, C2 = {env.C2:.8g}, "
              f"violations = {env.max_violation:g} "
              f"({'pass' if env.passed else 'FAIL'})")
    except Exception as exc:  # profile is still useful without the fit
        print(f"tail envelope unavailable: {exc}")

    # near-boundary profile over the final two decades
    d = run.R0 - run.r
    keep = (d > 0.0) & (d < 0.01 * run.R0) & (run.w > 0.0) & (run.dv > 0.0)
    header = "log10_dist,log10_v,log10_du,log10_dv"
    lines = [header]
    for i in np.nonzero(keep)[0]:
        lines.append(",".join(repr(float(x)) for x in (
            np.log10(d[i]), np.log10(run.v[i]),
            np.log10(run.w[i]), np.log10(run.dv[i]),
        )))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"{len(lines) - 1} tail samples -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
