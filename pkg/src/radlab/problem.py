"""Problem data for the coupled radial system and its structural checks.

The system under study, posed on a ball or on the whole space, is

    div(|grad u|**(p-2) grad u) = f1(|x|) * g1(v) * |grad u|**alpha,
    div(|grad v|**(p-2) grad v) = f2(|x|) * g2(v) * h(|grad u|),

with p > 1, alpha >= 0, dimension n >= 2, and scalar data f1, f2, g1, g2, h
that are continuous, non-decreasing, and positive on (0, oo).  For radial
solutions the two derived exponents

    theta = 1 / (p - 1 - alpha),
    delta = (n - 1) * (p - 1 - alpha) / (p - 1),

govern the integrated first-order form used by the solver and the criteria.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .expressions import FuncExpr, derive_k

__all__ = [
    "InvalidProblem",
    "ProblemSpec",
    "ValidationReport",
    "validate_assumptions",
    "ensure_valid",
]

ScalarFunction = Union[FuncExpr, Callable[[float], float]]


class InvalidProblem(ValueError):
    """Problem data violating a structural requirement."""


@dataclass(frozen=True)
class ProblemSpec:
    """Full data of one problem instance.

    ``g1`` and ``g2`` must be parsed power sums (their growth orders k1, k2
    drive the criteria); ``f1``, ``f2`` and ``h`` may be arbitrary positive
    non-decreasing callables, at the price of heuristic criterion verdicts
    when ``h`` is not a power sum.
    """

    p: float
    alpha: float
    n: float
    f1: ScalarFunction
    f2: ScalarFunction
    g1: ScalarFunction
    g2: ScalarFunction
    h: ScalarFunction

    def __post_init__(self):
        if not self.p > 1.0:
            raise InvalidProblem("p must exceed 1")
        if self.alpha < 0.0:
            raise InvalidProblem("alpha must be non-negative")
        if self.n < 2.0:
            raise InvalidProblem("the dimension n must be at least 2")

    @property
    def gradient_balanced(self) -> bool:
        """True when alpha < p - 1, the regime where radial solutions exist."""
        return self.alpha < self.p - 1.0

    @property
    def theta(self) -> float:
        if not self.gradient_balanced:
            raise InvalidProblem(
                "theta requires alpha < p - 1; no positive radial solutions exist otherwise"
            )
        return 1.0 / (self.p - 1.0 - self.alpha)

    @property
    def delta(self) -> float:
        if not self.gradient_balanced:
            raise InvalidProblem(
                "delta requires alpha < p - 1; no positive radial solutions exist otherwise"
            )
        return (self.n - 1.0) * (self.p - 1.0 - self.alpha) / (self.p - 1.0)

    @property
    def k1(self) -> float:
        """Growth order of g1."""
        return derive_k(self.g1).leading_exponent

    @property
    def k2(self) -> float:
        """Growth order of g2."""
        return derive_k(self.g2).leading_exponent


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    errors: tuple[str, ...]
    warnings: tuple[str, ...]
    k1: float | None
    k2: float | None


_SAMPLE_GRID = np.logspace(-3.0, 6.0, 40)


def _sampled_values(fn: ScalarFunction, grid: np.ndarray) -> np.ndarray:
    if isinstance(fn, FuncExpr):
        return fn(grid)
    return np.array([float(fn(t)) for t in grid])


def validate_assumptions(spec: ProblemSpec) -> ValidationReport:
    """Check the standing structural requirements on the five scalar functions.

    Power sums satisfy continuity, monotonicity and positivity by
    construction; the sampled spot-check on a log grid is belt and braces and
    is the only line of defence for plain-callable data.  The growth orders
    must satisfy k1 > 0 and 0 <= k2 <= k1.
    """
    errors: list[str] = []
    warnings: list[str] = []

    k1 = k2 = None
    if isinstance(spec.g1, FuncExpr):
        k1 = derive_k(spec.g1).leading_exponent
        if not k1 > 0.0:
            errors.append("the growth order k1 of g1 must be positive")
    else:
        errors.append("g1 must be a parsed power sum so its growth order is defined")
    if isinstance(spec.g2, FuncExpr):
        k2 = derive_k(spec.g2).leading_exponent
    else:
        errors.append("g2 must be a parsed power sum so its growth order is defined")
    if k1 is not None and k2 is not None and k2 > k1:
        errors.append("the growth order k2 of g2 must not exceed k1")

    for name in ("f1", "f2", "g1", "g2", "h"):
        fn = getattr(spec, name)
        values = _sampled_values(fn, _SAMPLE_GRID)
        if not np.all(np.isfinite(values)):
            errors.append(f"{name} produced non-finite values on the sampled grid")
            continue
        if np.any(values < 0.0):
            errors.append(f"{name} takes negative values on the sampled grid")
        tolerance = 1e-12 * np.maximum(np.abs(values[:-1]), 1.0)
        if np.any(np.diff(values) < -tolerance):
            errors.append(f"{name} is not non-decreasing on the sampled grid")
        if not values[-1] > 0.0:
            errors.append(f"{name} is not positive for large arguments")
        if not isinstance(fn, FuncExpr):
            warnings.append(f"{name} is a plain callable; checked by sampling only")

    return ValidationReport(
        ok=not errors,
        errors=tuple(errors),
        warnings=tuple(warnings),
        k1=k1,
        k2=k2,
    )


def ensure_valid(spec: ProblemSpec) -> ValidationReport:
    """validate_assumptions, raising :class:`InvalidProblem` on any error."""
    report = validate_assumptions(spec)
    if not report.ok:
        raise InvalidProblem("; ".join(report.errors))
    return report
