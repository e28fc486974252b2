"""Choice of the tightening exponents ``a`` (upper bounds) and ``b`` (lower bounds).

Each optimizer scans a log-spaced grid, finds the largest parameter value
at which the master condition switches from satisfied to violated, and
bisects that crossing down to adjacent floating-point numbers. The value
returned is always the satisfied side of the crossing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np

from .conditions import evaluate_conditions, is_certified
from .errors import DomainError, InvalidParameterError, PreconditionError, TailBoundError
from .kinds import BoundKind

__all__ = [
    "OptimizedParam",
    "optimize_a",
    "optimize_b_real_line",
    "optimize_b_semibounded",
    "parameter_grid",
]

ACHIEVED_BY = (
    "cor2_conditions_hold",
    "root_of_equality",
    "non_binding",
    "denominator_boundary",
    "fallback_none",
)


@dataclass(frozen=True)
class OptimizedParam:
    """Outcome of a parameter search.

    ``achieved_by`` is one of ``cor2_conditions_hold`` (``a = inf``),
    ``root_of_equality``, ``non_binding`` (the master condition still holds
    at the top of the grid, so ``value`` is the grid maximum),
    ``denominator_boundary`` (feasibility ends because the denominator
    condition flips, not the master condition) or ``fallback_none``.
    """

    name: str
    value: float
    achieved_by: str
    residual: float
    diagnostic: Dict[str, object] = field(default_factory=dict)

    @property
    def found(self):
        return self.achieved_by != "fallback_none"


def parameter_grid(p_max, n_grid=256, p_min=1e-3):
    return np.geomspace(p_min, p_max, n_grid)


def _master_entry(model, x, kind):
    return evaluate_conditions(model, x, kind).entries[-1]


def _bisect(pred, p_pass, p_fail):
    """Shrink a pass/fail bracket until its ends are adjacent doubles."""
    while True:
        mid = 0.5 * (p_pass + p_fail)
        if mid == p_pass or mid == p_fail:
            return p_pass, p_fail
        if pred(mid):
            p_pass = mid
        else:
            p_fail = mid


def _largest_feasible(model, x, make_kind, grid):
    """Scan ``grid`` upward and return ``(achieved_by, value, residual, kind)``."""

    def ok(p):
        try:
            return is_certified(model, x, make_kind(float(p)))
        except TailBoundError:
            return False

    flags = [ok(p) for p in grid]
    if flags[-1]:
        kind = make_kind(float(grid[-1]))
        return "non_binding", float(grid[-1]), _master_entry(model, x, kind).lhs_value, kind
    for i in range(len(grid) - 2, -1, -1):
        if flags[i] and not flags[i + 1]:
            p_pass, p_fail = _bisect(ok, float(grid[i]), float(grid[i + 1]))
            kind = make_kind(p_pass)
            residual = _master_entry(model, x, kind).lhs_value
            master_flips = not _master_entry(model, x, make_kind(p_fail)).satisfied
            how = "root_of_equality" if master_flips else "denominator_boundary"
            return how, p_pass, residual, kind
    return "fallback_none", math.nan, math.nan, None


def _probe_x(model, x, anchor, feasible_at):
    """Nearest point right of ``x`` (up to ``anchor + 4 (x - anchor)``) with a feasible parameter."""
    span = x - anchor
    for xp in np.linspace(x, anchor + 4.0 * span, 33)[1:]:
        if feasible_at(float(xp)):
            return float(xp)
    return None


def _check_point(model, x):
    x = float(x)
    if not model.support.interior(x):
        raise DomainError(f"x={x!r} is not strictly inside the support of {model.name}")
    return x


def _check_max(name, value):
    if not (value >= 1.0 and math.isfinite(value)):
        raise InvalidParameterError(name, f"must be finite and >= 1, got {value!r}")


def optimize_a(model, x: float, a_max: float = 64.0, n_grid: int = 256) -> OptimizedParam:
    """Largest ``a`` for which the shifted-power upper bound is certified at ``x``.

    Returns ``a = inf`` when the ``-f**2/f'`` bound's conditions already hold.
    """
    x = _check_point(model, x)
    _check_max("a_max", a_max)
    if is_certified(model, x, BoundKind.cor2()):
        report = evaluate_conditions(model, x, BoundKind.cor2())
        return OptimizedParam("a", math.inf, "cor2_conditions_hold",
                              report["cor2.curvature_ratio"].lhs_value)
    anchor = BoundKind.thm2(1.0).anchor(model)
    if not x > anchor:
        raise PreconditionError("x_gt_anchor", f"x={x!r} must exceed {anchor!r}")
    grid = parameter_grid(a_max, n_grid)
    how, value, residual, _ = _largest_feasible(model, x, BoundKind.thm2, grid)
    if how != "fallback_none":
        return OptimizedParam("a", value, how, residual)
    coarse = parameter_grid(a_max, 32)
    nearest = _probe_x(model, x, anchor, lambda xp: is_certified(model, xp, BoundKind.cor2())
                       or any(is_certified(model, xp, BoundKind.thm2(float(a))) for a in coarse))
    return OptimizedParam("a", math.nan, "fallback_none", math.nan,
                          {"hint": "decrease a or increase x", "nearest_feasible_x": nearest})


def optimize_b_real_line(model, x: float, b_max: float = 64.0, n_grid: int = 256) -> OptimizedParam:
    """Largest ``b`` for which the mean-anchored lower bound is certified at ``x``."""
    x = _check_point(model, x)
    _check_max("b_max", b_max)
    if not model.support.real_line:
        raise PreconditionError("real_line_support", f"{model.name} is not supported on the real line")
    mean = BoundKind.thm5(1.0).anchor(model)
    if not x > mean:
        raise PreconditionError("x_gt_mean", f"x={x!r} must exceed the mean {mean!r}")
    if not model.pdf_prime(x) < 0:
        raise PreconditionError("fprime_negative", f"f'(x) must be negative at x={x!r}")
    how, value, residual, _ = _largest_feasible(model, x, BoundKind.thm5, parameter_grid(b_max, n_grid))
    diag = {}
    if how == "fallback_none":
        coarse = parameter_grid(b_max, 32)
        diag = {"hint": "increase x", "nearest_feasible_x": _probe_x(
            model, x, mean, lambda xp: any(is_certified(model, xp, BoundKind.thm5(float(b))) for b in coarse))}
    return OptimizedParam("b", value, how, residual, diag)


def optimize_b_semibounded(model, x: float, a: float = math.inf, b_max: float = 64.0,
                           n_grid: int = 256) -> OptimizedParam:
    """Largest ``b`` for the lower bound with ``a`` held fixed.

    ``a = inf`` selects the ``-f**2/f'`` family and ``a = 1`` the linear
    shift; any other positive ``a`` uses the general form.
    """
    x = _check_point(model, x)
    _check_max("b_max", b_max)
    if not model.support.semi_bounded:
        raise PreconditionError("finite_lower", f"{model.name} needs a finite support lower endpoint")
    anchor = model.support.lower
    if not x > anchor:
        raise PreconditionError("x_gt_anchor", f"x={x!r} must exceed {anchor!r}")
    if not a > 0:
        raise InvalidParameterError("a", f"must be > 0, got {a!r}")
    if a == math.inf:
        make_kind: Callable[[float], BoundKind] = BoundKind.cor4
    elif a == 1.0:
        make_kind = BoundKind.cor3
    else:
        make_kind = lambda b: BoundKind.thm4(a, b)  # noqa: E731
    how, value, residual, _ = _largest_feasible(model, x, make_kind, parameter_grid(b_max, n_grid))
    diag = {}
    if how == "fallback_none":
        report = evaluate_conditions(model, x, make_kind(1.0))
        coarse = parameter_grid(b_max, 32)
        diag = {
            "hint": "decrease a or increase x",
            "failed_at_b1": list(report.failed),
            "nearest_feasible_x": _probe_x(
                model, x, anchor, lambda xp: any(is_certified(model, xp, make_kind(float(b))) for b in coarse)),
        }
    return OptimizedParam("b", value, how, residual, diag)
