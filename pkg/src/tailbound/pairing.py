"""Convergence rate between an upper and a lower bound, and automatic pair selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .bounds import lower_bound, upper_bound
from .conditions import FeasibleRegion, joint_region
from .errors import DomainError, InvalidParameterError, PairingError, TailBoundError
from .kinds import BoundKind, BoundTag
from .optimize import optimize_a, optimize_b_real_line, optimize_b_semibounded

__all__ = [
    "RATE_CLASSES",
    "B_CANDIDATES",
    "PairingReport",
    "RateCheck",
    "closed_form_rate",
    "convergence_rate",
    "rate_bound_check",
    "rate_class_for",
    "select_pair",
]

RATE_CLASSES = ("matched_a", "cor1_cor4_mix", "real_line", "general")
B_CANDIDATES = (1.0, 0.8, 0.5, 0.25)
N_SAMPLES = 33


def rate_class_for(upper: BoundKind, lower: BoundKind) -> str:
    if not (upper.is_upper and lower.is_lower):
        raise InvalidParameterError("pair", f"({upper}, {lower}) is not an (upper, lower) pair")
    if lower.tag is BoundTag.LOWER_THM5:
        return "real_line" if upper.tag is BoundTag.UPPER_COR2 else "general"
    if upper.exponent_a == lower.exponent_a:
        return "matched_a"
    if upper.exponent_a == 1.0 and lower.tag is BoundTag.LOWER_COR4:
        return "cor1_cor4_mix"
    return "general"


def _y(model, x, kind):
    return x - kind.anchor(model)


def closed_form_rate(model, x: float, upper: BoundKind, lower: BoundKind) -> float:
    """``R(x)`` from the algebraic simplification matching the pair's rate class.

    Every class is algebraically identical to ``P_U/P_L - 1``; the
    simplified forms avoid the cancellation in that subtraction.
    """
    cls = rate_class_for(upper, lower)
    b = lower.b
    if cls in ("matched_a", "real_line"):
        return _y(model, x, lower) ** (-b)
    f, d1, _ = model.derivatives(x)
    if cls == "cor1_cor4_mix":
        y = _y(model, x, lower)
        return (1.0 + y ** b) / y ** (b - 1.0) * d1 / (f + y * d1) - 1.0
    # general: ((1 + y^b)/y^b) * y^aU (f + y^aL f') / (y^aL (f + y^aU f')) - 1
    return _raw_ratio(model, x, upper, lower) - 1.0


def _raw_ratio(model, x, upper, lower):
    up = upper_bound(model, x, upper).value
    lo = lower_bound(model, x, lower).value
    return up / lo


def convergence_rate(model, x: float, upper: BoundKind, lower: BoundKind) -> float:
    """``R(x) = P_U(x)/P_L(x) - 1`` for a pair that is certified at ``x``.

    Raises
    ------
    PairingError
        Either bound is uncertified at ``x`` or the lower value is not positive.
    """
    x = float(x)
    up = upper_bound(model, x, upper)
    lo = lower_bound(model, x, lower)
    if not (up.valid and lo.valid):
        failed = up.condition_report.failed + lo.condition_report.failed
        raise PairingError(f"pair ({upper}, {lower}) is not certified at x={x!r}", {"failed": failed})
    if not lo.value > 0:
        raise PairingError(f"lower bound {lower} is not positive at x={x!r}", {"lower": lo.value})
    if rate_class_for(upper, lower) == "general":
        return up.value / lo.value - 1.0
    return closed_form_rate(model, x, upper, lower)


@dataclass(frozen=True)
class RateCheck:
    upper_side: float
    lower_side: float
    r: float
    holds: bool


def rate_bound_check(model, x: float, upper: BoundKind, lower: BoundKind, tail: Optional[float] = None) -> RateCheck:
    """Check ``max(P_U/T - 1, T/P_L - 1) <= R`` against the reference tail ``T``."""
    from .oracle import true_tail

    r = convergence_rate(model, x, upper, lower)
    t = true_tail(model, x).value if tail is None else tail
    up = upper_bound(model, x, upper).value
    lo = lower_bound(model, x, lower).value
    upper_side = up / t - 1.0
    lower_side = t / lo - 1.0
    return RateCheck(upper_side, lower_side, r, bool(max(upper_side, lower_side) <= r + 1e-12))


# -- pair selection -----------------------------------------------------------


@dataclass(frozen=True)
class PairingReport:
    """The selected pair and where it is certified.

    ``coverage`` is the fraction of the requested range covered by the
    certified interval that reaches its right end; ``samples`` are
    ``(x, R)`` pairs over that interval.
    """

    upper: BoundKind
    lower: BoundKind
    joint_region: FeasibleRegion
    rate_class: str
    samples: Tuple[Tuple[float, float], ...]
    coverage: float
    step: int
    candidates: Dict[str, object] = field(default_factory=dict)

    @property
    def certified_interval(self):
        return self.joint_region.terminal_interval()


def _candidate(model, upper, lower, x_range, n_grid):
    region = joint_region(model, [upper, lower], x_range, n_grid)
    term = region.terminal_interval()
    lo, hi = x_range
    coverage = 0.0 if term is None else (term[1] - term[0]) / (hi - lo)
    return region, coverage


def _midpoint_rate(model, region, upper, lower):
    lo, hi = region.terminal_interval()
    try:
        return convergence_rate(model, 0.5 * (lo + hi), upper, lower)
    except TailBoundError:
        return math.inf


def _samples(model, region, upper, lower):
    lo, hi = region.terminal_interval()
    out = []
    for x in np.linspace(lo, hi, N_SAMPLES):
        try:
            out.append((float(x), convergence_rate(model, float(x), upper, lower)))
        except TailBoundError:
            continue
    return tuple(out)


def select_pair(model, x_range: Sequence[float], n_grid: int = 256,
                min_coverage: float = 1.0 / 3.0) -> PairingReport:
    """Pick the simplest certified (upper, lower) pair on ``x_range``.

    A candidate qualifies when it is jointly certified on an interval that
    reaches the right end of the range and covers at least
    ``min_coverage`` of it. Semi-bounded supports try, in order:

    1. ``cor2`` with ``cor4(b=1)``;
    2. ``cor1`` with ``cor3(b=1)``;
    3. ``cor1`` with ``cor3(b)`` for ``b`` in 4/5, 1/2, 1/4;
    4. ``cor1`` with ``cor4(b=1)``;
    5. ``thm2(a*)`` with ``thm4(a*, b*)`` optimized at the range midpoint.

    When 3 and 4 both qualify the smaller midpoint rate wins. On the real
    line the order is ``cor2`` with ``thm5(b)`` for each candidate ``b``,
    then ``thm5`` with ``b`` optimized at the midpoint.

    Raises
    ------
    PairingError
        No candidate qualifies; ``diagnostics`` maps each candidate to its
        coverage or failure reason.
    """
    lo, hi = float(x_range[0]), float(x_range[1])
    support = model.support
    if not lo < hi:
        raise InvalidParameterError("x_range", f"empty range ({lo}, {hi})")
    if lo < support.lower or hi > support.upper:
        raise DomainError(f"range ({lo}, {hi}) leaves the support of {model.name}")
    if not 0.0 < min_coverage <= 1.0:
        raise InvalidParameterError("min_coverage", "must lie in (0, 1]")
    x_range = (lo, hi)
    diagnostics: Dict[str, object] = {}

    def attempt(step, upper, lower):
        label = f"{upper}+{lower}"
        try:
            region, coverage = _candidate(model, upper, lower, x_range, n_grid)
        except TailBoundError as exc:
            diagnostics[label] = str(exc)
            return None
        diagnostics[label] = round(coverage, 6)
        if coverage >= min_coverage:
            return step, upper, lower, region, coverage
        return None

    def finish(choice):
        step, upper, lower, region, coverage = choice
        return PairingReport(upper, lower, region, rate_class_for(upper, lower),
                             _samples(model, region, upper, lower), coverage, step, diagnostics)

    mid = 0.5 * (lo + hi)
    cor2 = BoundKind.cor2()
    if support.real_line:
        for b in B_CANDIDATES:
            choice = attempt(1 if b == 1.0 else 2, cor2, BoundKind.thm5(b))
            if choice:
                return finish(choice)
        try:
            opt = optimize_b_real_line(model, mid)
            if opt.found:
                choice = attempt(3, cor2, BoundKind.thm5(opt.value))
                if choice:
                    return finish(choice)
            diagnostics["optimized"] = opt.achieved_by
        except TailBoundError as exc:
            diagnostics["optimized"] = str(exc)
        raise PairingError(f"no certified pair for {model.name} on {x_range}", diagnostics)

    cor1 = BoundKind.cor1()
    choice = attempt(1, cor2, BoundKind.cor4(1.0)) or attempt(2, cor1, BoundKind.cor3(1.0))
    if choice:
        return finish(choice)
    step3 = None
    for b in B_CANDIDATES[1:]:
        step3 = attempt(3, cor1, BoundKind.cor3(b))
        if step3:
            break
    step4 = attempt(4, cor1, BoundKind.cor4(1.0))
    if step3 and step4:
        r3 = _midpoint_rate(model, step3[3], step3[1], step3[2])
        r4 = _midpoint_rate(model, step4[3], step4[1], step4[2])
        diagnostics["midpoint_rate"] = {"step3": r3, "step4": r4}
        return finish(step3 if r3 <= r4 else step4)
    if step3 or step4:
        return finish(step3 or step4)
    try:
        opt_a = optimize_a(model, mid)
        diagnostics["optimized_a"] = opt_a.achieved_by
        if opt_a.found:
            opt_b = optimize_b_semibounded(model, mid, a=opt_a.value)
            diagnostics["optimized_b"] = opt_b.achieved_by
            if opt_b.found:
                if opt_a.value == math.inf:
                    upper, lower = cor2, BoundKind.cor4(opt_b.value)
                else:
                    upper, lower = BoundKind.thm2(opt_a.value), BoundKind.thm4(opt_a.value, opt_b.value)
                choice = attempt(5, upper, lower)
                if choice:
                    return finish(choice)
    except TailBoundError as exc:
        diagnostics["optimized"] = str(exc)
    raise PairingError(f"no certified pair for {model.name} on {x_range}", diagnostics)
