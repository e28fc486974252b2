"""Validity inequalities of every bound and extraction of feasible x-regions.

Each inequality is evaluated as written: its left side after moving all
terms to one side, compared with the stated sense (strict or not) and no
epsilon cushion. When the literal left side overflows (huge ``a`` or
``b``), the sign is taken from the same expression divided by a positive
power of ``y``; the entry then reports that scaled value and says so in
``note``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

from .distributions import DistributionModel
from .errors import DomainError, PreconditionError, SingularDenominatorError, TailBoundError
from .kinds import BoundKind, BoundTag

__all__ = [
    "CONDITION_IDS",
    "ConditionEntry",
    "ConditionReport",
    "FeasibleRegion",
    "condition_ids_for",
    "evaluate_conditions",
    "feasible_region",
    "is_certified",
    "joint_region",
    "thm5_master_lhs",
]

CONDITION_IDS = (
    "thm1.denominator", "thm1.second_order",
    "thm2.denominator", "thm2.second_order",
    "cor1.denominator", "cor1.second_order",
    "cor2.fprime_negative", "cor2.curvature_ratio",
    "thm3.denominator", "thm3.master",
    "thm4.denominator", "thm4.master",
    "cor3.denominator", "cor3.master",
    "cor4.fprime_negative", "cor4.master",
    "thm5.x_gt_mean", "thm5.fprime_negative", "thm5.master",
)

_IDS_BY_TAG = {}
for _cid in CONDITION_IDS:
    _IDS_BY_TAG.setdefault(_cid.split(".")[0], []).append(_cid)


def condition_ids_for(kind: BoundKind):
    return tuple(_IDS_BY_TAG[kind.tag.value])


_SENSES = {
    "<": lambda v: v < 0,
    "<=": lambda v: v <= 0,
    ">=": lambda v: v >= 0,
    ">": lambda v: v > 0,
}


@dataclass(frozen=True)
class ConditionEntry:
    id: str
    lhs_value: float
    sense: str
    satisfied: bool
    note: str = ""


@dataclass(frozen=True)
class ConditionReport:
    kind: BoundKind
    x: float
    entries: Tuple[ConditionEntry, ...]

    @property
    def all_satisfied(self):
        return all(e.satisfied for e in self.entries)

    def __getitem__(self, cid):
        for e in self.entries:
            if e.id == cid:
                return e
        raise KeyError(cid)

    @property
    def failed(self):
        return tuple(e.id for e in self.entries if not e.satisfied)


def _pow(y, p):
    try:
        return y ** p
    except OverflowError:
        return math.inf


def _guarded(fn):
    try:
        return fn(), ""
    except ZeroDivisionError:
        return math.nan, "division by zero (f or f' vanishes)"
    except OverflowError:
        return math.inf, "overflow"


def _entry(cid, sense, literal, scaled=None, scale_text=""):
    value, note = _guarded(literal)
    if not math.isfinite(value) and scaled is not None:
        s_value, s_note = _guarded(scaled)
        if math.isfinite(s_value):
            value, note = s_value, f"literal side overflows; value divided by {scale_text}"
        else:
            note = note or s_note
    ok = math.isfinite(value) and _SENSES[sense](value)
    return ConditionEntry(cid, float(value), sense, bool(ok), note)


# -- literal left sides -------------------------------------------------------


def _thm2_denominator(y, a, f, d1):
    return (lambda: f + _pow(y, a) * d1), (lambda: f * _pow(y, -a) + d1)


def _thm2_master(y, a, f, d1, d2):
    def literal():
        ya = _pow(y, a)
        return (y - a * ya) * f * f - _pow(y, 2 * a + 1) * d1 * d1 + _pow(y, a + 1) * f * (d1 + ya * d2)

    def scaled():
        t = _pow(y, -a)
        return (y * t * t - a * t) * f * f - y * d1 * d1 + y * t * f * d1 + y * f * d2

    return literal, scaled


def _thm4_master(y, a, b, f, d1, d2):
    def literal():
        yb = _pow(y, b)
        return ((y * (1 + yb) ** 2 - _pow(y, a + b) * (a + b + a * yb)) * f * f
                - _pow(y, 2 * a + 1) * (_pow(y, 2 * b) - 1) * d1 * d1
                + _pow(y, a) * f * (y * (1 + yb) * (2 + yb) * d1
                                    + _pow(y, a + b) * (-b * d1 + y * (1 + yb) * d2)))

    def scaled():
        yb = _pow(y, b)
        t = _pow(y, -a)
        return ((y * (1 + yb) ** 2 * t * t - yb * (a + b + a * yb) * t) * f * f
                - y * (_pow(y, 2 * b) - 1) * d1 * d1
                + f * (t * y * (1 + yb) * (2 + yb) * d1 + yb * (-b * d1 + y * (1 + yb) * d2)))

    return literal, scaled


def _cor3_master(y, b, f, d1, d2):
    def literal():
        yb = _pow(y, b)
        return ((y * (1 + yb) ** 2 - _pow(y, 1 + b) * (1 + b + yb)) * f * f
                - y ** 3 * (_pow(y, 2 * b) - 1) * d1 * d1
                + y * f * (y * (1 + yb) * (2 + yb) * d1 + _pow(y, 1 + b) * (-b * d1 + y * (1 + yb) * d2)))

    def scaled():
        yb = _pow(y, b)
        y2b = _pow(y, -2 * b)
        return ((y * (1 + yb) ** 2 * y2b - y * (1 + b + yb) / yb) * f * f
                - y ** 3 * (1 - y2b) * d1 * d1
                + y * f * (y * (1 + yb) * (2 + yb) * y2b * d1 + y / yb * (-b * d1 + y * (1 + yb) * d2)))

    return literal, scaled


def _cor4_master(y, b, f, d1, d2):
    def literal():
        yb = _pow(y, b)
        return 1 - _pow(y, 2 * b) + f / (d1 * d1) * _pow(y, b - 1) * (-b * d1 + (1 + yb) * y * d2)

    def scaled():
        yb = _pow(y, b)
        return _pow(y, -2 * b) - 1 + f / (d1 * d1) * _pow(y, -b - 1) * (-b * d1 + (1 + yb) * y * d2)

    return literal, scaled


def _entries_for(kind, x, anchor, f, d1, d2):
    tag = kind.tag.value
    y = None if anchor is None else x - anchor
    if kind.tag in (BoundTag.UPPER_THM1, BoundTag.UPPER_THM2, BoundTag.LOWER_THM3, BoundTag.LOWER_THM4):
        a = kind.a
        den_lit, den_scaled = _thm2_denominator(y, a, f, d1)
        out = [_entry(f"{tag}.denominator", "<", den_lit, den_scaled, "y**a")]
        if kind.is_upper:
            lit, sc = _thm2_master(y, a, f, d1, d2)
            out.append(_entry(f"{tag}.second_order", "<=", lit, sc, "y**(2a)"))
        else:
            lit, sc = _thm4_master(y, a, kind.b, f, d1, d2)
            out.append(_entry(f"{tag}.master", ">=", lit, sc, "y**(2a)"))
        return out
    if kind.tag is BoundTag.UPPER_COR1:
        return [
            _entry("cor1.denominator", "<", lambda: f + y * d1),
            _entry("cor1.second_order", "<=", lambda: d1 + y * d2 - y * d1 * d1 / f),
        ]
    if kind.tag is BoundTag.UPPER_COR2:
        return [
            _entry("cor2.fprime_negative", "<", lambda: d1),
            _entry("cor2.curvature_ratio", "<=", lambda: f * d2 / (d1 * d1) - 1.0),
        ]
    if kind.tag is BoundTag.LOWER_COR3:
        lit, sc = _cor3_master(y, kind.b, f, d1, d2)
        return [
            _entry("cor3.denominator", "<", lambda: f + y * d1),
            _entry("cor3.master", ">=", lit, sc, "y**(2b)"),
        ]
    if kind.tag is BoundTag.LOWER_COR4:
        lit, sc = _cor4_master(y, kind.b, f, d1, d2)
        return [
            _entry("cor4.fprime_negative", "<", lambda: d1),
            _entry("cor4.master", ">=", lit, sc, "y**(2b)"),
        ]
    # thm5: y = x - mean
    out = [
        _entry("thm5.x_gt_mean", ">", lambda: y),
        _entry("thm5.fprime_negative", "<", lambda: d1),
    ]
    if y > 0:
        lit, sc = _cor4_master(y, kind.b, f, d1, d2)
        out.append(_entry("thm5.master", ">=", lit, sc, "(x-mean)**(2b)"))
    else:
        out.append(ConditionEntry("thm5.master", math.nan, ">=", False, "undefined for x <= mean"))
    return out


def evaluate_conditions(model: DistributionModel, x: float, kind: BoundKind) -> ConditionReport:
    """Evaluate every inequality attached to ``kind`` at ``x``.

    Raises
    ------
    DomainError
        ``x`` is not strictly inside the support.
    PreconditionError
        The model's support does not admit ``kind``.
    """
    x = float(x)
    if not model.support.interior(x):
        raise DomainError(f"x={x!r} is not strictly inside the support of {model.name}")
    anchor = kind.anchor(model)
    f, d1, d2 = model.derivatives(x)
    return ConditionReport(kind, x, tuple(_entries_for(kind, x, anchor, f, d1, d2)))


def thm5_master_lhs(model: DistributionModel, x: float, b: float) -> float:
    """Literal left side of the mean-anchored lower bound's master condition.

    The optimizer root-finds on this in ``b``.
    """
    mean = BoundKind.thm5(b).anchor(model)
    y = x - mean
    if not y > 0:
        raise PreconditionError("x_gt_mean", f"x={x!r} must exceed the mean {mean!r}")
    f, d1, d2 = model.derivatives(x)
    if d1 == 0:
        raise SingularDenominatorError(f"f'(x) = 0 at x={x!r}")
    return _cor4_master(y, float(b), f, d1, d2)[0]()


def master_sign_value(model, x, kind):
    """Finite stand-in for the master condition's left side (scaled when needed).

    Used for sign scans over ``a`` or ``b``; the sign always matches the
    literal inequality.
    """
    report = evaluate_conditions(model, x, kind)
    return report.entries[-1].lhs_value


def is_certified(model, x, kind):
    """``True`` iff every condition of ``kind`` holds at ``x``; errors count as ``False``."""
    try:
        return evaluate_conditions(model, x, kind).all_satisfied
    except TailBoundError:
        return False


# -- regions ------------------------------------------------------------------


@dataclass(frozen=True)
class FeasibleRegion:
    """Disjoint, sorted x-intervals where every condition of ``kind`` holds."""

    intervals: Tuple[Tuple[float, float], ...]
    kind: Union[BoundKind, Tuple[BoundKind, ...]]
    resolution: float
    x_range: Tuple[float, float] = field(default=(math.nan, math.nan))

    @property
    def empty(self):
        return not self.intervals

    @property
    def left_endpoint(self):
        return self.intervals[0][0] if self.intervals else math.nan

    @property
    def length(self):
        return sum(hi - lo for lo, hi in self.intervals)

    def contains(self, x):
        return any(lo <= x <= hi for lo, hi in self.intervals)

    def terminal_interval(self):
        """The interval reaching the right end of the scanned range, if any."""
        if self.intervals and self.intervals[-1][1] >= self.x_range[1]:
            return self.intervals[-1]
        return None

    def intersect(self, other: "FeasibleRegion") -> "FeasibleRegion":
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        kinds = _as_kind_tuple(self.kind) + _as_kind_tuple(other.kind)
        x_range = (max(self.x_range[0], other.x_range[0]), min(self.x_range[1], other.x_range[1]))
        return FeasibleRegion(tuple(out), kinds, max(self.resolution, other.resolution), x_range)


def _as_kind_tuple(kind):
    return kind if isinstance(kind, tuple) else (kind,)


def _refine(pred, x_pass, x_fail, width):
    while abs(x_fail - x_pass) > width:
        mid = 0.5 * (x_pass + x_fail)
        if mid in (x_pass, x_fail):
            break
        if pred(mid):
            x_pass = mid
        else:
            x_fail = mid
    return x_pass


def feasible_region(model: DistributionModel, kind: BoundKind, x_range: Sequence[float],
                    n_grid: int = 256) -> FeasibleRegion:
    """Scan a uniform grid for points where ``kind`` is certified.

    Every pass/fail boundary between adjacent grid points is refined by
    bisection to a width of ``(hi - lo) / 2**20``; interval ends are the
    last certified bisection points. Grid points outside the open support
    count as failures.
    """
    lo, hi = float(x_range[0]), float(x_range[1])
    if not lo < hi:
        raise PreconditionError("lo_lt_hi", f"empty range ({lo}, {hi})")
    if n_grid < 16:
        raise PreconditionError("n_grid", "need at least 16 grid points")
    xs = np.linspace(lo, hi, n_grid)
    pred = lambda t: is_certified(model, float(t), kind)  # noqa: E731
    ok = [pred(x) for x in xs]
    width = (hi - lo) / 2.0 ** 20

    intervals = []
    start = None
    for i, flag in enumerate(ok):
        if flag and start is None:
            start = lo if i == 0 else _refine(pred, float(xs[i]), float(xs[i - 1]), width)
        if start is not None and (i == len(ok) - 1 or not ok[i + 1]):
            if flag:
                end = hi if i == len(ok) - 1 else _refine(pred, float(xs[i]), float(xs[i + 1]), width)
                if start < end:
                    intervals.append((start, end))
                start = None
    return FeasibleRegion(tuple(intervals), kind, (hi - lo) / (n_grid - 1), (lo, hi))


def joint_region(model, kinds, x_range, n_grid=256):
    """Intersection of the kinds' feasible regions (interval intersection, no re-gridding)."""
    regions = [feasible_region(model, k, x_range, n_grid) for k in kinds]
    out = regions[0]
    for r in regions[1:]:
        out = out.intersect(r)
    return out
