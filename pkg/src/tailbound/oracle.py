"""Reference right-tail probabilities and the sandwich audit built on them."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy import integrate, special

from .errors import DomainError, InvalidParameterError, OracleError, TailBoundError

__all__ = [
    "AuditPoint",
    "AuditReport",
    "GridSpec",
    "TailValue",
    "integrate_over_support",
    "marcum_q",
    "quad_tolerance",
    "sandwich_audit",
    "tail_quadrature",
    "true_tail",
]

_QUAD_LIMIT = 4096
_SERIES_FAMILIES = {"chi_square_noncentral"}


def quad_tolerance():
    """Absolute quadrature tolerance; ``TAILBOUND_QUAD_TOL`` overrides 1e-10."""
    raw = os.environ.get("TAILBOUND_QUAD_TOL")
    if not raw:
        return 1e-10
    try:
        tol = float(raw)
    except ValueError:
        raise InvalidParameterError("TAILBOUND_QUAD_TOL", f"not a number: {raw!r}") from None
    if not (tol > 0 and math.isfinite(tol)):
        raise InvalidParameterError("TAILBOUND_QUAD_TOL", "must be a positive finite number")
    return tol


@dataclass(frozen=True)
class TailValue:
    value: float
    method: str
    abs_error_estimate: float


def _quad(fn, lo, hi, tol):
    value, err, info = integrate.quad(fn, lo, hi, epsabs=tol, epsrel=0.0, limit=_QUAD_LIMIT,
                                      full_output=1)[:3]
    return value, err


def _quad_to_infinity(fn, start, tol):
    """``int_start^inf fn`` through ``t = start + u / (1 - u)`` on ``u`` in [0, 1)."""

    def integrand(u):
        if u >= 1.0:
            return 0.0
        w = 1.0 - u
        val = fn(start + u / w)
        return val / (w * w) if val != 0.0 else 0.0

    return _quad(integrand, 0.0, 1.0, tol)


def _check(value, err, tol, what):
    if not (math.isfinite(value) and math.isfinite(err)) or err > max(100 * tol, 1e-8):
        raise OracleError(f"quadrature for {what} did not converge", value, err)
    return value, err


def tail_quadrature(model, x, tol=None) -> Tuple[float, float]:
    """``int_x^inf f(t) dt`` by adaptive quadrature; returns ``(value, abs_error)``.

    The range is split at the mean (when it lies right of ``x``) so that the
    bulk of the mass is not squeezed against ``u = 1`` by the substitution.
    """
    tol = quad_tolerance() if tol is None else tol
    pdf = model.pdf
    pivot = x
    mean = model.mean
    if mean is not None and math.isfinite(mean) and mean > x:
        pivot = mean
    value, err = 0.0, 0.0
    if pivot > x:
        v, e = _quad(pdf, x, pivot, tol)
        value, err = value + v, err + e
    v, e = _quad_to_infinity(pdf, pivot, tol)
    value, err = _check(value + v, err + e, tol, f"tail of {model.name} at {x!r}")
    return min(max(value, 0.0), 1.0), err


def integrate_over_support(fn, model, tol=None) -> Tuple[float, float]:
    """``int fn`` over the whole support of ``model``; returns ``(value, abs_error)``."""
    tol = quad_tolerance() if tol is None else tol
    lower = model.support.lower
    if math.isfinite(lower):
        v1, e1 = _quad(fn, lower, lower + 1.0, tol)
        v2, e2 = _quad_to_infinity(fn, lower + 1.0, tol)
    else:
        v1, e1 = _quad_to_infinity(lambda t: fn(-t), 0.0, tol)
        v2, e2 = _quad_to_infinity(fn, 0.0, tol)
    return _check(v1 + v2, e1 + e2, tol, f"integral over the support of {model.name}")


def marcum_q(m: float, a: float, b: float) -> float:
    """Generalized Marcum Q function ``Q_m(a, b)``.

    Evaluated as a Poisson(a**2/2) mixture of upper regularized incomplete
    gamma functions ``Q(m + j, b**2/2)``, stopping once the remaining Poisson
    weight drops below 1e-14.
    """
    if not m >= 0.5:
        raise InvalidParameterError("m", f"order must be >= 1/2, got {m!r}")
    if not (a >= 0 and b >= 0):
        raise InvalidParameterError("a" if not a >= 0 else "b", "must be nonnegative")
    if b == 0:
        return 1.0
    z = 0.5 * b * b
    mu = 0.5 * a * a
    if mu == 0:
        return float(special.gammaincc(m, z))
    j_max = int(mu + 40.0 * math.sqrt(mu) + 60)
    j = np.arange(j_max + 1, dtype=float)
    weights = np.exp(-mu + j * math.log(mu) - special.gammaln(j + 1.0))
    remaining = 1.0 - np.cumsum(weights)
    stop = int(np.argmax(remaining < 1e-14)) if np.any(remaining < 1e-14) else j_max
    j, weights = j[: stop + 1], weights[: stop + 1]
    terms = weights * special.gammaincc(m + j, z)
    return float(min(1.0, math.fsum(terms)))


def true_tail(model, x: float, method: str = "auto") -> TailValue:
    """``Pr{X >= x}`` from the model's closed form or by quadrature.

    Parameters
    ----------
    method : {"auto", "closed_form", "quadrature"}
        ``auto`` prefers the closed-form right tail (or ``1 - cdf``).
    """
    x = float(x)
    support = model.support
    if not support.lower <= x <= support.upper:
        raise DomainError(f"x={x!r} outside the support of {model.name}")
    if method not in ("auto", "closed_form", "quadrature"):
        raise InvalidParameterError("method", f"unknown method {method!r}")
    if method != "quadrature":
        if model.sf_closed_form is not None:
            value = float(model.sf_closed_form(x))
            tag = "series" if model.family in _SERIES_FAMILIES else "closed_form"
            err = 1e-14 if tag == "series" else 4 * np.finfo(float).eps * value
            return TailValue(min(max(value, 0.0), 1.0), tag, err)
        if model.cdf_closed_form is not None:
            value = 1.0 - float(model.cdf_closed_form(x))
            return TailValue(min(max(value, 0.0), 1.0), "closed_form", 4 * np.finfo(float).eps)
        if method == "closed_form":
            raise InvalidParameterError("method", f"{model.name} has no closed-form tail")
    value, err = tail_quadrature(model, x)
    return TailValue(value, "quadrature", err)


# -- sandwich audit ----------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """``n`` evenly spaced points on ``[lo, hi]``."""

    lo: float
    hi: float
    n: int = 200

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidParameterError("lo", "grid needs lo < hi")
        if self.n < 1:
            raise InvalidParameterError("n", "grid needs at least one point")

    def points(self):
        if self.n == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class AuditPoint:
    x: float
    lower: float
    tail: float
    upper: float
    lower_valid: bool
    upper_valid: bool
    lower_violation: bool
    upper_violation: bool
    note: str = ""

    @property
    def upper_gap(self):
        """``upper - tail`` (nonnegative when the upper bound holds)."""
        return self.upper - self.tail

    @property
    def lower_gap(self):
        return self.tail - self.lower

    @property
    def certified(self):
        return self.lower_valid and self.upper_valid


@dataclass(frozen=True)
class AuditReport:
    upper: object
    lower: object
    points: Tuple[AuditPoint, ...]
    slack: float

    @property
    def violations(self) -> List[AuditPoint]:
        return [p for p in self.points if p.lower_violation or p.upper_violation]

    @property
    def uncertified(self) -> List[AuditPoint]:
        return [p for p in self.points if not p.certified]

    @property
    def ok(self):
        return not self.violations and not self.uncertified

    def summary(self):
        viol = self.violations
        text = (f"{self.upper}/{self.lower}: {len(self.points)} points, "
                f"{len(viol)} violations, {len(self.uncertified)} uncertified")
        if viol:
            worst = viol[0]
            text += (f"; first violation at x={worst.x:.6g} "
                     f"(lower={worst.lower:.6g}, tail={worst.tail:.6g}, upper={worst.upper:.6g})")
        return text


def sandwich_audit(model, pair, grid, slack: float = 1e-12, rel_slack: float = 1e-9) -> AuditReport:
    """Check ``lower - tol <= tail <= upper + tol`` at every grid point.

    ``tol = min(slack, rel_slack * tail)``, so the absolute slack cannot hide
    a violation deep in the tail where every probability is tiny.

    ``pair`` is anything with ``upper``/``lower`` kind attributes (such as a
    pairing report) or an ``(upper, lower)`` tuple. Bounds are evaluated even
    where their conditions fail; such points are flagged as uncertified.
    Violations are returned as data, never raised.
    """
    from .bounds import lower_bound, upper_bound

    up_kind, low_kind = (pair.upper, pair.lower) if hasattr(pair, "upper") else pair
    xs = grid.points() if isinstance(grid, GridSpec) else np.asarray(grid, dtype=float)
    points = []
    for x in xs:
        x = float(x)
        tail = true_tail(model, x).value
        try:
            up = upper_bound(model, x, up_kind)
            lo = lower_bound(model, x, low_kind)
        except TailBoundError as exc:
            points.append(AuditPoint(x, math.nan, tail, math.nan, False, False, True, True,
                                     note=str(exc)))
            continue
        tol = min(slack, rel_slack * tail)
        points.append(AuditPoint(
            x, lo.value, tail, up.value, lo.valid, up.valid,
            lower_violation=not (lo.value - tol <= tail),
            upper_violation=not (tail <= up.value + tol),
        ))
    return AuditReport(up_kind, low_kind, tuple(points), slack)
