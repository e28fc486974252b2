"""Upper and lower right-tail bounds built from f and f'.

Generic bounds work for any :class:`DistributionModel`; the closed forms are
family-specific expressions written out in terms of the parameters and
evaluated in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy import special

from .conditions import ConditionReport, _entries_for
from .distributions import CatalogEntry
from .errors import (
    DomainError,
    InvalidParameterError,
    PreconditionError,
    RegionError,
    SingularDenominatorError,
)
from .kinds import BoundKind

__all__ = [
    "BoundValue",
    "bound",
    "closed_form_bound",
    "closed_form_kinds",
    "lower_bound",
    "shifted_coordinate",
    "upper_bound",
]

_TINY = 1e-300
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class BoundValue:
    """A bound evaluated at ``x``.

    ``value`` is returned even when ``valid`` is false, and it is never
    clipped to [0, 1]. ``underflow`` marks values forced to 0 because the
    density itself underflowed.
    """

    value: float
    valid: bool
    condition_report: ConditionReport
    kind: BoundKind
    x: float
    underflow: bool = False


def shifted_coordinate(x, x0):
    return x - x0


def _weight(y, b):
    """``y**b / (1 + y**b)`` written to survive huge or tiny ``y**b``."""
    try:
        return 1.0 / (1.0 + y ** (-b))
    except OverflowError:
        return 0.0


def _core(f, d1, y, a):
    """``-y**a f**2 / (f + y**a f')``, with ``a = inf`` meaning ``-f**2 / f'``."""
    if a == math.inf:
        if abs(d1) <= _TINY:
            raise SingularDenominatorError(f"f'(x) = {d1!r} vanishes")
        return -f * (f / d1)
    try:
        ya = y ** a
    except OverflowError:
        ya = math.inf
    den = f + ya * d1
    if math.isfinite(den) and abs(den) <= _TINY:
        raise SingularDenominatorError(f"f + y**a f' = {den!r} vanishes")
    if ya >= 1.0:
        return -f * (f / (f / ya + d1))
    return -f * (ya * f / den)


def _evaluate(model, x, kind):
    x = float(x)
    if not model.support.interior(x):
        raise DomainError(f"x={x!r} is not strictly inside the support of {model.name}")
    anchor = kind.anchor(model)
    f, d1, d2 = model.derivatives(x)
    report = ConditionReport(kind, x, tuple(_entries_for(kind, x, anchor, f, d1, d2)))
    y = None if anchor is None else x - anchor
    if y is not None and not y > 0:
        name = "x_gt_mean" if kind.tag.value == "thm5" else "x_gt_anchor"
        raise PreconditionError(name, f"x={x!r} must exceed {anchor!r}")
    if 0.0 <= f < _TINY:
        return BoundValue(0.0, report.all_satisfied, report, kind, x, underflow=True)
    value = _core(f, d1, y, kind.exponent_a)
    if kind.is_lower:
        value *= _weight(y, kind.b)
    return BoundValue(float(value), report.all_satisfied, report, kind, x)


def upper_bound(model, x, kind: BoundKind) -> BoundValue:
    """Evaluate an upper-bound kind at ``x``.

    Raises
    ------
    DomainError
        ``x`` outside the open support.
    SingularDenominatorError
        The bound's denominator is within 1e-300 of zero.
    """
    if not kind.is_upper:
        raise InvalidParameterError("kind", f"{kind} is not an upper bound")
    return _evaluate(model, x, kind)


def lower_bound(model, x, kind: BoundKind) -> BoundValue:
    """Evaluate a lower-bound kind at ``x``; ``thm5`` needs ``x`` above the mean."""
    if not kind.is_lower:
        raise InvalidParameterError("kind", f"{kind} is not a lower bound")
    return _evaluate(model, x, kind)


def bound(model, x, kind: BoundKind) -> BoundValue:
    return _evaluate(model, x, kind)


# -- closed forms -----------------------------------------------------------


def closed_form_kinds(entry: CatalogEntry, b: float = 1.0):
    """The generic ``(upper, lower)`` kinds that a family's closed form equals."""
    fam = entry.family
    if fam == "gaussian":
        return BoundKind.cor2(), BoundKind.thm5(b)
    if fam in ("chi_square_central", "chi_square_noncentral"):
        return BoundKind.cor2(), BoundKind.cor4(b)
    if fam == "gaussian_squared":
        return BoundKind.thm1(1.0), BoundKind.cor4(b)
    if fam == "beta_prime":
        return BoundKind.cor1(), BoundKind.cor3(b)
    raise InvalidParameterError("family", f"no closed form for {fam!r}")


def _log_weight(y, b):
    # log(y**b / (1 + y**b))
    return -math.log1p(math.exp(-b * math.log(y))) if b * math.log(y) > -700 else b * math.log(y)


def _gaussian_cf(p, x, side, b):
    mu, sigma = p["mu"], p["sigma"]
    y = x - mu
    if not y > 0:
        raise RegionError(f"closed form needs x > mu = {mu!r}", threshold=mu)
    log_up = math.log(sigma) - _LOG_SQRT_2PI - math.log(y) - y * y / (2 * sigma * sigma)
    if side == "upper":
        return log_up
    return log_up + _log_weight(y, b)


def _chi2_cf(p, x, side, b):
    k = p["k"]
    if k < 2:
        raise RegionError("closed form needs k >= 2")
    if not x > k - 2:
        raise RegionError(f"closed form needs x > k - 2 = {k - 2!r}", threshold=k - 2.0)
    log_up = ((1 - k / 2) * math.log(2.0) + (k / 2) * math.log(x) - x / 2
              - math.lgamma(k / 2) - math.log(x - k + 2))
    if side == "upper":
        return log_up
    return log_up + _log_weight(x, b)


def _ncx2_cf(p, x, side, b):
    k, lam = p["k"], p["lam"]
    if lam == 0.0:
        return _chi2_cf({"k": k}, x, side, b)
    if k < 2:
        raise RegionError("closed form needs k >= 2")
    z = math.sqrt(lam * x)
    nu = (k - 2) / 2
    i_nu = special.ive(nu, z)
    den = (k - x - 2) * i_nu + z * special.ive(k / 2, z)  # scaled by exp(-z)
    if not den < 0:
        raise RegionError("closed form needs (k-x-2) I_{(k-2)/2} + sqrt(lam x) I_{k/2} < 0")
    log_up = (0.5 * math.log(lam * x) + (k / 4) * math.log(x / lam) + 2 * math.log(i_nu) + z
              - lam / 2 - x / 2 - math.log(-den))
    if side == "upper":
        return log_up
    return log_up + _log_weight(x, b)


def _gaussian_squared_cf(p, x, side, b):
    sigma, mu = p["sigma"], p["mu"]
    s = math.sqrt(x)
    s2 = sigma * sigma
    # numerator and denominator both divided by (exp(2 mu s / sigma^2) + 1)
    log_num = (math.log(sigma) - _LOG_SQRT_2PI
               + float(special.logsumexp([-(mu + s) ** 2 / (2 * s2), -(s - mu) ** 2 / (2 * s2)])))
    t = math.tanh(mu * s / s2)
    den = x - s2 - mu * s * t
    if not den > 0:
        raise RegionError("closed form needs x(E+1) - sigma^2(E+1) - mu sqrt(x)(E-1) > 0")
    if side == "upper":
        return log_num + 0.5 * math.log(x) - math.log(den)
    den_low = x + s2 - mu * s * t
    return log_num + 0.5 * math.log(x) - math.log(den_low) + _log_weight(x, b)


def _beta_prime_cf(p, x, side, b):
    alpha, beta = p["alpha"], p["beta"]
    if not x > alpha / beta:
        raise RegionError(f"closed form needs x > alpha/beta = {alpha / beta!r}", threshold=alpha / beta)
    log_up = (alpha * math.log(x) + (1 - alpha - beta) * math.log1p(x)
              - special.betaln(alpha, beta) - math.log(beta * x - alpha))
    if side == "upper":
        return log_up
    return log_up + _log_weight(x, b)


_CLOSED_FORMS = {
    "gaussian": _gaussian_cf,
    "chi_square_central": _chi2_cf,
    "chi_square_noncentral": _ncx2_cf,
    "gaussian_squared": _gaussian_squared_cf,
    "beta_prime": _beta_prime_cf,
}


def closed_form_bound(entry: CatalogEntry, x: float, side: str, b: Optional[float] = 1.0) -> float:
    """Family-specific closed-form bound.

    Parameters
    ----------
    entry : CatalogEntry
    x : float
    side : {"upper", "lower"}
    b : float
        Lower-bound exponent, ignored for ``side="upper"``.

    Raises
    ------
    RegionError
        ``x`` lies outside the region where the closed form is a bound.
    """
    if side not in ("upper", "lower"):
        raise InvalidParameterError("side", f"expected 'upper' or 'lower', got {side!r}")
    if side == "lower" and not (b is not None and math.isfinite(b) and b > 0):
        raise InvalidParameterError("b", f"must be finite and > 0, got {b!r}")
    x = float(x)
    if not x > 0 and entry.family != "gaussian":
        raise DomainError(f"x={x!r} outside the support")
    params = dict(entry.params)
    return math.exp(_CLOSED_FORMS[entry.family](params, x, side, b))
