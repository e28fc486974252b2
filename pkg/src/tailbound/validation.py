"""Numerical checks of the machinery behind the bounds.

The deficit of a bound is ``bound - tail``. It equals ``F + P_U - 1`` for an
upper bound and ``F + P_L - 1`` for a lower bound. An upper bound is
certified by a nonnegative deficit that decreases to zero, and a lower bound
by a nonpositive one that increases to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import integrate

from .bounds import bound, closed_form_kinds
from .conditions import _cor4_master, _thm2_master, _thm4_master, feasible_region, is_certified
from .distributions import CatalogEntry, make_catalog_distribution
from .errors import PreconditionError, TailBoundError
from .kinds import BoundKind, BoundTag
from .oracle import quad_tolerance, true_tail

__all__ = [
    "PAPER_B",
    "ValidationDiagnostic",
    "deficit",
    "deficit_derivative",
    "deficit_lower",
    "deficit_upper",
    "integration_by_parts_check",
    "monotonicity_audit",
    "probe_conjecture_optimal_a",
    "probe_conjecture_real_line",
    "run_suite",
    "validation_range",
]

# lower-bound exponent used with each family's closed form
PAPER_B = {"beta_prime": 0.8}


@dataclass(frozen=True)
class ValidationDiagnostic:
    """Result of one named check.

    ``informational`` diagnostics record measured outcomes (conjecture probes)
    and do not count towards a suite's overall verdict.
    """

    name: str
    x_samples: Tuple[float, ...]
    values: Tuple[float, ...]
    verdict: str
    detail: str = ""
    informational: bool = False

    def to_dict(self):
        return {
            "name": self.name,
            "verdict": self.verdict,
            "detail": self.detail,
            "informational": self.informational,
            "x_samples": list(self.x_samples),
            "values": list(self.values),
        }


# -- deficits ----------------------------------------------------------------


def deficit(model, x, kind: BoundKind) -> float:
    """``bound(x) - Pr{X >= x}``; computed without forming ``F - 1``."""
    return bound(model, x, kind).value - true_tail(model, x).value


def _upper_kind(model, a):
    if a == math.inf:
        return BoundKind.cor2()
    if model.support.lower == 0.0:
        return BoundKind.thm1(a)
    return BoundKind.thm2(a)


def _lower_kind(model, a, b):
    if a == math.inf:
        return BoundKind.thm5(b) if model.support.real_line else BoundKind.cor4(b)
    if model.support.lower == 0.0:
        return BoundKind.thm3(a, b)
    return BoundKind.thm4(a, b)


def deficit_upper(model, x, a=math.inf):
    """Deficit of the shifted-power upper bound; ``a = inf`` gives the ``-f**2/f'`` form."""
    return deficit(model, x, _upper_kind(model, a))


def deficit_lower(model, x, b, a=math.inf):
    """Deficit of the lower bound with exponents ``a`` and ``b`` (nonpositive when certified)."""
    return deficit(model, x, _lower_kind(model, a, b))


def deficit_derivative(model, x, kind: BoundKind) -> float:
    """Closed-form ``dD/dx`` expressed through the kind's master inequality.

    The sign of each expression is the sign of the master left side, which is
    what ties the validity conditions to monotonicity of the deficit.
    """
    f, d1, d2 = model.derivatives(x)
    a = kind.exponent_a
    if kind.tag is BoundTag.UPPER_COR2:
        return f * (f * d2 / (d1 * d1) - 1.0)
    y = x - kind.anchor(model)
    if kind.tag in (BoundTag.LOWER_COR4, BoundTag.LOWER_THM5):
        b = kind.b
        return f / (1.0 + y ** b) ** 2 * _cor4_master(y, b, f, d1, d2)[0]()
    m = f + y ** a * d1
    if kind.is_upper:
        return f / (y * m * m) * _thm2_master(y, a, f, d1, d2)[0]()
    b = kind.b
    return f / (y * (1.0 + y ** b) ** 2 * m * m) * _thm4_master(y, a, b, f, d1, d2)[0]()


# -- audits -------------------------------------------------------------------


def _interval(region):
    if hasattr(region, "intervals"):
        term = region.terminal_interval() or (region.intervals[-1] if region.intervals else None)
        if term is None:
            raise PreconditionError("nonempty_region", "the feasible region is empty")
        return term
    lo, hi = float(region[0]), float(region[1])
    if not lo < hi:
        raise PreconditionError("nonempty_region", f"empty region ({lo}, {hi})")
    return lo, hi


def _deficit_series(model, kind, lo, hi, n):
    xs = np.linspace(lo, hi, n)
    vals, scales = [], []
    for x in xs:
        b = bound(model, float(x), kind).value
        t = true_tail(model, float(x)).value
        vals.append(b - t)
        scales.append(abs(b) + t)
    return xs, np.array(vals), np.array(scales)


def monotonicity_audit(model, kind: BoundKind, region, n: int = 200) -> ValidationDiagnostic:
    """Sign, monotonicity and decay of the deficit of ``kind`` over ``region``.

    ``region`` is a :class:`FeasibleRegion` (its right-most interval is used)
    or an ``(lo, hi)`` pair. Consecutive differences may go the wrong way by
    at most ``1e-12`` of the local bound-plus-tail scale (roundoff).
    """
    lo, hi = _interval(region)
    xs, d, scale = _deficit_series(model, kind, lo, hi, n)
    noise = 1e-12 * np.maximum(scale[:-1], scale[1:]) + 1e-300
    steps = np.diff(d)
    problems = []
    if kind.is_upper:
        if np.any(steps > noise):
            i = int(np.argmax(steps - noise))
            problems.append(f"increases between x={xs[i]:.6g} and {xs[i + 1]:.6g}")
        if np.any(d < -1e-10):
            problems.append(f"negative deficit {d.min():.3g}")
        if not d[-1] <= d[0] * 1e-2 + 1e-10:
            problems.append(f"no decay: first={d[0]:.3g}, last={d[-1]:.3g}")
    else:
        if np.any(steps < -noise):
            i = int(np.argmax(noise - steps))
            problems.append(f"decreases between x={xs[i]:.6g} and {xs[i + 1]:.6g}")
        if np.any(d > 1e-10):
            problems.append(f"positive deficit {d.max():.3g}")
        if not abs(d[-1]) <= abs(d[0]) * 1e-2 + 1e-10:
            problems.append(f"no decay: first={d[0]:.3g}, last={d[-1]:.3g}")
    detail = "; ".join(problems) if problems else f"{kind} deficit monotone and decaying on [{lo:.6g}, {hi:.6g}]"
    if not problems and np.all(np.abs(d) <= 1e-12 * scale):
        detail += " (identically zero up to roundoff)"
    return ValidationDiagnostic(f"monotonicity[{kind}]", tuple(map(float, xs)), tuple(map(float, d)),
                                "fail" if problems else "pass", detail)


def integration_by_parts_check(model, x: float) -> float:
    """``|F(x) - x f(x) + int_0^x t f'(t) dt|`` for a model supported on ``(0, inf)``."""
    if model.support.lower != 0.0:
        raise PreconditionError("support_lower_zero", f"{model.name} is not supported on (0, inf)")
    if not x > 0:
        raise PreconditionError("x_positive", f"x={x!r} must be positive")
    tol = quad_tolerance()
    g, _ = integrate.quad(lambda t: t * model.pdf_prime(t), 0.0, x, epsabs=tol * 1e-2, epsrel=1e-13,
                          limit=4096)
    cdf = model.cdf_closed_form(x) if model.cdf_closed_form is not None else 1.0 - true_tail(model, x).value
    return abs(cdf - x * model.pdf(x) + g)


def probe_conjecture_real_line(model, x_range, n: int = 500) -> ValidationDiagnostic:
    """Probe whether the ``-f**2/f'`` conditions hold from some point onward.

    Finds the smallest sampled ``x0`` after which every sample passes. This
    is evidence, not proof.
    """
    if not model.support.real_line:
        raise PreconditionError("real_line_support", f"{model.name} is not supported on the real line")
    xs = np.linspace(float(x_range[0]), float(x_range[1]), n)
    ok = [is_certified(model, float(x), BoundKind.cor2()) for x in xs]
    values = []
    for x in xs:
        f, d1, d2 = model.derivatives(float(x))
        values.append(f * d2 / (d1 * d1) - 1.0 if d1 != 0 else math.nan)
    start = None
    for i in range(n - 1, -1, -1):
        if not ok[i]:
            break
        start = i
    if start is None:
        return ValidationDiagnostic("conjecture_real_line", tuple(map(float, xs)), tuple(values), "fail",
                                    "conditions fail at the right end of the probe range", informational=True)
    return ValidationDiagnostic("conjecture_real_line", tuple(map(float, xs)), tuple(values), "pass",
                                f"conditions hold for every sample x >= x0 = {xs[start]:.6g}", informational=True)


A_PROBE = (0.5, 0.75, 1.0, 1.5, 2.0, 4.0)


def probe_conjecture_optimal_a(model, x_range, n: int = 16) -> ValidationDiagnostic:
    """Does ``a = 1`` give the smallest feasible upper-bound gap at the largest sampled ``x``?

    Runs only when the ``-f**2/f'`` curvature condition fails somewhere on the
    range while the ``a = 1`` bound is certified there; otherwise the
    diagnostic is ``skipped``.
    """
    xs = np.linspace(float(x_range[0]), float(x_range[1]), n)
    name = "conjecture_optimal_a"
    if not math.isfinite(model.support.lower):
        return ValidationDiagnostic(name, tuple(map(float, xs)), (), "skipped",
                                    "needs a finite support lower endpoint", informational=True)
    witness = [x for x in xs if not is_certified(model, float(x), BoundKind.cor2())
               and is_certified(model, float(x), BoundKind.cor1())]
    if not witness:
        return ValidationDiagnostic(name, tuple(map(float, xs)), (), "skipped",
                                    "the -f^2/f' bound is never the one failing on this range",
                                    informational=True)
    best, table = [], []
    for x in xs:
        t = true_tail(model, float(x)).value
        gaps = {}
        for a in A_PROBE:
            kind = BoundKind.thm2(a)
            try:
                bv = bound(model, float(x), kind)
            except TailBoundError:
                continue
            if bv.valid:
                gaps[a] = bv.value - t
        table.append(gaps)
        best.append(min(gaps, key=gaps.get) if gaps else math.nan)
    last = table[-1]
    verdict = "pass" if last and best[-1] == 1.0 else "fail"
    detail = (f"minimizing a per x: {[b for b in best]}; gaps at x={xs[-1]:.6g}: "
              + ", ".join(f"a={a:g}: {g:.3e}" for a, g in last.items()))
    return ValidationDiagnostic(name, tuple(map(float, xs)), tuple(float(b) for b in best), verdict, detail,
                                informational=True)


def derivative_sign_check(model, kind, lo, hi, n=32) -> ValidationDiagnostic:
    """Compare the sign of :func:`deficit_derivative` with central differences of the deficit."""
    xs = np.linspace(lo, hi, n + 2)[1:-1]
    values, mismatches = [], []
    for x in xs:
        x = float(x)
        h = 1e-4 * max(1e-3, min(1.0, x - lo, hi - x, abs(x) + 1e-3))
        fd = (deficit(model, x + h, kind) - deficit(model, x - h, kind)) / (2 * h)
        an = deficit_derivative(model, x, kind)
        values.append(an)
        noise = 1e-6 * model.pdf(x) + 1e-300
        if abs(an) > noise and abs(fd) > noise and math.copysign(1, an) != math.copysign(1, fd):
            mismatches.append(x)
    verdict = "fail" if mismatches else "pass"
    detail = f"sign mismatches at {mismatches}" if mismatches else f"{n} points agree in sign"
    return ValidationDiagnostic(f"derivative_sign[{kind}]", tuple(map(float, xs)), tuple(values), verdict, detail)


def validation_range(entry: CatalogEntry):
    """Window, starting just inside the support, over which a family is audited."""
    lo, hi = entry.default_range()
    if entry.family == "gaussian":
        return lo, entry.params["mu"] + 12.0 * entry.params["sigma"]
    return lo + 1e-9 * (hi - lo), hi


def run_suite(entry: CatalogEntry, n: int = 200) -> List[ValidationDiagnostic]:
    """All validation diagnostics for one catalog entry.

    The audited kinds are the pair the family's closed form corresponds to.
    Each kind is audited on the right-most interval of its own feasible region
    inside :func:`validation_range`.
    """
    model = make_catalog_distribution(entry)
    lo, hi = validation_range(entry)
    out: List[ValidationDiagnostic] = []
    for kind in closed_form_kinds(entry, PAPER_B.get(entry.family, 1.0)):
        region = feasible_region(model, kind, (lo, hi))
        term = region.terminal_interval()
        if term is None:
            out.append(ValidationDiagnostic(f"monotonicity[{kind}]", (), (), "skipped",
                                            f"{kind} is not certified at the right end of [{lo:.6g}, {hi:.6g}]"))
            continue
        a, b = term
        # stay clear of the boundary where the denominator may vanish
        a = a + 1e-6 * (b - a)
        out.append(monotonicity_audit(model, kind, (a, b), n))
        out.append(derivative_sign_check(model, kind, a, b))
        out.append(_decay_check(model, kind, a, b))
    if model.support.lower == 0.0:
        xs = np.linspace(lo, hi, 17)[1:]
        residuals = [integration_by_parts_check(model, float(x)) for x in xs]
        worst = max(residuals)
        out.append(ValidationDiagnostic("integration_by_parts", tuple(map(float, xs)), tuple(residuals),
                                        "pass" if worst <= 1e-8 else "fail", f"max residual {worst:.3e}"))
        out.append(probe_conjecture_optimal_a(model, (max(lo, 1.0), hi)))
    if model.support.real_line:
        out.append(probe_conjecture_real_line(model, (lo, hi)))
    return out


def _decay_check(model, kind, lo, hi):
    """Once the tail is below 1e-4, the deficit at the right end must be within 1e-6 of zero."""
    t = true_tail(model, hi).value
    d = deficit(model, hi, kind)
    name = f"deficit_limit[{kind}]"
    if t >= 1e-4:
        return ValidationDiagnostic(name, (hi,), (d,), "skipped", f"tail {t:.3g} has not reached 1e-4")
    ok = abs(d) <= 1e-6
    return ValidationDiagnostic(name, (hi,), (d,), "pass" if ok else "fail",
                                f"deficit {d:.3e} at x={hi:.6g} (tail {t:.3e})")


def suite_passed(diagnostics: Sequence[ValidationDiagnostic]) -> bool:
    return all(d.verdict != "fail" for d in diagnostics if not d.informational)
