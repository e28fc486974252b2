"""Distribution models: density plus its first two derivatives and support metadata.

Every catalog family ships hand-derived derivatives. Densities are evaluated
in log space and the derivatives are expressed through the logarithmic
derivative ``g = f'/f`` and its slope ``g'``, so that ``f' = g f`` and
``f'' = (g**2 + g') f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Optional, Sequence

from scipy import special

from .errors import InvalidParameterError

__all__ = [
    "FAMILIES",
    "AssumptionReport",
    "AssumptionSeries",
    "CatalogEntry",
    "DistributionModel",
    "ProbeSpec",
    "SupportSpec",
    "beta_prime",
    "check_assumptions",
    "chi_square_central",
    "chi_square_noncentral",
    "gaussian",
    "gaussian_squared",
    "make_catalog_distribution",
    "reflect",
]

inf = math.inf
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class SupportSpec:
    """Support ``(lower, upper)``; openness is metadata only.

    ``upper`` is ``+inf`` for every model the bounds accept. A finite upper
    endpoint only arises from :func:`reflect`.
    """

    lower: float = -inf
    lower_open: bool = True
    upper: float = inf
    upper_open: bool = True

    def __post_init__(self):
        if self.lower == -inf and not self.lower_open:
            raise InvalidParameterError("lower_open", "an infinite endpoint is always open")
        if self.upper == inf and not self.upper_open:
            raise InvalidParameterError("upper_open", "an infinite endpoint is always open")
        if not self.lower < self.upper:
            raise InvalidParameterError("lower", "lower endpoint must be below the upper endpoint")

    def interior(self, x):
        return self.lower < x < self.upper

    @property
    def semi_bounded(self):
        return math.isfinite(self.lower) and self.upper == inf

    @property
    def real_line(self):
        return self.lower == -inf and self.upper == inf


@dataclass(frozen=True, eq=False)
class DistributionModel:
    """A continuous distribution described by its density and two derivatives.

    ``sf_closed_form`` is an optional cancellation-safe right tail; when it is
    absent but ``cdf_closed_form`` is present the tail falls back to
    ``1 - cdf``.
    """

    name: str
    params: Mapping[str, float]
    pdf: Callable[[float], float]
    pdf_prime: Callable[[float], float]
    pdf_double_prime: Callable[[float], float]
    support: SupportSpec
    mean: Optional[float] = None
    cdf_closed_form: Optional[Callable[[float], float]] = None
    sf_closed_form: Optional[Callable[[float], float]] = None
    family: Optional[str] = field(default=None, compare=False)

    def derivatives(self, x):
        """Return ``(f(x), f'(x), f''(x))``."""
        return self.pdf(x), self.pdf_prime(x), self.pdf_double_prime(x)

    @property
    def lower(self):
        return self.support.lower

    @cached_property
    def resolved_mean(self):
        """Analytic mean when known, otherwise ``int x f(x) dx`` computed once."""
        if self.mean is not None:
            return self.mean
        from .oracle import integrate_over_support

        value, _ = integrate_over_support(lambda t: t * self.pdf(t), self)
        return value

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"DistributionModel({self.name}({args}))"


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

FAMILIES = (
    "gaussian",
    "chi_square_central",
    "chi_square_noncentral",
    "gaussian_squared",
    "beta_prime",
)

_FAMILY_PARAMS = {
    "gaussian": ("mu", "sigma"),
    "chi_square_central": ("k",),
    "chi_square_noncentral": ("k", "lam"),
    "gaussian_squared": ("sigma", "mu"),
    "beta_prime": ("alpha", "beta"),
}

_DEFAULTS = {
    "gaussian": {"mu": -1.7, "sigma": 1.9},
    "chi_square_central": {"k": 6},
    "chi_square_noncentral": {"k": 6, "lam": 1.2},
    "gaussian_squared": {"sigma": 1.5, "mu": -1.2},
    "beta_prime": {"alpha": 2.1, "beta": 1.3},
}


def _require(cond, name, message):
    if not cond:
        raise InvalidParameterError(name, message)


@dataclass(frozen=True)
class CatalogEntry:
    """A named family with parameter values, validated on construction."""

    family: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in _FAMILY_PARAMS:
            raise InvalidParameterError("family", f"unknown family {self.family!r}")
        expected = _FAMILY_PARAMS[self.family]
        params = dict(_DEFAULTS[self.family]) if not self.params else dict(self.params)
        unknown = set(params) - set(expected)
        if unknown:
            raise InvalidParameterError(sorted(unknown)[0], f"not a parameter of {self.family}")
        for name in expected:
            _require(name in params, name, "missing")
            value = params[name]
            _require(isinstance(value, (int, float)) and math.isfinite(value), name, "must be a finite real")
        if "sigma" in params:
            _require(params["sigma"] > 0, "sigma", "must be > 0")
        if "k" in params:
            k = params["k"]
            _require(float(k).is_integer() and k >= 1, "k", "must be an integer >= 1")
            params["k"] = int(k)
        if "lam" in params:
            _require(params["lam"] >= 0, "lam", "must be >= 0")
        if "alpha" in params:
            _require(params["alpha"] > 0, "alpha", "must be > 0")
        if "beta" in params:
            _require(params["beta"] > 0, "beta", "must be > 0")
        object.__setattr__(self, "params", params)

    @classmethod
    def default(cls, family):
        return cls(family, dict(_DEFAULTS[family]))

    def default_range(self):
        """A right-tail window used by the CLI and the validation suite."""
        p = self.params
        if self.family == "gaussian":
            return (p["mu"], p["mu"] + 10.0 * p["sigma"])
        # chi-square windows reach twelve standard deviations past the mean
        if self.family == "chi_square_central":
            return (0.0, max(40.0, p["k"] + 12.0 * math.sqrt(2.0 * p["k"])))
        if self.family == "chi_square_noncentral":
            k, lam = p["k"], p["lam"]
            return (0.0, max(40.0, k + lam + 12.0 * math.sqrt(2.0 * (k + 2.0 * lam))))
        if self.family == "gaussian_squared":
            return (0.0, (abs(p["mu"]) + 8.0 * p["sigma"]) ** 2)
        return (0.0, 1.0e4)


def _gaussian(mu, sigma):
    var = sigma * sigma
    log_norm = -math.log(sigma) - 0.5 * _LOG_2PI

    def pdf(x):
        z = (x - mu) / sigma
        return math.exp(log_norm - 0.5 * z * z)

    def pdf_prime(x):
        return -(x - mu) / var * pdf(x)

    def pdf_double_prime(x):
        d = x - mu
        return (d * d / (var * var) - 1.0 / var) * pdf(x)

    def cdf(x):
        return 0.5 * math.erfc(-(x - mu) / (sigma * math.sqrt(2.0)))

    def sf(x):
        return 0.5 * math.erfc((x - mu) / (sigma * math.sqrt(2.0)))

    return DistributionModel(
        "gaussian", {"mu": mu, "sigma": sigma}, pdf, pdf_prime, pdf_double_prime,
        SupportSpec(), mean=mu, cdf_closed_form=cdf, sf_closed_form=sf, family="gaussian",
    )


def _chi_square_central(k):
    half = 0.5 * k
    log_norm = -half * math.log(2.0) - math.lgamma(half)

    def pdf(x):
        if x <= 0:
            return 0.0
        return math.exp(log_norm + (half - 1.0) * math.log(x) - 0.5 * x)

    def g(x):
        return (k - 2.0 - x) / (2.0 * x)

    def pdf_prime(x):
        return g(x) * pdf(x)

    def pdf_double_prime(x):
        gx = g(x)
        return (gx * gx - (k - 2.0) / (2.0 * x * x)) * pdf(x)

    def cdf(x):
        return float(special.gammainc(half, 0.5 * x)) if x > 0 else 0.0

    def sf(x):
        return float(special.gammaincc(half, 0.5 * x)) if x > 0 else 1.0

    return DistributionModel(
        "chi_square_central", {"k": k}, pdf, pdf_prime, pdf_double_prime,
        SupportSpec(0.0, lower_open=(k == 1)), mean=float(k),
        cdf_closed_form=cdf, sf_closed_form=sf, family="chi_square_central",
    )


def _bessel_ratio(nu, z):
    """``I_{nu+1}(z) / I_nu(z)`` from exponentially scaled Bessel functions."""
    return float(special.ive(nu + 1.0, z) / special.ive(nu, z))


def _chi_square_noncentral(k, lam):
    if lam == 0:
        central = _chi_square_central(k)
        return DistributionModel(
            "chi_square_noncentral", {"k": k, "lam": 0.0}, central.pdf, central.pdf_prime,
            central.pdf_double_prime, central.support, mean=float(k),
            cdf_closed_form=central.cdf_closed_form, sf_closed_form=central.sf_closed_form,
            family="chi_square_noncentral",
        )
    nu = 0.5 * k - 1.0
    sqrt_lam = math.sqrt(lam)

    def pdf(x):
        if x <= 0:
            return 0.0
        z = math.sqrt(lam * x)
        ive = float(special.ive(nu, z))
        if ive <= 0:
            return 0.0
        return math.exp(-0.5 * (x + lam) + 0.5 * nu * math.log(x / lam) + math.log(ive) + z) * 0.5

    def g(x):
        z = math.sqrt(lam * x)
        return (k - 2.0 - x + z * _bessel_ratio(nu, z)) / (2.0 * x)

    def g_prime(x):
        z = math.sqrt(lam * x)
        r = _bessel_ratio(nu, z)
        r_prime = 1.0 - (2.0 * nu + 1.0) * r / z - r * r
        return -nu / (x * x) + lam * lam * (z * r_prime - r) / (4.0 * z ** 3)

    def pdf_prime(x):
        return g(x) * pdf(x)

    def pdf_double_prime(x):
        gx = g(x)
        return (gx * gx + g_prime(x)) * pdf(x)

    def sf(x):
        if x <= 0:
            return 1.0
        from .oracle import marcum_q

        return marcum_q(0.5 * k, sqrt_lam, math.sqrt(x))

    def cdf(x):
        return 1.0 - sf(x)

    return DistributionModel(
        "chi_square_noncentral", {"k": k, "lam": lam}, pdf, pdf_prime, pdf_double_prime,
        SupportSpec(0.0, lower_open=(k == 1)), mean=float(k + lam),
        cdf_closed_form=cdf, sf_closed_form=sf, family="chi_square_noncentral",
    )


def _gaussian_squared(sigma, mu):
    # density of Z**2 with Z ~ N(mu, sigma**2); written in s = sqrt(x)
    var = sigma * sigma
    log_norm = -math.log(sigma) - 0.5 * _LOG_2PI

    def phi(u):
        d = u - mu
        return math.exp(log_norm - 0.5 * d * d / var)

    def even_parts(x):
        s = math.sqrt(x)
        p_plus, p_minus = phi(s), phi(-s)
        g0 = p_plus + p_minus
        g1 = -(s - mu) / var * p_plus - (s + mu) / var * p_minus
        g2 = ((s - mu) ** 2 / var ** 2 - 1.0 / var) * p_plus + ((s + mu) ** 2 / var ** 2 - 1.0 / var) * p_minus
        return s, g0, g1, g2

    def pdf(x):
        if x <= 0:
            return 0.0
        s, g0, _, _ = even_parts(x)
        return g0 / (2.0 * s)

    def pdf_prime(x):
        s, g0, g1, _ = even_parts(x)
        return (g1 * s - g0) / (4.0 * s ** 3)

    def pdf_double_prime(x):
        s, g0, g1, g2 = even_parts(x)
        return (g2 * s * s - 3.0 * g1 * s + 3.0 * g0) / (8.0 * s ** 5)

    root2 = math.sqrt(2.0)

    def sf(x):
        if x <= 0:
            return 1.0
        s = math.sqrt(x)
        return 0.5 * math.erfc((s - mu) / (sigma * root2)) + 0.5 * math.erfc((s + mu) / (sigma * root2))

    def cdf(x):
        if x <= 0:
            return 0.0
        s = math.sqrt(x)
        # P(-s <= Z <= s) without forming 1 - tail
        hi, lo = (s - mu) / (sigma * root2), (-s - mu) / (sigma * root2)
        return 0.5 * (math.erf(hi) - math.erf(lo))

    return DistributionModel(
        "gaussian_squared", {"sigma": sigma, "mu": mu}, pdf, pdf_prime, pdf_double_prime,
        SupportSpec(0.0, lower_open=True), mean=var + mu * mu,
        cdf_closed_form=cdf, sf_closed_form=sf, family="gaussian_squared",
    )


def _beta_prime(alpha, beta):
    log_norm = -float(special.betaln(alpha, beta))

    def pdf(x):
        if x <= 0:
            return 0.0
        return math.exp(log_norm + (alpha - 1.0) * math.log(x) - (alpha + beta) * math.log1p(x))

    def g(x):
        return (alpha - 1.0) / x - (alpha + beta) / (1.0 + x)

    def pdf_prime(x):
        return g(x) * pdf(x)

    def pdf_double_prime(x):
        gx = g(x)
        g_prime = -(alpha - 1.0) / (x * x) + (alpha + beta) / (1.0 + x) ** 2
        return (gx * gx + g_prime) * pdf(x)

    def cdf(x):
        return float(special.betainc(alpha, beta, x / (1.0 + x))) if x > 0 else 0.0

    def sf(x):
        return float(special.betainc(beta, alpha, 1.0 / (1.0 + x))) if x > 0 else 1.0

    return DistributionModel(
        "beta_prime", {"alpha": alpha, "beta": beta}, pdf, pdf_prime, pdf_double_prime,
        SupportSpec(0.0, lower_open=(alpha < 1)),
        mean=alpha / (beta - 1.0) if beta > 1 else None,
        cdf_closed_form=cdf, sf_closed_form=sf, family="beta_prime",
    )


_BUILDERS = {
    "gaussian": lambda p: _gaussian(float(p["mu"]), float(p["sigma"])),
    "chi_square_central": lambda p: _chi_square_central(int(p["k"])),
    "chi_square_noncentral": lambda p: _chi_square_noncentral(int(p["k"]), float(p["lam"])),
    "gaussian_squared": lambda p: _gaussian_squared(float(p["sigma"]), float(p["mu"])),
    "beta_prime": lambda p: _beta_prime(float(p["alpha"]), float(p["beta"])),
}


def make_catalog_distribution(entry: CatalogEntry) -> DistributionModel:
    """Build the analytic model for a validated catalog entry."""
    return _BUILDERS[entry.family](entry.params)


def gaussian(mu=0.0, sigma=1.0):
    return make_catalog_distribution(CatalogEntry("gaussian", {"mu": mu, "sigma": sigma}))


def chi_square_central(k):
    return make_catalog_distribution(CatalogEntry("chi_square_central", {"k": k}))


def chi_square_noncentral(k, lam):
    return make_catalog_distribution(CatalogEntry("chi_square_noncentral", {"k": k, "lam": lam}))


def gaussian_squared(sigma, mu=0.0):
    return make_catalog_distribution(CatalogEntry("gaussian_squared", {"sigma": sigma, "mu": mu}))


def beta_prime(alpha, beta):
    return make_catalog_distribution(CatalogEntry("beta_prime", {"alpha": alpha, "beta": beta}))


# ---------------------------------------------------------------------------
# Reflection
# ---------------------------------------------------------------------------

_REFLECTED = "reflected:"


def reflect(model: DistributionModel) -> DistributionModel:
    """Model of ``-X``.

    Left tails of variables bounded above become right tails of the
    reflection. ``reflect(reflect(m))`` agrees with ``m`` pointwise.
    """
    pdf, d1, d2 = model.pdf, model.pdf_prime, model.pdf_double_prime
    cdf, sf = model.cdf_closed_form, model.sf_closed_form
    support = model.support
    new_support = SupportSpec(
        lower=-support.upper, lower_open=support.upper_open,
        upper=-support.lower, upper_open=support.lower_open,
    )
    name = model.name[len(_REFLECTED):] if model.name.startswith(_REFLECTED) else _REFLECTED + model.name

    new_sf = None
    new_cdf = None
    if cdf is not None:
        # P(-X >= x) = P(X <= -x)
        new_sf = lambda x: cdf(-x)  # noqa: E731
    if sf is not None:
        new_cdf = lambda x: sf(-x)  # noqa: E731
    elif cdf is not None:
        new_cdf = lambda x: 1.0 - cdf(-x)  # noqa: E731

    return DistributionModel(
        name, dict(model.params),
        lambda x: pdf(-x), lambda x: -d1(-x), lambda x: d2(-x),
        new_support,
        mean=None if model.mean is None else -model.mean,
        cdf_closed_form=new_cdf, sf_closed_form=new_sf, family=model.family,
    )


# ---------------------------------------------------------------------------
# Assumption self-checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeSpec:
    """Sample sequences toward ``+inf`` (``right``) and toward the lower endpoint (``left``)."""

    right: Sequence[float]
    left: Sequence[float]

    @classmethod
    def default(cls, model, n_right=48, n_left=60):
        lower = model.support.lower
        anchor = max(lower, 0.0) if math.isfinite(lower) else 0.0
        right = tuple(anchor + 2.0 ** i for i in range(n_right + 1))
        if math.isfinite(lower):
            left = tuple(lower + 2.0 ** -i for i in range(n_left + 1))
        else:
            left = tuple(-(2.0 ** i) for i in range(n_right + 1))
        return cls(right, left)


@dataclass(frozen=True)
class AssumptionSeries:
    name: str
    xs: tuple
    values: tuple
    skipped: tuple
    verdict: bool


@dataclass(frozen=True)
class AssumptionReport:
    tail_ratio: AssumptionSeries  # f**2 / f' as x -> inf
    lower_limit: AssumptionSeries  # x f(x) as x -> lower endpoint

    @property
    def passed(self):
        return self.tail_ratio.verdict and self.lower_limit.verdict


def _decay_verdict(values, window=5, rel=1e-8):
    mags = [abs(v) for v in values]
    if len(mags) < window:
        return False
    tail = mags[-window:]
    decreasing = all(b <= a for a, b in zip(tail, tail[1:]))
    first = mags[0]
    return decreasing and (mags[-1] < rel * first if first > 0 else mags[-1] == 0.0)


def check_assumptions(model: DistributionModel, probe: Optional[ProbeSpec] = None) -> AssumptionReport:
    """Sample ``f**2/f'`` toward ``+inf`` and ``x f(x)`` toward the lower endpoint.

    A sequence passes when its magnitude decreases over the last five usable
    samples and the final magnitude is below ``1e-8`` times the first. Probe
    points where ``f'`` vanishes (including underflow) are skipped and listed.
    """
    probe = probe or ProbeSpec.default(model)

    xs, vals, skipped = [], [], []
    for x in probe.right:
        if not model.support.interior(x):
            skipped.append(x)
            continue
        f, d1 = model.pdf(x), model.pdf_prime(x)
        if d1 == 0.0 or not math.isfinite(d1):
            skipped.append(x)
            continue
        xs.append(x)
        vals.append(f * f / d1)
    tail_series = AssumptionSeries("f^2/f'", tuple(xs), tuple(vals), tuple(skipped), _decay_verdict(vals))

    xs, vals, skipped = [], [], []
    for x in probe.left:
        if not model.support.interior(x):
            skipped.append(x)
            continue
        v = x * model.pdf(x)
        if not math.isfinite(v):
            skipped.append(x)
            continue
        xs.append(x)
        vals.append(v)
    lower_series = AssumptionSeries("x*f(x)", tuple(xs), tuple(vals), tuple(skipped), _decay_verdict(vals))
    return AssumptionReport(tail_series, lower_series)
