import math

import numpy as np
import pytest
from scipy import stats

from conftest import CATALOG, entry_id
from tailbound.bounds import closed_form_kinds
from tailbound.conditions import feasible_region, is_certified
from tailbound.distributions import (
    CatalogEntry,
    beta_prime,
    chi_square_central,
    gaussian,
    gaussian_squared,
    make_catalog_distribution,
    reflect,
)
from tailbound.errors import PreconditionError
from tailbound.kinds import BoundKind as K
from tailbound.validation import (
    ValidationDiagnostic,
    deficit,
    deficit_derivative,
    deficit_lower,
    deficit_upper,
    derivative_sign_check,
    integration_by_parts_check,
    monotonicity_audit,
    probe_conjecture_optimal_a,
    probe_conjecture_real_line,
    run_suite,
    suite_passed,
    validation_range,
)


def test_exponential_upper_deficit_is_zero():
    m = chi_square_central(2)
    for x in (0.1, 1.0, 3.0, 12.0, 30.0):
        assert abs(deficit_upper(m, x)) <= 1e-15


def test_gaussian_upper_deficit_example():
    d = deficit_upper(gaussian(0, 1), 2.0)
    assert d == pytest.approx(stats.norm.pdf(2) / 2 - stats.norm.sf(2), rel=1e-12)
    assert d == pytest.approx(0.004245, abs=1e-6)


def test_chi2_a1_deficit_nonnegative():
    m = chi_square_central(6)
    assert is_certified(m, 10.0, K.thm1(1.0))
    assert deficit_upper(m, 10.0, a=1.0) >= 0


def test_exponential_lower_deficit_example():
    d = deficit_lower(chi_square_central(2), 3.0, b=1.0)
    assert d == pytest.approx(-math.exp(-1.5) / 4, rel=1e-13)


def test_gaussian_lower_deficit_example():
    assert deficit_lower(gaussian(0, 1), 2.0, b=1.0) <= 0


def test_deficit_computable_where_uncertified():
    m = beta_prime(2.1, 1.3)
    assert not is_certified(m, 4.0, K.cor3(0.8))
    assert math.isfinite(deficit(m, 4.0, K.cor3(0.8)))


@pytest.mark.parametrize("entry", CATALOG, ids=entry_id)
def test_deficit_sign_on_feasible_regions(entry):
    m = make_catalog_distribution(entry)
    lo, hi = validation_range(entry)
    for kind in closed_form_kinds(entry, 1.0) + closed_form_kinds(entry, 0.5):
        region = feasible_region(m, kind, (lo, hi), 64)
        for a, b in region.intervals:
            for x in np.linspace(a, b, 200 // max(1, len(region.intervals)) + 2)[1:-1]:
                d = deficit(m, float(x), kind)
                if kind.is_upper:
                    assert d >= -1e-10
                else:
                    assert d <= 1e-10


# -- monotonicity -------------------------------------------------------------


def test_monotonicity_gaussian():
    diag = monotonicity_audit(gaussian(0, 1), K.cor2(), (1, 12), 200)
    assert diag.verdict == "pass", diag.detail
    assert len(diag.values) == 200


def test_monotonicity_chi2_region():
    m = chi_square_central(6)
    region = feasible_region(m, K.cor2(), (1e-9, 40))
    assert monotonicity_audit(m, K.cor2(), region, 200).verdict == "pass"


def test_monotonicity_exponential_identically_zero():
    diag = monotonicity_audit(chi_square_central(2), K.cor2(), (0.01, 40), 200)
    assert diag.verdict == "pass" and "identically zero" in diag.detail


def test_monotonicity_lower():
    diag = monotonicity_audit(gaussian(-1.7, 1.9), K.thm5(1.0), (1.2, 20), 200)
    assert diag.verdict == "pass", diag.detail


def test_monotonicity_detects_violation():
    # beta-prime cor3(b=0.8) left of its certified region: deficit is positive
    diag = monotonicity_audit(beta_prime(2.1, 1.3), K.cor3(0.8), (3, 9), 50)
    assert diag.verdict == "fail" and "positive deficit" in diag.detail


def test_monotonicity_empty_region():
    region = feasible_region(beta_prime(2.1, 1.3), K.cor3(1.0), (3, 20))
    with pytest.raises(PreconditionError):
        monotonicity_audit(beta_prime(2.1, 1.3), K.cor3(1.0), region)


@pytest.mark.parametrize("kind,lo,hi", [
    (K.cor2(), 4.5, 40.0),
    (K.cor4(1.0), 14.0, 40.0),
    (K.thm2(2.0), 6.0, 40.0),
    (K.thm4(2.0, 0.5), 8.0, 40.0),
])
def test_derivative_sign_chi2(kind, lo, hi):
    m = chi_square_central(6)
    diag = derivative_sign_check(m, kind, lo, hi)
    assert diag.verdict == "pass", diag.detail


def test_derivative_matches_finite_difference_value():
    m = gaussian(0, 1)
    x, h = 2.0, 1e-5
    fd = (deficit(m, x + h, K.cor2()) - deficit(m, x - h, K.cor2())) / (2 * h)
    assert deficit_derivative(m, x, K.cor2()) == pytest.approx(fd, rel=1e-6)
    fd = (deficit(m, x + h, K.thm5(1.0)) - deficit(m, x - h, K.thm5(1.0))) / (2 * h)
    assert deficit_derivative(m, x, K.thm5(1.0)) == pytest.approx(fd, rel=1e-6)


def test_derivative_beta_prime_thm_forms():
    m = beta_prime(2.1, 1.3)
    x, h = 20.0, 1e-4
    for kind in (K.thm2(1.0), K.thm4(1.0, 0.8)):
        fd = (deficit(m, x + h, kind) - deficit(m, x - h, kind)) / (2 * h)
        assert deficit_derivative(m, x, kind) == pytest.approx(fd, rel=1e-5)


# -- integration by parts -----------------------------------------------------


@pytest.mark.parametrize("model,x", [
    (chi_square_central(2), 3.0),
    (beta_prime(2.1, 1.3), 5.0),
    (chi_square_central(2), 1e-6),
    (beta_prime(2.1, 1.3), 1e-6),
])
def test_ibp_examples(model, x):
    assert integration_by_parts_check(model, x) <= 1e-8


@pytest.mark.parametrize("entry", [e for e in CATALOG if e.family != "gaussian"], ids=entry_id)
def test_ibp_catalog(entry):
    m = make_catalog_distribution(entry)
    lo, hi = validation_range(entry)
    for x in np.linspace(lo, hi, 17)[1:]:
        assert integration_by_parts_check(m, float(x)) <= 1e-8


def test_ibp_precondition():
    with pytest.raises(PreconditionError):
        integration_by_parts_check(gaussian(0, 1), 1.0)


# -- conjecture probes --------------------------------------------------------


def test_real_line_probe():
    diag = probe_conjecture_real_line(gaussian(-1.7, 1.9), (-5, 20), 500)
    assert diag.verdict == "pass" and diag.informational
    x0 = float(diag.detail.rsplit("=", 1)[1])
    assert -1.7 < x0 < -1.7 + 0.06
    diag = probe_conjecture_real_line(gaussian(0, 1), (-5, 20), 500)
    assert diag.verdict == "pass"


def test_real_line_probe_precondition():
    with pytest.raises(PreconditionError):
        probe_conjecture_real_line(reflect(beta_prime(2.1, 1.3)), (-20, -1), 50)


def test_optimal_a_probe_beta_prime():
    diag = probe_conjecture_optimal_a(beta_prime(2.1, 1.3), (5, 50))
    assert diag.verdict == "pass" and diag.informational


def test_optimal_a_probe_skips_gaussian():
    assert probe_conjecture_optimal_a(gaussian(0, 1), (1, 5)).verdict == "skipped"


def test_optimal_a_probe_runs_for_k1():
    diag = probe_conjecture_optimal_a(gaussian_squared(1.0, 0.0), (2, 20))
    assert diag.verdict in ("pass", "fail")
    assert len(diag.x_samples) == 16


# -- suite --------------------------------------------------------------------


@pytest.mark.parametrize("family", ["gaussian", "chi_square_central", "chi_square_noncentral",
                                    "gaussian_squared", "beta_prime"])
def test_suite_default_catalog(family):
    diags = run_suite(CatalogEntry.default(family))
    assert suite_passed(diags), [d.detail for d in diags if d.verdict == "fail"]
    assert any(d.name.startswith("monotonicity") and d.verdict == "pass" for d in diags)


def test_suite_k2_and_shifted_gaussian_squared():
    for entry in (CatalogEntry("chi_square_central", {"k": 2}),
                  CatalogEntry("gaussian_squared", {"sigma": 1.5, "mu": -1.2})):
        assert suite_passed(run_suite(entry))


def test_diagnostic_serialises():
    d = monotonicity_audit(gaussian(0, 1), K.cor2(), (1, 3), 5).to_dict()
    assert set(d) == {"name", "verdict", "detail", "informational", "x_samples", "values"}
    assert isinstance(ValidationDiagnostic("x", (), (), "pass"), ValidationDiagnostic)
