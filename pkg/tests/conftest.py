import math

import numpy as np
import pytest
from hypothesis import settings

from tailbound.distributions import CatalogEntry, make_catalog_distribution

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# a spread of parameter choices beyond the defaults
CATALOG = [
    CatalogEntry("gaussian", {"mu": -1.7, "sigma": 1.9}),
    CatalogEntry("gaussian", {"mu": 0.0, "sigma": 1.0}),
    CatalogEntry("chi_square_central", {"k": 1}),
    CatalogEntry("chi_square_central", {"k": 2}),
    CatalogEntry("chi_square_central", {"k": 3}),
    CatalogEntry("chi_square_central", {"k": 6}),
    CatalogEntry("chi_square_noncentral", {"k": 6, "lam": 1.2}),
    CatalogEntry("chi_square_noncentral", {"k": 3, "lam": 4.0}),
    CatalogEntry("chi_square_noncentral", {"k": 1, "lam": 0.5}),
    CatalogEntry("gaussian_squared", {"sigma": 1.5, "mu": 0.0}),
    CatalogEntry("gaussian_squared", {"sigma": 1.5, "mu": -1.2}),
    CatalogEntry("gaussian_squared", {"sigma": 0.7, "mu": 2.0}),
    CatalogEntry("beta_prime", {"alpha": 2.1, "beta": 1.3}),
    CatalogEntry("beta_prime", {"alpha": 0.6, "beta": 3.0}),
]


def entry_id(entry):
    return entry.family + "(" + ",".join(f"{k}={v}" for k, v in entry.params.items()) + ")"


@pytest.fixture(params=CATALOG, ids=entry_id)
def catalog_entry(request):
    return request.param


@pytest.fixture
def catalog_model(catalog_entry):
    return make_catalog_distribution(catalog_entry)


def interior_points(model, n, seed=0, hi=None):
    """Random points in a window of the support where the density is not negligible."""
    rng = np.random.default_rng(seed)
    lower = model.support.lower
    if math.isfinite(lower):
        top = hi if hi is not None else max(20.0, 3.0 * (model.mean or 1.0))
        return lower + (top - lower) * rng.uniform(0.01, 1.0, n)
    mu, sd = model.mean, model.params.get("sigma", 1.0)
    return mu + sd * rng.uniform(-6.0, 6.0, n)


# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
