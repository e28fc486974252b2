import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CATALOG, interior_points
from tailbound.conditions import (
    CONDITION_IDS,
    ConditionReport,
    evaluate_conditions,
    feasible_region,
    joint_region,
    thm5_master_lhs,
)
from tailbound.distributions import (
    DistributionModel,
    SupportSpec,
    beta_prime,
    chi_square_central,
    gaussian,
    make_catalog_distribution,
    reflect,
)
from tailbound.errors import DomainError, PreconditionError, SingularDenominatorError
from tailbound.kinds import BoundKind as K


# Second, straight-line transcription of every inequality, written without
# looking at the library code: (left side, sense) per condition id.
def reference_conditions(kind, x, x0, f, fp, fpp):
    a, b = kind.a, kind.b
    y = None if x0 is None else x - x0
    tag = kind.tag.value
    if tag in ("thm1", "thm2"):
        return {
            f"{tag}.denominator": (f + y ** a * fp, "<"),
            f"{tag}.second_order": ((y - a * y ** a) * f ** 2 - y ** (2 * a + 1) * fp ** 2
                                    + y ** (a + 1) * f * (fp + y ** a * fpp), "<="),
        }
    if tag == "cor1":
        return {"cor1.denominator": (f + y * fp, "<"),
                "cor1.second_order": (fp + y * fpp - y * fp ** 2 / f, "<=")}
    if tag == "cor2":
        return {"cor2.fprime_negative": (fp, "<"), "cor2.curvature_ratio": (f * fpp / fp ** 2 - 1, "<=")}
    if tag in ("thm3", "thm4"):
        master = ((y * (1 + y ** b) ** 2 - y ** (a + b) * (a + b + a * y ** b)) * f ** 2
                  - y ** (2 * a + 1) * (y ** (2 * b) - 1) * fp ** 2
                  + y ** a * f * (y * (1 + y ** b) * (2 + y ** b) * fp
                                  + y ** (a + b) * (-b * fp + y * (1 + y ** b) * fpp)))
        return {f"{tag}.denominator": (f + y ** a * fp, "<"), f"{tag}.master": (master, ">=")}
    if tag == "cor3":
        master = ((y * (1 + y ** b) ** 2 - y ** (1 + b) * (1 + b + y ** b)) * f ** 2
                  - y ** 3 * (y ** (2 * b) - 1) * fp ** 2
                  + y * f * (y * (1 + y ** b) * (2 + y ** b) * fp
                             + y ** (1 + b) * (-b * fp + y * (1 + y ** b) * fpp)))
        return {"cor3.denominator": (f + y * fp, "<"), "cor3.master": (master, ">=")}
    master = 1 - y ** (2 * b) + f / fp ** 2 * y ** (b - 1) * (-b * fp + (1 + y ** b) * y * fpp)
    if tag == "cor4":
        return {"cor4.fprime_negative": (fp, "<"), "cor4.master": (master, ">=")}
    return {"thm5.x_gt_mean": (y, ">"), "thm5.fprime_negative": (fp, "<"), "thm5.master": (master, ">=")}


SENSE = {"<": lambda v: v < 0, "<=": lambda v: v <= 0, ">=": lambda v: v >= 0, ">": lambda v: v > 0}


def anchor_for(kind, model):
    return kind.anchor(model)


def _kinds_for(model, ab):
    a, b = ab
    if model.support.real_line:
        return [K.cor2(), K.thm5(b)]
    kinds = [K.thm2(a), K.cor1(), K.cor2(), K.thm4(a, b), K.cor3(b), K.cor4(b)]
    if model.support.lower == 0.0:
        kinds += [K.thm1(a), K.thm3(a, b)]
    return kinds


def test_condition_ids_order():
    assert CONDITION_IDS[0] == "thm1.denominator" and CONDITION_IDS[-1] == "thm5.master"
    assert len(CONDITION_IDS) == 19 and len(set(CONDITION_IDS)) == 19


def test_literal_transcription_agrees():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 32 * 4:
        entry = CATALOG[rng.integers(len(CATALOG))]
        model = make_catalog_distribution(entry)
        ab = (float(rng.choice([0.5, 1.0, 2.0])), float(rng.choice([0.5, 1.0, 2.0])))
        x = float(interior_points(model, 1, seed=int(rng.integers(1 << 30)))[0])
        for kind in _kinds_for(model, ab):
            if kind.tag.value == "thm5" and x <= model.mean:
                continue
            rep = evaluate_conditions(model, x, kind)
            f, fp, fpp = model.derivatives(x)
            ref = reference_conditions(kind, x, anchor_for(kind, model), f, fp, fpp)
            assert [e.id for e in rep.entries] == list(ref)
            for e in rep.entries:
                val, sense = ref[e.id]
                assert e.sense == sense
                assert e.satisfied == SENSE[sense](val)
                assert e.lhs_value == pytest.approx(val, rel=1e-10, abs=1e-300)
            checked += 1


def test_report_all_satisfied_is_conjunction(catalog_model):
    for x in interior_points(catalog_model, 8, seed=1):
        for kind in _kinds_for(catalog_model, (1.0, 1.0)):
            try:
                rep = evaluate_conditions(catalog_model, float(x), kind)
            except (DomainError, PreconditionError):
                continue
            assert rep.all_satisfied == all(e.satisfied for e in rep.entries)


def test_gaussian_cor2_at_two():
    rep = evaluate_conditions(gaussian(0, 1), 2.0, K.cor2())
    fp = rep["cor2.fprime_negative"]
    assert fp.satisfied and fp.lhs_value == pytest.approx(-2 * math.exp(-2) / math.sqrt(2 * math.pi))
    cr = rep["cor2.curvature_ratio"]
    assert cr.satisfied and cr.lhs_value + 1 == pytest.approx(0.75, rel=1e-14)


@pytest.mark.parametrize("x", [0.3, 1.0, 1.7, 2.5, 4.0, 6.0, 9.0, 15.0])
def test_gaussian_curvature_reduction(x):
    rep = evaluate_conditions(gaussian(0, 1), x, K.cor2())
    assert rep["cor2.curvature_ratio"].lhs_value + 1 == pytest.approx((x * x - 1) / (x * x), rel=1e-12)


def test_gaussian_cor2_fails_left_of_mean():
    assert not evaluate_conditions(gaussian(0, 1), -0.5, K.cor2())["cor2.fprime_negative"].satisfied


def test_beta_prime_cor1_denominator_at_two():
    m = beta_prime(2.1, 1.3)
    e = evaluate_conditions(m, 2.0, K.cor1())["cor1.denominator"]
    f, fp, _ = m.derivatives(2.0)
    assert e.satisfied and e.lhs_value == pytest.approx(f + 2.0 * fp)
    assert not evaluate_conditions(m, 1.5, K.cor1())["cor1.denominator"].satisfied


def test_domain_error_outside_support():
    with pytest.raises(DomainError):
        evaluate_conditions(chi_square_central(3), 0.0, K.cor2())
    with pytest.raises(DomainError):
        evaluate_conditions(chi_square_central(3), -1.0, K.cor1())


def test_support_preconditions():
    with pytest.raises(PreconditionError):
        evaluate_conditions(gaussian(0, 1), 1.0, K.cor1())
    with pytest.raises(PreconditionError):
        evaluate_conditions(chi_square_central(3), 1.0, K.thm5(1))
    with pytest.raises(PreconditionError) as info:
        evaluate_conditions(reflect(beta_prime(2.1, 1.3)), -1.0, K.cor2())
    assert info.value.precondition == "right_unbounded"


def test_division_by_zero_density_is_unsatisfied():
    model = DistributionModel("flat-zero", {}, lambda x: 0.0, lambda x: 0.0, lambda x: 0.0, SupportSpec(0.0))
    rep = evaluate_conditions(model, 1.0, K.cor1())
    e = rep["cor1.second_order"]
    assert math.isnan(e.lhs_value) and not e.satisfied and e.note
    assert not evaluate_conditions(model, 1.0, K.cor2())["cor2.curvature_ratio"].satisfied


@pytest.mark.parametrize("x", [0.5, 1.0, 1.5, 2.0, 3.0, 4.5, 7.0, 11.0])
def test_thm5_master_reduces_to_x(x):
    assert thm5_master_lhs(gaussian(0, 1), x, 1.0) == pytest.approx(x, rel=1e-12)


def test_thm5_master_general_gaussian():
    # 1 + (x - mu) - sigma^2 for b = 1
    m = gaussian(-1.7, 1.9)
    for x in [0.0, 0.91, 3.0, 8.0]:
        assert thm5_master_lhs(m, x, 1.0) == pytest.approx(1 + (x + 1.7) - 1.9 ** 2, abs=1e-12)


def test_thm5_master_small_b_high_precision():
    x, b = 2.0, 1e-9
    mpmath.mp.dps = 50
    X, B = mpmath.mpf(x), mpmath.mpf(b)
    f = mpmath.npdf(X)
    fp, fpp = -X * f, (X * X - 1) * f
    ref = 1 - X ** (2 * B) + f / fp ** 2 * X ** (B - 1) * (-B * fp + (1 + X ** B) * X * fpp)
    assert thm5_master_lhs(gaussian(0, 1), x, b) == pytest.approx(float(ref), rel=1e-9)


def test_thm5_master_errors():
    flat = DistributionModel("plateau", {}, lambda x: 1.0, lambda x: 0.0, lambda x: 0.0, SupportSpec(),
                             mean=0.0)
    with pytest.raises(SingularDenominatorError):
        thm5_master_lhs(flat, 1.0, 1.0)
    with pytest.raises(PreconditionError):
        thm5_master_lhs(gaussian(0, 1), -0.1, 1.0)


def test_huge_exponent_does_not_overflow_to_nan():
    m = chi_square_central(6)
    rep = evaluate_conditions(m, 20.0, K.thm2(1e6))
    assert rep.all_satisfied
    assert all(math.isfinite(e.lhs_value) for e in rep.entries)
    assert "divided" in rep["thm2.second_order"].note


# -- regions ------------------------------------------------------------------


def test_gaussian_joint_region_left_endpoint():
    r = joint_region(gaussian(-1.7, 1.9), [K.cor2(), K.thm5(1)], (-1, 10))
    assert 0.8 < r.left_endpoint < 1.3
    assert r.left_endpoint == pytest.approx(0.91, abs=11 / 2 ** 20)


def test_chi2_cor2_region():
    r = feasible_region(chi_square_central(6), K.cor2(), (1e-9, 30))
    assert len(r.intervals) == 1
    lo, hi = r.intervals[0]
    assert lo == pytest.approx(4.0, abs=30 / 2 ** 20) and hi == 30


def test_gaussian_cor2_whole_range():
    r = feasible_region(gaussian(0, 1), K.cor2(), (0.1, 8))
    assert r.intervals == ((0.1, 8.0),)


def test_region_preconditions():
    with pytest.raises(PreconditionError):
        feasible_region(gaussian(0, 1), K.cor2(), (1, 1))
    with pytest.raises(PreconditionError):
        feasible_region(gaussian(0, 1), K.cor2(), (0, 1), n_grid=8)


def test_empty_region_is_not_error():
    r = feasible_region(beta_prime(2.1, 1.3), K.cor3(1.0), (3, 20))
    assert r.empty and r.terminal_interval() is None


def test_region_midpoints_satisfied(catalog_model):
    lo, hi = (0.0, 40.0) if math.isfinite(catalog_model.support.lower) else (catalog_model.mean, catalog_model.mean + 10)
    for kind in _kinds_for(catalog_model, (1.0, 1.0)):
        r = feasible_region(catalog_model, kind, (lo, hi), 64)
        for a, b in r.intervals:
            assert a < b
            assert evaluate_conditions(catalog_model, 0.5 * (a + b), kind).all_satisfied
        ends = [e for iv in r.intervals for e in iv]
        assert ends == sorted(ends)


def test_cor2_subsumes_large_a_thm2(catalog_model):
    if not math.isfinite(catalog_model.support.lower):
        pytest.skip("thm2 needs a finite lower endpoint")
    for x in interior_points(catalog_model, 40, seed=9):
        x = float(x)
        if evaluate_conditions(catalog_model, x, K.cor2()).all_satisfied and x - catalog_model.support.lower > 1:
            assert evaluate_conditions(catalog_model, x, K.thm2(1e6)).all_satisfied


def test_beta_prime_cor2_fails_while_cor1_holds():
    m = beta_prime(2.1, 1.3)
    witnesses = [x for x in np.linspace(1.7, 50, 100)
                 if not evaluate_conditions(m, x, K.cor2())["cor2.curvature_ratio"].satisfied
                 and evaluate_conditions(m, x, K.cor1()).all_satisfied]
    assert witnesses


@given(st.floats(0.05, 30.0), st.sampled_from([0.5, 1.0, 2.0]))
def test_region_membership_consistent(x, b):
    m = chi_square_central(6)
    rep = evaluate_conditions(m, x, K.cor4(b))
    assert isinstance(rep, ConditionReport)
    assert rep.all_satisfied == all(e.satisfied for e in rep.entries)


def test_kind_parse_round_trip():
    for text in ["cor2", "thm5(b=1)", "thm4:a=2,b=0.5", "cor3(b=0.8)", "thm1(a=1)"]:
        k = K.parse(text)
        assert K.parse(k.label) == k
    with pytest.raises(Exception):
        K.parse("cor9")
    with pytest.raises(Exception):
        K.thm2(0.0)
    with pytest.raises(Exception):
        K(K.cor2().tag, a=1.0)
