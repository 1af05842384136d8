import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bergtoep.carleson import (
    KClassParams,
    MeasureCollection,
    MeasureDerivativeForm,
    central_derivative_bound,
    check_norm_af_type,
    coeff_M,
    decay_classify,
    escaping_atoms,
    form_bound_check,
    k_weight,
    origin_hyperfunction,
    point_mass_varpi,
    random_unit_poly,
    scaled_measure,
    varpi,
)
from bergtoep.core import AnalyticPoly, QuadratureRule, disk_quadrature
from bergtoep.symbols import BoundedRadial, CircleEntry, CircleMeasure, DiscreteMeasure, SymbolError, assemble


def brute_varpi(mu, params, n=400):
    """Supremum over a polar grid of mass(D(z, (1-|z|)/2)) times the weight."""
    r = np.linspace(0, 0.999, n)
    t = np.linspace(0, 2 * np.pi, 4 * n, endpoint=False)
    z = (r[:, None] * np.exp(1j * t)[None, :]).ravel()
    s = (1 - np.abs(z)) / 2
    mass = np.zeros(z.size)
    for p, m in mu.atoms:
        mass += abs(m) * (np.abs(z - p) <= s)
    return float(np.max(mass * k_weight(np.abs(z), params)))


@pytest.mark.parametrize("k", [0.0, 0.5, 2.0])
def test_point_mass_varpi_against_grid_search(k):
    prm = KClassParams(k)
    mu = DiscreteMeasure(((0.4 + 0.3j, 1.0),))
    exact = varpi(mu, prm).varpi
    assert exact == pytest.approx(point_mass_varpi(1.0, 0.4 + 0.3j, prm), rel=1e-12)
    grid = brute_varpi(mu, prm)
    assert grid <= exact * (1 + 1e-9)
    assert grid >= 0.97 * exact


def test_two_atom_varpi_not_below_grid_search():
    prm = KClassParams(1.0)
    mu = DiscreteMeasure(((0.5, 1.0), (0.52 + 0.02j, 1.0)))
    exact = varpi(mu, prm).varpi
    grid = brute_varpi(mu, prm)
    assert grid <= exact * (1 + 1e-9)
    assert grid >= 0.95 * exact
    # the peak disk of the first atom already holds both
    assert exact >= 2 * point_mass_varpi(1.0, 0.5, prm) * (1 - 1e-12)


def test_varpi_origin_value():
    assert varpi(DiscreteMeasure(((0.0, 1.0),)), KClassParams(0)).varpi == pytest.approx(2.25)


def test_circle_varpi_matches_finer_search():
    mu = CircleMeasure((CircleEntry(0.7, 1.0),))
    a = varpi(mu, KClassParams(0)).varpi
    b = varpi(mu, KClassParams(0), grid_size=40000).varpi
    assert a == pytest.approx(b, rel=1e-6)


def test_density_varpi_vanishing():
    rep = varpi(BoundedRadial(lambda r: np.ones_like(r)), KClassParams(0))
    # area of D(z, (1-|z|)/2) is s^2 with s = (1-|z|)/2, times (1-|z|)^-2 gives 1/4
    assert rep.varpi == pytest.approx(0.25, rel=1e-3)
    assert rep.vanishing is False
    compact = varpi(BoundedRadial(lambda r: (r < 0.5).astype(float), breaks=(0.5,)), KClassParams(0))
    assert compact.vanishing is True


def test_varpi_rejects_unsupported():
    with pytest.raises(SymbolError):
        varpi(object())


def test_kclass_params_validation():
    with pytest.raises(ValueError):
        KClassParams(0.3)
    with pytest.raises(ValueError):
        KClassParams(1, 1.5)


def test_coeff_M_identity_and_composition():
    assert coeff_M(2, 2) == pytest.approx(1.0)
    assert coeff_M(1, 3) * coeff_M(3, 2) == pytest.approx(coeff_M(1, 2))


@pytest.mark.parametrize("l,k", [(0, 1), (2, 0.5), (3, 3), (1.5, 4)])
def test_atom_scaling_law_with_disk_geometry_factor(l, k):
    """For an atom the optimal disk sits at |z| = (1 + 2|zeta|)/3, which contributes (3/2)^(2(l-k))."""
    p = 1 / 9
    mu = DiscreteMeasure(((0.3 - 0.4j, 1.5),))
    lhs = varpi(scaled_measure(mu, 2 * (l - k)), KClassParams(l, p)).varpi
    rhs = coeff_M(l, k, p) * varpi(mu, KClassParams(k, p)).varpi
    assert lhs / rhs == pytest.approx(1.5 ** (2 * (l - k)), rel=1e-10)
    lo, hi = 0.5 ** (2 * abs(l - k)), 1.5 ** (2 * abs(l - k))
    assert lo * (1 - 1e-12) <= lhs / rhs <= hi * (1 + 1e-12)


def test_scaled_measure_kinds():
    c = scaled_measure(CircleMeasure((CircleEntry(0.5, 2.0),)), 1.0)
    assert c.entries[0].mass == pytest.approx(1.0)
    b = scaled_measure(BoundedRadial(lambda r: np.ones_like(r)), 2.0)
    assert b.values(np.array([0.5]))[0] == pytest.approx(0.25)


def test_measure_derivative_form_density_matches_quadrature():
    mu = BoundedRadial(lambda r: 1 + r)
    F = MeasureDerivativeForm(mu, 1, 2)
    f, g = AnalyticPoly([0, 1, 2, 0.5j]), AnalyticPoly([1, 0, 1, 1, 0.25])
    ref = disk_quadrature(
        lambda z: (1 + np.abs(z)) * f.derivative(1)(z) * np.conj(g.derivative(2)(z)), QuadratureRule(200, 64)
    )
    assert F.form(f, g) == pytest.approx(ref, rel=1e-6)
    A = F.matrix(6)
    assert np.vdot(g.basis_coords(6), A @ f.basis_coords(6)) == pytest.approx(F.form(f, g), rel=1e-10)


def test_form_bound_check_zero_zero_point_mass_is_sharp():
    # sup |f(0.5)|^2 over unit f is ||k_0.5||^2 = 16/9; varpi_0 = 9; ratio 16/81
    rep = form_bound_check(DiscreteMeasure(((0.5, 1.0),)), 0, 0, trials=50)
    assert rep.empirical_C == pytest.approx(16 / 81, rel=1e-6)
    assert math.isfinite(rep.empirical_C)


def test_random_unit_poly_is_unit():
    rng = np.random.default_rng(1)
    for _ in range(20):
        assert random_unit_poly(rng, 15).norm() == pytest.approx(1.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False), min_size=1, max_size=15), st.integers(0, 10))
def test_central_derivative_bound_property(c, j):
    lhs, rhs = central_derivative_bound(AnalyticPoly(c), j)
    assert lhs <= rhs * (1 + 1e-12) + 1e-300


def test_central_derivative_equality_on_basis():
    for j in range(8):
        lhs, rhs = central_derivative_bound(AnalyticPoly.basis(j), j)
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_norm_af_type_verdicts():
    assert check_norm_af_type(origin_hyperfunction(20)).verdict == "CONVERGENT"
    rep = check_norm_af_type(escaping_atoms(8))
    assert rep.verdict == "DIVERGENT"
    assert rep.test == "k-norm"
    single = MeasureCollection(((0, 0, DiscreteMeasure(((0.0, 1.0),))),))
    assert check_norm_af_type(single).verdict == "CONVERGENT"


def test_hyperfunction_operator_is_point_evaluation():
    # sum m_{l,j} f^(l)(0) conj(g^(j)(0)) with m = 4^-(l+j)/(l! j!) equals f(1/4) conj(g(1/4))
    T = assemble(origin_hyperfunction(60).to_symbol(), 20)
    f, g = AnalyticPoly([1, -1, 0.5]), AnalyticPoly([0.3, 2j])
    val = np.vdot(g.basis_coords(20), T.entries @ f.basis_coords(20))
    assert val == pytest.approx(f(0.25) * np.conj(g(0.25)), abs=1e-12)


def test_collection_to_symbol_mixed():
    c = MeasureCollection(((0, 0, DiscreteMeasure(((0.2, 1.0),))), (1, 0, CircleMeasure((CircleEntry(0.5, 1.0),)))))
    f, g = AnalyticPoly([1, 1]), AnalyticPoly([1, 0, 1])
    ref = f(0.2) * np.conj(g(0.2))
    theta = 2 * np.pi * np.arange(64) / 64
    w = 0.5 * np.exp(1j * theta)
    ref += np.mean(f.derivative(1)(w) * np.conj(g(w)))
    assert c.to_symbol().form(f, g) == pytest.approx(ref)
    with pytest.raises(SymbolError):
        MeasureCollection(((0, 0, object()),))


def test_decay_classify_cases():
    n = np.arange(40)
    exp = decay_classify(0.7 ** (2 * (n + 1)))
    assert exp.kind == "EXPONENTIAL"
    assert exp.rate == pytest.approx(2 * math.log(1 / 0.7), rel=1e-9)
    sub = decay_classify(1.0 / (np.arange(1, 2001) ** 2.0))
    assert sub.kind == "SUBEXPONENTIAL" and sub.excluded
    sup = decay_classify(np.exp(-(n.astype(float) ** 2) / 10))
    assert sup.kind == "SUPEREXPONENTIAL"
    with pytest.raises(ValueError):
        decay_classify([1.0, 0.5])
    with pytest.raises(ValueError):
        decay_classify(np.r_[np.ones(10), 0.0])
