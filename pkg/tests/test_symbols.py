import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bergtoep.core import AnalyticPoly, QuadratureRule, disk_quadrature, inner_product, kernel
from bergtoep.operators import TruncatedOperator, evaluate_image, op_norm
from bergtoep.symbols import (
    BoundedRadial,
    CircleEntry,
    CircleMeasure,
    DerivativeDeltaCollection,
    DiscreteMeasure,
    FiniteRankForm,
    SpectralSequence,
    SymbolError,
    assemble,
    circular_mode_factor,
    derivative_delta_apply,
    derivative_functional_norm,
    form_eval,
    matrix_element,
    phi_pq,
    rank_one_truncation,
    rank_one_truncation_bound,
    reflection,
)


def xy_operator(alpha, beta):
    """Coefficients c[a, b] with d^alpha dbar^beta = sum c[a, b] d_x^a d_y^b."""
    # d = (dx - i dy)/2, dbar = (dx + i dy)/2 in the variables (X, Y) -> 2D array
    d = np.array([[0, -0.5j], [0.5, 0]])
    db = np.array([[0, 0.5j], [0.5, 0]])
    out = np.array([[1.0 + 0j]])
    for m in [d] * alpha + [db] * beta:
        out = _poly2_mul(out, m)
    return out


def _poly2_mul(a, b):
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1), dtype=complex)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            out[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
    return out


def fd_derivative_delta(alpha, beta, zeta, f, z):
    """(-1)^(alpha+beta) d^alpha dbar^beta [f(w) (1 - z conj w)^-2] at w = zeta, by high-precision finite differences."""
    mpmath.mp.dps = 40
    coeffs = [mpmath.mpc(c.real, c.imag) for c in f.coeffs]
    zz = mpmath.mpc(z.real, z.imag)

    def h(x, y):
        w = mpmath.mpc(x, y)
        fw = mpmath.polyval(coeffs[::-1], w)
        return fw * (1 - zz * mpmath.conj(w)) ** -2

    C = xy_operator(alpha, beta)
    total = mpmath.mpc(0)
    for a in range(C.shape[0]):
        for b in range(C.shape[1]):
            if abs(C[a, b]) > 0:
                part = mpmath.diff(h, (zeta.real, zeta.imag), (a, b))
                total += mpmath.mpc(C[a, b].real, C[a, b].imag) * part
    return complex((-1) ** (alpha + beta) * total)


@pytest.mark.parametrize("alpha,beta", [(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (0, 3), (3, 2)])
def test_derivative_delta_apply_matches_finite_differences(alpha, beta):
    f = AnalyticPoly([0.5, -1.0 + 0.5j, 0.25, 0.3j, -0.1, 0.05])
    zeta, z = 0.3 - 0.2j, -0.4 + 0.25j
    got = derivative_delta_apply(alpha, beta, zeta, f, z)
    ref = fd_derivative_delta(alpha, beta, zeta, f, z)
    assert abs(got - ref) <= 1e-6 * max(1.0, abs(ref))


def test_derivative_delta_apply_agrees_with_assembled_operator():
    f = AnalyticPoly([1.0, 0.5, -0.25j, 0.125])
    zeta, z = 0.2 + 0.1j, 0.3 - 0.2j
    for a, b in [(0, 0), (2, 1), (1, 3)]:
        T = assemble(DerivativeDeltaCollection.from_distribution([(zeta, 1.0, a, b)]), 120)
        assert evaluate_image(T, f, z) == pytest.approx(derivative_delta_apply(a, b, zeta, f, z), abs=1e-10)


def test_derivative_delta_kills_low_degree():
    # f = e_2 has vanishing third derivative
    assert derivative_delta_apply(3, 0, 0.1, AnalyticPoly.basis(2), 0.2) == 0


@pytest.mark.parametrize("p,q", [(0, 0), (1, 2), (3, 0), (4, 4)])
def test_phi_pq_is_matrix_unit(p, q):
    A = assemble(phi_pq(p, q), 8).entries
    E = np.zeros((8, 8))
    E[q, p] = 1
    assert np.allclose(A, E, atol=1e-12)


def test_form_weight_convention():
    s = DerivativeDeltaCollection.from_distribution([(0.0, 2.0, 1, 2)])
    assert s.terms[0][1] == pytest.approx(-2.0)
    f, g = AnalyticPoly([0, 1, 1]), AnalyticPoly([0, 0, 1, 1])
    assert s.form(f, g) == pytest.approx(-2.0 * f.derivative(1)(0) * np.conj(g.derivative(2)(0)))


def test_matrix_element_convention():
    s = DerivativeDeltaCollection(((0.1 + 0.2j, 1.0, 2, 1),))
    A = assemble(s, 6).entries
    for p in range(6):
        for q in range(6):
            assert A[q, p] == pytest.approx(matrix_element(s, p, q), abs=1e-13)


def test_discrete_measure_form_and_matrix():
    mu = DiscreteMeasure(((0.5, 2.0), (-0.3j, 1.0 + 1j)))
    f, g = AnalyticPoly([1, 2, 3]), AnalyticPoly([0, 1j])
    ref = sum(m * f(z) * np.conj(g(z)) for z, m in mu.atoms)
    assert mu.form(f, g) == pytest.approx(ref)
    T = assemble(mu, 10)
    # <T f, g> from the matrix
    val = np.vdot(g.basis_coords(10), T.entries @ f.basis_coords(10))
    assert val == pytest.approx(ref)


def test_discrete_measure_rejects_boundary_support():
    with pytest.raises(SymbolError):
        DiscreteMeasure(((1.0, 1.0),))


@pytest.mark.parametrize("r1", [0.3, 0.7])
def test_indicator_radial_eigenvalues(r1):
    sym = BoundedRadial(lambda r: (r < r1).astype(float), breaks=(r1,))
    A = assemble(sym, 12).entries
    k = np.arange(12)
    assert np.allclose(np.diag(A), r1 ** (2 * (k + 1)), atol=1e-13)
    assert np.max(np.abs(A - np.diag(np.diag(A)))) < 1e-13


def test_radial_form_matches_quadrature():
    sym = BoundedRadial(lambda r: 1.0 + r**2)
    f, g = AnalyticPoly([1, 2j, 0.5]), AnalyticPoly([0.5, 1, -1])
    ref = disk_quadrature(lambda z: (1 + np.abs(z) ** 2) * f(z) * np.conj(g(z)), QuadratureRule(40, 64))
    assert sym.form(f, g) == pytest.approx(ref, abs=1e-12)


def test_circle_measure_matrix_plain():
    c = CircleMeasure((CircleEntry(0.5, 1.0),))
    A = assemble(c, 10).entries
    k = np.arange(10)
    assert np.allclose(A, np.diag((k + 1) * 0.25**k), atol=1e-13)


def test_circle_measure_derivatives_against_direct_integral():
    r, q, i, qp = 0.6, 1, 1, 2
    f, g = AnalyticPoly([0.3, 1, 0.5, -0.2j, 0.1]), AnalyticPoly([1, -0.5, 0.25, 0.5, 0.125j])
    theta = 2 * np.pi * np.arange(512) / 512

    def rho_theta(h, qq, ii, conv):
        # rho^qq theta^ii applied termwise to c_n r^n e^{i n t}
        n = np.arange(h.coeffs.size)
        mult = -n if conv == "definition" else 1j * n
        vals = 0
        for nn in n:
            c = h.coeffs[nn] * mult[nn] ** ii
            a = nn - ii
            fall = math.prod(a - t for t in range(qq)) if qq else 1
            vals = vals + c * fall * r ** (a - qq) * np.exp(1j * nn * theta)
        return vals

    for conv in ("definition", "identity"):
        sym = CircleMeasure((CircleEntry(r, 2.0, q, i, qp),), theta_convention=conv)
        ref = 2.0 * np.mean(rho_theta(f, q, i, conv) * np.conj(rho_theta(g, qp, 0, conv)))
        assert sym.form(f, g) == pytest.approx(ref, abs=1e-12)
        T = assemble(sym, 8)
        assert np.vdot(g.basis_coords(8), T.entries @ f.basis_coords(8)) == pytest.approx(ref, abs=1e-12)


def test_circular_mode_factor_conventions():
    assert circular_mode_factor(3, 1, 0, 0.5, "definition") == pytest.approx(-3 * 0.5**2)
    assert circular_mode_factor(3, 1, 0, 0.5, "identity") == pytest.approx(3j * 0.5**2)
    with pytest.raises(ValueError):
        circular_mode_factor(1, 1, 0, 0.5, "other")


def test_circle_rejects_invalid_radius():
    with pytest.raises(SymbolError):
        CircleMeasure((CircleEntry(1.0, 1.0),))


def test_spectral_and_reflection():
    J = assemble(reflection(10), 10)
    f = AnalyticPoly([1, 2, 3, 4])
    assert evaluate_image(J, f, 0.3) == pytest.approx(f(-0.3))
    s = SpectralSequence((1, 2, 3))
    assert np.allclose(np.diag(assemble(s, 5).entries), [1, 2, 3, 0, 0])
    assert s.bound() == 3


def test_finite_rank_form():
    u, v = AnalyticPoly([1, 0.5]), AnalyticPoly([0, 1, 1j])
    s = FiniteRankForm((u,), (v,))
    f, g = AnalyticPoly([2, 1]), AnalyticPoly([1, 1, 1])
    assert s.form(f, g) == pytest.approx(inner_product(f, u) * inner_product(v, g))
    T = assemble(s, 6)
    img = T.apply(f)
    assert np.allclose(img.basis_coords(6), (inner_product(f, u) * v).basis_coords(6))
    assert form_eval(s, f, g).bound_certificate == pytest.approx(u.norm() * v.norm())


def test_kernel_image_for_rank_one():
    # T f = <f, u> v, evaluated at z through the kernel
    u, v = AnalyticPoly([1, 1]), AnalyticPoly([0.5, 0, 2])
    T = assemble(FiniteRankForm((u,), (v,)), 8)
    f, z = AnalyticPoly([1, -1, 0.5]), 0.4 + 0.1j
    assert evaluate_image(T, f, z) == pytest.approx(inner_product(f, u) * v(z))


def test_rank_one_truncation_error_bound():
    rng = np.random.default_rng(3)
    u = AnalyticPoly(rng.standard_normal(20))
    v = AnalyticPoly(rng.standard_normal(20))
    full = TruncatedOperator(np.outer(v.basis_coords(20), np.conj(u.basis_coords(20))))
    for p0, q0 in [(3, 5), (10, 10), (20, 20)]:
        err = op_norm(full - rank_one_truncation(u, v, p0, q0, 20))
        assert err <= rank_one_truncation_bound(u, v, p0, q0) + 1e-12


def test_derivative_functional_norm():
    assert derivative_functional_norm(0.0, 3) == pytest.approx(math.sqrt(4) * 6)
    # order 0 is ||k_zeta|| = 1/(1-|zeta|^2)
    assert derivative_functional_norm(0.5, 0) == pytest.approx(1 / 0.75)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=2, max_size=6), st.lists(st.floats(-2, 2), min_size=2, max_size=6))
def test_deriv_delta_bound_certificate(fc, gc):
    s = DerivativeDeltaCollection(((0.3j, 1.5, 2, 1), (-0.2, 1.0, 0, 0)))
    f, g = AnalyticPoly(fc), AnalyticPoly(gc)
    assert abs(s.form(f, g)) <= s.bound() * f.norm() * g.norm() * (1 + 1e-12) + 1e-12


def test_kernel_form_identity_for_point_mass():
    # for delta_zeta, (T f)(z) = f(zeta) k_z-conjugate
    zeta, z = 0.3 + 0.3j, -0.2
    f = AnalyticPoly([1, 1, 1])
    T = assemble(DiscreteMeasure(((zeta, 1.0),)), 80)
    assert evaluate_image(T, f, z) == pytest.approx(f(zeta) * kernel(zeta, z), abs=1e-10)
