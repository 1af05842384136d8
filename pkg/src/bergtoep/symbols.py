"""Sesquilinear-form symbols and the operators they define.

Every symbol is a bounded form F(f, g) on the Bergman space; the operator it
defines satisfies <T f, g> = F(f, g), equivalently (T f)(z) = F(f, k_z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    AnalyticPoly,
    QuadratureRule,
    basis_values,
    check_in_disk,
    falling_factorial,
    inner_product,
)
from .operators import TruncatedOperator

# Support points must satisfy |zeta| <= 1 - SUPPORT_MARGIN.
SUPPORT_MARGIN = 1e-6

THETA_CONVENTIONS = ("definition", "identity")


class SymbolError(ValueError):
    """A symbol violates its invariants."""


def _check_support(points, what: str) -> None:
    a = np.abs(np.asarray(points, dtype=complex))
    if a.size and not np.all(np.isfinite(a)):
        raise SymbolError(f"{what}: support point is not finite")
    if a.size and a.max() > 1.0 - SUPPORT_MARGIN:
        raise SymbolError(f"{what}: support on boundary (|zeta| = {a.max():.17g} exceeds 1 - {SUPPORT_MARGIN:g})")


@dataclass(frozen=True)
class FormValue:
    value: complex
    bound_certificate: float | None = None


class Symbol:
    """Base class; subclasses implement the form on polynomials and on the basis."""

    kind = "symbol"

    def form(self, f: AnalyticPoly, g: AnalyticPoly) -> complex:
        raise NotImplementedError

    def bound(self) -> float | None:
        """A priori constant C with |F(f, g)| <= C ||f|| ||g||, when one is cheap."""
        return None

    def matrix(self, n: int) -> np.ndarray:
        """Entries <T e_j, e_l> at (l, j), for l, j < n."""
        cols = [AnalyticPoly.basis(j) for j in range(n)]
        a = np.empty((n, n), dtype=complex)
        for j, ej in enumerate(cols):
            for l, el in enumerate(cols):
                a[l, j] = self.form(ej, el)
        return a


@dataclass(frozen=True)
class BoundedRadial(Symbol):
    """Multiplication symbol a(|z|); `breaks` lists radii where a may jump."""

    a: Callable
    breaks: tuple[float, ...] = ()
    label: str = ""
    kind = "bounded_radial"

    def __post_init__(self):
        object.__setattr__(self, "breaks", tuple(float(b) for b in self.breaks))
        if any(not 0.0 < b < 1.0 for b in self.breaks):
            raise SymbolError("bounded_radial: break radii must lie in (0, 1)")

    def values(self, r) -> np.ndarray:
        v = np.asarray(self.a(np.asarray(r, dtype=float)), dtype=float)
        v = np.broadcast_to(v, np.shape(r))
        if not np.all(np.isfinite(v)):
            raise SymbolError("bounded_radial: symbol is not finite at a quadrature node")
        return v

    def rule(self, degree: int = 0) -> QuadratureRule:
        return QuadratureRule(n_r=max(64, degree // 2 + 40), n_theta=max(256, degree + 2), breaks=self.breaks)

    def form(self, f, g):
        rule = self.rule(f.degree + g.degree)
        z, w = rule.nodes
        return complex(np.sum(w * self.values(np.abs(z)) * f(z) * np.conj(g(z))))

    def bound(self):
        r, _ = self.rule().radial
        return float(np.max(np.abs(self.values(r))))

    def matrix(self, n):
        # Tensor rule evaluated factor by factor: radial sums times angular sums.
        rule = self.rule(2 * n)
        r, wr = rule.radial
        k = np.arange(n)
        powers = r[None, :] ** k[:, None]
        sq = np.sqrt(k + 1.0)
        R = (powers * (wr * self.values(r))[None, :]) @ powers.T
        R *= sq[:, None] * sq[None, :]
        theta = rule.angles
        d = k[None, :] - k[:, None]  # j - l at (l, j)
        A = np.exp(1j * np.outer(np.arange(-(n - 1), n), theta)).mean(axis=1)
        return R * A[d + n - 1]


@dataclass(frozen=True)
class DiscreteMeasure(Symbol):
    """sum m delta_zeta; the form is sum m f(zeta) conj(g(zeta))."""

    atoms: tuple[tuple[complex, complex], ...]
    kind = "discrete"

    def __post_init__(self):
        atoms = tuple((complex(z), complex(m)) for z, m in self.atoms)
        _check_support([z for z, _ in atoms], "discrete")
        object.__setattr__(self, "atoms", atoms)

    @property
    def points(self) -> np.ndarray:
        return np.array([z for z, _ in self.atoms], dtype=complex)

    @property
    def masses(self) -> np.ndarray:
        return np.array([m for _, m in self.atoms], dtype=complex)

    def form(self, f, g):
        return complex(sum(m * f(z) * np.conj(g(z)) for z, m in self.atoms))

    def bound(self):
        return float(sum(abs(m) / (1.0 - abs(z) ** 2) ** 2 for z, m in self.atoms))

    def matrix(self, n):
        a = np.zeros((n, n), dtype=complex)
        for z, m in self.atoms:
            v = basis_values(n, z)
            a += m * np.outer(np.conj(v), v)
        return a

    def scaled(self, weight: Callable) -> "DiscreteMeasure":
        """The measure weight(|zeta|) mu."""
        return DiscreteMeasure(tuple((z, m * weight(abs(z))) for z, m in self.atoms))


def derivative_functional_norm(zeta: complex, order: int, tol: float = 1e-17) -> float:
    """Norm of f -> f^{(order)}(zeta) on the Bergman space.

    Equals sqrt(sum_k |e_k^{(order)}(zeta)|^2); (order+1) order!^2 at zeta = 0.
    """
    r2 = abs(zeta) ** 2
    total, k = 0.0, order
    while True:
        term = (k + 1) * falling_factorial(k, order) ** 2 * r2 ** (k - order)
        total += float(term)
        if r2 == 0.0 or (k > order + 10 and term < tol * total):
            return math.sqrt(total)
        k += 1


@dataclass(frozen=True)
class DerivativeDeltaCollection(Symbol):
    """Form sum m f^{(l)}(zeta) conj(g^{(j)}(zeta)) over terms (zeta, m, l, j).

    The distribution c d^alpha dbar^beta delta_zeta corresponds to the term
    (zeta, (-1)^(alpha+beta) c, alpha, beta); see `from_distribution`.
    """

    terms: tuple[tuple[complex, complex, int, int], ...]
    kind = "deriv_delta"

    def __post_init__(self):
        terms = []
        for z, m, l, j in self.terms:
            if int(l) != l or int(j) != j or l < 0 or j < 0:
                raise SymbolError("deriv_delta: derivative orders must be nonnegative integers")
            terms.append((complex(z), complex(m), int(l), int(j)))
        _check_support([t[0] for t in terms], "deriv_delta")
        object.__setattr__(self, "terms", tuple(terms))

    @classmethod
    def from_distribution(cls, items: Sequence[tuple[complex, complex, int, int]]) -> "DerivativeDeltaCollection":
        """Build from distribution terms (zeta, c, alpha, beta) meaning c d^alpha dbar^beta delta_zeta."""
        return cls(tuple((z, (-1) ** (a + b) * c, a, b) for z, c, a, b in items))

    @property
    def origin_supported(self) -> bool:
        return all(z == 0 for z, _, _, _ in self.terms)

    def form(self, f, g):
        total = 0j
        for z, m, l, j in self.terms:
            total += m * f.derivative(l)(z) * np.conj(g.derivative(j)(z))
        return complex(total)

    def bound(self):
        return float(
            sum(abs(m) * derivative_functional_norm(z, l) * derivative_functional_norm(z, j) for z, m, l, j in self.terms)
        )

    def matrix(self, n):
        a = np.zeros((n, n), dtype=complex)
        for z, m, l, j in self.terms:
            a += m * np.outer(np.conj(basis_values(n, z, j)), basis_values(n, z, l))
        return a


def phi_pq(p: int, q: int) -> DerivativeDeltaCollection:
    """Normalized symbol (-1)^(p+q) / (sqrt((p+1)(q+1)) p! q!) d^p dbar^q delta; its operator is P_{p,q}."""
    c = (-1) ** (p + q) / (math.sqrt((p + 1) * (q + 1)) * math.factorial(p) * math.factorial(q))
    return DerivativeDeltaCollection.from_distribution([(0.0, c, p, q)])


@dataclass(frozen=True)
class CircleEntry:
    radius: float
    mass: complex
    q: int = 0
    i: int = 0
    q_prime: int = 0


def circular_mode_factor(n, i: int, q: int, r: float, convention: str = "definition"):
    """Factor A with rho^q theta^i (z^n) = A r^0 e^{i n t} on |z| = r.

    rho is the radial derivative and theta the weighted circular derivative
    i r^{-1} d/dt. On the mode r^a e^{i n t}, theta multiplies by -n/r under its
    definition and by i n / r under the identity theta = i (w/|w|) d/dw.
    """
    n = np.asarray(n, dtype=float)
    if convention == "definition":
        mult = -n
    elif convention == "identity":
        mult = 1j * n
    else:
        raise ValueError(f"unknown theta convention {convention!r}")
    return mult**i * falling_factorial(n - i, q) * r ** (n - i - q) + 0j


@dataclass(frozen=True)
class CircleMeasure(Symbol):
    """Sum over entries of m (2 pi)^-1 int_{|w|=r} rho^q theta^i f conj(rho^{q'} g) d theta."""

    entries: tuple[CircleEntry, ...]
    theta_convention: str = "definition"
    n_theta: int = 256
    kind = "circle"

    def __post_init__(self):
        entries = tuple(e if isinstance(e, CircleEntry) else CircleEntry(*e) for e in self.entries)
        for e in entries:
            if not 0.0 < e.radius <= 1.0 - SUPPORT_MARGIN:
                raise SymbolError(f"circle: support on boundary or invalid radius {e.radius!r}")
            if min(e.q, e.i, e.q_prime) < 0:
                raise SymbolError("circle: derivative orders must be nonnegative")
        if self.theta_convention not in THETA_CONVENTIONS:
            raise SymbolError(f"circle: theta_convention must be one of {THETA_CONVENTIONS}")
        object.__setattr__(self, "entries", entries)

    def _values(self, f: AnalyticPoly, r: float, q: int, i: int, theta: np.ndarray) -> np.ndarray:
        n = np.arange(f.coeffs.size)
        amp = f.coeffs * circular_mode_factor(n, i, q, r, self.theta_convention)
        return amp @ np.exp(1j * np.outer(n, theta))

    def form(self, f, g):
        nt = max(self.n_theta, f.degree + g.degree + 2)
        theta = 2.0 * np.pi * np.arange(nt) / nt
        total = 0j
        for e in self.entries:
            u = self._values(f, e.radius, e.q, e.i, theta)
            v = self._values(g, e.radius, e.q_prime, 0, theta)
            total += e.mass * np.mean(u * np.conj(v))
        return complex(total)

    def matrix(self, n):
        nt = max(self.n_theta, 2 * n)
        theta = 2.0 * np.pi * np.arange(nt) / nt
        k = np.arange(n)
        waves = np.exp(1j * np.outer(k, theta))
        sq = np.sqrt(k + 1.0)
        a = np.zeros((n, n), dtype=complex)
        for e in self.entries:
            F = (sq * circular_mode_factor(k, e.i, e.q, e.radius, self.theta_convention))[:, None] * waves
            G = (sq * circular_mode_factor(k, 0, e.q_prime, e.radius, self.theta_convention))[:, None] * waves
            a += e.mass * (np.conj(G) @ F.T) / nt
        return a


@dataclass(frozen=True)
class SpectralSequence(Symbol):
    """Diagonal symbol: F(f, g) = sum gamma(n) a_n(f) conj(a_n(g))."""

    gamma: tuple[complex, ...]
    kind = "spectral"

    def __post_init__(self):
        g = tuple(complex(x) for x in self.gamma)
        if not g:
            raise SymbolError("spectral: empty sequence")
        if not all(math.isfinite(abs(x)) for x in g):
            raise SymbolError("spectral: values must be finite")
        object.__setattr__(self, "gamma", g)

    def form(self, f, g):
        n = len(self.gamma)
        return complex(np.sum(np.asarray(self.gamma) * f.basis_coords(n) * np.conj(g.basis_coords(n))))

    def bound(self):
        return float(max(abs(x) for x in self.gamma))

    def matrix(self, n):
        d = np.zeros(n, dtype=complex)
        m = min(n, len(self.gamma))
        d[:m] = self.gamma[:m]
        return np.diag(d)


def reflection(n: int) -> SpectralSequence:
    """J e_k = (-1)^k e_k, i.e. (J f)(z) = f(-z)."""
    return SpectralSequence(tuple((-1.0) ** k for k in range(n)))


@dataclass(frozen=True)
class FiniteRankForm(Symbol):
    """F(f, g) = sum_j <f, f_j> <g_j, g>; the operator is f -> sum_j <f, f_j> g_j."""

    f_list: tuple[AnalyticPoly, ...]
    g_list: tuple[AnalyticPoly, ...]
    kind = "finite_rank"

    def __post_init__(self):
        object.__setattr__(self, "f_list", tuple(self.f_list))
        object.__setattr__(self, "g_list", tuple(self.g_list))
        if not self.f_list or len(self.f_list) != len(self.g_list):
            raise SymbolError("finite_rank: lists must be nonempty and of equal length")

    def form(self, f, g):
        return complex(sum(inner_product(f, fj) * inner_product(gj, g) for fj, gj in zip(self.f_list, self.g_list)))

    def bound(self):
        return float(sum(fj.norm() * gj.norm() for fj, gj in zip(self.f_list, self.g_list)))

    def matrix(self, n):
        a = np.zeros((n, n), dtype=complex)
        for fj, gj in zip(self.f_list, self.g_list):
            a += np.outer(gj.basis_coords(n), np.conj(fj.basis_coords(n)))
        return a


def finite_rank_form(F_list: Sequence[AnalyticPoly], G_list: Sequence[AnalyticPoly]) -> FiniteRankForm:
    return FiniteRankForm(tuple(F_list), tuple(G_list))


def form_eval(s: Symbol, f: AnalyticPoly, g: AnalyticPoly) -> FormValue:
    return FormValue(s.form(f, g), s.bound())


def matrix_element(s: Symbol, p: int, q: int) -> complex:
    """<T e_p, e_q> = F(e_p, e_q)."""
    return s.form(AnalyticPoly.basis(p), AnalyticPoly.basis(q))


def assemble(s: Symbol, n: int) -> TruncatedOperator:
    """Compression of the operator of `s` to span{e_0..e_{n-1}}."""
    if n < 1:
        raise ValueError("dimension must be positive")
    return TruncatedOperator(s.matrix(n))


def derivative_delta_apply(alpha: int, beta: int, zeta: complex, f: AnalyticPoly, z: complex) -> complex:
    """(T_Phi f)(z) for Phi = d^alpha dbar^beta delta_zeta.

    Equals (-1)^(alpha+beta) (beta+1)! z^beta (1 - z conj(zeta))^-(2+beta) f^{(alpha)}(zeta).
    """
    check_in_disk(zeta, "zeta")
    check_in_disk(z, "z")
    sign = (-1) ** (alpha + beta)
    factor = math.factorial(beta + 1) * z**beta * (1.0 - z * np.conj(zeta)) ** (-(2 + beta))
    return complex(sign * factor * f.derivative(alpha)(zeta))


def rank_one_truncation(u: AnalyticPoly, v: AnalyticPoly, p0: int, q0: int, n: int) -> TruncatedOperator:
    """sum_{p<p0, q<q0} conj(u_p) v_q P_{p,q}, the finite-rank approximant of P_{u,v}."""
    uu = u.basis_coords(n)
    vv = v.basis_coords(n)
    uu[p0:] = 0
    vv[q0:] = 0
    return TruncatedOperator(np.outer(vv, np.conj(uu)))


def rank_one_truncation_bound(u: AnalyticPoly, v: AnalyticPoly, p0: int, q0: int) -> float:
    """||u - Pi u|| ||v|| + ||Pi u|| ||v - Pi v||, bounding the error of `rank_one_truncation`."""
    a, b = u.basis_coords(), v.basis_coords()
    tail_u = np.linalg.norm(a[p0:])
    head_u = np.linalg.norm(a[:p0])
    tail_v = np.linalg.norm(b[q0:])
    return float(tail_u * np.linalg.norm(b) + head_u * tail_v)
