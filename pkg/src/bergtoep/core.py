"""Analytic polynomials, the Bergman kernel and quadrature on the unit disk.

All integrals use the normalized area measure dV = dx dy / pi, so that the
monomials satisfy ||z^k||^2 = 1/(k+1) and e_k(z) = sqrt(k+1) z^k is an
orthonormal basis of the Bergman space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

# Points closer than this to the unit circle are rejected.
DISK_MARGIN = 1e-9


class DiskDomainError(ValueError):
    """A point that must lie inside the unit disk does not."""


def check_in_disk(z, name: str = "z", margin: float = DISK_MARGIN) -> None:
    a = np.abs(np.asarray(z))
    if not np.all(np.isfinite(a)):
        raise DiskDomainError(f"{name} is not finite")
    if np.any(a >= 1.0 - margin):
        raise DiskDomainError(f"{name} must satisfy |{name}| < 1 (got max |{name}| = {a.max():.17g})")


def falling_factorial(n, m: int):
    """n (n-1) ... (n-m+1), elementwise; zero when m > n >= 0 for integer n."""
    n = np.asarray(n, dtype=float)
    out = np.ones_like(n)
    for i in range(m):
        out = out * (n - i)
    return out


@dataclass(frozen=True, eq=False)
class AnalyticPoly:
    """Polynomial sum_k c_k z^k, stored by its Taylor coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        if c.ndim != 1:
            raise ValueError("coefficients must be a one-dimensional sequence")
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def basis(cls, k: int) -> "AnalyticPoly":
        """The orthonormal basis element e_k."""
        c = np.zeros(k + 1, dtype=complex)
        c[k] = math.sqrt(k + 1)
        return cls(c)

    @classmethod
    def from_basis_coords(cls, a: Sequence[complex]) -> "AnalyticPoly":
        a = np.asarray(a, dtype=complex)
        return cls(a * np.sqrt(np.arange(1, a.size + 1)))

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else 0

    def basis_coords(self, n: int | None = None) -> np.ndarray:
        """Coordinates a_k = <f, e_k> = c_k / sqrt(k+1), padded or cut to length n."""
        a = self.coeffs / np.sqrt(np.arange(1, self.coeffs.size + 1))
        if n is None:
            return a
        out = np.zeros(n, dtype=complex)
        m = min(n, a.size)
        out[:m] = a[:m]
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        acc = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc if acc.ndim else complex(acc)

    def derivative(self, order: int = 1) -> "AnalyticPoly":
        return poly_derivative(self, order)

    def norm(self) -> float:
        return math.sqrt(inner_product(self, self).real)

    def __add__(self, other: "AnalyticPoly") -> "AnalyticPoly":
        n = max(self.coeffs.size, other.coeffs.size)
        c = np.zeros(n, dtype=complex)
        c[: self.coeffs.size] += self.coeffs
        c[: other.coeffs.size] += other.coeffs
        return AnalyticPoly(c)

    def __sub__(self, other: "AnalyticPoly") -> "AnalyticPoly":
        return self + (-1.0) * other

    def __mul__(self, scalar: complex) -> "AnalyticPoly":
        return AnalyticPoly(self.coeffs * scalar)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"AnalyticPoly(degree={self.degree})"


def eval_basis(k: int, z):
    """e_k(z) = sqrt(k+1) z^k."""
    if k < 0:
        raise ValueError("basis index must be nonnegative")
    z = np.asarray(z, dtype=complex)
    out = math.sqrt(k + 1) * z**k
    return out if out.ndim else complex(out)


def basis_values(n: int, z, order: int = 0) -> np.ndarray:
    """Values of e_k^{(order)}(z) for k = 0..n-1; shape (n,) + shape(z)."""
    z = np.asarray(z, dtype=complex)
    k = np.arange(n).reshape((n,) + (1,) * z.ndim)
    coef = np.sqrt(k + 1.0) * falling_factorial(k, order)
    expo = np.maximum(k - order, 0)
    return np.where(k >= order, coef * z[None, ...] ** expo, 0.0)


def kernel(z, w) -> complex:
    """Bergman reproducing kernel k_z(w) = (1 - conj(z) w)^(-2)."""
    check_in_disk(z, "z")
    check_in_disk(w, "w")
    val = (1.0 - np.conj(np.asarray(z, dtype=complex)) * np.asarray(w, dtype=complex)) ** -2
    return val if np.ndim(val) else complex(val)


def truncated_kernel(z: complex, n: int) -> AnalyticPoly:
    """sum_{k<n} conj(e_k(z)) e_k, the projection of k_z onto polynomials of degree < n."""
    if n < 1:
        raise ValueError("truncation order must be positive")
    check_in_disk(z, "z")
    a = np.conj(basis_values(n, complex(z)))
    return AnalyticPoly.from_basis_coords(a)


def kernel_tail_norm(z: complex, n: int) -> float:
    """||k_z - truncated_kernel(z, n)||, from the closed form of ||k_z||^2 = (1-|z|^2)^(-2)."""
    r2 = abs(z) ** 2
    # sum_{k>=n} (k+1) r2^k in closed form
    tail = r2**n * (n + 1 - n * r2) / (1 - r2) ** 2
    return math.sqrt(max(tail, 0.0))


def poly_derivative(f: AnalyticPoly, order: int) -> AnalyticPoly:
    if order < 0:
        raise ValueError("derivative order must be nonnegative")
    if order == 0:
        return f
    c = f.coeffs
    if order >= c.size:
        return AnalyticPoly(np.zeros(1))
    k = np.arange(order, c.size)
    return AnalyticPoly(c[order:] * falling_factorial(k, order))


def inner_product(f: AnalyticPoly, g: AnalyticPoly) -> complex:
    """<f, g> = sum_k c_k(f) conj(c_k(g)) / (k+1)."""
    n = min(f.coeffs.size, g.coeffs.size)
    w = 1.0 / np.arange(1, n + 1)
    return complex(np.sum(f.coeffs[:n] * np.conj(g.coeffs[:n]) * w))


@lru_cache(maxsize=64)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_legendre(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes and weights on [a, b]."""
    x, w = _legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_gauss_legendre(n: int, a: float, b: float, breaks: Iterable[float] = ()):
    """Gauss-Legendre with n nodes on every piece of [a, b] cut at `breaks`."""
    cuts = sorted({a, b, *(t for t in breaks if a < t < b)})
    xs, ws = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        x, w = gauss_legendre(n, lo, hi)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor rule on the disk: Gauss-Legendre in t = r^2 times the uniform angular rule.

    Exact for r^(2a) e^{i m theta} with a <= 2 n_r - 1 and |m| < n_theta. `breaks`
    lists radii at which the radial rule is split (discontinuities of a radial weight).
    """

    n_r: int = 64
    n_theta: int = 256
    breaks: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.n_r < 1 or self.n_theta < 1:
            raise ValueError("quadrature sizes must be positive")

    @cached_property
    def radial(self) -> tuple[np.ndarray, np.ndarray]:
        """Radii and weights (weights sum to one)."""
        t, w = composite_gauss_legendre(self.n_r, 0.0, 1.0, [b * b for b in self.breaks])
        return np.sqrt(t), w

    @cached_property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta

    @cached_property
    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened disk nodes z and weights, radius-major."""
        r, wr = self.radial
        z = r[:, None] * np.exp(1j * self.angles)[None, :]
        w = np.repeat(wr / self.n_theta, self.n_theta)
        return z.ravel(), w


def disk_quadrature(integrand: Callable, rule: QuadratureRule | None = None) -> complex:
    """Approximate the normalized area integral of `integrand` over the disk.

    `integrand` is called once on the array of nodes.
    """
    rule = rule or QuadratureRule()
    z, w = rule.nodes
    vals = np.asarray(integrand(z), dtype=complex)
    if vals.shape != z.shape:
        vals = np.broadcast_to(vals, z.shape)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("integrand is not finite at a quadrature node")
    return complex(np.sum(w * vals))


def circle_quadrature(integrand: Callable, radius: float, n_theta: int = 256) -> complex:
    """(2 pi)^-1 times the integral over |w| = radius of integrand(w) d theta."""
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    vals = np.asarray(integrand(radius * np.exp(1j * theta)), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("integrand is not finite at a quadrature node")
    return complex(np.mean(vals))


@dataclass(frozen=True)
class EuclideanDisk:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def contains(self, w) -> np.ndarray:
        return np.abs(np.asarray(w) - self.center) <= self.radius


def bergman_disk(zeta: complex, r: float) -> EuclideanDisk:
    """The Bergman (hyperbolic) disk B(zeta, r) as a Euclidean disk, with s = tanh r."""
    check_in_disk(zeta, "zeta")
    if not r > 0:
        raise ValueError("hyperbolic radius must be positive")
    s = math.tanh(r)
    a2 = abs(zeta) ** 2
    den = 1.0 - s * s * a2
    return EuclideanDisk(center=complex((1.0 - s * s) * zeta / den), radius=(1.0 - a2) * s / den)


def inclusion_constants(r: float, moduli: Sequence[float] | None = None) -> tuple[float, float]:
    """Empirical kappa_1 <= radius / (1 - |zeta|) <= kappa_2 over the sampled moduli.

    Rotation invariance makes the ratio depend on |zeta| only.
    """
    if moduli is None:
        moduli = np.linspace(0.0, 0.999, 2000)
    ratios = [bergman_disk(float(m), r).radius / (1.0 - m) for m in moduli]
    return float(min(ratios)), float(max(ratios))
