"""Carleson measures for derivatives.

The k-norm of a measure is

    varpi_k(mu) = sup_z |mu|(D(z, (1-|z|)/2)) (1-|z|)^(-2(k+1)) Gamma(k+1)^2 p^(-2k)

and a form int f^{(l)} conj(g^{(j)}) dmu with l + j = 2k is bounded by
C M_{l,k}^(1/2) M_{j,k}^(1/2) varpi_k(mu) ||f|| ||g||. Disks here are closed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import gammaln

from .core import AnalyticPoly, QuadratureRule, basis_values, composite_gauss_legendre
from .symbols import (
    BoundedRadial,
    CircleMeasure,
    DerivativeDeltaCollection,
    DiscreteMeasure,
    Symbol,
    SymbolError,
)

DEFAULT_P = 1.0 / 9.0
# radial search for non-atomic measures stops here; values are lower bounds
GRID_EDGE = 1.0 - 1e-4
CONVERGENCE_RATIO = 0.95
DEFAULT_WINDOW = 10


@dataclass(frozen=True)
class KClassParams:
    k: float = 0.0
    p: float = DEFAULT_P

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        if self.k < 0 or 2 * self.k != int(2 * self.k):
            raise ValueError("k must be a nonnegative integer or half-integer")


@dataclass(frozen=True)
class KCarlesonReport:
    varpi: float
    argsup: complex
    vanishing: bool
    method: str
    k: float
    p: float

    def to_dict(self) -> dict:
        return {
            "varpi": self.varpi,
            "argsup": [self.argsup.real, self.argsup.imag],
            "vanishing": self.vanishing,
            "method": self.method,
            "k": self.k,
            "p": self.p,
        }


def k_weight(rho, params: KClassParams):
    """(1-rho)^(-2(k+1)) Gamma(k+1)^2 p^(-2k)."""
    k, p = params.k, params.p
    logc = 2.0 * gammaln(k + 1.0) - 2.0 * k * math.log(p)
    return np.exp(logc - 2.0 * (k + 1.0) * np.log1p(-np.asarray(rho, dtype=float)))


def coeff_M(l: float, k: float, p: float = DEFAULT_P) -> float:
    """M_{l,k} = p^(2(k-l)) (Gamma(l+1) / Gamma(k+1))^2."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    return float(np.exp(2.0 * (k - l) * math.log(p) + 2.0 * (gammaln(l + 1.0) - gammaln(k + 1.0))))


def point_mass_varpi(mass: complex, zeta: complex, params: KClassParams) -> float:
    """Closed form for m delta_zeta: |m| Gamma(k+1)^2 p^(-2k) (3 / (2 (1-|zeta|)))^(2(k+1))."""
    return float(abs(mass) * k_weight((1.0 + 2.0 * abs(zeta)) / 3.0, params))


def _covered(z: complex, points: np.ndarray) -> np.ndarray:
    s = (1.0 - abs(z)) / 2.0
    return np.abs(points - z) <= s * (1.0 + 1e-12) + 1e-15


def _bisector_candidates(zi: complex, zj: complex) -> list[complex]:
    """Points where the boundaries of the regions {z : |z - zeta| <= (1-|z|)/2} of zi and zj meet."""
    if abs(zi - zj) < 1e-15:
        return []
    mid = 0.5 * (zi + zj)
    d = 1j * (zj - zi) / abs(zj - zi)
    h = lambda t: 2.0 * abs(mid + t * d - zi) + abs(mid + t * d) - 1.0
    res = minimize_scalar(h, bounds=(-2.0, 2.0), method="bounded", options={"xatol": 1e-13})
    if res.fun > 0:
        return []
    out = []
    for end in (-2.0, 2.0):
        if h(end) > 0:
            out.append(mid + brentq(h, min(res.x, end), max(res.x, end), xtol=1e-15) * d)
    return out


def _varpi_discrete(mu: DiscreteMeasure, params: KClassParams) -> tuple[float, complex]:
    pts, mass = mu.points, np.abs(mu.masses)
    if not np.any(mass):
        return 0.0, 0j
    cands = []
    for z in pts:
        rho = (1.0 + 2.0 * abs(z)) / 3.0
        cands.append(rho * (z / abs(z) if z != 0 else 1.0))
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            cands.extend(_bisector_candidates(pts[a], pts[b]))
    best, arg = 0.0, 0j
    for z in cands:
        val = float(np.sum(mass[_covered(z, pts)]) * k_weight(abs(z), params))
        if val > best:
            best, arg = val, complex(z)
    return best, arg


def _arc_fraction(rho, radius: float):
    """Fraction of the circle |w| = radius inside the closed disk D(rho, (1-rho)/2), rho >= 0."""
    rho = np.asarray(rho, dtype=float)
    s = (1.0 - rho) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (rho**2 + radius**2 - s**2) / (2.0 * rho * radius)
    frac = np.arccos(np.clip(c, -1.0, 1.0)) / np.pi
    frac = np.where(np.abs(rho - radius) > s, 0.0, frac)
    return np.where(rho + radius <= s, 1.0, frac)


def _circle_mass(mu: CircleMeasure, rho) -> np.ndarray:
    return sum(abs(e.mass) * _arc_fraction(rho, e.radius) for e in mu.entries)


def _density_mass(mu: BoundedRadial, rho, nodes: int = 96) -> np.ndarray:
    """|mu|(D(rho, (1-rho)/2)) for d mu = a(|w|) dV, integrating arc fractions over radii."""
    out = []
    for x in np.atleast_1d(rho):
        s = (1.0 - x) / 2.0
        lo, hi = max(0.0, x - s), min(1.0, x + s)
        t, w = composite_gauss_legendre(nodes, lo, hi, list(mu.breaks) + [s - x, x - s])
        out.append(np.sum(w * np.abs(mu.values(t)) * 2.0 * t * _arc_fraction(x, t)))
    return np.asarray(out)


def _radial_grid(n: int = 4000) -> np.ndarray:
    lin = np.linspace(0.0, 0.9, n // 2, endpoint=False)
    log = 1.0 - np.logspace(-1, math.log10(1.0 - GRID_EDGE), n - n // 2)
    return np.concatenate([lin, log])


def _radial_sup(mass_fn, params: KClassParams, grid_size: int) -> tuple[float, float, np.ndarray, np.ndarray]:
    grid = _radial_grid(grid_size)
    vals = mass_fn(grid) * k_weight(grid, params)
    i = int(np.argmax(vals))
    best, arg = float(vals[i]), float(grid[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if hi > lo:
        res = minimize_scalar(
            lambda x: -float(mass_fn(np.array([x]))[0] * k_weight(x, params)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if -res.fun > best:
            best, arg = float(-res.fun), float(res.x)
    return best, arg, grid, vals


def varpi(mu: Symbol, params: KClassParams | None = None, grid_size: int = 4000) -> KCarlesonReport:
    """k-norm of a discrete, circle or radial-density measure.

    Atoms are handled exactly; otherwise a radial search (rotation invariance)
    returns a lower bound of the supremum.
    """
    params = params or KClassParams()
    if isinstance(mu, DiscreteMeasure):
        v, arg = _varpi_discrete(mu, params)
        return KCarlesonReport(v, arg, True, "exact", params.k, params.p)
    if isinstance(mu, CircleMeasure):
        v, arg, _, _ = _radial_sup(lambda r: _circle_mass(mu, r), params, grid_size)
        return KCarlesonReport(v, complex(arg), True, "grid", params.k, params.p)
    if isinstance(mu, BoundedRadial):
        v, arg, grid, vals = _radial_sup(lambda r: _density_mass(mu, r), params, grid_size)
        # vanishing: the unweighted-by-constant quantity dies off towards the edge
        tail = vals[grid > 1.0 - 1e-3]
        vanishing = bool(tail.size and tail[-1] <= 1e-8 * max(v, 1e-300))
        return KCarlesonReport(v, complex(arg), vanishing, "grid", params.k, params.p)
    raise SymbolError(f"varpi: unsupported measure kind {getattr(mu, 'kind', type(mu).__name__)!r}")


def scaled_measure(mu: Symbol, exponent: float) -> Symbol:
    """(1-|w|)^exponent mu."""
    if isinstance(mu, DiscreteMeasure):
        return mu.scaled(lambda r: (1.0 - r) ** exponent)
    if isinstance(mu, CircleMeasure):
        from .symbols import CircleEntry

        return CircleMeasure(
            tuple(CircleEntry(e.radius, e.mass * (1.0 - e.radius) ** exponent, e.q, e.i, e.q_prime) for e in mu.entries),
            mu.theta_convention,
        )
    if isinstance(mu, BoundedRadial):
        return BoundedRadial(lambda r: mu.a(r) * (1.0 - r) ** exponent, mu.breaks, mu.label)
    raise SymbolError("scaled_measure: unsupported measure kind")


@dataclass(frozen=True)
class MeasureDerivativeForm(Symbol):
    """F(f, g) = int f^{(l)} conj(g^{(j)}) dmu for a measure symbol mu."""

    measure: Symbol
    l: int
    j: int
    n_theta: int = 256
    kind = "measure_derivative"

    def _nodes(self, degree: int) -> tuple[np.ndarray, np.ndarray]:
        mu = self.measure
        if isinstance(mu, DiscreteMeasure):
            return mu.points, mu.masses
        if isinstance(mu, CircleMeasure):
            nt = max(self.n_theta, degree + 2)
            theta = 2.0 * np.pi * np.arange(nt) / nt
            z = np.concatenate([e.radius * np.exp(1j * theta) for e in mu.entries])
            w = np.concatenate([np.full(nt, e.mass / nt) for e in mu.entries])
            return z, w
        if isinstance(mu, BoundedRadial):
            rule = QuadratureRule(max(64, degree // 2 + 40), max(256, degree + 2), mu.breaks)
            z, w = rule.nodes
            return z, w * mu.values(np.abs(z))
        raise SymbolError("measure_derivative: unsupported measure kind")

    def form(self, f, g):
        z, w = self._nodes(f.degree + g.degree)
        return complex(np.sum(w * f.derivative(self.l)(z) * np.conj(g.derivative(self.j)(z))))

    def matrix(self, n):
        z, w = self._nodes(2 * n)
        F = basis_values(n, z, self.l)
        G = basis_values(n, z, self.j)
        return (np.conj(G) * w[None, :]) @ F.T


@dataclass(frozen=True)
class FormBoundReport:
    empirical_C: float
    denominator: float
    varpi: float
    trials: int
    seed: int
    l: int
    j: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def random_unit_poly(rng: np.random.Generator, max_degree: int) -> AnalyticPoly:
    """Unit-norm polynomial of random degree <= max_degree with Gaussian coordinates."""
    d = int(rng.integers(0, max_degree + 1))
    a = rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1)
    return AnalyticPoly.from_basis_coords(a / np.linalg.norm(a))


def form_bound_check(
    mu: Symbol,
    l: int,
    j: int,
    params: KClassParams | None = None,
    trials: int = 500,
    seed: int = 0,
    degree: int = 30,
    ascent_steps: int = 2,
) -> FormBoundReport:
    """Largest |F_{mu,l,j}(f,g)| / (M_{l,k}^(1/2) M_{j,k}^(1/2) varpi_k(mu)) over unit pairs.

    Each trial starts from a random pair and takes `ascent_steps` alternating
    steps f <- A* g, g <- A f (renormalized), which keeps the pair inside the
    unit sphere of polynomials of degree <= `degree` while pushing the ratio
    towards its supremum. With ascent_steps=0 this is plain random sampling.
    """
    k = (l + j) / 2.0
    params = KClassParams(k, params.p if params else DEFAULT_P)
    w = varpi(mu, params).varpi
    denom = math.sqrt(coeff_M(l, k, params.p) * coeff_M(j, k, params.p)) * w
    n = degree + 1
    A = MeasureDerivativeForm(mu, l, j).matrix(n)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        f = random_unit_poly(rng, degree).basis_coords(n)
        g = random_unit_poly(rng, degree).basis_coords(n)
        for _ in range(ascent_steps):
            h = A @ f
            if np.linalg.norm(h) == 0.0:
                break
            g = h / np.linalg.norm(h)
            h = A.conj().T @ g
            f = h / np.linalg.norm(h)
        val = abs(np.vdot(g, A @ f))
        if denom == 0.0:
            if val > 0.0:
                raise ArithmeticError("varpi vanishes but the form does not")
            continue
        worst = max(worst, val / denom)
    if not math.isfinite(worst):
        raise ArithmeticError("empirical constant is not finite")
    return FormBoundReport(worst, denom, w, trials, seed, l, j)


def central_derivative_bound(f: AnalyticPoly, j: int) -> tuple[float, float]:
    """(|f^{(j)}(0)|^2, j!^2 (j+1) ||f||^2); the first never exceeds the second."""
    lhs = abs(f.derivative(j)(0.0)) ** 2
    rhs = math.factorial(j) ** 2 * (j + 1) * f.norm() ** 2
    return float(lhs), float(rhs)


@dataclass(frozen=True)
class MeasureCollection:
    """Entries (l, j, mu): the form int f^{(l)} conj(g^{(j)}) dmu, of class k = (l+j)/2."""

    entries: tuple[tuple[int, int, Symbol], ...]

    def __post_init__(self):
        ents = tuple((int(l), int(j), mu) for l, j, mu in self.entries)
        for l, j, mu in ents:
            if l < 0 or j < 0:
                raise SymbolError("collection: orders must be nonnegative")
            if not isinstance(mu, (DiscreteMeasure, CircleMeasure, BoundedRadial)):
                raise SymbolError("collection: entries must be measures")
        object.__setattr__(self, "entries", ents)

    @property
    def origin_supported(self) -> bool:
        return all(isinstance(mu, DiscreteMeasure) and np.all(mu.points == 0) for _, _, mu in self.entries)

    def to_symbol(self) -> Symbol:
        """The summed form; discrete entries become derivative-delta terms."""
        if all(isinstance(mu, DiscreteMeasure) for _, _, mu in self.entries):
            return DerivativeDeltaCollection(
                tuple((z, m, l, j) for l, j, mu in self.entries for z, m in mu.atoms)
            )
        return _SumForm(tuple(MeasureDerivativeForm(mu, l, j) for l, j, mu in self.entries))


@dataclass(frozen=True)
class _SumForm(Symbol):
    parts: tuple[Symbol, ...]
    kind = "sum"

    def form(self, f, g):
        return complex(sum(s.form(f, g) for s in self.parts))

    def matrix(self, n):
        return sum(s.matrix(n) for s in self.parts)


@dataclass(frozen=True)
class NormAFReport:
    verdict: str
    orders: list[int]
    terms: list[float]
    partial_sums: list[float]
    test: str
    ratio_threshold: float = CONVERGENCE_RATIO
    window: int = DEFAULT_WINDOW

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def entry_term(l: int, j: int, mu: Symbol, params: KClassParams, origin: bool) -> float:
    if origin:
        return float(np.sum(np.abs(mu.masses)) * math.factorial(l) * math.factorial(j) * math.sqrt((l + 1) * (j + 1)))
    k = (l + j) / 2.0
    pk = KClassParams(k, params.p)
    return math.sqrt(coeff_M(l, k, params.p) * coeff_M(j, k, params.p)) * varpi(mu, pk).varpi


def check_norm_af_type(
    c: MeasureCollection, params: KClassParams | None = None, window: int = DEFAULT_WINDOW
) -> NormAFReport:
    """Ratio test on the norm-almost-finite-type series, grouped by total order l + j.

    Origin-supported collections use the sharper terms |m| l! j! sqrt((l+1)(j+1)).
    CONVERGENT when the last `window` group ratios are all <= 0.95, DIVERGENT when
    the group terms do not decrease over the window, INCONCLUSIVE otherwise.
    """
    if not c.entries:
        raise ValueError("empty collection")
    params = params or KClassParams()
    origin = c.origin_supported
    groups: dict[int, float] = {}
    for l, j, mu in c.entries:
        groups[l + j] = groups.get(l + j, 0.0) + entry_term(l, j, mu, params, origin)
    orders = sorted(groups)
    terms = [groups[s] for s in orders]
    partial = np.cumsum(terms).tolist()
    test = "origin" if origin else "k-norm"
    if len(terms) == 1:
        verdict = "CONVERGENT"
    else:
        t = np.asarray(terms[-(window + 1) :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = t[1:] / t[:-1]
        if np.all(t[1:] == 0) or np.all(ratios <= CONVERGENCE_RATIO):
            verdict = "CONVERGENT"
        elif np.all(np.diff(t) >= 0):
            verdict = "DIVERGENT"
        else:
            verdict = "INCONCLUSIVE"
    return NormAFReport(verdict, orders, terms, partial, test, CONVERGENCE_RATIO, window)


def origin_hyperfunction(order: int, base: float = 4.0) -> MeasureCollection:
    """Masses m_{l,j} = base^-(l+j) / (l! j!) at the origin for l + j <= order."""
    entries = []
    for s in range(order + 1):
        for l in range(s + 1):
            j = s - l
            m = base ** (-s) / (math.factorial(l) * math.factorial(j))
            entries.append((l, j, DiscreteMeasure(((0.0, m),))))
    return MeasureCollection(tuple(entries))


def escaping_atoms(order: int) -> MeasureCollection:
    """Masses 1/(l! j!) at 1 - 2^-(l+j), whose k-norms outgrow the factorials."""
    entries = []
    for s in range(order + 1):
        for l in range(s + 1):
            j = s - l
            z = 1.0 - 2.0 ** (-s)
            entries.append((l, j, DiscreteMeasure(((z, 1.0 / (math.factorial(l) * math.factorial(j))),))))
    return MeasureCollection(tuple(entries))


@dataclass(frozen=True)
class DecayClass:
    kind: str
    rate: float
    slope: float
    excluded: bool
    message: str


def decay_classify(s: Sequence[float], eps_slope: float = 0.01, curvature_tol: float = 0.05) -> DecayClass:
    """Classify the decay of a positive sequence from |log s_n| against n.

    A least-squares slope is fitted on the tail half; the tail is also split in two
    to compare slopes (growing slope means superexponential decay).
    """
    s = np.asarray(s, dtype=float)
    if s.size < 8:
        raise ValueError("need at least 8 values")
    if np.any(~np.isfinite(s)) or np.any(s <= 0):
        raise ValueError("sequence must be strictly positive and finite")
    n = np.arange(s.size, dtype=float)
    L = np.abs(np.log(s))
    half = s.size // 2
    slope = float(np.polyfit(n[half:], L[half:], 1)[0])
    q = half + (s.size - half) // 2
    s1 = float(np.polyfit(n[half:q], L[half:q], 1)[0]) if q - half >= 2 else slope
    s2 = float(np.polyfit(n[q:], L[q:], 1)[0]) if s.size - q >= 2 else slope
    if slope < eps_slope and s2 <= s1 * (1 + curvature_tol) + 1e-12:
        return DecayClass(
            "SUBEXPONENTIAL",
            0.0,
            slope,
            True,
            "excluded: not a Toeplitz operator with symbol in E'(D)",
        )
    if s2 > s1 * (1 + curvature_tol):
        return DecayClass("SUPEREXPONENTIAL", float("inf"), slope, False, "log-decay rate grows")
    return DecayClass("EXPONENTIAL", slope, slope, False, f"rate {slope:.6g}")
