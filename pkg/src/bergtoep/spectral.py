"""Spectral data of radial, vertical and angular operators, and oscillation diagnostics.

Radial operators on the disk are diagonal in e_k with eigenvalues
gamma(n) = (n+1) int_0^1 a(sqrt r) r^n dr. Vertical and angular operators on
the upper half-plane are represented only through their spectral functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .core import composite_gauss_legendre
from .symbols import BoundedRadial

# e^{-40} is below double rounding relative to 1
EXP_CUTOFF = 40.0

KINDS = ("radial", "vertical", "angular")


def _samples(a: Callable, x: np.ndarray) -> np.ndarray:
    v = np.broadcast_to(np.asarray(a(x), dtype=float), x.shape)
    if not np.all(np.isfinite(v)):
        raise FloatingPointError("symbol is not finite at a quadrature node")
    return v


def radial_gamma(a: Callable, n: int, breaks: Iterable[float] = (), nodes: int | None = None) -> float:
    """(n+1) int_0^1 a(sqrt t) t^n dt by composite Gauss-Legendre.

    `breaks` are radii where `a` jumps; the rule is split at their squares.
    """
    if n < 0:
        raise ValueError("index must be nonnegative")
    nodes = nodes or max(64, n // 2 + 40)
    t, w = composite_gauss_legendre(nodes, 0.0, 1.0, [b * b for b in breaks])
    return float((n + 1) * np.sum(w * _samples(a, np.sqrt(t)) * t**n))


def radial_gamma_sequence(a: Callable, count: int, breaks: Iterable[float] = ()) -> np.ndarray:
    nodes = max(64, count // 2 + 40)
    t, w = composite_gauss_legendre(nodes, 0.0, 1.0, [b * b for b in breaks])
    wa = w * _samples(a, np.sqrt(t))
    k = np.arange(count)
    return (k + 1) * (t[None, :] ** k[:, None] @ wa)


def approx_family_symbol(n: int) -> BoundedRadial:
    """a_n(r) = (n+3) (1 - r^2)^(n+2); T_{a_n} tends to P_0 in norm."""
    return BoundedRadial(lambda r: (n + 3) * (1.0 - r * r) ** (n + 2), label=f"a_{n}")


def approx_family_gamma(n: int, k) -> np.ndarray | float:
    """(n+3)! (k+1)! / (n+k+3)!, the eigenvalues of T_{a_n}."""
    k = np.asarray(k, dtype=float)
    out = np.exp(gammaln(n + 4.0) + gammaln(k + 2.0) - gammaln(n + k + 4.0))
    return out if out.ndim else float(out)


def vertical_gamma(a: Callable, x: float, breaks: Iterable[float] = (), nodes: int = 64) -> float:
    """2x int_0^inf a(t) e^{-2tx} dt, computed as int_0^40 a(u/2x) e^{-u} du."""
    if not x > 0:
        raise ValueError("vertical spectral functions live on x > 0")
    cuts = [2.0 * x * b for b in breaks]
    u, w = composite_gauss_legendre(nodes, 0.0, EXP_CUTOFF, cuts)
    return float(np.sum(w * _samples(a, u / (2.0 * x)) * np.exp(-u)))


def angular_gamma(a: Callable, x: float, breaks: Iterable[float] = (), nodes: int = 64) -> float:
    """(2x / (1 - e^{-2 pi x})) int_0^pi a(theta) e^{-2 x theta} d theta.

    Negative x is mapped to positive x with theta -> pi - theta; x = 0 gives the
    mean of a over [0, pi].
    """
    breaks = list(breaks)
    if x == 0:
        th, w = composite_gauss_legendre(nodes, 0.0, math.pi, breaks)
        return float(np.sum(w * _samples(a, th)) / math.pi)
    if x < 0:
        return angular_gamma(lambda th: a(math.pi - th), -x, [math.pi - b for b in breaks], nodes)
    # u = 2 x theta
    top = min(2.0 * math.pi * x, EXP_CUTOFF)
    u, w = composite_gauss_legendre(nodes, 0.0, top, [2.0 * x * b for b in breaks])
    integral = np.sum(w * _samples(a, u / (2.0 * x)) * np.exp(-u))
    return float(integral / -math.expm1(-2.0 * math.pi * x))


@dataclass(frozen=True)
class SpectralData:
    kind: str
    values: np.ndarray
    grid: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        v = np.asarray(self.values, dtype=complex)
        if v.size == 0:
            raise ValueError("empty spectral data")
        object.__setattr__(self, "values", v)
        if self.kind == "radial":
            object.__setattr__(self, "grid", np.arange(v.size, dtype=float))
        else:
            g = np.asarray(self.grid, dtype=float)
            if g.shape != v.shape:
                raise ValueError("grid and values must have the same length")
            if self.kind == "vertical" and np.any(g <= 0):
                raise ValueError("vertical grid must be positive")
            object.__setattr__(self, "grid", g)

    def coordinates(self) -> np.ndarray:
        """Positions in the metric the oscillation is measured in."""
        if self.kind == "radial":
            return np.log(self.grid + 1.0)
        if self.kind == "vertical":
            return np.log(self.grid)
        return np.arcsinh(self.grid)


@dataclass(frozen=True)
class OscillationProfile:
    deltas: np.ndarray
    omegas: np.ndarray
    # smallest positive metric gap in the data; deltas below it see no pairs
    resolution: float = field(default=0.0)

    def as_rows(self) -> list[tuple[float, float]]:
        return list(zip(self.deltas.tolist(), self.omegas.tolist()))


def oscillation_profile(data: SpectralData, deltas: Sequence[float]) -> OscillationProfile:
    """omega(delta) = max |gamma(n) - gamma(m)| over pairs at metric distance <= delta.

    The metric is |ln((n+1)/(m+1))| (radial), |ln x - ln y| (vertical) or
    |arcsinh x - arcsinh y| (angular).
    """
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size == 0 or np.any(deltas <= 0):
        raise ValueError("deltas must be a nonempty list of positive numbers")
    c = data.coordinates()
    order = np.argsort(c, kind="stable")
    c = c[order]
    v = data.values[order]
    n = c.size
    dmax = float(deltas.max())
    # omega for every delta via the sorted pair list restricted to the largest window
    dist, diff = [], []
    for i in range(n - 1):
        hi = np.searchsorted(c, c[i] + dmax * (1 + 1e-15), side="right")
        if hi > i + 1:
            dist.append(c[i + 1 : hi] - c[i])
            diff.append(np.abs(v[i + 1 : hi] - v[i]))
    if dist:
        dist = np.concatenate(dist)
        diff = np.concatenate(diff)
        srt = np.argsort(dist, kind="stable")
        dist, cummax = dist[srt], np.maximum.accumulate(diff[srt])
        idx = np.searchsorted(dist, deltas, side="right")
        omegas = np.where(idx > 0, cummax[np.maximum(idx - 1, 0)], 0.0)
    else:
        omegas = np.zeros_like(deltas)
    gaps = np.diff(c)
    res = float(gaps[gaps > 0].min()) if np.any(gaps > 0) else 0.0
    return OscillationProfile(deltas, omegas, res)


def so_verdict(profile: OscillationProfile, threshold: float = 1e-2) -> str:
    """Slow-oscillation verdict at the resolution of the data.

    SO-consistent when omega at the smallest delta that sees any pair is below
    `threshold` and omega decreases towards it; otherwise not SO.
    """
    seen = profile.deltas >= profile.resolution
    if not np.any(seen):
        return "INCONCLUSIVE"
    om = profile.omegas[seen]
    return "SO-CONSISTENT" if om[np.argmin(profile.deltas[seen])] < threshold else "NOT-SO"


def reflection_distance(gamma: Sequence[complex]) -> float:
    """sup_n |(-1)^n - gamma(n)|, the distance of diag(gamma) from the reflection J."""
    g = np.asarray(gamma, dtype=complex)
    return float(np.max(np.abs((-1.0) ** np.arange(g.size) - g)))


def max_consecutive_gap(gamma: Sequence[complex]) -> float:
    g = np.asarray(gamma, dtype=complex)
    return float(np.max(np.abs(np.diff(g)))) if g.size > 1 else 0.0
