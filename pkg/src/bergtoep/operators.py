"""Truncated operators: compressions of Bergman-space operators to span{e_0..e_{N-1}}.

Entry (l, j) of the matrix is <T e_j, e_l>, so column j holds the image of e_j.
Norms computed on a truncation are lower bounds for the norm of the full operator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import AnalyticPoly, basis_values, check_in_disk

logger = logging.getLogger(__name__)

POWER_ITERATION_CAP = 10_000


class ConvergenceError(RuntimeError):
    """An iterative method hit its iteration cap."""


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"expected a nonempty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("operator entries must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def diagonal(cls, gamma: Sequence[complex]) -> "TruncatedOperator":
        return cls(np.diag(np.asarray(gamma, dtype=complex)))

    @classmethod
    def zeros(cls, n: int) -> "TruncatedOperator":
        return cls(np.zeros((n, n), dtype=complex))

    @classmethod
    def rank_one(cls, p: int, q: int, n: int) -> "TruncatedOperator":
        """P_{p,q} f = <f, e_p> e_q, i.e. a single 1 at (row q, column p)."""
        a = np.zeros((n, n), dtype=complex)
        a[q, p] = 1.0
        return cls(a)

    def element(self, p: int, q: int) -> complex:
        """<T e_p, e_q>."""
        return complex(self.entries[q, p])

    def apply(self, f: AnalyticPoly) -> AnalyticPoly:
        if f.degree >= self.dim:
            raise ValueError(f"degree {f.degree} does not fit in dimension {self.dim}")
        return AnalyticPoly.from_basis_coords(self.entries @ f.basis_coords(self.dim))

    def __matmul__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        return compose(self, other)

    def __add__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        return add(self, other)

    def __sub__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        return add(self, other, 1.0, -1.0)

    def __repr__(self) -> str:
        return f"TruncatedOperator(dim={self.dim})"


POWER_BLOCK = 4


def _start_block(n: int, b: int) -> np.ndarray:
    rng = np.random.default_rng(20240531)
    v = rng.standard_normal((n, b)) + 1j * rng.standard_normal((n, b))
    return np.linalg.qr(v)[0]


def op_norm(T: TruncatedOperator, tol: float = 1e-12, max_iter: int = POWER_ITERATION_CAP) -> float:
    """Largest singular value by block power iteration on T*T.

    A block of up to four vectors with a Rayleigh-Ritz step keeps convergence fast
    when the top singular values cluster. Stops when the top Ritz value changes by
    at most `tol` relative.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    A = T.entries
    if not np.any(A):
        return 0.0
    AhA = A.conj().T @ A
    V = _start_block(T.dim, min(POWER_BLOCK, T.dim))
    lam_old = np.inf
    for it in range(max_iter):
        W = AhA @ V
        ritz, vecs = np.linalg.eigh(V.conj().T @ W)
        lam = float(ritz[-1])
        V, _ = np.linalg.qr(W @ vecs[:, ::-1])
        if abs(lam - lam_old) <= tol * abs(lam):
            logger.debug("power iteration converged after %d steps", it + 1)
            return float(np.sqrt(max(lam, 0.0)))
        lam_old = lam
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def singular_values(T: TruncatedOperator, count: int | None = None) -> np.ndarray:
    """Top `count` singular values in decreasing order."""
    count = T.dim if count is None else count
    if not 1 <= count <= T.dim:
        raise ValueError("count must be between 1 and dim")
    return np.linalg.svd(T.entries, compute_uv=False)[:count]


def _same_dim(T: TruncatedOperator, S: TruncatedOperator) -> None:
    if T.dim != S.dim:
        raise ValueError(f"dimension mismatch: {T.dim} vs {S.dim}")


def adjoint(T: TruncatedOperator) -> TruncatedOperator:
    return TruncatedOperator(T.entries.conj().T)


def compose(T: TruncatedOperator, S: TruncatedOperator) -> TruncatedOperator:
    """T S (S applied first).

    The product of two compressions only approximates the compression of the product.
    """
    _same_dim(T, S)
    return TruncatedOperator(T.entries @ S.entries)


def add(T: TruncatedOperator, S: TruncatedOperator, alpha: complex = 1.0, beta: complex = 1.0) -> TruncatedOperator:
    _same_dim(T, S)
    return TruncatedOperator(alpha * T.entries + beta * S.entries)


def compress(T: TruncatedOperator, m: int) -> TruncatedOperator:
    """Pi_m T Pi_m, kept in the ambient dimension."""
    if not 1 <= m <= T.dim:
        raise ValueError(f"compression size must be in [1, {T.dim}], got {m}")
    a = np.zeros_like(T.entries)
    a[:m, :m] = T.entries[:m, :m]
    return TruncatedOperator(a)


def evaluate_image(T: TruncatedOperator, f: AnalyticPoly, z: complex) -> complex:
    """(T f)(z), computed by pairing T f with the truncated kernel at z."""
    check_in_disk(z, "z")
    b = T.entries @ f.basis_coords(T.dim)
    return complex(np.sum(b * basis_values(T.dim, complex(z))))


def weak_convergence_check(T: TruncatedOperator, f: AnalyticPoly, z: complex, schedule: Sequence[int]) -> list[complex]:
    """Values (Pi_m T Pi_m f)(z) along the schedule of compression sizes."""
    if f.degree >= T.dim:
        raise ValueError(f"degree {f.degree} does not fit in dimension {T.dim}")
    return [evaluate_image(compress(T, m), f, z) for m in schedule]


def compression_increments(T: TruncatedOperator, sizes: Sequence[int], tol: float = 1e-12) -> list[float]:
    """Operator norms ||Pi_{m'} T Pi_{m'} - Pi_m T Pi_m|| for consecutive sizes m < m'."""
    out = []
    for m, m2 in zip(sizes[:-1], sizes[1:]):
        out.append(op_norm(compress(T, m2) - compress(T, m), tol))
    return out
