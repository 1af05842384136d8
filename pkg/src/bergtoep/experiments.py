"""Named experiments emitted as tables by the command line."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import carleson, spectral
from .core import AnalyticPoly, QuadratureRule
from .operators import TruncatedOperator, compress, evaluate_image, op_norm, singular_values
from .symbols import BoundedRadial, SpectralSequence, assemble, reflection


@dataclass(frozen=True)
class RunConfig:
    dim: int = 64
    n_r: int = 64
    n_theta: int = 256
    p: float = 1.0 / 9.0
    tol: float = 1e-12
    seed: int = 0
    format: str = "csv"
    out: str | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.n_r < 1 or self.n_theta < 1:
            raise ValueError("quadrature sizes must be positive")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")

    @property
    def rule(self) -> QuadratureRule:
        return QuadratureRule(self.n_r, self.n_theta)


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list[Any]]
    summary: dict[str, Any] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        for k, v in self.summary.items():
            buf.write(f"# {k}={fmt(v)}\n")
        return buf.getvalue()

    def to_json(self) -> str:
        def clean(v):
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            if isinstance(v, float) and not math.isfinite(v):
                return str(v)
            return v

        doc = {
            "experiment": self.name,
            "columns": self.columns,
            "rows": [[clean(v) for v in row] for row in self.rows],
            "summary": {k: clean(v) for k, v in self.summary.items()},
        }
        return json.dumps(doc, indent=2) + "\n"


def fmt(v: Any) -> str:
    """Full-precision text: 17 significant digits for floats."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.16e}"
    return str(v)


def _float(params: dict, key: str, default: float) -> float:
    return float(params.get(key, default))


def _int(params: dict, key: str, default: int) -> int:
    return int(params.get(key, default))


def p0_approx(cfg: RunConfig, params: dict) -> Table:
    """||T_{a_n} - P_0|| from closed-form and quadrature eigenvalues against 2/(n+4)."""
    n_max = _int(params, "n_max", 10)
    N = cfg.dim
    src = "norm approximation of P0 by radial symbols a_n"
    p0 = np.zeros(N)
    p0[0] = 1.0
    rows = []
    for n in range(1, n_max + 1):
        closed = spectral.approx_family_gamma(n, np.arange(N))
        quad = spectral.radial_gamma_sequence(spectral.approx_family_symbol(n).a, N)
        a = op_norm(TruncatedOperator.diagonal(closed - p0), cfg.tol)
        b = op_norm(TruncatedOperator.diagonal(quad - p0), cfg.tol)
        ref = 2.0 / (n + 4)
        rows.append([n, ref, a, b, abs(a - ref), abs(b - ref), src])
    cols = ["n", "closed_form_norm", "norm_closed_gamma", "norm_quadrature_gamma", "abs_error_closed", "abs_error_quadrature", "provenance"]
    return Table("p0-approx", cols, rows, {"dim": N})


def gamma_radial(cfg: RunConfig, params: dict) -> Table:
    """Eigenvalues of a radial operator: the a_n family or the indicator of a disk."""
    count = _int(params, "count", 20)
    family = params.get("family", "approx")
    src = "eigenvalue sequence of a radial Toeplitz operator"
    k = np.arange(count)
    if family == "approx":
        n = _int(params, "n", 5)
        sym = spectral.approx_family_symbol(n)
        got = spectral.radial_gamma_sequence(sym.a, count)
        ref = spectral.approx_family_gamma(n, k)
    elif family == "indicator":
        r1 = _float(params, "radius", 0.5)
        got = spectral.radial_gamma_sequence(lambda r: (r < r1).astype(float), count, breaks=(r1,))
        ref = r1 ** (2.0 * (k + 1))
    else:
        raise ValueError("family must be 'approx' or 'indicator'")
    rows = [[int(i), float(got[i]), float(ref[i]), float(abs(got[i] - ref[i])), src] for i in k]
    return Table("gamma-radial", ["n", "gamma", "closed_form", "abs_error", "provenance"], rows, {"family": family})


def _xgrid(params: dict, lo: float, hi: float, count: int = 21) -> np.ndarray:
    return np.linspace(_float(params, "x_min", lo), _float(params, "x_max", hi), _int(params, "count", count))


def gamma_vertical(cfg: RunConfig, params: dict) -> Table:
    h = _float(params, "h", 1.0)
    src = "spectral function of a vertical Toeplitz operator"
    rows = []
    for x in _xgrid(params, 0.05, 5.0):
        g = spectral.vertical_gamma(lambda t: (t <= h).astype(float), x, breaks=(h,))
        ref = -math.expm1(-2.0 * h * x)
        rows.append([float(x), g, ref, abs(g - ref), src])
    return Table("gamma-vertical", ["x", "gamma", "closed_form", "abs_error", "provenance"], rows, {"h": h})


def gamma_angular(cfg: RunConfig, params: dict) -> Table:
    src = "spectral function of an angular Toeplitz operator"
    half = math.pi / 2
    rows = []
    for x in _xgrid(params, -5.0, 5.0):
        g = spectral.angular_gamma(lambda th: (th <= half).astype(float), x, breaks=(half,))
        ref = 1.0 / (1.0 + math.exp(-math.pi * x))
        rows.append([float(x), g, ref, abs(g - ref), src])
    return Table("gamma-angular", ["x", "gamma", "closed_form", "abs_error", "provenance"], rows)


def kcarleson(cfg: RunConfig, params: dict) -> Table:
    zeta = complex(_float(params, "zeta_re", 0.0), _float(params, "zeta_im", 0.0))
    mass = _float(params, "mass", 1.0)
    k_max = _float(params, "k_max", 3.0)
    src = "k-norm of a point mass"
    mu = carleson.DiscreteMeasure(((zeta, mass),))
    rows = []
    for k in np.arange(0.0, k_max + 0.25, 0.5):
        prm = carleson.KClassParams(float(k), cfg.p)
        rep = carleson.varpi(mu, prm)
        ref = carleson.point_mass_varpi(mass, zeta, prm)
        rows.append([float(k), rep.varpi, ref, abs(rep.varpi - ref), rep.argsup.real, rep.argsup.imag, rep.vanishing, src])
    cols = ["k", "varpi", "closed_form", "abs_error", "argsup_re", "argsup_im", "vanishing", "provenance"]
    return Table("kcarleson", cols, rows, {"p": cfg.p})


def afn_type(cfg: RunConfig, params: dict) -> Table:
    family = params.get("family", "hyperfunction")
    order = _int(params, "order", 20)
    window = _int(params, "window", carleson.DEFAULT_WINDOW)
    if family == "hyperfunction":
        c = carleson.origin_hyperfunction(order, _float(params, "base", 4.0))
    elif family == "escaping":
        c = carleson.escaping_atoms(order)
    else:
        raise ValueError("family must be 'hyperfunction' or 'escaping'")
    rep = carleson.check_norm_af_type(c, carleson.KClassParams(0.0, cfg.p), window)
    src = "norm almost finite type series"
    rows = [[s, t, ps, src] for s, t, ps in zip(rep.orders, rep.terms, rep.partial_sums)]
    summary = {"verdict": rep.verdict, "test": rep.test, "ratio_threshold": rep.ratio_threshold, "window": rep.window}
    return Table("afn-type", ["order", "term", "partial_sum", "provenance"], rows, summary)


def decay(cfg: RunConfig, params: dict) -> Table:
    r1 = _float(params, "radius", 0.7)
    count = _int(params, "count", min(cfg.dim, 40))
    src = "singular-number decay for compactly supported symbols"
    sym = BoundedRadial(lambda r: (r < r1).astype(float), breaks=(r1,), label=f"indicator {r1:g}")
    sv = singular_values(assemble(sym, cfg.dim), count)
    ref = r1 ** (2.0 * (np.arange(count) + 1))
    rows = [[n, float(sv[n]), float(ref[n]), float(abs(sv[n] - ref[n])), src] for n in range(count)]
    cls = carleson.decay_classify(sv)
    summary = {"class": cls.kind, "rate": cls.rate, "expected_rate": 2.0 * math.log(1.0 / r1), "excluded": cls.excluded}
    return Table("decay", ["n", "singular_value", "closed_form", "abs_error", "provenance"], rows, summary)


def weak_compress(cfg: RunConfig, params: dict) -> Table:
    """Pointwise convergence of (Pi_m T Pi_m f)(z) for the reflection and the origin hyperfunction."""
    z = complex(_float(params, "z_re", 0.4), _float(params, "z_im", 0.0))
    N = cfg.dim
    f = AnalyticPoly([1.0, 0.5, -0.25, 0.125])
    src = "basis compressions converge pointwise"
    hyper = assemble(carleson.origin_hyperfunction(2 * N, 4.0).to_symbol(), N)
    ops = {
        "reflection": (assemble(reflection(N), N), f(-z)),
        # the hyperfunction with m_{l,j} = 4^-(l+j)/(l! j!) acts as f -> f(1/4) k_{1/4}
        "hyperfunction": (hyper, f(0.25) * (1.0 - z / 4.0) ** -2),
    }
    rows = []
    for name, (T, ref) in ops.items():
        for m in range(1, N + 1, max(1, N // 16)):
            v = evaluate_image(compress(T, m), f, z)
            rows.append([name, m, v.real, v.imag, abs(v - ref), src])
    return Table("weak-compress", ["operator", "m", "value_re", "value_im", "abs_error", "provenance"], rows, {"z_re": z.real, "z_im": z.imag})


EXPERIMENTS: dict[str, Callable[[RunConfig, dict], Table]] = {
    "p0-approx": p0_approx,
    "gamma-radial": gamma_radial,
    "gamma-vertical": gamma_vertical,
    "gamma-angular": gamma_angular,
    "kcarleson": kcarleson,
    "afn-type": afn_type,
    "decay": decay,
    "weak-compress": weak_compress,
}


def run_experiment(name: str, cfg: RunConfig, params: dict | None = None) -> Table:
    if name not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {name!r}; available: {', '.join(EXPERIMENTS)}")
    return EXPERIMENTS[name](cfg, params or {})
