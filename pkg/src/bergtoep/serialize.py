"""JSON formats for symbols, measure collections and truncated operators.

Complex numbers are written as [re, im]; plain real numbers are accepted on input.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .carleson import MeasureCollection
from .core import AnalyticPoly
from .operators import TruncatedOperator
from .spectral import approx_family_symbol
from .symbols import (
    BoundedRadial,
    CircleEntry,
    CircleMeasure,
    DerivativeDeltaCollection,
    DiscreteMeasure,
    FiniteRankForm,
    SpectralSequence,
    Symbol,
    SymbolError,
)

SYMBOL_TYPES = ("bounded_radial", "discrete", "circle", "deriv_delta", "spectral", "finite_rank")
MEASURE_TYPES = ("discrete", "circle", "bounded_radial")
RADIAL_PROFILES = ("constant", "indicator", "piecewise", "polynomial", "approx_family")


class SchemaError(ValueError):
    """Malformed document; `path` locates the offending value."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None


def load_file(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def _num(x: Any, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(path, f"expected a number, got {json.dumps(x)}")
    return float(x)


def _int(x: Any, path: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < 0:
        raise SchemaError(path, f"expected a nonnegative integer, got {json.dumps(x)}")
    return x


def parse_complex(x: Any, path: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, list) and len(x) == 2:
        return complex(_num(x[0], f"{path}[0]"), _num(x[1], f"{path}[1]"))
    raise SchemaError(path, f"expected a complex number [re, im], got {json.dumps(x)}")


def dump_complex(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _field(d: dict, key: str, path: str) -> Any:
    if not isinstance(d, dict):
        raise SchemaError(path, "expected an object")
    if key not in d:
        raise SchemaError(path, f"missing field {key!r}")
    return d[key]


def _list(x: Any, path: str) -> list:
    if not isinstance(x, list):
        raise SchemaError(path, "expected a list")
    return x


def _radial_profile(d: dict, path: str) -> BoundedRadial:
    kind = d.get("profile", "constant")
    if kind == "constant":
        v = _num(d.get("value", 1.0), f"{path}.value")
        return BoundedRadial(lambda r: np.full_like(r, v), label=f"constant {v:g}")
    if kind == "indicator":
        r1 = _num(_field(d, "radius", path), f"{path}.radius")
        if not 0.0 < r1 < 1.0:
            raise SchemaError(f"{path}.radius", "indicator radius must lie in (0, 1)")
        return BoundedRadial(lambda r: (r < r1).astype(float), breaks=(r1,), label=f"indicator {r1:g}")
    if kind == "piecewise":
        breaks = [_num(b, f"{path}.breaks[{i}]") for i, b in enumerate(_list(_field(d, "breaks", path), f"{path}.breaks"))]
        values = [_num(v, f"{path}.values[{i}]") for i, v in enumerate(_list(_field(d, "values", path), f"{path}.values"))]
        if len(values) != len(breaks) + 1 or breaks != sorted(breaks):
            raise SchemaError(path, "piecewise profile needs sorted breaks and len(values) = len(breaks) + 1")
        b, v = np.asarray(breaks), np.asarray(values)
        return BoundedRadial(lambda r: v[np.searchsorted(b, r, side="right")], breaks=tuple(breaks), label="piecewise")
    if kind == "polynomial":
        c = [_num(v, f"{path}.coeffs[{i}]") for i, v in enumerate(_list(_field(d, "coeffs", path), f"{path}.coeffs"))]
        return BoundedRadial(lambda r: np.polynomial.polynomial.polyval(r, c), label="polynomial")
    if kind == "approx_family":
        return approx_family_symbol(_int(_field(d, "n", path), f"{path}.n"))
    raise SchemaError(f"{path}.profile", f"unknown profile {kind!r}; expected one of {RADIAL_PROFILES}")


def _poly(x: Any, path: str, basis: str) -> AnalyticPoly:
    c = [parse_complex(v, f"{path}[{i}]") for i, v in enumerate(_list(x, path))]
    return AnalyticPoly.from_basis_coords(c) if basis == "orthonormal" else AnalyticPoly(c)


def parse_symbol(d: Any, path: str = "$") -> Symbol:
    """Build a symbol from its JSON object; raises SchemaError or SymbolError."""
    kind = _field(d, "type", path)
    try:
        if kind == "bounded_radial":
            return _radial_profile(d, path)
        if kind == "discrete":
            atoms = []
            for i, a in enumerate(_list(_field(d, "atoms", path), f"{path}.atoms")):
                p = f"{path}.atoms[{i}]"
                atoms.append((parse_complex(_field(a, "point", p), f"{p}.point"), parse_complex(_field(a, "mass", p), f"{p}.mass")))
            return DiscreteMeasure(tuple(atoms))
        if kind == "circle":
            entries = []
            for i, e in enumerate(_list(_field(d, "entries", path), f"{path}.entries")):
                p = f"{path}.entries[{i}]"
                entries.append(
                    CircleEntry(
                        _num(_field(e, "radius", p), f"{p}.radius"),
                        parse_complex(_field(e, "mass", p), f"{p}.mass"),
                        _int(e.get("q", 0), f"{p}.q"),
                        _int(e.get("i", 0), f"{p}.i"),
                        _int(e.get("q_prime", 0), f"{p}.q_prime"),
                    )
                )
            return CircleMeasure(tuple(entries), d.get("theta_convention", "definition"))
        if kind == "deriv_delta":
            terms = []
            for i, t in enumerate(_list(_field(d, "terms", path), f"{path}.terms")):
                p = f"{path}.terms[{i}]"
                mass = parse_complex(_field(t, "mass", p), f"{p}.mass")
                terms.append(
                    (
                        parse_complex(t.get("point", 0.0), f"{p}.point"),
                        mass,
                        _int(_field(t, "l", p), f"{p}.l"),
                        _int(_field(t, "j", p), f"{p}.j"),
                    )
                )
            convention = d.get("convention", "form")
            if convention == "distribution":
                return DerivativeDeltaCollection.from_distribution(terms)
            if convention != "form":
                raise SchemaError(f"{path}.convention", "expected 'form' or 'distribution'")
            return DerivativeDeltaCollection(tuple(terms))
        if kind == "spectral":
            g = [parse_complex(v, f"{path}.gamma[{i}]") for i, v in enumerate(_list(_field(d, "gamma", path), f"{path}.gamma"))]
            return SpectralSequence(tuple(g))
        if kind == "finite_rank":
            basis = d.get("basis", "monomial")
            if basis not in ("monomial", "orthonormal"):
                raise SchemaError(f"{path}.basis", "expected 'monomial' or 'orthonormal'")
            fl = [_poly(x, f"{path}.f_list[{i}]", basis) for i, x in enumerate(_list(_field(d, "f_list", path), f"{path}.f_list"))]
            gl = [_poly(x, f"{path}.g_list[{i}]", basis) for i, x in enumerate(_list(_field(d, "g_list", path), f"{path}.g_list"))]
            return FiniteRankForm(tuple(fl), tuple(gl))
    except SymbolError as exc:
        raise SymbolError(f"{path}: {exc}") from None
    raise SchemaError(f"{path}.type", f"unknown symbol type {kind!r}; expected one of {SYMBOL_TYPES}")


def parse_collection(d: Any, path: str = "$") -> MeasureCollection:
    entries = []
    for i, e in enumerate(_list(_field(d, "entries", path), f"{path}.entries")):
        p = f"{path}.entries[{i}]"
        m = _field(e, "measure", p)
        if _field(m, "type", f"{p}.measure") not in MEASURE_TYPES:
            raise SchemaError(f"{p}.measure.type", f"expected one of {MEASURE_TYPES}")
        entries.append((_int(_field(e, "l", p), f"{p}.l"), _int(_field(e, "j", p), f"{p}.j"), parse_symbol(m, f"{p}.measure")))
    if not entries:
        raise SchemaError(f"{path}.entries", "collection is empty")
    return MeasureCollection(tuple(entries))


def symbol_class(s: Symbol) -> str:
    """Human-readable class echo used by `validate`."""
    if isinstance(s, DerivativeDeltaCollection):
        return f"deriv_delta ({len(s.terms)} terms{', origin-supported' if s.origin_supported else ''})"
    if isinstance(s, DiscreteMeasure):
        return f"discrete ({len(s.atoms)} atoms)"
    if isinstance(s, CircleMeasure):
        return f"circle ({len(s.entries)} circles, theta convention {s.theta_convention})"
    if isinstance(s, SpectralSequence):
        return f"spectral (length {len(s.gamma)})"
    if isinstance(s, FiniteRankForm):
        return f"finite_rank (rank <= {len(s.f_list)})"
    if isinstance(s, BoundedRadial):
        return f"bounded_radial ({s.label or 'custom'})"
    return s.kind


def operator_to_json(T: TruncatedOperator) -> dict:
    return {"dim": T.dim, "entries": [dump_complex(z) for z in T.entries.ravel()]}


def operator_from_json(d: Any, path: str = "$") -> TruncatedOperator:
    n = _int(_field(d, "dim", path), f"{path}.dim")
    flat = _list(_field(d, "entries", path), f"{path}.entries")
    if len(flat) != n * n:
        raise SchemaError(f"{path}.entries", f"expected {n * n} entries, got {len(flat)}")
    vals = [parse_complex(v, f"{path}.entries[{i}]") for i, v in enumerate(flat)]
    return TruncatedOperator(np.asarray(vals, dtype=complex).reshape(n, n))
