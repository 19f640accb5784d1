"""JSON wire formats: quasi-orders, complex matrices, transitive maps, embedding specs.

All indices are 1-based.  Complex scalars travel as [re, im] pairs; matrices as
row-major nested lists of those pairs.
"""

from __future__ import annotations

import json

import numpy as np

from .quasiorder import QuasiOrder, close_pairs
from .cocycle import TransitiveMap
from .jordan import CentralIdempotent, JordanSpec

__all__ = [
    "quasiorder_to_dict",
    "quasiorder_from_dict",
    "load_quasiorder",
    "save_quasiorder",
    "matrix_to_dict",
    "matrix_from_dict",
    "load_matrix",
    "save_matrix",
    "transitive_map_to_dict",
    "transitive_map_from_dict",
    "jordan_spec_to_dict",
    "jordan_spec_from_dict",
    "load_jordan_spec",
    "dump_json",
]


def dump_json(obj, pretty: bool = False) -> str:
    if pretty:
        return json.dumps(obj, sort_keys=True, indent=2)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def quasiorder_to_dict(rho: QuasiOrder) -> dict:
    return {"n": rho.n, "pairs": [list(p) for p in sorted(rho.pairs)]}


def quasiorder_from_dict(d: dict):
    """Build the quasi-order, closing the listed pairs; returns (rho, added)
    where `added` lists the pairs the closure had to add."""
    n = int(d["n"])
    raw = {(int(i), int(j)) for i, j in d["pairs"]}
    closed = close_pairs(n, raw)
    added = sorted(closed - raw)
    return QuasiOrder(n, closed), added


def load_quasiorder(path):
    with open(path) as fh:
        return quasiorder_from_dict(json.load(fh))


def save_quasiorder(rho: QuasiOrder, path) -> None:
    with open(path, "w") as fh:
        fh.write(dump_json(quasiorder_to_dict(rho), pretty=True))


def _c(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def matrix_to_dict(A) -> dict:
    A = np.asarray(A, dtype=complex)
    return {"n": A.shape[0], "entries": [[_c(z) for z in row] for row in A]}


def matrix_from_dict(d: dict) -> np.ndarray:
    n = int(d["n"])
    A = np.array([[complex(re, im) for re, im in row] for row in d["entries"]])
    if A.shape != (n, n):
        raise ValueError(f"entry grid is {A.shape}, expected ({n},{n})")
    return A


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return matrix_from_dict(json.load(fh))


def save_matrix(A, path) -> None:
    with open(path, "w") as fh:
        fh.write(dump_json(matrix_to_dict(A), pretty=True))


def transitive_map_to_dict(g: TransitiveMap) -> dict:
    return {
        "pairs": [[i, j, _c(v)] for (i, j), v in sorted(g.values.items()) if i != j]
    }


def transitive_map_from_dict(d: dict, rho: QuasiOrder) -> TransitiveMap:
    values = {}
    for i, j, (re, im) in d["pairs"]:
        values[(int(i), int(j))] = complex(re, im)
    return TransitiveMap(rho, values)


def jordan_spec_to_dict(spec: JordanSpec) -> dict:
    return {
        "quasiorder": quasiorder_to_dict(spec.rho),
        "s_matrix": matrix_to_dict(spec.S),
        "transitive_map": transitive_map_to_dict(spec.g),
        "idempotent_diag": list(spec.P.diag_bits),
    }


def jordan_spec_from_dict(d: dict) -> JordanSpec:
    rho, added = quasiorder_from_dict(d["quasiorder"])
    if added:
        raise ValueError(f"spec quasi-order is not closed; missing pairs {added}")
    S = matrix_from_dict(d["s_matrix"])
    g = transitive_map_from_dict(d["transitive_map"], rho)
    P = CentralIdempotent(tuple(int(b) for b in d["idempotent_diag"]))
    return JordanSpec(rho, S, g, P)


def load_jordan_spec(path) -> JordanSpec:
    with open(path) as fh:
        return jordan_spec_from_dict(json.load(fh))
