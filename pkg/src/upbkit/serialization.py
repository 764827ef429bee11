"""JSON encoding of bases, vectors, matrices and POVMs.

Complex numbers are ``[re, im]`` pairs of doubles, written with Python's
shortest round-trip float repr so that reading back is bit-exact.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from typing import Any, Sequence

import numpy as np

from .constructions import ProductBasis, ProductState, Povm


class SchemaError(ValueError):
    pass


def encode_vector(v) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def decode_vector(data) -> np.ndarray:
    try:
        return np.array([complex(float(re), float(im)) for re, im in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"malformed complex vector: {exc}") from None


def encode_matrix(M) -> dict:
    M = np.asarray(M, dtype=complex)
    return {"rows": M.shape[0], "cols": M.shape[1], "data": encode_vector(M.ravel())}


def decode_matrix(data: dict) -> np.ndarray:
    try:
        rows, cols = int(data["rows"]), int(data["cols"])
        flat = decode_vector(data["data"])
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed matrix: {exc}") from None
    if flat.size != rows * cols:
        raise SchemaError(f"matrix data has {flat.size} entries, expected {rows}x{cols}")
    return flat.reshape(rows, cols)


def encode_basis(basis: ProductBasis, **extra) -> dict:
    out = {
        "dims": list(basis.dims),
        "states": [[encode_vector(v) for v in s.locals] for s in basis.states],
        "label": basis.label,
    }
    out.update(extra)
    return out


def encode_states(states: Sequence[ProductState], label: str, **extra) -> dict:
    if not states:
        raise ValueError("cannot encode an empty state list without dims")
    return encode_basis(ProductBasis(tuple(states), states[0].dims, label), **extra)


def decode_basis(data: dict) -> ProductBasis:
    try:
        dims = tuple(int(d) for d in data["dims"])
        raw_states = data["states"]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"basis needs 'dims' and 'states': {exc}") from None
    states = []
    for j, locals_ in enumerate(raw_states):
        if len(locals_) != len(dims):
            raise SchemaError(f"state {j} has {len(locals_)} factors for {len(dims)} parties")
        try:
            states.append(ProductState(tuple(decode_vector(v) for v in locals_), dims))
        except ValueError as exc:
            raise SchemaError(f"state {j}: {exc}") from None
    try:
        return ProductBasis(tuple(states), dims, str(data.get("label", "")))
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def encode_povm(povm: Povm, label: str = "") -> dict:
    return {
        "label": label,
        "dim": povm.dim,
        "scale": povm.scale,
        "effects": [encode_matrix(E) for E in povm.effects],
    }


def decode_povm(data: dict) -> Povm:
    try:
        return Povm(tuple(decode_matrix(E) for E in data["effects"]), int(data["dim"]), float(data.get("scale", 1.0)))
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed povm: {exc}") from None


def encode_vectors(vectors: Sequence, label: str = "") -> dict:
    return {"label": label, "dim": int(len(vectors[0])), "vectors": [encode_vector(v) for v in vectors]}


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False)


def content_hash(obj: Any) -> str:
    canon = json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canon.encode()).hexdigest()


def load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".upbkit-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
