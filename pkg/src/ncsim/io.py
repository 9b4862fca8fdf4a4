"""
JSON serialization for matrices, states, decompositions and sub-models.

Complex numbers are ``[re, im]`` pairs. Field names are fixed by
``schemas/ncsim.schema.json``; every loader validates against it.
"""
from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .quantum import TOL, PovmDecomposition, ProjectiveDecomposition, QuantumState

SCHEMA_PATH = Path(__file__).parent / "schemas" / "ncsim.schema.json"
MODEL_FORMAT_VERSION = 1


class MalformedFile(ValueError):
    """An input file is not valid JSON or does not match its schema."""


@lru_cache(maxsize=None)
def schema() -> dict:
    with open(SCHEMA_PATH) as fh:
        return json.load(fh)


@lru_cache(maxsize=None)
def _validator(kind: str) -> jsonschema.protocols.Validator:
    root = schema()
    if kind not in root["$defs"]:
        raise KeyError(f"no schema named {kind!r}")
    sub = {**root, "$ref": f"#/$defs/{kind}"}
    cls = jsonschema.validators.validator_for(root)
    return cls(sub)


def validate_document(data: Any, kind: str) -> None:
    """Raise :class:`MalformedFile` if ``data`` does not match schema ``kind``."""
    err = jsonschema.exceptions.best_match(_validator(kind).iter_errors(data))
    if err is not None:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise MalformedFile(f"{kind}: at {where}: {err.message}")


def read_json(path: str | Path) -> Any:
    """Parse a JSON file, reporting the line and column of syntax errors."""
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise MalformedFile(f"{path}: {exc.strerror}") from None


def encode_vector(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).ravel()]


def encode_matrix(m: np.ndarray) -> list:
    return [encode_vector(row) for row in np.asarray(m, dtype=complex)]


def decode_vector(data: list) -> np.ndarray:
    return np.array([complex(re, im) for re, im in data])


def decode_matrix(data: list) -> np.ndarray:
    rows = [decode_vector(r) for r in data]
    if any(len(r) != len(rows) for r in rows):
        raise MalformedFile("matrix is not square")
    return np.array(rows)


def _label_out(x):
    return list(x) if isinstance(x, tuple) else x


def state_to_dict(state: QuantumState) -> dict:
    if state.is_pure:
        return {"dim": state.dim, "vector": encode_vector(state.vector)}
    return {"dim": state.dim, "rho": encode_matrix(state.rho)}


def state_from_dict(data: dict, tol: float = TOL) -> QuantumState:
    validate_document(data, "state")
    if "vector" in data:
        st = QuantumState.pure(decode_vector(data["vector"]), tol)
    else:
        st = QuantumState.mixed(decode_matrix(data["rho"]), tol)
    if st.dim != data["dim"]:
        raise MalformedFile(f"state declares dim {data['dim']} but has dim {st.dim}")
    return st


def decomposition_to_dict(d) -> dict:
    key = "projectors" if d.kind == "projective" else "effects"
    return {"dim": d.dim, "kind": d.kind, key: [encode_matrix(p) for p in d.operators],
            "labels": [_label_out(x) for x in d.labels]}


def decomposition_from_dict(data: dict, tol: float = TOL):
    validate_document(data, "decomposition")
    if "projectors" in data:
        d = ProjectiveDecomposition(tuple(decode_matrix(p) for p in data["projectors"]),
                                    tuple(data["labels"]), tol)
    else:
        d = PovmDecomposition(tuple(decode_matrix(e) for e in data["effects"]),
                              tuple(data["labels"]), tol)
    if d.dim != data["dim"]:
        raise MalformedFile(f"decomposition declares dim {data['dim']} but has dim {d.dim}")
    return d


def targets_from_dict(data: dict, tol: float = TOL) -> list:
    validate_document(data, "targets")
    return [decomposition_from_dict(t, tol) for t in data["targets"]]


def targets_to_dict(targets) -> dict:
    return {"targets": [decomposition_to_dict(t) for t in targets]}


def model_to_dict(model) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "dim": model.dim,
        "kind": model.kind,
        "epsilon_r": model.epsilon_r,
        "build_seed": model.build_seed,
        "decompositions": [decomposition_to_dict(d) for d in model.decompositions],
    }


def model_from_dict(data: dict, tol: float = TOL):
    from .ck import FiniteSubModel

    validate_document(data, "model")
    if data["format_version"] != MODEL_FORMAT_VERSION:
        raise MalformedFile(f"unsupported model format version {data['format_version']}")
    decs = tuple(decomposition_from_dict(d, tol) for d in data["decompositions"])
    return FiniteSubModel(decs, float(data["epsilon_r"]), int(data["build_seed"]))


def dumps(obj: Any) -> str:
    """Canonical one-line JSON (sorted keys) so identical runs give identical bytes."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)
