"""JSON interchange for matrices, states, algebras and experiment configs.

Complex numbers are ``[re, im]`` pairs. A matrix is
``{"rows": n, "cols": m, "data": [[re, im], ...]}`` in row-major order and a
vector is an ``n x 1`` matrix.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, List, Tuple

import numpy as np

from .errors import DimensionError, ModulaireError


class SchemaError(ModulaireError):
    invariant = "schema"


class ParseError(ModulaireError):
    invariant = "json syntax"


def _complex(pair, where: str) -> complex:
    if (
        not isinstance(pair, (list, tuple))
        or len(pair) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
    ):
        raise SchemaError(f"{where}: complex entries must be [re, im] number pairs, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def _pair(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "data": [_pair(z) for z in m.reshape(-1)]}


def matrix_from_json(doc: Any, where: str = "matrix") -> np.ndarray:
    if not isinstance(doc, dict) or not {"rows", "cols", "data"} <= set(doc):
        raise SchemaError(f"{where}: expected an object with rows, cols and data")
    rows, cols, data = doc["rows"], doc["cols"], doc["data"]
    if not (isinstance(rows, int) and isinstance(cols, int) and rows > 0 and cols > 0):
        raise SchemaError(f"{where}: rows and cols must be positive integers")
    if not isinstance(data, list) or len(data) != rows * cols:
        got = len(data) if isinstance(data, list) else type(data).__name__
        raise SchemaError(f"{where}: data must hold rows*cols = {rows * cols} entries, got {got}")
    vals = np.array([_complex(p, f"{where}[{k}]") for k, p in enumerate(data)], dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise SchemaError(f"{where}: entries must be finite", invariant="finite entries")
    return vals.reshape(rows, cols)


def vector_to_json(v) -> list:
    return [_pair(z) for z in np.asarray(v, dtype=complex).reshape(-1)]


def vector_from_json(doc: Any, where: str = "vector") -> np.ndarray:
    if isinstance(doc, dict):
        m = matrix_from_json(doc, where)
        if m.shape[1] != 1:
            raise SchemaError(f"{where}: vectors are n x 1 matrices, got {m.shape}")
        return m.reshape(-1)
    if not isinstance(doc, list) or not doc:
        raise SchemaError(f"{where}: expected a non-empty list of [re, im] pairs")
    return np.array([_complex(p, f"{where}[{k}]") for k, p in enumerate(doc)], dtype=complex)


def read_json(path) -> Any:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file not found", invariant="input exists")
    text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def load_matrix(path) -> np.ndarray:
    return matrix_from_json(read_json(path), str(path))


def save_matrix(path, m) -> None:
    Path(path).write_text(json.dumps(matrix_to_json(m)), encoding="utf-8")


def state_from_json(doc: Any, where: str = "state") -> Tuple[np.ndarray, Tuple[int, int]]:
    if not isinstance(doc, dict) or "dims" not in doc:
        raise SchemaError(f"{where}: state needs a dims field")
    dims = doc["dims"]
    if not (isinstance(dims, list) and len(dims) == 2 and all(isinstance(d, int) and d > 0 for d in dims)):
        raise SchemaError(f"{where}: dims must be two positive integers")
    if "vector" in doc:
        psi = vector_from_json(doc["vector"], f"{where}.vector")
    elif "schmidt" in doc:
        from .states import from_schmidt

        s = doc["schmidt"]
        if not isinstance(s, dict) or not {"coefficients", "left", "right"} <= set(s):
            raise SchemaError(f"{where}.schmidt: needs coefficients, left and right")
        coeffs = s["coefficients"]
        if not isinstance(coeffs, list) or not all(isinstance(x, (int, float)) for x in coeffs):
            raise SchemaError(f"{where}.schmidt.coefficients: expected real numbers")
        left = matrix_from_json(s["left"], f"{where}.schmidt.left")
        right = matrix_from_json(s["right"], f"{where}.schmidt.right")
        if left.shape[0] != dims[0] or right.shape[0] != dims[1]:
            raise DimensionError(f"{where}.schmidt: basis rows do not match dims {dims}")
        psi = from_schmidt(coeffs, left, right)
    else:
        raise SchemaError(f"{where}: state needs either vector or schmidt")
    if psi.size != dims[0] * dims[1]:
        raise DimensionError(f"{where}: vector length {psi.size} does not match dims {dims}")
    return psi, (dims[0], dims[1])


def state_to_json(psi, dims) -> dict:
    return {"dims": [int(dims[0]), int(dims[1])], "vector": vector_to_json(psi)}


def load_state(path) -> Tuple[np.ndarray, Tuple[int, int]]:
    return state_from_json(read_json(path), str(path))


def matrices_from_json(doc: Any, where: str) -> List[np.ndarray]:
    """A list of matrices, ``{"generators": [...]}`` or an algebra document."""
    if isinstance(doc, dict):
        for key in ("generators", "basis"):
            if key in doc:
                doc = doc[key]
                break
        else:
            raise SchemaError(f"{where}: expected generators or basis")
    if not isinstance(doc, list):
        raise SchemaError(f"{where}: expected a list of matrices")
    return [matrix_from_json(m, f"{where}[{k}]") for k, m in enumerate(doc)]


def algebra_from_json(doc: Any, where: str = "algebra"):
    from .staralg import StarAlgebra

    if not isinstance(doc, dict) or "ambient_dim" not in doc or "basis" not in doc:
        raise SchemaError(f"{where}: algebra needs ambient_dim and basis")
    mats = matrices_from_json(doc["basis"], f"{where}.basis")
    alg = StarAlgebra.from_basis(mats)
    if alg.ambient_dim != doc["ambient_dim"]:
        raise DimensionError(f"{where}: ambient_dim {doc['ambient_dim']} does not match basis size {alg.ambient_dim}")
    return alg


def dumps_report(report: dict) -> str:
    """Canonical serialization: sorted keys, fixed separators, trailing newline."""
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"
