"""JSON input files and deterministic JSON output.

Matrices are row-major nested lists of ``[re, im]`` pairs.  Output floats
are written with 17 significant digits and object keys are sorted, so equal
inputs give equal bytes.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import FermiKleinError, InputError
from .graded_core import DEFAULT_TOLERANCE, GRADING_KINDS, GradedAlgebra, Grading
from .states import StateFunctional


# ---------------------------------------------------------------- matrices
def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise InputError(f"expected a matrix, got an array of shape {m.shape}")
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data, shape: tuple[int, int] | None = None, what: str = "matrix") -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{what}: not a numeric array") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise InputError(f"{what}: expected rows of [re, im] pairs, got shape {arr.shape}")
    m = arr[..., 0] + 1j * arr[..., 1]
    if shape is not None and m.shape != shape:
        raise InputError(f"{what}: expected shape {shape}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{what}: non-finite entries")
    return m


# ------------------------------------------------------------------ output
def _emit(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {_emit(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_emit(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _emit(obj.tolist())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, ``.17g`` floats)."""
    return _emit(obj) + "\n"


# ------------------------------------------------------------------ inputs
def read_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be an object")
    return data


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise InputError(f"{where}: missing key {key!r}")
    return data[key]


def algebra_from_dict(data: dict, tolerance: float | None = None, where: str = "algebra") -> GradedAlgebra:
    d = _require(data, "ambient_dim", where)
    if not isinstance(d, int) or isinstance(d, bool) or d <= 0:
        raise InputError(f"{where}: ambient_dim must be a positive integer")
    basis_data = _require(data, "basis", where)
    if not isinstance(basis_data, list) or not basis_data:
        raise InputError(f"{where}: basis must be a nonempty list")
    basis = [matrix_from_json(b, (d, d), f"{where}.basis[{i}]") for i, b in enumerate(basis_data)]
    g = _require(data, "grading", where)
    if not isinstance(g, dict):
        raise InputError(f"{where}: grading must be an object")
    kind = _require(g, "kind", f"{where}.grading")
    if kind not in GRADING_KINDS:
        raise InputError(f"{where}: grading kind must be one of {GRADING_KINDS}")
    shape = (len(basis),) * 2 if kind == "basis_map" else (d, d)
    gdata = matrix_from_json(_require(g, "data", f"{where}.grading"), shape, f"{where}.grading.data")
    tol = tolerance if tolerance is not None else data.get("tolerance", DEFAULT_TOLERANCE)
    if not isinstance(tol, (int, float)) or isinstance(tol, bool) or tol < 0:
        raise InputError(f"{where}: tolerance must be a nonnegative number")
    try:
        return GradedAlgebra(d, basis, Grading(kind, gdata), float(tol))
    except FermiKleinError as exc:
        raise InputError(f"{where}: {exc}") from exc


def algebra_to_dict(alg: GradedAlgebra) -> dict:
    g = alg.grading
    return {
        "ambient_dim": alg.ambient_dim,
        "basis": [matrix_to_json(b) for b in alg.basis],
        "grading": {"kind": g.kind, "data": matrix_to_json(g.data)},
        "tolerance": alg.tolerance,
    }


def load_algebra(path, tolerance: float | None = None) -> GradedAlgebra:
    return algebra_from_dict(read_json(path), tolerance, str(path))


def save_json(obj, path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def is_product_file(data: dict) -> bool:
    return "factor" in data


def product_file_from_dict(data: dict, base: Path, tolerance: float | None = None,
                           where: str = "product") -> tuple[GradedAlgebra, int, str]:
    factor_path = _require(data, "factor", where)
    n = _require(data, "n", where)
    kind = data.get("kind", "fermi")
    if not isinstance(factor_path, str):
        raise InputError(f"{where}: factor must be a path")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InputError(f"{where}: n must be a positive integer")
    if kind not in ("fermi", "ordinary"):
        raise InputError(f"{where}: kind must be 'fermi' or 'ordinary'")
    factor = load_algebra(base / factor_path, tolerance)
    return factor, n, kind


def load_product_file(path, tolerance: float | None = None) -> tuple[GradedAlgebra, int, str]:
    path = Path(path)
    return product_file_from_dict(read_json(path), path.parent, tolerance, str(path))


def load_state(path, tolerance: float | None = None):
    """State file -> ``(state, product)``; ``product`` is ``None`` for a plain algebra."""
    from .fermi_tensor import build_product_n

    path = Path(path)
    data = read_json(path)
    alg_path = path.parent / _require(data, "algebra", str(path))
    alg_data = read_json(alg_path)
    product = None
    if is_product_file(alg_data):
        factor, n, kind = product_file_from_dict(alg_data, alg_path.parent, tolerance, str(alg_path))
        product = build_product_n(factor, n, kind)
        alg = product.realized
    else:
        alg = algebra_from_dict(alg_data, tolerance, str(alg_path))
    rho = matrix_from_json(_require(data, "density", str(path)), (alg.ambient_dim,) * 2, f"{path}.density")
    try:
        return StateFunctional(alg, rho), product
    except FermiKleinError as exc:
        raise InputError(f"{path}: {exc}") from exc
