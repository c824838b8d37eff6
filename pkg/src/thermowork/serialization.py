"""JSON state/Hamiltonian files, report files, and CSV tables.

Complex entries are stored as [re, im] pairs to avoid string-parsing
ambiguity.  Floats are emitted with shortest-roundtrip repr, so canonical
files regenerate byte-identically.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError
from .states import BipartiteState, DensityMatrix

SCHEMA_VERSION = "1"
STATE_KINDS = ("density", "bipartite", "pure", "hamiltonian")


def matrix_to_pairs(m: np.ndarray) -> list:
    """Nested row-major [re, im] pairs for a 2-D complex matrix."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def vector_to_pairs(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v).reshape(-1)]


def _pair_to_complex(obj, where: str) -> complex:
    if (
        not isinstance(obj, (list, tuple))
        or len(obj) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj)
    ):
        raise ParseError(f"{where}: expected a [re, im] number pair, got {obj!r}")
    return complex(float(obj[0]), float(obj[1]))


def pairs_to_matrix(obj, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ParseError(f"{where}: expected a nested array of [re, im] pairs")
    ncols = len(obj[0])
    out = np.empty((len(obj), ncols), dtype=np.complex128)
    for i, row in enumerate(obj):
        if len(row) != ncols:
            raise ParseError(f"{where}: ragged rows ({len(row)} vs {ncols})")
        for j, entry in enumerate(row):
            out[i, j] = _pair_to_complex(entry, f"{where}[{i}][{j}]")
    return out


def pairs_to_vector(obj, where: str = "amplitudes") -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ParseError(f"{where}: expected an array of [re, im] pairs")
    return np.array([_pair_to_complex(e, f"{where}[{k}]") for k, e in enumerate(obj)])


@dataclass(frozen=True)
class StateFileContent:
    kind: str
    dims: tuple[int, ...]
    data: np.ndarray


def _read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected a JSON object at top level")
    return obj


def load_state_file(path) -> StateFileContent:
    """Parse a state/Hamiltonian file; schema problems raise ParseError."""
    obj = _read_json(path)
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(
            f"{path}: schema_version must be {SCHEMA_VERSION!r}, "
            f"got {obj.get('schema_version')!r}"
        )
    kind = obj.get("kind")
    if kind not in STATE_KINDS:
        raise ParseError(f"{path}: kind must be one of {STATE_KINDS}, got {kind!r}")
    dims = obj.get("dims")
    if (
        not isinstance(dims, list)
        or not dims
        or not all(isinstance(d, int) and d >= 1 for d in dims)
    ):
        raise ParseError(f"{path}: dims must be a list of positive integers")
    if "matrix" not in obj:
        raise ParseError(f"{path}: missing 'matrix' field")
    total = int(np.prod(dims))
    if kind == "pure":
        data = pairs_to_vector(obj["matrix"])
        if data.size != total:
            raise ParseError(
                f"{path}: amplitude vector length {data.size} != prod(dims) = {total}"
            )
    else:
        data = pairs_to_matrix(obj["matrix"])
        if data.shape != (total, total):
            raise ParseError(
                f"{path}: matrix shape {data.shape} != ({total}, {total})"
            )
    return StateFileContent(kind=kind, dims=tuple(dims), data=data)


def state_payload(kind: str, dims, data: np.ndarray) -> dict:
    body = vector_to_pairs(data) if kind == "pure" else matrix_to_pairs(data)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "dims": [int(d) for d in dims],
        "matrix": body,
    }


def dump_json(payload: dict, path) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def save_state_file(path, kind: str, dims, data: np.ndarray) -> None:
    if kind not in STATE_KINDS:
        raise ParseError(f"kind must be one of {STATE_KINDS}, got {kind!r}")
    dump_json(state_payload(kind, dims, data), path)


def as_density(content: StateFileContent) -> DensityMatrix:
    if content.kind == "density":
        return DensityMatrix(content.data)
    if content.kind == "pure" and len(content.dims) == 1:
        return DensityMatrix.pure(content.data)
    raise ParseError(f"expected a density-kind state file, got kind {content.kind!r}")


def as_bipartite(content: StateFileContent) -> BipartiteState:
    if len(content.dims) != 2:
        raise ParseError(
            f"bipartite input needs dims [d_A, d_B], got {list(content.dims)}"
        )
    da, db = content.dims
    if content.kind == "bipartite":
        return BipartiteState.from_matrix(content.data, da, db)
    if content.kind == "pure":
        return BipartiteState.pure(content.data, da, db)
    raise ParseError(f"expected a bipartite or pure state file, got {content.kind!r}")


def as_hamiltonian(content: StateFileContent) -> np.ndarray:
    if content.kind != "hamiltonian":
        raise ParseError(f"expected a hamiltonian file, got kind {content.kind!r}")
    return content.data


def povm_payload(povm) -> dict:
    return {
        "dim_a": povm.dim_a,
        "effects": [matrix_to_pairs(e) for e in povm.effects],
    }


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def format_float(x: float) -> str:
    """Shortest-roundtrip decimal form, stable across runs."""
    return repr(float(x) + 0.0)  # +0.0 folds -0.0 into 0.0


def write_csv(path, header: list[str], rows: list[list]) -> None:
    """Delimited table with deterministic float formatting."""
    lines = [",".join(header)]
    for row in rows:
        cells = [
            format_float(c) if isinstance(c, float) else str(c) for c in row
        ]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")
