"""Reading and writing the JSON matrix file format.

A document looks like::

    {
      "dim": 2,
      "matrices": {"Q": [[[0.5, 0], [0.5, 0]], [[0.5, 0], [0.5, 0]]], ...},
      "vectors": {"psi": [[0.7, 0], [0, 0.7]]},
      "comment": "anything"
    }

Each complex entry is a ``[re, im]`` pair; a bare number is read as a real
entry.  Extra top-level keys are carried along untouched.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError


@dataclass
class MatrixFile:
    dim: int | None
    matrices: dict = field(default_factory=dict)
    vectors: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def matrix(self, name: str) -> np.ndarray:
        try:
            return self.matrices[name]
        except KeyError:
            have = ", ".join(sorted(self.matrices)) or "none"
            raise InvalidInputError(f"matrix {name!r} missing from file (found: {have})") from None


def _entry(value, where):
    if isinstance(value, bool):
        raise InvalidInputError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value, 0.0)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        return complex(value[0], value[1])
    raise InvalidInputError(f"{where}: expected [re, im] or a number, got {value!r}")


def parse_matrix(rows, name: str, dim: int | None = None) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InvalidInputError(f"matrix {name!r}: expected a list of rows")
    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise InvalidInputError(f"matrix {name!r}: row {i} has {len(row)} entries, "
                                    f"expected {n} (matrices must be square)")
    if dim is not None and n != dim:
        raise InvalidInputError(f"matrix {name!r}: size {n} does not match dim {dim}")
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            out[i, j] = _entry(v, f"matrix {name!r} row {i} column {j}")
    if not np.all(np.isfinite(out)):
        raise InvalidInputError(f"matrix {name!r}: non-finite entry")
    return out


def parse_vector(entries, name: str) -> np.ndarray:
    if not isinstance(entries, list) or not entries:
        raise InvalidInputError(f"vector {name!r}: expected a non-empty list")
    return np.array([_entry(v, f"vector {name!r} entry {k}") for k, v in enumerate(entries)])


def loads(text: str) -> MatrixFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise InvalidInputError("top level of a matrix file must be an object")
    dim = doc.get("dim")
    if dim is not None and (not isinstance(dim, int) or isinstance(dim, bool) or dim < 1):
        raise InvalidInputError(f"dim must be a positive integer, got {dim!r}")
    mats = doc.get("matrices", {})
    vecs = doc.get("vectors", {})
    if not isinstance(mats, dict) or not isinstance(vecs, dict):
        raise InvalidInputError("'matrices' and 'vectors' must be objects")
    matrices = {name: parse_matrix(rows, name, dim) for name, rows in mats.items()}
    vectors = {name: parse_vector(v, name) for name, v in vecs.items()}
    extra = {k: v for k, v in doc.items() if k not in ("dim", "matrices", "vectors")}
    return MatrixFile(dim, matrices, vectors, extra)


def load(path: str) -> MatrixFile:
    """Read a matrix file; ``"-"`` reads standard input."""
    if path == "-":
        return loads(sys.stdin.read())
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None


def _pair(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


def to_document(mf: MatrixFile) -> dict:
    doc = dict(mf.extra)
    if mf.dim is not None:
        doc["dim"] = mf.dim
    doc["matrices"] = {k: [[_pair(z) for z in row] for row in np.asarray(m)]
                       for k, m in mf.matrices.items()}
    if mf.vectors:
        doc["vectors"] = {k: [_pair(z) for z in np.asarray(v)] for k, v in mf.vectors.items()}
    return doc


def dumps(mf: MatrixFile) -> str:
    # json writes floats with repr, the shortest string that round-trips exactly
    return json.dumps(to_document(mf)) + "\n"


def dump(mf: MatrixFile, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(mf))
