"""JSON (de)serialization for models, assignments, cocycles and reports.

Conventions, shared by every artifact:

* complex scalars are two-element arrays [re, im];
* matrices are row-major nested arrays of complex scalars;
* points are 1-indexed on disk (0-indexed in memory), so the arrow from
  y = 2 to x = 1 is keyed "(1,2)" and a composable pair "((1,2),(2,3))";
* permutations are one-line arrays, 1-indexed: [2,3,4,1] is the 4-cycle.

Model documents look like

    {"points": n, "fibre_dims": [...],
     "frame": {"(x,y)": matrix, ...},          # omitted = plain product model
     "twist": {"((x,y),(y,z))": value, ...},   # omitted = trivial
     "generator": [..]}                        # optional base flow generator

A document with a frame or twist parses to the coefficient (semidirect)
model; without either it parses to the imprimitivity model.
"""

from __future__ import annotations

import json
import re

import numpy as np

from .cocycle import Cocycle2, make_twist
from .fellbundle import (
    CStarBundle,
    FellBundleModel,
    build_imprimitivity_bundle,
    build_semidirect_bundle,
)
from .groupoid import Arrow, Bisection
from .linalg import DEFAULT_EPS, as_matrix


class ParseError(ValueError):
    """Malformed artifact document."""


def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(v) -> complex:
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise ParseError(f"complex scalar must be [re, im], got {v!r}")
    return complex(float(v[0]), float(v[1]))


def matrix_to_json(m) -> list[list[list[float]]]:
    a = as_matrix(m)
    return [[complex_to_json(a[r, c]) for c in range(a.shape[1])]
            for r in range(a.shape[0])]


def matrix_from_json(v) -> np.ndarray:
    if not isinstance(v, list) or not v or not all(isinstance(r, list) for r in v):
        raise ParseError(f"matrix must be a nested array, got {v!r}")
    try:
        return np.array([[complex_from_json(z) for z in row] for row in v],
                        dtype=complex)
    except (TypeError, ParseError) as exc:
        raise ParseError(f"bad matrix entry: {exc}") from exc


def arrow_key(g: Arrow) -> str:
    return f"({g[0] + 1},{g[1] + 1})"

_ARROW_RE = re.compile(r"^\((\d+),(\d+)\)$")


def arrow_from_key(key: str) -> Arrow:
    m = _ARROW_RE.match(key)
    if not m:
        raise ParseError(f"bad arrow key {key!r}, expected '(x,y)'")
    x, y = int(m.group(1)), int(m.group(2))
    if x < 1 or y < 1:
        raise ParseError(f"arrow key {key!r} must be 1-indexed")
    return (x - 1, y - 1)


def pair_key(g: Arrow, h: Arrow) -> str:
    return f"({arrow_key(g)},{arrow_key(h)})"

_PAIR_RE = re.compile(r"^\(\((\d+),(\d+)\),\((\d+),(\d+)\)\)$")


def pair_from_key(key: str) -> tuple[Arrow, Arrow]:
    m = _PAIR_RE.match(key)
    if not m:
        raise ParseError(f"bad pair key {key!r}, expected '((x,y),(y,z))'")
    nums = [int(m.group(i)) for i in range(1, 5)]
    if min(nums) < 1:
        raise ParseError(f"pair key {key!r} must be 1-indexed")
    return (nums[0] - 1, nums[1] - 1), (nums[2] - 1, nums[3] - 1)


def permutation_to_json(g: Bisection) -> list[int]:
    return [g(x) + 1 for x in range(g.n_points)]


def permutation_from_json(v) -> Bisection:
    if not isinstance(v, list) or not all(isinstance(i, int) for i in v):
        raise ParseError(f"permutation must be an integer array, got {v!r}")
    try:
        return Bisection(tuple(i - 1 for i in v))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def twist_value_to_json(v: np.ndarray):
    a = as_matrix(v)
    if a.shape == (1, 1):
        return complex_to_json(a[0, 0])
    return matrix_to_json(a)


def twist_value_from_json(v):
    if (isinstance(v, list) and len(v) == 2
            and all(isinstance(x, (int, float)) for x in v)):
        return complex_from_json(v)
    return matrix_from_json(v)


def cocycle_to_json(w: Cocycle2) -> dict:
    return {
        "points": w.n_points,
        "fibre_dim": w.fibre_dim,
        "pairs": {pair_key(g, h): twist_value_to_json(v)
                  for (g, h), v in w.values.items()},
    }


def cocycle_from_json(doc: dict, eps: float = DEFAULT_EPS) -> Cocycle2:
    try:
        n = int(doc["points"])
        dim = int(doc["fibre_dim"])
        pairs = doc.get("pairs", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad cocycle document: {exc}") from exc
    values = {pair_from_key(k): twist_value_from_json(v) for k, v in pairs.items()}
    return make_twist(n, dim, values, eps=eps)


def assignment_to_json(assignment: dict[Arrow, np.ndarray]) -> dict:
    return {"arrows": {arrow_key(g): matrix_to_json(u)
                       for g, u in assignment.items()}}


def assignment_from_json(doc: dict) -> dict[Arrow, np.ndarray]:
    try:
        arrows = doc["arrows"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad assignment document: {exc}") from exc
    return {arrow_from_key(k): matrix_from_json(v) for k, v in arrows.items()}


def model_to_json(
    model: FellBundleModel, generator: Bisection | None = None
) -> dict:
    doc: dict = {
        "points": model.n_points,
        "fibre_dims": list(model.fibre_dims),
    }
    if model.frame is not None:
        doc["frame"] = {arrow_key(g): matrix_to_json(u)
                        for g, u in model.frame.items()}
    if model.twist is not None:
        doc["twist"] = {pair_key(g, h): twist_value_to_json(v)
                        for (g, h), v in model.twist.values.items()}
    if generator is not None:
        doc["generator"] = permutation_to_json(generator)
    return doc


def model_from_json(
    doc: dict, eps: float = DEFAULT_EPS
) -> tuple[FellBundleModel, Bisection | None]:
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object")
    try:
        n = int(doc["points"])
        dims = tuple(int(d) for d in doc["fibre_dims"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad model document: {exc}") from exc
    if len(dims) != n:
        raise ParseError(f"{n} points but {len(dims)} fibre dims")

    generator = None
    if "generator" in doc:
        generator = permutation_from_json(doc["generator"])
        if generator.n_points != n:
            raise ParseError("generator length does not match point count")

    if "frame" not in doc and "twist" not in doc:
        return build_imprimitivity_bundle(dims), generator

    if len(set(dims)) != 1:
        raise ParseError("frame/twist data requires constant fibre dimension")
    dim = dims[0]
    frame = None
    if "frame" in doc:
        frame = {arrow_from_key(k): matrix_from_json(v)
                 for k, v in doc["frame"].items()}
    twist = None
    if "twist" in doc:
        values = {pair_from_key(k): twist_value_from_json(v)
                  for k, v in doc["twist"].items()}
        twist = make_twist(n, dim, values, eps=eps)
    try:
        model = build_semidirect_bundle(CStarBundle(dims), frame=frame,
                                        twist=twist, eps=eps)
    except ValueError as exc:
        raise ParseError(f"model data rejected: {exc}") from exc
    return model, generator


def jsonable(obj):
    """Recursively coerce report values (numpy scalars, matrices) to JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [jsonable(v) for v in obj]
        if isinstance(obj, (set, frozenset)):
            items = sorted(items, key=repr)
        return items
    if isinstance(obj, np.ndarray):
        return matrix_to_json(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return complex_to_json(complex(obj))
    return obj


def dumps_canonical(doc) -> str:
    """Deterministic text form: sorted keys, fixed indentation, newline-terminated."""
    return json.dumps(jsonable(doc), sort_keys=True, indent=2) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
