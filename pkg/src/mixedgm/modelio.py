"""On-disk formats: JSON model files and CSV datasets.

Model files are JSON documents {p, types, alpha1, alpha2, theta}; datasets
are CSV with a header row of single-character type tags (g/b/p/e) followed
by observation rows.  All numbers are written with 17 significant digits so
parse(serialize(x)) == x holds bit-for-bit.
"""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from .core import Dataset, EdgeMatrix, ModelSpec, NodeParams, NodeType


class ParseError(ValueError):
    """A model or dataset file does not match its schema."""


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _fmt_list(values) -> str:
    return "[" + ", ".join(_fmt(v) for v in values) + "]"


def model_to_json(model: ModelSpec) -> str:
    """Serialize a model; floats carry 17 significant digits."""
    rows = ",\n    ".join(_fmt_list(row) for row in model.theta)
    types = ", ".join(f'"{ty.tag}"' for ty in model.types)
    return (
        "{\n"
        f'  "p": {model.p},\n'
        f'  "types": [{types}],\n'
        f'  "alpha1": {_fmt_list(model.alpha1)},\n'
        f'  "alpha2": {_fmt_list(model.alpha2)},\n'
        f'  "theta": [\n    {rows}\n  ]\n'
        "}\n"
    )


def model_from_json(text: str) -> ModelSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    try:
        p = int(doc["p"])
        types = tuple(NodeType.from_tag(t) for t in doc["types"])
        alpha1 = [float(v) for v in doc["alpha1"]]
        alpha2 = [float(v) for v in doc["alpha2"]]
        theta = np.array(doc["theta"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed model document: {exc}") from exc
    if len(types) != p or len(alpha1) != p or len(alpha2) != p:
        raise ParseError("types/alpha1/alpha2 lengths must equal p")
    if theta.shape != (p, p):
        raise ParseError(f"theta must be {p}x{p}, got {theta.shape}")
    try:
        edges = EdgeMatrix(theta)
        return ModelSpec(
            types=types,
            params=tuple(NodeParams(a1, a2) for a1, a2 in zip(alpha1, alpha2)),
            edges=edges,
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def write_model(model: ModelSpec, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(model_to_json(model))


def read_model(path: str) -> ModelSpec:
    with open(path) as fh:
        return model_from_json(fh.read())


def dataset_to_csv(data: Dataset) -> str:
    lines = [",".join(ty.tag for ty in data.types)]
    for row in data.x:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def dataset_from_csv(text: str) -> Dataset:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty dataset file")
    try:
        types = tuple(NodeType.from_tag(t) for t in lines[0].split(","))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    rows = []
    for k, ln in enumerate(lines[1:], start=2):
        cells = ln.split(",")
        if len(cells) != len(types):
            raise ParseError(f"line {k}: expected {len(types)} columns, got {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ParseError(f"line {k}: {exc}") from exc
    try:
        return Dataset(x=np.array(rows, dtype=float), types=types)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def write_dataset(data: Dataset, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dataset_to_csv(data))


def read_dataset(path: str) -> Dataset:
    with open(path) as fh:
        return dataset_from_csv(fh.read())


def write_edge_csv(edges: Sequence[tuple[int, int]], path: str) -> None:
    with open(path, "w") as fh:
        fh.write("s,t\n")
        for s, t in edges:
            fh.write(f"{s},{t}\n")
