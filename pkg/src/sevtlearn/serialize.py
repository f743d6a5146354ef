"""JSON persistence for staged tree models and DAGs.

The model document stores the schema, the staging as per-depth maps from
context code-string (comma-joined codes, root is the empty string) to a
globally unique ``"level:id"`` stage identifier, a flat map from stage id to
probability vector, the smoothing used at fit time, and free-form metadata.
Serialization is deterministic (sorted keys, fixed separators) so identical
models produce byte-identical files; staging round-trips exactly and
probabilities round-trip to full float precision.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .data import CategoricalSchema
from .model import Dag, FittedClassifier, StagedTree, StageParameters

MODEL_FORMAT = "sevtlearn-model"
DAG_FORMAT = "sevtlearn-dag"


def _schema_doc(schema: CategoricalSchema) -> list[dict[str, Any]]:
    return [
        {"name": name, "cardinality": card}
        for name, card in zip(schema.names, schema.cardinalities)
    ]


def _schema_from_doc(doc: list[dict[str, Any]]) -> CategoricalSchema:
    return CategoricalSchema(
        tuple(v["name"] for v in doc),
        tuple(int(v["cardinality"]) for v in doc),
    )


def _context_key(schema: CategoricalSchema, level: int, rank: int) -> str:
    codes = []
    for card in reversed(schema.cardinalities[:level]):
        codes.append(rank % card)
        rank //= card
    return ",".join(str(c) for c in reversed(codes))


def _rank_from_key(schema: CategoricalSchema, level: int, key: str) -> int:
    codes = [int(c) for c in key.split(",")] if key else []
    if len(codes) != level:
        raise ValueError(f"context {key!r} does not have {level} codes")
    rank = 0
    for k, code in enumerate(codes):
        if not 0 <= code < schema.cardinalities[k]:
            raise ValueError(f"context {key!r} has out-of-range code at position {k}")
        rank = rank * schema.cardinalities[k] + code
    return rank


def model_to_doc(tree: StagedTree, params: StageParameters | None = None,
                 smoothing: float | None = None, metadata: dict | None = None) -> dict:
    staging = {
        str(k): {
            _context_key(tree.schema, k, r): f"{k}:{int(stage)}"
            for r, stage in enumerate(tree.level_stages[k])
        }
        for k in range(tree.n_levels)
    }
    params_doc = None
    if params is not None:
        params_doc = {
            f"{k}:{s}": [float(x) for x in params.tables[k][s]]
            for k in range(tree.n_levels)
            for s in range(tree.n_stages(k))
        }
    return {
        "format": MODEL_FORMAT,
        "version": 1,
        "schema": {"variables": _schema_doc(tree.schema)},
        "staging": staging,
        "params": params_doc,
        "smoothing": smoothing,
        "metadata": metadata or {},
    }


def doc_to_model(doc: dict) -> tuple[StagedTree, StageParameters | None, float | None, dict]:
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError("not a staged tree model document")
    schema = _schema_from_doc(doc["schema"]["variables"])
    levels = []
    for k in range(schema.n_variables):
        level_doc = doc["staging"][str(k)]
        n = schema.context_count(k)
        if len(level_doc) != n:
            raise ValueError(f"staging level {k} must cover all {n} contexts")
        arr = np.empty(n, dtype=np.int64)
        for key, stage_id in level_doc.items():
            lvl, local = stage_id.split(":")
            if int(lvl) != k:
                raise ValueError(f"stage id {stage_id!r} used outside its level")
            arr[_rank_from_key(schema, k, key)] = int(local)
        levels.append(arr)
    tree = StagedTree(schema, tuple(levels))
    params = None
    if doc.get("params") is not None:
        tables = []
        for k in range(tree.n_levels):
            table = np.empty((tree.n_stages(k), schema.cardinalities[k]), dtype=np.float64)
            for s in range(tree.n_stages(k)):
                table[s] = doc["params"][f"{k}:{s}"]
            tables.append(table)
        params = StageParameters(tuple(tables))
    return tree, params, doc.get("smoothing"), doc.get("metadata") or {}


def dumps_model(model: FittedClassifier) -> str:
    doc = model_to_doc(model.tree, model.params, model.smoothing, model.metadata)
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def loads_model(text: str) -> FittedClassifier:
    tree, params, smoothing, metadata = doc_to_model(json.loads(text))
    if params is None:
        raise ValueError("document has no parameters; load_tree for staging-only files")
    return FittedClassifier(tree, params, 0.0 if smoothing is None else smoothing, metadata)


def dumps_tree(tree: StagedTree, metadata: dict | None = None) -> str:
    return json.dumps(model_to_doc(tree, metadata=metadata),
                      sort_keys=True, separators=(",", ":")) + "\n"


def loads_tree(text: str) -> StagedTree:
    tree, _, _, _ = doc_to_model(json.loads(text))
    return tree


def dumps_dag(dag: Dag, metadata: dict | None = None) -> str:
    doc = {
        "format": DAG_FORMAT,
        "version": 1,
        "schema": {"variables": _schema_doc(dag.schema)},
        "order": list(dag.order),
        "parents": {str(v): sorted(ps) for v, ps in enumerate(dag.parents) if ps},
        "metadata": metadata or {},
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def loads_dag(text: str) -> Dag:
    doc = json.loads(text)
    if doc.get("format") != DAG_FORMAT:
        raise ValueError("not a DAG document")
    schema = _schema_from_doc(doc["schema"]["variables"])
    parents = [frozenset(map(int, doc["parents"].get(str(v), ())))
               for v in range(schema.n_variables)]
    return Dag(schema, tuple(int(v) for v in doc["order"]), tuple(parents))


def save_model(model: FittedClassifier, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_model(model))


def load_model(path) -> FittedClassifier:
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())


def load_model_or_dag(path) -> FittedClassifier | StagedTree | Dag:
    """Open a serialized artifact of any supported kind."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    doc = json.loads(text)
    fmt = doc.get("format")
    if fmt == DAG_FORMAT:
        return loads_dag(text)
    if fmt == MODEL_FORMAT:
        if doc.get("params") is None:
            return loads_tree(text)
        return loads_model(text)
    raise ValueError(f"unrecognized document format {fmt!r}")
