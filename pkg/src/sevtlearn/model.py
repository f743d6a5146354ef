"""Core model types: DAGs, staged trees, and fitted classifiers.

A staged tree over a schema with variables ``(V_0, ..., V_p)`` (class first)
has one level per variable. The internal vertices of level ``k`` are the
length-``k`` path prefixes, identified by their mixed-radix rank, and the
edges leaving them carry the outcomes of variable ``k``. A staging assigns
each vertex of a level to a stage; vertices in a stage share the conditional
distribution over that level's outcomes. Vertices are never materialized:
``level_stages[k]`` is simply an integer array mapping prefix rank to stage
id, which keeps trees with ~2^20 leaves comfortably in memory.

Stage ids are canonical: within each level they run ``0..n_stages-1`` in
order of first occurrence by prefix rank. Stages at different levels are
distinct by construction; external interfaces qualify them as ``"level:id"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import CategoricalSchema, context_ranks


def canonical_stage_ids(assignment: np.ndarray) -> np.ndarray:
    """Relabel stage ids as 0..n-1 in order of first occurrence."""
    values, first, inverse = np.unique(assignment, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first, kind="stable"), kind="stable")
    return order[inverse].astype(np.int64)


@dataclass(frozen=True)
class Dag:
    """DAG over the schema's variables with an explicit topological order.

    ``order`` lists variable indices, class first; ``parents[v]`` holds the
    parent set of variable ``v`` and may only contain variables that appear
    before ``v`` in ``order``, so the graph is acyclic by construction.
    """

    schema: CategoricalSchema
    order: tuple[int, ...]
    parents: tuple[frozenset[int], ...]

    def __post_init__(self):
        n = self.schema.n_variables
        if sorted(self.order) != list(range(n)):
            raise ValueError("order must be a permutation of the variable indices")
        if self.order[0] != 0:
            raise ValueError("the class variable must come first in the order")
        if len(self.parents) != n:
            raise ValueError("parents must have one entry per variable")
        position = {v: i for i, v in enumerate(self.order)}
        for v in range(n):
            for u in self.parents[v]:
                if u == v or position[u] >= position[v]:
                    raise ValueError(
                        f"parent {u} of variable {v} does not precede it in the order"
                    )

    def edges(self) -> list[tuple[int, int]]:
        """All (parent, child) pairs, sorted."""
        return sorted((u, v) for v in range(len(self.parents)) for u in self.parents[v])

    def feature_parents(self, v: int) -> frozenset[int]:
        return self.parents[v] - {0}

    def max_in_degree(self) -> int:
        return max(len(ps) for ps in self.parents)

    def is_bnc(self) -> bool:
        """Class parentless and a parent of every feature."""
        if self.parents[0]:
            return False
        return all(0 in self.parents[v] for v in range(1, self.schema.n_variables))


def bnc_dag(schema: CategoricalSchema, feature_edges: dict[int, frozenset[int]] | None = None,
            order: tuple[int, ...] | None = None) -> Dag:
    """Build a BNC DAG: class into every feature, plus optional feature edges."""
    n = schema.n_variables
    if order is None:
        order = tuple(range(n))
    feature_edges = feature_edges or {}
    parents = [frozenset()] + [
        frozenset({0}) | frozenset(feature_edges.get(v, frozenset())) for v in range(1, n)
    ]
    return Dag(schema, order, tuple(parents))


@dataclass(frozen=True, eq=False)
class StagedTree:
    """Event-tree skeleton of the schema plus a per-level stage partition."""

    schema: CategoricalSchema
    level_stages: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.level_stages) != self.schema.n_variables:
            raise ValueError("need one stage assignment per variable")
        frozen = []
        for k, stages in enumerate(self.level_stages):
            arr = np.ascontiguousarray(np.asarray(stages, dtype=np.int64))
            expect = self.schema.context_count(k)
            if arr.shape != (expect,):
                raise ValueError(f"level {k} needs {expect} vertices, got shape {arr.shape}")
            if arr.min(initial=0) < 0:
                raise ValueError("stage ids must be nonnegative")
            # ids must be dense and in first-occurrence order (canonical form)
            if not np.array_equal(arr, canonical_stage_ids(arr)):
                raise ValueError(f"level {k} stage ids are not in canonical form")
            arr.flags.writeable = False
            frozen.append(arr)
        object.__setattr__(self, "level_stages", tuple(frozen))

    @property
    def n_levels(self) -> int:
        return len(self.level_stages)

    def n_stages(self, level: int) -> int:
        return int(self.level_stages[level].max()) + 1

    def stage_of(self, level: int, context: tuple[int, ...]) -> int:
        """Stage id of the internal vertex identified by a path prefix."""
        if len(context) != level:
            raise ValueError("context length must equal the level")
        rank = 0
        for k, code in enumerate(context):
            if not 0 <= code < self.schema.cardinalities[k]:
                raise ValueError(f"code {code} out of range at position {k}")
            rank = rank * self.schema.cardinalities[k] + code
        return int(self.level_stages[level][rank])

    def same_staging(self, other: "StagedTree") -> bool:
        return (
            self.schema == other.schema
            and all(np.array_equal(a, b) for a, b in zip(self.level_stages, other.level_stages))
        )

    def with_merged_stages(self, level: int, a: int, b: int) -> "StagedTree":
        """New tree with stages ``a`` and ``b`` of one level joined."""
        if a == b:
            raise ValueError("cannot merge a stage with itself")
        stages = list(self.level_stages)
        merged = stages[level].copy()
        merged[merged == max(a, b)] = min(a, b)
        stages[level] = canonical_stage_ids(merged)
        return StagedTree(self.schema, tuple(stages))


def full_tree(schema: CategoricalSchema) -> StagedTree:
    """The saturated staged tree: every internal vertex in its own stage."""
    return StagedTree(
        schema,
        tuple(np.arange(schema.context_count(k), dtype=np.int64)
              for k in range(schema.n_variables)),
    )


def free_parameter_count(tree: StagedTree) -> int:
    """Free parameters of the staging: sum over stages of (cardinality - 1)."""
    return sum(
        tree.n_stages(k) * (tree.schema.cardinalities[k] - 1)
        for k in range(tree.n_levels)
    )


@dataclass(frozen=True, eq=False)
class StageParameters:
    """Per-level tables of stage conditional distributions.

    ``tables[k]`` has one row per stage of level ``k`` and one column per
    outcome of variable ``k``; rows are probability vectors.
    """

    tables: tuple[np.ndarray, ...]

    def __post_init__(self):
        frozen = []
        for table in self.tables:
            arr = np.ascontiguousarray(np.asarray(table, dtype=np.float64))
            if arr.ndim != 2:
                raise ValueError("each parameter table must be 2-D (stage x outcome)")
            arr.flags.writeable = False
            frozen.append(arr)
        object.__setattr__(self, "tables", tuple(frozen))

    def validate_for(self, tree: StagedTree, tol: float = 1e-9) -> None:
        """Check shapes against the tree and the simplex constraints.

        Zero entries are tolerated because unsmoothed maximum likelihood sits
        on the simplex boundary; smoothed fits are strictly positive.
        """
        if len(self.tables) != tree.n_levels:
            raise ValueError("need one parameter table per level")
        for k, table in enumerate(self.tables):
            want = (tree.n_stages(k), tree.schema.cardinalities[k])
            if table.shape != want:
                raise ValueError(f"level {k} table has shape {table.shape}, expected {want}")
            if np.any(table < 0.0) or np.any(table > 1.0):
                raise ValueError(f"level {k} has entries outside [0, 1]")
            err = np.abs(table.sum(axis=1) - 1.0).max()
            if err > tol:
                raise ValueError(f"level {k} rows deviate from the simplex by {err:.2e}")


@dataclass(frozen=True, eq=False)
class FittedClassifier:
    """A staged tree together with fitted stage distributions."""

    tree: StagedTree
    params: StageParameters
    smoothing: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.smoothing < 0:
            raise ValueError("smoothing must be nonnegative")
        self.params.validate_for(self.tree)

    @property
    def schema(self) -> CategoricalSchema:
        return self.tree.schema


def _validate_rows(schema: CategoricalSchema, rows: np.ndarray) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
    if rows.shape[1] != schema.n_variables:
        raise ValueError(f"assignments need {schema.n_variables} codes per row")
    if rows.size and (rows.min() < 0 or np.any(rows.max(axis=0) >= np.asarray(schema.cardinalities))):
        raise ValueError("assignment codes out of range for the schema")
    return rows


def log_joint_probability(model: FittedClassifier, rows: np.ndarray) -> np.ndarray:
    """Log joint probability of full assignments (one per row).

    Accumulates in log space so long paths cannot underflow.
    """
    rows = _validate_rows(model.schema, rows)
    out = np.zeros(rows.shape[0], dtype=np.float64)
    ranks = np.zeros(rows.shape[0], dtype=np.int64)
    with np.errstate(divide="ignore"):  # unsmoothed fits may hold exact zeros
        for k in range(model.schema.n_variables):
            stage = model.tree.level_stages[k][ranks]
            out += np.log(model.params.tables[k][stage, rows[:, k]])
            ranks = ranks * model.schema.cardinalities[k] + rows[:, k]
    return out


def joint_probability(model: FittedClassifier, assignment) -> float:
    """Joint probability of one full assignment: the product of the stage
    parameters along its root-to-leaf path."""
    return float(np.exp(log_joint_probability(model, np.asarray(assignment).reshape(1, -1)))[0])
