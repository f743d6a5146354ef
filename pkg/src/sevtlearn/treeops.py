"""Conversions between DAGs and staged trees, and classifier-class checks.

``dag_to_staged_tree`` realizes a Bayesian network as the equivalent staged
tree: two same-level vertices share a stage exactly when their contexts agree
on the level variable's parents. ``minimal_dag`` inverts the construction
structurally: variable ``j`` is a parent of variable ``k`` exactly when two
level-``k`` contexts differing only in coordinate ``j`` sit in different
stages. Only the staging is inspected; coincidences between fitted parameter
values never remove an edge.
"""

from __future__ import annotations

import math

import numpy as np

from .model import Dag, StagedTree, canonical_stage_ids


def dag_to_staged_tree(g: Dag) -> StagedTree:
    """The staged tree whose stages are the parent configurations of ``g``.

    The tree's variable order is ``g.order``, so its schema is the DAG
    schema permuted accordingly. The induced model is exactly the Bayesian
    network model of ``g``: both entail the same factorization.
    """
    schema = g.schema.permuted(g.order)
    position = {v: i for i, v in enumerate(g.order)}
    levels = []
    for k in range(schema.n_variables):
        n = schema.context_count(k)
        parent_positions = sorted(position[u] for u in g.parents[g.order[k]])
        if not parent_positions:
            levels.append(np.zeros(n, dtype=np.int64))
            continue
        ranks = np.arange(n, dtype=np.int64)
        raw = np.zeros(n, dtype=np.int64)
        for t in parent_positions:
            stride = math.prod(schema.cardinalities[t + 1:k])
            coord = (ranks // stride) % schema.cardinalities[t]
            raw = raw * schema.cardinalities[t] + coord
        levels.append(canonical_stage_ids(raw))
    return StagedTree(schema, tuple(levels))


def minimal_dag(t: StagedTree) -> Dag:
    """Sparsest DAG (over the tree's own variable order) whose Bayesian
    network model contains the staged tree model.

    A coordinate that never separates two contexts into different stages is
    not a parent. Cardinality-1 variables can never separate contexts, so
    vacuous edges from degenerate parents are always dropped.
    """
    parents = [frozenset()]
    for k in range(1, t.n_levels):
        shape = t.schema.cardinalities[:k]
        grid = t.level_stages[k].reshape(shape)
        found = set()
        for j in range(k):
            if np.any(grid != grid.take([0], axis=j)):
                found.add(j)
        parents.append(frozenset(found))
    return Dag(t.schema, tuple(range(t.n_levels)), tuple(parents))


def is_k_parents(t: StagedTree, k: int) -> bool:
    """True when the minimal DAG's maximum in-degree is at most ``k``."""
    return minimal_dag(t).max_in_degree() <= k


# -- BNC structure checks on DAGs ---------------------------------------------

def is_kdb_structure(g: Dag, k: int) -> bool:
    """Valid k-DB BNC: class parentless and into every feature, at most
    ``k`` feature parents per feature."""
    ok, _ = _kdb_structure_report(g, k)
    return ok


def is_tan_structure(g: Dag) -> bool:
    """Valid TAN BNC: k-DB with k=1 whose feature-feature edges form a single
    directed tree. Disconnected forests count as k-DB(1), not TAN."""
    ok, _ = _tan_structure_report(g)
    return ok


def _kdb_structure_report(g: Dag, k: int) -> tuple[bool, list[str]]:
    reasons = []
    if g.parents[0]:
        reasons.append("the class variable has parents")
    for v in range(1, g.schema.n_variables):
        name = g.schema.names[v]
        if 0 not in g.parents[v]:
            reasons.append(f"class is not a parent of feature {name!r}")
        extra = len(g.feature_parents(v))
        if extra > k:
            reasons.append(f"feature {name!r} has {extra} feature parents (limit {k})")
    return not reasons, reasons


def _tan_structure_report(g: Dag) -> tuple[bool, list[str]]:
    ok, reasons = _kdb_structure_report(g, 1)
    p = g.schema.n_features
    n_edges = sum(len(g.feature_parents(v)) for v in range(1, g.schema.n_variables))
    if ok and p >= 1 and n_edges != p - 1:
        # each feature has <= 1 feature parent, so the edges form a forest;
        # fewer than p-1 edges means it is disconnected
        reasons.append(
            f"feature-feature edges form a forest with {p - n_edges} components, "
            "not a single directed tree"
        )
    return not reasons, reasons


# -- refinement checks on staged trees ----------------------------------------

def kdb_refinement_report(t: StagedTree, k: int) -> tuple[bool, list[str]]:
    """Whether the tree's minimal DAG is a valid k-DB BNC, with diagnostics."""
    return _kdb_structure_report(minimal_dag(t), k)


def tan_refinement_report(t: StagedTree) -> tuple[bool, list[str]]:
    """Whether the tree's minimal DAG is a valid TAN BNC, with diagnostics."""
    return _tan_structure_report(minimal_dag(t))


def is_kdb_refinement(t: StagedTree, k: int) -> bool:
    return kdb_refinement_report(t, k)[0]


def is_tan_refinement(t: StagedTree) -> bool:
    return tan_refinement_report(t)[0]


def membership_report(t: StagedTree, kdb_levels: tuple[int, ...] = (1, 2, 3, 5)) -> dict:
    """Summary of where a staged tree sits relative to the classifier classes."""
    g = minimal_dag(t)
    names = t.schema.names
    report = {
        "minimal_dag_edges": [[names[u], names[v]] for u, v in g.edges()],
        "max_in_degree": g.max_in_degree(),
        "is_bnc": g.is_bnc(),
    }
    ok, reasons = _tan_structure_report(g)
    report["tan_refinement"] = {"ok": ok, "reasons": reasons}
    report["kdb_refinement"] = {}
    for k in sorted(set(kdb_levels)):
        ok, reasons = _kdb_structure_report(g, k)
        report["kdb_refinement"][str(k)] = {"ok": ok, "reasons": reasons}
    return report
