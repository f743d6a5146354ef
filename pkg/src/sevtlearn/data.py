"""Categorical schemas and integer-coded datasets.

The variable order is fixed at construction time and shared by every model
built on top of it: the class variable always sits at position 0 and the
features follow. All values are 0-based integer codes; the optional
``value_labels`` keep the original strings around so CSV round-trips and
prediction output stay human readable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class CategoricalSchema:
    """Ordered variable list with per-variable cardinalities, class first.

    The class variable must have at least two categories; features may be
    degenerate (cardinality 1) and then simply carry no information.
    """

    names: tuple[str, ...]
    cardinalities: tuple[int, ...]

    def __post_init__(self):
        if len(self.names) != len(self.cardinalities):
            raise ValueError("names and cardinalities must have equal length")
        if len(self.names) < 1:
            raise ValueError("schema needs at least the class variable")
        if len(set(self.names)) != len(self.names):
            raise ValueError("variable names must be unique")
        if self.cardinalities[0] < 2:
            raise ValueError("class variable needs at least 2 categories")
        if any(c < 1 for c in self.cardinalities):
            raise ValueError("cardinalities must be positive")

    @property
    def class_name(self) -> str:
        return self.names[0]

    @property
    def class_cardinality(self) -> int:
        return self.cardinalities[0]

    @property
    def n_variables(self) -> int:
        return len(self.names)

    @property
    def n_features(self) -> int:
        return len(self.names) - 1

    @property
    def atom_count(self) -> int:
        """Number of full joint assignments (leaves of the event tree)."""
        return math.prod(self.cardinalities)

    def context_count(self, level: int) -> int:
        """Number of length-``level`` path prefixes (internal vertices at that depth)."""
        return math.prod(self.cardinalities[:level])

    def permuted(self, order: tuple[int, ...]) -> "CategoricalSchema":
        """Schema with variables reordered; ``order[0]`` must stay the class."""
        if sorted(order) != list(range(self.n_variables)) or order[0] != 0:
            raise ValueError("order must permute all variables and keep the class first")
        return CategoricalSchema(
            tuple(self.names[i] for i in order),
            tuple(self.cardinalities[i] for i in order),
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    """Integer-coded records over a schema; column k holds variable k's codes."""

    schema: CategoricalSchema
    records: np.ndarray
    value_labels: tuple[tuple[str, ...], ...] | None = field(default=None)

    def __post_init__(self):
        rec = np.ascontiguousarray(np.asarray(self.records, dtype=np.int64))
        if rec.ndim != 2 or rec.shape[1] != self.schema.n_variables:
            raise ValueError(
                f"records must be 2-D with {self.schema.n_variables} columns, got {rec.shape}"
            )
        if rec.size:
            lo = rec.min(axis=0)
            hi = rec.max(axis=0)
            if lo.min() < 0 or np.any(hi >= np.asarray(self.schema.cardinalities)):
                bad = int(np.nonzero((lo < 0) | (hi >= np.asarray(self.schema.cardinalities)))[0][0])
                raise ValueError(f"codes out of range for variable {self.schema.names[bad]!r}")
        if self.value_labels is not None:
            if len(self.value_labels) != self.schema.n_variables:
                raise ValueError("value_labels must cover every variable")
            for labels, card in zip(self.value_labels, self.schema.cardinalities):
                if len(labels) != card:
                    raise ValueError("value_labels lengths must match cardinalities")
        rec.flags.writeable = False
        object.__setattr__(self, "records", rec)

    @property
    def n_records(self) -> int:
        return self.records.shape[0]

    @property
    def class_column(self) -> np.ndarray:
        return self.records[:, 0]

    def subset(self, index: np.ndarray) -> "Dataset":
        return Dataset(self.schema, self.records[index], self.value_labels)

    def permuted(self, order: tuple[int, ...]) -> "Dataset":
        """Reorder the columns (and schema) per ``order``; class stays first."""
        schema = self.schema.permuted(order)
        labels = None
        if self.value_labels is not None:
            labels = tuple(self.value_labels[i] for i in order)
        return Dataset(schema, self.records[:, list(order)], labels)

    def aligned_to(self, schema: CategoricalSchema) -> "Dataset":
        """Reorder columns to match ``schema``'s variable order (matched by name)."""
        if schema.names == self.schema.names:
            if schema.cardinalities != self.schema.cardinalities:
                raise ValueError("schemas disagree on cardinalities")
            return self
        try:
            order = tuple(self.schema.names.index(name) for name in schema.names)
        except ValueError:
            raise ValueError("schemas do not contain the same variables") from None
        out = self.permuted(order)
        if out.schema.cardinalities != schema.cardinalities:
            raise ValueError("schemas disagree on cardinalities")
        return out


def context_ranks(schema: CategoricalSchema, rows: np.ndarray, level: int) -> np.ndarray:
    """Mixed-radix rank of each row's length-``level`` prefix.

    Rank 0 is the all-zeros prefix; ranks enumerate prefixes in lexicographic
    order, which is how staging arrays index the internal vertices of a level.
    """
    ranks = np.zeros(rows.shape[0], dtype=np.int64)
    for k in range(level):
        ranks = ranks * schema.cardinalities[k] + rows[:, k]
    return ranks


def all_assignments(schema: CategoricalSchema) -> np.ndarray:
    """Every full joint assignment, one per row, in lexicographic order."""
    grids = np.indices(schema.cardinalities)
    return grids.reshape(schema.n_variables, -1).T.astype(np.int64)
