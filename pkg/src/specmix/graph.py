"""Similarity graphs for mixed-type spectral clustering.

The base graph connects datapoints through a Gaussian similarity on their
numeric features. The augmented graph appends one extra node per category of
each categorical variable; datapoint i is linked to the extra node of its
category in variable l with weight lambda_l, and every extra node carries a
unit self-loop. The augmentation is never materialized densely except on
demand: matrix-vector products use gather/scatter on the category codes,
costing O(n^2 + nQ) per product.

Graphs are immutable after assembly; all queries are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .dataset import MixedDataset, OneHotMatrix
from .errors import ConfigError, DataError

_SYM_TOL = 1e-10


@dataclass(frozen=True)
class BaseWeights:
    """Dense symmetric similarity matrix over the n datapoints.

    Entries lie in [0, 1]; the diagonal is exactly 1 (zero self-distance),
    which adds a unit self-loop per data node. Self-loops cancel in the
    Laplacian but contribute to degrees, consistently with the unit
    self-loops on extra nodes.
    """

    matrix: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.matrix, dtype=np.float64)
        object.__setattr__(self, "matrix", w)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DataError("weight matrix must be square")
        if np.abs(w - w.T).max(initial=0.0) > _SYM_TOL:
            raise DataError("weight matrix must be symmetric")
        if w.size and (w.min() < 0.0 or w.max() > 1.0 + _SYM_TOL):
            raise DataError("base similarities must lie in [0, 1]")
        if w.size and np.abs(np.diag(w) - 1.0).max() > _SYM_TOL:
            raise DataError("base similarity diagonal must be 1 (unit self-loops)")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def degrees(self) -> np.ndarray:
        return self.matrix.sum(axis=1)


def base_similarity(ds: MixedDataset) -> BaseWeights:
    """Fully connected Gaussian similarity on the numeric features.

    w(i, j) = exp(-sum_l (x_il - x_jl)^2), with no bandwidth scaling.
    """
    if ds.num_numeric < 1:
        raise ConfigError("numeric features required; use onlycat")
    x = ds.numeric
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    w = np.exp(-d2)
    w = 0.5 * (w + w.T)
    np.fill_diagonal(w, 1.0)
    return BaseWeights(w)


@dataclass(frozen=True)
class AugmentedGraph:
    """Base graph plus category extra nodes, in block-structured form.

    Node layout: data nodes 0..n-1, then the categories of variable 0, of
    variable 1, and so on. The implied dense matrix has the base weights in
    the top-left block, lambda_l-scaled one-hot blocks off-diagonal, identity
    blocks (unit self-loops) on the extra-node diagonal, and zeros elsewhere.
    """

    base: BaseWeights
    encoders: tuple[OneHotMatrix, ...]
    lambdas: tuple[float, ...]
    degrees: np.ndarray

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def t(self) -> int:
        return sum(enc.cardinality for enc in self.encoders)

    @property
    def dim(self) -> int:
        return self.n + self.t

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        """Start index of each variable's extra-node block."""
        out = []
        pos = self.n
        for enc in self.encoders:
            out.append(pos)
            pos += enc.cardinality
        return tuple(out)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Implied dense weight matrix times ``x``."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise ConfigError(f"expected vector of length {self.dim}, got {x.shape}")
        n = self.n
        out = np.empty(self.dim)
        out[:n] = self.base.matrix @ x[:n]
        for enc, lam, off in zip(self.encoders, self.lambdas, self.offsets):
            block = x[off:off + enc.cardinality]
            out[:n] += lam * enc.apply(block)
            out[off:off + enc.cardinality] = lam * enc.apply_transpose(x[:n]) + block
        return out

    def dense(self) -> np.ndarray:
        """Materialize the full (n+t) x (n+t) weight matrix."""
        n = self.n
        w = np.zeros((self.dim, self.dim))
        w[:n, :n] = self.base.matrix
        rows = np.arange(n)
        for enc, lam, off in zip(self.encoders, self.lambdas, self.offsets):
            end = off + enc.cardinality
            w[rows, off + enc.codes] = lam
            w[off + enc.codes, rows] = lam
            w[off:end, off:end] = np.eye(enc.cardinality)
        return w


def assemble_augmented(base: BaseWeights, encoders, lambdas) -> AugmentedGraph:
    """Assemble the augmented graph and cache its degree vector.

    Data node i has degree (row sum of the base weights) + sum_l lambda_l;
    extra node (l, j) has degree lambda_l * (count of category j) + 1.
    """
    encoders = tuple(encoders)
    lambdas = tuple(float(v) for v in lambdas)
    if len(encoders) != len(lambdas):
        raise ConfigError("one lambda per categorical variable is required")
    if any(lam <= 0.0 for lam in lambdas):
        raise ConfigError("edge weights lambda must be positive")
    n = base.n
    for l, enc in enumerate(encoders):
        if enc.n != n:
            raise DataError(f"encoder {l} has {enc.n} rows, base graph has {n}")
    degs = [base.degrees + sum(lambdas)]
    for enc, lam in zip(encoders, lambdas):
        degs.append(lam * enc.column_sums + 1.0)
    return AugmentedGraph(base, encoders, lambdas, np.concatenate(degs))


@dataclass(frozen=True)
class AssignmentMatrix:
    """Volume-normalized cluster indicator matrix.

    Row i has a single nonzero 1/sqrt(vol(cluster of i)) in its cluster's
    column, where volumes are taken with respect to the degrees the matrix
    was built against; this makes Z.T @ D @ Z the identity.
    """

    entries: np.ndarray
    labels: np.ndarray
    volumes: np.ndarray

    @property
    def num_clusters(self) -> int:
        return self.entries.shape[1]


def assignment_matrix(labels, degrees, k: int) -> AssignmentMatrix:
    """Build the assignment matrix of a hard partition against ``degrees``."""
    labels = np.asarray(labels, dtype=np.int64)
    degrees = np.asarray(degrees, dtype=np.float64)
    if labels.shape != degrees.shape:
        raise ConfigError("labels and degrees must have equal length")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ConfigError(f"labels must lie in [0, {k})")
    volumes = np.bincount(labels, weights=degrees, minlength=k)
    if (volumes <= 0.0).any():
        empty = int(np.flatnonzero(volumes <= 0.0)[0])
        raise ConfigError(f"cluster {empty} is empty (zero volume)")
    entries = np.zeros((labels.size, k))
    entries[np.arange(labels.size), labels] = 1.0 / np.sqrt(volumes[labels])
    return AssignmentMatrix(entries, labels, volumes)


def _graph_interface(graph):
    if isinstance(graph, AugmentedGraph):
        return graph.matvec, graph.degrees, graph.dim
    if isinstance(graph, BaseWeights):
        return (lambda x: graph.matrix @ x), graph.degrees, graph.n
    w = np.asarray(graph, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ConfigError("graph must be an AugmentedGraph, BaseWeights, or square matrix")
    return (lambda x: w @ x), w.sum(axis=1), w.shape[0]


def assignment_energy(assign: AssignmentMatrix, graph) -> float:
    """tr(Z.T L Z) for L = D - W, without materializing L.

    Equals the normalized-cut value of the partition the matrix encodes.
    """
    matvec, degrees, dim = _graph_interface(graph)
    z = assign.entries
    if z.shape[0] != dim:
        raise ConfigError(f"assignment has {z.shape[0]} rows, graph has {dim} nodes")
    degree_term = float(np.sum(degrees * np.einsum("ik,ik->i", z, z)))
    weight_term = 0.0
    for col in range(z.shape[1]):
        weight_term += float(z[:, col] @ matvec(z[:, col]))
    return degree_term - weight_term


def delta_counts(data_labels, extra_labels, encoder: OneHotMatrix, k: int) -> np.ndarray:
    """K x K matrix counting datapoints of cluster a whose category node
    (for this variable) was assigned to cluster b."""
    data_labels = np.asarray(data_labels, dtype=np.int64)
    extra_labels = np.asarray(extra_labels, dtype=np.int64)
    if data_labels.size != encoder.n:
        raise ConfigError("data labels length does not match encoder rows")
    if extra_labels.size != encoder.cardinality:
        raise ConfigError("extra labels length does not match category count")
    for arr in (data_labels, extra_labels):
        if arr.size and (arr.min() < 0 or arr.max() >= k):
            raise ConfigError(f"labels must lie in [0, {k})")
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (data_labels, extra_labels[encoder.codes]), 1)
    return counts
