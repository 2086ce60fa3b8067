"""End-to-end clusterers.

``specmix`` runs normalized spectral clustering on the augmented graph
(numeric similarities plus category extra nodes), applies K-means to the
eigenvector rows of all n+t nodes, and keeps the first n labels. With all
edge weights at zero the extra nodes are omitted entirely and the pipeline
collapses to plain normalized spectral clustering on the numeric graph.

``onlycat`` is the purely categorical specialization: without a numeric
graph the augmentation (minus the extra-node self-loops) is exactly
bipartite, so the generalized eigenproblem is solved on the small t x t
side and each pair is lifted back, which is linear in n at fixed (t, K).

Pipelines are pure given (dataset, config); many invocations may run
concurrently.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .dataset import MixedDataset, OneHotMatrix, one_hot, _check_seed
from .eigen import EigenPairs, generalized_smallest_eigs
from .errors import ConfigError, DataError, SpectralGapError
from .graph import assemble_augmented, base_similarity
from .kmeans import KMeansConfig, kmeans

RESULT_FORMAT_VERSION = 1

_GAP_TOL = 1e-9


@dataclass(frozen=True)
class SpecMixConfig:
    """Clustering configuration shared by both pipelines.

    ``lambdas`` is either one value broadcast to every categorical variable
    or an explicit per-variable sequence. ``seed`` pins the whole run: it
    supersedes ``kmeans.seed`` so a single value controls eigensolver starts
    and K-means restarts.
    """

    k: int
    lambdas: Union[float, Sequence[float]] = 1.0
    kmeans: KMeansConfig = field(default_factory=KMeansConfig)
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ConfigError("cluster count k must be >= 2")
        _check_seed(self.seed)

    def resolve_lambdas(self, q: int) -> np.ndarray:
        if np.isscalar(self.lambdas):
            lams = np.full(q, float(self.lambdas))
        else:
            lams = np.asarray(self.lambdas, dtype=np.float64)
            if lams.shape != (q,):
                raise ConfigError(
                    f"expected {q} lambda values, got {lams.shape}")
        if (lams < 0.0).any():
            raise ConfigError("lambda values must be nonnegative")
        return lams

    def echo(self) -> dict:
        lams = (float(self.lambdas) if np.isscalar(self.lambdas)
                else [float(v) for v in self.lambdas])
        km = self.kmeans
        return {
            "k": self.k,
            "lambdas": lams,
            "kmeans": {"restarts": km.restarts, "max_iters": km.max_iters,
                       "tol": km.tol, "normalize_rows": km.normalize_rows},
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ClusteringResult:
    """Per-datapoint labels plus run diagnostics."""

    labels: np.ndarray
    eigenvalues: np.ndarray
    embedding_rows_used: int
    timings: dict
    config: dict
    seed: int
    method: str
    max_residual: float = 0.0

    def to_json(self) -> str:
        doc = {
            "version": RESULT_FORMAT_VERSION,
            "method": self.method,
            "labels": [int(v) for v in self.labels],
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "embedding_rows_used": self.embedding_rows_used,
            "timings": {k: float(v) for k, v in self.timings.items()},
            "config": self.config,
            "seed": self.seed,
            "max_residual": float(self.max_residual),
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ClusteringResult":
        doc = json.loads(text)
        if doc.get("version") != RESULT_FORMAT_VERSION:
            raise DataError(f"unsupported result version {doc.get('version')!r}")
        return cls(
            labels=np.asarray(doc["labels"], dtype=np.int64),
            eigenvalues=np.asarray(doc["eigenvalues"], dtype=np.float64),
            embedding_rows_used=int(doc["embedding_rows_used"]),
            timings=doc["timings"],
            config=doc["config"],
            seed=int(doc["seed"]),
            method=doc["method"],
            max_residual=float(doc.get("max_residual", 0.0)),
        )


@dataclass(frozen=True)
class StackedEncoder:
    """Column concatenation of the lambda-weighted one-hot matrices.

    Every row sums to the total edge weight (``lam_total``); column j of
    variable l sums to lambda_l times that category's count.
    """

    encoders: tuple[OneHotMatrix, ...]
    lambdas: tuple[float, ...]

    def __post_init__(self):
        if not self.encoders:
            raise ConfigError("stacked encoder needs at least one variable")
        if len(self.encoders) != len(self.lambdas):
            raise ConfigError("one lambda per categorical variable is required")
        if any(lam <= 0.0 for lam in self.lambdas):
            raise ConfigError("stacked encoder requires positive lambdas")
        n = self.encoders[0].n
        if any(enc.n != n for enc in self.encoders):
            raise DataError("encoders disagree on row count")

    @property
    def n(self) -> int:
        return self.encoders[0].n

    @property
    def t(self) -> int:
        return sum(enc.cardinality for enc in self.encoders)

    @property
    def lam_total(self) -> float:
        """Constant row sum of the stacked matrix."""
        return float(sum(self.lambdas))

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out = []
        pos = 0
        for enc in self.encoders:
            out.append(pos)
            pos += enc.cardinality
        return tuple(out)

    @cached_property
    def column_sums(self) -> np.ndarray:
        return np.concatenate([lam * enc.column_sums
                               for enc, lam in zip(self.encoders, self.lambdas)])

    def dense(self) -> np.ndarray:
        blocks = [lam * enc.entries
                  for enc, lam in zip(self.encoders, self.lambdas)]
        return np.concatenate(blocks, axis=1)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """H @ vec for a length-t vector."""
        vec = np.asarray(vec, dtype=np.float64)
        out = np.zeros(self.n)
        for enc, lam, off in zip(self.encoders, self.lambdas, self.offsets):
            out += lam * enc.apply(vec[off:off + enc.cardinality])
        return out

    def apply_transpose(self, vec: np.ndarray) -> np.ndarray:
        """H.T @ vec for a length-n vector."""
        return np.concatenate([lam * enc.apply_transpose(vec)
                               for enc, lam in zip(self.encoders, self.lambdas)])


def build_stacked(ds: MixedDataset, lambdas) -> StackedEncoder:
    encoders = tuple(one_hot(ds, l) for l in range(ds.num_categorical))
    return StackedEncoder(encoders, tuple(float(v) for v in lambdas))


def build_bipartite_reduction(stacked: StackedEncoder):
    """Reduce the bipartite category graph to its small side.

    Returns (w_small, d_small, d_rows): the t x t weight matrix
    H.T diag(row sums)^{-1} H of the reduced graph, its degree vector, and
    the constant data-side row-degree vector. Since every row of H sums to
    the same total, the reduced degrees coincide with the bipartite degrees
    of the category nodes.
    """
    col = stacked.column_sums
    if (col <= 0.0).any():
        bad = int(np.flatnonzero(col <= 0.0)[0])
        raise DataError(f"category column {bad} has no datapoints")
    h = stacked.dense()
    w_small = (h.T @ h) / stacked.lam_total
    w_small = 0.5 * (w_small + w_small.T)
    d_small = w_small.sum(axis=1)
    d_rows = np.full(stacked.n, stacked.lam_total)
    return w_small, d_small, d_rows


def transfer_cut(stacked: StackedEncoder, k: int) -> tuple[EigenPairs, np.ndarray]:
    """Solve the bipartite spectral problem on the t x t side and lift.

    A reduced pair (gamma, u) maps to the full-graph pair with
    mu = 1 - sqrt(1 - gamma) (equivalently gamma = mu (2 - mu)) and
    data-side block f = D_rows^{-1} H u / (1 - mu); the stacked vector
    (f, u) / sqrt(2) is D-orthonormal on the full bipartite graph. Requires
    gamma_k < 1; total work is O(nt(k+t) + kt^2), linear in n.

    Returns the lifted pairs over all n+t rows and the n x k data-row
    embedding fed to K-means.
    """
    if k > stacked.t:
        raise ConfigError(f"k={k} exceeds the {stacked.t} category nodes")
    w_small, d_small, _ = build_bipartite_reduction(stacked)
    small = generalized_smallest_eigs(w_small, d_small, k)
    gammas = small.values
    if gammas[-1] >= 1.0 - _GAP_TOL:
        raise SpectralGapError(
            "insufficient bipartite spectral gap: "
            f"gamma_{k} = {gammas[-1]:.12g} is too close to 1")
    mus = 1.0 - np.sqrt(np.maximum(1.0 - gammas, 0.0))

    n = stacked.n
    vectors = np.empty((n + stacked.t, k))
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(k):
        u = small.vectors[:, i]
        f = stacked.apply(u) / (stacked.lam_total * (1.0 - mus[i]))
        vectors[:n, i] = f * inv_sqrt2
        vectors[n:, i] = u * inv_sqrt2

    # Sign convention on the lifted vectors; keep the embedding consistent.
    for i in range(k):
        v = vectors[:, i]
        if v[np.argmax(np.abs(v))] < 0.0:
            np.negative(v, out=v)
    embedding = vectors[:n, :] * np.sqrt(2.0)

    d_all = np.concatenate([np.full(n, stacked.lam_total), d_small])
    residuals = np.empty(k)
    for i in range(k):
        v = vectors[:, i]
        wv = np.concatenate([stacked.apply(v[n:]), stacked.apply_transpose(v[:n])])
        residuals[i] = np.linalg.norm(d_all * v - wv - mus[i] * (d_all * v))
    return EigenPairs(mus, vectors, residuals), embedding


def _finish(labels, pairs, rows_used, timings, cfg, method) -> ClusteringResult:
    timings = dict(timings)
    timings["total"] = sum(timings.values())
    return ClusteringResult(
        labels=np.asarray(labels, dtype=np.int64),
        eigenvalues=np.asarray(pairs.values, dtype=np.float64),
        embedding_rows_used=rows_used,
        timings=timings,
        config=cfg.echo(),
        seed=cfg.seed,
        method=method,
        max_residual=float(np.max(pairs.residuals)),
    )


def _kmeans_config(cfg: SpecMixConfig) -> KMeansConfig:
    return replace(cfg.kmeans, seed=cfg.seed)


def numeric_spectral(ds: MixedDataset, cfg: SpecMixConfig) -> ClusteringResult:
    """Normalized spectral clustering on the numeric similarity graph only."""
    if cfg.k > ds.n:
        raise ConfigError(f"k={cfg.k} exceeds the {ds.n} datapoints")
    t0 = time.perf_counter()
    weights = base_similarity(ds)
    t1 = time.perf_counter()
    pairs = generalized_smallest_eigs(weights.matrix, weights.degrees, cfg.k,
                                      seed=cfg.seed)
    t2 = time.perf_counter()
    labels, _, _ = kmeans(pairs.vectors, cfg.k, _kmeans_config(cfg))
    t3 = time.perf_counter()
    timings = {"graph": t1 - t0, "eigen": t2 - t1, "kmeans": t3 - t2}
    return _finish(labels, pairs, ds.n, timings, cfg, "numeric-spectral")


def specmix(ds: MixedDataset, cfg: SpecMixConfig) -> ClusteringResult:
    """Cluster mixed-type data through the augmented graph.

    K-means runs on the eigenvector rows of all n+t nodes; the extra-node
    labels are discarded. Variables with a zero lambda contribute nothing to
    the graph and are omitted; with every lambda at zero this is exactly
    ``numeric_spectral``.
    """
    if cfg.k > ds.n:
        raise ConfigError(f"k={cfg.k} exceeds the {ds.n} datapoints")
    if ds.num_numeric < 1:
        raise ConfigError("numeric features required; use onlycat")
    lams = cfg.resolve_lambdas(ds.num_categorical)
    active = np.flatnonzero(lams > 0.0)
    if active.size == 0:
        result = numeric_spectral(ds, cfg)
        return replace(result, method="specmix", config=cfg.echo())

    t0 = time.perf_counter()
    weights = base_similarity(ds)
    encoders = [one_hot(ds, int(l)) for l in active]
    graph = assemble_augmented(weights, encoders, lams[active])
    t1 = time.perf_counter()
    pairs = generalized_smallest_eigs(graph, graph.degrees, cfg.k, seed=cfg.seed)
    t2 = time.perf_counter()
    labels_all, _, _ = kmeans(pairs.vectors, cfg.k, _kmeans_config(cfg))
    t3 = time.perf_counter()
    timings = {"graph": t1 - t0, "eigen": t2 - t1, "kmeans": t3 - t2}
    return _finish(labels_all[:ds.n], pairs, graph.dim, timings, cfg, "specmix")


def onlycat(ds: MixedDataset, cfg: SpecMixConfig) -> ClusteringResult:
    """Cluster purely categorical data through the bipartite reduction.

    The numeric part of the dataset, if any, is ignored. Any common positive
    lambda yields the same labels up to numerical error, since a uniform
    scale cancels from the reduced generalized problem and from the lift.
    """
    if ds.num_categorical < 1:
        raise ConfigError("onlycat requires at least one categorical variable")
    if cfg.k > ds.n:
        raise ConfigError(f"k={cfg.k} exceeds the {ds.n} datapoints")
    lams = cfg.resolve_lambdas(ds.num_categorical)
    if (lams <= 0.0).any():
        raise ConfigError("onlycat requires strictly positive lambdas")

    t0 = time.perf_counter()
    stacked = build_stacked(ds, lams)
    t1 = time.perf_counter()
    pairs, embedding = transfer_cut(stacked, cfg.k)
    t2 = time.perf_counter()
    labels, _, _ = kmeans(embedding, cfg.k, _kmeans_config(cfg))
    t3 = time.perf_counter()
    timings = {"graph": t1 - t0, "eigen": t2 - t1, "kmeans": t3 - t2}
    return _finish(labels, pairs, ds.n, timings, cfg, "onlycat")
