"""Partitional reference baselines: K-modes and K-prototypes.

Both alternate between computing cluster prototypes and nearest-prototype
assignment, starting from K distinct random datapoints, with independent
restarts keeping the best objective. All tie-breaks (nearest prototype,
column modes, farthest-point repair) go to the lowest index, so runs are
deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import MixedDataset
from .errors import ConfigError


@dataclass(frozen=True)
class PrototypeSet:
    """Cluster prototypes: numeric means, categorical modes, and the weight
    of the categorical (Hamming) term in the mixed assignment cost."""

    numeric_centers: np.ndarray
    modes: np.ndarray
    gamma_mix: float


def _hamming(categorical: np.ndarray, modes: np.ndarray) -> np.ndarray:
    return (categorical[:, None, :] != modes[None, :, :]).sum(axis=2).astype(np.float64)


def _sq_euclid(numeric: np.ndarray, centers: np.ndarray) -> np.ndarray:
    p2 = np.einsum("ij,ij->i", numeric, numeric)
    c2 = np.einsum("ij,ij->i", centers, centers)
    d2 = p2[:, None] + c2[None, :] - 2.0 * (numeric @ centers.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _column_modes(categorical, members, cards) -> np.ndarray:
    out = np.empty(categorical.shape[1], dtype=np.int64)
    for col in range(categorical.shape[1]):
        counts = np.bincount(categorical[members, col], minlength=cards[col])
        out[col] = int(np.argmax(counts))  # ties to the lowest category index
    return out


def _repair_empty(labels, counts, cost):
    for c in np.flatnonzero(counts == 0):
        own = cost[np.arange(labels.size), labels]
        movable = counts[labels] > 1
        own = np.where(movable, own, -np.inf)
        p = int(np.argmax(own))
        counts[labels[p]] -= 1
        labels[p] = c
        counts[c] = 1
    return labels, counts


def _alternate(numeric, categorical, cards, k, rng, max_iters, gamma_mix):
    """One restart of the alternating minimization shared by both baselines.
    ``numeric`` is None for the purely categorical case."""
    n = categorical.shape[0]
    init = rng.choice(n, size=k, replace=False)
    centers = numeric[init].copy() if numeric is not None else None
    modes = categorical[init].copy()

    def assignment_cost():
        cost = np.zeros((n, k))
        if numeric is not None:
            cost += _sq_euclid(numeric, centers)
        if gamma_mix != 0.0:
            cost += gamma_mix * _hamming(categorical, modes)
        return cost

    labels = np.full(n, -1, dtype=np.int64)
    objective = np.inf
    history = []
    for _ in range(max_iters):
        cost = assignment_cost()
        new_labels = np.argmin(cost, axis=1).astype(np.int64)
        counts = np.bincount(new_labels, minlength=k)
        if (counts == 0).any():
            new_labels, counts = _repair_empty(new_labels, counts, cost)
        converged = np.array_equal(new_labels, labels)
        labels = new_labels
        for c in range(k):
            members = labels == c
            if numeric is not None:
                centers[c] = numeric[members].mean(axis=0)
            modes[c] = _column_modes(categorical, members, cards)
        objective = float(assignment_cost()[np.arange(n), labels].sum())
        history.append(objective)
        if converged:
            break
    return labels, centers, modes, objective, history


def kmodes(categorical, k: int, seed: int = 0, max_iters: int = 100,
           restarts: int = 10) -> np.ndarray:
    """K-modes over an (n, Q) integer category matrix.

    Alternates columnwise-majority mode computation with nearest-mode
    (Hamming) assignment until the labels stabilize.
    """
    categorical = np.asarray(categorical, dtype=np.int64)
    if categorical.ndim != 2 or categorical.shape[1] < 1:
        raise ConfigError("kmodes needs an (n, Q) category matrix with Q >= 1")
    n = categorical.shape[0]
    if n < k:
        raise ConfigError(f"need at least k={k} rows, got {n}")
    cards = categorical.max(axis=0) + 1

    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        labels, _, _, objective, _ = _alternate(
            None, categorical, cards, k, rng, max_iters, gamma_mix=1.0)
        if best is None or objective < best[1]:
            best = (labels, objective)
    return best[0]


def kprototypes(ds: MixedDataset, k: int, gamma_mix: Optional[float] = None,
                seed: int = 0, max_iters: int = 100, restarts: int = 10,
                return_prototypes: bool = False):
    """K-prototypes over a mixed dataset.

    Assignment cost is the squared Euclidean distance to the numeric center
    plus ``gamma_mix`` times the Hamming distance to the categorical mode.
    ``gamma_mix`` defaults to half the mean numeric column variance.
    """
    if ds.num_numeric < 1 or ds.num_categorical < 1:
        raise ConfigError("kprototypes needs both numeric and categorical features")
    if ds.n < k:
        raise ConfigError(f"need at least k={k} rows, got {ds.n}")
    if gamma_mix is None:
        gamma_mix = 0.5 * float(np.mean(np.var(ds.numeric, axis=0)))
    if gamma_mix < 0.0:
        raise ConfigError("gamma_mix must be nonnegative")
    cards = np.asarray(ds.cardinalities, dtype=np.int64)

    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        labels, centers, modes, objective, _ = _alternate(
            ds.numeric, ds.categorical, cards, k, rng, max_iters, gamma_mix)
        if best is None or objective < best[3]:
            best = (labels, centers, modes, objective)
    labels, centers, modes, _ = best
    if return_prototypes:
        return labels, PrototypeSet(centers, modes, float(gamma_mix))
    return labels
