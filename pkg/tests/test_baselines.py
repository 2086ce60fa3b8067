import numpy as np
import pytest

from specmix import (ConfigError, MixedDataset, SyntheticParams,
                     generate_synthetic, kmodes, kprototypes, label_agreement)
from specmix.baselines import _alternate


class TestKModes:
    def test_identical_blocks_perfect_split(self):
        cats = np.array([[0, 1, 2]] * 6 + [[3, 0, 1]] * 6)
        labels = kmodes(cats, 2, seed=0)
        assert len(set(labels[:6])) == 1
        assert len(set(labels[6:])) == 1
        assert labels[0] != labels[6]

    def test_k_one_is_majority_mode(self):
        rng = np.random.default_rng(0)
        cats = rng.integers(0, 3, (20, 4))
        labels = kmodes(cats, 1, seed=0)
        assert set(labels.tolist()) == {0}

    def test_all_rows_identical_repair(self):
        cats = np.zeros((8, 3), dtype=int)
        labels = kmodes(cats, 2, seed=0)
        assert labels.shape == (8,)
        assert len(set(labels.tolist())) == 2

    def test_rows_fewer_than_k(self):
        with pytest.raises(ConfigError):
            kmodes(np.zeros((2, 2), dtype=int), 3)

    def test_deterministic(self):
        rng = np.random.default_rng(1)
        cats = rng.integers(0, 4, (30, 3))
        assert np.array_equal(kmodes(cats, 3, seed=5), kmodes(cats, 3, seed=5))

    def test_objective_non_increasing(self):
        rng = np.random.default_rng(2)
        cats = rng.integers(0, 4, (40, 4))
        cards = cats.max(axis=0) + 1
        _, _, _, _, history = _alternate(None, cats, cards, 3,
                                         np.random.default_rng(0), 100, 1.0)
        assert (np.diff(history) <= 1e-9).all()


class TestKPrototypes:
    def test_zero_weight_ignores_categorical(self):
        rng = np.random.default_rng(3)
        numeric = np.vstack([rng.normal(0, 0.1, (10, 2)),
                             rng.normal(5, 0.1, (10, 2))])
        cats_a = rng.integers(0, 3, (20, 2))
        cats_b = rng.integers(0, 3, (20, 2))
        ds_a = MixedDataset(numeric, cats_a, (3, 3))
        ds_b = MixedDataset(numeric, cats_b, (3, 3))
        la = kprototypes(ds_a, 2, gamma_mix=0.0, seed=4)
        lb = kprototypes(ds_b, 2, gamma_mix=0.0, seed=4)
        assert np.array_equal(la, lb)
        assert len(set(la[:10])) == 1 and la[0] != la[10]

    def test_huge_weight_matches_kmodes(self):
        ds, _ = generate_synthetic(SyntheticParams(n=60, k=2, q=3,
                                                   sigma=3.0, p=0.0, seed=5))
        lp = kprototypes(ds, 2, gamma_mix=1e9, seed=6)
        lm = kmodes(ds.categorical, 2, seed=6)
        assert label_agreement(lp, lm) == 1.0

    def test_objective_non_increasing(self):
        rng = np.random.default_rng(4)
        ds, _ = generate_synthetic(SyntheticParams(n=50, k=3, q=2,
                                                   sigma=1.0, p=0.3, seed=7))
        cards = np.asarray(ds.cardinalities)
        _, _, _, _, history = _alternate(ds.numeric, ds.categorical, cards, 3,
                                         rng, 100, 0.5)
        assert (np.diff(history) <= 1e-9).all()

    def test_prototype_set_returned(self):
        ds, _ = generate_synthetic(SyntheticParams(n=40, k=2, q=2,
                                                   sigma=0.5, p=0.1, seed=8))
        labels, protos = kprototypes(ds, 2, seed=9, return_prototypes=True)
        assert protos.numeric_centers.shape == (2, ds.num_numeric)
        assert protos.modes.shape == (2, ds.num_categorical)
        assert protos.gamma_mix >= 0.0
        for c in range(2):
            assert (protos.modes[c] < np.asarray(ds.cardinalities)).all()

    def test_requires_both_parts(self):
        ds = MixedDataset(np.random.default_rng(0).standard_normal((10, 2)),
                          np.empty((10, 0), dtype=int), ())
        with pytest.raises(ConfigError):
            kprototypes(ds, 2)

    def test_labels_cover_at_least_one_cluster(self):
        ds, _ = generate_synthetic(SyntheticParams(n=30, k=2, q=2,
                                                   sigma=1.0, p=0.4, seed=10))
        labels = kprototypes(ds, 2, seed=11)
        assert labels.shape == (30,)
        assert len(set(labels.tolist())) >= 1
