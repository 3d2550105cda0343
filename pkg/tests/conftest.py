"""Shared fixtures: the desk-scale synthetic corpus and a trained metric."""

from __future__ import annotations

from types import SimpleNamespace

import numpy as np
import pytest

import hapticmetric as hm


def extract_matrix(dataset, bins=11, alpha=1.8, fmax=1000.0, mode="full"):
    """Dataset -> (feature matrix, labels) through the full spectral pipeline."""
    bank = hm.build_filter_bank(hm.FilterBankConfig(bins, alpha, fmax))
    rows, labels = [], []
    for label, signal in dataset.entries:
        spectrum = hm.truncate_spectrum(hm.dft321_magnitude(signal), fmax)
        rows.append(hm.extract_features(spectrum, bank, mode).energies)
        labels.append(label)
    return np.vstack(rows), labels


@pytest.fixture(scope="session")
def desk_corpus():
    """10 classes, 10 train + 10 test recordings each, default band plan."""
    train = hm.synth_corpus(hm.SynthSpec(rng_seed=11))
    test = hm.synth_corpus(hm.SynthSpec(rng_seed=12))
    train_x, train_y = extract_matrix(train)
    test_x, test_y = extract_matrix(test)
    return SimpleNamespace(
        train=train,
        test=test,
        train_x=train_x,
        train_y=train_y,
        test_x=test_x,
        test_y=test_y,
    )


@pytest.fixture(scope="session")
def desk_model(desk_corpus):
    """Metric trained for 200 rounds on the desk corpus."""
    triplets = hm.generate_triplets(desk_corpus.train_x, desk_corpus.train_y, rng_seed=0)
    config = hm.TrainConfig(regularizer=1e-7, max_iterations=200, rng_seed=0)
    model = hm.train_metric(triplets, desk_corpus.train_x, config)
    return SimpleNamespace(model=model, triplets=triplets, config=config)


@pytest.fixture(scope="session")
def two_blobs():
    """Two 2-D Gaussian blobs 10 sigma apart, 10 points each."""
    rng = np.random.default_rng(5)
    near = rng.normal(size=(10, 2))
    far = rng.normal(size=(10, 2)) + np.array([10.0, 0.0])
    features = np.vstack([near, far])
    labels = ["near"] * 10 + ["far"] * 10
    return features, labels
