import numpy as np
import pytest

from trialkit import ModelParams, ValueDistribution


@pytest.fixture
def params():
    return ModelParams(lam=1.0, horizon=5.0, mu0=0.5)


@pytest.fixture
def narrow():
    return ValueDistribution.uniform(0.9, 1.1)


@pytest.fixture
def wide():
    return ValueDistribution.uniform(0.2, 1.8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_model(rng, *, lam=(0.3, 2.5), horizon=(2.0, 9.0), mu0=(0.1, 0.9)):
    return ModelParams(
        lam=float(rng.uniform(*lam)),
        horizon=float(rng.uniform(*horizon)),
        mu0=float(rng.uniform(*mu0)),
    )


def random_uniform_dist(rng, *, min_lo=0.05):
    # mean-1 uniform laws: lo = 1 - d, hi = 1 + d
    d = float(rng.uniform(0.05, 1.0 - min_lo))
    return ValueDistribution.uniform(1.0 - d, 1.0 + d)
