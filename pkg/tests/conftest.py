import numpy as np
import pytest

from ccpirl.instrumentation import counters
from ccpirl.model import DdcModel, FeatureMatrix, TransitionModel


@pytest.fixture(autouse=True)
def _reset_counters():
    counters.reset()
    yield
    counters.reset()


def random_transitions(rng, n_states, n_actions):
    mats = []
    for _ in range(n_actions):
        raw = rng.random((n_states, n_states)) + 0.05
        mats.append(raw / raw.sum(axis=1, keepdims=True))
    return TransitionModel(mats)


def random_model(rng, n_states=5, n_actions=3, beta=0.9, feature_dim=2,
                 goal_states=()):
    """Dense random DDC model; always passes validate_model."""
    dist = rng.random(n_states) + 0.1
    return DdcModel(
        n_states=n_states,
        n_actions=n_actions,
        transitions=random_transitions(rng, n_states, n_actions),
        discount=beta,
        features=FeatureMatrix(rng.standard_normal((n_states, feature_dim))),
        initial_dist=dist / dist.sum(),
        goal_states=frozenset(goal_states),
    )
