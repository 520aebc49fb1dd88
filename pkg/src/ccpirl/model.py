"""Core data model for dynamic-discrete-choice MDPs.

States and actions are dense integer indices (0..n_states-1 and
0..n_actions-1); environments own any mapping from coordinates to indices.
All containers are treated as immutable after construction: arrays are
flagged read-only so they can be shared across threads safely.
"""

import json
from dataclasses import dataclass, field

import numpy as np

ROW_SUM_TOL = 1e-9


def _frozen(a, dtype=float):
    out = np.ascontiguousarray(np.asarray(a, dtype=dtype))
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TransitionModel:
    """Per-action row-stochastic matrices; per_action[a][i, j] = T(x_j | x_i, a)."""

    per_action: tuple

    def __init__(self, matrices):
        object.__setattr__(
            self, "per_action", tuple(_frozen(m) for m in matrices)
        )

    @property
    def n_actions(self):
        return len(self.per_action)

    @property
    def n_states(self):
        return self.per_action[0].shape[0]

    def stacked(self):
        """All matrices as one (|A|, |X|, |X|) array."""
        return np.stack(self.per_action)


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-state feature rows; values[x] = f(x)."""

    values: np.ndarray

    def __init__(self, values):
        object.__setattr__(self, "values", _frozen(values))
        if self.values.ndim != 2:
            raise ValueError("feature matrix must be 2-D (states x features)")

    @property
    def feature_dim(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class Trajectory:
    """Ordered (state, action) pairs observed from a demonstrator."""

    steps: np.ndarray

    def __init__(self, steps):
        arr = np.asarray(steps, dtype=np.int64).reshape(-1, 2)
        if len(arr) < 1:
            raise ValueError("trajectory must contain at least one step")
        object.__setattr__(self, "steps", _frozen(arr, dtype=np.int64))

    def __len__(self):
        return self.steps.shape[0]

    @property
    def states(self):
        return self.steps[:, 0]

    @property
    def actions(self):
        return self.steps[:, 1]


@dataclass(frozen=True)
class CCPTable:
    """Empirical conditional choice probabilities sigma(a|x) plus raw counts."""

    probs: np.ndarray
    support_counts: np.ndarray

    def __init__(self, probs, support_counts):
        object.__setattr__(self, "probs", _frozen(probs))
        object.__setattr__(
            self, "support_counts", _frozen(support_counts, dtype=np.int64)
        )

    @property
    def n_states(self):
        return self.probs.shape[0]

    @property
    def n_actions(self):
        return self.probs.shape[1]


@dataclass(frozen=True)
class ExAnteValue:
    """Shock-integrated value function, one entry per state."""

    values: np.ndarray

    def __init__(self, values):
        object.__setattr__(self, "values", _frozen(values).reshape(-1))


@dataclass(frozen=True)
class SoftPolicy:
    """Model-implied choice probabilities pi(a|x), row-stochastic."""

    probs: np.ndarray

    def __init__(self, probs):
        object.__setattr__(self, "probs", _frozen(probs))


@dataclass(frozen=True)
class DdcModel:
    n_states: int
    n_actions: int
    transitions: TransitionModel
    discount: float
    features: FeatureMatrix
    initial_dist: np.ndarray
    goal_states: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "initial_dist", _frozen(self.initial_dist))
        object.__setattr__(self, "goal_states", frozenset(self.goal_states))


def validate_model(model):
    """Check every structural invariant; returns a list of violation strings.

    An empty list means the model is well-formed. This reports rather than
    raises so callers can surface all problems at once.
    """
    report = []
    if model.n_states < 1:
        report.append("n_states must be positive")
    if model.n_actions < 1:
        report.append("n_actions must be positive")
    if not (0.0 <= model.discount < 1.0):
        report.append(
            f"discount must lie in [0, 1); got {model.discount} "
            "(discount >= 1 makes the value operator non-invertible)"
        )
    if model.transitions.n_actions != model.n_actions:
        report.append("transition model action count mismatch")
    for a, mat in enumerate(model.transitions.per_action):
        if mat.shape != (model.n_states, model.n_states):
            report.append(f"transition matrix for action {a} has wrong shape")
            continue
        if np.any(mat < 0.0) or np.any(mat > 1.0):
            report.append(f"transition matrix for action {a} has entries outside [0, 1]")
        sums = mat.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
        for row in bad[:5]:
            report.append(
                f"transition row {row} for action {a} sums to {sums[row]:.6g}, not 1"
            )
    if model.features.values.shape[0] != model.n_states:
        report.append("feature matrix row count does not match n_states")
    if not np.all(np.isfinite(model.features.values)):
        report.append("feature matrix contains non-finite entries")
    if model.initial_dist.shape != (model.n_states,):
        report.append("initial distribution has wrong length")
    else:
        if np.any(model.initial_dist < 0.0):
            report.append("initial distribution has negative entries")
        if abs(model.initial_dist.sum() - 1.0) > ROW_SUM_TOL:
            report.append(
                f"initial distribution sums to {model.initial_dist.sum():.6g}, not 1"
            )
    for g in model.goal_states:
        if not (0 <= g < model.n_states):
            report.append(f"goal state {g} out of range")
    return report


def expected_next_value(model, vbar, action):
    """T(a) . Vbar, the expected next-period ex-ante value per state."""
    v = vbar.values if isinstance(vbar, ExAnteValue) else np.asarray(vbar, dtype=float)
    mat = model.transitions.per_action[action]
    if v.shape != (model.n_states,):
        raise ValueError(
            f"value vector has length {v.shape}, expected ({model.n_states},)"
        )
    return mat @ v


# ---------------------------------------------------------------------------
# Serialization. Trajectories: a JSON array of trajectories, each an array of
# [state, action] pairs. Models: dimensions, discount, flattened transition
# tensor, feature matrix, initial distribution, and goal states.
# ---------------------------------------------------------------------------


def trajectories_to_json(trajectories):
    return [[[int(s), int(a)] for s, a in t.steps] for t in trajectories]


def trajectories_from_json(data):
    return [Trajectory(t) for t in data]


def save_trajectories(path, trajectories):
    with open(path, "w") as fh:
        json.dump(trajectories_to_json(trajectories), fh)


def load_trajectories(path):
    with open(path) as fh:
        return trajectories_from_json(json.load(fh))


def model_to_json(model):
    return {
        "n_states": model.n_states,
        "n_actions": model.n_actions,
        "discount": model.discount,
        "transitions": [m.ravel().tolist() for m in model.transitions.per_action],
        "features": model.features.values.tolist(),
        "initial_dist": model.initial_dist.tolist(),
        "goal_states": sorted(model.goal_states),
    }


def model_from_json(data):
    n = data["n_states"]
    mats = [np.asarray(m, dtype=float).reshape(n, n) for m in data["transitions"]]
    return DdcModel(
        n_states=n,
        n_actions=data["n_actions"],
        transitions=TransitionModel(mats),
        discount=float(data["discount"]),
        features=FeatureMatrix(np.asarray(data["features"], dtype=float)),
        initial_dist=np.asarray(data["initial_dist"], dtype=float),
        goal_states=frozenset(data["goal_states"]),
    )


def save_model(path, model):
    with open(path, "w") as fh:
        json.dump(model_to_json(model), fh)


def load_model(path):
    with open(path) as fh:
        return model_from_json(json.load(fh))
