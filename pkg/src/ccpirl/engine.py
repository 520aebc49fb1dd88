"""The two IRL training loops and the state-visitation forward pass.

Both loops ascend the demonstration likelihood with the gradient
(demo feature expectations) - (model feature expectations). They differ
only in how the ex-ante value function is produced each iteration: the
classic loop re-solves the soft Bellman fixed point, the CCP loop evaluates
a linear operator built once from the empirical choice probabilities.
"""

import json
import time
from dataclasses import dataclass

import numpy as np

from .ccp import SmoothingConfig, estimate_ccp
from .errors import EmptyData, NonFiniteGradient
from .hotzmiller import build_operator, exante_value
from .model import SoftPolicy
from .rewards import Adam, GradientAscent, LinearReward, MlpReward, \
    broadcast_rewards, mlp_backward
from .softdp import SoftDpConfig, choice_values, policy_from_values, solve_soft_vi


@dataclass(frozen=True)
class VisitationResult:
    """Per-step state occupancies D^(0..n) and their sum."""

    per_step: list
    total: np.ndarray
    horizon: int


def forward_pass(model, policy, horizon):
    """Propagate the start distribution through policy and dynamics.

    D^(0) is the initial distribution. Before each propagation step the mass
    sitting on goal states is zeroed (arrivals still count in the layer they
    happen), then D^(i)(y) = sum_{x,a} T(y|x,a) pi(a|x) D^(i-1)(x).
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    probs = policy.probs if isinstance(policy, SoftPolicy) else np.asarray(policy)
    mats = model.transitions.per_action
    goals = sorted(model.goal_states)
    layers = [model.initial_dist.copy()]
    for _ in range(horizon):
        d = layers[-1].copy()
        if goals:
            d[goals] = 0.0
        weighted = probs * d[:, None]  # (X, A)
        nxt = np.zeros(model.n_states)
        for a, mat in enumerate(mats):
            nxt += mat.T @ weighted[:, a]
        layers.append(nxt)
    return VisitationResult(per_step=layers, total=np.sum(layers, axis=0),
                            horizon=horizon)


def demo_state_visits(trajectories, n_states):
    """Average per-trajectory state visit counts, as a length-|X| vector."""
    if not trajectories:
        raise EmptyData("no trajectories given")
    visits = np.zeros(n_states)
    for traj in trajectories:
        np.add.at(visits, traj.states, 1.0)
    return visits / len(trajectories)


def feature_expectations_from_demos(trajectories, features):
    """Per-trajectory sums of state features, averaged over trajectories."""
    return features.values.T @ demo_state_visits(trajectories, features.values.shape[0])


def feature_expectations_from_visitation(vis, features):
    return features.values.T @ vis.total


@dataclass
class IterationRecord:
    iteration: int
    nll: float
    grad_norm: float
    dp_seconds: float
    total_seconds: float
    cumulative_seconds: float


@dataclass
class TrainReport:
    algorithm: str
    records: list
    final_rewards: np.ndarray  # (|X|, |A|)
    final_policy: SoftPolicy
    setup_seconds: float
    horizon: int
    worker_count: int = 1

    @property
    def total_seconds(self):
        return self.setup_seconds + sum(r.total_seconds for r in self.records)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("iteration,nll,grad_norm,dp_seconds,total_seconds\n")
            for r in self.records:
                fh.write(
                    f"{r.iteration},{r.nll:.10g},{r.grad_norm:.10g},"
                    f"{r.dp_seconds:.6g},{r.total_seconds:.6g}\n"
                )


def _demo_nll(policy, trajectories):
    probs = policy.probs
    tiny = np.finfo(float).tiny
    total = 0.0
    for traj in trajectories:
        total -= np.log(np.maximum(probs[traj.states, traj.actions], tiny)).sum()
    return total / len(trajectories)


def default_horizon(trajectories):
    """Propagation steps matching the longest demonstration.

    A demo with L recorded steps occupies L state layers, so the forward
    pass propagates L-1 times; that keeps the demo and model visitation
    masses directly comparable.
    """
    return max(1, max(len(t) for t in trajectories) - 1)


def _gradient(reward_param, model, mu_demo, visit_demo, vis):
    if isinstance(reward_param, LinearReward):
        mu_model = feature_expectations_from_visitation(vis, model.features)
        grads = {"theta": mu_demo - mu_model}
    else:
        upstream = visit_demo - vis.total
        grads = mlp_backward(reward_param, model.features, upstream)
    for g in grads.values():
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(
                f"non-finite gradient encountered: { {k: [float(np.min(v)), float(np.max(v))] for k, v in grads.items()} }"
            )
    return grads


def _reward_table(reward_param, model):
    return broadcast_rewards(reward_param.state_rewards(model.features),
                             model.n_actions)


def train_maxent(model, trajectories, reward_param, optimizer, iterations,
                 horizon=None, dp_config=None, start_iteration=0):
    """Classic loop: one full soft-DP solve per gradient step."""
    if not trajectories:
        raise EmptyData("no trajectories given")
    dp_config = dp_config or SoftDpConfig()
    horizon = horizon or default_horizon(trajectories)
    mu_demo = feature_expectations_from_demos(trajectories, model.features)
    visit_demo = demo_state_visits(trajectories, model.n_states)

    records = []
    cumulative = 0.0
    policy = None
    if iterations == 0:
        # no-op training: evaluate the starting point once
        rewards = _reward_table(reward_param, model)
        vbar, _ = solve_soft_vi(model, rewards, dp_config)
        policy = policy_from_values(choice_values(model, rewards, vbar))
        records.append(IterationRecord(start_iteration,
                                       _demo_nll(policy, trajectories),
                                       float("nan"), 0.0, 0.0, 0.0))
    for it in range(start_iteration, start_iteration + iterations):
        t0 = time.perf_counter()
        rewards = _reward_table(reward_param, model)
        t_dp = time.perf_counter()
        vbar, _ = solve_soft_vi(model, rewards, dp_config)
        dp_seconds = time.perf_counter() - t_dp
        policy = policy_from_values(choice_values(model, rewards, vbar))
        nll = _demo_nll(policy, trajectories)
        vis = forward_pass(model, policy, horizon)
        grads = _gradient(reward_param, model, mu_demo, visit_demo, vis)
        reward_param.set_params(optimizer.step(reward_param.param_dict(), grads))
        total = time.perf_counter() - t0
        cumulative += total
        grad_norm = max(float(np.max(np.abs(g))) for g in grads.values())
        records.append(IterationRecord(it, nll, grad_norm, dp_seconds, total,
                                       cumulative))
    return TrainReport(
        algorithm="maxent",
        records=records,
        final_rewards=_reward_table(reward_param, model),
        final_policy=policy,
        setup_seconds=0.0,
        horizon=horizon,
    )


def train_ccp(model, trajectories, reward_param, optimizer, iterations,
              horizon=None, smoothing=None, ccp_table=None,
              operator_mode="auto", start_iteration=0):
    """CCP loop: choice probabilities estimated once, the value operator
    built once, and only matrix arithmetic inside the iteration."""
    if not trajectories:
        raise EmptyData("no trajectories given")
    smoothing = smoothing or SmoothingConfig()
    horizon = horizon or default_horizon(trajectories)
    mu_demo = feature_expectations_from_demos(trajectories, model.features)
    visit_demo = demo_state_visits(trajectories, model.n_states)

    t_setup = time.perf_counter()
    if ccp_table is None:
        ccp_table = estimate_ccp(trajectories, model.n_states, model.n_actions,
                                 smoothing)
    op = build_operator(model, ccp_table, mode=operator_mode)
    setup_seconds = time.perf_counter() - t_setup

    records = []
    cumulative = 0.0
    policy = None
    if iterations == 0:
        rewards = _reward_table(reward_param, model)
        vbar = exante_value(op, rewards)
        policy = policy_from_values(choice_values(model, rewards, vbar))
        records.append(IterationRecord(start_iteration,
                                       _demo_nll(policy, trajectories),
                                       float("nan"), 0.0, 0.0, 0.0))
    for it in range(start_iteration, start_iteration + iterations):
        t0 = time.perf_counter()
        rewards = _reward_table(reward_param, model)
        t_dp = time.perf_counter()
        vbar = exante_value(op, rewards)
        dp_seconds = time.perf_counter() - t_dp
        policy = policy_from_values(choice_values(model, rewards, vbar))
        nll = _demo_nll(policy, trajectories)
        vis = forward_pass(model, policy, horizon)
        grads = _gradient(reward_param, model, mu_demo, visit_demo, vis)
        reward_param.set_params(optimizer.step(reward_param.param_dict(), grads))
        total = time.perf_counter() - t0
        cumulative += total
        grad_norm = max(float(np.max(np.abs(g))) for g in grads.values())
        records.append(IterationRecord(it, nll, grad_norm, dp_seconds, total,
                                       cumulative))
    return TrainReport(
        algorithm="ccp",
        records=records,
        final_rewards=_reward_table(reward_param, model),
        final_policy=policy,
        setup_seconds=setup_seconds,
        horizon=horizon,
    )


# ---------------------------------------------------------------------------
# Checkpoints: enough state to resume a run and reproduce it exactly.
# ---------------------------------------------------------------------------


def save_checkpoint(path, reward_param, optimizer, iteration, seed=None):
    payload = {
        "reward_kind": "linear" if isinstance(reward_param, LinearReward) else "mlp",
        "params": {k: np.asarray(v).tolist()
                   for k, v in reward_param.param_dict().items()},
        "optimizer": optimizer.state_dict(),
        "iteration": iteration,
        "seed": seed,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_checkpoint(path):
    with open(path) as fh:
        data = json.load(fh)
    params = {k: np.asarray(v, dtype=float) for k, v in data["params"].items()}
    if data["reward_kind"] == "linear":
        reward = LinearReward(params["theta"])
    else:
        reward = MlpReward(params["w1"], params["b1"], params["w2"],
                           np.asarray(params["b2"]).ravel()[0])
    opt_data = data["optimizer"]
    optimizer = GradientAscent() if opt_data["kind"] == "sgd" else Adam()
    optimizer.load_state_dict(opt_data)
    return reward, optimizer, int(data["iteration"]), data["seed"]
