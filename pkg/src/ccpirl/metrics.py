"""Evaluation metrics and the wall-clock benchmark harness.

NLL scores demonstration actions under a candidate policy. EVD compares,
under the true reward, the value of the hard-optimal policy against the
value of the learned policy, averaged over the start distribution. The
benchmark harness times the two trainers on identical demonstrations and
reports paired speedups as CSV.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import EmptyData, MaxSweepsExceeded, SingularMatrix
from .model import SoftPolicy, trajectories_to_json
from .rewards import broadcast_rewards

BENCH_CSV_HEADER = (
    "algorithm,env,n_states,n_actions,beta,iterations,trajectories,"
    "setup_s,total_s,nll,evd,seed,repeat"
)


def nll(policy, trajectories):
    """Average over trajectories of -sum_t log pi(a_t | x_t).

    Probabilities are floored at the smallest positive double so unobserved
    actions cannot produce infinities.
    """
    if not trajectories:
        raise EmptyData("no trajectories to score")
    probs = policy.probs if isinstance(policy, SoftPolicy) else np.asarray(policy)
    tiny = np.finfo(float).tiny
    total = 0.0
    for traj in trajectories:
        total -= np.log(np.maximum(probs[traj.states, traj.actions], tiny)).sum()
    return total / len(trajectories)


def uniform_policy(n_states, n_actions):
    return SoftPolicy(np.full((n_states, n_actions), 1.0 / n_actions))


def _reward_table(model, rewards):
    r = np.asarray(getattr(rewards, "values", rewards), dtype=float)
    if r.ndim == 1:
        r = broadcast_rewards(r, model.n_actions)
    return r


def hard_value_iteration(model, rewards, tolerance=1e-8, max_sweeps=100000):
    """Standard max-Bellman fixed point; no shocks, no entropy term.

    Returns the optimal values and the greedy policy (deterministic,
    encoded as a one-hot row-stochastic matrix).
    """
    r = _reward_table(model, rewards)
    beta = model.discount
    mats = model.transitions.per_action
    v = np.zeros(model.n_states)
    for _ in range(max_sweeps):
        q = r + beta * np.column_stack([m @ v for m in mats])
        v_new = q.max(axis=1)
        residual = np.max(np.abs(v_new - v))
        v = v_new
        if residual < tolerance:
            greedy = q.argmax(axis=1)
            probs = np.zeros_like(q)
            probs[np.arange(model.n_states), greedy] = 1.0
            return v, SoftPolicy(probs)
    raise MaxSweepsExceeded(
        f"hard value iteration did not converge (residual {residual:g})",
        last_iterate=v, residual=residual,
    )


def policy_evaluation(model, rewards, policy):
    """Exact value of a fixed policy: solve (I - beta*T_pi) V = R_pi."""
    r = _reward_table(model, rewards)
    probs = policy.probs if isinstance(policy, SoftPolicy) else np.asarray(policy)
    n = model.n_states
    r_pi = np.sum(probs * r, axis=1)
    t_pi = np.zeros((n, n))
    for a, mat in enumerate(model.transitions.per_action):
        t_pi += probs[:, a, None] * mat
    try:
        return scipy.linalg.solve(np.eye(n) - model.discount * t_pi, r_pi)
    except scipy.linalg.LinAlgError as exc:  # unreachable for beta < 1
        raise SingularMatrix(str(exc)) from exc


def evd(model, true_reward, learned_policy):
    """Expected value difference under the true reward, from the start states."""
    v_star, _ = hard_value_iteration(model, true_reward)
    v_pi = policy_evaluation(model, true_reward, learned_policy)
    return float(model.initial_dist @ (v_star - v_pi))


@dataclass(frozen=True)
class EvalResult:
    nll: float
    evd: float
    n_eval_trajectories: int
    config_fingerprint: str = ""

    def to_json(self):
        return {
            "nll": self.nll,
            "evd": self.evd,
            "n_eval_trajectories": self.n_eval_trajectories,
            "config_fingerprint": self.config_fingerprint,
        }


# ---------------------------------------------------------------------------
# Benchmark harness
# ---------------------------------------------------------------------------


@dataclass
class BenchCell:
    """One (environment, size, beta) benchmark configuration."""

    env: str  # "fixed", "macro", "objectworld"
    n: int
    beta: float = 0.9
    iterations: int = 50
    n_trajectories: int = 64
    traj_length: int = None
    seed: int = 0
    wind: float = 0.3
    macro_size: int = 2
    n_colors: int = 2
    reward_model: str = "linear"  # "linear" or "mlp"
    learning_rate: float = None
    hidden_width: int = 32


@dataclass
class BenchSuiteConfig:
    name: str
    cells: list
    repeats: int = 3
    warmup: bool = True
    algorithms: tuple = ("maxent", "ccp")


@dataclass
class BenchRecord:
    algorithm: str
    env: str
    n_states: int
    n_actions: int
    beta: float
    iterations: int
    n_trajectories: int
    setup_seconds: float
    total_seconds: float
    min_seconds: float
    per_iteration_seconds: list
    nll: float
    evd: float
    seed: int
    repeat: int
    speedup: float = float("nan")
    demo_fingerprint: str = ""
    error: str = ""


def _build_cell_env(cell):
    from . import envs  # local import keeps module import graph acyclic

    if cell.env == "fixed":
        spec = envs.GridSpec(n=cell.n, wind=cell.wind, seed=cell.seed)
        model, true_reward = envs.build_fixed_target(spec, discount=cell.beta)
    elif cell.env == "macro":
        spec = envs.GridSpec(n=cell.n, wind=cell.wind, seed=cell.seed,
                             macro_size=cell.macro_size)
        model, true_reward = envs.build_macro_cell(spec, discount=cell.beta)
    elif cell.env == "objectworld":
        spec = envs.ObjectworldSpec(n=cell.n, n_colors=cell.n_colors,
                                    seed=cell.seed)
        model, true_reward = envs.build_objectworld(spec, discount=cell.beta)
    else:
        raise ValueError(f"unknown environment kind {cell.env!r}")
    return model, true_reward


def _make_reward_and_optimizer(cell, model):
    from .rewards import Adam, GradientAscent, LinearReward, MlpReward

    if cell.reward_model == "linear":
        reward = LinearReward(np.zeros(model.features.feature_dim))
        optimizer = GradientAscent(step_size=cell.learning_rate or 0.1)
    else:
        reward = MlpReward.init(model.features.feature_dim,
                                hidden_width=cell.hidden_width, seed=cell.seed)
        optimizer = Adam(step_size=cell.learning_rate or 1e-3)
    return reward, optimizer


def _run_one(cell, model, trajectories, algorithm):
    from .engine import train_ccp, train_maxent

    reward, optimizer = _make_reward_and_optimizer(cell, model)
    if algorithm == "maxent":
        return train_maxent(model, trajectories, reward, optimizer,
                            cell.iterations)
    return train_ccp(model, trajectories, reward, optimizer, cell.iterations)


def run_benchmark(suite, output_dir=None):
    """Time every cell for both algorithms on byte-identical demonstrations.

    Cells run strictly sequentially. Per algorithm: one optional warm-up run
    (untimed), then `repeats` timed runs; the paired speedup uses the mean
    of total times. Per-cell failures are recorded, not raised.
    """
    from . import envs
    from .model import load_trajectories, save_trajectories

    records = []
    for cell in suite.cells:
        try:
            model, true_reward = _build_cell_env(cell)
            traj_length = cell.traj_length or envs.default_traj_length(
                cell.env, cell.n)
            trajectories = envs.generate_experts(
                model, true_reward, cell.n_trajectories, traj_length,
                seed=cell.seed)
            demo_bytes = json.dumps(trajectories_to_json(trajectories)).encode()
            fingerprint = hashlib.sha256(demo_bytes).hexdigest()
            cell_records = {}
            for algorithm in suite.algorithms:
                if suite.warmup:
                    _run_one(cell, model, trajectories, algorithm)
                runs = []
                for rep in range(suite.repeats):
                    report = _run_one(cell, model, trajectories, algorithm)
                    runs.append(report)
                final_nll = nll(runs[-1].final_policy, trajectories)
                final_evd = evd(model, true_reward, runs[-1].final_policy)
                totals = [r.total_seconds for r in runs]
                recs = []
                for rep, report in enumerate(runs):
                    recs.append(BenchRecord(
                        algorithm=algorithm,
                        env=f"{cell.env}-n{cell.n}",
                        n_states=model.n_states,
                        n_actions=model.n_actions,
                        beta=cell.beta,
                        iterations=cell.iterations,
                        n_trajectories=cell.n_trajectories,
                        setup_seconds=report.setup_seconds,
                        total_seconds=report.total_seconds,
                        min_seconds=min(totals),
                        per_iteration_seconds=[r.total_seconds
                                               for r in report.records],
                        nll=final_nll,
                        evd=final_evd,
                        seed=cell.seed,
                        repeat=rep,
                        demo_fingerprint=fingerprint,
                    ))
                cell_records[algorithm] = recs
            if "maxent" in cell_records and "ccp" in cell_records:
                mean_maxent = np.mean([r.total_seconds
                                       for r in cell_records["maxent"]])
                mean_ccp = np.mean([r.total_seconds
                                    for r in cell_records["ccp"]])
                speedup = mean_maxent / mean_ccp
                for recs in cell_records.values():
                    for r in recs:
                        r.speedup = speedup
            for algorithm in suite.algorithms:
                records.extend(cell_records[algorithm])
        except Exception as exc:  # record the failure, keep the suite going
            records.append(BenchRecord(
                algorithm="-", env=f"{cell.env}-n{cell.n}", n_states=0,
                n_actions=0, beta=cell.beta, iterations=cell.iterations,
                n_trajectories=cell.n_trajectories, setup_seconds=0.0,
                total_seconds=0.0, min_seconds=0.0, per_iteration_seconds=[],
                nll=float("nan"), evd=float("nan"), seed=cell.seed, repeat=0,
                error=f"{type(exc).__name__}: {exc}",
            ))
    if output_dir is not None:
        write_benchmark_csv(records, suite, output_dir)
    return records


def write_benchmark_csv(records, suite, output_dir):
    import os

    os.makedirs(output_dir, exist_ok=True)
    csv_path = os.path.join(output_dir, f"{suite.name}.csv")
    with open(csv_path, "w") as fh:
        fh.write(BENCH_CSV_HEADER + "\n")
        for r in records:
            if r.error:
                continue
            fh.write(
                f"{r.algorithm},{r.env},{r.n_states},{r.n_actions},{r.beta},"
                f"{r.iterations},{r.n_trajectories},{r.setup_seconds:.6g},"
                f"{r.total_seconds:.6g},{r.nll:.10g},{r.evd:.10g},"
                f"{r.seed},{r.repeat}\n"
            )
    companion = {
        "name": suite.name,
        "repeats": suite.repeats,
        "warmup": suite.warmup,
        "algorithms": list(suite.algorithms),
        "cells": [vars(c) for c in suite.cells],
        "speedups": sorted({
            (r.env, r.beta): r.speedup for r in records if not r.error
        }.items(), key=str),
        "errors": [{"env": r.env, "error": r.error}
                   for r in records if r.error],
    }
    with open(os.path.join(output_dir, f"{suite.name}.config.json"), "w") as fh:
        json.dump(companion, fh, indent=2, default=str)
    return csv_path
