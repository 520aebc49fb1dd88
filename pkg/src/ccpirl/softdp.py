"""Soft (log-sum-exp) dynamic programming for DDC models.

The backup operator is

    Vbar'(x) = log sum_a exp( r(x,a) + beta * (T(a) Vbar)(x) ) + EULER_GAMMA

which is a sup-norm contraction with modulus beta, so iterating it converges
for beta < 1. Sweeps are Jacobi (no in-place updates), so per-state work is
order-independent. The additive Euler-gamma constant is the mean of the
standard Gumbel shock and is a module constant, not a tunable.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import MaxSweepsExceeded
from .instrumentation import counters
from .model import ExAnteValue, SoftPolicy

EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class SoftDpConfig:
    tolerance: float = 1e-6
    max_sweeps: int = 10000


@dataclass(frozen=True)
class ChoiceValues:
    """q(x, a) = r(x, a) + beta * E[Vbar(x') | x, a]."""

    q: np.ndarray


def _check_rewards(model, rewards):
    r = np.asarray(rewards, dtype=float)
    if r.shape != (model.n_states, model.n_actions):
        raise ValueError(
            f"reward table shape {r.shape} does not match "
            f"({model.n_states}, {model.n_actions})"
        )
    return r


def _next_values(model, v):
    """(|X|, |A|) matrix of (T(a) v)(x)."""
    return np.column_stack([mat @ v for mat in model.transitions.per_action])


def soft_bellman_backup(model, rewards, vbar):
    """One application of the soft Bellman operator."""
    r = _check_rewards(model, rewards)
    v = vbar.values if isinstance(vbar, ExAnteValue) else np.asarray(vbar, dtype=float)
    q = r + model.discount * _next_values(model, v)
    return ExAnteValue(logsumexp(q, axis=1) + EULER_GAMMA)


def solve_soft_vi(model, rewards, config=None, v0=None):
    """Iterate the soft backup to its fixed point.

    Returns (ExAnteValue, sweep_count). Raises MaxSweepsExceeded (carrying
    the last iterate and residual) if the sup-norm tolerance is not reached.
    """
    cfg = config or SoftDpConfig()
    r = _check_rewards(model, rewards)
    counters.soft_vi_solves += 1
    beta = model.discount
    mats = model.transitions.per_action
    v = np.zeros(model.n_states) if v0 is None else np.asarray(v0, dtype=float).copy()
    for sweep in range(1, cfg.max_sweeps + 1):
        q = r + beta * np.column_stack([m @ v for m in mats])
        v_new = logsumexp(q, axis=1) + EULER_GAMMA
        residual = np.max(np.abs(v_new - v))
        v = v_new
        if residual < cfg.tolerance:
            return ExAnteValue(v), sweep
    raise MaxSweepsExceeded(
        f"soft value iteration did not reach {cfg.tolerance:g} "
        f"in {cfg.max_sweeps} sweeps (residual {residual:g})",
        last_iterate=ExAnteValue(v),
        residual=residual,
    )


def choice_values(model, rewards, vbar):
    r = _check_rewards(model, rewards)
    v = vbar.values if isinstance(vbar, ExAnteValue) else np.asarray(vbar, dtype=float)
    return ChoiceValues(r + model.discount * _next_values(model, v))


def policy_from_values(q):
    """Row-wise softmax of the choice-specific values.

    Computed with a per-row max shift so rows with entries near +-700 still
    normalize exactly.
    """
    vals = q.q if isinstance(q, ChoiceValues) else np.asarray(q, dtype=float)
    shifted = vals - vals.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return SoftPolicy(e / e.sum(axis=1, keepdims=True))


def solve_policy(model, rewards, config=None):
    """Convenience: fixed point plus its induced policy in one call."""
    vbar, sweeps = solve_soft_vi(model, rewards, config)
    pol = policy_from_values(choice_values(model, rewards, vbar))
    return vbar, pol, sweeps
