"""The core identity: choice probabilities determine the value function.

Solves a windy gridworld with soft value iteration, feeds the resulting
choice probabilities into the one-shot linear inversion, and shows that
both roads lead to the same ex-ante value function.
"""

import numpy as np

from ccpirl import (
    GridSpec,
    build_fixed_target,
    build_operator,
    broadcast_rewards,
    choice_values,
    exante_value,
    policy_from_values,
    solve_soft_vi,
)
from ccpirl.model import CCPTable
from ccpirl.softdp import SoftDpConfig


def main():
    model, true_reward = build_fixed_target(GridSpec(n=8, seed=0))
    rewards = broadcast_rewards(true_reward.values, model.n_actions)

    vbar, sweeps = solve_soft_vi(model, rewards,
                                 SoftDpConfig(tolerance=1e-10))
    print(f"soft value iteration converged in {sweeps} sweeps")

    policy = policy_from_values(choice_values(model, rewards, vbar))
    table = CCPTable(policy.probs,
                     np.zeros_like(policy.probs, dtype=np.int64))
    op = build_operator(model, table)
    v_inverted = exante_value(op, rewards)

    gap = np.max(np.abs(v_inverted.values - vbar.values))
    print(f"inversion reproduces the fixed point, sup-norm gap {gap:.2e}")
    print("value at the start corner:",
          round(float(vbar.values[0]), 4),
          "| at the goal corner:",
          round(float(vbar.values[-1]), 4))


if __name__ == "__main__":
    main()
