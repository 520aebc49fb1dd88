"""CCP-based closed form for the ex-ante value function.

With sigma the choice probabilities, the value fixed point is linear:

    Vbar = [I - beta * F]^{-1} b,
    F    = sum_a diag(sigma(a|.)) T(a)          (row-stochastic),
    b(x) = sum_a sigma(a|x) (r(x,a) + shock_correction(a|x)).

The inverse depends only on sigma, beta, and T, so it is built once and
reused for every reward evaluation. Direct mode factorizes (I - beta*F)
(materializing the explicit inverse only for small state spaces); iterative
mode stores F and solves v = b + beta*F*v by successive approximation, which
scales better for very large state spaces.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .ccp import expected_shock
from .errors import MaxSweepsExceeded, SingularMatrix
from .instrumentation import counters
from .model import ExAnteValue

# Direct mode materializes the inverse below this size; above it, keeps LU
# factors and back-substitutes per right-hand side.
MATERIALIZE_MAX = 256
# Auto mode switches to successive approximation above this size.
DIRECT_MODE_MAX = 4096

ITERATIVE_TOLERANCE = 1e-8
ITERATIVE_MAX_SWEEPS = 1_000_000


@dataclass
class HotzMillerOperator:
    mode: str  # "direct" or "iterative"
    beta: float
    ccp: object
    policy_transition: np.ndarray  # F, row-stochastic
    shock_correction: np.ndarray  # (|X|, |A|)
    inverse_matrix: np.ndarray = None  # direct mode, small systems only
    lu_factors: tuple = None  # direct mode, large systems
    tolerance: float = ITERATIVE_TOLERANCE
    max_sweeps: int = ITERATIVE_MAX_SWEEPS


def build_operator(model, ccp, mode="auto"):
    """Assemble F and the one-time inverse (or its factorization).

    The elementwise sigma-weighting of each transition block is a diagonal
    row scaling: row x of T(a) is multiplied by sigma(a|x).
    """
    if mode not in ("auto", "direct", "iterative"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "auto":
        mode = "direct" if model.n_states <= DIRECT_MODE_MAX else "iterative"
    counters.operator_builds += 1

    sigma = ccp.probs
    n = model.n_states
    F = np.zeros((n, n))
    for a, mat in enumerate(model.transitions.per_action):
        F += sigma[:, a, None] * mat
    shock = expected_shock(ccp)

    op = HotzMillerOperator(
        mode=mode,
        beta=model.discount,
        ccp=ccp,
        policy_transition=F,
        shock_correction=shock,
    )
    if mode == "direct":
        system = np.eye(n) - model.discount * F
        try:
            counters.factorizations += 1
            lu, piv = scipy.linalg.lu_factor(system)
        except (scipy.linalg.LinAlgError, ValueError) as exc:
            raise SingularMatrix(f"factorization of I - beta*F failed: {exc}") from exc
        if not np.all(np.isfinite(lu)):
            raise SingularMatrix("factorization of I - beta*F produced non-finite factors")
        if n <= MATERIALIZE_MAX:
            op.inverse_matrix = scipy.linalg.lu_solve((lu, piv), np.eye(n))
        else:
            op.lu_factors = (lu, piv)
    return op


def weighted_flow_reward(op, rewards):
    """b(x) = sum_a sigma(a|x) (r(x,a) + shock_correction(a|x))."""
    r = np.asarray(rewards, dtype=float)
    return np.sum(op.ccp.probs * (r + op.shock_correction), axis=1)


def exante_value(op, rewards):
    """Evaluate Vbar for a reward table without any dynamic programming."""
    counters.exante_evals += 1
    b = weighted_flow_reward(op, rewards)
    if op.mode == "direct":
        if op.inverse_matrix is not None:
            v = op.inverse_matrix @ b
        else:
            v = scipy.linalg.lu_solve(op.lu_factors, b)
    else:
        v = iterative_inverse_apply(
            op.policy_transition, op.beta, b, op.tolerance, op.max_sweeps
        )
    return ExAnteValue(v)


def iterative_inverse_apply(F, beta, b, tolerance=ITERATIVE_TOLERANCE,
                            max_sweeps=ITERATIVE_MAX_SWEEPS):
    """Solve v = b + beta*F*v by successive approximation.

    Stops when the residual drops below tolerance*(1-beta), which bounds the
    error of v itself (not just the residual) by the tolerance.
    """
    b = np.asarray(b, dtype=float)
    threshold = tolerance * (1.0 - beta)
    v = b.copy()
    for _ in range(max_sweeps):
        v_next = b + beta * (F @ v)
        residual = np.max(np.abs(v_next - v))
        v = v_next
        if residual < threshold:
            return v
    raise MaxSweepsExceeded(
        f"successive approximation did not reach residual {threshold:g} "
        f"in {max_sweeps} sweeps (residual {residual:g})",
        last_iterate=v,
        residual=residual,
    )
