"""Pairwise (SMO-style) solver for box-constrained quadratic duals.

Solves  min 0.5 * b^T Q b + p^T b  over  lo <= b <= hi  with sum(b) held at
its initial value. Every SVM-family dual used in this package (one-class
SVM, data-description sphere with optional negatives, binary soft-margin
SVM) reduces to this form after folding the +-1 signs into the variables.

Each step transfers mass between the most KKT-violating pair, chosen by
first-order violation, so the solve is deterministic for a given input.
"""
from __future__ import annotations

import numpy as np


class ConvergenceError(RuntimeError):
    """Solver failed to reach the KKT tolerance within the iteration budget."""

    def __init__(self, message: str, kkt_violation: float):
        super().__init__(f"{message} (final KKT violation {kkt_violation:.3e})")
        self.kkt_violation = kkt_violation


def kkt_violation(Q: np.ndarray, p: np.ndarray, lo: np.ndarray, hi: np.ndarray, beta: np.ndarray) -> float:
    """First-order KKT violation: max gradient over decreasable coordinates
    minus min gradient over increasable ones (<= 0 at an exact optimum)."""
    grad = Q @ beta + p
    can_dn = beta > lo
    can_up = beta < hi
    if not can_dn.any() or not can_up.any():
        return 0.0
    return float(grad[can_dn].max() - grad[can_up].min())


def smo_minimize(
    Q: np.ndarray,
    p: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    beta0: np.ndarray,
    tol: float = 1e-6,
    max_iter: int = 100_000,
):
    """Run pairwise updates until the KKT violation drops below ``tol``.

    Returns (beta, grad, iterations). ``beta0`` must be feasible; the
    equality constraint sum(b) = sum(beta0) is preserved by construction.
    """
    Q = np.asarray(Q, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    beta = np.array(beta0, dtype=np.float64)
    n = beta.shape[0]
    if np.any(beta < lo) or np.any(beta > hi):
        raise ValueError("beta0 violates the box constraints")

    grad = Q @ beta + p
    neg_inf = -np.inf
    pos_inf = np.inf
    violation = np.inf
    for iteration in range(max_iter):
        can_dn = beta > lo
        can_up = beta < hi
        if not can_dn.any() or not can_up.any():
            return beta, grad, iteration
        i = int(np.where(can_dn, grad, neg_inf).argmax())
        j = int(np.where(can_up, grad, pos_inf).argmin())
        violation = grad[i] - grad[j]
        if violation <= tol:
            return beta, grad, iteration

        eta = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
        if eta < 1e-12:
            eta = 1e-12  # PSD guards; keeps the step finite on degenerate pairs
        room_i = beta[i] - lo[i]
        room_j = hi[j] - beta[j]
        delta = min(violation / eta, room_i, room_j)
        # snap exactly onto a bound when it is the binding limit
        if delta == room_i:
            beta[i] = lo[i]
        else:
            beta[i] -= delta
        if delta == room_j:
            beta[j] = hi[j]
        else:
            beta[j] += delta
        grad += delta * (Q[:, j] - Q[:, i])

    raise ConvergenceError(f"SMO did not converge in {max_iter} iterations", float(violation))
