"""Projection of candidate dispatches onto the power-balance constraint.

Both population solvers clamp candidate powers to the unit limits and then
call repair_balance, so every vector they evaluate satisfies the limits
exactly and carries a balance residual below BALANCE_TOL.
"""

from __future__ import annotations

import numpy as np

from .model import BALANCE_TOL, DispatchProblem

# Proportional-scaling rounds before falling back to direct assignment.
SCALE_ROUNDS_LOSSLESS = 10
SCALE_ROUNDS_LOSSY = 20


def _target(problem: DispatchProblem, p: np.ndarray) -> float:
    # generation must cover demand plus the loss it induces
    if problem.losses is None:
        return problem.demand
    return problem.demand + problem.losses.loss(p)


def repair_balance(
    problem: DispatchProblem, powers: np.ndarray, tol: float = BALANCE_TOL
) -> np.ndarray:
    """Return powers clamped to limits and scaled onto the balance constraint.

    Powers are clipped, then repeatedly rescaled by target/total and
    re-clipped (a fixed point on the lossy target when B is present).  Any
    residual the scaling cannot remove, because clipping keeps re-activating
    limits, is assigned to units in order of headroom toward the violated
    side.
    """
    lo, hi = problem.p_min_arr, problem.p_max_arr
    p = np.clip(np.asarray(powers, dtype=float), lo, hi)
    rounds = SCALE_ROUNDS_LOSSLESS if problem.losses is None else SCALE_ROUNDS_LOSSY
    for _ in range(rounds):
        target = _target(problem, p)
        total = p.sum()
        if abs(total - target) <= tol:
            return p
        if total <= 0.0:
            p = np.clip(np.full_like(p, target / p.size), lo, hi)
        else:
            p = np.clip(p * (target / total), lo, hi)
    return _assign_residual(problem, p, tol)


def _assign_residual(problem: DispatchProblem, p: np.ndarray, tol: float) -> np.ndarray:
    """Move the leftover residual onto the units with the most headroom."""
    lo, hi = problem.p_min_arr, problem.p_max_arr
    for _ in range(8 * p.size):
        residual = p.sum() - _target(problem, p)
        if abs(residual) <= tol:
            return p
        headroom = (p - lo) if residual > 0 else (hi - p)
        j = int(np.argmax(headroom))
        if headroom[j] <= 0:
            return p  # no capacity left in the needed direction
        # Newton step on the single-unit balance; slope is exactly 1 in the
        # lossless case, so one assignment lands inside tol.
        slope = 1.0
        if problem.losses is not None:
            slope -= 2.0 * float(problem.losses.b[j] @ p)
            if abs(slope) < 1e-9:
                slope = 1.0
        p[j] = np.clip(p[j] - residual / slope, lo[j], hi[j])
    return p


def repair_batch(
    problem: DispatchProblem, P: np.ndarray, tol: float = BALANCE_TOL
) -> np.ndarray:
    """repair_balance applied to each row of P, vectorized on the common path."""
    lo, hi = problem.p_min_arr, problem.p_max_arr
    P = np.clip(np.asarray(P, dtype=float), lo, hi)
    rounds = SCALE_ROUNDS_LOSSLESS if problem.losses is None else SCALE_ROUNDS_LOSSY
    for _ in range(rounds):
        if problem.losses is None:
            target = np.full(P.shape[0], problem.demand)
        else:
            target = problem.demand + np.einsum("ij,jk,ik->i", P, problem.losses.b, P)
        total = P.sum(axis=1)
        off = np.abs(total - target) > tol
        if not off.any():
            return P
        safe = np.where(total > 0, total, 1.0)
        scaled = np.clip(P * (target / safe)[:, None], lo, hi)
        P = np.where(off[:, None], scaled, P)
    # rows the scaling could not settle get the per-row fallback
    for i in range(P.shape[0]):
        total = P[i].sum()
        if abs(total - _target(problem, P[i])) > tol:
            P[i] = _assign_residual(problem, P[i].copy(), tol)
    return P
