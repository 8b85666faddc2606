"""Negativity of the Wigner field and coin-walker entanglement entropy."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from .walk import CoinOperator, InitialStateSpec, WalkState, evolve, step
from .wigner import (
    PhaseSpaceGrid,
    WignerField,
    _half_range_mask,
    wigner_from_state,
    wigner_step,
)

__all__ = [
    "EigenPair2",
    "InconsistentFieldError",
    "herm2_eigenvalues",
    "negativity",
    "negativity_series",
    "coin_density",
    "entanglement_entropy",
    "entropy_series",
]

NORMALIZATION_TOL = 1e-6
CLAMP_TOL = 1e-10


class InconsistentFieldError(ValueError):
    """The field does not integrate to unit trace over ``[-pi/2, pi/2)``."""


class EigenPair2(NamedTuple):
    lambda1: float | NDArray[np.float64]
    lambda2: float | NDArray[np.float64]


def herm2_eigenvalues(m) -> EigenPair2:
    """
    Closed-form eigenvalues of Hermitian 2x2 matrices, ``lambda1 >= lambda2``.

    ``lambda = h +- sqrt(d^2 + |c|^2)`` with ``h`` the mean and ``d`` the
    half-difference of the diagonal and ``c`` the upper off-diagonal entry.
    Works elementwise on arrays of shape ``(..., 2, 2)``.
    """
    m = np.asarray(m)
    rr = m[..., 0, 0].real
    ll = m[..., 1, 1].real
    h = 0.5 * (rr + ll)
    d = 0.5 * (rr - ll)
    r = np.hypot(d, np.abs(m[..., 0, 1]))
    return EigenPair2(h + r, h - r)


def negativity(field: WignerField) -> float:
    """
    Negative volume ``sum_n int_{-pi/2}^{pi/2} (||W|| - Tr W) dk``.

    ``||W||`` is the trace norm, ``|lambda1| + |lambda2|`` for Hermitian W.
    The integral is the midpoint rule on the grid points inside
    ``[-pi/2, pi/2)``.

    Raises
    ------
    InconsistentFieldError
        If ``sum_n int Tr W dk`` over the same range is off from 1 by more
        than 1e-6.
    """
    mask = _half_range_mask(field.grid)
    lam1, lam2 = herm2_eigenvalues(field.values[:, mask])
    dk = field.grid.dk
    total = float(np.sum(lam1 + lam2) * dk)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise InconsistentFieldError(
            f"field trace integrates to {total!r} over [-pi/2, pi/2), expected 1"
        )
    # |x| - x = 2 max(-x, 0)
    neg = np.maximum(-lam1, 0.0) + np.maximum(-lam2, 0.0)
    return float(2.0 * np.sum(neg) * dk)


def _initial(initial: InitialStateSpec, t_max: int) -> WalkState:
    return initial.build(initial.radius + t_max + 1)


def negativity_series(
    initial: InitialStateSpec,
    coin: CoinOperator,
    t_max: int,
    k_points: int,
    method: str = "recursion",
) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
    """
    Negativity at ``t = 0..t_max``.

    ``method="recursion"`` steps one phase-space field forward;
    ``"amplitude"`` evolves the amplitudes and re-transforms every step.
    """
    if t_max < 0:
        raise ValueError(f"t_max must be non-negative, got {t_max}")
    state = _initial(initial, t_max)
    grid = PhaseSpaceGrid.for_state(state, k_points)
    deltas = np.empty(t_max + 1)
    if method == "recursion":
        field = wigner_from_state(state, grid)
        for t in range(t_max + 1):
            if t:
                field = wigner_step(field, coin)
            deltas[t] = negativity(field)
    elif method == "amplitude":
        for t in range(t_max + 1):
            if t:
                state = step(state, coin)
            deltas[t] = negativity(wigner_from_state(state, grid))
    else:
        raise ValueError(f"unknown evolution method {method!r}")
    return np.arange(t_max + 1), deltas


def coin_density(state: WalkState) -> NDArray[np.complex128]:
    """Reduced coin density matrix, positions traced out."""
    psi = state.spinors
    return np.einsum("na,nb->ab", psi, np.conj(psi))


def entanglement_entropy(state: WalkState) -> float:
    """
    Von Neumann entropy (bits) of the reduced coin state.

    Eigenvalues are clamped into [0, 1] before taking ``log2``; a clamp
    larger than 1e-10 means the state was not normalized and raises
    ``ValueError``.
    """
    lam = np.array(herm2_eigenvalues(coin_density(state)))
    clamped = np.clip(lam, 0.0, 1.0)
    if np.max(np.abs(clamped - lam)) > CLAMP_TOL:
        raise ValueError(f"coin density eigenvalues {lam} fall outside [0, 1]")
    nz = clamped[clamped > 0]
    return float(max(0.0, -np.sum(nz * np.log2(nz))))


def entropy_series(
    initial: InitialStateSpec, coin: CoinOperator, t_max: int
) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
    """Entanglement entropy at ``t = 0..t_max`` from amplitude evolution."""
    if t_max < 0:
        raise ValueError(f"t_max must be non-negative, got {t_max}")
    state = _initial(initial, t_max)
    out = np.empty(t_max + 1)
    for t in range(t_max + 1):
        if t:
            state = step(state, coin)
        out[t] = entanglement_entropy(state)
    return np.arange(t_max + 1), out
