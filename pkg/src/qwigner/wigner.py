"""
Matrix-valued discrete Wigner function of a coined walk.

For a pure state with site spinors psi(l) the field is

    W(n, k) = (1/pi) e^{ikn} sum_l psi(l) psi(n-l)^dagger e^{-2ikl}

a Hermitian 2x2 matrix at every phase-space point (n, k).  Values are stored
as a complex array of shape ``(n_count, k_count, 2, 2)``; index 0 is the R
chirality and index 1 the L chirality.

Two independent routes produce the field at time t: transforming the evolved
amplitudes (:func:`wigner_from_state`) or stepping the t = 0 field with the
phase-space recursion (:func:`wigner_step`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np
from numpy.typing import NDArray

from .walk import CoinOperator, WalkState

__all__ = [
    "HermitianMatrix2",
    "PhaseSpaceGrid",
    "WignerField",
    "default_k_points",
    "wigner_from_state",
    "wigner_from_state_reference",
    "iter_wigner_rows",
    "wigner_step",
    "wigner_evolve",
    "position_marginal",
    "momentum_matrix",
    "momentum_amplitudes",
]

TWO_PI = 2.0 * math.pi
HERMITIAN_TOL = 1e-10
RESYMMETRIZE_ABOVE = 1e-12


def default_k_points(t_max: int) -> int:
    return max(512, 8 * (t_max + 1))


class HermitianMatrix2(NamedTuple):
    """Compact form of ``[[w_rr, w_rl], [conj(w_rl), w_ll]]``; fields may be arrays."""

    w_rr: float | NDArray[np.float64]
    w_ll: float | NDArray[np.float64]
    w_rl: complex | NDArray[np.complex128]

    @classmethod
    def from_matrix(cls, m) -> "HermitianMatrix2":
        m = np.asarray(m)
        return cls(m[..., 0, 0].real, m[..., 1, 1].real, m[..., 0, 1])

    def to_matrix(self) -> NDArray[np.complex128]:
        rr, ll, rl = np.broadcast_arrays(
            np.asarray(self.w_rr), np.asarray(self.w_ll), np.asarray(self.w_rl)
        )
        m = np.empty(rr.shape + (2, 2), dtype=np.complex128)
        m[..., 0, 0] = rr
        m[..., 1, 1] = ll
        m[..., 0, 1] = rl
        m[..., 1, 0] = np.conj(rl)
        return m


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """
    Lattice window ``[n_min, n_max]`` times a midpoint k-grid.

    ``k_j = k_min + (j + 1/2) (k_max - k_min) / k_count``.
    """

    n_min: int
    n_max: int
    k_count: int
    k_min: float = -math.pi
    k_max: float = math.pi

    def __post_init__(self):
        if self.n_max < self.n_min:
            raise ValueError(f"empty lattice window [{self.n_min}, {self.n_max}]")
        if self.k_count < 1:
            raise ValueError(f"k_count must be positive, got {self.k_count}")
        if not self.k_max > self.k_min:
            raise ValueError("k_max must exceed k_min")

    @classmethod
    def for_state(cls, state: WalkState, k_count: int) -> "PhaseSpaceGrid":
        """Window twice the state window, which holds every l + (n - l) pair."""
        return cls(2 * state.n_min, 2 * state.n_max, k_count)

    @property
    def n_count(self) -> int:
        return self.n_max - self.n_min + 1

    @property
    def n(self) -> NDArray[np.int64]:
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def dk(self) -> float:
        return (self.k_max - self.k_min) / self.k_count

    @property
    def k(self) -> NDArray[np.float64]:
        return self.k_min + (np.arange(self.k_count) + 0.5) * self.dk

    @property
    def full_period(self) -> bool:
        return abs(self.k_max - self.k_min - TWO_PI) < 1e-12

    def with_window(self, n_min: int, n_max: int) -> "PhaseSpaceGrid":
        return PhaseSpaceGrid(n_min, n_max, self.k_count, self.k_min, self.k_max)


@dataclass
class WignerField:
    """Wigner matrices on a :class:`PhaseSpaceGrid` at walk time ``t``."""

    grid: PhaseSpaceGrid
    values: NDArray[np.complex128] = field(repr=False)
    t: int = 0

    def __post_init__(self):
        shape = (self.grid.n_count, self.grid.k_count, 2, 2)
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {shape}")

    @classmethod
    def zeros(cls, grid: PhaseSpaceGrid, t: int = 0) -> "WignerField":
        return cls(grid, np.zeros((grid.n_count, grid.k_count, 2, 2), np.complex128), t)

    def copy(self) -> "WignerField":
        return WignerField(self.grid, self.values.copy(), self.t)

    def at(self, n: int) -> NDArray[np.complex128]:
        """Row of matrices at site ``n``, shape ``(k_count, 2, 2)``; zero outside the window."""
        i = n - self.grid.n_min
        if 0 <= i < self.grid.n_count:
            return self.values[i]
        return np.zeros((self.grid.k_count, 2, 2), np.complex128)

    def hermiticity_error(self) -> float:
        v = self.values
        return float(np.max(np.abs(v - np.conj(np.swapaxes(v, -1, -2))), initial=0.0))

    def odd_rows_vanish(self) -> bool:
        odd = (self.grid.n % 2) != 0
        return not np.any(self.values[odd])

    def windowed(self, n_min: int, n_max: int) -> "WignerField":
        """
        Same field on another lattice window.

        Raises
        ------
        ValueError
            If cropping would drop a nonzero row.
        """
        grid = self.grid.with_window(n_min, n_max)
        out = np.zeros((grid.n_count, grid.k_count, 2, 2), np.complex128)
        n = self.grid.n
        inside = (n >= n_min) & (n <= n_max)
        if self.values[~inside].any():
            raise ValueError("new window would drop nonzero rows")
        if inside.any():
            lo, hi = int(n[inside][0]), int(n[inside][-1])
            out[lo - n_min : hi - n_min + 1] = self.values[inside]
        return WignerField(grid, out, self.t)

    def trace_normalization(self) -> float:
        """``sum_n int_{-pi/2}^{pi/2} Tr W dk`` by the midpoint rule."""
        mask = _half_range_mask(self.grid)
        tr = self.values[:, mask, 0, 0].real + self.values[:, mask, 1, 1].real
        return float(np.sum(tr) * self.grid.dk)


def _half_range_mask(grid: PhaseSpaceGrid) -> NDArray[np.bool_]:
    # cell boundaries must fall on -pi/2 and pi/2 for the midpoint rule to apply
    edges = [(x - grid.k_min) / grid.dk for x in (-math.pi / 2, math.pi / 2)]
    aligned = all(abs(e - round(e)) < 1e-9 for e in edges)
    if not (aligned and grid.k_min <= -math.pi / 2 and grid.k_max >= math.pi / 2):
        raise ValueError(
            "k-grid cells do not tile [-pi/2, pi/2); use a full-period grid "
            "with k_count divisible by 4"
        )
    j = np.arange(grid.k_count)
    return (j >= round(edges[0])) & (j < round(edges[1]))


def _check_covers(state: WalkState, grid: PhaseSpaceGrid) -> tuple[int, int]:
    lo, hi = state.support()
    if grid.n_min > 2 * lo or grid.n_max < 2 * hi:
        raise ValueError(
            f"grid window [{grid.n_min}, {grid.n_max}] does not cover "
            f"[{2 * lo}, {2 * hi}] required by state support [{lo}, {hi}]"
        )
    return lo, hi


def _pair_products(psi: NDArray, l: NDArray, n_rows: NDArray) -> NDArray[np.complex128]:
    """``psi(l) psi(n - l)^dagger`` for every (n, l), shape ``(rows, L, 2, 2)``."""
    lo = int(l[0])
    idx = n_rows[:, None] - l[None, :] - lo
    valid = (idx >= 0) & (idx < l.size)
    partner = np.conj(psi[np.clip(idx, 0, l.size - 1)]) * valid[..., None]
    return psi[None, :, :, None] * partner[:, :, None, :]


def wigner_from_state_reference(state: WalkState, grid: PhaseSpaceGrid) -> WignerField:
    """Direct O(rows * sites * K) evaluation of the defining sum; the test oracle."""
    lo, hi = _check_covers(state, grid)
    l = np.arange(lo, hi + 1)
    psi = np.stack([state.a, state.b], axis=-1)[lo - state.n_min : hi - state.n_min + 1]
    k = grid.k
    field_ = WignerField.zeros(grid, state.t)
    phase_l = np.exp(-2j * np.outer(l, k))
    for i, n in enumerate(grid.n):
        prod = _pair_products(psi, l, np.array([n]))[0]
        if not prod.any():
            continue
        row = np.einsum("lk,lab->kab", phase_l, prod)
        field_.values[i] = row * (np.exp(1j * k * n) / math.pi)[:, None, None]
    return field_


def iter_wigner_rows(
    state: WalkState, grid: PhaseSpaceGrid, chunk: int = 64
) -> Iterator[tuple[NDArray[np.int64], NDArray[np.complex128]]]:
    """
    Yield ``(n_values, rows)`` blocks of the field computed by FFT.

    On a full-period midpoint grid ``e^{-2i k_j l}`` factors into a per-l
    twiddle times the length-K DFT kernel at index ``2l mod K``, so each row
    is one FFT.  Colliding indices (K small) are accumulated, which keeps the
    evaluation exact for any K.
    """
    if not grid.full_period:
        raise ValueError("FFT evaluation needs a k-grid spanning a full period")
    lo, hi = _check_covers(state, grid)
    l = np.arange(lo, hi + 1)
    psi = np.stack([state.a, state.b], axis=-1)[lo - state.n_min : hi - state.n_min + 1]
    K = grid.k_count
    k = grid.k
    k0 = grid.k_min + grid.dk / 2
    twiddle = np.exp(-2j * k0 * l)
    bins = np.mod(2 * l, K)
    collide = np.unique(bins).size != bins.size
    for start in range(0, grid.n_count, chunk):
        n_rows = grid.n[start : start + chunk]
        prod = _pair_products(psi, l, n_rows) * twiddle[None, :, None, None]
        buf = np.zeros((n_rows.size, K, 2, 2), np.complex128)
        if collide:
            np.add.at(buf, (slice(None), bins), prod)
        else:
            buf[:, bins] = prod
        rows = np.fft.fft(buf, axis=1)
        rows *= (np.exp(1j * np.outer(n_rows, k)) / math.pi)[:, :, None, None]
        yield n_rows, rows


def wigner_from_state(
    state: WalkState, grid: PhaseSpaceGrid | None = None, k_count: int | None = None
) -> WignerField:
    """
    Wigner field of ``state``.

    Uses the FFT path on full-period grids and the direct sum otherwise.  If
    ``grid`` is omitted, the window is twice the state window and
    ``k_count`` (default 512) points span ``[-pi, pi)``.
    """
    if grid is None:
        grid = PhaseSpaceGrid.for_state(state, k_count or 512)
    if not grid.full_period:
        return wigner_from_state_reference(state, grid)
    field_ = WignerField.zeros(grid, state.t)
    for n_rows, rows in iter_wigner_rows(state, grid):
        i = n_rows[0] - grid.n_min
        field_.values[i : i + n_rows.size] = rows
    return field_


def _grown_for_step(field_: WignerField) -> WignerField:
    v = field_.values
    left = 0 if not v[:2].any() else 2
    right = 0 if not v[-2:].any() else 2
    if left == 0 and right == 0:
        return field_
    g = field_.grid.with_window(field_.grid.n_min - left, field_.grid.n_max + right)
    out = np.zeros((g.n_count, g.k_count, 2, 2), np.complex128)
    out[left : left + field_.grid.n_count] = v
    return WignerField(g, out, field_.t)


def wigner_step(field_: WignerField, coin: CoinOperator) -> WignerField:
    """
    Advance the field one walk step in phase space.

    W'(n) = M_R W(n-2) M_R^+ + e^{-2ik} M_R W(n) M_L^+
            + e^{2ik} M_L W(n) M_R^+ + M_L W(n+2) M_L^+

    with ``M_R = |R><R| C`` and ``M_L = |L><L| C``.  Each term fills exactly
    one matrix entry of ``C W C^+``, which is what the code exploits.
    """
    field_ = _grown_for_step(field_)
    c = coin.matrix
    v = c @ field_.values @ np.conj(c.T)
    e = np.exp(-2j * field_.grid.k)[None, :]
    out = np.zeros_like(v)
    out[2:, :, 0, 0] = v[:-2, :, 0, 0]
    out[:-2, :, 1, 1] = v[2:, :, 1, 1]
    out[:, :, 0, 1] = e * v[:, :, 0, 1]
    out[:, :, 1, 0] = np.conj(e) * v[:, :, 1, 0]
    stepped = WignerField(field_.grid, out, field_.t + 1)
    if stepped.hermiticity_error() > RESYMMETRIZE_ABOVE:
        stepped.values = 0.5 * (out + np.conj(np.swapaxes(out, -1, -2)))
    return stepped


def wigner_evolve(field_: WignerField, coin: CoinOperator, steps: int) -> WignerField:
    """Apply :func:`wigner_step` ``steps`` times, growing the window once."""
    if steps < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")
    if steps == 0:
        return field_
    nz = np.flatnonzero(field_.values.reshape(field_.grid.n_count, -1).any(axis=1))
    if nz.size:
        lo = field_.grid.n_min + int(nz[0]) - 2 * steps - 2
        hi = field_.grid.n_min + int(nz[-1]) + 2 * steps + 2
        field_ = field_.windowed(min(lo, field_.grid.n_min), max(hi, field_.grid.n_max))
    for _ in range(steps):
        field_ = wigner_step(field_, coin)
    return field_


def position_marginal(field_: WignerField) -> tuple[NDArray[np.int64], NDArray[np.complex128]]:
    """
    ``int_{-pi}^{pi} W(n, k) dk`` per site, shape ``(n_count, 2, 2)``.

    Even sites 2m give twice the site density block of m; odd sites give zero.
    """
    if not field_.grid.full_period:
        raise ValueError("position marginal needs a k-grid spanning a full period")
    return field_.grid.n, field_.values.sum(axis=1) * field_.grid.dk


def momentum_matrix(field_: WignerField) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """``M(k) = sum_n W(n, k)`` per k point, shape ``(k_count, 2, 2)``."""
    return field_.grid.k, field_.values.sum(axis=0)


def momentum_amplitudes(state: WalkState, k) -> NDArray[np.complex128]:
    """
    Spinor in quasi-momentum space, ``(1/sqrt(2 pi)) sum_n e^{-ink} psi(n)``.

    Returns an array of shape ``(len(k), 2)`` with columns (R, L).
    """
    k = np.asarray(k, dtype=np.float64)
    phase = np.exp(-1j * np.outer(k, state.sites)) / math.sqrt(TWO_PI)
    return phase @ state.spinors
