"""
Coined quantum walk on the integer line.

The state is a two-component spinor per lattice site, stored as two dense
complex arrays over a finite window ``[n_min, n_min + len(a))``.  Component
``a`` is the right-moving (R) chirality, ``b`` the left-moving (L) one.
One step applies the coin at every site and then shifts R one site right and
L one site left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "CoinOperator",
    "WalkState",
    "InitialKind",
    "InitialStateSpec",
    "coin_matrix",
    "localized_state",
    "cat_state",
    "step",
    "inverse_step",
    "evolve",
    "position_distribution",
    "position_sigma",
    "PAPER_SPINOR",
]

NORM_TOL = 1e-10
SPINOR_TOL = 1e-12

#: Coin spinor (|R> + i|L>)/sqrt(2) used for the localized initial state.
PAPER_SPINOR = (1 / math.sqrt(2), 1j / math.sqrt(2))


@dataclass(frozen=True)
class CoinOperator:
    """Coin rotation ``C(theta) = sigma_z cos(theta) + sigma_x sin(theta)``."""

    theta: float
    matrix: NDArray[np.complex128] = field(repr=False)


def coin_matrix(theta: float) -> CoinOperator:
    """
    Build the coin operator for angle ``theta`` (radians).

    ``theta = pi/4`` gives the Hadamard coin, ``0`` gives sigma_z and
    ``pi/2`` gives sigma_x.

    Raises
    ------
    ValueError
        If ``theta`` is not finite.
    """
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValueError(f"coin angle must be finite, got {theta!r}")
    c, s = math.cos(theta), math.sin(theta)
    matrix = np.array([[c, s], [s, -c]], dtype=np.complex128)
    matrix.setflags(write=False)
    return CoinOperator(theta, matrix)


@dataclass(frozen=True)
class WalkState:
    """
    Walker + coin pure state on a finite lattice window.

    ``a[i]`` and ``b[i]`` are the R and L amplitudes at site ``n_min + i``.
    Instances are treated as immutable; operations return new states.
    """

    n_min: int
    a: NDArray[np.complex128]
    b: NDArray[np.complex128]
    t: int = 0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.complex128)
        b = np.asarray(self.b, dtype=np.complex128)
        if a.ndim != 1 or a.shape != b.shape:
            raise ValueError("amplitude arrays must be 1-D and of equal length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("amplitudes must be finite")
        if self.t < 0:
            raise ValueError(f"time must be non-negative, got {self.t}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def size(self) -> int:
        return self.a.shape[0]

    @property
    def n_max(self) -> int:
        return self.n_min + self.size - 1

    @property
    def sites(self) -> NDArray[np.int64]:
        return np.arange(self.n_min, self.n_min + self.size)

    @property
    def spinors(self) -> NDArray[np.complex128]:
        """Amplitudes as an array of shape ``(size, 2)``, columns (R, L)."""
        return np.stack([self.a, self.b], axis=-1)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.a) ** 2 + np.abs(self.b) ** 2))

    def support(self) -> tuple[int, int]:
        """Smallest and largest site carrying a nonzero amplitude."""
        nz = np.flatnonzero((self.a != 0) | (self.b != 0))
        if nz.size == 0:
            raise ValueError("state has no support")
        return self.n_min + int(nz[0]), self.n_min + int(nz[-1])

    def amplitude(self, n: int) -> tuple[complex, complex]:
        i = n - self.n_min
        if 0 <= i < self.size:
            return complex(self.a[i]), complex(self.b[i])
        return 0j, 0j

    def padded(self, left: int, right: int) -> "WalkState":
        """Return the same state on a window grown by ``left``/``right`` sites."""
        if left < 0 or right < 0:
            raise ValueError("padding must be non-negative")
        if left == 0 and right == 0:
            return self
        a = np.pad(self.a, (left, right))
        b = np.pad(self.b, (left, right))
        return WalkState(self.n_min - left, a, b, self.t)


class InitialKind(str, Enum):
    LOCALIZED = "localized"
    CAT = "cat"


@dataclass(frozen=True)
class InitialStateSpec:
    """
    Recipe for one of the two initial states.

    ``LOCALIZED`` puts ``coin_spinor`` (R, L) at the origin.  ``CAT`` is
    ``(|a, R> + i|-a, L>)/sqrt(2)`` with ``a = half_separation``.
    """

    kind: InitialKind = InitialKind.LOCALIZED
    coin_spinor: tuple[complex, complex] = PAPER_SPINOR
    half_separation: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", InitialKind(self.kind))
        r, l = (complex(z) for z in self.coin_spinor)
        object.__setattr__(self, "coin_spinor", (r, l))
        if abs(abs(r) ** 2 + abs(l) ** 2 - 1) > SPINOR_TOL:
            raise ValueError("coin spinor must have unit norm")
        if self.half_separation < 0:
            raise ValueError("half separation must be non-negative")

    @property
    def radius(self) -> int:
        """Largest |n| carrying amplitude at t = 0."""
        return self.half_separation if self.kind is InitialKind.CAT else 0

    def build(self, window_halfwidth: int) -> WalkState:
        if self.kind is InitialKind.CAT:
            return cat_state(self.half_separation, window_halfwidth)
        return localized_state(self.coin_spinor, window_halfwidth)

    def label(self) -> str:
        if self.kind is InitialKind.CAT:
            return f"cat(a={self.half_separation})"
        return "localized"


def localized_state(coin_spinor, window_halfwidth: int) -> WalkState:
    """
    Walker at the origin with coin state ``coin_spinor = (R, L)``.

    The window is ``[-window_halfwidth, window_halfwidth]``.

    Raises
    ------
    ValueError
        If the spinor is not normalized or the window is empty.
    """
    if window_halfwidth < 1:
        raise ValueError(f"window half-width must be >= 1, got {window_halfwidth}")
    r, l = (complex(z) for z in coin_spinor)
    if abs(abs(r) ** 2 + abs(l) ** 2 - 1) > SPINOR_TOL:
        raise ValueError(f"coin spinor must have unit norm, got {abs(r)**2 + abs(l)**2!r}")
    size = 2 * window_halfwidth + 1
    a = np.zeros(size, dtype=np.complex128)
    b = np.zeros(size, dtype=np.complex128)
    a[window_halfwidth] = r
    b[window_halfwidth] = l
    return WalkState(-window_halfwidth, a, b, 0)


def cat_state(half_separation: int, window_halfwidth: int) -> WalkState:
    """
    ``(|a, R> + i|-a, L>)/sqrt(2)`` on ``[-window_halfwidth, window_halfwidth]``.

    With ``a = 0`` this is the localized state with spinor ``(1, i)/sqrt(2)``.
    """
    a_sep = int(half_separation)
    if a_sep < 0:
        raise ValueError("half separation must be non-negative")
    if window_halfwidth <= a_sep:
        raise ValueError(
            f"window half-width {window_halfwidth} must exceed half separation {a_sep}"
        )
    size = 2 * window_halfwidth + 1
    a = np.zeros(size, dtype=np.complex128)
    b = np.zeros(size, dtype=np.complex128)
    a[window_halfwidth + a_sep] = 1 / math.sqrt(2)
    b[window_halfwidth - a_sep] = 1j / math.sqrt(2)
    return WalkState(-window_halfwidth, a, b, 0)


def _guard_edges(state: WalkState) -> WalkState:
    # both edge sites must be empty so the shift cannot push amplitude out
    left = 0 if state.a[0] == 0 and state.b[0] == 0 else 1
    right = 0 if state.a[-1] == 0 and state.b[-1] == 0 else 1
    return state.padded(left, right)


def step(state: WalkState, coin: CoinOperator) -> WalkState:
    """One application of U = (T- x |L><L| + T+ x |R><R|) C."""
    state = _guard_edges(state)
    c = coin.matrix
    ca = c[0, 0] * state.a + c[0, 1] * state.b
    cb = c[1, 0] * state.a + c[1, 1] * state.b
    a = np.zeros_like(ca)
    b = np.zeros_like(cb)
    a[1:] = ca[:-1]
    b[:-1] = cb[1:]
    return WalkState(state.n_min, a, b, state.t + 1)


def inverse_step(state: WalkState, coin: CoinOperator) -> WalkState:
    """Undo :func:`step`: unshift, then apply C (its own inverse)."""
    if state.t < 1:
        raise ValueError("cannot step back before t = 0")
    state = _guard_edges(state)
    a = np.zeros_like(state.a)
    b = np.zeros_like(state.b)
    a[:-1] = state.a[1:]
    b[1:] = state.b[:-1]
    c = coin.matrix
    return WalkState(
        state.n_min,
        c[0, 0] * a + c[0, 1] * b,
        c[1, 0] * a + c[1, 1] * b,
        state.t - 1,
    )


def evolve(state: WalkState, coin: CoinOperator, steps: int) -> WalkState:
    """Apply :func:`step` ``steps`` times on a window grown once up front."""
    if steps < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")
    if steps == 0:
        return state
    lo, hi = state.support()
    # support widens by one site per step; keep one empty guard site beyond
    need_lo = lo - steps - 1
    need_hi = hi + steps + 1
    state = state.padded(max(0, state.n_min - need_lo), max(0, need_hi - state.n_max))
    for _ in range(steps):
        state = step(state, coin)
    return state


def position_distribution(state: WalkState) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
    """Sites and ``P(n) = |a_n|^2 + |b_n|^2`` over the state window."""
    return state.sites, np.abs(state.a) ** 2 + np.abs(state.b) ** 2


def position_sigma(state: WalkState) -> float:
    """Standard deviation of the position distribution."""
    n, p = position_distribution(state)
    mean = np.sum(n * p)
    var = np.sum((n - mean) ** 2 * p)
    return float(math.sqrt(max(var, 0.0)))
