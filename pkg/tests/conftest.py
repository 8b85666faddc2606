"""Shared fixtures and independent oracles.

The oracles here avoid the package's evolution and transform code paths:
the walk is a dense Kronecker-product unitary and the Wigner function is the
defining lattice sum evaluated one scalar at a time.
"""

import cmath
import math

import numpy as np
import pytest

from qwigner import WalkState

HADAMARD = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def dense_walk_unitary(half_width, coin):
    """U = T+ (x) |R><R| C + T- (x) |L><L| C on sites [-L, L]; index 2*i + chirality."""
    size = 2 * half_width + 1
    t_plus = np.eye(size, k=-1)
    t_minus = np.eye(size, k=1)
    p_r = np.diag([1.0, 0.0])
    p_l = np.diag([0.0, 1.0])
    return np.kron(t_plus, p_r @ coin) + np.kron(t_minus, p_l @ coin)


def dense_vector(state, half_width):
    vec = np.zeros(2 * (2 * half_width + 1), dtype=complex)
    for n in range(state.n_min, state.n_max + 1):
        a, b = state.amplitude(n)
        i = n + half_width
        vec[2 * i], vec[2 * i + 1] = a, b
    return vec


def dense_to_state(vec, half_width, t=0):
    m = vec.reshape(-1, 2)
    return WalkState(-half_width, m[:, 0].copy(), m[:, 1].copy(), t)


def brute_wigner_point(state, n, k):
    """(1/pi) e^{ikn} sum_l psi(l) psi(n-l)^dagger e^{-2ikl}, one matrix entry at a time."""
    out = np.zeros((2, 2), dtype=complex)
    for l in range(state.n_min, state.n_max + 1):
        left = state.amplitude(l)
        right = state.amplitude(n - l)
        phase = cmath.exp(1j * k * n) * cmath.exp(-2j * k * l) / math.pi
        for al in range(2):
            for be in range(2):
                out[al, be] += left[al] * right[be].conjugate() * phase
    return out


def random_spinor(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return complex(v[0]), complex(v[1])


@pytest.fixture
def rng():
    return np.random.default_rng(20121)


_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict; printed in the terminal summary."""

    def record(label, passed, detail):
        _ACCEPTANCE.append((label, bool(passed), detail))
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in sorted(_ACCEPTANCE, key=lambda r: int(r[0].split()[0][2:])):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
