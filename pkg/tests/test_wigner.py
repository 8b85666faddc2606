import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwigner import (
    PAPER_SPINOR,
    HermitianMatrix2,
    PhaseSpaceGrid,
    WalkState,
    WignerField,
    cat_state,
    coin_matrix,
    evolve,
    localized_state,
    momentum_amplitudes,
    momentum_matrix,
    position_marginal,
    step,
    wigner_evolve,
    wigner_from_state,
    wigner_from_state_reference,
    wigner_step,
)
from qwigner.wigner import iter_wigner_rows

from conftest import brute_wigner_point, random_spinor

H = coin_matrix(math.pi / 4)


def paper_localized_field(k):
    m = np.array([[1, -1j], [1j, 1]]) / (2 * math.pi)
    return np.broadcast_to(m, (k.size, 2, 2))


class TestGrid:
    def test_midpoints(self):
        g = PhaseSpaceGrid(0, 0, 4)
        np.testing.assert_allclose(g.k, [-3 * math.pi / 4, -math.pi / 4, math.pi / 4, 3 * math.pi / 4])
        assert g.full_period and g.dk == pytest.approx(math.pi / 2)

    def test_validation(self):
        with pytest.raises(ValueError):
            PhaseSpaceGrid(1, 0, 4)
        with pytest.raises(ValueError):
            PhaseSpaceGrid(0, 1, 0)

    def test_half_range_needs_alignment(self):
        f = WignerField.zeros(PhaseSpaceGrid(0, 0, 6))
        with pytest.raises(ValueError):
            f.trace_normalization()


class TestFromState:
    def test_localized_paper_matrix(self):
        s = localized_state(PAPER_SPINOR, 2)
        f = wigner_from_state(s, k_count=64)
        np.testing.assert_allclose(f.at(0), paper_localized_field(f.grid.k), atol=1e-16)
        others = np.delete(f.values, 0 - f.grid.n_min, axis=0)
        assert not others.any()

    @pytest.mark.parametrize("a", [1, 4, 10])
    def test_cat_paper_matrix(self, a):
        s = cat_state(a, a + 2)
        f = wigner_from_state(s, k_count=128)
        k = f.grid.k
        inv = 1 / (2 * math.pi)
        np.testing.assert_allclose(f.at(2 * a)[:, 0, 0], inv, atol=1e-15)
        np.testing.assert_allclose(f.at(-2 * a)[:, 1, 1], inv, atol=1e-15)
        np.testing.assert_allclose(f.at(0)[:, 0, 1], -1j * inv * np.exp(-2j * k * a), atol=1e-14)
        np.testing.assert_allclose(f.at(0)[:, 1, 0], 1j * inv * np.exp(2j * k * a), atol=1e-14)
        nonzero = {int(n) for n, row in zip(f.grid.n, f.values) if row.any()}
        assert nonzero == {-2 * a, 0, 2 * a}

    def test_single_basis_state(self):
        f = wigner_from_state(localized_state((1, 0), 1), k_count=16)
        np.testing.assert_allclose(f.at(0)[:, 0, 0], 1 / math.pi, atol=1e-16)
        rest = f.values.copy()
        rest[0 - f.grid.n_min, :, 0, 0] = 0
        assert not rest.any()

    def test_matches_brute_force_sum(self, rng):
        s = evolve(localized_state(random_spinor(rng), 1), coin_matrix(0.6), 5)
        grid = PhaseSpaceGrid.for_state(s, 12)
        f = wigner_from_state(s, grid)
        for n in range(-12, 13, 3):
            for j in (0, 5, 11):
                np.testing.assert_allclose(
                    f.at(n)[j], brute_wigner_point(s, n, grid.k[j]), atol=1e-14
                )

    @pytest.mark.parametrize("k_count", [7, 16, 33, 256])
    def test_fft_matches_reference(self, rng, k_count):
        # small K forces bin collisions in the FFT path
        s = evolve(localized_state(random_spinor(rng), 1), coin_matrix(0.4), 12)
        grid = PhaseSpaceGrid.for_state(s, k_count)
        ref = wigner_from_state_reference(s, grid)
        fast = wigner_from_state(s, grid)
        np.testing.assert_allclose(fast.values, ref.values, atol=1e-12)

    def test_partial_period_uses_reference(self):
        s = localized_state(PAPER_SPINOR, 2)
        grid = PhaseSpaceGrid(-4, 4, 10, -math.pi / 2, math.pi / 2)
        f = wigner_from_state(s, grid)
        np.testing.assert_allclose(f.at(0), paper_localized_field(grid.k), atol=1e-16)
        with pytest.raises(ValueError):
            next(iter_wigner_rows(s, grid))

    def test_window_too_small(self):
        s = cat_state(3, 4)
        with pytest.raises(ValueError):
            wigner_from_state(s, PhaseSpaceGrid(-5, 5, 16))


class TestRecursion:
    def test_zero_field(self):
        f = WignerField.zeros(PhaseSpaceGrid(-4, 4, 8))
        out = wigner_step(f, H)
        assert not out.values.any() and out.t == 1

    def test_even_support_stays_even(self):
        f = wigner_from_state(cat_state(2, 3), k_count=32)
        for _ in range(6):
            f = wigner_step(f, coin_matrix(0.3))
            assert f.odd_rows_vanish()

    def test_auto_grow(self):
        s = localized_state((1, 0), 1)
        f = wigner_from_state(s, k_count=16)
        out = wigner_step(wigner_step(f, H), H)
        assert out.grid.n_min < f.grid.n_min and out.grid.n_max > f.grid.n_max

    def test_hand_step_from_basis_state(self):
        # |0,R> -> C|R> = (|R> + |L>)/sqrt2, R at +1 and L at -1
        f = wigner_step(wigner_from_state(localized_state((1, 0), 2), k_count=32), H)
        direct = wigner_from_state(step(localized_state((1, 0), 2), H), f.grid)
        np.testing.assert_allclose(f.values, direct.values, atol=1e-15)
        np.testing.assert_allclose(f.at(2)[:, 0, 0], 1 / (2 * math.pi), atol=1e-16)
        np.testing.assert_allclose(f.at(-2)[:, 1, 1], 1 / (2 * math.pi), atol=1e-16)

    @settings(max_examples=15, deadline=None)
    @given(
        st.floats(min_value=0.0, max_value=math.pi, allow_nan=False),
        st.integers(1, 20),
        st.integers(0, 2**32 - 1),
    )
    def test_agrees_with_transform_of_evolved_state(self, theta, steps, seed):
        rng = np.random.default_rng(seed)
        coin = coin_matrix(theta)
        s = localized_state(random_spinor(rng), steps + 1)
        f = wigner_evolve(wigner_from_state(s, k_count=64), coin, steps)
        direct = wigner_from_state(evolve(s, coin, steps), f.grid)
        assert np.max(np.abs(f.values - direct.values)) < 1e-10
        assert f.hermiticity_error() < 1e-10

    def test_mixed_parity_state(self, rng):
        # support on both parities populates odd n too; the routes must still agree
        a = np.zeros(7, complex)
        b = np.zeros(7, complex)
        a[3], b[4] = 0.6, 0.8j
        s = WalkState(-3, a, b)
        coin = coin_matrix(0.8)
        f = wigner_evolve(wigner_from_state(s, k_count=40), coin, 9)
        direct = wigner_from_state(evolve(s, coin, 9), f.grid)
        np.testing.assert_allclose(f.values, direct.values, atol=1e-12)
        assert not f.odd_rows_vanish()

    def test_windowed_refuses_to_drop_rows(self):
        f = wigner_from_state(cat_state(2, 3), k_count=8)
        with pytest.raises(ValueError):
            f.windowed(-2, 2)
        g = f.windowed(-8, 8)
        np.testing.assert_array_equal(g.at(4), f.at(4))


class TestMarginals:
    def test_localized_position_marginal(self):
        f = wigner_from_state(localized_state(PAPER_SPINOR, 2), k_count=16)
        n, m = position_marginal(f)
        np.testing.assert_allclose(m[n == 0][0], [[1, -1j], [1j, 1]], atol=1e-15)
        assert not m[n != 0].any()

    def test_requires_full_period(self):
        f = WignerField.zeros(PhaseSpaceGrid(0, 0, 8, -1.0, 1.0))
        with pytest.raises(ValueError):
            position_marginal(f)

    @pytest.mark.parametrize("t", [1, 7, 30])
    def test_position_marginal_identities(self, rng, t):
        s = evolve(localized_state(random_spinor(rng), 1), coin_matrix(math.pi / 3), t)
        f = wigner_from_state(s, k_count=8 * (t + 1))
        n, m = position_marginal(f)
        for site in range(s.n_min, s.n_max + 1):
            a, b = s.amplitude(site)
            psi = np.array([a, b])
            block = 2 * np.outer(psi, psi.conj())
            np.testing.assert_allclose(m[n == 2 * site][0], block, atol=1e-9)
            assert np.trace(m[n == 2 * site][0]).real / 2 == pytest.approx(abs(a) ** 2 + abs(b) ** 2, abs=1e-9)
        assert np.max(np.abs(m[n % 2 == 1])) < 1e-9

    def test_momentum_matrix_basis_state(self):
        f = wigner_from_state(localized_state((1, 0), 1), k_count=16)
        _, m = momentum_matrix(f)
        np.testing.assert_allclose(m[:, 0, 0], 1 / math.pi, atol=1e-16)
        assert not m[:, 0, 1].any() and not m[:, 1, 1].any()

    def test_momentum_matrix_matches_amplitudes(self, rng):
        s = evolve(localized_state(random_spinor(rng), 1), coin_matrix(1.0), 15)
        f = wigner_from_state(s, k_count=128)
        k, m = momentum_matrix(f)
        amp = momentum_amplitudes(s, k)
        np.testing.assert_allclose(m, 2 * np.einsum("ka,kb->kab", amp, amp.conj()), atol=1e-9)
        dk = f.grid.dk
        assert np.sum(0.5 * np.trace(m, axis1=1, axis2=2).real) * dk == pytest.approx(1, abs=1e-9)

    def test_momentum_amplitudes_basis(self):
        k = np.linspace(-3, 3, 7)
        amp = momentum_amplitudes(localized_state((1, 0), 1), k)
        np.testing.assert_allclose(amp[:, 0], 1 / math.sqrt(2 * math.pi))
        assert not amp[:, 1].any()

    def test_parseval(self, rng):
        s = evolve(localized_state(random_spinor(rng), 1), H, 20)
        g = PhaseSpaceGrid(0, 0, 128)
        amp = momentum_amplitudes(s, g.k)
        assert np.sum(np.abs(amp) ** 2) * g.dk == pytest.approx(1, abs=1e-9)

    def test_momentum_probability_is_conserved(self):
        s = localized_state(PAPER_SPINOR, 51)
        f = wigner_from_state(s, k_count=256)
        pk0 = 0.5 * np.trace(momentum_matrix(f)[1], axis1=1, axis2=2).real
        for _ in range(50):
            f = wigner_step(f, H)
            pk = 0.5 * np.trace(momentum_matrix(f)[1], axis1=1, axis2=2).real
            assert np.max(np.abs(pk - pk0)) < 1e-9


class TestFieldProperties:
    @pytest.mark.parametrize("t", [0, 10, 50])
    def test_parity_identity(self, t):
        s = evolve(cat_state(3, 4), H, t)
        f = wigner_from_state(s, k_count=256)
        half = f.grid.k_count // 2
        sign = np.where(f.grid.n % 2 == 0, 1, -1)[:, None, None, None]
        np.testing.assert_allclose(f.values[:, half:], sign * f.values[:, :half], atol=1e-10)

    @pytest.mark.parametrize("spec", ["localized", "cat"])
    def test_normalization(self, spec):
        s0 = localized_state(PAPER_SPINOR, 31) if spec == "localized" else cat_state(5, 36)
        s = evolve(s0, H, 30)
        assert wigner_from_state(s, k_count=256).trace_normalization() == pytest.approx(1, abs=1e-9)

    def test_hermitian_compact_form(self, rng):
        m = rng.normal(size=(5, 2, 2)) + 1j * rng.normal(size=(5, 2, 2))
        m = m + np.conj(np.swapaxes(m, -1, -2))
        np.testing.assert_allclose(HermitianMatrix2.from_matrix(m).to_matrix(), m)
