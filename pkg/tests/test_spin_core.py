"""Tests for the spin-1 algebra and the zero-field Hamiltonian."""

import numpy as np
import pytest

from nvrdj.spin_core import (
    DEFAULT_ZFS,
    IDX_ZERO,
    ZfsParams,
    level_structure,
    spin1_operators,
    transition_frequencies,
    zero_field_hamiltonian,
)


class TestSpinOperators:
    def test_sz_is_diagonal_projection(self):
        """Sz = diag(1, 0, -1) in the (|+1>, |0>, |-1>) ordering."""
        ops = spin1_operators()
        np.testing.assert_allclose(ops.sz, np.diag([1, 0, -1]), atol=0)

    def test_commutators(self):
        """[Sx, Sy] = i Sz and cyclic permutations."""
        ops = spin1_operators()
        for a, b, c in [(ops.sx, ops.sy, ops.sz), (ops.sy, ops.sz, ops.sx), (ops.sz, ops.sx, ops.sy)]:
            np.testing.assert_allclose(a @ b - b @ a, 1j * c, atol=1e-12)

    def test_casimir(self):
        """Sx^2 + Sy^2 + Sz^2 = S(S+1) I = 2I."""
        ops = spin1_operators()
        total = ops.sx @ ops.sx + ops.sy @ ops.sy + ops.sz @ ops.sz
        np.testing.assert_allclose(total, 2 * np.eye(3), atol=1e-12)

    def test_hermitian(self):
        ops = spin1_operators()
        for m in (ops.sx, ops.sy, ops.sz):
            np.testing.assert_allclose(m, m.conj().T, atol=0)


class TestZfsParams:
    def test_rejects_strain_exceeding_axial(self):
        with pytest.raises(ValueError, match="E < D"):
            ZfsParams(d_hz=1e6, e_hz=2e6)

    def test_rejects_equal_nonzero(self):
        with pytest.raises(ValueError, match="E < D"):
            ZfsParams(d_hz=1e6, e_hz=1e6)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            ZfsParams(d_hz=-1.0, e_hz=0.0)
        with pytest.raises(ValueError):
            ZfsParams(d_hz=1e9, e_hz=-1.0)

    def test_zero_zero_allowed(self):
        """The trivial D = E = 0 Hamiltonian is the only boundary case."""
        p = ZfsParams(d_hz=0.0, e_hz=0.0)
        np.testing.assert_allclose(zero_field_hamiltonian(p), np.zeros((3, 3)), atol=0)


class TestZeroFieldHamiltonian:
    def test_measured_parameters_give_both_lines(self):
        """D = 2.8449 GHz, E = 19.5 MHz puts the gaps at 2.8254/2.8644 GHz."""
        h = zero_field_hamiltonian(DEFAULT_ZFS)
        evals = np.sort(np.linalg.eigvalsh(h))
        gaps = evals[1:] - evals[0]
        np.testing.assert_allclose(gaps, [2.8254e9, 2.8644e9], atol=1.0)

    def test_eigenvalues_analytic(self):
        """Numeric eigensolver matches {-2D/3, D/3 - E, D/3 + E} to 1e-12."""
        p = ZfsParams(d_hz=1e9, e_hz=1e6)
        evals = np.sort(np.linalg.eigvalsh(zero_field_hamiltonian(p)))
        expected = np.sort([-2 * p.d_hz / 3, p.d_hz / 3 - p.e_hz, p.d_hz / 3 + p.e_hz])
        np.testing.assert_allclose(evals, expected, rtol=1e-12)

    def test_zero_eigenvector_is_ms0(self):
        h = zero_field_hamiltonian(DEFAULT_ZFS)
        evals, evecs = np.linalg.eigh(h)
        ground = evecs[:, np.argmin(evals)]
        assert abs(ground[IDX_ZERO]) == pytest.approx(1.0, abs=1e-12)

    def test_strain_pair_eigenvectors(self):
        """The +-E eigenstates are (|+1> +- |-1>)/sqrt(2)."""
        p = ZfsParams(d_hz=1e9, e_hz=5e6)
        evals, evecs = np.linalg.eigh(zero_field_hamiltonian(p))
        order = np.argsort(evals)
        lower, upper = evecs[:, order[1]], evecs[:, order[2]]
        sym = np.array([1, 0, 1]) / np.sqrt(2)
        antisym = np.array([1, 0, -1]) / np.sqrt(2)
        assert abs(abs(antisym @ lower) - 1.0) < 1e-12
        assert abs(abs(sym @ upper) - 1.0) < 1e-12

    def test_hermitian_traceless_random(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            d = rng.uniform(1e8, 5e9)
            e = rng.uniform(0, 0.5) * d
            h = zero_field_hamiltonian(ZfsParams(d_hz=d, e_hz=e))
            np.testing.assert_allclose(h, h.conj().T, atol=1e-12 * d)
            assert abs(np.trace(h).real) < 1e-12 * d

    def test_strain_lifts_all_degeneracies(self):
        """E > 0 makes all three eigenvalues distinct."""
        evals = np.sort(np.linalg.eigvalsh(zero_field_hamiltonian(DEFAULT_ZFS)))
        assert np.min(np.diff(evals)) > 1e6


class TestTransitionFrequencies:
    def test_measured_device_parameters(self):
        assert transition_frequencies(DEFAULT_ZFS) == (2.8254e9, 2.8644e9)

    def test_strain_free_degenerate(self):
        p = ZfsParams(d_hz=2.87e9, e_hz=0.0)
        assert transition_frequencies(p) == (2.87e9, 2.87e9)

    def test_matches_eigensolver_for_random_params(self):
        """(D - E, D + E) equals the eigenvalue gaps for 1000 random draws."""
        rng = np.random.default_rng(7)
        for _ in range(1000):
            d = rng.uniform(1e8, 5e9)
            e = rng.uniform(0.0, 0.9) * d
            p = ZfsParams(d_hz=d, e_hz=e)
            evals = np.sort(np.linalg.eigvalsh(zero_field_hamiltonian(p)))
            f_low, f_high = transition_frequencies(p)
            np.testing.assert_allclose(
                [evals[1] - evals[0], evals[2] - evals[0]], [f_low, f_high], rtol=1e-9
            )

    def test_level_structure_consistency(self):
        ls = level_structure(DEFAULT_ZFS)
        assert ls.f_high - ls.f_low == pytest.approx(2 * DEFAULT_ZFS.e_hz)
        assert ls.e_minus - ls.e_zero == pytest.approx(ls.f_low)
        assert ls.e_plus - ls.e_zero == pytest.approx(ls.f_high)
