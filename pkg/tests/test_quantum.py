import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chaosbench.entropy import fit_entropy_slope
from chaosbench.quantum import (CAT_KS_ENTROPY, DensityMatrix,
                                MeasurementPartition, cat_map_unitary,
                                classical_cat_entropy_curve, coherent_state,
                                initial_slope_window, maximally_mixed,
                                measured_step, position_block_state,
                                position_state, quantum_entropy_curve,
                                von_neumann_entropy)


class TestCatUnitary:
    @pytest.mark.parametrize("N", [2, 3, 5, 16, 63, 64, 100, 128, 257])
    def test_unitarity(self, N):
        m = cat_map_unitary(N)
        assert np.abs(m.unitary @ m.unitary.conj().T - np.eye(N)).max() < 1e-10

    def test_flat_amplitudes(self):
        m = cat_map_unitary(64)
        assert np.abs(np.abs(m.unitary) - 64 ** -0.5).max() < 1e-12

    def test_spectrum_on_unit_circle(self):
        m = cat_map_unitary(64)
        ev = np.linalg.eigvals(m.unitary)
        assert np.abs(np.abs(ev) - 1.0).max() < 1e-10
        assert abs(abs(np.prod(ev)) - 1.0) < 1e-8

    def test_hbar_scaling(self):
        m = cat_map_unitary(100)
        assert m.hbar_eff * m.N == m.omega_vol

    def test_cap_and_bounds(self):
        with pytest.raises(ValueError):
            cat_map_unitary(1)
        with pytest.raises(ValueError):
            cat_map_unitary(4096)


class TestDensityMatrix:
    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.array([[0.5, 0.2], [0.3, 0.5]]))   # not Hermitian
        with pytest.raises(ValueError):
            DensityMatrix(np.eye(2))                            # trace 2
        with pytest.raises(ValueError):
            DensityMatrix(np.diag([1.5, -0.5]))                 # negative eigenvalue

    def test_partition_divisibility(self):
        with pytest.raises(ValueError):
            MeasurementPartition(10, 3)
        part = MeasurementPartition(8, 4)
        ids = part.block_ids()
        assert list(ids) == [0, 0, 1, 1, 2, 2, 3, 3]

    def test_projectors_complete_and_orthogonal(self):
        part = MeasurementPartition(12, 3)
        ids = part.block_ids()
        projs = [np.diag((ids == m).astype(float)) for m in range(3)]
        assert np.allclose(sum(projs), np.eye(12))
        for i in range(3):
            for j in range(3):
                expect = projs[i] if i == j else 0.0
                assert np.allclose(projs[i] @ projs[j], expect)


class TestMeasuredStep:
    def test_maximally_mixed_is_fixed_point(self):
        m = cat_map_unitary(32)
        part = MeasurementPartition(32, 4)
        out = measured_step(maximally_mixed(32), m, part)
        assert np.abs(out.rho - np.eye(32) / 32).max() < 1e-14

    def test_trivial_partition_is_unitary_step(self):
        m = cat_map_unitary(32)
        part = MeasurementPartition(32, 1)
        rho = coherent_state(32, 10)
        out = measured_step(rho, m, part)
        expect = m.unitary @ rho.rho @ m.unitary.conj().T
        assert np.abs(out.rho - expect).max() < 1e-12
        assert von_neumann_entropy(out) < 1e-8      # purity preserved

    def test_position_state_full_measurement(self):
        N = 32
        m = cat_map_unitary(N)
        part = MeasurementPartition(N, N)
        out = measured_step(position_state(N, 5), m, part)
        offdiag = out.rho - np.diag(np.diag(out.rho))
        assert np.abs(offdiag).max() < 1e-14
        assert np.abs(np.diag(out.rho).real - 1.0 / N).max() < 1e-12
        assert von_neumann_entropy(out) == pytest.approx(math.log(N), abs=1e-10)

    def test_dimension_mismatch(self):
        m = cat_map_unitary(16)
        with pytest.raises(ValueError):
            measured_step(maximally_mixed(8), m, MeasurementPartition(16, 4))

    def test_dephasing_never_below_unitary_entropy(self):
        N = 24
        m = cat_map_unitary(N)
        part = MeasurementPartition(N, 4)
        rng = np.random.default_rng(9)
        for _ in range(5):
            A = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
            rho = A @ A.conj().T
            rho /= rho.trace().real
            s_unitary = von_neumann_entropy(DensityMatrix(rho))  # unitary preserves S
            s_measured = von_neumann_entropy(measured_step(DensityMatrix(rho), m, part))
            assert s_measured >= s_unitary - 1e-10

    def test_stability_over_1000_steps(self):
        N = 64
        m = cat_map_unitary(N)
        part = MeasurementPartition(N, 8)
        rho = coherent_state(N, N // 3)
        r = rho.rho
        tr_err = herm_err = 0.0
        for _ in range(1000):
            r = m.unitary @ r @ m.unitary.conj().T
            mask = part.mask()
            r = np.where(mask, r, 0.0)
            r = 0.5 * (r + r.conj().T)
            tr_err = max(tr_err, abs(r.trace() - 1.0))
            herm_err = max(herm_err, np.abs(r - r.conj().T).max())
        assert tr_err < 1e-10
        assert herm_err < 1e-12


class TestVonNeumann:
    def test_pure_state(self):
        assert von_neumann_entropy(position_state(16, 3)) == 0.0
        assert von_neumann_entropy(coherent_state(64, 20)) < 1e-10

    def test_maximally_mixed(self):
        assert von_neumann_entropy(maximally_mixed(50)) == pytest.approx(math.log(50))

    def test_two_level_mixture(self):
        rho = np.zeros((8, 8))
        rho[0, 0] = rho[1, 1] = 0.5
        assert von_neumann_entropy(rho) == pytest.approx(math.log(2))

    def test_rejects_invalid(self):
        with pytest.raises(ValueError):
            von_neumann_entropy(np.eye(4))          # trace 4

    @given(st.integers(2, 12), st.integers(0, 10 ** 6))
    @settings(max_examples=30, deadline=None)
    def test_entropy_bounds_random_diagonal(self, n, seed):
        rng = np.random.default_rng(seed)
        w = rng.random(n) + 1e-12
        w /= w.sum()
        s = von_neumann_entropy(np.diag(w.astype(complex)))
        assert -1e-12 <= s <= math.log(n) + 1e-12


class TestEntropyCurve:
    def test_mixed_state_flat_at_ln_n(self):
        m = cat_map_unitary(32)
        curve = quantum_entropy_curve(m, MeasurementPartition(32, 4),
                                      maximally_mixed(32), 10)
        assert np.abs(curve.entropy - math.log(32)).max() < 1e-10

    def test_pure_unitary_stays_pure(self):
        m = cat_map_unitary(32)
        curve = quantum_entropy_curve(m, MeasurementPartition(32, 1),
                                      coherent_state(32, 11), 10)
        assert np.abs(curve.entropy).max() < 1e-7

    def test_saturates_at_ln_n(self):
        N = 64
        m = cat_map_unitary(N)
        curve = quantum_entropy_curve(m, MeasurementPartition(N, 8),
                                      coherent_state(N, N // 3), 50)
        assert np.all(curve.entropy <= math.log(N) + 1e-9)
        assert curve.entropy[-1] > 0.95 * math.log(N)

    def test_initial_slope_near_ks_rate(self):
        N = 64
        m = cat_map_unitary(N)
        curve = quantum_entropy_curve(m, MeasurementPartition(N, 8),
                                      coherent_state(N, N // 3), 50)
        w = initial_slope_window(curve)
        slope, _, _ = fit_entropy_slope(curve, w)
        assert CAT_KS_ENTROPY / 2 <= slope <= 2 * CAT_KS_ENTROPY

    def test_doubling_n_raises_plateau_by_ln2(self):
        plateaus = []
        for N in (64, 128):
            m = cat_map_unitary(N)
            curve = quantum_entropy_curve(m, MeasurementPartition(N, 8),
                                          coherent_state(N, N // 3), 50)
            plateaus.append(float(curve.entropy[-1]))
        gain = plateaus[1] - plateaus[0]
        assert abs(gain - math.log(2)) < 0.05 * math.log(2)

    def test_metadata_csv(self, tmp_path):
        m = cat_map_unitary(16)
        curve = quantum_entropy_curve(m, MeasurementPartition(16, 4),
                                      maximally_mixed(16), 3)
        curve.to_csv(tmp_path / "q.csv")
        text = (tmp_path / "q.csv").read_text()
        assert "# N = 16" in text and "# model = cat" in text


class TestClassicalCat:
    def test_starts_in_one_cell_and_saturates_at_ln_bins(self):
        for bins in (8, 16, 32):
            c = classical_cat_entropy_curve(bins, K=50000, steps=20, seed=5)
            assert c.entropy[0] == 0.0
            assert abs(c.saturation() - math.log(bins)) < 0.01

    def test_ceiling_rises_by_ln2_per_halving(self):
        sats = [classical_cat_entropy_curve(b, K=50000, steps=20, seed=5).saturation()
                for b in (8, 16, 32)]
        for lo, hi in zip(sats, sats[1:]):
            assert abs((hi - lo) - math.log(2)) < 0.2 * math.log(2)

    def test_slope_matches_analytic_ks(self):
        c = classical_cat_entropy_curve(64, K=200000, steps=15, seed=5)
        w = initial_slope_window(c)
        slope, _, _ = fit_entropy_slope(c, w)
        assert CAT_KS_ENTROPY / 2 <= slope <= 2 * CAT_KS_ENTROPY

    def test_two_dimensional_partition(self):
        c = classical_cat_entropy_curve(8, K=50000, steps=20, seed=5,
                                        momentum_bins=8)
        assert abs(c.saturation() - math.log(64)) < 0.02
