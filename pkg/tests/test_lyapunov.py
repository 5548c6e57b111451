import math

import numpy as np
import pytest

from chaosbench.integrate import PrecisionConfig
from chaosbench.lyapunov import LyapunovSpectrum, ks_entropy, lyapunov_spectrum
from chaosbench.presets import load_preset
from chaosbench.systems import make_linear_diag

LORENZ = load_preset("lorenz-classic")
STABLE = load_preset("lorenz-stable")
HOLMES = load_preset("duffing-holmes")

SPROTT_LORENZ = (0.9056, 0.0, -14.5723)


def _spectrum(exponents):
    n = len(exponents)
    return LyapunovSpectrum(exponents=list(exponents), t_total=1.0,
                            renorm_interval=0.5,
                            history_times=np.zeros(0), history=np.zeros((0, n)))


class TestKsEntropy:
    def test_single_positive_exponent(self):
        assert ks_entropy(_spectrum((0.906, 0.000, -14.572))) == pytest.approx(0.906)

    def test_all_negative(self):
        assert ks_entropy(_spectrum((-0.1, -2.0))) == 0.0

    def test_cat_map_spectrum(self):
        lam = math.log((3 + math.sqrt(5)) / 2)
        assert ks_entropy(_spectrum((lam, -lam))) == pytest.approx(lam)
        assert lam == pytest.approx(0.9624, abs=1e-4)

    def test_near_zero_treated_as_zero(self):
        assert ks_entropy(_spectrum((0.004, -1.0))) == 0.0
        assert ks_entropy(_spectrum((0.006, -1.0))) == pytest.approx(0.006)


class TestLinearSystem:
    def test_analytic_exponents(self):
        lin = make_linear_diag((-1.0, -2.0))
        sp = lyapunov_spectrum(lin, (1.0, 1.0), t_total=50.0, burn_in=0.0,
                               cfg=PrecisionConfig(53, 8, 0.05, 1))
        assert abs(sp.exponents[0] + 1.0) < 1e-6
        assert abs(sp.exponents[1] + 2.0) < 1e-6
        assert not sp.flagged


@pytest.fixture(scope="module")
def lorenz_spectrum_f64():
    return lyapunov_spectrum(LORENZ, (1.0, 1.0, 1.0), t_total=400.0, burn_in=100.0,
                             cfg=PrecisionConfig(53, 16, 0.05, 1))


class TestLorenz:
    def test_known_spectrum(self, lorenz_spectrum_f64):
        for got, want in zip(lorenz_spectrum_f64.exponents, SPROTT_LORENZ):
            assert abs(got - want) < 0.02

    def test_sum_matches_divergence(self, lorenz_spectrum_f64):
        total = sum(lorenz_spectrum_f64.exponents)
        assert abs(total - (-41.0 / 3.0)) < 0.01 * 41.0 / 3.0

    def test_zero_exponent_present(self, lorenz_spectrum_f64):
        assert min(abs(l) for l in lorenz_spectrum_f64.exponents) < 0.01

    def test_invariance_to_renorm_interval(self, lorenz_spectrum_f64):
        sp2 = lyapunov_spectrum(LORENZ, (1.0, 1.0, 1.0), t_total=400.0,
                                burn_in=100.0, renorm_interval=1.0,
                                cfg=PrecisionConfig(53, 16, 0.05, 1))
        for a, b in zip(lorenz_spectrum_f64.exponents, sp2.exponents):
            assert abs(a - b) < 0.02

    def test_invariance_to_tangent_frame(self, lorenz_spectrum_f64):
        sp2 = lyapunov_spectrum(LORENZ, (1.0, 1.0, 1.0), t_total=400.0,
                                burn_in=100.0, tangent_seed=7,
                                cfg=PrecisionConfig(53, 16, 0.05, 1))
        for a, b in zip(lorenz_spectrum_f64.exponents, sp2.exponents):
            assert abs(a - b) < 0.02

    def test_history_csv(self, lorenz_spectrum_f64, tmp_path):
        lorenz_spectrum_f64.to_csv(tmp_path / "hist.csv")
        lines = (tmp_path / "hist.csv").read_text().strip().splitlines()
        assert lines[0] == "t,lambda_1,lambda_2,lambda_3"
        assert len(lines) == len(lorenz_spectrum_f64.history_times) + 1


class TestNonChaotic:
    def test_stable_lorenz_zero_entropy(self):
        sp = lyapunov_spectrum(STABLE, (1.0, 1.0, 1.0), t_total=200.0, burn_in=50.0,
                               cfg=PrecisionConfig(53, 12, 0.05, 1))
        assert ks_entropy(sp) == 0.0
        assert sp.exponents[0] < 0.005


class TestDuffing:
    def test_holmes_preset_is_chaotic(self):
        sp = lyapunov_spectrum(HOLMES, (0.5, 0.0, 0.0), t_total=1500.0,
                               burn_in=200.0, cfg=PrecisionConfig(53, 12, 0.05, 1))
        assert sp.exponents[0] > 0.05          # verified ~0.124 on long runs
        assert abs(sum(sp.exponents) + 0.25) < 0.01
        assert min(abs(l) for l in sp.exponents) < 0.01

    def test_matches_extended_precision(self):
        f64 = lyapunov_spectrum(HOLMES, (0.5, 0.0, 0.0), t_total=300.0,
                                burn_in=100.0, cfg=PrecisionConfig(53, 12, 0.05, 1))
        wide = lyapunov_spectrum(HOLMES, (0.5, 0.0, 0.0), t_total=300.0,
                                 burn_in=100.0, cfg=PrecisionConfig(113, 12, 0.05, 1))
        for a, b in zip(f64.exponents, wide.exponents):
            assert abs(a - b) < 0.02


class TestValidation:
    def test_bad_intervals(self):
        with pytest.raises(ValueError):
            lyapunov_spectrum(LORENZ, (1.0, 1.0, 1.0), t_total=0.1,
                              renorm_interval=0.5)
        with pytest.raises(ValueError):
            lyapunov_spectrum(LORENZ, (1.0, 1.0, 1.0), t_total=10.0,
                              renorm_interval=0.3,
                              cfg=PrecisionConfig(53, 12, 0.07, 1))
