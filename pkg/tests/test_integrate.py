import math
from dataclasses import replace

import gmpy2
import numpy as np
import pytest

from chaosbench.errors import DivergedError
from chaosbench.integrate import (PrecisionConfig, divergence_time, horizon_fit,
                                  horizon_in_cycles, integrate, reliable_horizon)
from chaosbench.presets import load_preset
from chaosbench.systems import make_harmonic, make_linear_diag

LORENZ = load_preset("lorenz-classic")
STABLE = load_preset("lorenz-stable")
DUFFING = load_preset("duffing-holmes")


class TestPrecisionConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            PrecisionConfig(mantissa_bits=52)
        with pytest.raises(ValueError):
            PrecisionConfig(method_order=3)
        with pytest.raises(ValueError):
            PrecisionConfig(method_order=7)
        with pytest.raises(ValueError):
            PrecisionConfig(step_size=0.0)
        with pytest.raises(ValueError):
            PrecisionConfig(output_stride=0)


class TestIntegrate:
    def test_harmonic_half_period(self):
        tr = integrate(make_harmonic(), (1.0, 0.0), math.pi,
                       PrecisionConfig(53, 8, 1e-3, 100))
        assert np.abs(tr.states[-1] - np.array([-1.0, 0.0])).max() < 1e-10

    def test_stable_lorenz_reaches_origin(self):
        tr = integrate(STABLE, (1.0, 1.0, 1.0), 50.0,
                       PrecisionConfig(53, 12, 0.01, 100))
        assert np.linalg.norm(tr.states[-1]) < 1e-6

    def test_extended_precision_against_oracle(self):
        # oracle: same integration at 256 bits, order 20, half step
        run = integrate(LORENZ, (1.0, 1.0, 1.0), 1.0,
                        PrecisionConfig(128, 12, 0.0025, 10 ** 6))
        oracle = integrate(LORENZ, (1.0, 1.0, 1.0), 1.0,
                           PrecisionConfig(256, 20, 0.00125, 10 ** 6))
        diff = max(abs(gmpy2.mpfr(a, precision=300) - gmpy2.mpfr(b, precision=300))
                   for a, b in zip(run.states_mp[-1], oracle.states_mp[-1]))
        assert float(diff) < 1e-20

    @pytest.mark.parametrize("order", [4, 6])
    def test_order_scaling_on_harmonic(self, order):
        sysm = make_harmonic()
        exact = np.array([math.cos(2.0), -math.sin(2.0)])
        errs = []
        for h in (0.1, 0.05, 0.025):
            tr = integrate(sysm, (1.0, 0.0), 2.0,
                           PrecisionConfig(53, order, h, 10 ** 6))
            errs.append(np.abs(tr.states[-1] - exact).max())
        for e0, e1 in zip(errs, errs[1:]):
            ratio = e0 / e1
            assert 2 ** order / 4 <= ratio <= 2 ** order * 4

    def test_bit_for_bit_determinism_f64(self):
        a = integrate(LORENZ, (1.0, 1.0, 1.0), 5.0, PrecisionConfig(53, 16, 0.025, 4))
        b = integrate(LORENZ, (1.0, 1.0, 1.0), 5.0, PrecisionConfig(53, 16, 0.025, 4))
        assert np.array_equal(a.states, b.states)

    def test_bit_for_bit_determinism_extended(self):
        cfg = PrecisionConfig(113, 16, 0.025, 10)
        a = integrate(LORENZ, (1.0, 1.0, 1.0), 3.0, cfg)
        b = integrate(LORENZ, (1.0, 1.0, 1.0), 3.0, cfg)
        for ra, rb in zip(a.states_mp, b.states_mp):
            assert all(x == y for x, y in zip(ra, rb))

    def test_divergence_reports_time(self):
        grow = make_linear_diag((5.0,))
        with pytest.raises(DivergedError) as ei:
            integrate(grow, (1.0,), 40.0, PrecisionConfig(53, 8, 0.01, 100))
        assert 0 < ei.value.time <= 40.0
        with pytest.raises(DivergedError):
            integrate(grow, (1.0,), 40.0, PrecisionConfig(80, 8, 0.01, 100))

    def test_input_validation(self):
        with pytest.raises(ValueError):
            integrate(LORENZ, (1.0, 1.0), 1.0, PrecisionConfig())
        with pytest.raises(ValueError):
            integrate(LORENZ, (1.0, 1.0, 1.0), 0.0, PrecisionConfig())

    def test_csv_full_precision_roundtrip(self, tmp_path):
        tr = integrate(LORENZ, (1.0, 1.0, 1.0), 0.5, PrecisionConfig(113, 12, 0.025, 5))
        path = tmp_path / "traj.csv"
        tr.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t,x1,x2,x3"
        assert len(lines) == len(tr.times) + 1
        # decimal strings reparse to the exact mpfr values
        last = lines[-1].split(",")[1:]
        for txt, val in zip(last, tr.states_mp[-1]):
            assert gmpy2.mpfr(txt, precision=113) == val


class TestDivergenceTime:
    def test_identical_runs_full_duration(self):
        cfg = PrecisionConfig(53, 16, 0.025, 4)
        a = integrate(LORENZ, (1.0, 1.0, 1.0), 10.0, cfg)
        b = integrate(LORENZ, (1.0, 1.0, 1.0), 10.0, cfg)
        assert divergence_time(a, b, 1e-12) == pytest.approx(10.0)

    def test_lyapunov_time_prediction(self):
        # on-attractor start, offset 1e-10, tol 1: t ~ ln(1e10)/0.906 ~ 25 LTU
        warm = integrate(LORENZ, (1.0, 1.0, 1.0), 50.0,
                         PrecisionConfig(53, 16, 0.01, 5000))
        x0 = warm.states[-1]
        cfg = PrecisionConfig(53, 16, 0.01, 10)
        a = integrate(LORENZ, x0, 45.0, cfg)
        b = integrate(LORENZ, x0 + np.array([1e-10, 0.0, 0.0]), 45.0, cfg)
        t = divergence_time(a, b, 1.0)
        assert t == divergence_time(b, a, 1.0)
        assert 25.0 * 0.6 <= t <= 25.0 * 1.4

    def test_two_double_runs_vs_reference(self):
        # different step sizes at 53 bits against one high-precision reference
        ref = integrate(LORENZ, (1.0, 1.0, 1.0), 70.0, PrecisionConfig(256, 30, 0.0125, 8))
        t_cs = []
        for h, stride in ((0.025, 4), (0.0125, 8)):
            run = integrate(LORENZ, (1.0, 1.0, 1.0), 70.0, PrecisionConfig(53, 30, h, stride))
            t_cs.append(divergence_time(run, ref, 1e-3))
        for t in t_cs:
            assert 10.0 <= t <= 70.0

    def test_grid_mismatch_rejected(self):
        a = integrate(LORENZ, (1.0, 1.0, 1.0), 2.0, PrecisionConfig(53, 12, 0.025, 4))
        b = integrate(LORENZ, (1.0, 1.0, 1.0), 2.0, PrecisionConfig(53, 12, 0.03, 4))
        with pytest.raises(ValueError):
            divergence_time(a, b, 1e-3)


class TestReliableHorizon:
    def test_identical_configs_never_cross(self):
        cfg = PrecisionConfig(53, 12, 0.025, 4)
        rep = reliable_horizon(STABLE, (1.0, 1.0, 1.0), 1e-9, [cfg, cfg], t_max=5.0)
        assert all(not e.crossed for e in rep.entries)
        assert rep.entries[0].T_c == pytest.approx(5.0)

    def test_monotone_ladder_lorenz(self):
        # order 70 keeps per-step truncation below the 175-bit round-off floor
        base = PrecisionConfig(53, 70, 0.025, 4)
        ladder = [replace(base, mantissa_bits=b) for b in (53, 113, 175)]
        rep = reliable_horizon(LORENZ, (1.0, 1.0, 1.0), 1e-3, ladder,
                               t_max=170.0, rate_hint=0.9056)
        tcs = [e.T_c for e in rep.entries]
        assert all(e.crossed for e in rep.entries)
        assert tcs[0] < tcs[1] < tcs[2]
        # expected near the round-off line T_c ~ 0.76 bits - 5
        assert 25 <= tcs[0] <= 45
        assert 70 <= tcs[1] <= 95
        assert 115 <= tcs[2] <= 145
        slope, _, r2 = horizon_fit(rep)
        assert r2 > 0.98

    def test_jobs_do_not_change_results(self):
        base = PrecisionConfig(53, 24, 0.025, 4)
        ladder = [replace(base, mantissa_bits=b) for b in (53, 113)]
        r1 = reliable_horizon(LORENZ, (1.0, 1.0, 1.0), 1e-3, ladder,
                              t_max=100.0, rate_hint=0.9056, jobs=1)
        r2 = reliable_horizon(LORENZ, (1.0, 1.0, 1.0), 1e-3, ladder,
                              t_max=100.0, rate_hint=0.9056, jobs=2)
        assert [e.T_c for e in r1.entries] == [e.T_c for e in r2.entries]

    def test_unsorted_ladder_rejected(self):
        cfgs = [PrecisionConfig(113, 12, 0.025, 4), PrecisionConfig(53, 12, 0.025, 4)]
        with pytest.raises(ValueError):
            reliable_horizon(LORENZ, (1.0, 1.0, 1.0), 1e-3, cfgs)

    def test_diverging_run_flagged_not_dropped(self):
        grow = make_linear_diag((5.0,))
        ladder = [PrecisionConfig(53, 8, 0.01, 10), PrecisionConfig(113, 8, 0.01, 10)]
        rep = reliable_horizon(grow, (1.0,), 1e-3, ladder, t_max=40.0)
        assert len(rep.entries) == 2
        for e in rep.entries:
            assert e.diverged_at is not None
            assert not e.crossed


class TestHorizonCycles:
    def test_duffing_cycles(self):
        cfg = PrecisionConfig(53, 12, 0.025, 4)
        rep = reliable_horizon(STABLE, (1.0, 1.0, 1.0), 1e-9, [cfg, cfg], t_max=2.0)
        period = DUFFING.forcing_period()
        rep.entries[0].T_c = period          # one forcing cycle
        rep.entries[1].T_c = 0.0
        horizon_in_cycles(rep, DUFFING)
        assert rep.entries[0].horizon_cycles == pytest.approx(1.0)
        assert rep.entries[1].horizon_cycles == 0.0

    def test_lorenz_identity(self):
        cfg = PrecisionConfig(53, 12, 0.025, 4)
        rep = reliable_horizon(STABLE, (1.0, 1.0, 1.0), 1e-9, [cfg, cfg], t_max=2.0)
        horizon_in_cycles(rep, LORENZ)
        for e in rep.entries:
            assert e.horizon_cycles == e.T_c

    def test_report_csv(self, tmp_path):
        cfg = PrecisionConfig(53, 12, 0.025, 4)
        rep = reliable_horizon(STABLE, (1.0, 1.0, 1.0), 1e-9, [cfg, cfg], t_max=2.0)
        horizon_in_cycles(rep, LORENZ)
        rep.to_csv(tmp_path / "h.csv")
        lines = (tmp_path / "h.csv").read_text().strip().splitlines()
        assert lines[0] == "mantissa_bits,method_order,T_c,horizon_cycles"
        assert len(lines) == 3
