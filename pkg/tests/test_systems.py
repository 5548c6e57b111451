import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chaosbench.systems import (DuffingParams, LorenzParams, duffing_field,
                                duffing_jacobian, forcing_period, lorenz_field,
                                lorenz_jacobian, make_duffing, make_lorenz)

D = DuffingParams(alpha=1.0, beta=1.0, delta=0.3, gamma=0.5, omega=1.2)
L = LorenzParams(sigma=10.0, R=28.0, b=8.0 / 3.0)


def fd_jacobian(field, s, h=1e-8):
    """Central finite differences, the independent oracle for the Jacobians."""
    s = np.asarray(s, dtype=float)
    d = len(s)
    J = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        J[:, j] = (field(s + e) - field(s - e)) / (2 * h)
    return J


class TestDuffingField:
    def test_at_origin(self):
        assert np.allclose(duffing_field(D, (0.0, 0.0, 0.0)), [0.0, 0.5, 1.2])

    def test_cubic_cancels_linear(self):
        # alpha x - beta x^3 = 0 at x = 1 when alpha = beta
        assert np.allclose(duffing_field(D, (1.0, 0.0, 0.0)), [0.0, 0.5, 1.2])

    def test_unforced_well_minimum_is_equilibrium(self):
        p = DuffingParams(alpha=2.0, beta=0.5, delta=0.3, gamma=0.0, omega=1.0)
        xeq = math.sqrt(p.alpha / p.beta)
        f = duffing_field(p, (xeq, 0.0, 0.7))
        assert abs(f[0]) < 1e-14 and abs(f[1]) < 1e-14
        assert f[2] == p.omega

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            duffing_field(D, (0.0, 0.0))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            duffing_field(D, (np.nan, 0.0, 0.0))


class TestLorenzField:
    def test_origin_fixed_point(self):
        assert np.allclose(lorenz_field(L, (0.0, 0.0, 0.0)), 0.0)

    def test_analytic_fixed_points(self):
        c = math.sqrt(L.b * (L.R - 1))
        for sgn in (1.0, -1.0):
            f = lorenz_field(L, (sgn * c, sgn * c, L.R - 1))
            assert np.abs(f).max() < 1e-12

    def test_direct_substitution(self):
        assert np.allclose(lorenz_field(L, (1.0, 1.0, 1.0)), [0.0, 26.0, 1.0 - L.b])
        assert abs(lorenz_field(L, (1.0, 1.0, 1.0))[2] - (-5.0 / 3.0)) < 1e-14


class TestJacobians:
    def test_duffing_substitution(self):
        J = duffing_jacobian(DuffingParams(1.0, 1.0, 0.3, 0.5, 1.2), (0.0, 0.0, 0.0))
        assert np.allclose(J, [[0, 1, 0], [1, -0.3, 0], [0, 0, 0]])

    def test_lorenz_substitution(self):
        J = lorenz_jacobian(L, (0.0, 0.0, 0.0))
        assert np.allclose(J, [[-10, 10, 0], [28, -1, 0], [0, 0, -L.b]])

    def test_duffing_trace_is_minus_delta(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            s = rng.uniform(-2, 2, 3)
            assert abs(np.trace(duffing_jacobian(D, s)) + D.delta) < 1e-12

    def test_lorenz_trace_constant(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            s = rng.uniform(-20, 20, 3)
            assert abs(np.trace(lorenz_jacobian(L, s)) + (L.sigma + 1 + L.b)) < 1e-12
        assert abs(-(L.sigma + 1 + L.b) - (-41.0 / 3.0)) < 1e-12

    @pytest.mark.parametrize("params,field,jac", [
        (D, duffing_field, duffing_jacobian),
        (L, lorenz_field, lorenz_jacobian),
    ])
    def test_matches_finite_differences(self, params, field, jac):
        rng = np.random.default_rng(3)
        for _ in range(25):
            s = rng.uniform(-5, 5, 3)
            J = jac(params, s)
            Jfd = fd_jacobian(lambda x: field(params, x), s)
            assert np.allclose(J, Jfd, rtol=1e-6, atol=1e-6)


class TestProperties:
    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-10, 10))
    @settings(max_examples=60, deadline=None)
    def test_duffing_phase_rate_uniform(self, x, y, z):
        assert duffing_field(D, (x, y, z))[2] == D.omega

    @given(st.floats(-20, 20), st.floats(-20, 20), st.floats(0, 50))
    @settings(max_examples=60, deadline=None)
    def test_lorenz_symmetry(self, x, y, z):
        f = lorenz_field(L, (x, y, z))
        g = lorenz_field(L, (-x, -y, z))
        assert np.allclose(g[:2], -f[:2], atol=1e-12)
        assert np.isclose(g[2], f[2], atol=1e-12)


class TestForcingPeriod:
    def test_values(self):
        assert abs(forcing_period(DuffingParams(omega=1.2)) - 2 * math.pi / 1.2) < 1e-14
        assert abs(forcing_period(DuffingParams(omega=2 * math.pi)) - 1.0) < 1e-14
        assert abs(forcing_period(DuffingParams(omega=1.0)) - 2 * math.pi) < 1e-14


class TestParamValidation:
    def test_duffing_positivity(self):
        with pytest.raises(ValueError):
            DuffingParams(alpha=-1.0)
        with pytest.raises(ValueError):
            DuffingParams(delta=0.0)
        with pytest.raises(ValueError):
            DuffingParams(gamma=-0.1)
        DuffingParams(gamma=0.0)  # unforced is allowed

    def test_lorenz_positivity(self):
        with pytest.raises(ValueError):
            LorenzParams(sigma=0.0)
        with pytest.raises(ValueError):
            LorenzParams(b=-1.0)

    def test_system_spec_traces(self):
        assert make_duffing(D).trace == -D.delta
        assert make_lorenz(L).trace == -(L.sigma + 1 + L.b)
