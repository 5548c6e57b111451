"""Continuous-time systems: parameterized vector fields with analytic Jacobians.

Shipped systems: the periodically forced Duffing oscillator in autonomous
form (x, y, z) with z the forcing phase, the Lorenz system, and two small
test systems (harmonic oscillator, diagonal linear flow) used to verify
integrator order and Lyapunov extraction.

All fields and Jacobians are pure functions of (params, state) and are safe
to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


def _check_state(s, d: int) -> np.ndarray:
    a = np.asarray(s, dtype=float)
    if a.shape != (d,):
        raise ValueError(f"state must have length {d}, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("state contains non-finite components")
    return a


@dataclass(frozen=True)
class DuffingParams:
    """Parameters of x'' + delta x' - alpha x + beta x^3 = gamma cos(omega t).

    alpha, beta, delta, omega must be strictly positive; gamma >= 0
    (gamma = 0 is allowed for unforced test cases).
    """

    alpha: float = 1.0
    beta: float = 1.0
    delta: float = 0.25
    gamma: float = 0.3
    omega: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "delta", "omega"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")


@dataclass(frozen=True)
class LorenzParams:
    sigma: float = 10.0
    R: float = 28.0
    b: float = 8.0 / 3.0

    def __post_init__(self):
        if self.sigma <= 0 or self.R <= 0 or self.b <= 0:
            raise ValueError("sigma, R, b must all be > 0")


def duffing_field(params: DuffingParams, s) -> np.ndarray:
    """Autonomous Duffing field: (y, alpha x - beta x^3 - delta y + gamma cos z, omega)."""
    x, y, z = _check_state(s, 3)
    return np.array([
        y,
        params.alpha * x - params.beta * x ** 3 - params.delta * y
        + params.gamma * math.cos(z),
        params.omega,
    ])


def duffing_jacobian(params: DuffingParams, s) -> np.ndarray:
    x, _, z = _check_state(s, 3)
    return np.array([
        [0.0, 1.0, 0.0],
        [params.alpha - 3.0 * params.beta * x * x, -params.delta,
         -params.gamma * math.sin(z)],
        [0.0, 0.0, 0.0],
    ])


def lorenz_field(params: LorenzParams, s) -> np.ndarray:
    """Lorenz field in the standard form (sigma(y - x), Rx - y - xz, xy - bz)."""
    x, y, z = _check_state(s, 3)
    return np.array([
        params.sigma * (y - x),
        params.R * x - y - x * z,
        x * y - params.b * z,
    ])


def lorenz_jacobian(params: LorenzParams, s) -> np.ndarray:
    x, y, z = _check_state(s, 3)
    return np.array([
        [-params.sigma, params.sigma, 0.0],
        [params.R - z, -1.0, -x],
        [y, x, -params.b],
    ])


def forcing_period(params: DuffingParams) -> float:
    """Duration of one forcing cycle, 2*pi/omega."""
    if params.omega <= 0:
        raise ValueError("omega must be > 0")
    return 2.0 * math.pi / params.omega


@dataclass(frozen=True)
class SystemSpec:
    """A named autonomous vector field with its analytic Jacobian.

    ``kind`` selects the matching high-order Taylor recurrences in
    :mod:`chaosbench.steppers`; systems built with :func:`make_custom`
    carry kind ``"custom"`` and fall back to fixed-step RK4 at 53 bits.
    """

    name: str
    kind: str
    dimension: int
    params: object
    field: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    # mean divergence (Jacobian trace) when constant, for spectrum checks
    trace: Optional[float] = None

    def forcing_period(self) -> Optional[float]:
        if isinstance(self.params, DuffingParams):
            return forcing_period(self.params)
        return None


def make_duffing(params: DuffingParams = DuffingParams(), name: str = "duffing") -> SystemSpec:
    return SystemSpec(
        name=name, kind="duffing", dimension=3, params=params,
        field=lambda s, p=params: duffing_field(p, s),
        jacobian=lambda s, p=params: duffing_jacobian(p, s),
        trace=-params.delta,
    )


def make_lorenz(params: LorenzParams = LorenzParams(), name: str = "lorenz") -> SystemSpec:
    return SystemSpec(
        name=name, kind="lorenz", dimension=3, params=params,
        field=lambda s, p=params: lorenz_field(p, s),
        jacobian=lambda s, p=params: lorenz_jacobian(p, s),
        trace=-(params.sigma + 1.0 + params.b),
    )


@dataclass(frozen=True)
class HarmonicParams:
    """x' = y, y' = -x; exact solution cos/sin, used for order verification."""


def make_harmonic() -> SystemSpec:
    def fld(s):
        x, y = _check_state(s, 2)
        return np.array([y, -x])

    def jac(s):
        _check_state(s, 2)
        return np.array([[0.0, 1.0], [-1.0, 0.0]])

    return SystemSpec(name="harmonic", kind="harmonic", dimension=2,
                      params=HarmonicParams(), field=fld, jacobian=jac, trace=0.0)


@dataclass(frozen=True)
class LinearDiagParams:
    rates: tuple

    def __post_init__(self):
        if len(self.rates) == 0:
            raise ValueError("rates must be non-empty")


def make_linear_diag(rates) -> SystemSpec:
    """Decoupled linear flow x_i' = a_i x_i with known Lyapunov exponents a_i."""
    p = LinearDiagParams(tuple(float(r) for r in rates))
    d = len(p.rates)

    def fld(s, rr=p.rates):
        a = _check_state(s, d)
        return np.array(rr) * a

    def jac(s, rr=p.rates):
        _check_state(s, d)
        return np.diag(rr)

    return SystemSpec(name="linear-diag", kind="linear", dimension=d,
                      params=p, field=fld, jacobian=jac, trace=float(sum(p.rates)))


def make_custom(name, dimension, field, jacobian, params=None) -> SystemSpec:
    """Wrap a user-supplied field; integrated by the RK4 fallback at 53 bits."""
    return SystemSpec(name=name, kind="custom", dimension=dimension,
                      params=params, field=field, jacobian=jacobian)
