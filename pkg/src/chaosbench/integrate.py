"""Extended-precision integration and the reliable-simulation horizon.

A run at ``mantissa_bits == 53`` short-circuits to hardware doubles; wider
mantissas use the fixed-point Taylor cores with the state rounded to the
requested number of significant bits at every step boundary, stored as MPFR
floats of that precision.  Identical inputs reproduce trajectories
bit-for-bit on both paths.

The reliable horizon of a precision ladder is measured by pairwise
divergence: each rung's T_c is the earliest time its trajectory departs from
the next-higher-precision rung by more than ``tol`` (Euclidean state-space
norm); the topmost rung is validated against an extra step-halved run.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from . import steppers
from .errors import DivergedError
from .systems import (DuffingParams, HarmonicParams, LinearDiagParams,
                      LorenzParams, SystemSpec, make_duffing, make_harmonic,
                      make_linear_diag, make_lorenz)

DIVERGE_LIMIT = 1.0e8
LN2 = math.log(2.0)
LOG10_2 = math.log10(2.0)


@dataclass(frozen=True)
class PrecisionConfig:
    """Knobs of one integration run: mantissa width, Taylor order, step."""

    mantissa_bits: int = 53
    method_order: int = 12
    step_size: float = 0.01
    output_stride: int = 1

    def __post_init__(self):
        if self.mantissa_bits < 53:
            raise ValueError("mantissa_bits must be >= 53")
        if self.method_order < 4 or self.method_order % 2 != 0:
            raise ValueError("method_order must be even and >= 4")
        if not (self.step_size > 0):
            raise ValueError("step_size must be > 0")
        if self.output_stride < 1:
            raise ValueError("output_stride must be >= 1")


@dataclass
class Trajectory:
    """Time-stamped state samples from one integration run.

    ``states`` is always a float64 (n, d) view; ``states_mp`` additionally
    holds the exact mantissa_bits-wide MPFR samples for runs above 53 bits.
    """

    times: np.ndarray
    states: np.ndarray
    config: PrecisionConfig
    system_name: str
    params: object
    seed: int = 0
    states_mp: Optional[list] = None

    @property
    def duration(self) -> float:
        return float(self.times[-1])

    def to_csv(self, path):
        d = self.states.shape[1]
        with open(path, "w") as f:
            f.write("t," + ",".join(f"x{i+1}" for i in range(d)) + "\n")
            if self.states_mp is not None:
                for t, row in zip(self.times, self.states_mp):
                    f.write(repr(float(t)) + "," + ",".join(str(v) for v in row) + "\n")
            else:
                for t, row in zip(self.times, self.states):
                    f.write(repr(float(t)) + "," + ",".join(repr(float(v)) for v in row) + "\n")


def _rebuild_system(kind: str, params) -> SystemSpec:
    if kind == "lorenz":
        return make_lorenz(params)
    if kind == "duffing":
        return make_duffing(params)
    if kind == "harmonic":
        return make_harmonic()
    if kind == "linear":
        return make_linear_diag(params.rates)
    raise ValueError(f"cannot rebuild system of kind {kind!r}")


def _step_plan(T: float, h: float):
    """Full steps of size h plus one final partial step landing exactly on T."""
    n = int(math.floor(T / h + 1e-12))
    h_last = T - n * h
    if h_last < 1e-12 * max(1.0, abs(T)):
        h_last = 0.0
    return n, h_last


def _check_finite_f64(row, t):
    if not np.all(np.isfinite(row)) or np.max(np.abs(row)) > DIVERGE_LIMIT:
        raise DivergedError(t)


def _integrate_f64(system: SystemSpec, x0, T, cfg: PrecisionConfig) -> Trajectory:
    h, M, stride = cfg.step_size, cfg.method_order, cfg.output_stride
    n, h_last = _step_plan(T, h)
    d = system.dimension
    st = np.asarray(x0, dtype=float).reshape(d, 1)
    kind = system.kind
    trig = None
    if kind == "duffing":
        trig = np.array([[math.cos(st[2, 0])], [math.sin(st[2, 0])]])
        p = system.params
        args = (p.alpha, p.beta, p.delta, p.gamma, p.omega)

    def one_step(st, trig, hh):
        if kind == "lorenz":
            return steppers.lorenz_step_f64(st, hh, M, system.params), trig
        if kind == "duffing":
            return steppers.duffing_step_f64(st, trig, hh, M, *args)
        if kind == "harmonic":
            return steppers.harmonic_step_f64(st, hh, M), trig
        if kind == "linear":
            return steppers.linear_step_f64(st, hh, M, system.params), trig
        return steppers.rk4_step_f64(system.field, st[:, 0], hh).reshape(d, 1), trig

    times = [0.0]
    rows = [st[:, 0].copy()]
    # divergence shows up as inf/nan and is reported with its time below
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n + 1):
            st, trig = one_step(st, trig, h)
            if i % stride == 0 or (i == n and h_last == 0.0):
                row = st[:, 0].copy()
                _check_finite_f64(row, i * h)
                times.append(i * h)
                rows.append(row)
        if h_last > 0.0:
            st, trig = one_step(st, trig, h_last)
            row = st[:, 0].copy()
            _check_finite_f64(row, T)
            times.append(T)
            rows.append(row)
    return Trajectory(times=np.array(times), states=np.array(rows), config=cfg,
                      system_name=system.name, params=system.params)


def _integrate_fix(system: SystemSpec, x0, T, cfg: PrecisionConfig) -> Trajectory:
    h, M, stride = cfg.step_size, cfg.method_order, cfg.output_stride
    p = cfg.mantissa_bits
    F = p + steppers.GUARD_BITS
    n, h_last = _step_plan(T, h)
    kind = system.kind
    mz = steppers._mpz
    s = tuple(mz(steppers.round_sig_fix(steppers.to_fix(v, F), p)) for v in np.asarray(x0, dtype=float))
    if kind == "lorenz":
        pf = steppers.lorenz_params_fix(system.params, F)
        stepf = lambda st, tr, hf: (steppers.lorenz_step_fix(st, pf, hf, M, F), None)
        trig = None
    elif kind == "duffing":
        pf = steppers.duffing_params_fix(system.params, F)
        stepf = lambda st, tr, hf: steppers.duffing_step_fix(st, tr, pf, hf, M, F)
        trig = tuple(mz(v) for v in steppers.duffing_trig_fix(float(x0[2]), F))
    elif kind == "harmonic":
        stepf = lambda st, tr, hf: (steppers.harmonic_step_fix(st, None, hf, M, F), None)
        trig = None
    elif kind == "linear":
        rf = tuple(mz(steppers.to_fix(r, F)) for r in system.params.rates)
        stepf = lambda st, tr, hf: (steppers.linear_step_fix(st, rf, hf, M, F), None)
        trig = None
    else:
        raise ValueError(
            "extended precision requires Taylor recurrences; "
            f"system kind {system.kind!r} only supports 53-bit integration")

    h_fix = steppers.to_fix(h, F)
    times = [0.0]
    rows_f64 = [np.array([steppers.fix_to_float(v, F) for v in s])]
    rows_mp = [tuple(steppers.fix_to_mpfr(v, F, p) for v in s)]

    def keep(t, s):
        row = np.array([steppers.fix_to_float(v, F) for v in s])
        _check_finite_f64(row, t)
        times.append(t)
        rows_f64.append(row)
        rows_mp.append(tuple(steppers.fix_to_mpfr(v, F, p) for v in s))

    for i in range(1, n + 1):
        s, trig = stepf(s, trig, h_fix)
        s = tuple(mz(steppers.round_sig_fix(int(v), p)) for v in s)
        if i % stride == 0 or (i == n and h_last == 0.0):
            keep(i * h, s)
    if h_last > 0.0:
        s, trig = stepf(s, trig, steppers.to_fix(h_last, F))
        s = tuple(mz(steppers.round_sig_fix(int(v), p)) for v in s)
        keep(T, s)
    return Trajectory(times=np.array(times), states=np.array(rows_f64), config=cfg,
                      system_name=system.name, params=system.params, states_mp=rows_mp)


def integrate(system: SystemSpec, x0, T: float, cfg: PrecisionConfig) -> Trajectory:
    """Integrate ``system`` from ``x0`` over [0, T] (T snapped to the step grid).

    Raises DivergedError (with the failure time) if the state leaves the
    finite range.  Deterministic: identical inputs give bit-identical output.
    """
    if not (T > 0):
        raise ValueError("T must be > 0")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (system.dimension,):
        raise ValueError(f"x0 must have length {system.dimension}")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    if cfg.mantissa_bits == 53:
        return _integrate_f64(system, x0, T, cfg)
    return _integrate_fix(system, x0, T, cfg)


def divergence_time(a: Trajectory, b: Trajectory, tol: float) -> float:
    """Earliest sampled time at which |a - b| (Euclidean) exceeds tol.

    Returns the full common duration if the tolerance is never exceeded.
    Symmetric in its arguments.  The trajectories must share (a prefix of)
    a common sample grid.
    """
    if not (tol > 0):
        raise ValueError("tol must be > 0")
    ta, tb = a.times, b.times
    n = min(len(ta), len(tb))
    if n < 2 or not np.allclose(ta[:n], tb[:n], rtol=0, atol=1e-9 * max(1.0, abs(ta[min(n, len(ta)) - 1]))):
        raise ValueError("trajectories do not share a common time grid")
    d = np.linalg.norm(a.states[:n] - b.states[:n], axis=1)
    over = np.nonzero(d > tol)[0]
    if len(over) == 0:
        return float(ta[n - 1])
    return float(ta[over[0]])


@dataclass
class HorizonEntry:
    mantissa_bits: int
    method_order: int
    T_c: float
    horizon_cycles: Optional[float] = None
    crossed: bool = True          # False: tolerance never exceeded (T_c is a floor)
    diverged_at: Optional[float] = None


@dataclass
class HorizonReport:
    entries: List[HorizonEntry]
    tolerance: float
    reference_config: PrecisionConfig
    system_name: str = ""
    t_max: float = 0.0

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("mantissa_bits,method_order,T_c,horizon_cycles\n")
            for e in self.entries:
                cyc = "" if e.horizon_cycles is None else repr(e.horizon_cycles)
                f.write(f"{e.mantissa_bits},{e.method_order},{e.T_c!r},{cyc}\n")

    def summary(self) -> dict:
        return {
            "system": self.system_name,
            "tolerance": self.tolerance,
            "t_max": self.t_max,
            "reference_config": {
                "mantissa_bits": self.reference_config.mantissa_bits,
                "method_order": self.reference_config.method_order,
                "step_size": self.reference_config.step_size,
            },
            "entries": [
                {"mantissa_bits": e.mantissa_bits, "method_order": e.method_order,
                 "T_c": e.T_c, "horizon_cycles": e.horizon_cycles,
                 "crossed": e.crossed, "diverged_at": e.diverged_at}
                for e in self.entries
            ],
        }


def _horizon_run(kind, params, x0, T, cfg, sample_every):
    """Worker: one rung integrated with samples every ``sample_every`` time units."""
    system = _rebuild_system(kind, params)
    stride = max(1, int(round(sample_every / cfg.step_size)))
    if abs(stride * cfg.step_size - sample_every) > 1e-9:
        raise ValueError("step_size does not divide the comparison grid")
    run_cfg = replace(cfg, output_stride=stride)
    try:
        traj = integrate(system, x0, T, run_cfg)
        return traj.times, traj.states, None
    except DivergedError as e:
        return None, None, e.time


def reliable_horizon(system: SystemSpec, x0, tol: float,
                     ladder: Sequence[PrecisionConfig], t_max: float = 200.0,
                     jobs: int = 1, rate_hint: Optional[float] = None,
                     validation_order: Optional[int] = None,
                     sample_every: Optional[float] = None) -> HorizonReport:
    """Measure T_c for every rung of a precision ladder.

    Each rung is compared against the next-higher rung; the topmost against
    an internal step-halved run (``validation_order`` overrides its Taylor
    order when the halved step allows a cheaper one).  ``rate_hint`` (an
    estimate of the leading Lyapunov exponent, e.g. from the lyapunov
    module) bounds each rung's integration length; without it every rung
    runs to ``t_max``.  ``jobs > 1`` fans the runs over processes; results
    are identical regardless of the pool size.
    """
    ladder = list(ladder)
    if len(ladder) < 2:
        raise ValueError("ladder needs at least 2 configs")
    bits = [c.mantissa_bits for c in ladder]
    if bits != sorted(bits):
        raise ValueError("ladder must be sorted by increasing mantissa_bits")
    if not (tol > 0):
        raise ValueError("tol must be > 0")

    top = ladder[-1]
    twin = PrecisionConfig(mantissa_bits=top.mantissa_bits,
                           method_order=validation_order or top.method_order,
                           step_size=top.step_size / 2.0,
                           output_stride=top.output_stride)
    if sample_every is None:
        sample_every = max(c.step_size for c in ladder) * max(1, ladder[0].output_stride)

    def planned_length(p_bits):
        if rate_hint is None or rate_hint <= 0:
            return t_max
        t_est = (p_bits * LN2 - math.log(1.0 / tol)) / rate_hint
        return min(t_max, max(sample_every * 4, 1.15 * t_est + 10.0))

    lengths = [planned_length(c.mantissa_bits) for c in ladder]
    lengths.append(lengths[-1])   # twin runs as long as the top rung
    runs_cfg = ladder + [twin]
    args = [(system.kind, system.params, tuple(float(v) for v in np.asarray(x0, float)),
             lengths[i], runs_cfg[i], sample_every) for i in range(len(runs_cfg))]

    if jobs and jobs > 1:
        # schedule the expensive runs first; results keep ladder order
        cost = [lengths[i] / runs_cfg[i].step_size
                * (runs_cfg[i].method_order ** 2)
                * max(1.0, runs_cfg[i].mantissa_bits / 64.0)
                for i in range(len(args))]
        order = sorted(range(len(args)), key=lambda i: -cost[i])
        results = [None] * len(args)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = {i: pool.submit(_horizon_run, *args[i]) for i in order}
            for i, fut in futs.items():
                results[i] = fut.result()
    else:
        results = [_horizon_run(*a) for a in args]

    entries = []
    for i, cfg in enumerate(ladder):
        lo_t, lo_s, lo_div = results[i]
        hi_t, hi_s, hi_div = results[i + 1]
        if lo_div is not None or hi_div is not None:
            t_fail = min(t for t in (lo_div, hi_div) if t is not None)
            entries.append(HorizonEntry(cfg.mantissa_bits, cfg.method_order,
                                        T_c=t_fail, crossed=False, diverged_at=t_fail))
            continue
        n = min(len(lo_t), len(hi_t))
        d = np.linalg.norm(lo_s[:n] - hi_s[:n], axis=1)
        over = np.nonzero(d > tol)[0]
        if len(over):
            entries.append(HorizonEntry(cfg.mantissa_bits, cfg.method_order,
                                        T_c=float(lo_t[over[0]])))
        else:
            entries.append(HorizonEntry(cfg.mantissa_bits, cfg.method_order,
                                        T_c=float(lo_t[n - 1]), crossed=False))
    return HorizonReport(entries=entries, tolerance=tol, reference_config=twin,
                         system_name=system.name, t_max=t_max)


def horizon_in_cycles(report: HorizonReport, system: SystemSpec) -> HorizonReport:
    """Fill horizon_cycles: forcing cycles for Duffing, LTU (identity) for Lorenz."""
    period = system.forcing_period()
    for e in report.entries:
        e.horizon_cycles = e.T_c / period if period else e.T_c
    return report


def horizon_fit(report: HorizonReport):
    """OLS fit of T_c versus decimal digits of precision -> (slope, intercept, r2)."""
    xs = np.array([e.mantissa_bits * LOG10_2 for e in report.entries])
    ys = np.array([e.T_c for e in report.entries])
    if len(xs) < 2:
        raise ValueError("need at least 2 entries to fit")
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    pred = A @ coef
    sst = ((ys - ys.mean()) ** 2).sum()
    r2 = 1.0 - ((ys - pred) ** 2).sum() / sst if sst > 0 else 1.0
    return float(coef[0]), float(coef[1]), float(r2)
