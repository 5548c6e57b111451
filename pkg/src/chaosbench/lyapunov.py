"""Lyapunov spectrum via tangent-space evolution with periodic re-orthonormalization.

The tangent matrix is integrated alongside the base state by the same Taylor
cores at the same precision; Gram-Schmidt renormalization runs in the same
fixed-point arithmetic.  The dynamical-entropy rate is obtained from the
spectrum as the sum of strictly positive exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import gmpy2
import numpy as np

from . import steppers
from .errors import DivergedError
from .integrate import PrecisionConfig
from .systems import SystemSpec

ZERO_EXPONENT_TOL = 0.005


@dataclass
class LyapunovSpectrum:
    exponents: List[float]           # sorted descending, 1/time units
    t_total: float
    renorm_interval: float
    history_times: np.ndarray        # running estimates (one row per checkpoint)
    history: np.ndarray
    flagged: bool = False            # True when the run did not converge

    def to_csv(self, path):
        d = self.history.shape[1]
        with open(path, "w") as f:
            f.write("t," + ",".join(f"lambda_{i+1}" for i in range(d)) + "\n")
            for t, row in zip(self.history_times, self.history):
                f.write(repr(float(t)) + "," + ",".join(repr(float(v)) for v in row) + "\n")


def ks_entropy(spec: LyapunovSpectrum) -> float:
    """Entropy rate from the spectrum: sum of strictly positive exponents.

    Exponents within +-0.005 of zero count as zero (the flow direction
    always contributes a numerical near-zero).
    """
    return float(sum(l for l in spec.exponents if l > ZERO_EXPONENT_TOL))


def _gs_f64(V):
    out = []
    norms = []
    for c in range(len(V)):
        v = list(V[c])
        for u in out:
            dd = sum(a * b for a, b in zip(v, u))
            v = [a - dd * b for a, b in zip(v, u)]
        n = math.sqrt(sum(a * a for a in v))
        out.append([a / n for a in v])
        norms.append(n)
    return [tuple(v) for v in out], norms


def _gs_fix(V, F):
    """Modified Gram-Schmidt on fixed-point tangent columns; exact integer ops."""
    half = 1 << (F - 1)
    out = []
    norms = []
    for c in range(len(V)):
        v = [int(a) for a in V[c]]
        for u in out:
            dd = 0
            for a, b in zip(v, u):
                dd += a * b
            dd = (dd + half) >> F
            v = [a - ((dd * b + half) >> F) for a, b in zip(v, u)]
        n2 = 0
        for a in v:
            n2 += a * a
        n = gmpy2.isqrt(n2)          # norm carries F fractional bits
        out.append([(a << F) // n for a in v])
        norms.append(steppers.fix_to_float(int(n), F))
    return [tuple(steppers._mpz(a) for a in v) for v in out], norms


def _default_burn_in(system: SystemSpec) -> float:
    period = system.forcing_period()
    if period is not None:
        return 100.0 * period
    return 100.0


def lyapunov_spectrum(system: SystemSpec, x0, t_total: float,
                      renorm_interval: float = 0.5,
                      cfg: PrecisionConfig = PrecisionConfig(53, 16, 0.05, 1),
                      burn_in: Optional[float] = None,
                      tangent_seed: Optional[int] = None,
                      checkpoints: int = 50) -> LyapunovSpectrum:
    """Benettin scheme: evolve an orthonormal tangent frame, renormalize
    every ``renorm_interval``, average the log stretching factors.

    ``burn_in`` (default 100 time units, or 100 forcing cycles for the
    periodically forced system) is integrated before accumulation starts.
    ``tangent_seed`` draws a random initial frame instead of the identity.
    The run is flagged (not raised) when the leading exponent moved by more
    than 10% between the last two checkpoints.
    """
    if t_total <= renorm_interval or renorm_interval <= 0:
        raise ValueError("need t_total >> renorm_interval > 0")
    d = system.dimension
    x0 = np.asarray(x0, dtype=float)
    if burn_in is None:
        burn_in = _default_burn_in(system)
    h = cfg.step_size
    spr = int(round(renorm_interval / h))
    if spr < 1 or abs(spr * h - renorm_interval) > 1e-9:
        raise ValueError("renorm_interval must be a multiple of step_size")
    n_burn = int(round(burn_in / renorm_interval))
    n_tot = n_burn + int(round((t_total) / renorm_interval))

    if tangent_seed is None:
        V0 = np.eye(d)
    else:
        rng = np.random.default_rng(tangent_seed)
        mat = rng.standard_normal((d, d))
        q, _ = np.linalg.qr(mat)
        V0 = q.T

    if cfg.mantissa_bits == 53:
        return _benettin_f64(system, x0, V0, n_burn, n_tot, spr, h, cfg,
                             renorm_interval, checkpoints)
    return _benettin_fix(system, x0, V0, n_burn, n_tot, spr, h, cfg,
                         renorm_interval, checkpoints)


def _checkpoint_stride(n_accum, checkpoints):
    return max(1, n_accum // max(2, checkpoints))


def _finish(S, t_acc, hist_t, hist, renorm_interval, t_total):
    order = np.argsort(S)[::-1]
    exps = [float(S[i] / t_acc) for i in order]
    hist = np.array(hist)[:, order] if len(hist) else np.zeros((0, len(S)))
    flagged = False
    if len(hist) >= 2:
        a, b = hist[-2][0], hist[-1][0]
        if abs(b - a) > 0.1 * max(abs(b), 0.01):
            flagged = True
    return LyapunovSpectrum(exponents=exps, t_total=t_total,
                            renorm_interval=renorm_interval,
                            history_times=np.array(hist_t), history=hist,
                            flagged=flagged)


def _benettin_f64(system, x0, V0, n_burn, n_tot, spr, h, cfg, renorm_interval,
                  checkpoints):
    kind = system.kind
    M = cfg.method_order
    d = system.dimension
    s = tuple(float(v) for v in x0)
    V = [tuple(float(v) for v in row) for row in V0]
    trig = (math.cos(s[2]), math.sin(s[2])) if kind == "duffing" else None
    jac = system.jacobian

    def advance(s, trig, V):
        if kind == "lorenz":
            s2, V2 = steppers.lorenz_tan_step_f64(s, V, h, M, system.params)
            return s2, trig, V2
        if kind == "duffing":
            return steppers.duffing_tan_step_f64(s, trig, V, h, M, system.params)
        if kind == "linear":
            s2, V2 = steppers.linear_tan_step_f64(s, V, h, M, system.params)
            return s2, trig, V2
        # generic fallback: RK4 on the augmented (state, tangent) system
        def aug_field(w):
            st = w[:d]
            Vm = w[d:].reshape(d, d)
            return np.concatenate([system.field(st), (Vm @ jac(st).T).ravel()])
        w = np.concatenate([np.array(s), np.array(V).ravel()])
        w = steppers.rk4_step_f64(aug_field, w, h)
        return tuple(w[:d]), trig, [tuple(r) for r in w[d:].reshape(d, d)]

    S = np.zeros(d)
    t_acc = 0.0
    hist_t = []
    hist = []
    n_accum = n_tot - n_burn
    cstride = _checkpoint_stride(n_accum, checkpoints)
    for i in range(n_tot):
        for _ in range(spr):
            s, trig, V = advance(s, trig, V)
        if not all(math.isfinite(v) for v in s):
            raise DivergedError((i + 1) * renorm_interval)
        V, norms = _gs_f64(V)
        if i >= n_burn:
            S += np.log(norms)
            t_acc += renorm_interval
            j = i - n_burn
            if (j + 1) % cstride == 0 or i == n_tot - 1:
                hist_t.append(t_acc)
                hist.append(sorted(S / t_acc, reverse=True))
    return _finish(S, t_acc, hist_t, hist, renorm_interval, t_acc)


def _benettin_fix(system, x0, V0, n_burn, n_tot, spr, h, cfg, renorm_interval,
                  checkpoints):
    kind = system.kind
    M = cfg.method_order
    p = cfg.mantissa_bits
    F = p + steppers.GUARD_BITS
    d = system.dimension
    mz = steppers._mpz
    h_fix = steppers.to_fix(h, F)
    s = tuple(mz(steppers.to_fix(v, F)) for v in x0)
    V = [tuple(mz(steppers.to_fix(v, F)) for v in row) for row in V0]
    if kind == "lorenz":
        pf = steppers.lorenz_params_fix(system.params, F)
        trig = None
    elif kind == "duffing":
        pf = steppers.duffing_params_fix(system.params, F)
        trig = tuple(mz(v) for v in steppers.duffing_trig_fix(float(x0[2]), F))
    elif kind == "linear":
        pf = tuple(mz(steppers.to_fix(r, F)) for r in system.params.rates)
        trig = None
    else:
        raise ValueError(f"extended-precision tangent flow not available for kind {kind!r}")

    def advance(s, trig, V):
        if kind == "lorenz":
            s2, V2 = steppers.lorenz_tan_step_fix(s, V, pf, h_fix, M, F)
            return s2, trig, V2
        if kind == "duffing":
            return steppers.duffing_tan_step_fix(s, trig, V, pf, h_fix, M, F)
        s2 = steppers.linear_step_fix(s, pf, h_fix, M, F)
        V2 = [steppers.linear_step_fix(col, pf, h_fix, M, F) for col in V]
        return s2, trig, V2

    S = np.zeros(d)
    t_acc = 0.0
    hist_t = []
    hist = []
    n_accum = n_tot - n_burn
    cstride = _checkpoint_stride(n_accum, checkpoints)
    lim = steppers.to_fix(1e8, F)
    for i in range(n_tot):
        for _ in range(spr):
            s, trig, V = advance(s, trig, V)
            s = tuple(mz(steppers.round_sig_fix(int(v), p)) for v in s)
        if any(abs(int(v)) > lim for v in s):
            raise DivergedError((i + 1) * renorm_interval)
        V, norms = _gs_fix(V, F)
        if i >= n_burn:
            S += np.log(norms)
            t_acc += renorm_interval
            j = i - n_burn
            if (j + 1) % cstride == 0 or i == n_tot - 1:
                hist_t.append(t_acc)
                hist.append(sorted(S / t_acc, reverse=True))
    return _finish(S, t_acc, hist_t, hist, renorm_interval, t_acc)
