"""Quantized cat map under repeated coarse measurement.

The finite-dimensional counterpart of the classical ensembles: one unitary
cat-map kick followed by block dephasing in the position basis per time
step.  The von Neumann entropy of the evolving density matrix saturates at
ln N (N = Hilbert-space dimension = phase-space volume over the effective
Planck constant), while the matched classical ensemble's coarse-grained
entropy ceiling keeps rising as the partition refines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .entropy import EntropyCurve

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
EIG_FLOOR = -1e-10
UNITARITY_TOL = 1e-10
DEFAULT_N_CAP = 2048

# classical stretching factor of the cat matrix [[2,1],[1,1]]
CAT_MULTIPLIER = (3.0 + math.sqrt(5.0)) / 2.0
CAT_KS_ENTROPY = math.log(CAT_MULTIPLIER)


@dataclass
class QuantumModel:
    N: int
    omega_vol: float
    hbar_eff: float
    unitary: np.ndarray

    def __post_init__(self):
        if abs(self.hbar_eff * self.N - self.omega_vol) > 1e-12:
            raise ValueError("hbar_eff * N must equal omega_vol exactly")


@dataclass
class DensityMatrix:
    rho: np.ndarray

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        n, m = self.rho.shape
        if n != m:
            raise ValueError("density matrix must be square")
        self.validate()

    @property
    def N(self):
        return self.rho.shape[0]

    def validate(self):
        if np.abs(self.rho - self.rho.conj().T).max() > HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian within 1e-12")
        tr = self.rho.trace()
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError("density matrix trace differs from 1 beyond 1e-10")
        ev = np.linalg.eigvalsh(self.rho)
        if ev.min() < EIG_FLOOR:
            raise ValueError("density matrix has an eigenvalue below -1e-10")
        return self


@dataclass(frozen=True)
class MeasurementPartition:
    """M consecutive position-basis blocks of size N/M (M must divide N)."""

    N: int
    M: int

    def __post_init__(self):
        if self.M < 1 or self.N % self.M != 0:
            raise ValueError("M must divide N")

    def block_ids(self) -> np.ndarray:
        return np.arange(self.N) // (self.N // self.M)

    def mask(self) -> np.ndarray:
        b = self.block_ids()
        return b[:, None] == b[None, :]


def cat_map_unitary(N: int, n_cap: int = DEFAULT_N_CAP) -> QuantumModel:
    """Quantization of the torus cat map [[2,1],[1,1]] on N position states.

    Matrix elements are N^(-1/2) exp((2 pi i / N)(q'^2 - q q' + q^2)); the
    quadratic phase is reduced mod N exactly in integers, so unitarity holds
    for every N >= 2 (verified at construction and rejected otherwise).
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if N > n_cap:
        raise ValueError(f"N={N} exceeds the dense-matrix cap {n_cap}")
    q = np.arange(N, dtype=np.int64)
    phase = (np.add.outer(q * q, q * q) - np.outer(q, q)) % N
    U = np.exp(2j * np.pi * phase / N) / math.sqrt(N)
    err = np.abs(U @ U.conj().T - np.eye(N)).max()
    if err > UNITARITY_TOL:
        raise ValueError(f"quantization failed unitarity for N={N} (err={err:.2e})")
    return QuantumModel(N=N, omega_vol=1.0, hbar_eff=1.0 / N, unitary=U)


def position_state(N: int, q: int) -> DensityMatrix:
    rho = np.zeros((N, N), dtype=complex)
    rho[q % N, q % N] = 1.0
    return DensityMatrix(rho)


def maximally_mixed(N: int) -> DensityMatrix:
    return DensityMatrix(np.eye(N, dtype=complex) / N)


def coherent_state(N: int, q0: float, p0: float = 0.0) -> DensityMatrix:
    """Gaussian wavepacket on the torus centered at (q0/N, p0/N)."""
    q = np.arange(N)
    psi = np.zeros(N, dtype=complex)
    for w in range(-3, 4):
        x = (q - q0) / N + w
        psi = psi + np.exp(-np.pi * N * x * x + 2j * np.pi * p0 * (q + w * N) / N)
    psi /= np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()))


def position_block_state(N: int, M: int, block: int) -> DensityMatrix:
    """Pure uniform superposition over one measurement block."""
    size = N // M
    psi = np.zeros(N, dtype=complex)
    psi[block * size:(block + 1) * size] = 1.0 / math.sqrt(size)
    return DensityMatrix(np.outer(psi, psi.conj()))


def _as_matrix(rho):
    return rho.rho if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def measured_step(rho, model: QuantumModel, part: MeasurementPartition) -> DensityMatrix:
    """One kick: rho -> sum_m P_m (U rho U+) P_m (unitary step, block dephasing)."""
    r = _as_matrix(rho)
    if r.shape[0] != model.N or part.N != model.N:
        raise ValueError("dimension mismatch between state, model and partition")
    U = model.unitary
    out = U @ r @ U.conj().T
    out = np.where(part.mask(), out, 0.0)
    out = 0.5 * (out + out.conj().T)          # kill round-off asymmetry
    return DensityMatrix(out)


def von_neumann_entropy(rho) -> float:
    """-sum eigenvalue ln eigenvalue, with 0 ln 0 = 0 (nats)."""
    r = _as_matrix(rho)
    if np.abs(r - r.conj().T).max() > HERMITICITY_TOL:
        raise ValueError("input is not Hermitian within 1e-12")
    if abs(r.trace() - 1.0) > TRACE_TOL:
        raise ValueError("input trace differs from 1 beyond 1e-10")
    ev = np.linalg.eigvalsh(r)
    if ev.min() < EIG_FLOOR:
        raise ValueError("input has an eigenvalue below -1e-10")
    ev = ev[ev > 0.0]
    return float(-(ev * np.log(ev)).sum())


def quantum_entropy_curve(model: QuantumModel, part: MeasurementPartition,
                          rho0, steps: int,
                          metadata: Optional[dict] = None) -> EntropyCurve:
    """Entropy after each measured kick; times are the kick indices."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rho = DensityMatrix(_as_matrix(rho0))
    H = [von_neumann_entropy(rho)]
    for _ in range(steps):
        rho = measured_step(rho, model, part)
        H.append(von_neumann_entropy(rho))
    meta = {"N": model.N, "M": part.M, "model": "cat"}
    if metadata:
        meta.update(metadata)
    n = len(H)
    return EntropyCurve(times=np.arange(n, dtype=float), entropy=np.array(H),
                        occupied_cells=np.zeros(n, dtype=np.int64),
                        overflow_mass=np.zeros(n), metadata=meta)


def initial_slope_window(curve: EntropyCurve, min_points: int = 5):
    """Per-kick slope window: kick 0 up to the first kick at 60% of the plateau."""
    sat = curve.saturation()
    k60 = int(np.argmax(curve.entropy >= 0.60 * sat))
    k_end = max(min_points - 1, k60)
    k_end = min(k_end, len(curve.times) - 1)
    return 0.0, float(curve.times[k_end])


# ----------------------------------------------------------------------
# matched classical counterpart

def classical_cat_map(x: np.ndarray, p: np.ndarray):
    """One iterate of the torus automorphism [[2,1],[1,1]]."""
    return (2.0 * x + p) % 1.0, (x + p) % 1.0


def classical_cat_entropy_curve(bins: int, K: int = 100_000, steps: int = 30,
                                seed: int = 0, start_cell: int = 0,
                                momentum_bins: Optional[int] = None) -> EntropyCurve:
    """Coarse-grained entropy of a classical cat-map ensemble.

    The partition matches the quantum measurement: ``bins`` position cells
    (cell size eps = 1/bins); ``momentum_bins`` adds a second partition axis
    for a full phase-space grid.  The ensemble starts uniformly inside one
    cell, so H(0) = 0 and the ceiling is the log of the cell count.
    """
    if bins < 2 or K < 100 or steps < 1:
        raise ValueError("need bins >= 2, K >= 100, steps >= 1")
    rng = np.random.default_rng(seed)
    x = (start_cell + rng.random(K)) / bins
    p = rng.random(K) / (momentum_bins or bins)
    H = np.empty(steps + 1)
    occ = np.empty(steps + 1, dtype=np.int64)
    for s in range(steps + 1):
        ix = np.floor(x * bins).astype(np.int64)
        if momentum_bins:
            flat = ix * momentum_bins + np.floor(p * momentum_bins).astype(np.int64)
        else:
            flat = ix
        _, counts = np.unique(flat, return_counts=True)
        pr = counts / K
        H[s] = float(-(pr * np.log(pr)).sum())
        occ[s] = len(counts)
        if s < steps:
            x, p = classical_cat_map(x, p)
    meta = {"model": "classical-cat", "bins": bins, "K": K, "seed": seed,
            "momentum_bins": momentum_bins or 0, "eps": 1.0 / bins}
    return EntropyCurve(times=np.arange(steps + 1, dtype=float), entropy=H,
                        occupied_cells=occ, overflow_mass=np.zeros(steps + 1),
                        metadata=meta)
