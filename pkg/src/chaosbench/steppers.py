"""Fixed-step high-order Taylor cores for the shipped systems.

Two execution backends share the same recurrences:

* float64, vectorized with numpy over ensemble columns (the 53-bit fast path);
* scaled-integer fixed point (gmpy2.mpz) carrying ``mantissa_bits + GUARD_BITS``
  fractional bits inside a step, with the state rounded back to
  ``mantissa_bits`` significant bits at every step boundary.  Boundary states
  are exactly representable as MPFR floats of that precision, so a run at p
  bits behaves as p-bit software floating point with the round-off injected
  once per step instead of once per operation.

Taylor coefficients are generated recursively from the polynomial /
trigonometric right-hand sides; products of series are explicit Cauchy
convolutions.  cos z and sin z for the Duffing phase are carried as auxiliary
series seeded once per run from MPFR's correctly rounded (<= 0.5 ulp) trig
and advanced by their own recurrence, so no per-step argument reduction is
needed; the phase z itself stays unwrapped.

A fixed-step RK4 fallback covers custom systems at 53 bits behind the same
interface.
"""

from __future__ import annotations

import math
import operator

import gmpy2
import numpy as np

GUARD_BITS = 32


# ----------------------------------------------------------------------
# fixed-point helpers

def to_fix(value, F: int) -> int:
    """Scale a number to an integer with F fractional bits (round to nearest)."""
    if isinstance(value, (int, np.integer)):
        return int(value) << F
    x = gmpy2.mpfr(value, precision=F + 64)
    return int(gmpy2.rint(gmpy2.mul_2exp(x, F)))


def fix_to_mpfr(v: int, F: int, prec: int):
    """Fixed-point -> MPFR at the requested precision (one correct rounding)."""
    v = int(v)
    with gmpy2.context(precision=prec):
        return gmpy2.div_2exp(gmpy2.mpfr(v, precision=max(prec, v.bit_length() + 2)), F)


def fix_to_float(v: int, F: int) -> float:
    return float(fix_to_mpfr(v, F, 53))


def round_sig_fix(v: int, p: int) -> int:
    """Round a fixed-point integer to p significant bits (the mantissa knob)."""
    if v == 0:
        return 0
    a = abs(v)
    drop = a.bit_length() - p
    if drop <= 0:
        return v
    half = 1 << (drop - 1)
    a = ((a + half) >> drop) << drop
    return a if v > 0 else -a


def _mpz(v):
    return gmpy2.mpz(v)


# ----------------------------------------------------------------------
# float64 vectorized cores (states are (d, K) arrays)

def lorenz_step_f64(st, h, M, params):
    sig, R, b = params.sigma, params.R, params.b
    K = st.shape[1]
    X = np.empty((M + 1, K)); Y = np.empty((M + 1, K)); Z = np.empty((M + 1, K))
    X[0], Y[0], Z[0] = st
    for k in range(M):
        kk = k + 1
        xz = np.einsum("ij,ij->j", X[:kk], Z[k::-1])
        xy = np.einsum("ij,ij->j", X[:kk], Y[k::-1])
        X[kk] = sig * (Y[k] - X[k]) / kk
        Y[kk] = (R * X[k] - Y[k] - xz) / kk
        Z[kk] = (xy - b * Z[k]) / kk
    nx, ny, nz = X[M].copy(), Y[M].copy(), Z[M].copy()
    for k in range(M - 1, -1, -1):
        nx = nx * h + X[k]; ny = ny * h + Y[k]; nz = nz * h + Z[k]
    return np.array([nx, ny, nz])


def duffing_step_f64(st, trig, h, M, al, be, de, ga, om):
    """One Duffing step. al/ga/om may be scalars or per-column arrays.

    ``trig`` is the carried (cos z, sin z) pair, advanced by series.
    Returns (new_state, new_trig).
    """
    K = st.shape[1]
    X = np.empty((M + 1, K)); Y = np.empty((M + 1, K)); Z = np.empty((M + 1, K))
    C = np.empty((M + 1, K)); S = np.empty((M + 1, K))
    U = np.empty((M + 1, K)); W = np.empty((M + 1, K))
    X[0], Y[0], Z[0] = st
    C[0], S[0] = trig
    U[0] = X[0] * X[0]
    W[0] = U[0] * X[0]
    for k in range(M):
        kk = k + 1
        X[kk] = Y[k] / kk
        Y[kk] = (al * X[k] - be * W[k] - de * Y[k] + ga * C[k]) / kk
        Z[kk] = om / kk if k == 0 else 0.0
        C[kk] = -om * S[k] / kk
        S[kk] = om * C[k] / kk
        U[kk] = np.einsum("ij,ij->j", X[:kk + 1], X[kk::-1])
        W[kk] = np.einsum("ij,ij->j", U[:kk + 1], X[kk::-1])
    outs = []
    for A in (X, Y, Z, C, S):
        v = A[M].copy()
        for k in range(M - 1, -1, -1):
            v = v * h + A[k]
        outs.append(v)
    return np.array(outs[:3]), np.array(outs[3:])


def harmonic_step_f64(st, h, M, params=None):
    K = st.shape[1]
    X = np.empty((M + 1, K)); Y = np.empty((M + 1, K))
    X[0], Y[0] = st
    for k in range(M):
        kk = k + 1
        X[kk] = Y[k] / kk
        Y[kk] = -X[k] / kk
    nx, ny = X[M].copy(), Y[M].copy()
    for k in range(M - 1, -1, -1):
        nx = nx * h + X[k]; ny = ny * h + Y[k]
    return np.array([nx, ny])


def linear_step_f64(st, h, M, params):
    rates = np.asarray(params.rates)[:, None]
    d, K = st.shape
    A = np.empty((M + 1, d, K))
    A[0] = st
    for k in range(M):
        A[k + 1] = rates * A[k] / (k + 1)
    v = A[M].copy()
    for k in range(M - 1, -1, -1):
        v = v * h + A[k]
    return v


def rk4_step_f64(field, st, h):
    """Classic RK4 on a single state vector; fallback for custom systems."""
    k1 = field(st)
    k2 = field(st + 0.5 * h * k1)
    k3 = field(st + 0.5 * h * k2)
    k4 = field(st + h * k3)
    return st + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# ----------------------------------------------------------------------
# float64 scalar tangent cores (python floats; base state + 3 tangent columns)

def lorenz_tan_step_f64(s, V, h, M, params):
    sig, R, b = params.sigma, params.R, params.b
    X = [s[0]]; Y = [s[1]]; Z = [s[2]]
    VC = [[[V[c][0]], [V[c][1]], [V[c][2]]] for c in range(3)]
    for k in range(M):
        kk = k + 1
        xz = sum(X[j] * Z[k - j] for j in range(kk))
        xy = sum(X[j] * Y[k - j] for j in range(kk))
        X.append(sig * (Y[k] - X[k]) / kk)
        Y.append((R * X[k] - Y[k] - xz) / kk)
        Z.append((xy - b * Z[k]) / kk)
        for c in range(3):
            v1, v2, v3 = VC[c]
            zv1 = sum(Z[j] * v1[k - j] for j in range(kk))
            xv3 = sum(X[j] * v3[k - j] for j in range(kk))
            yv1 = sum(Y[j] * v1[k - j] for j in range(kk))
            xv2 = sum(X[j] * v2[k - j] for j in range(kk))
            v1.append(sig * (v2[k] - v1[k]) / kk)
            v2.append((R * v1[k] - zv1 - v2[k] - xv3) / kk)
            v3.append((yv1 + xv2 - b * v3[k]) / kk)

    def horner(cs):
        r = cs[M]
        for k in range(M - 1, -1, -1):
            r = r * h + cs[k]
        return r

    s2 = (horner(X), horner(Y), horner(Z))
    V2 = [(horner(VC[c][0]), horner(VC[c][1]), horner(VC[c][2])) for c in range(3)]
    return s2, V2


def duffing_tan_step_f64(s, trig, V, h, M, params):
    al, be, de, ga, om = (params.alpha, params.beta, params.delta,
                          params.gamma, params.omega)
    X = [s[0]]; Y = [s[1]]; Z = [s[2]]
    C = [trig[0]]; S = [trig[1]]
    U = [X[0] * X[0]]; W = [U[0] * X[0]]
    VC = [[[V[c][0]], [V[c][1]], [V[c][2]]] for c in range(3)]
    for k in range(M):
        kk = k + 1
        X.append(Y[k] / kk)
        Y.append((al * X[k] - be * W[k] - de * Y[k] + ga * C[k]) / kk)
        Z.append(om / kk if k == 0 else 0.0)
        C.append(-om * S[k] / kk)
        S.append(om * C[k] / kk)
        U.append(sum(X[j] * X[kk - j] for j in range(kk + 1)))
        W.append(sum(U[j] * X[kk - j] for j in range(kk + 1)))
        for c in range(3):
            v1, v2, v3 = VC[c]
            uv1 = sum(U[j] * v1[k - j] for j in range(kk))
            sv3 = sum(S[j] * v3[k - j] for j in range(kk))
            v1.append(v2[k] / kk)
            v2.append((al * v1[k] - 3.0 * be * uv1 - de * v2[k] - ga * sv3) / kk)
            v3.append(0.0)

    def horner(cs):
        r = cs[M]
        for k in range(M - 1, -1, -1):
            r = r * h + cs[k]
        return r

    s2 = (horner(X), horner(Y), horner(Z))
    t2 = (horner(C), horner(S))
    V2 = [(horner(VC[c][0]), horner(VC[c][1]), horner(VC[c][2])) for c in range(3)]
    return s2, t2, V2


def linear_tan_step_f64(s, V, h, M, params):
    rates = params.rates
    d = len(rates)
    fac = [math.exp(r * h) for r in rates]   # exact linear flow
    s2 = tuple(s[i] * fac[i] for i in range(d))
    V2 = [tuple(V[c][i] * fac[i] for i in range(d)) for c in range(d)]
    return s2, V2


# ----------------------------------------------------------------------
# fixed-point (mpz) scalar cores

def lorenz_params_fix(params, F):
    return (_mpz(to_fix(params.sigma, F)), _mpz(to_fix(params.R, F)),
            _mpz(to_fix(params.b, F)))


def lorenz_step_fix(s, params_fix, h_fix, M, F):
    # step-normalized series: the k-th entry holds c_k h^k, so operands stay
    # at F-bit scale for any order and the evaluation at h is a plain sum.
    # Reversed copies (Yr, Zr) let the Cauchy products run as C-level sum(map).
    sig, R, b = params_fix
    half = 1 << (F - 1)
    hsig = (h_fix * sig + half) >> F
    hR = (h_fix * R + half) >> F
    hb = (h_fix * b + half) >> F
    mul = operator.mul
    X = [s[0]]; Y = [s[1]]; Z = [s[2]]
    Yr = [s[1]]; Zr = [s[2]]
    for k in range(M):
        kk = k + 1
        xz = (sum(map(mul, X, Zr)) + half) >> F
        xy = (sum(map(mul, X, Yr)) + half) >> F
        X.append(((hsig * (Y[k] - X[k]) + half) >> F) // kk)
        yk = (((hR * X[k] + half) >> F) - ((h_fix * (Y[k] + xz) + half) >> F)) // kk
        zk = (((h_fix * xy + half) >> F) - ((hb * Z[k] + half) >> F)) // kk
        Y.append(yk); Z.append(zk)
        Yr.insert(0, yk); Zr.insert(0, zk)
    return (sum(X), sum(Y), sum(Z))


def lorenz_tan_step_fix(s, V, params_fix, h_fix, M, F):
    sig, R, b = params_fix
    half = 1 << (F - 1)
    hsig = (h_fix * sig + half) >> F
    hR = (h_fix * R + half) >> F
    hb = (h_fix * b + half) >> F
    mul = operator.mul
    X = [s[0]]; Y = [s[1]]; Z = [s[2]]
    Xr = [s[0]]; Yr = [s[1]]; Zr = [s[2]]
    VC = [[[V[c][0]], [V[c][1]], [V[c][2]]] for c in range(3)]
    for k in range(M):
        kk = k + 1
        xz = (sum(map(mul, X, Zr)) + half) >> F
        xy = (sum(map(mul, X, Yr)) + half) >> F
        xk = ((hsig * (Y[k] - X[k]) + half) >> F) // kk
        yk = (((hR * X[k] + half) >> F) - ((h_fix * (Y[k] + xz) + half) >> F)) // kk
        zk = (((h_fix * xy + half) >> F) - ((hb * Z[k] + half) >> F)) // kk
        for c in range(3):
            v1, v2, v3 = VC[c]
            zv1 = (sum(map(mul, Zr, v1)) + half) >> F
            xv3 = (sum(map(mul, Xr, v3)) + half) >> F
            yv1 = (sum(map(mul, Yr, v1)) + half) >> F
            xv2 = (sum(map(mul, Xr, v2)) + half) >> F
            v1.append(((hsig * (v2[k] - v1[k]) + half) >> F) // kk)
            v2.append((((hR * v1[k] + half) >> F)
                       - ((h_fix * (v2[k] + zv1 + xv3) + half) >> F)) // kk)
            v3.append((((h_fix * (yv1 + xv2) + half) >> F)
                       - ((hb * v3[k] + half) >> F)) // kk)
        X.append(xk); Y.append(yk); Z.append(zk)
        Xr.insert(0, xk); Yr.insert(0, yk); Zr.insert(0, zk)

    s2 = (sum(X), sum(Y), sum(Z))
    V2 = [tuple(sum(comp) for comp in VC[c]) for c in range(3)]
    return s2, V2


def duffing_params_fix(params, F):
    return tuple(_mpz(to_fix(v, F)) for v in
                 (params.alpha, params.beta, params.delta, params.gamma, params.omega))


def duffing_trig_fix(z0, F):
    """Seed (cos z0, sin z0) as fixed-point ints via correctly rounded MPFR trig."""
    with gmpy2.context(precision=F + 64):
        z = gmpy2.mpfr(z0)
        return (int(gmpy2.rint(gmpy2.mul_2exp(gmpy2.cos(z), F))),
                int(gmpy2.rint(gmpy2.mul_2exp(gmpy2.sin(z), F))))


def duffing_step_fix(s, trig, params_fix, h_fix, M, F):
    """One Duffing step; params_fix = (al, be, de, ga, om) scaled mpz (may vary per step).

    Series entries are step-normalized (c_k h^k), as in lorenz_step_fix.
    """
    al, be, de, ga, om = params_fix
    half = 1 << (F - 1)
    hal = (h_fix * al + half) >> F
    hbe = (h_fix * be + half) >> F
    hde = (h_fix * de + half) >> F
    hga = (h_fix * ga + half) >> F
    hom = (h_fix * om + half) >> F
    mul = operator.mul
    X = [s[0]]; Y = [s[1]]; Z = [s[2]]
    C = [trig[0]]; S = [trig[1]]
    Xr = [s[0]]
    U = [(X[0] * X[0] + half) >> F]
    W = [(U[0] * X[0] + half) >> F]
    for k in range(M):
        kk = k + 1
        xk = ((h_fix * Y[k] + half) >> F) // kk
        yk = (hal * X[k] + half) >> F
        yk -= (hbe * W[k] + half) >> F
        yk -= (hde * Y[k] + half) >> F
        yk += (hga * C[k] + half) >> F
        yk //= kk
        X.append(xk); Y.append(yk)
        Z.append(hom if k == 0 else 0)
        C.append((-((hom * S[k] + half) >> F)) // kk)
        S.append(((hom * C[k] + half) >> F) // kk)
        Xr.insert(0, xk)
        U.append((sum(map(mul, X, Xr)) + half) >> F)
        W.append((sum(map(mul, U, Xr)) + half) >> F)
    return (sum(X), sum(Y), sum(Z)), (sum(C), sum(S))


def duffing_tan_step_fix(s, trig, V, params_fix, h_fix, M, F):
    al, be, de, ga, om = params_fix
    half = 1 << (F - 1)
    hal = (h_fix * al + half) >> F
    hbe3 = (h_fix * 3 * be + half) >> F
    hbe = (h_fix * be + half) >> F
    hde = (h_fix * de + half) >> F
    hga = (h_fix * ga + half) >> F
    hom = (h_fix * om + half) >> F
    mul = operator.mul
    X = [s[0]]; Y = [s[1]]; Z = [s[2]]
    C = [trig[0]]; S = [trig[1]]
    Xr = [s[0]]; Sr = [trig[1]]
    U = [(X[0] * X[0] + half) >> F]
    W = [(U[0] * X[0] + half) >> F]
    Ur = [U[0]]
    VC = [[[V[c][0]], [V[c][1]], [V[c][2]]] for c in range(3)]
    for k in range(M):
        kk = k + 1
        for c in range(3):
            v1, v2, v3 = VC[c]
            uv1 = (sum(map(mul, Ur, v1)) + half) >> F
            sv3 = (sum(map(mul, Sr, v3)) + half) >> F
            v1.append(((h_fix * v2[k] + half) >> F) // kk)
            vk = (hal * v1[k] + half) >> F
            vk -= (hbe3 * uv1 + half) >> F
            vk -= (hde * v2[k] + half) >> F
            vk -= (hga * sv3 + half) >> F
            v2.append(vk // kk)
            v3.append(0)
        xk = ((h_fix * Y[k] + half) >> F) // kk
        yk = (hal * X[k] + half) >> F
        yk -= (hbe * W[k] + half) >> F
        yk -= (hde * Y[k] + half) >> F
        yk += (hga * C[k] + half) >> F
        yk //= kk
        ck = (-((hom * S[k] + half) >> F)) // kk
        sk = ((hom * C[k] + half) >> F) // kk
        X.append(xk); Y.append(yk)
        Z.append(hom if k == 0 else 0)
        C.append(ck); S.append(sk)
        Xr.insert(0, xk); Sr.insert(0, sk)
        uk = (sum(map(mul, X, Xr)) + half) >> F
        U.append(uk)
        Ur.insert(0, uk)
        W.append((sum(map(mul, U, Xr)) + half) >> F)

    s2 = (sum(X), sum(Y), sum(Z))
    t2 = (sum(C), sum(S))
    V2 = [tuple(sum(comp) for comp in VC[c]) for c in range(3)]
    return s2, t2, V2


def harmonic_step_fix(s, params_fix, h_fix, M, F):
    half = 1 << (F - 1)
    X = [s[0]]; Y = [s[1]]
    for k in range(M):
        kk = k + 1
        X.append(((h_fix * Y[k] + half) >> F) // kk)
        Y.append((-((h_fix * X[k] + half) >> F)) // kk)
    return (sum(X), sum(Y))


def linear_step_fix(s, rates_fix, h_fix, M, F):
    half = 1 << (F - 1)
    out = []
    for i in range(len(s)):
        hr = (h_fix * rates_fix[i] + half) >> F
        A = [s[i]]
        for k in range(M):
            A.append(((hr * A[k] + half) >> F) // (k + 1))
        out.append(sum(A))
    return tuple(out)
