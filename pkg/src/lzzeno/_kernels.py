"""Compiled RK4 propagation loop.

The state is carried as ``(rho11, rho22, rho12)``; ``rho21`` is always the
conjugate of ``rho12`` so Hermiticity holds by construction.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

KIND_DIABATIC = 0
KIND_ADIABATIC = 1
KIND_STATIC = 2

STATUS_OK = 0
STATUS_NEGATIVE = 1

ABORT_EIGENVALUE = -1e-6
RENORM_TOL = 1e-12
# Largest dephasing decrement 2*lambda*h per RK4 update when splitting is on.
DECAY_STEP = 0.1


@njit(cache=True)
def deriv(kind, t, z, lam, de, gsign, r11, r22, c):
    if kind == KIND_ADIABATIC:
        m = 0.5 / (1.0 + t * t)
        w = 2.0 * z * math.sqrt(t * t + 1.0)
        d11 = gsign * m * 2.0 * c.real
        dc = -1j * w * c + gsign * m * (r22 - r11) - 2.0 * lam * c
    else:
        if kind == KIND_DIABATIC:
            w = 2.0 * z * t
        else:
            w = de
        d11 = -2.0 * z * c.imag
        dc = -1j * w * c - 1j * z * (r22 - r11) - 2.0 * lam * c
    return d11, -d11, dc


@njit(cache=True)
def phase_rate(kind, t0, t1, z, de):
    """Upper bound on the coherent rotation rate over [t0, t1]."""
    if kind == KIND_STATIC:
        return abs(de) + 2.0 * z
    tm = max(abs(t0), abs(t1))
    return 2.0 * z * math.sqrt(tm * tm + 1.0) + 2.0 * z + 1.0


@njit(cache=True)
def substeps(kind, t, dt, z, lam, de, kappa):
    if kappa <= 0.0:
        return 1
    need = max(phase_rate(kind, t, t + dt, z, de) / kappa, 2.0 * lam / DECAY_STEP) * dt
    return max(1, int(math.ceil(need)))


@njit(cache=True)
def rk4(kind, t, h, z, lam, de, gsign, r11, r22, c):
    a11, a22, ac = deriv(kind, t, z, lam, de, gsign, r11, r22, c)
    hh = 0.5 * h
    b11, b22, bc = deriv(kind, t + hh, z, lam, de, gsign,
                         r11 + hh * a11, r22 + hh * a22, c + hh * ac)
    c11, c22, cc = deriv(kind, t + hh, z, lam, de, gsign,
                         r11 + hh * b11, r22 + hh * b22, c + hh * bc)
    d11, d22, dc = deriv(kind, t + h, z, lam, de, gsign,
                         r11 + h * c11, r22 + h * c22, c + h * cc)
    s = h / 6.0
    return (r11 + s * (a11 + 2.0 * b11 + 2.0 * c11 + d11),
            r22 + s * (a22 + 2.0 * b22 + 2.0 * c22 + d22),
            c + s * (ac + 2.0 * bc + 2.0 * cc + dc))


@njit(cache=True)
def propagate(kind, z, lam, de, gsign, t0, dt, nsteps, stride, kappa,
              r11, r22, c, ts, o11, o22, oc):
    """Fixed-step RK4 from ``t0`` over ``nsteps`` steps of ``dt``.

    Each step is split into equal substeps so that the phase advanced per RK4
    update stays below ``kappa`` and the dephasing decrement below
    ``DECAY_STEP``; ``kappa <= 0`` turns the split off.  Samples are written
    every ``stride`` steps and at the end.

    Returns ``(status, failed_step, n_samples, n_renormalized, min_eigenvalue, n_rk4)``.
    """
    ts[0] = t0
    o11[0] = r11
    o22[0] = r22
    oc[0] = c
    k = 1
    renorm = 0
    n_rk4 = 0
    min_eig = 1.0
    for n in range(nsteps):
        t = t0 + n * dt
        nsub = substeps(kind, t, dt, z, lam, de, kappa)
        h = dt / nsub
        for j in range(nsub):
            r11, r22, c = rk4(kind, t + j * h, h, z, lam, de, gsign, r11, r22, c)
            n_rk4 += 1
            tr = r11 + r22
            if abs(tr - 1.0) > RENORM_TOL:
                r11 /= tr
                r22 /= tr
                c /= tr
                tr = 1.0
                renorm += 1
            half_gap = math.sqrt(0.25 * (r11 - r22) ** 2 + c.real ** 2 + c.imag ** 2)
            ev = 0.5 * tr - half_gap
            if ev < min_eig:
                min_eig = ev
            if ev < ABORT_EIGENVALUE or not math.isfinite(ev):
                return STATUS_NEGATIVE, n, k, renorm, min_eig, n_rk4
        if (n + 1) % stride == 0 or n == nsteps - 1:
            ts[k] = t0 + (n + 1) * dt
            o11[k] = r11
            o22[k] = r22
            oc[k] = c
            k += 1
    return STATUS_OK, -1, k, renorm, min_eig, n_rk4


def n_samples(nsteps: int, stride: int) -> int:
    return 1 + nsteps // stride + (1 if nsteps % stride else 0)


def allocate(nsteps: int, stride: int):
    n = n_samples(nsteps, stride)
    return (np.empty(n), np.empty(n), np.empty(n), np.empty(n, dtype=np.complex128))
