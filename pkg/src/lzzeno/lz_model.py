"""The Landau-Zener model in dimensionless form.

Time is measured in units of V/u, the sweep parameter is ``z = V**2/u`` and
the measurement strength is ``lambda_tilde = (V/u) * lambda``.  In these units
the diabatic Hamiltonian is ``z * [[t, 1], [1, -t]]``.

Adiabatic labels: index 1 is the upper level ``+z*sqrt(t**2 + 1)``, index 2 the
lower one.  Diabatic state 1 coincides with adiabatic state 2 as ``t -> -inf``
and with adiabatic state 1 as ``t -> +inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quantum_core import ADIABATIC, DIABATIC, BasisMismatchError, DensityMatrix

# Coefficient multiplying [M, rho] in the adiabatic-frame master equation,
# with M = U dU^{-1}/dt exactly as returned by gauge_term_M.  Locked by the
# requirement that adiabatic-frame and diabatic-frame propagation agree.
GAUGE_SIGN = -1.0


@dataclass(frozen=True)
class LzParams:
    z: float
    lambda_tilde: float = 0.0

    def __post_init__(self) -> None:
        if not self.z > 0:
            raise ValueError(f"z must be positive, got {self.z}")
        if not self.lambda_tilde >= 0:
            raise ValueError(f"lambda_tilde must be non-negative, got {self.lambda_tilde}")


def _check_z(z: float) -> None:
    if not z > 0:
        raise ValueError(f"z must be positive, got {z}")


def hamiltonian_diabatic(t_tilde: float, z: float) -> np.ndarray:
    _check_z(z)
    return z * np.array([[t_tilde, 1.0], [1.0, -t_tilde]], dtype=np.complex128)


def adiabatic_energies(t_tilde: float, z: float) -> tuple[float, float]:
    """Instantaneous eigenvalues ordered (upper, lower)."""
    _check_z(z)
    e = z * math.hypot(t_tilde, 1.0)
    return e, -e


def mixing_angle(t_tilde):
    """Continuous branch of ``arctan(1/t)`` in (0, pi); pi/2 at the crossing."""
    return np.arctan2(1.0, t_tilde)


def transform_U(t_tilde) -> np.ndarray:
    """Real rotation taking diabatic to adiabatic components, ``psi_adi = U psi_dia``.

    Accepts a scalar or an array of times; the matrix axes are last.
    """
    half = 0.5 * mixing_angle(np.asarray(t_tilde, dtype=float))
    c, s = np.cos(half), np.sin(half)
    return np.stack([np.stack([c, s], -1), np.stack([-s, c], -1)], -2)


def gauge_term_M(t_tilde: float) -> np.ndarray:
    """``M = U dU^{-1}/dt``, a real antisymmetric generator of the frame rotation."""
    m = 0.5 / (1.0 + t_tilde * t_tilde)
    return np.array([[0.0, m], [-m, 0.0]], dtype=np.complex128)


def _tagged(rho, expected: str) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        if rho.basis != expected:
            raise BasisMismatchError(f"expected a {expected} state, got {rho.basis}")
        return rho.data
    return np.asarray(rho, dtype=np.complex128)


def to_adiabatic(rho, t_tilde: float) -> DensityMatrix:
    u = transform_U(t_tilde)
    return DensityMatrix(u @ _tagged(rho, DIABATIC) @ u.T, ADIABATIC)


def to_diabatic(rho, t_tilde: float) -> DensityMatrix:
    u = transform_U(t_tilde)
    return DensityMatrix(u.T @ _tagged(rho, ADIABATIC) @ u, DIABATIC)


def rotate_states(rho: np.ndarray, t_tilde: np.ndarray, to: str) -> np.ndarray:
    """Batch change of basis for arrays of shape ``(n, 2, 2)`` at times ``(n,)``."""
    u = transform_U(t_tilde)
    ut = np.swapaxes(u, -1, -2)
    if to == ADIABATIC:
        return u @ rho @ ut
    if to == DIABATIC:
        return ut @ rho @ u
    raise ValueError(f"unknown basis {to!r}")


def lz_survival_probability(z: float) -> float:
    """Probability to stay in the initial diabatic state after a full sweep."""
    _check_z(z)
    return math.exp(-math.pi * z)


def zeno_projective_survival(V: float, T: float, N: int) -> float:
    """Approximate survival under N equally spaced projective measurements in time T."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if T < 0:
        raise ValueError(f"T must be non-negative, got {T}")
    return 0.5 * (1.0 + math.exp(-2.0 * V * V * T * T / N))


def strong_measurement_rate(z: float, lambda_tilde: float, t_tilde: float) -> float:
    """Lorentzian relaxation rate of the diabatic population difference.

    Equals ``z**2 / lambda_tilde`` at the crossing.
    """
    if not lambda_tilde > 0:
        raise ValueError("strong-measurement rate needs lambda_tilde > 0")
    return 4.0 * z * z * lambda_tilde / ((2.0 * lambda_tilde) ** 2 + (2.0 * z * t_tilde) ** 2)


def approx_coherence(delta_rho: float, t_tilde: float, z: float, lambda_tilde: float) -> complex:
    """Adiabatically eliminated diabatic coherence for a slowly varying population difference.

    ``delta_rho`` is ``rho22 - rho11``.
    """
    denom = 2j * z * t_tilde + 2.0 * lambda_tilde
    if denom == 0:
        raise ZeroDivisionError("approx_coherence undefined at t=0 without measurement")
    return -1j * z * delta_rho / denom


def freeze_estimate(z: float) -> float:
    """Rough asymptotic diabatic population difference when lambda_tilde/z > 1."""
    _check_z(z)
    return math.exp(-z)
