"""Gaussian Kraus-operator measurements and discrete repeated-measurement propagation.

A single fuzzy measurement of an observable ``A`` with outcome ``a`` acts
through

    K_a = (2 lb / pi)**(1/4) * exp(-lb * (a - A)**2),

where ``lb`` is the single-shot strength.  Discarding the outcome gives a pure
dephasing channel in the eigenbasis of ``A``.  Alternating free evolution over
``dt`` with such a channel at ``lb = lambda * dt`` reproduces the Lindblad
evolution to first order in ``dt``; :func:`discrete_propagate` implements that
product and serves as an independent check on :func:`lzzeno.dynamics.integrate`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dynamics import SimConfig, Trajectory, _initial_in_frame, static_hamiltonian, trajectory_from_states
from .lz_model import LzParams, adiabatic_energies, gauge_term_M, hamiltonian_diabatic
from .quantum_core import SIGMA_Z, DensityMatrix, as_matrix, commutator

SQRT3_12 = math.sqrt(3.0) / 12.0
GAUSS_OFFSET = math.sqrt(3.0) / 6.0


@dataclass(frozen=True)
class GaussianMeasurement:
    lambda_bar: float
    observable: np.ndarray = field(default_factory=lambda: SIGMA_Z.copy())

    def __post_init__(self) -> None:
        if not self.lambda_bar >= 0:
            raise ValueError(f"lambda_bar must be non-negative, got {self.lambda_bar}")
        obs = np.asarray(self.observable, dtype=np.complex128)
        if np.max(np.abs(obs - obs.conj().T)) > 1e-12:
            raise ValueError("observable must be Hermitian")
        object.__setattr__(self, "observable", obs)

    @classmethod
    def from_rate(cls, lam: float, dt: float, observable=None) -> "GaussianMeasurement":
        """Single-shot strength for measurements repeated every ``dt`` at rate ``lam``."""
        if observable is None:
            return cls(lam * dt)
        return cls(lam * dt, observable)

    def eig(self):
        return np.linalg.eigh(self.observable)

    def outcome_grid(self, n: int = 2001) -> np.ndarray:
        """Outcomes covering at least six standard deviations of every lobe."""
        half = 6.0 * max(1.0, 1.0 / math.sqrt(self.lambda_bar)) if self.lambda_bar > 0 else 6.0
        return np.linspace(-half, half, n)


def kraus_operator(a: float, meas: GaussianMeasurement) -> np.ndarray:
    vals, vecs = meas.eig()
    amp = (2.0 * meas.lambda_bar / math.pi) ** 0.25 * np.exp(-meas.lambda_bar * (a - vals) ** 2)
    return (vecs * amp) @ vecs.conj().T


def measurement_pdf(rho, a, meas: GaussianMeasurement):
    """Probability density of reading ``a``; vectorized over ``a``."""
    m = as_matrix(rho)
    vals, vecs = meas.eig()
    pops = np.real(np.einsum("ji,jk,ki->i", vecs.conj(), m, vecs))
    a = np.asarray(a, dtype=float)
    lb = meas.lambda_bar
    weights = math.sqrt(2.0 * lb / math.pi) * np.exp(-2.0 * lb * (a[..., None] - vals) ** 2)
    return weights @ pops


def selective_update(rho, a: float, meas: GaussianMeasurement) -> DensityMatrix:
    m = as_matrix(rho)
    k = kraus_operator(a, meas)
    unnorm = k @ m @ k.conj().T
    p = float(np.real(np.trace(unnorm)))
    if not p > 0:
        raise ValueError(f"outcome a={a} has zero probability for this state")
    basis = rho.basis if isinstance(rho, DensityMatrix) else "diabatic"
    return DensityMatrix(unnorm / p, basis)


def nonselective_channel(rho, meas: GaussianMeasurement) -> DensityMatrix:
    """Outcome-averaged update: coherences between eigenvalues a_i, a_j shrink by exp(-lb (a_i - a_j)**2 / 2)."""
    m = as_matrix(rho)
    vals, vecs = meas.eig()
    damp = np.exp(-0.5 * meas.lambda_bar * (vals[:, None] - vals[None, :]) ** 2)
    inner = vecs.conj().T @ m @ vecs
    out = vecs @ (damp * inner) @ vecs.conj().T
    basis = rho.basis if isinstance(rho, DensityMatrix) else "diabatic"
    return DensityMatrix(out, basis)


def nonselective_by_quadrature(rho, meas: GaussianMeasurement, n: int = 2001) -> np.ndarray:
    """Trapezoidal ``integral da K_a rho K_a^dagger``; slow, for validation only."""
    m = as_matrix(rho)
    grid = meas.outcome_grid(n)
    terms = np.array([kraus_operator(a, meas) @ m @ kraus_operator(a, meas).conj().T for a in grid])
    return np.trapezoid(terms, grid, axis=0)


# ----------------------------------------------------------------------------
# free evolution


def effective_hamiltonian(t_tilde: float, protocol, params: LzParams, gauge_sign: float = -1.0) -> np.ndarray:
    """Hermitian generator of the coherent part of the protocol's master equation at ``t``."""
    if protocol.kind == "diabatic":
        return hamiltonian_diabatic(t_tilde, params.z)
    if protocol.kind == "adiabatic":
        e, _ = adiabatic_energies(t_tilde, params.z)
        # -i[H, rho] + g [M, rho] == -i[H + i g M, rho]
        return np.diag([e, -e]).astype(np.complex128) + 1j * gauge_sign * gauge_term_M(t_tilde)
    return static_hamiltonian(params, protocol.delta_epsilon)


def unitary_from_hamiltonian(h: np.ndarray, dt: float) -> np.ndarray:
    """Exact ``exp(-i h dt)`` for a Hermitian 2x2 ``h`` (global phase dropped)."""
    hx = h[0, 1].real
    hy = -h[0, 1].imag
    hz = 0.5 * (h[0, 0] - h[1, 1]).real
    n = math.sqrt(hx * hx + hy * hy + hz * hz)
    if n == 0.0:
        return np.eye(2, dtype=np.complex128)
    c, s = math.cos(n * dt), math.sin(n * dt) / n
    return np.array(
        [[c - 1j * s * hz, -1j * s * (hx - 1j * hy)],
         [-1j * s * (hx + 1j * hy), c + 1j * s * hz]],
        dtype=np.complex128,
    )


def step_hamiltonian(t_tilde: float, dt: float, protocol, params: LzParams,
                     rule: str = "magnus4", gauge_sign: float = -1.0) -> np.ndarray:
    """Frozen Hamiltonian for one free-evolution interval ``[t, t + dt]``.

    ``rule="left"`` freezes ``H(t)``.  ``rule="magnus4"`` uses the fourth-order
    Magnus generator built from the two Gauss points, so that over a step the
    free evolution is accurate to ``O(dt**5)``.
    """
    if rule == "left":
        return effective_hamiltonian(t_tilde, protocol, params, gauge_sign)
    if rule != "magnus4":
        raise ValueError(f"unknown rule {rule!r}")
    h1 = effective_hamiltonian(t_tilde + (0.5 - GAUSS_OFFSET) * dt, protocol, params, gauge_sign)
    h2 = effective_hamiltonian(t_tilde + (0.5 + GAUSS_OFFSET) * dt, protocol, params, gauge_sign)
    return 0.5 * (h1 + h2) - 1j * SQRT3_12 * dt * commutator(h2, h1)


def unitary_step(rho, t_tilde: float, dt: float, protocol, params: LzParams,
                 rule: str = "magnus4", gauge_sign: float = -1.0):
    """``U rho U^dagger`` with ``U = exp(-i H dt)`` for the frozen step Hamiltonian."""
    h = step_hamiltonian(t_tilde, dt, protocol, params, rule, gauge_sign)
    if params.z * max(abs(t_tilde), 1.0) * dt > 0.1:
        warnings.warn(f"dt*|H| = {params.z * max(abs(t_tilde), 1.0) * dt:.3g} is not small", stacklevel=2)
    u = unitary_from_hamiltonian(h, dt)
    m = as_matrix(rho)
    out = u @ m @ u.conj().T
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(out, rho.basis)
    return out


# ----------------------------------------------------------------------------
# repeated measurement


def discrete_propagate(config: SimConfig, dt_meas: float, rule: str = "magnus4",
                       sample_every: int | None = None) -> Trajectory:
    """Free evolution over ``dt_meas`` followed by a nonselective measurement, repeated.

    The observable is ``sigma_z`` of the propagation basis and each shot has
    strength ``lambda_tilde * dt_meas``.
    """
    if not dt_meas > 0:
        raise ValueError(f"dt_meas must be positive, got {dt_meas}")
    span = config.t_end - config.t_start
    n = round(span / dt_meas)
    if abs(n * dt_meas - span) > 1e-9 * max(1.0, span):
        raise ValueError(f"window {span} is not a whole number of measurement intervals {dt_meas}")
    every = sample_every or max(1, n // 1000)
    damp = math.exp(-2.0 * config.params.lambda_tilde * dt_meas)
    params, protocol = config.params, config.protocol
    hz = config.params.z * max(abs(config.t_start), abs(config.t_end), 1.0) * dt_meas
    if hz > 0.1:
        warnings.warn(f"dt*|H| reaches {hz:.3g}; the discrete propagation is coarse", stacklevel=2)

    m = _initial_in_frame(config).copy()
    ts, states = [config.t_start], [m.copy()]
    for i in range(n):
        t = config.t_start + i * dt_meas
        u = unitary_from_hamiltonian(step_hamiltonian(t, dt_meas, protocol, params, rule, config.gauge_sign), dt_meas)
        m = u @ m @ u.conj().T
        # nonselective sigma_z measurement: closed form of nonselective_channel
        m[0, 1] *= damp
        m[1, 0] *= damp
        if (i + 1) % every == 0 or i == n - 1:
            ts.append(config.t_start + (i + 1) * dt_meas)
            states.append(m.copy())
    return trajectory_from_states(np.array(ts), np.array(states), config)


def projective_zeno_simulate(V: float, T: float, N: int) -> float:
    """Survival of state 1 of a degenerate pair coupled by ``V`` under N projective checks in time T."""
    if N < 1 or int(N) != N:
        raise ValueError(f"N must be a positive integer, got {N}")
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    h = np.array([[0.0, V], [V, 0.0]], dtype=np.complex128)
    u = unitary_from_hamiltonian(h, T / N)
    m = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=np.complex128)
    for _ in range(int(N)):
        m = u @ m @ u.conj().T
        m = np.diag(np.diag(m))
    return float(m[0, 0].real)
