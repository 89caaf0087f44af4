"""Master-equation right-hand sides and the RK4 propagator.

Three protocols are supported:

* diabatic measurement, propagated in the diabatic basis;
* adiabatic measurement, propagated in the adiabatic basis (including the
  frame-rotation term generated by ``M = U dU^{-1}/dt``);
* a static two-level system in which the sweep ``2 z t`` is replaced by a
  constant level spacing.

``rhs_*`` and :func:`rk4_step` act on full 2x2 matrices and are the readable
reference.  :func:`integrate` runs the same equations through a compiled loop
that keeps only ``rho11, rho22, rho12``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import _kernels
from .lz_model import GAUGE_SIGN, LzParams, gauge_term_M, hamiltonian_diabatic, rotate_states
from .quantum_core import (
    ADIABATIC,
    DIABATIC,
    SIGMA_Z,
    BasisMismatchError,
    DensityMatrix,
    as_matrix,
    commutator,
    dephasing_term,
    min_eigenvalue,
    validate_density,
)

log = logging.getLogger(__name__)

DEFAULT_WINDOW = 200.0
DEFAULT_DT = 0.005
DT_RANGE = (0.001, 0.02)
DEFAULT_STRIDE = 20
# Largest phase (radians) a single RK4 update may advance; see _kernels.propagate.
DEFAULT_MAX_PHASE_STEP = 0.008


class IntegrationError(RuntimeError):
    """Propagation produced an unphysical state; the step size is too large."""


class ConvergenceWarning(UserWarning):
    """The measurement-induced freeze time lies too close to the end of the window."""


@dataclass(frozen=True)
class Protocol:
    """Which populations are measured: ``diabatic``, ``adiabatic`` or ``static``."""

    kind: str
    delta_epsilon: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("diabatic", "adiabatic", "static"):
            raise ValueError(f"unknown protocol {self.kind!r}")
        if self.kind != "static" and self.delta_epsilon != 0.0:
            raise ValueError("delta_epsilon only applies to the static protocol")

    @classmethod
    def static(cls, delta_epsilon: float = 0.0) -> "Protocol":
        return cls("static", float(delta_epsilon))

    @property
    def basis(self) -> str:
        """Basis the protocol is propagated in."""
        return ADIABATIC if self.kind == "adiabatic" else DIABATIC

    @property
    def label(self) -> str:
        if self.kind == "static":
            return f"static(delta_epsilon={self.delta_epsilon!r})"
        return self.kind


DIABATIC_MEASUREMENT = Protocol("diabatic")
ADIABATIC_MEASUREMENT = Protocol("adiabatic")

_KIND_CODES = {
    "diabatic": _kernels.KIND_DIABATIC,
    "adiabatic": _kernels.KIND_ADIABATIC,
    "static": _kernels.KIND_STATIC,
}


def default_initial(protocol: Protocol) -> DensityMatrix:
    """Diabatic state 1 for diabatic/static runs, the adiabatic ground state otherwise."""
    if protocol.kind == "adiabatic":
        return DensityMatrix.pure(2, ADIABATIC)
    return DensityMatrix.pure(1, DIABATIC)


def auto_window(params: LzParams, protocol: Protocol) -> tuple[float, float]:
    if protocol.kind == "static":
        return 0.0, DEFAULT_WINDOW
    half = max(DEFAULT_WINDOW, 4.0 * params.lambda_tilde / params.z)
    return -half, half


@dataclass(frozen=True)
class SimConfig:
    params: LzParams
    protocol: Protocol = DIABATIC_MEASUREMENT
    t_start: float | None = None
    t_end: float | None = None
    dt: float = DEFAULT_DT
    initial: DensityMatrix | None = None
    sample_stride: int = DEFAULT_STRIDE
    max_phase_step: float | None = DEFAULT_MAX_PHASE_STEP
    gauge_sign: float = GAUGE_SIGN

    def __post_init__(self) -> None:
        lo, hi = auto_window(self.params, self.protocol)
        if self.t_start is None:
            object.__setattr__(self, "t_start", lo)
        if self.t_end is None:
            object.__setattr__(self, "t_end", hi)
        if self.initial is None:
            object.__setattr__(self, "initial", default_initial(self.protocol))
        if not self.t_start < self.t_end:
            raise ValueError(f"t_start ({self.t_start}) must be below t_end ({self.t_end})")
        if not DT_RANGE[0] <= self.dt <= DT_RANGE[1]:
            raise ValueError(f"dt={self.dt} outside the supported range {DT_RANGE}")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")
        if self.max_phase_step is not None and not self.max_phase_step > 0:
            raise ValueError("max_phase_step must be positive (or None to disable)")
        span = self.t_end - self.t_start
        n = round(span / self.dt)
        if abs(n * self.dt - span) > 1e-9 * max(1.0, span):
            raise ValueError(f"window length {span} is not a whole number of steps of {self.dt}")
        report = validate_density(self.initial)
        if not report.valid:
            raise ValueError(f"initial state is not a density matrix: {report.violations}")

    @property
    def n_steps(self) -> int:
        return round((self.t_end - self.t_start) / self.dt)

    @property
    def freeze_limited(self) -> bool:
        """True when the freeze time lambda/z exceeds a quarter of t_end."""
        return self.protocol.kind != "static" and (
            self.params.lambda_tilde / self.params.z > self.t_end / 4.0
        )

    def with_dt(self, dt: float) -> "SimConfig":
        return replace(self, dt=dt)


@dataclass
class Trajectory:
    t: np.ndarray
    rho: np.ndarray
    basis: str
    p1_dia: np.ndarray
    p2_dia: np.ndarray
    p1_adi: np.ndarray
    p2_adi: np.ndarray
    config: SimConfig
    converged: bool = True
    renormalizations: int = 0
    min_eigenvalue: float = 0.0
    rk4_updates: int = 0
    notes: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def coherence(self) -> np.ndarray:
        """``rho12`` in the propagation basis."""
        return self.rho[:, 0, 1]

    def purity(self) -> np.ndarray:
        return np.real(np.einsum("nij,nji->n", self.rho, self.rho))

    def populations(self, basis: str, index: int) -> np.ndarray:
        key = {(DIABATIC, 1): "p1_dia", (DIABATIC, 2): "p2_dia",
               (ADIABATIC, 1): "p1_adi", (ADIABATIC, 2): "p2_adi"}[(basis, index)]
        return getattr(self, key)

    def states(self, basis: str) -> np.ndarray:
        if basis == self.basis:
            return self.rho
        return rotate_states(self.rho, self._frame_times(), basis)

    def final(self, basis: str | None = None) -> DensityMatrix:
        basis = basis or self.basis
        return DensityMatrix(self.states(basis)[-1], basis)

    def _frame_times(self) -> np.ndarray:
        # the static protocol has a fixed eigenbasis, reached with U at t = delta_epsilon / (2 z)
        if self.config.protocol.kind == "static":
            t_eff = self.config.protocol.delta_epsilon / (2.0 * self.config.params.z)
            return np.full_like(self.t, t_eff)
        return self.t


# ----------------------------------------------------------------------------
# reference right-hand sides on full matrices


def _checked(rho, basis: str) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        if rho.basis != basis:
            raise BasisMismatchError(f"expected a {basis} state, got {rho.basis}")
        report = validate_density(rho)
        if not report.valid:
            raise ValueError(f"invalid state: {report.violations}")
        return rho.data
    return as_matrix(rho)


def rhs_diabatic(rho, t_tilde: float, params: LzParams) -> np.ndarray:
    m = _checked(rho, DIABATIC)
    h = hamiltonian_diabatic(t_tilde, params.z)
    return -1j * commutator(h, m) + dephasing_term(SIGMA_Z, m, params.lambda_tilde)


def rhs_adiabatic(rho, t_tilde: float, params: LzParams, gauge_sign: float = GAUGE_SIGN) -> np.ndarray:
    m = _checked(rho, ADIABATIC)
    e = params.z * math.hypot(t_tilde, 1.0)
    h = np.diag([e, -e]).astype(np.complex128)
    return (
        -1j * commutator(h, m)
        + gauge_sign * commutator(gauge_term_M(t_tilde), m)
        + dephasing_term(SIGMA_Z, m, params.lambda_tilde)
    )


def static_hamiltonian(params: LzParams, delta_epsilon: float) -> np.ndarray:
    half = 0.5 * delta_epsilon
    return np.array([[half, params.z], [params.z, -half]], dtype=np.complex128)


def rhs_static(rho, params: LzParams, delta_epsilon: float) -> np.ndarray:
    m = _checked(rho, DIABATIC)
    h = static_hamiltonian(params, delta_epsilon)
    return -1j * commutator(h, m) + dephasing_term(SIGMA_Z, m, params.lambda_tilde)


def rhs_for(protocol: Protocol, params: LzParams, gauge_sign: float = GAUGE_SIGN) -> Callable:
    """``f(rho, t)`` for the given protocol."""
    if protocol.kind == "diabatic":
        return lambda rho, t: rhs_diabatic(rho, t, params)
    if protocol.kind == "adiabatic":
        return lambda rho, t: rhs_adiabatic(rho, t, params, gauge_sign)
    return lambda rho, t: rhs_static(rho, params, protocol.delta_epsilon)


def rk4_step(rhs: Callable, rho, t_tilde: float, dt: float):
    """One classical RK4 step of ``d rho/dt = rhs(rho, t)``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    tagged = isinstance(rho, DensityMatrix)
    y = as_matrix(rho)
    k1 = rhs(y, t_tilde)
    k2 = rhs(y + 0.5 * dt * k1, t_tilde + 0.5 * dt)
    k3 = rhs(y + 0.5 * dt * k2, t_tilde + 0.5 * dt)
    k4 = rhs(y + dt * k3, t_tilde + dt)
    out = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    out = 0.5 * (out + out.conj().T)
    tr = np.trace(out).real
    if abs(tr - 1.0) > _kernels.RENORM_TOL:
        log.info("renormalized trace %.3e at t=%g", tr - 1.0, t_tilde)
        out = out / tr
    ev = min_eigenvalue(out)
    if ev < _kernels.ABORT_EIGENVALUE:
        raise IntegrationError(
            f"RK4 step at t={t_tilde:g} with dt={dt:g} gave eigenvalue {ev:.3e}; reduce the step size"
        )
    return DensityMatrix(out, rho.basis) if tagged else out


# ----------------------------------------------------------------------------
# compiled propagation


def _initial_in_frame(config: SimConfig) -> np.ndarray:
    from .lz_model import to_adiabatic, to_diabatic

    init = config.initial
    basis = config.protocol.basis
    if init.basis == basis:
        return init.data
    if basis == ADIABATIC:
        return to_adiabatic(init, config.t_start).data
    return to_diabatic(init, config.t_start).data


def integrate(config: SimConfig) -> Trajectory:
    """Propagate ``config.initial`` from ``t_start`` to ``t_end``."""
    if config.freeze_limited:
        warnings.warn(
            f"lambda/z = {config.params.lambda_tilde / config.params.z:g} exceeds t_end/4 "
            f"= {config.t_end / 4:g}; the populations may still be evolving at t_end",
            ConvergenceWarning,
            stacklevel=2,
        )
    rho0 = _initial_in_frame(config)
    nsteps = config.n_steps
    ts, o11, o22, oc = _kernels.allocate(nsteps, config.sample_stride)
    kappa = config.max_phase_step or 0.0
    status, failed, k, renorm, min_ev, n_rk4 = _kernels.propagate(
        _KIND_CODES[config.protocol.kind],
        float(config.params.z),
        float(config.params.lambda_tilde),
        float(config.protocol.delta_epsilon),
        float(config.gauge_sign),
        float(config.t_start),
        float(config.dt),
        nsteps,
        config.sample_stride,
        float(kappa),
        float(rho0[0, 0].real),
        float(rho0[1, 1].real),
        complex(rho0[0, 1]),
        ts, o11, o22, oc,
    )
    if status != _kernels.STATUS_OK:
        t_fail = config.t_start + failed * config.dt
        raise IntegrationError(
            f"state lost positivity (eigenvalue {min_ev:.3e}) near t={t_fail:g} "
            f"with dt={config.dt:g}, max_phase_step={config.max_phase_step}; reduce the step size"
        )
    if renorm:
        log.info("trace renormalized %d times", renorm)
    rho = np.empty((k, 2, 2), dtype=np.complex128)
    rho[:, 0, 0] = o11
    rho[:, 1, 1] = o22
    rho[:, 0, 1] = oc
    rho[:, 1, 0] = np.conj(oc)
    return trajectory_from_states(
        ts, rho, config,
        renormalizations=int(renorm),
        min_eigenvalue=float(min_ev),
        rk4_updates=int(n_rk4),
    )


def trajectory_from_states(t: np.ndarray, rho: np.ndarray, config: SimConfig, **extra) -> Trajectory:
    """Wrap propagation-basis states and fill in populations in both bases."""
    empty = np.empty(0)
    traj = Trajectory(
        t=t, rho=rho, basis=config.protocol.basis,
        p1_dia=empty, p2_dia=empty, p1_adi=empty, p2_adi=empty,
        config=config, converged=not config.freeze_limited, **extra,
    )
    dia = traj.states(DIABATIC)
    adi = traj.states(ADIABATIC)
    traj.p1_dia, traj.p2_dia = dia[:, 0, 0].real.copy(), dia[:, 1, 1].real.copy()
    traj.p1_adi, traj.p2_adi = adi[:, 0, 0].real.copy(), adi[:, 1, 1].real.copy()
    return traj
