"""Two-level density-matrix algebra shared by the rest of the package.

All matrices are plain ``numpy`` arrays of shape ``(2, 2)`` and dtype
``complex128``.  Units are dimensionless with hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DIABATIC = "diabatic"
ADIABATIC = "adiabatic"
BASES = (DIABATIC, ADIABATIC)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY = np.eye(2, dtype=np.complex128)

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-8


class BasisMismatchError(ValueError):
    """A state tagged in one basis was handed to an operation expecting the other."""


@dataclass(frozen=True)
class DensityMatrix:
    """A 2x2 density matrix together with the basis it is expressed in."""

    data: np.ndarray
    basis: str = DIABATIC

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.complex128)
        if arr.shape != (2, 2):
            raise ValueError(f"density matrix must be 2x2, got shape {arr.shape}")
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}; expected one of {BASES}")
        object.__setattr__(self, "data", arr)

    @classmethod
    def pure(cls, index: int, basis: str = DIABATIC) -> "DensityMatrix":
        """Projector onto basis state ``index`` (1 or 2)."""
        if index not in (1, 2):
            raise ValueError("index must be 1 or 2")
        data = np.zeros((2, 2), dtype=np.complex128)
        data[index - 1, index - 1] = 1.0
        return cls(data, basis)

    def populations(self) -> tuple[float, float]:
        return float(self.data[0, 0].real), float(self.data[1, 1].real)


def as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.data
    return np.asarray(rho, dtype=np.complex128)


def commutator(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    return a @ b - b @ a


def dephasing_term(observable, rho, lam: float) -> np.ndarray:
    """Measurement-induced dissipator ``-(lam/2) [A, [A, rho]]``."""
    if lam < 0:
        raise ValueError(f"measurement strength must be non-negative, got {lam}")
    a = as_matrix(observable)
    return -0.5 * lam * commutator(a, commutator(a, as_matrix(rho)))


def purity(rho) -> float:
    m = as_matrix(rho)
    return float(np.real(np.trace(m @ m)))


def min_eigenvalue(rho) -> float:
    m = as_matrix(rho)
    herm = 0.5 * (m + m.conj().T)
    return float(np.linalg.eigvalsh(herm)[0])


@dataclass(frozen=True)
class DensityReport:
    trace_error: float
    hermiticity_error: float
    min_eigenvalue: float
    purity: float

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def violations(self) -> list[str]:
        out = []
        if self.trace_error > TRACE_TOL:
            out.append(f"trace off by {self.trace_error:.3e}")
        if self.hermiticity_error > HERMITICITY_TOL:
            out.append(f"non-Hermitian by {self.hermiticity_error:.3e}")
        if self.min_eigenvalue < -POSITIVITY_TOL:
            out.append(f"negative eigenvalue {self.min_eigenvalue:.3e}")
        return out


def validate_density(rho) -> DensityReport:
    """Diagnose a candidate density matrix.  Never raises."""
    m = as_matrix(rho)
    return DensityReport(
        trace_error=float(abs(np.trace(m) - 1.0)),
        hermiticity_error=float(np.max(np.abs(m - m.conj().T))),
        min_eigenvalue=min_eigenvalue(m),
        purity=purity(m),
    )


def random_density(rng: np.random.Generator, basis: str = DIABATIC) -> DensityMatrix:
    """Random valid state, uniform in the Bloch ball."""
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    r = rng.uniform() ** (1.0 / 3.0)
    x, y, z = r * direction
    data = 0.5 * (IDENTITY + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)
    return DensityMatrix(data, basis)
