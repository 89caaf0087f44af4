import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lzzeno.lz_model import (
    LzParams,
    adiabatic_energies,
    approx_coherence,
    freeze_estimate,
    gauge_term_M,
    hamiltonian_diabatic,
    lz_survival_probability,
    mixing_angle,
    rotate_states,
    strong_measurement_rate,
    to_adiabatic,
    to_diabatic,
    transform_U,
    zeno_projective_survival,
)
from lzzeno.quantum_core import ADIABATIC, DIABATIC, BasisMismatchError, DensityMatrix, random_density

times = st.floats(-300.0, 300.0, allow_nan=False)


def test_params_validation():
    with pytest.raises(ValueError):
        LzParams(0.0, 1.0)
    with pytest.raises(ValueError):
        LzParams(1.0, -1.0)


@given(times, st.floats(0.01, 10.0))
def test_U_diagonalizes_H(t, z):
    u = transform_U(t)
    h = u @ hamiltonian_diabatic(t, z) @ u.T
    up, lo = adiabatic_energies(t, z)
    np.testing.assert_allclose(h, np.diag([up, lo]), atol=1e-10 * z * max(1, abs(t)))
    np.testing.assert_allclose(u @ u.T, np.eye(2), atol=1e-14)


def test_mixing_angle_branch_is_continuous():
    t = np.linspace(-50, 50, 10001)
    th = mixing_angle(t)
    assert np.all((th > 0) & (th < math.pi))
    assert np.max(np.abs(np.diff(th))) < 1e-2
    assert mixing_angle(0.0) == pytest.approx(math.pi / 2)


def test_ground_state_connects_to_diabatic_state_one():
    # far before the crossing the lower adiabatic level is diabatic state 1
    rho = to_diabatic(DensityMatrix.pure(2, ADIABATIC), -1e6)
    assert rho.populations()[0] == pytest.approx(1.0, abs=1e-10)


@given(times)
def test_gauge_term_matches_finite_difference(t):
    h = 1e-5
    uinv = lambda s: transform_U(s).T  # noqa: E731
    fd = transform_U(t) @ (uinv(t + h) - uinv(t - h)) / (2 * h)
    np.testing.assert_allclose(gauge_term_M(t), fd, atol=1e-8)


def test_basis_round_trip_and_tags(rng):
    rho = random_density(rng)
    back = to_diabatic(to_adiabatic(rho, 0.7), 0.7)
    np.testing.assert_allclose(back.data, rho.data, atol=1e-14)
    with pytest.raises(BasisMismatchError):
        to_diabatic(rho, 0.0)
    with pytest.raises(BasisMismatchError):
        to_adiabatic(DensityMatrix.pure(1, ADIABATIC), 0.0)


def test_rotate_states_batch_matches_single(rng):
    ts = np.array([-3.0, 0.0, 2.5])
    states = np.array([random_density(rng).data for _ in ts])
    out = rotate_states(states, ts, ADIABATIC)
    for k, t in enumerate(ts):
        np.testing.assert_allclose(out[k], to_adiabatic(DensityMatrix(states[k], DIABATIC), t).data, atol=1e-14)
    with pytest.raises(ValueError):
        rotate_states(states, ts, "lab")


def test_closed_forms():
    assert lz_survival_probability(0.5) == pytest.approx(math.exp(-math.pi / 2))
    assert zeno_projective_survival(1.0, 1.0, 100) == pytest.approx(0.5 * (1 + math.exp(-0.02)))
    assert strong_measurement_rate(0.5, 10.0, 0.0) == pytest.approx(0.025)
    assert freeze_estimate(1.0) == pytest.approx(math.exp(-1))
    with pytest.raises(ValueError):
        zeno_projective_survival(1.0, 1.0, 0)
    with pytest.raises(ValueError):
        strong_measurement_rate(1.0, 0.0, 0.0)
    with pytest.raises(ZeroDivisionError):
        approx_coherence(0.5, 0.0, 1.0, 0.0)


def test_approx_coherence_solves_stationary_equation():
    # d rho12/dt = -2izt rho12 - iz (rho22 - rho11) - 2 lam rho12 = 0
    z, t, lam, d = 0.7, 1.3, 2.0, -0.4
    c = approx_coherence(d, t, z, lam)
    assert abs(-2j * z * t * c - 1j * z * d - 2 * lam * c) < 1e-14
