import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from lzzeno.dynamics import DIABATIC_MEASUREMENT, ADIABATIC_MEASUREMENT, Protocol, SimConfig, integrate
from lzzeno.kraus_oracle import (
    GaussianMeasurement,
    discrete_propagate,
    kraus_operator,
    measurement_pdf,
    nonselective_by_quadrature,
    nonselective_channel,
    projective_zeno_simulate,
    selective_update,
    step_hamiltonian,
    unitary_from_hamiltonian,
)
from lzzeno.lz_model import LzParams, zeno_projective_survival
from lzzeno.quantum_core import SIGMA_X, DensityMatrix, random_density

pytestmark = pytest.mark.filterwarnings("ignore::lzzeno.dynamics.ConvergenceWarning")
seeds = st.integers(0, 2**32 - 1)
strengths = st.floats(0.05, 5.0)


@settings(max_examples=25, deadline=None)
@given(seeds, strengths)
def test_quadrature_matches_closed_form_channel(seed, lb):
    rho = random_density(np.random.default_rng(seed))
    meas = GaussianMeasurement(lb)
    np.testing.assert_allclose(nonselective_by_quadrature(rho, meas), nonselective_channel(rho, meas).data,
                               atol=1e-9)


@given(strengths)
def test_completeness(lb):
    meas = GaussianMeasurement(lb)
    grid = meas.outcome_grid(4001)
    ks = np.array([kraus_operator(a, meas) for a in grid])
    total = np.trapezoid(np.einsum("aji,ajk->aik", ks.conj(), ks), grid, axis=0)
    np.testing.assert_allclose(total, np.eye(2), atol=1e-9)


@given(seeds, strengths)
def test_pdf_normalized(seed, lb):
    meas = GaussianMeasurement(lb)
    rho = random_density(np.random.default_rng(seed))
    grid = meas.outcome_grid(4001)
    assert np.trapezoid(measurement_pdf(rho, grid, meas), grid) == pytest.approx(1.0, abs=1e-9)


@given(strengths, strengths)
def test_channels_compose_additively(a, b):
    rho = DensityMatrix(np.array([[0.5, 0.5], [0.5, 0.5]]))
    two = nonselective_channel(nonselective_channel(rho, GaussianMeasurement(a)), GaussianMeasurement(b))
    one = nonselective_channel(rho, GaussianMeasurement(a + b))
    np.testing.assert_allclose(two.data, one.data, atol=1e-14)


def test_sigma_z_channel_damps_coherence_by_exp_minus_2lb():
    rho = DensityMatrix(np.array([[0.5, 0.5], [0.5, 0.5]]))
    out = nonselective_channel(rho, GaussianMeasurement(0.3))
    assert out.data[0, 1].real == pytest.approx(0.5 * math.exp(-0.6))
    assert out.data[0, 0].real == pytest.approx(0.5)


def test_other_observable():
    meas = GaussianMeasurement(0.2, SIGMA_X)
    rho = DensityMatrix.pure(1)
    out = nonselective_channel(rho, meas)
    np.testing.assert_allclose(out.data, nonselective_by_quadrature(rho, meas), atol=1e-9)
    with pytest.raises(ValueError):
        GaussianMeasurement(0.2, np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        GaussianMeasurement(-1.0)


def test_selective_update_is_normalized_and_bayesian():
    meas = GaussianMeasurement(2.0)
    rho = DensityMatrix(np.eye(2) / 2)
    post = selective_update(rho, 1.0, meas)
    assert np.trace(post.data).real == pytest.approx(1.0)
    assert post.data[0, 0].real > 0.99


def test_unitary_from_hamiltonian_matches_expm():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        h = a + a.conj().T
        u = unitary_from_hamiltonian(h, 0.37)
        ref = expm(-1j * 0.37 * h)
        phase = ref[0, 0] / u[0, 0] if abs(u[0, 0]) > 1e-6 else ref[0, 1] / u[0, 1]
        np.testing.assert_allclose(u * phase, ref, atol=1e-12)


def test_step_hamiltonian_rules():
    p = LzParams(0.5, 0.0)
    left = step_hamiltonian(1.0, 0.1, DIABATIC_MEASUREMENT, p, rule="left")
    assert left[0, 0].real == pytest.approx(0.5)
    with pytest.raises(ValueError):
        step_hamiltonian(1.0, 0.1, DIABATIC_MEASUREMENT, p, rule="midpoint")


@pytest.mark.parametrize("protocol", [DIABATIC_MEASUREMENT, ADIABATIC_MEASUREMENT, Protocol.static(0.3)])
def test_discrete_converges_first_order(protocol):
    cfg = SimConfig(LzParams(0.5, 1.0), protocol, t_start=-5.0 if protocol.kind != "static" else 0.0, t_end=5.0)
    ref = integrate(cfg).rho[-1]
    errs = [np.max(np.abs(discrete_propagate(cfg, h).rho[-1] - ref)) for h in (2e-3, 1e-3)]
    assert errs[0] < 2e-3
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.15)


def test_discrete_without_measurement_is_exact_to_magnus_order():
    cfg = SimConfig(LzParams(0.5, 0.0), DIABATIC_MEASUREMENT, t_start=-5.0, t_end=5.0)
    err = np.max(np.abs(discrete_propagate(cfg, 1e-2).rho[-1] - integrate(cfg).rho[-1]))
    assert err < 1e-7


def test_discrete_rejects_bad_steps():
    cfg = SimConfig(LzParams(0.5, 0.0), DIABATIC_MEASUREMENT, t_start=-1.0, t_end=1.0)
    with pytest.raises(ValueError):
        discrete_propagate(cfg, 0.0)
    with pytest.raises(ValueError):
        discrete_propagate(cfg, 0.3)


def test_projective_zeno():
    # exact: each interval rotates by VT/N, survival (1 + cos(2VT/N)**N)/2
    for n in (1, 7, 100):
        expected = 0.5 * (1 + math.cos(2.0 / n) ** n)
        assert projective_zeno_simulate(1.0, 1.0, n) == pytest.approx(expected, abs=1e-13)
    assert abs(projective_zeno_simulate(1.0, 1.0, 1000) - zeno_projective_survival(1.0, 1.0, 1000)) < 1e-6
    with pytest.raises(ValueError):
        projective_zeno_simulate(1.0, 1.0, 0)
