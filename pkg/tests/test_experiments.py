import math

import numpy as np
import pytest

from lzzeno import experiments as ex
from lzzeno.dynamics import ADIABATIC_MEASUREMENT, DIABATIC_MEASUREMENT, Protocol, SimConfig, integrate
from lzzeno.lz_model import LzParams
from lzzeno.quantum_core import ADIABATIC, DIABATIC


def test_asymptote_of_unmeasured_sweep():
    traj = integrate(SimConfig(LzParams(0.5, 0.0), DIABATIC_MEASUREMENT))
    value, spread = ex.extract_asymptote(traj, DIABATIC, 1)
    assert value == pytest.approx(math.exp(-math.pi * 0.5), abs=0.01)
    assert spread < 0.01


def test_fit_decay_rate_rejects_sign_change_and_short_window():
    traj = integrate(SimConfig(LzParams(0.8, 0.0), Protocol.static(), t_start=0.0, t_end=10.0))
    with pytest.raises(ValueError, match="sign"):
        ex.fit_decay_rate(traj, (0.0, 10.0))
    with pytest.raises(ValueError):
        ex.fit_decay_rate(traj, (3.0, 3.01))


def test_time_to_threshold():
    traj = integrate(SimConfig(LzParams(0.5, 10.0), Protocol.static(), t_start=0.0, t_end=100.0))
    t = ex.time_to_threshold(traj, 0.1)
    # rho11 - rho22 = exp(-r t) with r close to 2 z^2 / lambda
    assert t == pytest.approx(math.log(10) / 0.0501, rel=0.02)
    short = integrate(SimConfig(LzParams(0.5, 10.0), Protocol.static(), t_start=0.0, t_end=1.0))
    assert ex.time_to_threshold(short) == math.inf


def test_oscillation_measures():
    traj = integrate(SimConfig(LzParams(0.8, 0.0), Protocol.static(), t_start=0.0, t_end=10.0))
    assert ex.oscillation_range(traj, (0, 10), DIABATIC, 1) == pytest.approx(1.0, abs=1e-3)
    # cos^2(0.8 t) over [0, 10] swings through 5 full half-periods
    assert ex.oscillation_amplitude(traj, (0, 10), DIABATIC, 1) > 3.0
    damped = integrate(SimConfig(LzParams(0.5, 10.0), Protocol.static(), t_start=0.0, t_end=10.0))
    assert ex.oscillation_amplitude(damped, (0, 10), DIABATIC, 1) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("z", [0.05, 0.5])
def test_measurement_washes_out_adiabatic_oscillations(z):
    amps = []
    for lam in ex.FIG1_LAMBDAS:
        traj = integrate(SimConfig(LzParams(z, lam), ADIABATIC_MEASUREMENT))
        amps.append(ex.oscillation_amplitude(traj, (-5.0, 5.0)))
    assert amps[0] > 1e-4
    assert all(b <= a + 1e-12 for a, b in zip(amps, amps[1:]))
    assert amps[-1] < 1e-3 * amps[0]


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        ex.SweepSpec((), (0.0,))
    with pytest.raises(ValueError):
        ex.SweepSpec((-1.0,), (0.0,))
    with pytest.raises(ValueError):
        ex.SweepSpec((1.0,), (-0.5,))
    with pytest.raises(ValueError):
        ex.SweepSpec((1.0,), (0.0,), Protocol.static())
    assert ex.SweepSpec((1.0,), (0.0,), report_basis=DIABATIC).report_index == 1


def test_sweep_order_and_zero_lambda_edges_shared():
    kw = dict(t_start=-50.0, t_end=50.0)
    a = ex.sweep(ex.SweepSpec((1.0, 0.2), (0.5, 0.0), ADIABATIC_MEASUREMENT, **kw))
    b = ex.sweep(ex.SweepSpec((1.0, 0.2), (0.5, 0.0), DIABATIC_MEASUREMENT, **kw))
    assert [(c.z, c.lambda_tilde) for c in a.cells] == [(0.2, 0.0), (0.2, 0.5), (1.0, 0.0), (1.0, 0.5)]
    assert a.surface().shape == (2, 2)
    assert a.cell(0.2, 0.0).survival == b.cell(0.2, 0.0).survival
    assert a.cell(1.0, 0.5).survival != b.cell(1.0, 0.5).survival
    with pytest.raises(KeyError):
        a.cell(3.0, 0.0)


def test_sweep_parallel_matches_serial():
    spec = ex.SweepSpec((0.3, 0.6), (0.0, 1.0), ADIABATIC_MEASUREMENT, t_start=-30.0, t_end=30.0)
    assert ex.sweep(spec, jobs=1).cells == ex.sweep(spec, jobs=2).cells


def test_failed_cell_is_recorded_not_raised():
    spec = ex.SweepSpec((1.0,), (0.0,), t_start=-10.0, t_end=10.0013)
    cell = ex.run_cell(spec, 1.0, 0.0)
    assert math.isnan(cell.survival) and not cell.converged and "ValueError" in cell.error


def test_nonmonotonicity_absent_for_small_z():
    assert ex.find_nonmonotonicity(0.05, (0.5, 1.0, 2.0)) is None
    assert ex.find_nonmonotonicity(0.05, (0.0,)) is None


def test_reproduce_rejects_unknown_figure(tmp_path):
    with pytest.raises(ValueError):
        ex.reproduce_figure("9z", tmp_path)


def test_fig3_grid():
    zs, ls = ex.fig3_grid()
    assert len(zs) == 20 and len(ls) == 21 and ls[0] == 0.0
    assert zs[0] == pytest.approx(0.02) and zs[-1] == pytest.approx(5.0)
    assert ls[1] == pytest.approx(0.01) and ls[-1] == pytest.approx(50.0)
