"""One test per acceptance criterion; each prints a PASS/FAIL line with the measured numbers.

Set LZZENO_FAST=1 for reduced grids.
"""

import os

import pytest

from lzzeno import acceptance

FAST = os.environ.get("LZZENO_FAST", "") not in ("", "0")


@pytest.fixture(scope="module")
def options(tmp_path_factory):
    return acceptance.Options(fast=FAST, artifacts=tmp_path_factory.mktemp("surfaces"))


def check(key, options):
    result = acceptance.run_check(key, options)
    print("\n" + result.line())
    assert result.passed, result.detail


def test_01_lz_limit_without_measurement(options):
    check("1", options)


def test_02_equal_population_plateau_under_strong_diabatic_measurement(options):
    check("2", options)


def test_03_strong_measurement_relaxation_rate(options):
    check("3", options)


def test_04_adiabatic_measurement_survival_increases_with_lambda(options):
    check("4", options)


def test_05_adiabatic_limit_survival_dips_below_unmeasured_value(options):
    check("5", options)


def test_06_discrete_kraus_oracle_agrees_to_first_order(options):
    check("6", options)


def test_07_adiabatic_and_diabatic_frames_agree_without_measurement(options):
    check("7", options)


def test_07_corrupted_gauge_sign_is_detected(options):
    bad = acceptance.Options(fast=True, gauge_sign=-acceptance.GAUGE_SIGN)
    result = acceptance.run_check("7", bad)
    print("\n[corrupted gauge sign] " + result.line())
    assert not result.passed


def test_08_projective_zeno_limit(options):
    check("8", options)


def test_09_density_matrix_invariants(options):
    check("9", options)


def test_10_step_halving_convergence(options):
    check("10", options)


def test_11_freeze_estimate_for_strong_measurement(options):
    check("11", options)


@pytest.mark.slow
def test_11b_sweep_surfaces_share_unmeasured_edge(options):
    check("11b", options)
