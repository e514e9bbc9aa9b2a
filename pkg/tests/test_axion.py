"""Physical-to-model parameter mapping and its consistency relations."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sqzscan.axion import (HBAR, HaloscopePhysical, gev_per_cm3_to_si,
                           liters_to_si, model_params, per_ev_to_si,
                           si_to_gev_per_cm3, si_to_liters, si_to_per_ev,
                           signal_power, signal_power_exchange_model,
                           validate_classical_limit)
from sqzscan.network import NetworkParams

TWO_PI = 2.0 * math.pi


def table_inputs(**overrides):
    values = dict(rho_a=0.45, B0=9.0, g_agg=-7.7e-24, delta_a=5e3,
                  omega_a=TWO_PI * 5e9, V=1.5, C_mnl=0.5)
    values.update(overrides)
    return HaloscopePhysical(**values)


def network(n_A, kappa_a, kappa_m=TWO_PI * 100e3, kappa_l=TWO_PI * 100e3):
    return NetworkParams(kappa_m=kappa_m, kappa_l=kappa_l, kappa_a=kappa_a,
                         omega_c=TWO_PI * 5e9, n_A=n_A)


# --- representative-values reproduction --------------------------------------

def test_model_params_reproduce_published_table():
    mp = model_params(table_inputs())
    assert mp.N_A == pytest.approx(3.3e16, rel=0.05)
    assert mp.kappa_a / TWO_PI == pytest.approx(2.3e-6, rel=0.05)
    assert mp.n_A == pytest.approx(2.4e7, rel=0.05)


def test_model_params_frozen_regression():
    mp = model_params(table_inputs())
    assert mp.N_A == pytest.approx(3.26429e16, rel=1e-5)
    assert mp.kappa_a == pytest.approx(TWO_PI * 2.314686e-6, rel=1e-5)
    assert mp.n_A == pytest.approx(2.373724e7, rel=1e-5)


def test_doubling_field_doubles_coupling_and_occupancy():
    base = model_params(table_inputs())
    doubled = model_params(table_inputs(B0=18.0))
    assert doubled.kappa_a == pytest.approx(2 * base.kappa_a, rel=1e-12)
    assert doubled.n_A == pytest.approx(2 * base.n_A, rel=1e-12)
    assert doubled.N_A == pytest.approx(base.N_A, rel=1e-12)


def test_doubling_volume_scales_occupancies_only():
    base = model_params(table_inputs())
    doubled = model_params(table_inputs(V=3.0))
    assert doubled.n_A == pytest.approx(2 * base.n_A, rel=1e-12)
    assert doubled.N_A == pytest.approx(2 * base.N_A, rel=1e-12)
    assert doubled.kappa_a == pytest.approx(base.kappa_a, rel=1e-12)


@given(sign=st.sampled_from([-1.0, 1.0]))
def test_coupling_sign_is_irrelevant(sign):
    mp = model_params(table_inputs(g_agg=sign * 7.7e-24))
    ref = model_params(table_inputs())
    assert mp == ref


def test_consistency_relations_hold():
    rng = np.random.default_rng(2)
    for _ in range(50):
        phys = table_inputs(rho_a=rng.uniform(0.1, 1.0),
                            B0=rng.uniform(1.0, 20.0),
                            g_agg=-rng.uniform(1e-24, 1e-22),
                            delta_a=rng.uniform(1e3, 2e4),
                            V=rng.uniform(0.5, 200.0),
                            C_mnl=rng.uniform(0.1, 1.0))
        mp = model_params(phys)
        rho = gev_per_cm3_to_si(phys.rho_a)
        assert mp.n_A / mp.kappa_a == pytest.approx(
            mp.N_A / (4 * phys.delta_a), rel=1e-10)
        assert mp.N_A == pytest.approx(
            liters_to_si(phys.V) * rho / (HBAR * phys.omega_a), rel=1e-12)


# --- signal power -----------------------------------------------------------

def test_signal_power_critical_coupling_form():
    p = network(n_A=2.5e7, kappa_a=TWO_PI * 2.3e-6)
    omega_a = TWO_PI * 5e9
    got = signal_power(p, 5e3, omega_a)
    expected = HBAR * omega_a * p.n_A * 5e3 * p.kappa_a / p.kappa_l
    assert got == pytest.approx(expected, rel=1e-12)


def test_signal_power_order_of_magnitude():
    mp = model_params(table_inputs())
    p = network(n_A=mp.n_A, kappa_a=mp.kappa_a)
    watts = signal_power(p, 5e3, TWO_PI * 5e9)
    assert 1e-24 < watts < 5e-23


def test_generator_and_exchange_models_agree():
    rng = np.random.default_rng(3)
    for _ in range(100):
        delta_a = rng.uniform(1e3, 2e4)
        kappa_a = rng.uniform(1e-6, 1e-3)
        cap_n = rng.uniform(1e10, 1e20)
        n_a = kappa_a * cap_n / (4 * delta_a)   # occupancy-exchange relation
        p = network(n_A=n_a, kappa_a=kappa_a,
                    kappa_m=TWO_PI * rng.uniform(3e4, 3e6))
        omega_a = TWO_PI * rng.uniform(1e9, 1e10)
        assert signal_power(p, delta_a, omega_a) == pytest.approx(
            signal_power_exchange_model(cap_n, kappa_a, p.kappa_m,
                                        p.kappa_l, omega_a), rel=1e-10)


# --- classical-limit validation ----------------------------------------------

def test_representative_parameters_pass():
    mp = model_params(table_inputs())
    report = validate_classical_limit(network(mp.n_A, mp.kappa_a), 5e3)
    assert report.passed
    assert report.classical == "ok"
    assert report.weak_drive == "ok"


def test_low_occupancy_fails_classicality():
    report = validate_classical_limit(network(0.1, TWO_PI * 1e-6), 5e3)
    assert not report.passed
    assert report.classical == "violated"


def test_wide_line_fails_narrowband():
    p = network(2.4e7, TWO_PI * 2.3e-6)
    report = validate_classical_limit(p, p.kappa_l / TWO_PI)
    assert not report.passed
    assert report.narrowband == "violated"


def test_report_serializes():
    mp = model_params(table_inputs())
    d = validate_classical_limit(network(mp.n_A, mp.kappa_a), 5e3).as_dict()
    assert d["passed"] is True
    assert set(d) == {"classical", "narrowband", "weak_drive", "passed"}


# --- units -------------------------------------------------------------------

@given(x=st.floats(1e-30, 1e30))
def test_unit_round_trips_are_exact(x):
    assert si_to_gev_per_cm3(gev_per_cm3_to_si(x)) == pytest.approx(x, rel=1e-12)
    assert si_to_per_ev(per_ev_to_si(x)) == pytest.approx(x, rel=1e-12)
    assert si_to_liters(liters_to_si(x)) == pytest.approx(x, rel=1e-12)


def test_physical_validation():
    with pytest.raises(ValueError):
        table_inputs(rho_a=-1.0)
    with pytest.raises(ValueError):
        table_inputs(C_mnl=1.5)
    with pytest.raises(ValueError):
        table_inputs(g_agg=0.0)
