"""Scan rates, optimal couplings and enhancement ratios."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqzscan import scanrate
from sqzscan.errors import DegenerateObjectiveError
from sqzscan.network import NetworkParams, db_to_linear
from sqzscan.scanrate import (ScanConfig, compare_configs, enhancement_grid,
                              golden_section_max, optimal_coupling,
                              quadrature_equivalence, scan_rate,
                              scan_rate_closed_form, snr_single_step,
                              visibility_squared_integral,
                              visibility_squared_integral_closed_form)

TWO_PI = 2.0 * math.pi
KL = TWO_PI * 100e3
LAM69 = math.sqrt(0.69)
GS13 = db_to_linear(13.0)


def params(kappa_m=2 * KL, G_s=1.0, lambda_t=1.0, n_T=0.0, n_A=5.0,
           kappa_a=TWO_PI * 1.0, kappa_l=KL):
    return NetworkParams(kappa_m=kappa_m, kappa_l=kappa_l, kappa_a=kappa_a,
                         omega_c=TWO_PI * 7.146e9, n_T=n_T, n_A=n_A,
                         G_s=G_s, G_a=100.0, lambda_t=lambda_t)


def closed_form_rate_oracle(p, cfg):
    """Lossless scan rate written straight from the integral's solution."""
    beta0 = (p.kappa_l - p.kappa_m) ** 2 / 4.0
    denom = (p.kappa_l * p.kappa_m + beta0 / p.G_s) ** 1.5
    num = (cfg.delta_a * math.sqrt(p.G_s) * p.n_A**2 * p.kappa_a**2
           * p.kappa_m**2)
    return num / (16.0 * cfg.target_snr**2 * (p.n_T + 0.5) ** 2 * denom)


# --- single-step SNR --------------------------------------------------------

def test_snr_single_step_identity():
    assert snr_single_step(1.0, 1.0, 4.0) == pytest.approx(1.0, rel=1e-12)


def test_snr_single_step_reference_value():
    assert snr_single_step(0.5, 0.32, 9e3) == pytest.approx(13.4, abs=0.05)


@given(tau=st.floats(1e-3, 1e3), alpha=st.floats(1e-6, 1e3),
       da=st.floats(1.0, 1e5))
def test_snr_scales_as_root_time(tau, alpha, da):
    one = snr_single_step(alpha, tau, da)
    two = snr_single_step(alpha, 2 * tau, da)
    assert two == pytest.approx(math.sqrt(2.0) * one, rel=1e-12)


def test_snr_rejects_nonpositive():
    with pytest.raises(ValueError):
        snr_single_step(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        snr_single_step(1.0, -1.0, 1.0)


# --- scan rate: quadrature vs closed form -----------------------------------

def test_scan_rate_matches_lossless_closed_form():
    rng = np.random.default_rng(31)
    cfg = ScanConfig(delta_a=9e3, target_snr=5.0)
    for _ in range(25):
        p = params(kappa_m=KL * rng.uniform(0.3, 30.0),
                   G_s=rng.uniform(1.0, 100.0),
                   n_T=rng.uniform(0.0, 3.0), n_A=rng.uniform(1.0, 1e6))
        assert scan_rate(p, cfg) == pytest.approx(
            closed_form_rate_oracle(p, cfg), rel=1e-6)


def test_scan_rate_closed_form_agrees_with_quadrature_lossy():
    rng = np.random.default_rng(32)
    cfg = ScanConfig()
    for _ in range(25):
        p = params(kappa_m=KL * rng.uniform(0.3, 30.0),
                   G_s=rng.uniform(1.0, 100.0),
                   lambda_t=rng.uniform(0.1, 1.0))
        assert scan_rate(p, cfg) == pytest.approx(
            scan_rate_closed_form(p, cfg), rel=1e-6)


def test_scan_rate_increases_with_squeezing_when_overcoupled():
    cfg = ScanConfig()
    rates = [scan_rate(params(kappa_m=4 * KL, G_s=g), cfg)
             for g in (1.0, 2.0, 5.0, 20.0, 80.0)]
    assert np.all(np.diff(rates) > 0)


def test_explicit_bounds_are_honored():
    p = params(kappa_m=3 * KL, G_s=10.0)
    wide = visibility_squared_integral(p, ScanConfig())
    narrow = visibility_squared_integral(
        p, ScanConfig(bounds=0.5 * p.kappa_total))
    assert narrow < wide


# --- optimal coupling -------------------------------------------------------

def test_optimal_coupling_unsqueezed_is_twice_overcoupled():
    km = optimal_coupling(params(G_s=1.0), ScanConfig())
    assert km == pytest.approx(2.0 * KL, rel=1e-3)


def test_optimal_coupling_tracks_twice_gain():
    km = optimal_coupling(params(G_s=100.0), ScanConfig())
    assert km == pytest.approx(200.0 * KL, rel=0.05)


def test_optimal_coupling_against_dense_scan():
    cfg = ScanConfig()
    for p in (params(G_s=20.0), params(G_s=20.0, lambda_t=LAM69)):
        km = optimal_coupling(p, cfg)
        grid = KL * np.geomspace(0.1, 1e3, 4000)
        rates = [visibility_squared_integral_closed_form(p.replace(kappa_m=k))
                 for k in grid]
        best = grid[int(np.argmax(rates))]
        assert km == pytest.approx(best, rel=2e-3)
        assert visibility_squared_integral_closed_form(
            p.replace(kappa_m=km)) >= max(rates) * (1 - 1e-6)


def test_optimal_coupling_lossy_sits_between_limits():
    km = optimal_coupling(params(G_s=20.0, lambda_t=LAM69), ScanConfig())
    assert 2.0 * KL <= km <= 40.0 * KL


def test_optimal_coupling_flat_objective_raises(monkeypatch):
    monkeypatch.setattr(scanrate, "visibility_squared_integral_closed_form",
                        lambda p: 1.0)
    with pytest.raises(DegenerateObjectiveError):
        optimal_coupling(params(), ScanConfig())


def test_golden_section_finds_quadratic_peak():
    x, fx = golden_section_max(lambda x: -(x - 1.7) ** 2, -5.0, 5.0,
                               rel_tol=1e-8)
    assert x == pytest.approx(1.7, abs=1e-6)


# --- enhancement grid -------------------------------------------------------

def test_grid_normalization_cell_is_unity():
    grid = enhancement_grid(1.0, [1.0], [2.0], params())
    assert grid.values[0, 0] == pytest.approx(1.0, rel=1e-8)


def test_grid_plateau_cell():
    grid = enhancement_grid(0.69, [25.0], [5.0], params())
    value = grid.values[0, 0]
    assert value == pytest.approx(2.2685, abs=2e-3)   # frozen closed-form value
    assert abs(value - 2.2) <= 0.1


def test_grid_diagonal_grows_proportionally_at_unit_efficiency():
    gs = np.array([12.5, 25.0, 50.0, 100.0])
    grid = enhancement_grid(1.0, gs, 2.0 * gs, params())
    diag = np.diagonal(grid.values)
    assert np.all(np.diff(diag) > 0)
    slopes = np.diff(np.log(diag)) / math.log(2.0)
    assert np.all(np.abs(slopes - 1.0) < 0.05)   # doubling G_s doubles E_t
    assert slopes[-1] == pytest.approx(1.0, abs=0.02)


def test_grid_marks_failed_cells_invalid(monkeypatch):
    calls = {"n": 0}
    real = scanrate.visibility_squared_integral

    def flaky(p, cfg):
        calls["n"] += 1
        if calls["n"] == 3:   # second grid cell (after the reference integral)
            raise scanrate.NumericalError("boom")
        return real(p, cfg)

    monkeypatch.setattr(scanrate, "visibility_squared_integral", flaky)
    grid = enhancement_grid(0.69, [1.0, 2.0], [2.0], params())
    assert np.isnan(grid.values).sum() == 1
    assert len(grid.failures) == 1


def test_grid_axis_validation():
    with pytest.raises(ValueError):
        enhancement_grid(0.69, [], [1.0], params())
    with pytest.raises(ValueError):
        enhancement_grid(0.69, [2.0, 1.0], [1.0], params())
    with pytest.raises(ValueError):
        enhancement_grid(1.5, [1.0], [1.0], params())


def test_grid_csv_round_trip(tmp_path):
    grid = enhancement_grid(0.69, [1.0, 25.0], [2.0, 5.0], params())
    target = tmp_path / "grid.csv"
    grid.to_csv(target)
    rows = np.loadtxt(target, delimiter=",", skiprows=1)
    assert rows.shape == (4, 3)
    cell = rows[(rows[:, 0] == 25.0) & (rows[:, 1] == 5.0)][0, 2]
    assert cell == pytest.approx(2.2685, abs=2e-3)


# --- quadrature equivalence -------------------------------------------------

@given(tau=st.floats(1e-6, 1e4), da=st.floats(1e-2, 1e6),
       alpha=st.floats(1e-9, 1e4))
def test_single_and_double_quadrature_tie(tau, da, alpha):
    one, two = quadrature_equivalence(tau, da, alpha)
    assert one == pytest.approx(two, rel=1e-12)


def test_quadrature_equivalence_zero_time():
    assert quadrature_equivalence(0.0, 9e3, 1.0) == (0.0, 0.0)


@given(c=st.floats(1e-3, 1e3))
def test_quadrature_equivalence_linear_in_alpha(c):
    one, two = quadrature_equivalence(0.32, 9e3, 1.0)
    one_c, two_c = quadrature_equivalence(0.32, 9e3, c)
    assert one_c == pytest.approx(c * one, rel=1e-12)
    assert two_c == pytest.approx(c * two, rel=1e-12)


# --- configuration comparisons ---------------------------------------------

def test_compare_configs_reference_pair():
    squeezed = params(kappa_m=10 * KL, G_s=GS13, lambda_t=LAM69)
    unsqueezed = params(kappa_m=1.5 * KL, G_s=1.0, lambda_t=LAM69)
    e = compare_configs(squeezed, unsqueezed)
    assert e == pytest.approx(2.1139, abs=2e-3)   # frozen closed-form value
    assert abs(e - 2.11) <= 0.07


def test_compare_configs_nearcritical_pair():
    squeezed = params(kappa_m=1.5 * KL, G_s=GS13, lambda_t=LAM69)
    unsqueezed = params(kappa_m=1.5 * KL, G_s=1.0, lambda_t=LAM69)
    assert compare_configs(squeezed, unsqueezed) == pytest.approx(1.7728,
                                                                  abs=2e-3)


def test_compare_configs_overcoupling_without_squeezing_loses():
    over = params(kappa_m=10 * KL, G_s=1.0, lambda_t=LAM69)
    near = params(kappa_m=1.5 * KL, G_s=1.0, lambda_t=LAM69)
    assert compare_configs(over, near) == pytest.approx(0.5217, abs=2e-3)


@settings(max_examples=30, deadline=None)
@given(scale_na=st.floats(0.1, 10.0), scale_ka=st.floats(0.1, 10.0))
def test_enhancement_invariant_under_source_rescaling(scale_na, scale_ka):
    squeezed = params(kappa_m=10 * KL, G_s=GS13, lambda_t=LAM69)
    unsqueezed = params(kappa_m=1.5 * KL, G_s=1.0, lambda_t=LAM69)
    base = compare_configs(squeezed, unsqueezed)
    changes = dict(n_A=5.0 * scale_na, kappa_a=TWO_PI * scale_ka)
    scaled = compare_configs(squeezed.replace(**changes),
                             unsqueezed.replace(**changes))
    assert scaled == pytest.approx(base, rel=1e-9)


def test_scan_config_validation():
    with pytest.raises(ValueError):
        ScanConfig(delta_a=0.0)
    with pytest.raises(ValueError):
        ScanConfig(target_snr=-1.0)
    with pytest.raises(ValueError):
        ScanConfig(bounds=-5.0)
