"""Input-output network model: matrix products against closed forms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqzscan.network import (NetworkParams, db_to_linear, expected_squeezing_db,
                             input_density, measured_noise_density,
                             output_density, signal_transfer, stage_matrices,
                             susceptibility, visibility)

TWO_PI = 2.0 * math.pi
KL = TWO_PI * 100e3


def params(kappa_m=KL, kappa_l=KL, kappa_a=0.0, n_T=0.0, n_A=0.0,
           G_s=1.0, G_a=1.0, lambda_t=1.0):
    return NetworkParams(kappa_m=kappa_m, kappa_l=kappa_l, kappa_a=kappa_a,
                         omega_c=TWO_PI * 7.146e9, n_T=n_T, n_A=n_A,
                         G_s=G_s, G_a=G_a, lambda_t=lambda_t)


def random_params(rng, lossless=False):
    kl = TWO_PI * rng.uniform(10e3, 1e6)
    km = kl * rng.uniform(0.3, 30.0)
    ka = 1e-4 * min(km, kl) * rng.uniform(0.01, 1.0)
    lam = 1.0 if lossless else rng.uniform(0.05, 1.0)
    return params(kappa_m=km, kappa_l=kl, kappa_a=ka,
                  n_T=rng.uniform(0.0, 5.0), n_A=rng.uniform(0.0, 1e7),
                  G_s=rng.uniform(1.0, 100.0), G_a=rng.uniform(1.0, 1000.0),
                  lambda_t=lam)


# --- independent closed-form oracles, written from the algebra directly ----

def measured_density_oracle(p, w):
    """(m, m) output density: lossy closed form, signal coupling dropped
    from the total decay rate but kept in the couplings."""
    big = (p.kappa_m + p.kappa_l) ** 2 / 4 + w * w
    small = (p.kappa_m - p.kappa_l) ** 2 / 4 + w * w
    vac = p.n_T + 0.5
    lam = p.lambda_t
    inner = ((p.n_A + 0.5) * p.kappa_a * p.kappa_m
             + vac * (p.kappa_l * p.kappa_m + (1 - lam + lam / p.G_s) * small))
    return vac * p.G_a * (1 - lam) + p.G_a * lam * inner / big


def measured_density_lossless_oracle(p, w):
    big = (p.kappa_m + p.kappa_l) ** 2 / 4 + w * w
    small = (p.kappa_m - p.kappa_l) ** 2 / 4 + w * w
    return p.G_a / big * ((p.n_A + 0.5) * p.kappa_a * p.kappa_m
                          + (p.n_T + 0.5) * (p.kappa_l * p.kappa_m
                                             + small / p.G_s))


# --- susceptibility ---------------------------------------------------------

def test_critical_coupling_absorbs_on_resonance():
    p = params(kappa_m=KL, kappa_l=KL, kappa_a=0.0)
    chi = susceptibility(p, 0.0)
    assert abs(chi[0, 0]) < 1e-12


def test_far_detuned_reflection_is_identity():
    p = params(kappa_m=TWO_PI * 1e6, kappa_a=TWO_PI * 10.0)
    chi = susceptibility(p, 1e15)
    assert np.allclose(chi, np.eye(3), atol=1e-6)


def test_susceptibility_matches_direct_formula():
    km, kl, ka = TWO_PI * 1e6, TWO_PI * 100e3, TWO_PI * 100.0
    w = TWO_PI * 500e3
    p = params(kappa_m=km, kappa_l=kl, kappa_a=ka)
    kt = km + kl + ka
    denom = kt / 2 + 1j * w
    kappas = [km, kl, ka]
    expected = np.array([
        [(-math.sqrt(kappas[j] * kappas[k]) + (denom if j == k else 0)) / denom
         for k in range(3)] for j in range(3)])
    assert np.allclose(susceptibility(p, w), expected, rtol=0, atol=1e-14)


def test_susceptibility_unitarity_random_draws():
    rng = np.random.default_rng(11)
    for _ in range(200):
        p = random_params(rng)
        w = rng.uniform(-30, 30) * p.kappa_l
        chi = susceptibility(p, w)
        assert np.max(np.abs(chi.conj().T @ chi - np.eye(3))) < 1e-12


def test_susceptibility_rejects_nonfinite_omega():
    with pytest.raises(ValueError):
        susceptibility(params(), math.nan)


# --- stage matrices ---------------------------------------------------------

def test_stage_matrices_identity_when_inactive():
    s, l, a, n = stage_matrices(params(G_s=1.0, lambda_t=1.0, G_a=1.0))
    for m in (s, l, a):
        assert np.allclose(m, np.eye(3), atol=0)
    assert np.all(n == 0)


def test_stage_matrices_full_loss_replaces_vacuum():
    p = params(n_T=0.3, lambda_t=0.0)
    *_, n = stage_matrices(p)
    assert n[0, 0] == pytest.approx(0.8, rel=1e-12)
    assert np.count_nonzero(n) == 1


def test_stage_matrices_values():
    p = params(G_s=20.0, lambda_t=0.83, G_a=316.0, n_T=0.1)
    s, l, a, n = stage_matrices(p)
    assert s[0, 0] == pytest.approx(0.2236, abs=5e-5)
    assert l[0, 0] == pytest.approx(0.9110, abs=5e-5)
    assert a[0, 0] == pytest.approx(17.78, abs=5e-3)
    assert n[0, 0] == pytest.approx(0.17 * 0.6, rel=1e-12)


# --- output density ---------------------------------------------------------

def test_passive_lossless_network_preserves_vacuum():
    # exact when every port carries the same occupancy; with a weakly coupled
    # colder signal port the deviation is bounded by the coupling ratio
    p = params(kappa_a=0.0, n_T=0.7)
    p_weak = params(kappa_a=1e-5 * KL, n_T=0.7, n_A=0.0)
    for w in (0.0, 0.3 * KL, 5 * KL, 100 * KL):
        assert output_density(p, w)[0, 0] == pytest.approx(1.2, rel=1e-12)
        assert output_density(p_weak, w)[0, 0] == pytest.approx(1.2, rel=1e-4)


def test_output_density_matches_lossy_closed_form():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        p = random_params(rng)
        w = rng.uniform(-20, 20) * p.kappa_l
        got = output_density(p, w, drop_signal_rate_from_total=True)[0, 0]
        assert got == pytest.approx(measured_density_oracle(p, w), rel=1e-10)


def test_output_density_matches_lossless_closed_form():
    rng = np.random.default_rng(8)
    for _ in range(300):
        p = random_params(rng, lossless=True)
        w = rng.uniform(-20, 20) * p.kappa_l
        got = output_density(p, w, drop_signal_rate_from_total=True)[0, 0]
        assert got == pytest.approx(measured_density_lossless_oracle(p, w),
                                    rel=1e-10)


def test_exact_total_rate_deviates_at_small_coupling_scale():
    # keeping the signal coupling in the total rate changes the result by
    # roughly kappa_a / kappa, which is the measurable approximation error
    p = params(kappa_m=KL, kappa_l=KL, kappa_a=1e-3 * KL, n_A=10.0)
    exact = output_density(p, 0.4 * KL)[0, 0]
    approx = output_density(p, 0.4 * KL, drop_signal_rate_from_total=True)[0, 0]
    rel = abs(exact - approx) / approx
    assert 1e-5 < rel < 1e-2


def test_measured_noise_density_is_closed_form():
    rng = np.random.default_rng(9)
    for _ in range(100):
        p = random_params(rng)
        w = rng.uniform(-10, 10) * p.kappa_l
        assert measured_noise_density(p, w) == pytest.approx(
            measured_density_oracle(p, w), rel=1e-12)


# --- visibility -------------------------------------------------------------

def test_visibility_on_resonance_critical_coupling():
    for gs in (1.0, 4.0, 50.0):
        p = params(kappa_a=TWO_PI * 0.1, n_A=100.0, n_T=0.2, G_s=gs)
        expected = 100.0 * (TWO_PI * 0.1) / (0.7 * KL)
        assert visibility(p, 0.0) == pytest.approx(expected, rel=1e-12)


def test_visibility_overcoupled_squeezed_ratio():
    lam = math.sqrt(0.69)
    gs = db_to_linear(13.0)
    over = params(kappa_m=10 * KL, kappa_a=TWO_PI * 0.1, n_A=10.0,
                  G_s=gs, lambda_t=lam)
    crit = params(kappa_m=KL, kappa_a=TWO_PI * 0.1, n_A=10.0,
                  G_s=gs, lambda_t=lam)
    ratio = visibility(over, 0.0) / visibility(crit, 0.0)
    assert ratio == pytest.approx(0.589, abs=0.005)


def test_four_case_resonant_visibilities():
    # frozen from direct evaluation of the lossy closed form
    lam = math.sqrt(0.69)
    gs = db_to_linear(13.0)
    amax = visibility(params(kappa_m=KL, kappa_a=TWO_PI * 0.1, n_A=10.0,
                             G_s=gs, lambda_t=lam), 0.0)
    cases = {
        (10.0, gs): 0.589005,
        (1.5, 1.0): 0.960000,
        (10.0, 1.0): 0.330579,
        (1.5, gs): 0.985846,
    }
    for (ratio, g), expected in cases.items():
        p = params(kappa_m=ratio * KL, kappa_a=TWO_PI * 0.1, n_A=10.0,
                   G_s=g, lambda_t=lam)
        assert visibility(p, 0.0) / amax == pytest.approx(expected, abs=2e-5)


@given(w=st.floats(-1e7, 1e7))
def test_visibility_is_even(w):
    p = params(kappa_m=3 * KL, kappa_a=TWO_PI * 1.0, n_A=5.0,
               G_s=12.0, lambda_t=0.8)
    assert visibility(p, w) == visibility(p, -w)


@settings(max_examples=60)
@given(g1=st.floats(1.0, 1e3), g2=st.floats(1.0, 1e3),
       ratio=st.floats(0.2, 20.0), w_scale=st.floats(0.05, 20.0))
def test_squeezing_never_hurts_off_resonance(g1, g2, ratio, w_scale):
    lo, hi = sorted((g1, g2))
    w = w_scale * KL
    p_lo = params(kappa_m=ratio * KL, kappa_a=TWO_PI * 1.0, n_A=5.0, G_s=lo)
    p_hi = params(kappa_m=ratio * KL, kappa_a=TWO_PI * 1.0, n_A=5.0, G_s=hi)
    assert visibility(p_hi, w) >= visibility(p_lo, w) * (1 - 1e-12)


def test_visibility_saturates_at_large_gain():
    amax = visibility(params(kappa_m=KL, kappa_a=TWO_PI * 1.0, n_A=5.0), 0.0)
    p = params(kappa_m=7 * KL, kappa_a=TWO_PI * 1.0, n_A=5.0, G_s=1e6)
    for w in (0.0, 0.5 * KL, 2 * KL, 10 * KL):
        assert visibility(p, w) == pytest.approx(amax, rel=0.01)


def test_visibility_needs_driven_signal_port():
    with pytest.raises(ValueError):
        visibility(params(kappa_a=TWO_PI * 1.0, n_A=0.0), 0.0)


def test_visibility_consistent_with_transfer_over_noise():
    rng = np.random.default_rng(21)
    for _ in range(50):
        p = random_params(rng)
        if p.n_A == 0:
            p = p.replace(n_A=5.0)
        w = rng.uniform(-10, 10) * p.kappa_l
        noise = measured_noise_density(p.replace(n_A=0.0), w,
                                       include_signal_port=False)
        assert visibility(p, w) == pytest.approx(
            signal_transfer(p, w) * p.n_A / noise, rel=1e-10)


# --- expected squeezing -----------------------------------------------------

def test_expected_squeezing_reference_point():
    assert expected_squeezing_db(0.69, db_to_linear(13.0)) == pytest.approx(
        -4.6, abs=0.05)


def test_expected_squeezing_limits():
    assert expected_squeezing_db(0.0, 123.0) == 0.0
    for g in (1.0, 10.0, 400.0):
        assert expected_squeezing_db(1.0, g) == pytest.approx(
            -10 * math.log10(g), rel=1e-12)


def test_expected_squeezing_rejects_bad_inputs():
    with pytest.raises(ValueError):
        expected_squeezing_db(-0.1, 10.0)
    with pytest.raises(ValueError):
        expected_squeezing_db(1.1, 10.0)
    with pytest.raises(ValueError):
        expected_squeezing_db(0.5, 0.5)


# --- parameter validation ---------------------------------------------------

def test_params_validation():
    with pytest.raises(ValueError):
        params(kappa_m=0.0)
    with pytest.raises(ValueError):
        params(kappa_a=-1.0)
    with pytest.raises(ValueError):
        params(G_s=0.5)
    with pytest.raises(ValueError):
        params(lambda_t=1.2)


def test_params_warns_outside_weak_coupling_regime():
    with pytest.warns(UserWarning, match="weak-signal-coupling"):
        params(kappa_a=0.1 * KL)


def test_input_density_diagonal():
    p = params(n_T=1.5, n_A=42.0, kappa_a=TWO_PI * 1.0)
    assert np.allclose(input_density(p), np.diag([2.0, 2.0, 42.5]))
