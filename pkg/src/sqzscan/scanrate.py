"""Scan rates, enhancement factors and coupling optimisation.

The figure of merit for a tuning search is the integral of the squared
visibility over detuning.  Everything here reduces to that integral: the
absolute scan rate divides it by the target integrated SNR, enhancement
factors are ratios of it between receiver configurations, and the optimal
measurement coupling maximises it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import DegenerateObjectiveError, NumericalError
from .network import NetworkParams, visibility

__all__ = [
    "ScanConfig",
    "EnhancementGrid",
    "snr_single_step",
    "visibility_squared_integral",
    "visibility_squared_integral_closed_form",
    "scan_rate",
    "scan_rate_closed_form",
    "optimal_coupling",
    "enhancement_grid",
    "quadrature_equivalence",
    "compare_configs",
    "golden_section_max",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# Width of the integration window in units of the half-width of alpha^2.
# Beyond w the integrand falls off as 1/w^4, so a window of K half-widths
# truncates a relative 0.42 / K^3 of the integral; 400 keeps that below 1e-8.
_HALFWIDTH_MARGIN = 400.0


@dataclass(frozen=True)
class ScanConfig:
    """Settings for scan-rate integrals.

    ``bounds`` is the symmetric integration window in rad/s.  When left as
    None the window is chosen automatically: at least 20 kappa_total, widened
    to several hundred half-widths of the squared visibility so truncation
    stays below the quadrature tolerance.
    """

    delta_a: float = 9e3          # signal linewidth, Hz
    target_snr: float = 5.0       # integrated SNR the search is run at
    bounds: float | None = None   # +/- integration bound, rad/s
    rel_tol: float = 1e-8

    def __post_init__(self):
        if self.delta_a <= 0:
            raise ValueError("delta_a must be positive")
        if self.target_snr <= 0:
            raise ValueError("target_snr must be positive")
        if self.bounds is not None and self.bounds <= 0:
            raise ValueError("bounds must be positive (symmetric about 0)")


@dataclass
class EnhancementGrid:
    """Scan-rate enhancement over the unsqueezed optimum on a (G_s, coupling) grid."""

    gs_axis: np.ndarray        # squeezer power gains, linear, ascending
    coupling_axis: np.ndarray  # kappa_m / kappa_l, ascending
    values: np.ndarray         # shape (len(gs_axis), len(coupling_axis))
    eta: float
    failures: list = field(default_factory=list)

    def to_csv(self, path):
        """Write long-format rows G_s, coupling_ratio, E_t."""
        with open(path, "w") as fh:
            fh.write("G_s,coupling_ratio,E_t\n")
            for i, gs in enumerate(self.gs_axis):
                for j, ratio in enumerate(self.coupling_axis):
                    fh.write(f"{gs:.10g},{ratio:.10g},{self.values[i, j]:.10g}\n")


def snr_single_step(alpha: float, tau: float, delta_a: float) -> float:
    """SNR of one tuning step: sqrt(tau * delta_a) * alpha / 2.

    Scales as the root of the number of independent power samples in the
    signal bandwidth; the factor 2 reflects the single-quadrature scheme.
    """
    if alpha <= 0 or tau <= 0 or delta_a <= 0:
        raise ValueError("alpha, tau and delta_a must all be positive")
    return math.sqrt(tau * delta_a) * alpha / 2.0


def _quadratic_denominator(params: NetworkParams):
    """alpha(w) = peak / (d0 + c2 w^2); return (d0, c2)."""
    lam = params.lambda_t
    g = 1.0 - lam + lam / params.G_s
    b0 = (params.kappa_m + params.kappa_l) ** 2 / 4.0
    s0 = (params.kappa_m - params.kappa_l) ** 2 / 4.0
    d0 = b0 * (1.0 - lam) + lam * (params.kappa_l * params.kappa_m + g * s0)
    c2 = (1.0 - lam) + lam * g
    return d0, c2


def _integration_bound(params: NetworkParams, cfg: ScanConfig) -> float:
    if cfg.bounds is not None:
        return cfg.bounds
    d0, c2 = _quadratic_denominator(params)
    halfwidth = math.sqrt(d0 / c2)
    return max(20.0 * params.kappa_total, _HALFWIDTH_MARGIN * halfwidth)


def visibility_squared_integral(params: NetworkParams, cfg: ScanConfig) -> float:
    """integral of alpha^2(w) dw / 2pi by adaptive quadrature."""
    bound = _integration_bound(params, cfg)

    def integrand(w: float) -> float:
        return visibility(params, w) ** 2

    value, abserr = quad(integrand, -bound, bound,
                         epsrel=cfg.rel_tol, epsabs=0.0, limit=500)
    if not np.isfinite(value) or value <= 0.0:
        raise NumericalError(
            f"visibility-squared integral failed: value={value}, abserr={abserr}")
    if abserr > 100.0 * cfg.rel_tol * value:
        raise NumericalError(
            f"visibility-squared integral did not converge: "
            f"value={value:.6g}, abserr={abserr:.3g}")
    return value / (2.0 * math.pi)


def visibility_squared_integral_closed_form(params: NetworkParams) -> float:
    """Exact integral of alpha^2 dw / 2pi for the quadratic-denominator form."""
    d0, c2 = _quadratic_denominator(params)
    peak = (params.lambda_t * params.n_A * params.kappa_a * params.kappa_m
            / (params.n_T + 0.5))
    return peak * peak / (4.0 * d0**1.5 * math.sqrt(c2))


def scan_rate(params: NetworkParams, cfg: ScanConfig) -> float:
    """Tuning rate (Hz/s) sustaining ``cfg.target_snr`` on a ``cfg.delta_a``-wide signal."""
    integral = visibility_squared_integral(params, cfg)
    return cfg.delta_a / (4.0 * cfg.target_snr**2) * integral


def scan_rate_closed_form(params: NetworkParams, cfg: ScanConfig) -> float:
    """Closed-form scan rate; equals the quadrature result for this network model."""
    integral = visibility_squared_integral_closed_form(params)
    return cfg.delta_a / (4.0 * cfg.target_snr**2) * integral


def golden_section_max(func, lo: float, hi: float, rel_tol: float = 1e-4):
    """Golden-section maximisation of a unimodal function on [lo, hi].

    Returns (x, f(x)).  ``rel_tol`` is on the bracket width relative to the
    midpoint, so it works on log-scaled coordinates too.
    """
    a, b = float(lo), float(hi)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = func(c), func(d)
    while abs(b - a) > rel_tol * max(1.0, abs(a + b) / 2.0):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = func(d)
    x = (a + b) / 2.0
    return x, func(x)


def optimal_coupling(params: NetworkParams, cfg: ScanConfig) -> float:
    """Measurement coupling that maximises the scan rate, by golden section
    on log(kappa_m) over [kappa_l / 10, 1e4 kappa_l]."""

    def objective(log_km: float) -> float:
        km = math.exp(log_km)
        return visibility_squared_integral_closed_form(
            params.replace(kappa_m=km))

    lo = math.log(params.kappa_l / 10.0)
    hi = math.log(1e4 * params.kappa_l)
    probe = [objective(x) for x in np.linspace(lo, hi, 16)]
    spread = (max(probe) - min(probe)) / max(abs(max(probe)), 1e-300)
    if spread < 1e-10:
        raise DegenerateObjectiveError(
            "scan rate is flat in kappa_m over the search range")

    log_opt, _ = golden_section_max(objective, lo, hi, rel_tol=1e-6)
    km = math.exp(log_opt)

    # stationarity check: the numerical derivative of R, scaled by km / R,
    # should be far below unity at a true optimum
    h = 1e-4 * km
    r0 = objective(math.log(km))
    slope = (objective(math.log(km + h)) - objective(math.log(km - h))) / (2 * h)
    if abs(slope) * km / r0 > 1e-3:
        raise NumericalError(
            f"optimal_coupling did not converge to a stationary point "
            f"(relative slope {abs(slope) * km / r0:.3g})")
    return km


def enhancement_grid(eta: float, gs_axis, coupling_axis,
                     base_params: NetworkParams,
                     cfg: ScanConfig | None = None) -> EnhancementGrid:
    """Scan-rate enhancement on a (G_s, kappa_m/kappa_l) grid at efficiency ``eta``.

    Every cell is the visibility-squared integral divided by the same
    integral for the unsqueezed receiver at its optimal coupling
    (G_s = 1, kappa_m = 2 kappa_l), both at the same ``eta``.  Cells whose
    integral fails are set to NaN and recorded in ``failures``.
    """
    gs_axis = np.asarray(gs_axis, dtype=float)
    coupling_axis = np.asarray(coupling_axis, dtype=float)
    if gs_axis.size == 0 or coupling_axis.size == 0:
        raise ValueError("grid axes must be non-empty")
    if np.any(np.diff(gs_axis) <= 0) or np.any(np.diff(coupling_axis) <= 0):
        raise ValueError("grid axes must be strictly ascending")
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    cfg = cfg or ScanConfig()

    lam = math.sqrt(eta)
    reference = visibility_squared_integral(
        base_params.replace(kappa_m=2.0 * base_params.kappa_l, G_s=1.0,
                            lambda_t=lam), cfg)

    values = np.full((gs_axis.size, coupling_axis.size), np.nan)
    failures = []
    for i, gs in enumerate(gs_axis):
        for j, ratio in enumerate(coupling_axis):
            p = base_params.replace(kappa_m=ratio * base_params.kappa_l,
                                    G_s=float(gs), lambda_t=lam)
            try:
                values[i, j] = visibility_squared_integral(p, cfg) / reference
            except NumericalError as err:
                failures.append((float(gs), float(ratio), str(err)))
    return EnhancementGrid(gs_axis=gs_axis, coupling_axis=coupling_axis,
                           values=values, eta=eta, failures=failures)


def quadrature_equivalence(tau: float, delta_a: float, alpha_2q: float):
    """Integrated SNR of single- and double-quadrature schemes for the same signal.

    The single-quadrature scheme doubles the density ratio (no added-noise
    quantum limit) but halves the independent samples per unit bandwidth and
    doubles the noise bandwidth through image folding; the schemes tie.
    Returns (snr_1q, snr_2q).
    """
    if tau < 0 or delta_a <= 0 or alpha_2q < 0:
        raise ValueError("tau and alpha_2q must be >= 0 and delta_a > 0")
    bw_2q = delta_a
    snr_2q = math.sqrt(2.0 * tau * bw_2q / 2.0) * (delta_a / bw_2q) * alpha_2q
    bw_1q = 2.0 * delta_a
    alpha_1q = 2.0 * alpha_2q
    snr_1q = math.sqrt(tau * bw_1q / 2.0) * (delta_a / bw_1q) * alpha_1q
    return snr_1q, snr_2q


def compare_configs(squeezed: NetworkParams, unsqueezed: NetworkParams,
                    cfg: ScanConfig | None = None) -> float:
    """Scan-rate ratio of two receiver configurations (first over second)."""
    cfg = cfg or ScanConfig()
    return (visibility_squared_integral(squeezed, cfg)
            / visibility_squared_integral(unsqueezed, cfg))
