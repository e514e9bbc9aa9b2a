"""Quadrature-basis input-output model of the squeezed-state receiver.

The receiver chain is squeezer -> transmission loss -> cavity -> transmission
loss -> amplifier, with the cavity exchanging energy through three ports
(measurement, internal loss, weakly coupled signal).  Everything here works on
the amplified quadrature only and in the cavity rotating frame: frequencies
are detunings from cavity resonance in rad/s.

Port ordering is fixed as (measurement, loss, signal) in every matrix.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PORT_MEASUREMENT",
    "PORT_LOSS",
    "PORT_SIGNAL",
    "NetworkParams",
    "susceptibility",
    "stage_matrices",
    "input_density",
    "cavity_input_density",
    "output_density",
    "measured_noise_density",
    "signal_transfer",
    "visibility",
    "expected_squeezing_db",
    "db_to_linear",
    "linear_to_db",
]

PORT_MEASUREMENT = 0
PORT_LOSS = 1
PORT_SIGNAL = 2

# Ratio of signal-port coupling to the fast rates above which the
# narrow-coupling approximation used by the closed forms becomes questionable.
_SIGNAL_COUPLING_RATIO_WARN = 1e-2


def db_to_linear(value_db: float) -> float:
    """Convert a power ratio in dB to linear."""
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    """Convert a linear power ratio to dB."""
    if value <= 0:
        raise ValueError(f"power ratio must be positive, got {value}")
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class NetworkParams:
    """Rates, gains, occupancies and efficiencies of the receiver network.

    All rates are angular (rad/s).  ``lambda_t`` is the single-sided power
    transmission efficiency between the squeezer and the cavity, taken equal
    on the cavity-to-amplifier side, so the round-trip efficiency is
    ``eta = lambda_t**2``.
    """

    kappa_m: float          # measurement-port coupling
    kappa_l: float          # internal loss rate
    kappa_a: float          # signal-port coupling
    omega_c: float          # cavity resonance (bookkeeping only)
    n_T: float = 0.0        # thermal occupancy at measurement and loss ports
    n_A: float = 0.0        # occupancy of the fictitious signal generator
    G_s: float = 1.0        # squeezer single-quadrature power gain
    G_a: float = 1.0        # output amplifier single-quadrature power gain
    lambda_t: float = 1.0   # single-sided power transmission efficiency

    def __post_init__(self):
        if not (self.kappa_m > 0 and self.kappa_l > 0):
            raise ValueError("kappa_m and kappa_l must be positive")
        if self.kappa_a < 0:
            raise ValueError("kappa_a must be non-negative")
        if self.omega_c < 0:
            raise ValueError("omega_c must be non-negative")
        if self.n_T < 0 or self.n_A < 0:
            raise ValueError("occupancies must be non-negative")
        if self.G_s < 1.0 or self.G_a < 1.0:
            raise ValueError("G_s and G_a are power gains and must be >= 1")
        if not 0.0 <= self.lambda_t <= 1.0:
            raise ValueError("lambda_t must lie in [0, 1]")
        ratio = self.kappa_a / min(self.kappa_m, self.kappa_l)
        if ratio > _SIGNAL_COUPLING_RATIO_WARN:
            warnings.warn(
                f"kappa_a / min(kappa_m, kappa_l) = {ratio:.3g} exceeds "
                f"{_SIGNAL_COUPLING_RATIO_WARN:g}; the weak-signal-coupling "
                "regime assumed by the closed forms is violated",
                stacklevel=3,
            )

    @property
    def kappa_total(self) -> float:
        """Total cavity decay rate (all three ports)."""
        return self.kappa_m + self.kappa_l + self.kappa_a

    @property
    def eta(self) -> float:
        """Round-trip squeezer-to-amplifier power transmission efficiency."""
        return self.lambda_t**2

    def replace(self, **changes) -> "NetworkParams":
        from dataclasses import replace as _replace

        return _replace(self, **changes)


def _coupling_vector(params: NetworkParams) -> np.ndarray:
    return np.array([params.kappa_m, params.kappa_l, params.kappa_a])


def susceptibility(params: NetworkParams, omega: float,
                   drop_signal_rate_from_total: bool = False) -> np.ndarray:
    """3x3 complex cavity susceptibility at detuning ``omega``.

    chi_jk = [-sqrt(kappa_j kappa_k) + (kappa_T/2 + i omega) delta_jk]
             / (kappa_T/2 + i omega)

    With ``drop_signal_rate_from_total`` the signal coupling is removed from
    the total decay rate (but kept in the couplings), which is the
    approximation the closed-form expressions are built on.  The default is
    the exact unitary scattering matrix of the three-port cavity.
    """
    if not np.isfinite(omega):
        raise ValueError(f"omega must be finite, got {omega}")
    kappas = _coupling_vector(params)
    kappa_tot = params.kappa_m + params.kappa_l
    if not drop_signal_rate_from_total:
        kappa_tot += params.kappa_a
    denom = kappa_tot / 2.0 + 1j * omega
    root = np.sqrt(kappas)
    return np.eye(3, dtype=complex) - np.outer(root, root) / denom


def stage_matrices(params: NetworkParams):
    """Diagonal stage matrices (squeezer, loss, amplifier) plus the additive
    noise matrix injected by the untracked loss mode.

    Only the measurement-port mode passes through the squeezer and the lossy
    lines; the loss- and signal-port modes are untouched.
    """
    S_X = np.diag([1.0 / math.sqrt(params.G_s), 1.0, 1.0])
    L_X = np.diag([math.sqrt(params.lambda_t), 1.0, 1.0])
    A_X = np.diag([math.sqrt(params.G_a), 1.0, 1.0])
    N_X = np.zeros((3, 3))
    N_X[PORT_MEASUREMENT, PORT_MEASUREMENT] = (
        (params.n_T + 0.5) * (1.0 - params.lambda_t)
    )
    return S_X, L_X, A_X, N_X


def input_density(params: NetworkParams) -> np.ndarray:
    """Single-quadrature input spectral density (photons) at the three ports."""
    return np.diag([params.n_T + 0.5, params.n_T + 0.5, params.n_A + 0.5])


def cavity_input_density(params: NetworkParams) -> np.ndarray:
    """Density just before the cavity: squeezed, attenuated, plus loss-mode vacuum."""
    S_X, L_X, _, N_X = stage_matrices(params)
    ls = L_X @ S_X
    return ls @ input_density(params) @ ls.T + N_X


def output_density(params: NetworkParams, omega: float,
                   drop_signal_rate_from_total: bool = False) -> np.ndarray:
    """Single-quadrature output spectral density matrix at detuning ``omega``.

    Cascades squeezer, input-side loss, cavity scattering, output-side loss
    and amplifier.  Returned as a real symmetric matrix in photon units; the
    imaginary (reactive) parts of the off-diagonal correlations carry no
    single-quadrature power and are discarded.
    """
    chi = susceptibility(params, omega, drop_signal_rate_from_total)
    _, L_X, A_X, N_X = stage_matrices(params)
    sigma_i = cavity_input_density(params)
    sigma_o = chi.conj() @ sigma_i @ chi.T
    sigma_out = A_X @ (L_X @ sigma_o @ L_X.T + N_X) @ A_X.T
    return sigma_out.real


def _lorentzian_factors(params: NetworkParams, omega: float):
    big = (params.kappa_m + params.kappa_l) ** 2 / 4.0 + omega * omega
    small = (params.kappa_m - params.kappa_l) ** 2 / 4.0 + omega * omega
    return big, small


def measured_noise_density(params: NetworkParams, omega: float,
                           include_signal_port: bool = True) -> float:
    """Closed-form measurement-port output density (photons) at detuning ``omega``.

    Valid for kappa_a much smaller than the other rates.  With
    ``include_signal_port`` false the signal generator and its vacuum are
    omitted, which is the pure receiver-noise floor.
    """
    big, small = _lorentzian_factors(params, omega)
    lam = params.lambda_t
    vac = params.n_T + 0.5
    noise = vac * (
        params.kappa_l * params.kappa_m
        + (1.0 - lam + lam / params.G_s) * small
    )
    if include_signal_port:
        noise = noise + (params.n_A + 0.5) * params.kappa_a * params.kappa_m
    return params.G_a * (vac * (1.0 - lam) + lam * noise / big)


def signal_transfer(params: NetworkParams, omega: float) -> float:
    """Transfer of signal-port input density to the measured output.

    A source density ``s`` entering the signal port appears at the amplifier
    output as ``s * signal_transfer``.  Loss between the squeezer and the
    cavity does not touch the signal path; the cavity-to-amplifier side does.
    """
    big, _ = _lorentzian_factors(params, omega)
    return params.G_a * params.lambda_t * params.kappa_a * params.kappa_m / big


def visibility(params: NetworkParams, omega: float) -> float:
    """Signal visibility: signal over noise spectral density at the output.

    Closed form in the weak-signal-coupling, classical-generator regime.
    Reduces to the lossless expression at lambda_t = 1 and is even in omega.
    """
    if params.n_A <= 0:
        raise ValueError("visibility needs a driven signal port (n_A > 0)")
    big, small = _lorentzian_factors(params, omega)
    lam = params.lambda_t
    denom = (params.n_T + 0.5) * (
        big * (1.0 - lam)
        + lam * (
            params.kappa_l * params.kappa_m
            + (1.0 - lam + lam / params.G_s) * small
        )
    )
    return lam * params.n_A * params.kappa_a * params.kappa_m / denom


def expected_squeezing_db(eta: float, gain: float) -> float:
    """Squeezer-on over squeezer-off output noise ratio, in dB, far off resonance.

    A squeezed quadrature transmitted with round-trip efficiency ``eta``
    retains ``eta/gain`` of the vacuum variance and picks up ``1 - eta`` of
    unsqueezed vacuum.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if gain < 1.0:
        raise ValueError(f"gain must be >= 1, got {gain}")
    return 10.0 * math.log10(eta / gain + 1.0 - eta)
