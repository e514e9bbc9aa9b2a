"""Mapping of physical axion/haloscope parameters onto the receiver model.

The axion field is represented by a fictitious microwave generator of
occupancy n_A coupled to the cavity at rate kappa_a.  Two independent power
arguments fix both numbers: equating the generator-model output power with
the standard haloscope conversion power gives the product n_A * kappa_a,
and representing the local axion field as a huge-occupancy oscillator mode
exchanging energy with the cavity gives their ratio through the total
occupancy N_A.

Internally everything is SI; domain units (GeV/cm^3, eV^-1, liters) are
converted at the boundary only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NumericalError
from .network import NetworkParams

__all__ = [
    "HBAR", "C_LIGHT", "MU0", "E_CHARGE", "K_BOLTZMANN",
    "HaloscopePhysical", "ModelParams", "ClassicalLimitReport",
    "gev_per_cm3_to_si", "si_to_gev_per_cm3",
    "per_ev_to_si", "si_to_per_ev", "liters_to_si", "si_to_liters",
    "model_params", "signal_power", "signal_power_exchange_model",
    "validate_classical_limit",
]

# CODATA 2018, 12 significant digits
HBAR = 1.05457181765e-34        # J s
C_LIGHT = 299792458.0           # m / s (exact)
MU0 = 1.25663706212e-6          # N / A^2
E_CHARGE = 1.602176634e-19      # C (exact)
K_BOLTZMANN = 1.380649e-23      # J / K (exact)

_GEV_PER_CM3 = E_CHARGE * 1e15  # J / m^3 per GeV / cm^3


def gev_per_cm3_to_si(value: float) -> float:
    """Energy density, GeV/cm^3 to J/m^3."""
    return value * _GEV_PER_CM3


def si_to_gev_per_cm3(value: float) -> float:
    return value / _GEV_PER_CM3


def per_ev_to_si(value: float) -> float:
    """Inverse energy, eV^-1 to J^-1."""
    return value / E_CHARGE


def si_to_per_ev(value: float) -> float:
    return value * E_CHARGE


def liters_to_si(value: float) -> float:
    return value * 1e-3


def si_to_liters(value: float) -> float:
    return value * 1e3


@dataclass(frozen=True)
class HaloscopePhysical:
    """Physical search parameters in the units usual for haloscopes."""

    rho_a: float      # local dark-matter energy density, GeV/cm^3
    B0: float         # static magnetic field, tesla
    g_agg: float      # axion-photon coupling, eV^-1 (sign irrelevant)
    delta_a: float    # signal linewidth, Hz
    omega_a: float    # signal angular frequency, rad/s
    V: float          # cavity volume, liters
    C_mnl: float      # cavity form factor

    def __post_init__(self):
        if self.rho_a <= 0 or self.B0 <= 0 or self.delta_a <= 0 \
                or self.omega_a <= 0 or self.V <= 0:
            raise ValueError("rho_a, B0, delta_a, omega_a and V must be positive")
        if self.g_agg == 0:
            raise ValueError("g_agg must be non-zero")
        if not 0.0 < self.C_mnl <= 1.0:
            raise ValueError("C_mnl must lie in (0, 1]")


@dataclass(frozen=True)
class ModelParams:
    """Fictitious-generator parameters equivalent to a physical search."""

    n_A: float        # generator occupancy (photons per second per hertz)
    kappa_a: float    # signal-port coupling, rad/s
    N_A: float        # total occupancy of the local axion field


def model_params(phys: HaloscopePhysical) -> ModelParams:
    """Convert physical search parameters to generator model parameters."""
    rho = gev_per_cm3_to_si(phys.rho_a)
    g = abs(per_ev_to_si(phys.g_agg))
    vol = liters_to_si(phys.V)

    n_a = (g * rho * phys.B0 * vol / (4.0 * phys.omega_a * phys.delta_a)
           * math.sqrt(phys.C_mnl * C_LIGHT**3 / (HBAR * MU0)))
    kappa_a = g * phys.B0 * math.sqrt(phys.C_mnl * HBAR * C_LIGHT**3 / MU0)
    cap_n_a = vol * rho / (HBAR * phys.omega_a)
    if not (math.isfinite(n_a) and math.isfinite(kappa_a) and math.isfinite(cap_n_a)):
        raise NumericalError("unit conversion overflowed to a non-finite value")

    # both power arguments must be satisfied simultaneously
    product = (g * g * rho * C_LIGHT**3 * phys.B0**2 * phys.C_mnl * vol
               / (4.0 * phys.omega_a * MU0 * phys.delta_a))
    if abs(n_a * kappa_a / product - 1.0) > 1e-10:
        raise NumericalError("generator power consistency check failed")
    if abs((n_a / kappa_a) / (cap_n_a / (4.0 * phys.delta_a)) - 1.0) > 1e-10:
        raise NumericalError("occupancy-exchange consistency check failed")

    return ModelParams(n_A=n_a, kappa_a=kappa_a, N_A=cap_n_a)


def signal_power(params: NetworkParams, delta_a: float, omega_a: float) -> float:
    """On-resonance signal power (W) leaving the measurement port."""
    if delta_a <= 0 or omega_a <= 0:
        raise ValueError("delta_a and omega_a must be positive")
    coupling = params.kappa_a * params.kappa_m / (params.kappa_m + params.kappa_l) ** 2
    return 4.0 * HBAR * omega_a * params.n_A * delta_a * coupling


def signal_power_exchange_model(N_A: float, kappa_a: float, kappa_m: float,
                                kappa_l: float, omega_a: float) -> float:
    """Steady-state output power of the two-oscillator exchange picture."""
    return HBAR * omega_a * N_A * kappa_a**2 * kappa_m / (kappa_m + kappa_l) ** 2


@dataclass(frozen=True)
class ClassicalLimitReport:
    """Ratios for the classical, narrowband, weak-drive conditions.

    Each ratio compares the small quantity to the large one, so the condition
    holds when the ratio is below 1.  ``warn`` marks ratios within two
    decades of violation.
    """

    classical_ratio: float      # 1 / n_A
    narrowband_ratio: float     # delta_a / min(kappa_l, kappa_m) (both in Hz)
    weak_drive_ratio: float     # n_A kappa_a / kappa_l

    _WARN_FACTOR = 1e-2

    def _status(self, ratio: float) -> str:
        if ratio >= 1.0:
            return "violated"
        if ratio >= self._WARN_FACTOR:
            return "warn"
        return "ok"

    @property
    def classical(self) -> str:
        return self._status(self.classical_ratio)

    @property
    def narrowband(self) -> str:
        return self._status(self.narrowband_ratio)

    @property
    def weak_drive(self) -> str:
        return self._status(self.weak_drive_ratio)

    @property
    def passed(self) -> bool:
        return all(s != "violated"
                   for s in (self.classical, self.narrowband, self.weak_drive))

    def as_dict(self) -> dict:
        return {
            "classical": {"ratio": self.classical_ratio, "status": self.classical},
            "narrowband": {"ratio": self.narrowband_ratio, "status": self.narrowband},
            "weak_drive": {"ratio": self.weak_drive_ratio, "status": self.weak_drive},
            "passed": self.passed,
        }


def validate_classical_limit(params: NetworkParams,
                             delta_a: float) -> ClassicalLimitReport:
    """Check that the generator acts as a weak classical narrowband drive."""
    two_pi = 2.0 * math.pi
    classical = math.inf if params.n_A == 0 else 1.0 / params.n_A
    narrowband = delta_a / (min(params.kappa_l, params.kappa_m) / two_pi)
    weak = params.n_A * params.kappa_a / params.kappa_l
    return ClassicalLimitReport(classical_ratio=classical,
                                narrowband_ratio=narrowband,
                                weak_drive_ratio=weak)
