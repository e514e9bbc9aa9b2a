"""Synthetic single-quadrature power spectra of the receiver output.

Spectra are generated directly in the frequency domain: each folded IF bin
is the average of ``subspectra`` unit-mean exponential periodogram bins, i.e.
a Gamma(M, mean/M) draw around the analytic mean profile.  The mean profile
folds the two rf sidebands that a homodyne measurement cannot distinguish
(bin f holds the density at both +f and -f detuning) plus a flat receiver
added-noise term.

A weak "faxion" tone with a Lorentzian line is injected through the cavity's
signal port.  Its frequency starts at a random point near cavity resonance
and steps downward by a fixed amount per spectrum, wrapping around a tuning
window that the whole walk tiles exactly once; shifting spectrum i upward by
i steps (modulo the window) therefore aligns every appearance of the tone at
its initial frequency, which is how a tuning cavity would accumulate a real
signal.  The tone only rides on one rf sideband, so folding dilutes its
contrast relative to the noise, exactly as in hardware.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .network import NetworkParams, measured_noise_density, signal_transfer

__all__ = [
    "SynthConfig", "FaxionConfig", "FaxionTruth", "RawSpectrumSet",
    "VisibilityProfile", "substream", "mean_power_profile",
    "faxion_source_amplitude", "faxion_excess", "synthesize_raw",
    "synthesize_run", "visibility_profile", "write_run", "read_run",
]

_MAX_SEED = 2**64

# Runs bigger than this many values go to the flat binary format by default;
# CSV at that size is slow to write and read back.
_CSV_VALUE_LIMIT = 2_000_000


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent, reproducible generator for a (seed, index...) path."""
    if not 0 <= int(seed) < _MAX_SEED:
        raise ConfigurationError(f"seed must be an unsigned 64-bit int, got {seed}")
    entropy = [int(seed)] + [int(p) for p in path]
    if any(p < 0 for p in entropy):
        raise ConfigurationError("substream path components must be non-negative")
    return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass(frozen=True)
class FaxionConfig:
    """Injected tone settings.

    ``power_fraction`` sets the tone's spectral density at the cavity output
    with the tone on resonance, as a fraction of the unsqueezed vacuum level
    of the folded measurement (two quadrature-vacuum halves).  Zero disables
    the tone.  ``source_amplitude`` pins the source strength directly (same
    units as the signal-port input density); campaigns freeze it from one
    configuration so that squeezed and unsqueezed runs see the same source.
    """

    power_fraction: float = 0.01
    linewidth: float = 9e3          # Lorentzian FWHM, Hz
    start_window: float = 2e6       # width of the initial-frequency window, Hz
    step: float = -10e3             # frequency step per spectrum, Hz
    lineshape: str = "lorentzian"
    source_amplitude: float | None = None

    def __post_init__(self):
        if self.power_fraction < 0:
            raise ConfigurationError("power_fraction must be >= 0")
        if self.linewidth <= 0:
            raise ConfigurationError("linewidth must be positive")
        if self.start_window <= 0:
            raise ConfigurationError("start_window must be positive")
        if self.step == 0:
            raise ConfigurationError("step must be non-zero")
        if self.lineshape != "lorentzian":
            raise ConfigurationError(f"unsupported lineshape {self.lineshape!r}")


@dataclass(frozen=True)
class SynthConfig:
    """Acquisition geometry and statistics for one simulated run."""

    bin_width: float = 100.0        # Hz
    if_band: float = 1.9e6          # analysis band upper edge, Hz
    subspectra: int = 32            # periodograms averaged per raw spectrum
    n_spectra: int = 401            # tuning steps per run
    faxion: FaxionConfig = field(default_factory=FaxionConfig)
    hemt_noise: float = 0.01        # receiver added noise, fraction of amplified vacuum
    seed: int = 0

    def __post_init__(self):
        if self.bin_width <= 0 or self.if_band <= 0:
            raise ConfigurationError("bin_width and if_band must be positive")
        ratio = self.if_band / self.bin_width
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigurationError("if_band must be divisible by bin_width")
        if self.subspectra < 1:
            raise ConfigurationError("subspectra must be >= 1")
        if self.n_spectra < 1:
            raise ConfigurationError("n_spectra must be >= 1")
        if self.hemt_noise < 0:
            raise ConfigurationError("hemt_noise must be >= 0")
        if not 0 <= self.seed < _MAX_SEED:
            raise ConfigurationError("seed must be an unsigned 64-bit int")
        step_bins = abs(self.faxion.step) / self.bin_width
        if abs(step_bins - round(step_bins)) > 1e-9:
            raise ConfigurationError("faxion step must be a multiple of bin_width")
        if self.faxion.linewidth <= self.bin_width:
            raise ConfigurationError("faxion linewidth must exceed bin_width")

    @property
    def n_bins(self) -> int:
        """Folded IF bins, 0 .. if_band inclusive."""
        return int(round(self.if_band / self.bin_width)) + 1

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.n_bins) * self.bin_width

    @property
    def walk_window(self) -> float:
        """Width of the tuning window the faxion walk tiles, Hz."""
        return self.n_spectra * abs(self.faxion.step)

    def validate_walk(self):
        """Geometry checks that only matter when a faxion walk is simulated."""
        if self.walk_window < 2.0 * self.if_band:
            raise ConfigurationError(
                f"walk window {self.walk_window:g} Hz is narrower than the "
                f"two-sided measurement band {2 * self.if_band:g} Hz; "
                "increase n_spectra or the step size")
        if self.faxion.start_window > self.walk_window:
            raise ConfigurationError(
                "faxion start window exceeds the tuning walk window")
        if self.faxion.start_window / 2.0 > self.if_band:
            raise ConfigurationError(
                "faxion start window extends beyond the measurement band; "
                "initial frequencies would be unmeasurable")


@dataclass(frozen=True)
class FaxionTruth:
    """What was actually injected into one run."""

    start: float                  # initial frequency, Hz from cavity resonance
    frequencies: np.ndarray       # per-spectrum tone frequency, Hz (wrapped)
    source_amplitude: float       # signal-port source density at line center
    seed: int
    run_index: int


@dataclass
class RawSpectrumSet:
    """One simulated acquisition run."""

    spectra: np.ndarray           # (n_spectra, n_bins) folded powers, photons
    truth: FaxionTruth | None
    params: NetworkParams
    config: SynthConfig
    noise_profile: np.ndarray     # per-bin expected mean power, no faxion


@dataclass
class VisibilityProfile:
    """Relative per-bin sensitivity to a signal-port tone, receiver noise included.

    Tabulated over the two-sided frequency grid of a symmetrized spectrum and
    normalized to unit maximum.  Dividing a processed spectrum by these values
    makes the expected tone excess independent of detuning.
    """

    frequencies: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ValueError("visibility profile must be non-negative")


def _wrap(freq, window: float):
    """Wrap frequencies into [-window/2, window/2)."""
    half = window / 2.0
    return (np.asarray(freq) + half) % window - half


def _noise_params(params: NetworkParams) -> NetworkParams:
    # the generator is silent except for the injected tone; only the
    # signal-port vacuum stays in the noise floor
    return replace(params, n_A=0.0)


def _unit_lorentzian(offset, fwhm: float):
    half = fwhm / 2.0
    off = np.asarray(offset, dtype=float)
    return half * half / (off * off + half * half)


def _faxion_enabled(cfg: SynthConfig) -> bool:
    if cfg.faxion.source_amplitude is not None:
        return cfg.faxion.source_amplitude > 0
    return cfg.faxion.power_fraction > 0


def faxion_source_amplitude(params: NetworkParams, cfg: SynthConfig) -> float:
    """Source spectral density at the line center for the configured fraction.

    Operational definition: with the tone at cavity resonance, its measured
    excess at the receiver output equals ``power_fraction`` of the measured
    unsqueezed-vacuum output level (the folded two-sideband vacuum,
    2 (n_T + 1/2) referred through the amplifier), which is the level raw
    spectra are normalized to on the analyzer.
    """
    if cfg.faxion.source_amplitude is not None:
        return cfg.faxion.source_amplitude
    if params.kappa_a <= 0:
        raise ConfigurationError("faxion injection needs kappa_a > 0")
    if params.lambda_t <= 0:
        raise ConfigurationError("faxion injection needs lambda_t > 0")
    b0 = (params.kappa_m + params.kappa_l) ** 2 / 4.0
    reference = 2.0 * (params.n_T + 0.5)
    return (cfg.faxion.power_fraction * reference * b0
            / (params.lambda_t * params.kappa_a * params.kappa_m))


def faxion_excess(params: NetworkParams, cfg: SynthConfig,
                  faxion_freq: float) -> np.ndarray:
    """Folded per-bin mean excess from a tone at ``faxion_freq`` (Hz, signed)."""
    if not math.isfinite(faxion_freq):
        raise ConfigurationError("faxion frequency must be finite")
    if abs(faxion_freq) > cfg.walk_window / 2.0 + abs(cfg.faxion.step):
        raise ConfigurationError(
            f"faxion frequency {faxion_freq:g} Hz lies outside the simulated "
            f"rf band (half-window {cfg.walk_window / 2:g} Hz)")
    amp = faxion_source_amplitude(params, cfg)
    f = cfg.frequencies
    transfer = signal_transfer(params, 2.0 * math.pi * f)
    line = (_unit_lorentzian(f - faxion_freq, cfg.faxion.linewidth)
            + _unit_lorentzian(f + faxion_freq, cfg.faxion.linewidth))
    return amp * transfer * line


def mean_power_profile(params: NetworkParams, cfg: SynthConfig,
                       faxion_freq: float | None = None) -> np.ndarray:
    """Expected folded power per IF bin, in photons.

    Both rf sidebands fold onto each IF bin, and a flat receiver added-noise
    term rides on top.  A faxion adds its Lorentzian excess through the
    cavity's signal-path transfer on whichever sideband carries it.
    """
    noise = _noise_params(params)
    f = cfg.frequencies
    per_side = measured_noise_density(noise, 2.0 * math.pi * f)
    profile = 2.0 * per_side + 2.0 * cfg.hemt_noise * params.G_a * (params.n_T + 0.5)
    if faxion_freq is not None and _faxion_enabled(cfg):
        profile = profile + faxion_excess(params, cfg, faxion_freq)
    return profile


def synthesize_raw(means: np.ndarray, subspectra: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Draw one raw spectrum: per-bin average of M exponential periodogram bins."""
    means = np.asarray(means, dtype=float)
    if np.any(means <= 0):
        raise ValueError("per-bin means must be positive")
    return rng.gamma(shape=float(subspectra), scale=means / subspectra)


def synthesize_run(params: NetworkParams, cfg: SynthConfig,
                   seed: int | None = None, run_index: int = 0,
                   faxion_start: float | None = None) -> RawSpectrumSet:
    """Simulate one full acquisition run (one tuning walk).

    Each spectrum uses an independent substream of (seed, run_index, spectrum
    index), so results do not depend on generation order.  ``faxion_start``
    overrides the random initial frequency; campaigns use this to inject the
    same tone into both receiver configurations.
    """
    if seed is None:
        seed = cfg.seed
    cfg.validate_walk()

    inject = _faxion_enabled(cfg)
    if faxion_start is None:
        start_rng = substream(seed, run_index, 0)
        half = cfg.faxion.start_window / 2.0
        faxion_start = float(start_rng.uniform(-half, half))
    else:
        if abs(faxion_start) > cfg.faxion.start_window / 2.0:
            raise ConfigurationError("faxion_start lies outside start_window")

    steps = faxion_start + np.arange(cfg.n_spectra) * cfg.faxion.step
    positions = _wrap(steps, cfg.walk_window)

    noise_profile = mean_power_profile(params, cfg, None)
    spectra = np.empty((cfg.n_spectra, cfg.n_bins))
    for i in range(cfg.n_spectra):
        means = noise_profile
        if inject:
            means = noise_profile + faxion_excess(params, cfg, positions[i])
        rng = substream(seed, run_index, 1 + i)
        spectra[i] = synthesize_raw(means, cfg.subspectra, rng)

    truth = None
    if inject:
        truth = FaxionTruth(start=faxion_start, frequencies=positions,
                            source_amplitude=faxion_source_amplitude(params, cfg),
                            seed=int(seed), run_index=int(run_index))
    return RawSpectrumSet(spectra=spectra, truth=truth, params=params,
                          config=cfg, noise_profile=noise_profile)


def visibility_profile(params: NetworkParams, cfg: SynthConfig) -> VisibilityProfile:
    """Relative rescaling profile matched to this synthesis model.

    Ratio of the signal-path transfer to the folded noise floor (receiver
    term included) on the two-sided grid, normalized to unit maximum.
    """
    noise_fold = mean_power_profile(params, cfg, None)
    f = cfg.frequencies
    transfer = signal_transfer(params, 2.0 * math.pi * f)
    one_sided = transfer / noise_fold
    values = np.concatenate([one_sided[:0:-1], one_sided])
    freqs = np.concatenate([-f[:0:-1], f])
    return VisibilityProfile(frequencies=freqs, values=values / values.max())


# ---------------------------------------------------------------------------
# run-directory persistence

def _truth_to_json(truth: FaxionTruth | None) -> dict | None:
    if truth is None:
        return None
    return {
        "start": truth.start,
        "frequencies": truth.frequencies.tolist(),
        "source_amplitude": truth.source_amplitude,
        "seed": truth.seed,
        "run_index": truth.run_index,
    }


def write_run(run: RawSpectrumSet, path, fmt: str = "auto") -> Path:
    """Persist a run directory: config.json, truth.json and the raw spectra.

    ``fmt`` is "csv", "f64" (flat column-major float64 with a JSON header
    sidecar) or "auto", which picks f64 for large runs.
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    if fmt == "auto":
        fmt = "f64" if run.spectra.size > _CSV_VALUE_LIMIT else "csv"
    if fmt not in ("csv", "f64"):
        raise ConfigurationError(f"unknown raw format {fmt!r}")

    config = {"network": asdict(run.params), "synth": asdict(run.config)}
    (path / "config.json").write_text(json.dumps(config, indent=2, sort_keys=True))
    (path / "truth.json").write_text(
        json.dumps(_truth_to_json(run.truth), indent=2))

    if fmt == "csv":
        np.savetxt(path / "raw.csv", run.spectra, delimiter=",")
    else:
        run.spectra.astype("<f8").T.tofile(path / "raw.f64")
        header = {"dtype": "<f8", "order": "F",
                  "n_spectra": run.spectra.shape[0],
                  "n_bins": run.spectra.shape[1]}
        (path / "raw.f64.json").write_text(json.dumps(header, indent=2))
    return path


def read_run(path) -> RawSpectrumSet:
    """Load a run directory written by :func:`write_run`."""
    path = Path(path)
    config = json.loads((path / "config.json").read_text())
    synth_cfg = config["synth"]
    synth_cfg["faxion"] = FaxionConfig(**synth_cfg["faxion"])
    cfg = SynthConfig(**synth_cfg)
    params = NetworkParams(**config["network"])

    if (path / "raw.csv").exists():
        spectra = np.loadtxt(path / "raw.csv", delimiter=",", ndmin=2)
    elif (path / "raw.f64").exists():
        header = json.loads((path / "raw.f64.json").read_text())
        spectra = np.fromfile(path / "raw.f64", dtype=header["dtype"])
        spectra = spectra.reshape(header["n_bins"], header["n_spectra"]).T
    else:
        raise ConfigurationError(f"no raw spectra found under {path}")

    truth_raw = json.loads((path / "truth.json").read_text())
    truth = None
    if truth_raw is not None:
        truth = FaxionTruth(start=truth_raw["start"],
                            frequencies=np.asarray(truth_raw["frequencies"]),
                            source_amplitude=truth_raw["source_amplitude"],
                            seed=truth_raw["seed"],
                            run_index=truth_raw["run_index"])
    noise_profile = mean_power_profile(params, cfg, None)
    return RawSpectrumSet(spectra=spectra, truth=truth, params=params,
                          config=cfg, noise_profile=noise_profile)
