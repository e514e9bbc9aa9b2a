"""Processing chain from raw folded spectra to the grand spectrum.

Stages, in order: symmetrize each folded spectrum about zero detuning,
remove the common spectral shape with a polynomial moving-average baseline
fitted to the run-averaged spectrum (recomputed after cutting contaminated
bins), flatten per-spectrum gain structure with a second low-order fit,
rescale by the receiver's relative visibility so a fixed signal-port tone
has detuning-independent expectation, align the fictitious tunings and
combine all spectra by inverse-variance weighting, rebin to the signal
scale, and slide a lineshape-weighted maximum-likelihood estimator across
the result.  Per-bin variances are propagated analytically from the
averaged-periodogram statistics of the synthesis model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from numpy.polynomial import legendre
from scipy.signal import fftconvolve

from .errors import (ConfigurationError, InsufficientDataError,
                     NumericalError)
from .synth import RawSpectrumSet, VisibilityProfile, _unit_lorentzian

__all__ = [
    "PipelineConfig", "RejectionReport", "ProcessedSpectra",
    "RescaledSpectra", "CombinedSpectrum", "RebinnedSpectrum",
    "GrandSpectrum", "PipelineResult", "sg_filter", "symmetrize",
    "fold", "reject_bins", "process", "rescale", "combine", "rebin",
    "grand", "measure_faxion", "run_pipeline", "lineshape_template",
]

_MAD_TO_SIGMA = 1.4826022185056018


@dataclass(frozen=True)
class PipelineConfig:
    """Tunables of the processing chain."""

    sg1_degree: int = 10
    sg1_halfwidth: int = 500
    sg2_degree: int = 4
    sg2_halfwidth: int = 500
    reject_sigma: float = 4.0
    reject_neighbors: int = 5
    rebin_factor: int = 10          # folded bins per rebinned bin
    grand_window: int = 41          # rebinned bins per matched-filter window
    tuning_shift: float = 10e3      # fictitious tuning step per spectrum, Hz
    signal_linewidth: float = 9e3   # template FWHM, Hz
    lineshape_weights: tuple | None = None   # overrides the template

    def __post_init__(self):
        if self.sg1_halfwidth <= self.sg1_degree or self.sg2_halfwidth <= self.sg2_degree:
            raise ConfigurationError("SG half-width must exceed the degree")
        if self.sg1_degree < 0 or self.sg2_degree < 0:
            raise ConfigurationError("SG degrees must be non-negative")
        if self.reject_sigma <= 0 or self.reject_neighbors < 0:
            raise ConfigurationError("bad rejection settings")
        if self.rebin_factor < 1:
            raise ConfigurationError("rebin_factor must be >= 1")
        if self.grand_window < 1 or self.grand_window % 2 == 0:
            raise ConfigurationError("grand_window must be odd and positive")
        if self.tuning_shift <= 0:
            raise ConfigurationError("tuning_shift must be positive")
        if self.signal_linewidth <= 0:
            raise ConfigurationError("signal_linewidth must be positive")
        if self.lineshape_weights is not None:
            w = np.asarray(self.lineshape_weights, float)
            if w.size != self.grand_window or np.any(w < 0) or w.sum() <= 0:
                raise ConfigurationError("lineshape_weights must be grand_window "
                                         "non-negative values with positive sum")


def lineshape_template(cfg: PipelineConfig, bin_width: float) -> np.ndarray:
    """Signal template over one grand window, normalized to unit sum."""
    if cfg.lineshape_weights is not None:
        w = np.asarray(cfg.lineshape_weights, float)
    else:
        half = (cfg.grand_window - 1) // 2
        offsets = (np.arange(cfg.grand_window) - half) * cfg.rebin_factor * bin_width
        w = _unit_lorentzian(offsets, cfg.signal_linewidth)
    return w / w.sum()


# ---------------------------------------------------------------------------
# Savitzky-Golay style polynomial moving average

@lru_cache(maxsize=16)
def _sg_weight_tables(degree: int, halfwidth: int):
    """Center-value fit weights: full-window kernel plus truncated edge rows.

    Legendre basis on positions scaled to [-1, 1] keeps the normal equations
    well conditioned at degree 10.  Edge row i (for output position i from
    the boundary) is padded to length 2*halfwidth with zeros.
    """
    w = halfwidth
    t = np.arange(-w, w + 1) / w
    design = legendre.legvander(t, degree)
    gram = design.T @ design
    h_full = design @ np.linalg.solve(gram, design[w])

    left = np.zeros((w, 2 * w))
    for i in range(w):
        npts = i + w + 1
        ti = (np.arange(npts) - i) / w
        a = legendre.legvander(ti, degree)
        g = a.T @ a
        left[i, :npts] = a @ np.linalg.solve(g, a[i])
    return h_full, left


def _sg_batch(values: np.ndarray, degree: int, halfwidth: int) -> np.ndarray:
    """Apply the moving polynomial fit along the last axis of a 2-D array."""
    h_full, left = _sg_weight_tables(degree, halfwidth)
    w = halfwidth
    n = values.shape[1]
    if n <= 2 * w + 1:
        raise InsufficientDataError(
            f"series of length {n} is shorter than the {2 * w + 1}-bin fit window")
    out = fftconvolve(values, h_full[None, :], mode="same", axes=1)
    out[:, :w] = values[:, :2 * w] @ left.T
    right = values[:, ::-1][:, :2 * w] @ left.T
    out[:, n - w:] = right[:, ::-1]
    return out


def _sg_masked_refit(series: np.ndarray, degree: int, halfwidth: int,
                     mask: np.ndarray, baseline: np.ndarray) -> np.ndarray:
    """Exact weighted refit at positions whose window touches a masked bin."""
    n = series.size
    w = halfwidth
    affected = np.convolve(mask.astype(float), np.ones(2 * w + 1), mode="same") > 0
    out = baseline.copy()
    for p in np.flatnonzero(affected):
        lo, hi = max(0, p - w), min(n, p + w + 1)
        idx = np.arange(lo, hi)
        keep = ~mask[idx]
        if keep.sum() <= degree:
            raise NumericalError(
                f"window at bin {p} has too few unmasked points for the fit")
        t = (idx[keep] - p) / w
        a = legendre.legvander(t, degree)
        coef, *_ = np.linalg.lstsq(a, series[idx[keep]], rcond=None)
        out[p] = legendre.legval(0.0, coef)
    return out


def sg_filter(series: np.ndarray, degree: int, halfwidth: int,
              mask: np.ndarray | None = None) -> np.ndarray:
    """Per-point least-squares polynomial baseline of ``series``.

    Every output point is the degree-``degree`` polynomial fit over the
    points within ``halfwidth`` bins, evaluated at that point.  Windows
    truncate at the series edges; nothing is padded.  ``mask`` marks bins to
    exclude from every fit (the fit is still evaluated there).
    """
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("sg_filter expects a 1-D series")
    if series.size <= degree + 1:
        raise InsufficientDataError(
            f"series of length {series.size} cannot support degree {degree}")
    if series.size <= 2 * halfwidth + 1:
        raise InsufficientDataError(
            f"series of length {series.size} is shorter than the "
            f"{2 * halfwidth + 1}-bin fit window")
    baseline = _sg_batch(series[None, :], degree, halfwidth)[0]
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != series.shape:
            raise ValueError("mask must match the series shape")
        if mask.any():
            baseline = _sg_masked_refit(series, degree, halfwidth, mask, baseline)
    return baseline


# ---------------------------------------------------------------------------
# stages

def symmetrize(raw: np.ndarray) -> np.ndarray:
    """Mirror folded spectra about zero: the density is inferred equally at
    both detunings of each image pair.  Works on 1-D or (n_spectra, n_bins)."""
    raw = np.asarray(raw, dtype=float)
    if raw.ndim == 1:
        return np.concatenate([raw[:0:-1], raw])
    return np.concatenate([raw[:, :0:-1], raw], axis=1)


def fold(symmetric: np.ndarray) -> np.ndarray:
    """Inverse of :func:`symmetrize` (averages the two image sides)."""
    symmetric = np.asarray(symmetric, dtype=float)
    n = (symmetric.shape[-1] + 1) // 2
    pos = symmetric[..., n - 1:]
    neg = symmetric[..., n - 1::-1]
    return 0.5 * (pos + neg)


def two_sided_frequencies(n_bins: int, bin_width: float) -> np.ndarray:
    return (np.arange(2 * n_bins - 1) - (n_bins - 1)) * bin_width


@dataclass
class RejectionReport:
    mask: np.ndarray              # True where the bin is discarded
    retained_fraction: float
    n_offenders: int


def reject_bins(normalized_mean: np.ndarray, cfg: PipelineConfig) -> RejectionReport:
    """Flag bins of the baseline-normalized mean spectrum that sit far above
    the rest, along with their close neighbors.

    The cut is one-sided: a persistent interferer adds power, never removes
    it.  The threshold uses robust location and scale so the offenders do
    not lift their own bar.
    """
    nm = np.asarray(normalized_mean, dtype=float)
    center = np.median(nm)
    scale = _MAD_TO_SIGMA * np.median(np.abs(nm - center))
    if scale <= 0:
        raise NumericalError("mean spectrum has zero spread; cannot set a cut")
    offenders = nm > center + cfg.reject_sigma * scale
    width = 2 * cfg.reject_neighbors + 1
    mask = np.convolve(offenders.astype(float), np.ones(width), mode="same") > 0
    retained = 1.0 - mask.mean()
    if retained < 0.80:
        raise NumericalError(
            f"bin rejection discarded {(1 - retained):.1%} of the band; "
            "the configuration or input data look contaminated")
    return RejectionReport(mask=mask, retained_fraction=float(retained),
                           n_offenders=int(offenders.sum()))


@dataclass
class ProcessedSpectra:
    """Flattened, zero-centered spectra on the two-sided grid."""

    values: np.ndarray            # (n_spectra, 2 n_bins - 1), NaN at masked bins
    mask: np.ndarray              # shared across spectra
    frequencies: np.ndarray
    bin_width: float
    walk_window: float
    tuning_step: float            # faxion step magnitude, Hz
    variance: float               # analytic per-bin variance (1 / subspectra)
    sigma_empirical: float
    baseline: np.ndarray          # first-pass baseline after masking
    rejection: RejectionReport


def process(raw_set: RawSpectrumSet, cfg: PipelineConfig) -> ProcessedSpectra:
    """Baseline-normalize and flatten a raw run.

    Each symmetrized spectrum is divided by the run-mean baseline (a
    high-order fit, recomputed with contaminated bins excluded), then by its
    own low-order profile, and unity is subtracted.  Masked bins are NaN in
    the output; for the per-spectrum profile fit they are replaced by their
    first-pass expectation (exactly one) rather than their discarded values.
    """
    sym = symmetrize(raw_set.spectra)
    n_spec, n_two = sym.shape
    mean_sym = sym.mean(axis=0)

    base0 = sg_filter(mean_sym, cfg.sg1_degree, cfg.sg1_halfwidth)
    if np.any(base0 <= 0):
        raise NumericalError("first-pass baseline is not positive")
    rejection = reject_bins(mean_sym / base0, cfg)

    baseline = sg_filter(mean_sym, cfg.sg1_degree, cfg.sg1_halfwidth,
                         mask=rejection.mask)
    if np.any(baseline <= 0):
        raise NumericalError("masked baseline is not positive")

    # reuse the symmetrized buffer: masked columns are discarded downstream,
    # so they can hold the neutral value the per-spectrum fit wants to see
    processed = sym
    processed /= baseline
    processed[:, rejection.mask] = 1.0
    profiles = _sg_batch(processed, cfg.sg2_degree, cfg.sg2_halfwidth)
    if np.any(profiles <= 0):
        raise NumericalError("per-spectrum gain profile is not positive")
    processed /= profiles
    processed -= 1.0
    del profiles
    processed[:, rejection.mask] = np.nan

    cfg_synth = raw_set.config
    return ProcessedSpectra(
        values=processed,
        mask=rejection.mask,
        frequencies=two_sided_frequencies(cfg_synth.n_bins, cfg_synth.bin_width),
        bin_width=cfg_synth.bin_width,
        walk_window=cfg_synth.walk_window,
        tuning_step=abs(cfg_synth.faxion.step),
        variance=1.0 / cfg_synth.subspectra,
        sigma_empirical=float(np.nanstd(processed)),
        baseline=baseline,
        rejection=rejection,
    )


@dataclass
class RescaledSpectra:
    values: np.ndarray            # (n_spectra, n_two)
    variance: np.ndarray          # per-bin, shared across spectra; inf at dropped bins
    frequencies: np.ndarray
    bin_width: float
    walk_window: float
    tuning_step: float


def rescale(processed: ProcessedSpectra,
            profile: VisibilityProfile) -> RescaledSpectra:
    """Divide by the relative visibility so the expected tone excess is flat.

    Bins where the profile collapses below 1e-6 of its peak are excluded
    rather than divided, as are masked bins; their variance is infinite.
    """
    values = np.asarray(profile.values, dtype=float)
    if values.shape != processed.frequencies.shape:
        raise ConfigurationError("visibility profile does not match the spectrum grid")
    peak = values.max()
    if peak <= 0:
        raise ConfigurationError("visibility profile is identically zero")
    floor = 1e-6 * peak
    usable = (values >= floor) & ~processed.mask

    var = np.full(values.shape, np.inf)
    var[usable] = processed.variance / values[usable] ** 2
    scaled = np.where(usable[None, :], processed.values / np.where(usable, values, 1.0),
                      np.nan)
    return RescaledSpectra(values=scaled, variance=var,
                           frequencies=processed.frequencies,
                           bin_width=processed.bin_width,
                           walk_window=processed.walk_window,
                           tuning_step=processed.tuning_step)


@dataclass
class CombinedSpectrum:
    frequencies: np.ndarray
    values: np.ndarray            # NaN where no contribution
    variance: np.ndarray          # inf where no contribution
    n_contrib: np.ndarray


def combine(rescaled: RescaledSpectra, cfg: PipelineConfig) -> CombinedSpectrum:
    """Shift spectrum i by i tuning steps and take the per-bin inverse-variance
    weighted mean across spectra.

    The shift is cyclic over the tuning walk window, which is what keeps
    every appearance of the stepped tone aligned at its initial frequency;
    the window tiles exactly once per walk.
    """
    shift_bins = cfg.tuning_shift / rescaled.bin_width
    if abs(shift_bins - round(shift_bins)) > 1e-9:
        raise ConfigurationError("tuning_shift must be a multiple of the bin width")
    shift_bins = int(round(shift_bins))
    if abs(cfg.tuning_shift - rescaled.tuning_step) > 1e-6 * cfg.tuning_shift:
        raise ConfigurationError(
            "tuning_shift must match the synthesis step magnitude for the "
            "tone to align across spectra")

    n_spec, L = rescaled.values.shape
    window_bins = int(round(rescaled.walk_window / rescaled.bin_width))
    if window_bins <= 0:
        raise ConfigurationError("empty tuning window")

    w = np.where(np.isfinite(rescaled.variance), 1.0 / rescaled.variance, 0.0)
    y = np.where(w > 0, np.nan_to_num(rescaled.values), 0.0)

    num = np.zeros(window_bins)
    den = np.zeros(window_bins)
    cnt = np.zeros(window_bins, dtype=np.int64)
    half_idx = window_bins // 2
    base = -(L // 2) + half_idx
    wy = w * y
    w_nonzero = (w > 0).astype(np.int64)

    for i in range(n_spec):
        off = (base + i * shift_bins) % window_bins
        if L <= window_bins:
            first = min(L, window_bins - off)
            num[off:off + first] += wy[i, :first]
            den[off:off + first] += w[:first]
            cnt[off:off + first] += w_nonzero[:first]
            rest = L - first
            if rest > 0:
                num[:rest] += wy[i, first:]
                den[:rest] += w[first:]
                cnt[:rest] += w_nonzero[first:]
        else:
            g = (off + np.arange(L)) % window_bins
            np.add.at(num, g, wy[i])
            np.add.at(den, g, w)
            np.add.at(cnt, g, w_nonzero)

    have = den > 0
    values = np.full(window_bins, np.nan)
    values[have] = num[have] / den[have]
    variance = np.full(window_bins, np.inf)
    variance[have] = 1.0 / den[have]
    freqs = (np.arange(window_bins) - half_idx) * rescaled.bin_width
    return CombinedSpectrum(frequencies=freqs, values=values,
                            variance=variance, n_contrib=cnt)


@dataclass
class RebinnedSpectrum:
    frequencies: np.ndarray
    values: np.ndarray
    variance: np.ndarray
    n_contrib: np.ndarray
    bin_width: float


def rebin(combined: CombinedSpectrum, cfg: PipelineConfig) -> RebinnedSpectrum:
    """Inverse-variance average of non-overlapping blocks of combined bins.
    A trailing partial block is dropped."""
    k = cfg.rebin_factor
    n_blocks = combined.values.size // k
    if n_blocks == 0:
        raise InsufficientDataError("fewer combined bins than one rebin block")
    m = n_blocks * k

    w = np.where(np.isfinite(combined.variance[:m]),
                 1.0 / combined.variance[:m], 0.0).reshape(n_blocks, k)
    xw = np.where(w > 0, np.nan_to_num(combined.values[:m]).reshape(n_blocks, k) * w, 0.0)
    den = w.sum(axis=1)
    have = den > 0
    values = np.full(n_blocks, np.nan)
    values[have] = xw.sum(axis=1)[have] / den[have]
    variance = np.full(n_blocks, np.inf)
    variance[have] = 1.0 / den[have]
    freqs = combined.frequencies[:m].reshape(n_blocks, k).mean(axis=1)
    n_contrib = combined.n_contrib[:m].reshape(n_blocks, k).sum(axis=1)
    if combined.frequencies.size > 1:
        width = k * (combined.frequencies[1] - combined.frequencies[0])
    else:
        width = float(k)
    return RebinnedSpectrum(frequencies=freqs, values=values,
                            variance=variance, n_contrib=n_contrib,
                            bin_width=float(width))


@dataclass
class GrandSpectrum:
    """Per-bin signal-shaped excess in units of its own standard deviation."""

    frequencies: np.ndarray
    values: np.ndarray
    n_contrib: np.ndarray
    sigma_raw: float              # scale removed by the final normalization
    center_raw: float


def grand(rebinned: RebinnedSpectrum, cfg: PipelineConfig) -> GrandSpectrum:
    """Sliding lineshape-weighted ML estimate of signal power centered on
    each bin, normalized to zero median and unit robust scale."""
    k = cfg.grand_window
    n = rebinned.values.size
    if n < k:
        raise InsufficientDataError(
            f"{n} rebinned bins cannot fill a {k}-bin estimator window")
    template = lineshape_template(cfg, rebinned.bin_width / cfg.rebin_factor)

    w2 = np.where(np.isfinite(rebinned.variance), 1.0 / rebinned.variance, 0.0)
    x = np.where(w2 > 0, np.nan_to_num(rebinned.values), 0.0)

    num = np.correlate(x * w2, template, mode="valid")
    den = np.correlate(w2, template ** 2, mode="valid")
    with np.errstate(invalid="ignore", divide="ignore"):
        z = np.where(den > 0, num / np.sqrt(den), np.nan)

    finite = np.isfinite(z)
    if finite.sum() < 8:
        raise InsufficientDataError("not enough valid grand bins to normalize")
    center = float(np.median(z[finite]))
    scale = float(_MAD_TO_SIGMA * np.median(np.abs(z[finite] - center)))
    if scale <= 0:
        raise NumericalError("grand spectrum has zero robust scale")

    half = (k - 1) // 2
    freqs = rebinned.frequencies[half:n - half]
    contrib = np.correlate(rebinned.n_contrib.astype(float),
                           np.ones(k), mode="valid").astype(np.int64)
    return GrandSpectrum(frequencies=freqs, values=(z - center) / scale,
                         n_contrib=contrib, sigma_raw=scale, center_raw=center)


def measure_faxion(grand_spectrum: GrandSpectrum, truth) -> float:
    """Grand-spectrum value at the bin containing the injected tone's
    initial frequency.  ``truth`` is a FaxionTruth or a frequency in Hz."""
    start = getattr(truth, "start", truth)
    freqs = grand_spectrum.frequencies
    spacing = freqs[1] - freqs[0] if freqs.size > 1 else math.inf
    if start < freqs[0] - spacing / 2 or start > freqs[-1] + spacing / 2:
        raise ConfigurationError(
            f"tone frequency {start:g} Hz lies outside the grand spectrum span")
    idx = int(np.argmin(np.abs(freqs - start)))
    value = grand_spectrum.values[idx]
    if not np.isfinite(value):
        raise NumericalError("grand-spectrum bin at the tone frequency is invalid")
    return float(value)


def grand_noise_suppression(profile_values: np.ndarray, bin_width: float,
                            cfg: PipelineConfig) -> float:
    """Predicted variance of normalized grand bins relative to naive
    propagation, before the final renormalization.

    The per-spectrum polynomial-profile division subtracts the local
    smoother projection of each spectrum's own noise, leaving stationary
    negative correlations with the known kernel  K(r) = delta(r) - 2 h(r) +
    (h * h)(r)  in raw-bin lag r, where h is the full-window fit kernel.
    Combining with inverse-variance weights turns that into grand-bin
    covariance weighted by the autocorrelation of the rescale profile, which
    the sliding lineshape estimator then integrates.

    The model ignores fit-window truncation at the band edges, the mirrored
    center of symmetrized spectra and the shared run-mean baseline, all of
    which are percent-level here.
    """
    h, _ = _sg_weight_tables(cfg.sg2_degree, cfg.sg2_halfwidth)
    w = cfg.sg2_halfwidth
    reach = cfg.grand_window * cfg.rebin_factor + cfg.rebin_factor

    # processed-noise autocorrelation in raw-bin lag, unit variance at lag 0
    hh = np.correlate(h, h, mode="full")
    kernel = np.zeros(reach + 1)
    upto = min(reach, 2 * w)
    kernel[:upto + 1] += -2.0 * h[w:w + upto + 1] + hh[2 * w:2 * w + upto + 1]
    kernel[0] += 1.0

    # weight-profile autocorrelation across the swept band
    pi = np.asarray(profile_values, dtype=float)
    p2 = np.correlate(pi, pi, mode="full")
    mid = pi.size - 1
    lags = np.arange(reach + 1)
    comb_ratio = kernel * p2[mid:mid + reach + 1] / p2[mid]

    # rebinning averages blocks of rebin_factor combined bins
    kr = cfg.rebin_factor
    reb_ratio = np.zeros(cfg.grand_window + 1)
    for rho in range(cfg.grand_window + 1):
        acc = 0.0
        for e in range(-(kr - 1), kr):
            lag = abs(kr * rho + e)
            if lag <= reach:
                acc += (kr - abs(e)) * comb_ratio[lag]
        reb_ratio[rho] = acc / kr

    template = lineshape_template(cfg, bin_width)
    auto = np.correlate(template, template, mode="full")
    c = cfg.grand_window - 1
    total = auto[c] * reb_ratio[0]
    for rho in range(1, cfg.grand_window):
        total += 2.0 * auto[c + rho] * reb_ratio[rho]
    return float(total / auto[c])


@dataclass
class PipelineResult:
    processed: ProcessedSpectra
    rescaled: RescaledSpectra
    combined: CombinedSpectrum
    rebinned: RebinnedSpectrum
    grand: GrandSpectrum
    profile: VisibilityProfile
    stats: dict = field(default_factory=dict)


def run_pipeline(raw_set: RawSpectrumSet, cfg: PipelineConfig,
                 profile: VisibilityProfile | None = None,
                 dump_dir=None) -> PipelineResult:
    """Run every stage on one raw set.  ``profile`` defaults to the
    visibility profile of the run's own receiver configuration."""
    from .synth import visibility_profile

    if profile is None:
        profile = visibility_profile(raw_set.params, raw_set.config)
    processed = process(raw_set, cfg)
    scaled = rescale(processed, profile)
    combined = combine(scaled, cfg)
    rebinned = rebin(combined, cfg)
    g = grand(rebinned, cfg)
    stats = {
        "retention_fraction": processed.rejection.retained_fraction,
        "n_offending_bins": processed.rejection.n_offenders,
        "sigma_p_analytic": math.sqrt(processed.variance),
        "sigma_p_empirical": processed.sigma_empirical,
        "sigma_g_raw": g.sigma_raw,
        "grand_bins": int(g.values.size),
    }
    result = PipelineResult(processed=processed, rescaled=scaled,
                            combined=combined, rebinned=rebinned, grand=g,
                            profile=profile, stats=stats)
    if dump_dir is not None:
        dump_stages(result, dump_dir)
    return result


def dump_stages(result: PipelineResult, path) -> Path:
    """Write every stage to ``path`` for golden-file comparisons."""
    import json

    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    proc = result.processed.values
    if proc.size > 2_000_000:
        proc.astype("<f8").T.tofile(path / "processed.f64")
        (path / "processed.f64.json").write_text(json.dumps(
            {"dtype": "<f8", "order": "F", "n_spectra": proc.shape[0],
             "n_bins": proc.shape[1]}, indent=2))
    else:
        np.savetxt(path / "processed.csv", proc, delimiter=",")
    np.savetxt(path / "mask.csv", result.processed.mask.astype(int), fmt="%d")
    np.savetxt(path / "combined.csv",
               np.column_stack([result.combined.frequencies,
                                result.combined.values,
                                result.combined.variance,
                                result.combined.n_contrib]),
               delimiter=",", header="frequency_hz,value,variance,n_contrib")
    np.savetxt(path / "rebinned.csv",
               np.column_stack([result.rebinned.frequencies,
                                result.rebinned.values,
                                result.rebinned.variance,
                                result.rebinned.n_contrib]),
               delimiter=",", header="frequency_hz,value,variance,n_contrib")
    write_grand_csv(result.grand, path / "grand.csv")
    (path / "stage_stats.json").write_text(json.dumps(result.stats, indent=2))
    return path


def write_grand_csv(grand_spectrum: GrandSpectrum, target) -> None:
    np.savetxt(target,
               np.column_stack([grand_spectrum.frequencies,
                                grand_spectrum.values,
                                grand_spectrum.n_contrib]),
               delimiter=",", header="frequency_hz,excess_sigma,n_contrib",
               comments="")
