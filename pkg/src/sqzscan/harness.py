"""Campaign orchestration: seeded Monte Carlo over receiver configurations,
theory tables, persistence and manifests.

A campaign repeats the inject-and-detect protocol for a squeezed and an
unsqueezed receiver and reduces the measured tone powers to the scan-rate
enhancement E_m = (mu_s / mu_u)^2.  Both receivers see the same tone source
(frozen from the squeezed configuration) and the same per-repetition initial
frequency, but independent noise, which mirrors how the hardware experiment
swaps receiver settings around a fixed generator.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .axion import HaloscopePhysical, model_params
from .errors import ConfigurationError, NumericalError
from .network import NetworkParams
from .pipeline import (PipelineConfig, measure_faxion, run_pipeline,
                       write_grand_csv)
from .scanrate import ScanConfig, compare_configs, enhancement_grid, optimal_coupling
from .synth import (SynthConfig, faxion_source_amplitude, substream,
                    synthesize_run, visibility_profile, write_run)
from .svgplot import line_plot

__all__ = [
    "ExperimentConfig", "CampaignResult", "run_campaign", "theory_report",
    "load_config", "config_to_dict", "desk_config", "full_config",
    "DEFAULT_GS_AXIS", "DEFAULT_COUPLING_AXIS",
]

# axes used for emitted enhancement grids; chosen to contain the landmark
# cells (G_s = 25, coupling 5) and the optimal-coupling diagonal
DEFAULT_GS_AXIS = (1.0, 1.5, 2.0, 3.0, 5.0, 7.5, 10.0, 15.0, 20.0, 25.0,
                   35.0, 50.0, 75.0, 100.0)
DEFAULT_COUPLING_AXIS = (0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 7.5, 10.0, 15.0,
                         20.0, 30.0, 50.0, 100.0, 200.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one campaign needs, JSON-serializable."""

    squeezed: NetworkParams
    unsqueezed: NetworkParams
    synth: SynthConfig
    pipeline: PipelineConfig
    repetitions: int = 20
    seed: int = 0
    output_dir: str | None = None
    scale: str = "desk"
    axion_physical: HaloscopePhysical | None = None
    check: dict | None = None
    persist_runs: bool = False

    def __post_init__(self):
        if self.repetitions < 2:
            raise ConfigurationError("repetitions must be >= 2")
        if self.scale not in ("desk", "full"):
            raise ConfigurationError("scale must be 'desk' or 'full'")
        a, b = asdict(self.squeezed), asdict(self.unsqueezed)
        differing = {k for k in a if a[k] != b[k]}
        if not differing <= {"G_s", "kappa_m"}:
            warnings.warn(
                "squeezed and unsqueezed configurations differ in "
                f"{sorted(differing - {'G_s', 'kappa_m'})} besides (G_s, kappa_m)",
                stacklevel=3)


@dataclass
class CampaignResult:
    """Aggregated campaign outcome plus the theory values it is judged against."""

    powers_squeezed: np.ndarray
    powers_unsqueezed: np.ndarray
    mu_s: float
    mu_u: float
    se_mu_s: float
    se_mu_u: float
    sigma_g: float
    e_m: float
    e_m_se: float
    e_t: float                    # visibility-squared ratio, full detuning range
    e_t_band: float               # same ratio restricted to the measured band
    failures: list = field(default_factory=list)
    wall_clock_s: float = 0.0
    manifest: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "mu_s": self.mu_s, "se_mu_s": self.se_mu_s,
            "mu_u": self.mu_u, "se_mu_u": self.se_mu_u,
            "sigma_g": self.sigma_g,
            "E_m": self.e_m, "E_m_se": self.e_m_se,
            "E_t": self.e_t, "E_t_band": self.e_t_band,
            "repetitions_used": int(self.powers_squeezed.size),
            "failures": self.failures,
            "wall_clock_s": self.wall_clock_s,
        }


def _config_hash(cfg: ExperimentConfig) -> str:
    payload = json.dumps(config_to_dict(cfg), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def _scan_config(cfg: ExperimentConfig, banded: bool) -> ScanConfig:
    bounds = 2.0 * math.pi * cfg.synth.if_band if banded else None
    return ScanConfig(delta_a=cfg.synth.faxion.linewidth, bounds=bounds)


def run_campaign(cfg: ExperimentConfig) -> CampaignResult:
    """Run the full Monte Carlo campaign and reduce it to E_m.

    Deterministic for a given (config, seed): repetition r uses substreams
    (seed, 2r, ...) for the squeezed receiver and (seed, 2r+1, ...) for the
    unsqueezed one, with the tone start drawn from (seed, r, 0) and shared.
    A repetition that fails in any stage is excluded and logged; more than
    5 percent failures abort the campaign.
    """
    t0 = time.monotonic()
    source = faxion_source_amplitude(cfg.squeezed, cfg.synth)
    synth_frozen = replace(cfg.synth,
                           faxion=replace(cfg.synth.faxion,
                                          source_amplitude=source))
    profiles = {
        "squeezed": visibility_profile(cfg.squeezed, synth_frozen),
        "unsqueezed": visibility_profile(cfg.unsqueezed, synth_frozen),
    }

    out_dir = Path(cfg.output_dir) if cfg.output_dir else None
    powers = {"squeezed": [], "unsqueezed": []}
    sigma_gs = []
    failures = []
    sub_seeds = []
    half_window = synth_frozen.faxion.start_window / 2.0

    for rep in range(cfg.repetitions):
        start = float(substream(cfg.seed, rep, 0).uniform(-half_window, half_window))
        try:
            rep_powers = {}
            for ci, (name, params) in enumerate(
                    (("squeezed", cfg.squeezed), ("unsqueezed", cfg.unsqueezed))):
                run_index = 2 * rep + ci
                sub_seeds.append({"repetition": rep, "receiver": name,
                                  "run_index": run_index})
                run = synthesize_run(params, synth_frozen, seed=cfg.seed,
                                     run_index=run_index, faxion_start=start)
                result = run_pipeline(run, cfg.pipeline, profile=profiles[name])
                rep_powers[name] = measure_faxion(result.grand, run.truth) \
                    if run.truth is not None else _noise_power(result)
                sigma_gs.append(result.grand.sigma_raw)
                if out_dir is not None and cfg.persist_runs:
                    rep_dir = out_dir / f"rep{rep:03d}" / name
                    rep_dir.mkdir(parents=True, exist_ok=True)
                    write_run(run, rep_dir / "run")
                    write_grand_csv(result.grand, rep_dir / "grand.csv")
                    (rep_dir / "stage_stats.json").write_text(
                        json.dumps(result.stats, indent=2))
        except (NumericalError, ConfigurationError, ValueError) as err:
            failures.append({"repetition": rep, "reason": str(err)})
            continue
        powers["squeezed"].append(rep_powers["squeezed"])
        powers["unsqueezed"].append(rep_powers["unsqueezed"])

    if len(failures) > 0.05 * cfg.repetitions:
        raise NumericalError(
            f"{len(failures)} of {cfg.repetitions} repetitions failed: "
            f"{failures[:3]}")

    ps = np.asarray(powers["squeezed"])
    pu = np.asarray(powers["unsqueezed"])
    n = ps.size
    mu_s, mu_u = float(ps.mean()), float(pu.mean())
    se_s = float(ps.std(ddof=1) / math.sqrt(n))
    se_u = float(pu.std(ddof=1) / math.sqrt(n))
    if mu_u == 0:
        raise NumericalError("unsqueezed mean power is zero; cannot form E_m")
    e_m = (mu_s / mu_u) ** 2
    e_m_se = abs(e_m) * 2.0 * math.sqrt((se_s / mu_s) ** 2 + (se_u / mu_u) ** 2) \
        if mu_s != 0 else math.inf

    e_t = compare_configs(cfg.squeezed, cfg.unsqueezed, _scan_config(cfg, False))
    e_t_band = compare_configs(cfg.squeezed, cfg.unsqueezed, _scan_config(cfg, True))

    manifest = {
        "version": __version__,
        "config_hash": _config_hash(cfg),
        "seed": cfg.seed,
        "scale": cfg.scale,
        "sub_seeds": sub_seeds,
        "faxion_source_amplitude": source,
        "n_failures": len(failures),
    }
    if cfg.axion_physical is not None:
        manifest["axion_model_params"] = asdict(model_params(cfg.axion_physical))

    result = CampaignResult(
        powers_squeezed=ps, powers_unsqueezed=pu,
        mu_s=mu_s, mu_u=mu_u, se_mu_s=se_s, se_mu_u=se_u,
        sigma_g=float(np.mean(sigma_gs)) if sigma_gs else float("nan"),
        e_m=e_m, e_m_se=e_m_se, e_t=e_t, e_t_band=e_t_band,
        failures=failures, wall_clock_s=time.monotonic() - t0,
        manifest=manifest,
    )
    if out_dir is not None:
        _persist_campaign(cfg, result, profiles, out_dir)
    return result


def _noise_power(result) -> float:
    # no tone injected: sample the grand spectrum at its central bin
    mid = result.grand.values.size // 2
    return float(result.grand.values[mid])


def _persist_campaign(cfg, result: CampaignResult, profiles, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "campaign_result.json").write_text(
        json.dumps(result.summary(), indent=2, sort_keys=True))
    (out_dir / "manifest.json").write_text(
        json.dumps(result.manifest, indent=2, sort_keys=True))
    rows = np.column_stack([np.arange(result.powers_squeezed.size),
                            result.powers_squeezed, result.powers_unsqueezed])
    np.savetxt(out_dir / "powers.csv", rows, delimiter=",",
               header="repetition,power_squeezed_sigma,power_unsqueezed_sigma",
               comments="")
    for name, prof in profiles.items():
        np.savetxt(out_dir / f"visibility_profile_{name}.csv",
                   np.column_stack([prof.frequencies, prof.values]),
                   delimiter=",", header="frequency_hz,relative_visibility",
                   comments="")
    line_plot(out_dir / "visibility_profiles.svg",
              [(name, prof.frequencies, prof.values)
               for name, prof in profiles.items()],
              title="relative visibility", xlabel="detuning (Hz)",
              ylabel="alpha / alpha_max")


# ---------------------------------------------------------------------------
# theory outputs

_FOUR_CASES = (
    ("squeezed_overcoupled", 10.0, True),
    ("unsqueezed_nearcritical", 1.5, False),
    ("unsqueezed_overcoupled", 10.0, False),
    ("squeezed_nearcritical", 1.5, True),
)


def theory_report(cfg: ExperimentConfig, out_dir=None,
                  grid_points: int = 0) -> dict:
    """Analytic tables: normalized visibility curves for the four benchmark
    coupling/squeezing cases, enhancement grids at unit and configured
    efficiency, optimal couplings, and the configured pair's enhancement."""
    from .network import visibility

    sq = cfg.squeezed
    gs = sq.G_s
    kl = sq.kappa_l
    detunings = np.linspace(-2e6, 2e6, 801)
    reference = visibility(sq.replace(kappa_m=kl, n_A=max(sq.n_A, 1.0)), 0.0)

    curves = {}
    for name, ratio, squeezing in _FOUR_CASES:
        p = sq.replace(kappa_m=ratio * kl, G_s=gs if squeezing else 1.0,
                       n_A=max(sq.n_A, 1.0))
        curves[name] = np.array(
            [visibility(p, 2.0 * math.pi * f) for f in detunings]) / reference

    gs_axis = np.asarray(DEFAULT_GS_AXIS)
    coupling_axis = np.asarray(DEFAULT_COUPLING_AXIS)
    if grid_points:
        gs_axis = np.geomspace(1.0, 100.0, grid_points)
        coupling_axis = np.geomspace(0.5, 200.0, grid_points)
    grids = {
        "eta_1.00": enhancement_grid(1.0, gs_axis, coupling_axis, sq),
        f"eta_{sq.eta:.2f}": enhancement_grid(sq.eta, gs_axis, coupling_axis, sq),
    }

    scan_cfg = _scan_config(cfg, banded=False)
    couplings = {
        "unsqueezed_lossless": optimal_coupling(
            sq.replace(G_s=1.0, lambda_t=1.0), scan_cfg) / kl,
        "squeezed_lossless": optimal_coupling(
            sq.replace(lambda_t=1.0), scan_cfg) / kl,
        "squeezed_at_eta": optimal_coupling(sq, scan_cfg) / kl,
    }

    # high-efficiency benchmark: best enhancement at eta = 0.91, large gain
    lam91 = math.sqrt(0.91)
    p91 = sq.replace(lambda_t=lam91, G_s=100.0)
    km91 = optimal_coupling(p91, scan_cfg)
    e91 = compare_configs(p91.replace(kappa_m=km91),
                          sq.replace(lambda_t=lam91, G_s=1.0,
                                     kappa_m=2.0 * kl), scan_cfg)

    report = {
        "detunings_hz": detunings,
        "visibility_curves": curves,
        "grids": grids,
        "optimal_couplings": couplings,
        "e_t": compare_configs(sq, cfg.unsqueezed, scan_cfg),
        "e_t_band": compare_configs(sq, cfg.unsqueezed, _scan_config(cfg, True)),
        "high_efficiency_enhancement": {"eta": 0.91, "G_s": 100.0,
                                        "value": e91,
                                        "coupling_ratio": km91 / kl},
    }

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        np.savetxt(out_dir / "visibility_curves.csv",
                   np.column_stack([detunings] + [curves[n] for n, _, _ in _FOUR_CASES]),
                   delimiter=",",
                   header="frequency_hz," + ",".join(n for n, _, _ in _FOUR_CASES),
                   comments="")
        line_plot(out_dir / "visibility_curves.svg",
                  [(name, detunings, curves[name]) for name, _, _ in _FOUR_CASES],
                  title="normalized visibility", xlabel="detuning (Hz)",
                  ylabel="alpha / alpha_max")
        for name, grid in grids.items():
            grid.to_csv(out_dir / f"enhancement_grid_{name}.csv")
        scalars = {
            "optimal_couplings": couplings,
            "e_t": report["e_t"],
            "e_t_band": report["e_t_band"],
            "high_efficiency_enhancement": report["high_efficiency_enhancement"],
        }
        (out_dir / "theory.json").write_text(json.dumps(scalars, indent=2))
    return report


# ---------------------------------------------------------------------------
# configuration files

def config_to_dict(cfg: ExperimentConfig) -> dict:
    out = {
        "squeezed": asdict(cfg.squeezed),
        "unsqueezed": asdict(cfg.unsqueezed),
        "synth": asdict(cfg.synth),
        "pipeline": asdict(cfg.pipeline),
        "repetitions": cfg.repetitions,
        "seed": cfg.seed,
        "output_dir": cfg.output_dir,
        "scale": cfg.scale,
        "check": cfg.check,
        "persist_runs": cfg.persist_runs,
    }
    if cfg.axion_physical is not None:
        out["axion_physical"] = asdict(cfg.axion_physical)
    return out


def config_from_dict(raw: dict) -> ExperimentConfig:
    from .synth import FaxionConfig

    try:
        synth_raw = dict(raw["synth"])
        synth_raw["faxion"] = FaxionConfig(**synth_raw["faxion"])
        phys = raw.get("axion_physical")
        return ExperimentConfig(
            squeezed=NetworkParams(**raw["squeezed"]),
            unsqueezed=NetworkParams(**raw["unsqueezed"]),
            synth=SynthConfig(**synth_raw),
            pipeline=PipelineConfig(**raw["pipeline"]),
            repetitions=raw.get("repetitions", 20),
            seed=raw.get("seed", 0),
            output_dir=raw.get("output_dir"),
            scale=raw.get("scale", "desk"),
            axion_physical=HaloscopePhysical(**phys) if phys else None,
            check=raw.get("check"),
            persist_runs=raw.get("persist_runs", False),
        )
    except (KeyError, TypeError) as err:
        raise ConfigurationError(f"bad experiment config: {err}") from err


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigurationError(f"cannot read config {path}: {err}") from err
    return config_from_dict(raw)


_TWO_PI = 2.0 * math.pi


def _receiver_pair():
    kl = _TWO_PI * 100e3
    base = dict(kappa_l=kl, kappa_a=_TWO_PI * 100.0, omega_c=_TWO_PI * 7.146e9,
                n_T=0.0, n_A=1.0, G_a=10.0**2.5, lambda_t=math.sqrt(0.69))
    squeezed = NetworkParams(kappa_m=10.0 * kl, G_s=10.0**1.3, **base)
    unsqueezed = NetworkParams(kappa_m=1.5 * kl, G_s=1.0, **base)
    return squeezed, unsqueezed


def _table_one() -> HaloscopePhysical:
    return HaloscopePhysical(rho_a=0.45, B0=9.0, g_agg=-7.7e-24, delta_a=5e3,
                             omega_a=_TWO_PI * 5e9, V=1.5, C_mnl=0.5)


def desk_config(seed: int = 20210411, output_dir: str | None = None) -> ExperimentConfig:
    """Laptop-scale campaign: full tuning walk, fewer repetitions, a stronger
    tone so the enhancement estimate converges in minutes."""
    squeezed, unsqueezed = _receiver_pair()
    from .synth import FaxionConfig

    return ExperimentConfig(
        squeezed=squeezed, unsqueezed=unsqueezed,
        synth=SynthConfig(faxion=FaxionConfig(power_fraction=0.05), seed=seed),
        pipeline=PipelineConfig(),
        repetitions=20, seed=seed, output_dir=output_dir, scale="desk",
        axion_physical=_table_one(),
        check={"e_m_tolerance_se": 2.0},
    )


def full_config(seed: int = 20210411, output_dir: str | None = None) -> ExperimentConfig:
    """Paper-scale campaign: 200 repetitions per receiver at one percent
    tone power.  Takes on the order of an hour."""
    cfg = desk_config(seed=seed, output_dir=output_dir)
    from .synth import FaxionConfig

    return replace(cfg,
                   synth=replace(cfg.synth,
                                 faxion=FaxionConfig(power_fraction=0.01)),
                   repetitions=200, scale="full",
                   check={"e_m_tolerance_se": 2.0, "e_m_range": [1.9, 2.35]})


def check_campaign(cfg: ExperimentConfig, result: CampaignResult) -> list[str]:
    """Evaluate the thresholds embedded in the config; returns failure strings."""
    problems = []
    rules = cfg.check or {}
    tol_se = rules.get("e_m_tolerance_se")
    if tol_se is not None:
        gap = abs(result.e_m - result.e_t_band)
        allowed = tol_se * result.e_m_se
        if gap > allowed:
            problems.append(
                f"E_m = {result.e_m:.3f} deviates from banded theory "
                f"{result.e_t_band:.3f} by {gap:.3f} > {allowed:.3f}")
    rng = rules.get("e_m_range")
    if rng is not None and not (rng[0] <= result.e_m <= rng[1]):
        problems.append(f"E_m = {result.e_m:.3f} outside [{rng[0]}, {rng[1]}]")
    return problems
