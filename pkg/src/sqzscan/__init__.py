"""Squeezed-state receiver scan simulator and analysis toolkit."""

__version__ = "0.1.0"

from .network import (NetworkParams, susceptibility, stage_matrices,
                      output_density, measured_noise_density, visibility,
                      expected_squeezing_db, db_to_linear, linear_to_db)
from .scanrate import (ScanConfig, EnhancementGrid, snr_single_step, scan_rate,
                       scan_rate_closed_form, optimal_coupling,
                       enhancement_grid, quadrature_equivalence,
                       compare_configs)
from .axion import (HaloscopePhysical, ModelParams, model_params,
                    signal_power, validate_classical_limit)
from .synth import (SynthConfig, FaxionConfig, RawSpectrumSet,
                    VisibilityProfile, mean_power_profile, synthesize_raw,
                    synthesize_run, visibility_profile, write_run, read_run)
from .pipeline import (PipelineConfig, GrandSpectrum, sg_filter, symmetrize,
                       fold, reject_bins, process, rescale, combine, rebin,
                       grand, measure_faxion, run_pipeline)
from .harness import (ExperimentConfig, CampaignResult, run_campaign,
                      theory_report, load_config, desk_config, full_config)
from .errors import (ConfigurationError, NumericalError,
                     DegenerateObjectiveError, InsufficientDataError)
