"""Scalar wave-optics model of a dual-pinhole, wire-grid and lens-imaging setup."""

__version__ = "0.1.0"

from .errors import (ClampWarning, InsufficientFringesError, NormalizationError,
                     OutOfRangeError, ResolutionError, SamplingError,
                     UndefinedMetricError)
from .field import (IntensityProfile, SampledField, extract_profile, make_field,
                    make_field_1d, total_power)
from .elements import (DetectorRegion, ExperimentGeometry, PinholeBlock,
                       apply_dual_pinhole, apply_thin_lens, apply_wire_grid,
                       integrate_detector, wire_positions)
from .propagation import (PropagationMethod, analytic_two_pinhole_intensity,
                          image_through_lens, propagate_angular_spectrum,
                          propagate_curved, propagate_fresnel)
from .metrics import (DetectorCounts, DualityMetrics, greenberger_yasin,
                      measure_fringe_period, measure_visibility_direct,
                      superposition_decompose,
                      visibility, which_way_from_components,
                      which_way_lower_bound, wire_limited_visibility,
                      worst_case_visibility)
from .photons import (CoincidenceReport, PhotonEvent, PhotonStream,
                      coherence_overlap_probability, count_coincidences,
                      mean_photon_separation, sample_photon_stream)
from .scenarios import (RunSummary, ScenarioResult, SimulationOptions,
                        compare_scenarios, emit_summary, full_pipeline,
                        read_summary, run_scenario)
