"""RMS angular spread estimation from directional channel measurements.

Pipeline: directional records -> power angular spectrum -> spatial lobes ->
circular RMS spreads -> log-normal summaries, with a 3GPP InH-Office
reference model, a rotating-horn sounder simulator and a seeded ensemble
generator for round-trip checks.
"""

from .core import Condition, DirectionalRecord, Direction, Metric, Plane, Scope, Subpath
from .lobes import SpatialLobe, lobes_from_pas, segment_lobes, spatial_lobe_threshold
from .pas import PowerAngularSpectrum, synthesize_pas
from .stats import ASValue, LogNormalSummary, circular_as, lobe_as, lognormal_expectation_deg, lognormal_fit, omni_as
from .tgpp import compare_measured_vs_tgpp, tgpp_as_params, tgpp_expectation_deg

__all__ = [
    "ASValue",
    "Condition",
    "DirectionalRecord",
    "Direction",
    "LogNormalSummary",
    "Metric",
    "Plane",
    "PowerAngularSpectrum",
    "Scope",
    "SpatialLobe",
    "Subpath",
    "circular_as",
    "compare_measured_vs_tgpp",
    "lobe_as",
    "lobes_from_pas",
    "lognormal_expectation_deg",
    "lognormal_fit",
    "omni_as",
    "segment_lobes",
    "spatial_lobe_threshold",
    "synthesize_pas",
    "tgpp_as_params",
    "tgpp_expectation_deg",
]
__version__ = "0.1.0"
