"""Buried-object detection toolkit for wideband electromagnetic induction data.

Dictionary generation, preprocessing, ACE/WACE/JOMP/Energy detectors,
alarm generation with halo scoring, and a lane simulator for testing.
"""

from .alarms import (
    Alarm,
    ConfidenceGrid,
    GroundTruthEntry,
    Label,
    RocCurve,
    extract_alarms,
    match_alarms,
    rasterize,
    roc,
)
from .detectors import (
    BackgroundModel,
    ConfidenceTrace,
    OmpResult,
    WaceConfig,
    ace_confidence,
    ace_statistic,
    detect_energy,
    detect_global_ace,
    detect_jomp,
    detect_wace,
    estimate_background,
    jomp_confidence,
    omp,
    update_inverse_covariance,
    update_mean,
)
from .dictionary import Dictionary, RelaxationModel, build_dictionary, dsrf_response, log_spaced
from .lane_sim import Scenario, TargetSpec, generate_lane, preset_scenarios
from .preprocessing import (
    RawLane,
    SweepSample,
    downtrack_filter,
    normalize_dictionary,
    sine_filter_taps,
    to_feature_vector,
)

__version__ = "0.1.0"
