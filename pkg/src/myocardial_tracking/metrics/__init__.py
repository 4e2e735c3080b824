"""Tracking accuracy, clinical strain, timing and ablation reports."""

from .ablation import (
    ABLATION_AXES,
    ABLATION_COLUMNS,
    AblationReport,
    AblationRow,
    ablation_run,
    apply_variant,
    evaluate_static,
    evaluate_tracker,
    held_out_samples,
)
from .clinical_metrics import (
    AgreementStats,
    GlsSeries,
    TestRetestStats,
    agreement,
    gls,
    patient_gls,
    test_retest,
    wall_lengths,
)
from .timing import TimingReport, ait
from .tracking_metrics import (
    DELTA_THRESHOLDS,
    EVAL_RESOLUTION,
    EvalFrame,
    TrackingMetrics,
    delta_accuracy,
    delta_avg,
    evaluate,
    mte,
    query_frame_drift,
    relative_improvement,
    static_baseline,
)

__all__ = [
    "ABLATION_AXES",
    "ABLATION_COLUMNS",
    "AblationReport",
    "AblationRow",
    "ablation_run",
    "apply_variant",
    "evaluate_static",
    "evaluate_tracker",
    "held_out_samples",
    "AgreementStats",
    "GlsSeries",
    "TestRetestStats",
    "agreement",
    "gls",
    "patient_gls",
    "test_retest",
    "wall_lengths",
    "TimingReport",
    "ait",
    "DELTA_THRESHOLDS",
    "EVAL_RESOLUTION",
    "EvalFrame",
    "TrackingMetrics",
    "delta_accuracy",
    "delta_avg",
    "evaluate",
    "mte",
    "query_frame_drift",
    "relative_improvement",
    "static_baseline",
]
