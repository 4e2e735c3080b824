"""
Ablation harness.

Each axis varies one design choice (correlation window, temporal backbone or joint
reasoning mode), trains one model per variant and reports δ¹, δ², δ⁴, MTE and AIT on
held-out in-distribution and out-of-distribution phantoms.
"""

import csv
import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from ..config import RunConfig
from ..data import PhantomSample, PhantomSpec, generate_many, ood_spec
from ..errors import ConfigError
from ..models import Tracker
from ..params import ModelParams
from ..training import train
from .timing import ait
from .tracking_metrics import EvalFrame, TrackingMetrics, evaluate, relative_improvement, static_baseline

logger = logging.getLogger(__name__)

ABLATION_AXES: Dict[str, Tuple[Any, ...]] = {
    "window": (5, 7, 9, 11),
    "temporal": ("fuse-add", "fuse-cat", "btsm", "itsm"),
    "reasoning": ("full-joint", "cross-attention", "knp"),
}

ABLATION_COLUMNS: Tuple[str, ...] = (
    "variant",
    "delta_1",
    "delta_2",
    "delta_4",
    "delta_avg",
    "mte",
    "ood_delta_1",
    "ood_delta_2",
    "ood_delta_4",
    "ood_delta_avg",
    "ood_mte",
    "ait_s",
    "delta_avg_gain_pct",
)


@dataclass
class AblationRow:
    """Results of one variant."""

    variant: str
    in_distribution: TrackingMetrics
    out_of_distribution: TrackingMetrics
    ait_seconds: float
    final_loss: Optional[float] = None
    delta_avg_gain_pct: float = 0.0

    def values(self) -> Dict[str, Any]:
        ind, ood = self.in_distribution, self.out_of_distribution
        return {
            "variant": self.variant,
            "delta_1": ind.delta_1,
            "delta_2": ind.delta_2,
            "delta_4": ind.delta_4,
            "delta_avg": ind.delta_avg,
            "mte": ind.mte,
            "ood_delta_1": ood.delta_1,
            "ood_delta_2": ood.delta_2,
            "ood_delta_4": ood.delta_4,
            "ood_delta_avg": ood.delta_avg,
            "ood_mte": ood.mte,
            "ait_s": self.ait_seconds,
            "delta_avg_gain_pct": self.delta_avg_gain_pct,
        }


@dataclass
class AblationReport:
    """Table of ablation results for one axis."""

    axis: str
    rows: List[AblationRow] = field(default_factory=list)
    baseline: Optional[AblationRow] = None
    ait_non_decreasing: Optional[bool] = None

    def table(self) -> List[Dict[str, Any]]:
        rows = [row.values() for row in self.rows]
        if self.baseline is not None:
            rows.append(self.baseline.values())
        return rows

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(ABLATION_COLUMNS)
            for row in self.table():
                writer.writerow([_format_cell(row[c]) for c in ABLATION_COLUMNS])
        return path

    def to_markdown(self) -> str:
        lines = [
            f"### Ablation: {self.axis}",
            "",
            "| " + " | ".join(ABLATION_COLUMNS) + " |",
            "|" + "|".join("---" for _ in ABLATION_COLUMNS) + "|",
        ]
        for row in self.table():
            lines.append("| " + " | ".join(_format_cell(row[c]) for c in ABLATION_COLUMNS) + " |")
        if self.ait_non_decreasing is not None:
            status = "yes" if self.ait_non_decreasing else "no (soft expectation not met)"
            lines.extend(["", f"AIT non-decreasing with window size: {status}"])
        return "\n".join(lines) + "\n"


def _format_cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def apply_variant(config: RunConfig, axis: str, variant: Any) -> RunConfig:
    """Return a copy of `config` with the axis setting replaced by `variant`."""
    if axis not in ABLATION_AXES:
        raise ConfigError(f"unknown ablation axis '{axis}', expected one of {tuple(ABLATION_AXES)}")
    if axis == "window":
        try:
            window = int(variant)
        except (TypeError, ValueError):
            raise ConfigError(f"unknown window variant '{variant}'") from None
        return config.with_overrides(corr=dataclasses.replace(config.corr, window=window))
    if variant not in ABLATION_AXES[axis]:
        raise ConfigError(f"unknown {axis} variant '{variant}', expected one of {ABLATION_AXES[axis]}")
    if axis == "temporal":
        return config.with_overrides(backbone=dataclasses.replace(config.backbone, variant=variant))
    return config.with_overrides(refiner=dataclasses.replace(config.refiner, mode=variant))


def held_out_samples(spec: PhantomSpec, count: int, first_seed: int) -> List[PhantomSample]:
    return generate_many(spec, count, first_seed)


def evaluate_tracker(tracker: Tracker, params: ModelParams, samples: Sequence[PhantomSample]) -> TrackingMetrics:
    """Pooled tracking metrics of a tracker over phantom samples."""
    frames = []
    for sample in samples:
        predicted = tracker.track(sample.video, sample.queries, params, sample.query_frame)
        height, width = sample.video.shape[1:3]
        frames.append(EvalFrame.from_pixels(predicted, sample.trajectories, height, width))
    return evaluate(frames)


def evaluate_static(samples: Sequence[PhantomSample]) -> TrackingMetrics:
    """Pooled metrics of the static-prediction baseline."""
    frames = []
    for sample in samples:
        height, width = sample.video.shape[1:3]
        predicted = static_baseline(sample.queries, sample.n_frames)
        frames.append(EvalFrame.from_pixels(predicted, sample.trajectories, height, width))
    return evaluate(frames)


def ablation_run(
    axis: str,
    config: RunConfig,
    variants: Optional[Sequence[Any]] = None,
    progress: bool = False,
) -> AblationReport:
    """
    Train and evaluate one model per variant of an ablation axis.

    Args:
        axis: "window", "temporal" or "reasoning"
        config: Base run configuration; the axis setting is overridden per variant
        variants: Subset of the axis variants (default: all of them)
        progress: Show a progress bar over variants

    Returns:
        AblationReport with one row per variant plus the static baseline

    Raises:
        ConfigError: For an unknown axis or variant, or no evaluation samples
    """
    if axis not in ABLATION_AXES:
        raise ConfigError(f"unknown ablation axis '{axis}', expected one of {tuple(ABLATION_AXES)}")
    if config.eval_samples < 1:
        raise ConfigError("ablation needs eval_samples >= 1")
    variants = tuple(ABLATION_AXES[axis] if variants is None else variants)
    configs = [apply_variant(config, axis, v) for v in variants]
    for variant_config in configs:
        variant_config.validate()

    id_spec, shifted = config.phantom, ood_spec(config.phantom)
    id_samples = held_out_samples(id_spec, config.eval_samples, id_spec.seed + config.train_samples)
    ood_samples = held_out_samples(shifted, config.eval_samples, shifted.seed + config.train_samples)

    report = AblationReport(axis=axis)
    for variant, variant_config in tqdm(list(zip(variants, configs)), desc=f"ablate {axis}", disable=not progress):
        tracker = Tracker(variant_config.tracker_config())
        final_loss = None
        if variant_config.train.epochs > 0 and variant_config.train_samples > 0:
            result = train(
                variant_config.tracker_config(),
                variant_config.train,
                variant_config.phantom,
                variant_config.train_samples,
            )
            params = result.params
            final_loss = result.epoch_losses[-1] if result.epoch_losses else None
        else:
            params = tracker.init_params(variant_config.seed)
        timing = ait(tracker, params, [(s.video, s.queries) for s in id_samples])
        row = AblationRow(
            variant=str(variant),
            in_distribution=evaluate_tracker(tracker, params, id_samples),
            out_of_distribution=evaluate_tracker(tracker, params, ood_samples),
            ait_seconds=timing.seconds_per_video,
            final_loss=final_loss,
        )
        logger.info("ablation %s=%s: %s", axis, variant, row.values())
        report.rows.append(row)

    reference = report.rows[0].in_distribution
    for row in report.rows:
        row.delta_avg_gain_pct = relative_improvement(row.in_distribution, reference)["delta_avg_gain_pct"]
    report.baseline = AblationRow(
        variant="static",
        in_distribution=evaluate_static(id_samples),
        out_of_distribution=evaluate_static(ood_samples),
        ait_seconds=0.0,
    )
    report.baseline.delta_avg_gain_pct = relative_improvement(report.baseline.in_distribution, reference)["delta_avg_gain_pct"]

    if axis == "window":
        times = [row.ait_seconds for row in report.rows]
        report.ait_non_decreasing = bool(np.all(np.diff(times) >= 0))
        if not report.ait_non_decreasing:
            logger.warning("AIT is not non-decreasing across window sizes: %s", [f"{t:.4f}" for t in times])
    return report
