"""Average inference time."""

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from ..errors import MetricError
from ..models import Tracker
from ..params import ModelParams

logger = logging.getLogger(__name__)


@dataclass
class TimingReport:
    """Seconds per video together with the configuration that produced them."""

    seconds_per_video: float
    n_videos: int
    per_video: List[float] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ait_seconds": self.seconds_per_video,
            "n_videos": self.n_videos,
            "per_video": list(self.per_video),
            "config": dict(self.config),
        }


def ait(
    tracker: Tracker,
    params: ModelParams,
    videos: Sequence[Tuple[np.ndarray, np.ndarray]],
    query_frame: int = 0,
) -> TimingReport:
    """
    Wall-clock seconds per full track() call, feature extraction included.

    The first video is tracked once as a warm-up and left out of the mean; with a
    single video the warm-up is followed by one timed run of the same video.

    Args:
        tracker: Tracker to time
        params: Its parameters
        videos: (video [T, H, W, C], queries [N, 2]) pairs

    Returns:
        TimingReport with the mean over the timed videos
    """
    if not videos:
        raise MetricError("timing needs at least one video")
    warmup_video, warmup_queries = videos[0]
    tracker.track(warmup_video, warmup_queries, params, query_frame)
    timed = videos[1:] if len(videos) > 1 else videos
    durations = []
    for video, queries in timed:
        start = time.perf_counter()
        tracker.track(video, queries, params, query_frame)
        durations.append(max(time.perf_counter() - start, 1e-9))
    report = TimingReport(
        seconds_per_video=float(np.mean(durations)),
        n_videos=len(durations),
        per_video=durations,
        config=tracker.describe(),
    )
    logger.info("AIT %.4f s/video over %d videos (%s)", report.seconds_per_video, report.n_videos, report.config)
    return report
