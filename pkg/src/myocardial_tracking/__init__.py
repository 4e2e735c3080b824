"""
Myocardial Tracking - dense point tracking of the heart wall in echocardiography-like
cine sequences, with synthetic phantoms, training, tracking metrics and strain analysis.
"""

__version__ = "0.1.0"

from .autograd import Tape, Tensor
from .backbones import BackboneConfig, build_backbone, extract_pyramid
from .config import RunConfig, load_run_config
from .data import PhantomSample, PhantomSpec, generate, generate_many, ood_spec
from .errors import (
    ConfigError,
    ContainerFormatError,
    DivergenceError,
    MetricError,
    MyoTrackingError,
    NonFiniteGradientError,
    PhantomSpecError,
    ShapeError,
    TapeError,
)
from .metrics import TrackingMetrics, ablation_run, ait, evaluate, gls
from .models import CorrConfig, RefinerConfig, Tracker, TrackerConfig
from .params import ModelParams
from .training import TrainConfig, sequence_loss, train

__all__ = [
    "Tape",
    "Tensor",
    "BackboneConfig",
    "build_backbone",
    "extract_pyramid",
    "RunConfig",
    "load_run_config",
    "PhantomSample",
    "PhantomSpec",
    "generate",
    "generate_many",
    "ood_spec",
    "ConfigError",
    "ContainerFormatError",
    "DivergenceError",
    "MetricError",
    "MyoTrackingError",
    "NonFiniteGradientError",
    "PhantomSpecError",
    "ShapeError",
    "TapeError",
    "TrackingMetrics",
    "ablation_run",
    "ait",
    "evaluate",
    "gls",
    "CorrConfig",
    "RefinerConfig",
    "Tracker",
    "TrackerConfig",
    "ModelParams",
    "TrainConfig",
    "sequence_loss",
    "train",
]
