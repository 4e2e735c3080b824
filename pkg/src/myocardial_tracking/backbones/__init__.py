"""Temporally-aware feature pyramid extractors."""

from typing import Dict, Type, Union

import numpy as np

from ..autograd import Tensor
from ..errors import ConfigError
from ..params import ModelParams
from .base import (
    BACKBONE_VARIANTS,
    CORRELATION_LEVELS,
    Backbone,
    BackboneConfig,
    BackboneVariant,
    FeaturePyramid,
    residual_block,
    temporal_shift,
)
from .btsm import BTSMBackbone
from .fusion import FusionAddBackbone, FusionCatBackbone
from .itsm import ITSMBackbone
from .plain import PlainBackbone

_REGISTRY: Dict[str, Type[Backbone]] = {
    "itsm": ITSMBackbone,
    "btsm": BTSMBackbone,
    "fuse-add": FusionAddBackbone,
    "fuse-cat": FusionCatBackbone,
    "plain": PlainBackbone,
}


def build_backbone(config: BackboneConfig) -> Backbone:
    """Instantiate the backbone class for `config.variant`."""
    try:
        cls = _REGISTRY[config.variant]
    except KeyError:
        raise ConfigError(
            f"backbone.variant: unknown variant '{config.variant}', expected one of {BACKBONE_VARIANTS}"
        ) from None
    return cls(config)


def extract_pyramid(video: Union[Tensor, np.ndarray], config: BackboneConfig, params: ModelParams) -> FeaturePyramid:
    """Compute the feature pyramid of `video` with the backbone described by `config`."""
    return build_backbone(config).extract(video, params)


__all__ = [
    "BACKBONE_VARIANTS",
    "CORRELATION_LEVELS",
    "Backbone",
    "BackboneConfig",
    "BackboneVariant",
    "BTSMBackbone",
    "FeaturePyramid",
    "FusionAddBackbone",
    "FusionCatBackbone",
    "ITSMBackbone",
    "PlainBackbone",
    "build_backbone",
    "extract_pyramid",
    "residual_block",
    "temporal_shift",
]
