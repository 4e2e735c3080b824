"""Backbone configuration, feature pyramid and the shared residual trunk."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np

from ..autograd import Tensor, add, conv2d, relu, shift_channels_in_time
from ..errors import ConfigError
from ..params import ModelParams, conv, identity_mixing, init_conv

BackboneVariant = Literal["itsm", "btsm", "fuse-add", "fuse-cat", "plain"]
BACKBONE_VARIANTS: Tuple[str, ...] = ("itsm", "btsm", "fuse-add", "fuse-cat", "plain")

CORRELATION_LEVELS: Tuple[int, ...] = (1, 2, 4)


@dataclass
class BackboneConfig:
    """
    Feature extractor configuration.

    `widths` and `strides` give the channel width and total stride of each of the four blocks.
    """

    variant: BackboneVariant = "itsm"
    widths: Tuple[int, ...] = (16, 32, 48, 64)
    strides: Tuple[int, ...] = (2, 4, 8, 16)
    shift_fraction: float = 0.125
    in_channels: int = 1

    def __post_init__(self) -> None:
        self.widths = tuple(int(w) for w in self.widths)
        self.strides = tuple(int(s) for s in self.strides)

    def validate(self) -> None:
        if self.variant not in BACKBONE_VARIANTS:
            raise ConfigError(f"backbone.variant: unknown variant '{self.variant}', expected one of {BACKBONE_VARIANTS}")
        if len(self.widths) != 4 or len(self.strides) != 4:
            raise ConfigError("backbone: exactly 4 blocks required (widths and strides of length 4)")
        if any(w < 1 for w in self.widths):
            raise ConfigError(f"backbone.widths must be positive, got {self.widths}")
        previous = 1
        for stride in self.strides:
            if stride < previous:
                raise ConfigError(f"backbone.strides must be non-decreasing, got {self.strides}")
            if stride % previous:
                raise ConfigError(f"backbone.strides must divide each other, got {self.strides}")
            previous = stride
        if not 0.0 < self.shift_fraction <= 0.5:
            raise ConfigError(f"backbone.shift_fraction must be in (0, 0.5], got {self.shift_fraction}")
        if self.in_channels not in (1, 3):
            raise ConfigError(f"backbone.in_channels must be 1 or 3, got {self.in_channels}")

    def block_strides(self) -> Tuple[int, ...]:
        """Stride applied inside each block: its total stride over the previous block's."""
        previous = 1
        ratios = []
        for stride in self.strides:
            ratios.append(stride // previous)
            previous = stride
        return tuple(ratios)

    def shift_fold(self, channels: int) -> int:
        return int(np.floor(channels * self.shift_fraction))


@dataclass
class FeaturePyramid:
    """Per-level feature maps F^(1..4), each [T, ceil(H/k), ceil(W/k), d]."""

    levels: List[Tensor]
    strides: Tuple[int, ...]

    def level(self, index: int) -> Tensor:
        """Return F^(index), 1-based."""
        if not 1 <= index <= len(self.levels):
            raise IndexError(f"pyramid level {index} out of range 1..{len(self.levels)}")
        return self.levels[index - 1]

    def stride(self, index: int) -> int:
        return self.strides[index - 1]

    @property
    def n_frames(self) -> int:
        return self.levels[0].shape[0]


def temporal_shift(f: Tensor, shift_fraction: float, mix_weight: Optional[Tensor] = None) -> Tensor:
    """
    Temporal shift module.

    The first ⌊d·shift_fraction⌋ channels move one frame backward in time, the next
    ⌊d·shift_fraction⌋ one frame forward, the rest stay; vacated frames are zero.
    With `mix_weight` [1, 1, d, d] a 1×1 convolution mixes channels afterwards.

    Args:
        f: Features [T, h, w, d]
        shift_fraction: Fraction of channels shifted in each direction
        mix_weight: Optional learnable channel-mixing kernel
    """
    fold = int(np.floor(f.shape[-1] * shift_fraction))
    shifted = shift_channels_in_time(f, fold)
    if mix_weight is None:
        return shifted
    return conv2d(shifted, mix_weight, stride=1)


def init_residual_block(params: ModelParams, rng: np.random.Generator, name: str, c_in: int, c_out: int, stride: int) -> None:
    init_conv(params, rng, f"{name}.conv1", 3, c_in, c_out)
    init_conv(params, rng, f"{name}.conv2", 3, c_out, c_out)
    if c_in != c_out or stride != 1:
        init_conv(params, rng, f"{name}.proj", 1, c_in, c_out, bias=False)


def residual_block(x: Tensor, params: ModelParams, name: str, stride: int) -> Tensor:
    """Two 3×3 convolutions with relu and an identity (or 1×1 projected) skip."""
    y = relu(conv(x, params, f"{name}.conv1", stride=stride))
    y = conv(y, params, f"{name}.conv2")
    skip = conv(x, params, f"{name}.proj", stride=stride) if f"{name}.proj.w" in params else x
    return relu(add(y, skip))


class Backbone(ABC):
    """
    Abstract residual feature extractor.

    The trunk is a 3×3 stem followed by four residual blocks B_0..B_3. Variants differ
    only in how temporal context is injected around each block.
    """

    prefix = "backbone"

    def __init__(self, config: BackboneConfig):
        """
        Initialize a backbone.

        Args:
            config: Backbone configuration (validated here)
        """
        config.validate()
        self.config = config

    @property
    def variant(self) -> str:
        return self.config.variant

    def init_params(self, params: ModelParams, rng: np.random.Generator) -> None:
        """Register trunk and variant-specific parameters."""
        cfg = self.config
        init_conv(params, rng, f"{self.prefix}.stem", 3, cfg.in_channels, cfg.widths[0])
        c_in = cfg.widths[0]
        for index, (width, stride) in enumerate(zip(cfg.widths, cfg.block_strides())):
            init_residual_block(params, rng, f"{self.prefix}.block{index}", c_in, width, stride)
            self.init_temporal(params, rng, index, width)
            c_in = width

    def extract(self, video: Union[Tensor, np.ndarray], params: ModelParams) -> FeaturePyramid:
        """
        Compute F^(1..4) for a video.

        Args:
            video: [T, H, W, C] intensities in [0, 1]
            params: Model parameters

        Returns:
            FeaturePyramid with four levels
        """
        if not isinstance(video, Tensor):
            video = Tensor(video)
        if video.ndim != 4:
            raise ConfigError(f"video must be [T, H, W, C], got shape {video.shape}")
        if video.shape[0] < 1:
            raise ConfigError("video must contain at least one frame")
        if video.shape[-1] != self.config.in_channels:
            raise ConfigError(
                f"video has {video.shape[-1]} channels, backbone expects {self.config.in_channels}"
            )
        x = relu(conv(video, params, f"{self.prefix}.stem"))
        levels: List[Tensor] = []
        for index, stride in enumerate(self.config.block_strides()):
            block_out = residual_block(x, params, f"{self.prefix}.block{index}", stride)
            level, x = self.temporal(params, index, block_out)
            levels.append(level)
        return FeaturePyramid(levels=levels, strides=self.config.strides)

    @abstractmethod
    def init_temporal(self, params: ModelParams, rng: np.random.Generator, index: int, width: int) -> None:
        """Register parameters of the temporal module attached to block `index`."""
        pass

    @abstractmethod
    def temporal(self, params: ModelParams, index: int, block_out: Tensor) -> Tuple[Tensor, Tensor]:
        """
        Apply temporal mixing after block `index`.

        Returns:
            (pyramid level F^(index+1), input of the next block)
        """
        pass

    def _init_tsm(self, params: ModelParams, index: int, width: int) -> None:
        params.add(f"{self.prefix}.tsm{index}.mix", identity_mixing(width))

    def _tsm(self, params: ModelParams, index: int, x: Tensor) -> Tensor:
        return temporal_shift(x, self.config.shift_fraction, params[f"{self.prefix}.tsm{index}.mix"])

    def describe(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "widths": list(self.config.widths),
            "strides": list(self.config.strides),
            "shift_fraction": self.config.shift_fraction,
        }
