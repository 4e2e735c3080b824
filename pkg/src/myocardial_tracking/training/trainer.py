"""Supervised training on phantom sequences."""

import csv
import logging
import queue
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from ..autograd import Tape
from ..data import STAND_IN_LABEL, AugmentConfig, PhantomSample, PhantomSpec, augment, generate_many
from ..errors import ConfigError, DivergenceError
from ..models import Tracker, TrackerConfig
from ..params import ModelParams
from ..utils.threads import ordered_map
from .loss import sequence_loss
from .optim import AdamW, OptimState, one_cycle_lr

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    """
    Training configuration.

    Attributes:
        learning_rate: Peak learning rate of the one-cycle schedule
        gamma: Exponential iteration weighting of the loss
        epochs: Passes over the sample set
        batch_size: Clips per optimizer step
        clip_frames: Frames used per clip (None keeps all)
        points_per_sample: Points supervised per clip (None keeps all)
        weight_decay: Decoupled weight decay
        warmup_fraction: Fraction of steps spent ramping the learning rate up
        divergence_factor: Abort when a batch loss exceeds this multiple of the first one
        augment: Enable the stand-in augmentation
        prefetch: Capacity of the hand-off queue between data preparation and the step loop
        workers: Threads used for per-sample gradients (None: environment default)
        seed: Seed for parameter initialisation, shuffling and augmentation
        deterministic: Single worker and fixed reduction order
    """

    learning_rate: float = 5e-4
    gamma: float = 0.8
    epochs: int = 10
    batch_size: int = 4
    clip_frames: Optional[int] = None
    points_per_sample: Optional[int] = None
    weight_decay: float = 1e-4
    warmup_fraction: float = 0.1
    divergence_factor: float = 10.0
    augment: bool = False
    prefetch: int = 4
    workers: Optional[int] = None
    seed: int = 0
    deterministic: bool = False

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ConfigError(f"train.learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"train.gamma must be in (0, 1], got {self.gamma}")
        if self.epochs < 0:
            raise ConfigError(f"train.epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"train.batch_size must be >= 1, got {self.batch_size}")
        if self.clip_frames is not None and self.clip_frames < 2:
            raise ConfigError(f"train.clip_frames must be >= 2, got {self.clip_frames}")
        if self.points_per_sample is not None and self.points_per_sample < 1:
            raise ConfigError(f"train.points_per_sample must be >= 1, got {self.points_per_sample}")
        if self.weight_decay < 0 or not 0.0 <= self.warmup_fraction < 1.0:
            raise ConfigError("train.weight_decay must be >= 0 and train.warmup_fraction in [0, 1)")
        if self.divergence_factor <= 1.0:
            raise ConfigError(f"train.divergence_factor must exceed 1, got {self.divergence_factor}")
        if self.prefetch < 1:
            raise ConfigError(f"train.prefetch must be >= 1, got {self.prefetch}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TrainResult:
    """Outcome of a training run."""

    params: ModelParams
    optim_state: OptimState
    epoch_losses: List[float] = field(default_factory=list)
    step_losses: List[float] = field(default_factory=list)
    augmentation: Optional[str] = None

    @property
    def steps(self) -> int:
        return self.optim_state.step

    def __repr__(self) -> str:
        final = f"{self.epoch_losses[-1]:.4f}" if self.epoch_losses else "n/a"
        extra = f", augmentation={self.augmentation!r}" if self.augmentation else ""
        return f"TrainResult(steps={self.steps}, epochs={len(self.epoch_losses)}, final_loss={final}{extra})"


def crop_sample(sample: PhantomSample, clip_frames: Optional[int], n_points: Optional[int]) -> PhantomSample:
    """Keep the first `clip_frames` frames and `n_points` points spread evenly along the wall."""
    video, trajectories, order = sample.video, sample.trajectories, sample.wall_order
    if clip_frames is not None:
        video, trajectories = video[:clip_frames], trajectories[:clip_frames]
    if n_points is not None and n_points < trajectories.shape[1]:
        keep = np.unique(np.linspace(0, trajectories.shape[1] - 1, n_points).round().astype(int))
        trajectories = trajectories[:, keep]
        order = np.arange(len(keep))
    return PhantomSample(video=video, trajectories=trajectories, wall_order=order, seed=sample.seed)


class Prefetcher:
    """
    Runs a producer in a background thread and hands its items over a bounded queue.

    Exceptions raised by the producer are re-raised in the consuming thread.
    """

    _DONE = object()

    def __init__(self, produce: Callable[[], Iterator[Any]], capacity: int):
        self._queue: "queue.Queue[Any]" = queue.Queue(maxsize=capacity)
        self._error: Optional[BaseException] = None
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, args=(produce,), daemon=True)
        self._thread.start()

    def _run(self, produce: Callable[[], Iterator[Any]]) -> None:
        try:
            for item in produce():
                while not self._stop.is_set():
                    try:
                        self._queue.put(item, timeout=0.1)
                        break
                    except queue.Full:
                        continue
                if self._stop.is_set():
                    return
        except BaseException as exc:
            self._error = exc
        finally:
            if not self._stop.is_set():
                self._queue.put(self._DONE)

    def __iter__(self) -> Iterator[Any]:
        try:
            while True:
                item = self._queue.get()
                if item is self._DONE:
                    if self._error is not None:
                        raise self._error
                    return
                yield item
        finally:
            self._stop.set()


def _epoch_batches(
    samples: Sequence[PhantomSample],
    config: TrainConfig,
    epoch: int,
) -> Iterator[List[PhantomSample]]:
    order = np.random.default_rng([config.seed, epoch]).permutation(len(samples))
    for start in range(0, len(order), config.batch_size):
        batch = []
        for index in order[start: start + config.batch_size]:
            sample = samples[int(index)]
            if config.augment:
                sample = augment(sample, np.random.default_rng([config.seed, epoch, int(index)]), AugmentConfig())
            batch.append(sample)
        yield batch


def sample_gradients(
    tracker: Tracker,
    params: ModelParams,
    sample: PhantomSample,
    gamma: float,
) -> Tuple[float, Dict[str, np.ndarray]]:
    """Loss and per-parameter gradients for one clip, recorded on the calling thread's tape."""
    with Tape() as tape:
        states = tracker.track_tensors(sample.video, sample.queries, params, sample.query_frame)
        loss = sequence_loss(states, sample.trajectories, gamma)
    grads = tape.backward(loss)
    return loss.item(), {name: grads[tensor] for name, tensor in params.items()}


def train(
    model_config: TrackerConfig,
    train_config: TrainConfig,
    phantom_spec: PhantomSpec,
    n_samples: int,
    params: Optional[ModelParams] = None,
    optim_state: Optional[OptimState] = None,
    progress: bool = False,
    samples: Optional[Sequence[PhantomSample]] = None,
) -> TrainResult:
    """
    Train the tracker on phantom clips, generated unless given.

    Args:
        model_config: Tracker configuration
        train_config: Optimisation settings
        phantom_spec: Phantom specification of the training clips
        n_samples: Number of clips (phantom seeds phantom_spec.seed, +1, ...)
        params: Parameters to continue from (fresh initialisation when None)
        optim_state: Optimizer state to resume from; its step counter continues
        progress: Show a progress bar over epochs
        samples: Clips to train on instead of generating them; n_samples is then ignored

    Returns:
        TrainResult with the trained parameters and the per-epoch mean losses

    Raises:
        ConfigError: For invalid settings or fewer samples than one batch
        DivergenceError: If the loss becomes non-finite or exceeds the divergence factor
        NonFiniteGradientError: If a parameter receives a NaN or infinite gradient
    """
    train_config.validate()
    if samples is not None:
        n_samples = len(samples)
    if n_samples < train_config.batch_size:
        raise ConfigError(f"sample count {n_samples} is smaller than batch size {train_config.batch_size}")
    tracker = Tracker(model_config)
    if params is None:
        params = tracker.init_params(train_config.seed)
    if optim_state is None:
        optim_state = OptimState.zeros_like(params)
    optim_state.check_matches(params)
    result = TrainResult(params=params, optim_state=optim_state)
    if train_config.augment:
        result.augmentation = STAND_IN_LABEL
        logger.info("augmentation: %s", STAND_IN_LABEL)
    if train_config.epochs == 0:
        logger.info("epochs=0: returning parameters unchanged")
        return result

    if samples is None:
        samples = generate_many(phantom_spec, n_samples, phantom_spec.seed, train_config.workers)
    clips = [crop_sample(s, train_config.clip_frames, train_config.points_per_sample) for s in samples]
    batches_per_epoch = -(-n_samples // train_config.batch_size)
    first_step = optim_state.step
    total_steps = first_step + train_config.epochs * batches_per_epoch
    optimizer = AdamW(weight_decay=train_config.weight_decay)
    workers = 1 if train_config.deterministic else train_config.workers
    initial_loss: Optional[float] = None

    def produce() -> Iterator[Tuple[int, List[PhantomSample]]]:
        for epoch in range(train_config.epochs):
            for batch in _epoch_batches(clips, train_config, epoch):
                yield epoch, batch

    epoch_sums = np.zeros(train_config.epochs)
    epoch_counts = np.zeros(train_config.epochs, dtype=int)
    bar = tqdm(total=train_config.epochs * batches_per_epoch, desc="train", disable=not progress)
    try:
        for epoch, batch in Prefetcher(produce, train_config.prefetch):
            outcomes = ordered_map(lambda s: sample_gradients(tracker, params, s, train_config.gamma), batch, workers)
            batch_loss = float(np.mean([loss for loss, _ in outcomes]))
            if not np.isfinite(batch_loss):
                raise DivergenceError(f"non-finite loss at step {optim_state.step}")
            if initial_loss is None:
                initial_loss = batch_loss
            elif batch_loss > train_config.divergence_factor * initial_loss:
                raise DivergenceError(
                    f"loss {batch_loss:.4f} exceeds {train_config.divergence_factor:g}x "
                    f"the initial loss {initial_loss:.4f} at step {optim_state.step}"
                )
            grads = {
                name: np.mean(np.stack([g[name] for _, g in outcomes]), axis=0) for name in params
            }
            lr = one_cycle_lr(
                optim_state.step - first_step,
                total_steps - first_step,
                train_config.learning_rate,
                train_config.warmup_fraction,
            )
            optimizer.step(params, grads, optim_state, lr)
            result.step_losses.append(batch_loss)
            epoch_sums[epoch] += batch_loss * len(batch)
            epoch_counts[epoch] += len(batch)
            logger.debug("step %d: loss %.5f lr %.2e", optim_state.step, batch_loss, lr)
            bar.update(1)
            if epoch_counts[epoch] == n_samples:
                mean_loss = float(epoch_sums[epoch] / n_samples)
                result.epoch_losses.append(mean_loss)
                logger.info("epoch %d: mean loss %.5f (lr %.2e)", epoch + 1, mean_loss, lr)
    finally:
        bar.close()
    return result


def save_loss_curve(path: Path, epoch_losses: Sequence[float]) -> None:
    """Write the per-epoch mean losses as CSV with columns epoch, mean_loss."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["epoch", "mean_loss"])
        for epoch, loss in enumerate(epoch_losses, start=1):
            writer.writerow([epoch, f"{loss:.8f}"])
