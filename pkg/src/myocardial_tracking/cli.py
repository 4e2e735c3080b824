"""
Command-line interface.

    myotrack phantom --out DIR [--count N] [--seed S] [--ood]
    myotrack train   --out DIR [--data DIR] [--resume CKPT]
    myotrack track   --checkpoint CKPT --video FILE --queries FILE --out FILE
    myotrack eval    --pred FILE --ref FILE --out DIR
    myotrack ablate  --axis {window,temporal,reasoning} --out DIR
    myotrack bench   --checkpoint CKPT (--data DIR | --videos FILE... --queries FILE) --out DIR

Every command accepts --config, --deterministic and --log-level and writes the resolved
run configuration next to its outputs. Exit codes: 0 success, 1 invalid input,
2 runtime failure.
"""

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .config import RESOLVED_CONFIG_NAME, RunConfig, load_run_config
from .data import generate_many, ood_spec
from .errors import ConfigError, ContainerFormatError, MetricError, ShapeError
from .io import (
    load_checkpoint,
    load_phantom_set,
    load_queries,
    load_tensor,
    load_trajectories,
    save_checkpoint,
    save_phantom_set,
    save_trajectories,
)
from .metrics import (
    ABLATION_AXES,
    EvalFrame,
    ablation_run,
    ait,
    evaluate,
    gls,
    query_frame_drift,
    relative_improvement,
    static_baseline,
)
from .models import Tracker
from .params import ModelParams
from .training import save_loss_curve, train
from .utils import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILURE = 2

INVALID_INPUT_ERRORS = (ConfigError, ShapeError, ContainerFormatError, MetricError, FileNotFoundError)
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _resolve_config(args: argparse.Namespace, fallback: Optional[Path] = None) -> RunConfig:
    """Load --config, else the resolved config stored in `fallback`, else the defaults."""
    source: Optional[Path] = Path(args.config) if args.config else None
    if source is None and fallback is not None and (fallback / RESOLVED_CONFIG_NAME).exists():
        source = fallback
    config = load_run_config(source)
    if args.deterministic:
        config = config.with_overrides(deterministic=True)
    config.apply_runtime()
    logger.debug("resolved configuration from %s", source or "defaults")
    return config


def _write_json(path: Path, payload: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    logger.info("wrote %s", path)
    return path


def _load_model(config: RunConfig, checkpoint: Path) -> Tuple[Tracker, ModelParams]:
    tracker = Tracker(config.tracker_config())
    params = tracker.init_params(config.seed)
    load_checkpoint(checkpoint, params)
    return tracker, params


def _load_video(path: Path) -> np.ndarray:
    video = load_tensor(path)
    if video.ndim == 3:
        video = video[..., None]
    if video.ndim != 4:
        raise ShapeError("load_video", video.shape, (), f"{path} must hold [T, H, W] or [T, H, W, C]")
    return video


def cmd_phantom(args: argparse.Namespace) -> None:
    config = _resolve_config(args)
    spec = ood_spec(config.phantom) if args.ood else config.phantom
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    count = config.train_samples if args.count is None else args.count
    config = config.with_overrides(phantom=spec, train_samples=count)
    config.validate()

    out = Path(args.out)
    samples = generate_many(spec, count, spec.seed)
    save_phantom_set(out, samples)
    config.save(out)


def cmd_train(args: argparse.Namespace) -> None:
    resume = Path(args.resume) if args.resume else None
    config = _resolve_config(args, fallback=resume)
    samples = load_phantom_set(args.data) if args.data else None

    params = optim_state = None
    if resume is not None:
        params = Tracker(config.tracker_config()).init_params(config.seed)
        optim_state = load_checkpoint(resume, params)
        logger.info("resuming from %s at step %d", resume, optim_state.step)

    result = train(
        config.tracker_config(),
        config.train,
        config.phantom,
        config.train_samples,
        params=params,
        optim_state=optim_state,
        progress=args.progress,
        samples=samples,
    )
    out = Path(args.out)
    save_checkpoint(out, result.params, result.optim_state)
    save_loss_curve(out / "loss.csv", result.epoch_losses)
    config.save(out)
    logger.info("%r", result)


def cmd_track(args: argparse.Namespace) -> None:
    checkpoint = Path(args.checkpoint)
    config = _resolve_config(args, fallback=checkpoint)
    tracker, params = _load_model(config, checkpoint)
    video = _load_video(Path(args.video))
    queries = load_queries(args.queries)

    predicted = tracker.track(video, queries, params, args.query_frame)
    query_frame_drift(predicted, queries, args.query_frame)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_trajectories(out, predicted)
    config.save(out.parent)
    logger.info("wrote %s trajectories to %s", "x".join(str(s) for s in predicted.shape), out)


def eval_report(
    predicted: np.ndarray,
    reference: np.ndarray,
    height: int,
    width: int,
    query_frame: int = 0,
    pixel_spacing: Optional[float] = None,
) -> Dict[str, Any]:
    """Tracking metrics, static-baseline comparison and GLS of one prediction."""
    metrics = evaluate(EvalFrame.from_pixels(predicted, reference, height, width))
    static = static_baseline(reference[query_frame], reference.shape[0])
    baseline = evaluate(EvalFrame.from_pixels(static, reference, height, width))
    report: Dict[str, Any] = {
        "tracking": metrics.to_dict(),
        "static_baseline": baseline.to_dict(),
        "improvement_over_static": relative_improvement(metrics, baseline),
        "frames": int(reference.shape[0]),
        "points": int(reference.shape[1]),
        "input_resolution": [int(height), int(width)],
    }
    if reference.shape[1] >= 2:
        order = np.arange(reference.shape[1])
        try:
            predicted_gls = gls(predicted, order, pixel_spacing).peak_gls
            reference_gls = gls(reference, order, pixel_spacing).peak_gls
        except MetricError as exc:
            logger.warning("GLS skipped: %s", exc)
        else:
            report["gls"] = {
                "predicted": predicted_gls,
                "reference": reference_gls,
                "difference": predicted_gls - reference_gls,
            }
    return report


def eval_markdown(report: Dict[str, Any]) -> str:
    tracking, baseline = report["tracking"], report["static_baseline"]
    keys = ("delta_1", "delta_2", "delta_4", "delta_avg", "mte")
    lines = [
        "### Tracking evaluation",
        "",
        "| method | " + " | ".join(keys) + " |",
        "|---|" + "|".join("---" for _ in keys) + "|",
        "| prediction | " + " | ".join(f"{tracking[k]:.4f}" for k in keys) + " |",
        "| static | " + " | ".join(f"{baseline[k]:.4f}" for k in keys) + " |",
    ]
    if "gls" in report:
        g = report["gls"]
        lines += ["", f"Peak GLS: predicted {g['predicted']:.2f}%, reference {g['reference']:.2f}%"]
    return "\n".join(lines) + "\n"


def cmd_eval(args: argparse.Namespace) -> None:
    config = _resolve_config(args)
    predicted = load_trajectories(args.pred)
    reference = load_trajectories(args.ref)
    height = config.phantom.height if args.height is None else args.height
    width = config.phantom.width if args.width is None else args.width

    report = eval_report(predicted, reference, height, width, args.query_frame, args.pixel_spacing)
    out = Path(args.out)
    _write_json(out / "report.json", report)
    (out / "report.md").write_text(eval_markdown(report))
    config.save(out)


def cmd_ablate(args: argparse.Namespace) -> None:
    config = _resolve_config(args)
    report = ablation_run(args.axis, config, args.variants, progress=args.progress)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.to_csv(out / f"ablation_{args.axis}.csv")
    (out / f"ablation_{args.axis}.md").write_text(report.to_markdown())
    config.save(out)
    logger.info("wrote ablation tables for axis '%s' to %s", args.axis, out)


def cmd_bench(args: argparse.Namespace) -> None:
    checkpoint = Path(args.checkpoint)
    config = _resolve_config(args, fallback=checkpoint)
    tracker, params = _load_model(config, checkpoint)
    if args.data:
        pairs = [(s.video, s.queries) for s in load_phantom_set(args.data)]
    else:
        if not args.videos or not args.queries:
            raise ConfigError("bench needs --data or both --videos and --queries")
        queries = load_queries(args.queries)
        pairs = [(_load_video(Path(v)), queries) for v in args.videos]

    report = ait(tracker, params, pairs)
    out = Path(args.out)
    _write_json(out / "bench.json", report.to_dict())
    config.save(out)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration JSON file or artifact directory")
    common.add_argument("--deterministic", action="store_true", help="one worker and fixed reduction order")
    common.add_argument("--log-level", default="INFO", choices=LOG_LEVELS)

    parser = argparse.ArgumentParser(prog="myotrack", description="Myocardial point tracking")
    commands = parser.add_subparsers(dest="command", required=True)

    phantom = commands.add_parser("phantom", parents=[common], help="generate a phantom dataset")
    phantom.add_argument("--out", required=True)
    phantom.add_argument("--count", type=int, help="number of samples (default: train_samples)")
    phantom.add_argument("--seed", type=int, help="first sample seed (default: phantom.seed)")
    phantom.add_argument("--ood", action="store_true", help="use the out-of-distribution phantom preset")
    phantom.set_defaults(handler=cmd_phantom)

    train_cmd = commands.add_parser("train", parents=[common], help="train a tracker")
    train_cmd.add_argument("--out", required=True, help="checkpoint directory")
    train_cmd.add_argument("--data", help="phantom dataset directory (default: generate from the config)")
    train_cmd.add_argument("--resume", help="checkpoint to continue from")
    train_cmd.add_argument("--progress", action="store_true")
    train_cmd.set_defaults(handler=cmd_train)

    track = commands.add_parser("track", parents=[common], help="track points through a video")
    track.add_argument("--checkpoint", required=True)
    track.add_argument("--video", required=True, help="EMT2 container [T, H, W] or [T, H, W, C]")
    track.add_argument("--queries", required=True, help="query points as CSV (i,x,y) or EMT2 [N, 2]")
    track.add_argument("--query-frame", type=int, default=0)
    track.add_argument("--out", required=True, help="trajectory file (.csv or EMT2)")
    track.set_defaults(handler=cmd_track)

    evaluate_cmd = commands.add_parser("eval", parents=[common], help="score predicted trajectories")
    evaluate_cmd.add_argument("--pred", required=True)
    evaluate_cmd.add_argument("--ref", required=True)
    evaluate_cmd.add_argument("--height", type=int, help="video height (default: phantom.height)")
    evaluate_cmd.add_argument("--width", type=int, help="video width (default: phantom.width)")
    evaluate_cmd.add_argument("--query-frame", type=int, default=0)
    evaluate_cmd.add_argument("--pixel-spacing", type=float, help="mm per pixel for GLS lengths")
    evaluate_cmd.add_argument("--out", required=True)
    evaluate_cmd.set_defaults(handler=cmd_eval)

    ablate = commands.add_parser("ablate", parents=[common], help="run an ablation axis")
    ablate.add_argument("--axis", required=True, choices=tuple(ABLATION_AXES))
    ablate.add_argument("--variants", nargs="+", help="subset of the axis variants")
    ablate.add_argument("--out", required=True)
    ablate.add_argument("--progress", action="store_true")
    ablate.set_defaults(handler=cmd_ablate)

    bench = commands.add_parser("bench", parents=[common], help="measure average inference time")
    bench.add_argument("--checkpoint", required=True)
    bench.add_argument("--data", help="phantom dataset directory")
    bench.add_argument("--videos", nargs="+")
    bench.add_argument("--queries")
    bench.add_argument("--out", required=True)
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        args.handler(args)
    except INVALID_INPUT_ERRORS as exc:
        logger.error("%s", exc)
        return EXIT_INVALID
    except Exception as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        logger.debug("traceback", exc_info=True)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
