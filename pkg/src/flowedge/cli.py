"""Command line entry point.

Subcommands: ``run`` (full pipeline), ``eval`` (detection metrics),
``mot-eval`` (CLEAR-MOT), ``synth emit`` (render a preset or script file),
and ``dump-config``. Exit codes: 0 success, 1 usage, 2 I/O problem,
3 data-format problem.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import frameio, pipeline, synth
from .evaluation import format_report
from .frameio import DataFormatError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_FORMAT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="flowedge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run the refinement pipeline on a frame directory")
    _add_config_args(run)
    run.add_argument("--frames", help="shortcut for io.frames_dir")
    run.add_argument("--masks", help="shortcut for io.masks_dir")
    run.add_argument("--out", help="shortcut for io.output_dir")
    run.add_argument("--gt", help="shortcut for io.gt_path")

    ev = sub.add_parser("eval", help="detection precision/recall for a box CSV")
    ev.add_argument("detections")
    ev.add_argument("ground_truth")
    ev.add_argument("--iou", type=float, default=0.30)
    ev.add_argument("--out", help="report output prefix")

    mot = sub.add_parser("mot-eval", help="CLEAR-MOT metrics for a track file")
    mot.add_argument("tracks")
    mot.add_argument("ground_truth")
    mot.add_argument("--iou", type=float, default=0.30)
    mot.add_argument("--out", help="report output prefix")

    sy = sub.add_parser("synth", help="synthetic scene generation")
    sy.add_argument("action", choices=["emit"])
    sy.add_argument("preset", help="preset name or path to a scene script file")
    sy.add_argument("outdir")

    dump = sub.add_parser("dump-config", help="print the effective configuration")
    _add_config_args(dump)
    return parser


def _add_config_args(sub) -> None:
    sub.add_argument("--config", help="key = value config file")
    sub.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config key (repeatable)",
    )


def _make_config(args) -> pipeline.PipelineConfig:
    cfg = pipeline.PipelineConfig()
    if args.config:
        pipeline.load_config_file(cfg, args.config)
    for item in args.overrides:
        if "=" not in item:
            raise DataFormatError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        pipeline.set_config_key(cfg, key.strip(), value)
    return cfg


def _cmd_run(args) -> int:
    cfg = _make_config(args)
    if args.frames:
        cfg.frames_dir = args.frames
    if args.masks:
        cfg.masks_dir = args.masks
    if args.out:
        cfg.output_dir = args.out
    if args.gt:
        cfg.gt_path = args.gt
    if not cfg.frames_dir:
        print("flowedge run: no frames directory configured", file=sys.stderr)
        return EXIT_USAGE
    summary = pipeline.run_pipeline(cfg)
    print(f"processed {summary['frames']} frames -> {summary['output_dir']}")
    print(f"raw boxes: {summary['raw_boxes']}, refined boxes: {summary['refined_boxes']}")
    for name in ("raw_report", "refined_report"):
        if name in summary:
            print(f"[{name}]")
            print(format_report(summary[name]))
    return EXIT_OK


def _cmd_eval(args) -> int:
    report = pipeline.run_eval(args.detections, args.ground_truth, args.iou, args.out)
    print(format_report(report))
    return EXIT_OK


def _cmd_mot_eval(args) -> int:
    report = pipeline.run_mot_eval(args.tracks, args.ground_truth, args.iou, args.out)
    print(format_report(report))
    return EXIT_OK


def _cmd_synth(args) -> int:
    source = Path(args.preset)
    if source.is_file():
        script = synth.script_from_text(source.read_text())
    else:
        script = synth.preset(args.preset)
    frames, gt = synth.render(script)
    outdir = Path(args.outdir)
    frames_dir = outdir / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames):
        frameio.write_frame(frames_dir / f"{i:06d}.png", frame)
    frameio.write_annotations_csv(
        outdir / "gt.csv",
        [(e.frame_index, e.object_id, e.box, e.class_label) for e in gt],
    )
    (outdir / "script.txt").write_text(synth.script_to_text(script))
    print(f"wrote {len(frames)} frames and {len(gt)} ground-truth boxes to {outdir}")
    return EXIT_OK


def _cmd_dump_config(args) -> int:
    cfg = _make_config(args)
    cfg.validate()
    print(pipeline.dump_config(cfg), end="")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    handlers = {
        "run": _cmd_run,
        "eval": _cmd_eval,
        "mot-eval": _cmd_mot_eval,
        "synth": _cmd_synth,
        "dump-config": _cmd_dump_config,
    }
    try:
        return handlers[args.command](args)
    except DataFormatError as exc:
        print(f"flowedge: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except FileNotFoundError as exc:
        print(f"flowedge: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"flowedge: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"flowedge: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
