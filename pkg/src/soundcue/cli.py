"""Command line front end.

Subcommands:
  detect  one WAV + pattern manifest -> timeline document
  synth   timeline document + scene document -> curve tables + spawn list
  run     detect every input track, merge, synth (one-shot pipeline)
  gen     render a synthetic fixture plan into WAVs + ground truth

Exit codes: 0 success, 2 input/validation error, 64 usage error. All
randomness flows from --seed / document seeds; outputs are byte-identical
across runs for identical inputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import docio, scene, synthgen, timeline
from .audio import load_wav, save_wav
from .correlate import CorrelationTrace, moving_average, normalized_cross_correlate
from .detect import DetectorConfig, SoundPattern, detect
from .errors import SchemaError, SoundCueError
from .timeline import PatternKind, Timeline

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_USAGE = 64


@dataclass(frozen=True)
class InvocationResult:
    exit_code: int
    outputs: tuple


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_detect_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--impulse-threshold", type=float, default=0.5)
    p.add_argument("--continuous-threshold", type=float, default=0.5)
    p.add_argument("--min-continuous-duration", type=float, default=0.15)
    p.add_argument("--no-suppression", action="store_true", help="keep all candidate peaks")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="soundcue", description="Sound-cue detection and event-synchronized animation synthesis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect pattern instances in a recording")
    p.add_argument("sequence", help="input WAV recording")
    p.add_argument("--patterns", required=True, help="pattern manifest (JSON list of {id, path, kind})")
    p.add_argument("--track-id", default=None, help="track name (default: WAV file stem)")
    _add_detect_flags(p)
    p.add_argument("--report", action="store_true", help="also write the correlation traces as CSV")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("synth", help="synthesize animation from a timeline and a scene")
    p.add_argument("timeline", help="timeline document")
    p.add_argument("--scene", required=True, help="scene document")
    p.add_argument("--fps", type=float, default=None, help="override the scene fps")
    p.add_argument("--seed", type=int, default=None, help="override the scene seed")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("run", help="detect + merge + synth in one step")
    p.add_argument(
        "--track",
        action="append",
        default=None,
        metavar="NAME=WAV",
        help="input soundtrack as track-name=path (repeatable)",
    )
    p.add_argument("--patterns", required=True)
    p.add_argument("--scene", required=True)
    _add_detect_flags(p)
    p.add_argument("--fps", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("gen", help="generate a synthetic fixture from a plan")
    p.add_argument("--plan", required=True, help="fixture plan document")
    p.add_argument("--seed", type=int, default=None, help="override the plan seed")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_gen)
    return parser


def _load_manifest(path) -> list[SoundPattern]:
    manifest_path = Path(path)
    entries = docio.as_array(docio.parse_json(manifest_path.read_text(encoding="utf-8"), "manifest"), "")
    patterns = []
    for i, obj in enumerate(entries):
        where = f"[{i}]"
        docio.as_object(obj, where)
        docio.reject_unknown(obj, {"id", "path", "kind"}, where)
        pattern_id = docio.as_string(docio.get(obj, "id", where), f"{where}.id")
        rel = docio.as_string(docio.get(obj, "path", where), f"{where}.path")
        kind_name = docio.as_string(docio.get(obj, "kind", where), f"{where}.kind")
        try:
            kind = PatternKind(kind_name)
        except ValueError:
            raise SchemaError(f"{where}.kind", f"unknown pattern kind {kind_name!r}") from None
        clip = load_wav(manifest_path.parent / rel)
        try:
            patterns.append(SoundPattern(id=pattern_id, clip=clip, kind=kind))
        except ValueError as exc:
            raise SchemaError(where, str(exc)) from exc
    return patterns


def _detector_config(args) -> DetectorConfig:
    try:
        return DetectorConfig(
            impulse_threshold=args.impulse_threshold,
            continuous_threshold=args.continuous_threshold,
            continuous_min_duration_s=args.min_continuous_duration,
            suppression=not args.no_suppression,
        )
    except ValueError as exc:
        raise SoundCueError(str(exc)) from exc


def _detect_track(wav_path: str, track_id, patterns, cfg) -> Timeline:
    sequence = load_wav(wav_path)
    if track_id is None:
        track_id = Path(wav_path).stem
    return detect(sequence, patterns, cfg, track_id=track_id, source_audio=str(wav_path))


def _correlation_report(wav_path: str, patterns, cfg) -> str:
    """Wide CSV of the per-pattern detection traces, for plotting."""
    sequence = load_wav(wav_path)
    columns = [("t", None)]
    traces = []
    for pattern in sorted(patterns, key=lambda p: p.id):
        trace = normalized_cross_correlate(sequence, pattern.clip)
        columns.append((f"ncc_{pattern.id}", trace.values))
        if pattern.kind is PatternKind.CONTINUOUS:
            rectified = CorrelationTrace(np.abs(trace.values), trace.sample_rate_hz, True)
            averaged = moving_average(rectified, pattern.duration_s)
            columns.append((f"avg_{pattern.id}", averaged.values))
        traces.append(trace)
    times = traces[0].lag_times_s() if traces else np.zeros(0)
    header = ",".join(name for name, _ in columns)
    data = np.column_stack([times] + [values for _, values in columns[1:]]) if traces else np.zeros((0, 1))
    rows = "\n".join(",".join(repr(float(v)) for v in row) for row in data)
    return header + "\n" + rows + ("\n" if rows else "")


def cmd_detect(args) -> InvocationResult:
    patterns = _load_manifest(args.patterns)
    cfg = _detector_config(args)
    result = _detect_track(args.sequence, args.track_id, patterns, cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    track_id = result.tracks[0].track_id
    outputs = []
    timeline_path = out_dir / f"{track_id}.timeline.json"
    timeline.write_timeline(result, timeline_path)
    outputs.append(timeline_path)
    if args.report:
        report_path = out_dir / f"{track_id}.correlation.csv"
        report_path.write_text(_correlation_report(args.sequence, patterns, cfg), encoding="utf-8")
        outputs.append(report_path)
    events = result.tracks[0].events
    print(f"detected {len(events)} event(s) on track {track_id!r} -> {timeline_path}")
    return InvocationResult(EXIT_OK, tuple(outputs))


def _write_animation(tl: Timeline, scene_cfg, out_dir: Path) -> tuple[list[Path], scene.AnimationOutput]:
    output = scene.build_animation(tl, scene_cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    from .animate import curves_to_csv

    for curves in output.curves:
        path = out_dir / f"{curves.object_id}_curves.csv"
        path.write_text(curves_to_csv(curves), encoding="utf-8")
        written.append(path)
    doc_path = out_dir / "animation.json"
    doc_path.write_text(scene.animation_document(output), encoding="utf-8")
    written.append(doc_path)
    return written, output


def _scene_overrides(cfg, args):
    if args.fps is not None:
        cfg = dataclasses.replace(cfg, fps=args.fps)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    return cfg


def _consumed(tl: Timeline, cfg) -> int:
    count = 0
    tracks = {t.track_id: t for t in tl.tracks}
    for obj in cfg.objects:
        track = tracks.get(obj.track_id)
        if track is None:
            continue
        count += sum(1 for e in track.events if e.pattern_id in obj.bindings)
    return count


def cmd_synth(args) -> InvocationResult:
    tl = timeline.read_timeline(args.timeline)
    scene_cfg = _scene_overrides(scene.parse_scene(Path(args.scene).read_text(encoding="utf-8")), args)
    written, output = _write_animation(tl, scene_cfg, Path(args.out_dir))
    print(
        f"synthesized {len(output.curves)} object(s), {_consumed(tl, scene_cfg)} event(s) consumed, "
        f"{output.duration_s:.3f} s at {output.fps} fps, {len(output.spawns)} spawn(s)"
    )
    return InvocationResult(EXIT_OK, tuple(written))


def _usage_error(message: str) -> SystemExit:
    print(f"soundcue: error: {message}", file=sys.stderr)
    return SystemExit(EXIT_USAGE)


def cmd_run(args) -> InvocationResult:
    if not args.track:
        raise _usage_error("run needs at least one --track NAME=WAV")
    specs = []
    for item in args.track:
        name, sep, wav = item.partition("=")
        if not sep or not name or not wav:
            raise _usage_error(f"--track expects NAME=WAV, got {item!r}")
        specs.append((name, wav))
    patterns = _load_manifest(args.patterns)
    cfg = _detector_config(args)
    merged = timeline.merge([_detect_track(wav, name, patterns, cfg) for name, wav in specs])
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    timeline_path = out_dir / "timeline.json"
    timeline.write_timeline(merged, timeline_path)
    scene_cfg = _scene_overrides(
        scene.parse_scene(
            Path(args.scene).read_text(encoding="utf-8"),
            pattern_kinds={p.id: p.kind for p in patterns},
        ),
        args,
    )
    written, output = _write_animation(merged, scene_cfg, out_dir)
    n_events = sum(len(t.events) for t in merged.tracks)
    print(
        f"detected {n_events} event(s) on {len(merged.tracks)} track(s); "
        f"synthesized {len(output.curves)} object(s), {len(output.spawns)} spawn(s) -> {out_dir}"
    )
    return InvocationResult(EXIT_OK, (timeline_path, *written))


def cmd_gen(args) -> InvocationResult:
    plan = synthgen.parse_plan(Path(args.plan).read_text(encoding="utf-8"))
    if args.seed is not None:
        plan = plan.with_seed(args.seed)
    sequence, clips = synthgen.realize(plan)
    out_dir = Path(args.out_dir)
    pattern_dir = out_dir / "patterns"
    pattern_dir.mkdir(parents=True, exist_ok=True)
    outputs = []

    sequence_path = out_dir / "sequence.wav"
    save_wav(sequence, sequence_path, sample_format="float32")
    outputs.append(sequence_path)

    manifest = []
    for definition in plan.patterns:
        wav_path = pattern_dir / f"{definition.id}.wav"
        save_wav(clips[definition.id], wav_path, sample_format="float32")
        outputs.append(wav_path)
        manifest.append({"id": definition.id, "kind": definition.kind.value, "path": f"patterns/{definition.id}.wav"})
    manifest_path = out_dir / "patterns.json"
    manifest_path.write_text(docio.dump_json(manifest), encoding="utf-8")
    outputs.append(manifest_path)

    truth_path = out_dir / "groundtruth.json"
    truth_path.write_text(synthgen.serialize_plan(plan), encoding="utf-8")
    outputs.append(truth_path)
    print(f"generated {sequence.duration_s:.3f} s fixture with {len(plan.patterns)} pattern(s) -> {out_dir}")
    return InvocationResult(EXIT_OK, tuple(outputs))


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args).exit_code
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (SoundCueError, OSError, ValueError) as exc:
        print(f"soundcue: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
