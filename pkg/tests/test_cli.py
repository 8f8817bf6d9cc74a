import json
from pathlib import Path

import pytest

from soundcue import read_timeline
from soundcue.cli import main

SR = 44100


def write_plan(path: Path, **overrides):
    plan = {
        "duration_s": 6.0,
        "sample_rate_hz": SR,
        "seed": 7,
        "noise_rms": 0.02,
        "patterns": [
            {"id": "tick", "kind": "impulse", "shape": "tonal_burst", "duration_s": 0.12, "seed": 1},
            {"id": "poc", "kind": "impulse", "shape": "noise_burst", "duration_s": 0.10, "seed": 2},
            {"id": "chhh", "kind": "continuous", "shape": "tonal_burst", "duration_s": 0.25, "seed": 3},
        ],
        "planted": [
            {"pattern": "tick", "t": 0.5},
            {"pattern": "poc", "t": 1.5, "amplitude": 0.8},
            {"pattern": "chhh", "t_begin": 2.2, "t_end": 3.2},
            {"pattern": "tick", "t": 4.5, "amplitude": 0.6},
        ],
    }
    plan.update(overrides)
    path.write_text(json.dumps(plan), encoding="utf-8")
    return plan


def write_scene(path: Path, doc=None):
    doc = doc or {
        "fps": 100,
        "seed": 42,
        "objects": [
            {
                "object_id": "ball",
                "track_id": "take",
                "bindings": {
                    "tick": {"kind": "bounce_hard"},
                    "chhh": {"kind": "slide"},
                    "poc": {"kind": "spawn_raindrop"},
                },
            }
        ],
    }
    path.write_text(json.dumps(doc), encoding="utf-8")
    return doc


@pytest.fixture()
def fixture_dir(tmp_path):
    plan_path = tmp_path / "plan.json"
    write_plan(plan_path)
    out = tmp_path / "fixture"
    assert main(["gen", "--plan", str(plan_path), "--out-dir", str(out)]) == 0
    return out


class TestGen:
    def test_outputs_exist(self, fixture_dir):
        assert (fixture_dir / "sequence.wav").exists()
        assert (fixture_dir / "patterns.json").exists()
        assert (fixture_dir / "groundtruth.json").exists()
        assert (fixture_dir / "patterns" / "tick.wav").exists()

    def test_same_seed_byte_identical(self, tmp_path):
        plan_path = tmp_path / "plan.json"
        write_plan(plan_path)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["gen", "--plan", str(plan_path), "--out-dir", str(a)]) == 0
        assert main(["gen", "--plan", str(plan_path), "--out-dir", str(b)]) == 0
        assert (a / "sequence.wav").read_bytes() == (b / "sequence.wav").read_bytes()
        assert (a / "groundtruth.json").read_bytes() == (b / "groundtruth.json").read_bytes()

    def test_plan_outside_duration_exit_2(self, tmp_path, capsys):
        plan_path = tmp_path / "plan.json"
        write_plan(plan_path, planted=[{"pattern": "tick", "t": 5.95}])
        assert main(["gen", "--plan", str(plan_path), "--out-dir", str(tmp_path / "o")]) == 2
        assert "tick" in capsys.readouterr().err

    def test_seed_flag_overrides_plan(self, tmp_path):
        plan_path = tmp_path / "plan.json"
        write_plan(plan_path)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["gen", "--plan", str(plan_path), "--out-dir", str(a), "--seed", "99"]) == 0
        assert main(["gen", "--plan", str(plan_path), "--out-dir", str(b)]) == 0
        assert (a / "sequence.wav").read_bytes() != (b / "sequence.wav").read_bytes()
        assert json.loads((a / "groundtruth.json").read_text())["seed"] == 99


class TestDetect:
    def test_recovers_ground_truth(self, fixture_dir, tmp_path):
        out = tmp_path / "det"
        code = main([
            "detect", str(fixture_dir / "sequence.wav"),
            "--patterns", str(fixture_dir / "patterns.json"),
            "--track-id", "take", "--out-dir", str(out),
        ])
        assert code == 0
        tl = read_timeline(out / "take.timeline.json")
        truth = json.loads((fixture_dir / "groundtruth.json").read_text())
        events = tl.tracks[0].events
        impulses = [e for e in events if e.kind.value == "impulse"]
        planted_impulses = [p for p in truth["planted"] if "t" in p]
        assert len(impulses) == len(planted_impulses)
        for event, planted in zip(impulses, sorted(planted_impulses, key=lambda p: p["t"])):
            assert event.pattern_id == planted["pattern"]
            assert abs(event.t_s - planted["t"]) < 0.010
        (segment,) = [e for e in events if e.kind.value == "continuous"]
        assert abs(segment.t_begin_s - 2.2) <= 0.25
        assert abs(segment.t_end_s - 3.2) <= 0.25

    def test_missing_pattern_file_exit_2(self, fixture_dir, tmp_path, capsys):
        manifest = json.loads((fixture_dir / "patterns.json").read_text())
        manifest[0]["path"] = "patterns/ghost.wav"
        broken = fixture_dir / "broken.json"
        broken.write_text(json.dumps(manifest))
        code = main([
            "detect", str(fixture_dir / "sequence.wav"),
            "--patterns", str(broken), "--out-dir", str(tmp_path / "o"),
        ])
        assert code == 2
        assert "ghost.wav" in capsys.readouterr().err

    def test_high_threshold_drops_degraded_instance(self, tmp_path):
        plan_path = tmp_path / "plan.json"
        write_plan(
            plan_path,
            noise_rms=0.0,
            planted=[
                {"pattern": "tick", "t": 0.5},
                {"pattern": "tick", "t": 2.0, "distort": 0.5714, "distort_seed": 99},
            ],
        )
        fixture = tmp_path / "fx"
        assert main(["gen", "--plan", str(plan_path), "--out-dir", str(fixture)]) == 0
        args = ["detect", str(fixture / "sequence.wav"), "--patterns", str(fixture / "patterns.json"),
                "--track-id", "take"]
        low, high = tmp_path / "low", tmp_path / "high"
        assert main(args + ["--out-dir", str(low)]) == 0
        assert main(args + ["--out-dir", str(high), "--impulse-threshold", "0.9"]) == 0
        low_events = read_timeline(low / "take.timeline.json").tracks[0].events
        high_events = read_timeline(high / "take.timeline.json").tracks[0].events
        low_ticks = [e for e in low_events if abs(e.t_s - 2.0) < 0.01]
        assert len(low_ticks) == 1 and 0.5 < low_ticks[0].peak_correlation < 0.9
        assert [e for e in high_events if abs(e.t_s - 2.0) < 0.01] == []
        assert [e.t_s for e in high_events] == [e.t_s for e in low_events if abs(e.t_s - 2.0) >= 0.01]

    def test_min_continuous_duration_flag(self, fixture_dir, tmp_path):
        args = ["detect", str(fixture_dir / "sequence.wav"), "--patterns", str(fixture_dir / "patterns.json"),
                "--track-id", "take"]
        strict = tmp_path / "strict"
        assert main(args + ["--out-dir", str(strict), "--min-continuous-duration", "2.0"]) == 0
        events = read_timeline(strict / "take.timeline.json").tracks[0].events
        assert [e for e in events if e.kind.value == "continuous"] == []
        assert [e for e in events if e.kind.value == "impulse"] != []

    def test_report_writes_traces(self, fixture_dir, tmp_path):
        out = tmp_path / "rep"
        code = main([
            "detect", str(fixture_dir / "sequence.wav"),
            "--patterns", str(fixture_dir / "patterns.json"),
            "--track-id", "take", "--out-dir", str(out), "--report",
        ])
        assert code == 0
        header = (out / "take.correlation.csv").read_text().splitlines()[0]
        assert header == "t,ncc_chhh,avg_chhh,ncc_poc,ncc_tick"


class TestSynth:
    def test_bounce_fixture_apex(self, tmp_path):
        timeline_doc = {
            "duration_s": 3.0,
            "tracks": [
                {"track_id": "take", "events": [
                    {"kind": "impulse", "pattern": "tick", "t": 1.0, "strength": 1.0, "peak_correlation": 0.95},
                    {"kind": "impulse", "pattern": "tick", "t": 2.0, "strength": 1.0, "peak_correlation": 0.95},
                ]}
            ],
        }
        tl_path = tmp_path / "take.timeline.json"
        tl_path.write_text(json.dumps(timeline_doc))
        scene_path = tmp_path / "scene.json"
        write_scene(scene_path)
        out = tmp_path / "anim"
        assert main(["synth", str(tl_path), "--scene", str(scene_path), "--out-dir", str(out)]) == 0
        rows = (out / "ball_curves.csv").read_text().splitlines()[1:]
        values = {float(r.split(",")[0]): float(r.split(",")[3]) for r in rows}
        assert values[1.5] == pytest.approx(1.22625, abs=1e-9)
        assert values[1.0] == pytest.approx(0.0, abs=1e-9)

    def test_unknown_track_exit_2(self, tmp_path, capsys):
        tl_path = tmp_path / "t.timeline.json"
        tl_path.write_text(json.dumps({"duration_s": 1.0, "tracks": []}))
        scene_path = tmp_path / "scene.json"
        write_scene(scene_path)
        assert main(["synth", str(tl_path), "--scene", str(scene_path), "--out-dir", str(tmp_path / "o")]) == 2
        assert "take" in capsys.readouterr().err

    def test_seed_flag_changes_only_raindrops(self, fixture_dir, tmp_path):
        scene_path = tmp_path / "scene.json"
        write_scene(scene_path)
        det = tmp_path / "det"
        assert main([
            "detect", str(fixture_dir / "sequence.wav"),
            "--patterns", str(fixture_dir / "patterns.json"),
            "--track-id", "take", "--out-dir", str(det),
        ]) == 0
        a, b = tmp_path / "a", tmp_path / "b"
        base = ["synth", str(det / "take.timeline.json"), "--scene", str(scene_path)]
        assert main(base + ["--out-dir", str(a)]) == 0
        assert main(base + ["--out-dir", str(b), "--seed", "43"]) == 0
        assert (a / "ball_curves.csv").read_bytes() == (b / "ball_curves.csv").read_bytes()
        da = json.loads((a / "animation.json").read_text())
        db = json.loads((b / "animation.json").read_text())
        assert [s["t"] for s in da["spawns"]] == [s["t"] for s in db["spawns"]]
        assert [s["size"] for s in da["spawns"]] == [s["size"] for s in db["spawns"]]
        assert [s["position"] for s in da["spawns"]] != [s["position"] for s in db["spawns"]]


class TestRun:
    def test_single_track_equals_detect_then_synth(self, fixture_dir, tmp_path):
        scene_path = tmp_path / "scene.json"
        write_scene(scene_path)
        run_out = tmp_path / "run"
        assert main([
            "run", "--track", f"take={fixture_dir / 'sequence.wav'}",
            "--patterns", str(fixture_dir / "patterns.json"),
            "--scene", str(scene_path), "--out-dir", str(run_out),
        ]) == 0
        det = tmp_path / "det"
        assert main([
            "detect", str(fixture_dir / "sequence.wav"),
            "--patterns", str(fixture_dir / "patterns.json"),
            "--track-id", "take", "--out-dir", str(det),
        ]) == 0
        synth_out = tmp_path / "synth"
        assert main([
            "synth", str(det / "take.timeline.json"), "--scene", str(scene_path),
            "--out-dir", str(synth_out),
        ]) == 0
        assert (run_out / "timeline.json").read_bytes() == (det / "take.timeline.json").read_bytes()
        assert (run_out / "ball_curves.csv").read_bytes() == (synth_out / "ball_curves.csv").read_bytes()
        assert (run_out / "animation.json").read_bytes() == (synth_out / "animation.json").read_bytes()

    def test_zero_tracks_usage_error(self, fixture_dir, tmp_path):
        scene_path = tmp_path / "scene.json"
        write_scene(scene_path)
        code = main([
            "run", "--patterns", str(fixture_dir / "patterns.json"),
            "--scene", str(scene_path), "--out-dir", str(tmp_path / "o"),
        ])
        assert code == 64

    def test_run_deterministic(self, fixture_dir, tmp_path):
        scene_path = tmp_path / "scene.json"
        write_scene(scene_path)
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["run", "--track", f"take={fixture_dir / 'sequence.wav'}",
                "--patterns", str(fixture_dir / "patterns.json"), "--scene", str(scene_path)]
        assert main(args + ["--out-dir", str(a)]) == 0
        assert main(args + ["--out-dir", str(b)]) == 0
        for name in ("timeline.json", "ball_curves.csv", "animation.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()


class TestUsage:
    def test_no_command_is_usage_error(self):
        assert main([]) == 64

    def test_unknown_flag_is_usage_error(self):
        assert main(["detect", "x.wav", "--patterns", "p.json", "--frobnicate"]) == 64

    def test_console_script_runs(self):
        import subprocess
        import sys

        result = subprocess.run(
            [sys.executable, "-m", "soundcue.cli", "--help"], capture_output=True, text=True
        )
        assert result.returncode == 0
        assert "detect" in result.stdout
