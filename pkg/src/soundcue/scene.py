"""Scene configuration: which pattern triggers which action on which object.

A scene document is JSON with global settings (fps, seed, gravity) and a
list of objects, each bound to one timeline track and carrying a map
from pattern id to action. Parsing fills every default explicitly, so a
parsed config re-serializes to a self-contained document and
parse(serialize(cfg)) is the identity.

Action kinds and the pattern kinds they require:
  bounce_hard, bounce_soft, spawn_dart, spawn_laser_low,
  spawn_laser_high, spawn_raindrop        -> impulse patterns
  slide, move_up, move_down               -> continuous patterns
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from . import docio
from .animate import (
    BallisticParams,
    FixedPlacement,
    LanePlacement,
    PlacementRule,
    SquashParams,
    TailMode,
    UniformRectPlacement,
    on_axis,
    sample,
    slide_segment,
    solve_bounce,
    spawn_from_impulses,
    squash_profile,
    steer_vertical,
)
from .errors import SceneError, SchemaError
from .timeline import PatternKind, Timeline

logger = logging.getLogger(__name__)

_SPAWN_ENTITY = {
    "spawn_dart": "dart",
    "spawn_laser_low": "laser_low",
    "spawn_laser_high": "laser_high",
    "spawn_raindrop": "raindrop",
}
_DEFAULT_PLACEMENT = {
    "spawn_dart": FixedPlacement((0.0, 0.0, 0.0)),
    "spawn_laser_low": LanePlacement(0.5),
    "spawn_laser_high": LanePlacement(1.5),
    "spawn_raindrop": UniformRectPlacement((-5.0, 5.0), (-5.0, 5.0)),
}
_DEFAULT_SIZE_PER_STRENGTH = {
    "spawn_dart": 0.1,
    "spawn_laser_low": 0.0,
    "spawn_laser_high": 0.0,
    "spawn_raindrop": 0.1,
}


@dataclass(frozen=True)
class BounceAction:
    soft: bool
    squash: SquashParams = SquashParams()
    drift_speed: float = 0.0
    tail: TailMode = TailMode.REST

    @property
    def kind(self) -> str:
        return "bounce_soft" if self.soft else "bounce_hard"

    requires = PatternKind.IMPULSE


@dataclass(frozen=True)
class SlideAction:
    speed: float = 1.0
    squash_amplitude: float = 0.3

    kind = "slide"
    requires = PatternKind.CONTINUOUS


@dataclass(frozen=True)
class SteerAction:
    direction: int  # +1 up, -1 down
    speed: float = 1.0
    z_min: float = 0.0
    z_max: float = 3.0

    @property
    def kind(self) -> str:
        return "move_up" if self.direction > 0 else "move_down"

    requires = PatternKind.CONTINUOUS


@dataclass(frozen=True)
class SpawnAction:
    entity_kind: str
    size_base: float
    size_per_strength: float
    placement: PlacementRule

    @property
    def kind(self) -> str:
        return {v: k for k, v in _SPAWN_ENTITY.items()}[self.entity_kind]

    requires = PatternKind.IMPULSE


ActionSpec = Union[BounceAction, SlideAction, SteerAction, SpawnAction]


@dataclass(frozen=True)
class ObjectSpec:
    object_id: str
    track_id: str
    bindings: Mapping[str, ActionSpec]

    def __post_init__(self):
        object.__setattr__(self, "bindings", dict(self.bindings))


@dataclass(frozen=True)
class SceneConfig:
    objects: tuple
    fps: float = 60.0
    seed: int = 0
    gravity: float = 9.81
    duration_override_s: Optional[float] = None

    def __post_init__(self):
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if self.gravity <= 0:
            raise ValueError(f"gravity must be positive, got {self.gravity}")
        ids = [o.object_id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise ValueError("object ids must be unique")
        object.__setattr__(self, "objects", tuple(self.objects))


@dataclass(frozen=True)
class AnimationOutput:
    curves: tuple  # AnimationCurves per object, in scene order
    spawns: tuple  # SpawnEvent, time-sorted
    fps: float
    seed: int
    duration_s: float


def _parse_placement(obj, path: str) -> PlacementRule:
    docio.as_object(obj, path)
    kind = docio.as_string(docio.get(obj, "kind", path), f"{path}.kind")
    if kind == "fixed":
        docio.reject_unknown(obj, {"kind", "position"}, path)
        raw = docio.as_array(docio.get(obj, "position", path), f"{path}.position")
        if len(raw) != 3:
            raise SchemaError(f"{path}.position", "expected 3 components")
        return FixedPlacement(tuple(docio.as_number(c, f"{path}.position[{i}]") for i, c in enumerate(raw)))
    if kind == "lane":
        docio.reject_unknown(obj, {"kind", "height"}, path)
        return LanePlacement(docio.as_number(docio.get(obj, "height", path), f"{path}.height"))
    if kind == "uniform_rect":
        docio.reject_unknown(obj, {"kind", "x_range", "y_range"}, path)
        ranges = []
        for key in ("x_range", "y_range"):
            raw = docio.as_array(docio.get(obj, key, path), f"{path}.{key}")
            if len(raw) != 2:
                raise SchemaError(f"{path}.{key}", "expected [low, high]")
            lo = docio.as_number(raw[0], f"{path}.{key}[0]")
            hi = docio.as_number(raw[1], f"{path}.{key}[1]")
            if not lo <= hi:
                raise SchemaError(f"{path}.{key}", f"needs low <= high, got [{lo}, {hi}]")
            ranges.append((lo, hi))
        return UniformRectPlacement(*ranges)
    raise SchemaError(f"{path}.kind", f"unknown placement kind {kind!r}")


def _placement_to_obj(placement: PlacementRule) -> dict:
    if isinstance(placement, FixedPlacement):
        return {"kind": "fixed", "position": [float(c) for c in placement.position]}
    if isinstance(placement, LanePlacement):
        return {"kind": "lane", "height": float(placement.height)}
    return {
        "kind": "uniform_rect",
        "x_range": [float(c) for c in placement.x_range],
        "y_range": [float(c) for c in placement.y_range],
    }


def _num(obj, key: str, path: str, default: float) -> float:
    if key not in obj:
        return default
    return docio.as_number(obj[key], f"{path}.{key}")


def _parse_action(obj, path: str) -> ActionSpec:
    docio.as_object(obj, path)
    kind = docio.as_string(docio.get(obj, "kind", path), f"{path}.kind")
    try:
        if kind in ("bounce_hard", "bounce_soft"):
            keys = {"kind", "drift_speed", "tail"}
            soft = kind == "bounce_soft"
            squash = SquashParams()
            if soft:
                keys |= {"squash_amplitude", "squash_duration_s", "strength_scaling", "strength_clamp"}
                scaling = obj.get("strength_scaling", True)
                if "strength_scaling" in obj:
                    scaling = docio.as_boolean(obj["strength_scaling"], f"{path}.strength_scaling")
                squash = SquashParams(
                    amplitude=_num(obj, "squash_amplitude", path, 0.3),
                    duration_s=_num(obj, "squash_duration_s", path, 0.15),
                    strength_scaling=scaling,
                    strength_clamp=_num(obj, "strength_clamp", path, 2.0),
                )
            docio.reject_unknown(obj, keys, path)
            tail_name = obj.get("tail", TailMode.REST.value)
            if "tail" in obj:
                tail_name = docio.as_string(obj["tail"], f"{path}.tail")
            try:
                tail = TailMode(tail_name)
            except ValueError:
                raise SchemaError(f"{path}.tail", f"unknown tail mode {tail_name!r}") from None
            return BounceAction(
                soft=soft, squash=squash, drift_speed=_num(obj, "drift_speed", path, 0.0), tail=tail
            )
        if kind == "slide":
            docio.reject_unknown(obj, {"kind", "speed", "squash_amplitude"}, path)
            return SlideAction(
                speed=_num(obj, "speed", path, 1.0),
                squash_amplitude=_num(obj, "squash_amplitude", path, 0.3),
            )
        if kind in ("move_up", "move_down"):
            docio.reject_unknown(obj, {"kind", "speed", "z_min", "z_max"}, path)
            return SteerAction(
                direction=1 if kind == "move_up" else -1,
                speed=_num(obj, "speed", path, 1.0),
                z_min=_num(obj, "z_min", path, 0.0),
                z_max=_num(obj, "z_max", path, 3.0),
            )
        if kind in _SPAWN_ENTITY:
            docio.reject_unknown(obj, {"kind", "size_base", "size_per_strength", "placement"}, path)
            placement = _DEFAULT_PLACEMENT[kind]
            if "placement" in obj:
                placement = _parse_placement(obj["placement"], f"{path}.placement")
            return SpawnAction(
                entity_kind=_SPAWN_ENTITY[kind],
                size_base=_num(obj, "size_base", path, 0.1),
                size_per_strength=_num(obj, "size_per_strength", path, _DEFAULT_SIZE_PER_STRENGTH[kind]),
                placement=placement,
            )
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc
    raise SchemaError(f"{path}.kind", f"unknown action kind {kind!r}")


def _action_to_obj(action: ActionSpec) -> dict:
    if isinstance(action, BounceAction):
        obj = {"kind": action.kind, "drift_speed": float(action.drift_speed), "tail": action.tail.value}
        if action.soft:
            obj.update(
                squash_amplitude=float(action.squash.amplitude),
                squash_duration_s=float(action.squash.duration_s),
                strength_scaling=action.squash.strength_scaling,
                strength_clamp=float(action.squash.strength_clamp),
            )
        return obj
    if isinstance(action, SlideAction):
        return {"kind": "slide", "speed": float(action.speed), "squash_amplitude": float(action.squash_amplitude)}
    if isinstance(action, SteerAction):
        return {
            "kind": action.kind,
            "speed": float(action.speed),
            "z_min": float(action.z_min),
            "z_max": float(action.z_max),
        }
    return {
        "kind": action.kind,
        "size_base": float(action.size_base),
        "size_per_strength": float(action.size_per_strength),
        "placement": _placement_to_obj(action.placement),
    }


def parse_scene(text, pattern_kinds: Optional[Mapping[str, PatternKind]] = None) -> SceneConfig:
    """Parse and validate a scene document.

    When `pattern_kinds` (the detection dictionary's id -> kind map) is
    given, bindings are checked eagerly: unknown pattern ids and
    action/pattern kind mismatches fail here with a field path instead of
    at synthesis time.
    """
    root = docio.as_object(docio.parse_json(text, "scene") if isinstance(text, str) else text, "")
    docio.reject_unknown(root, {"fps", "seed", "gravity", "duration_override_s", "objects"}, "")
    fps = _num(root, "fps", "", 60.0)
    gravity = _num(root, "gravity", "", 9.81)
    seed = 0
    if "seed" in root:
        seed = docio.as_integer(root["seed"], "seed")
    duration_override = None
    if "duration_override_s" in root and root["duration_override_s"] is not None:
        duration_override = docio.as_number(root["duration_override_s"], "duration_override_s")

    objects = []
    for i, obj in enumerate(docio.as_array(docio.get(root, "objects", ""), "objects")):
        path = f"objects[{i}]"
        docio.as_object(obj, path)
        docio.reject_unknown(obj, {"object_id", "track_id", "bindings"}, path)
        object_id = docio.as_string(docio.get(obj, "object_id", path), f"{path}.object_id")
        track_id = docio.as_string(docio.get(obj, "track_id", path), f"{path}.track_id")
        bindings = {}
        raw_bindings = docio.as_object(docio.get(obj, "bindings", path), f"{path}.bindings")
        for pattern_id, action_obj in raw_bindings.items():
            action_path = f"{path}.bindings[{pattern_id!r}]"
            action = _parse_action(action_obj, action_path)
            if pattern_kinds is not None:
                if pattern_id not in pattern_kinds:
                    raise SchemaError(action_path, f"pattern {pattern_id!r} is not in the dictionary")
                if pattern_kinds[pattern_id] is not action.requires:
                    raise SchemaError(
                        action_path,
                        f"action {action.kind!r} requires a {action.requires.value} pattern "
                        f"but {pattern_id!r} is {pattern_kinds[pattern_id].value}",
                    )
            bindings[pattern_id] = action
        objects.append(ObjectSpec(object_id=object_id, track_id=track_id, bindings=bindings))
    try:
        return SceneConfig(
            objects=tuple(objects),
            fps=fps,
            seed=seed,
            gravity=gravity,
            duration_override_s=duration_override,
        )
    except ValueError as exc:
        raise SchemaError("", str(exc)) from exc


def serialize_scene(cfg: SceneConfig) -> str:
    root = {
        "fps": float(cfg.fps),
        "seed": int(cfg.seed),
        "gravity": float(cfg.gravity),
        "objects": [
            {
                "object_id": o.object_id,
                "track_id": o.track_id,
                "bindings": {pid: _action_to_obj(a) for pid, a in sorted(o.bindings.items())},
            }
            for o in cfg.objects
        ],
    }
    if cfg.duration_override_s is not None:
        root["duration_override_s"] = float(cfg.duration_override_s)
    return docio.dump_json(root)


def binding_seed(master_seed: int, object_id: str, pattern_id: str) -> int:
    """Stable per-binding sub-seed so spawn streams never collide or drift."""
    digest = hashlib.sha256(f"{object_id}\x00{pattern_id}".encode()).digest()
    return (int(master_seed) ^ int.from_bytes(digest[:8], "big")) & ((1 << 63) - 1)


def build_animation(timeline: Timeline, cfg: SceneConfig) -> AnimationOutput:
    """Drive the animation primitives from a timeline per the scene bindings."""
    duration = cfg.duration_override_s if cfg.duration_override_s is not None else timeline.duration_s
    tracks = {t.track_id: t for t in timeline.tracks}
    all_curves = []
    all_spawns = []
    for obj in cfg.objects:
        if obj.track_id not in tracks:
            raise SceneError(f"object {obj.object_id!r} references missing track {obj.track_id!r}")
        track = tracks[obj.track_id]
        by_pattern = {}
        for event in track.events:
            by_pattern.setdefault(event.pattern_id, []).append(event)
        for pattern_id in sorted(set(by_pattern) - set(obj.bindings)):
            logger.info("track %r: pattern %r has no binding on %r, ignoring", track.track_id, pattern_id, obj.object_id)

        position_providers = []
        scale_providers = []
        bounce_times = []
        bounce_actions = []
        soft_events = []
        steer_actions = []
        ups, downs = [], []

        for pattern_id, action in sorted(obj.bindings.items()):
            events = by_pattern.get(pattern_id, [])
            for event in events:
                if event.kind is not action.requires:
                    raise SceneError(
                        f"object {obj.object_id!r}: action {action.kind!r} on pattern {pattern_id!r} "
                        f"requires {action.requires.value} events but got {event.kind.value}"
                    )
            if isinstance(action, BounceAction):
                bounce_actions.append(action)
                bounce_times.extend(e.t_s for e in events)
                if action.soft:
                    soft_events.extend((e, action.squash) for e in events)
                if action.drift_speed != 0.0:
                    speed = action.drift_speed
                    position_providers.append(on_axis(0, lambda t, v=speed: v * t))
            elif isinstance(action, SlideAction):
                squash = SquashParams(amplitude=action.squash_amplitude)
                for event in events:
                    segment = slide_segment((event.t_begin_s, event.t_end_s), action.speed, squash)
                    position_providers.append(segment.position)
                    scale_providers.append(segment.scale)
            elif isinstance(action, SteerAction):
                steer_actions.append(action)
                target = ups if action.direction > 0 else downs
                target.extend((e.t_begin_s, e.t_end_s) for e in events)
            elif isinstance(action, SpawnAction):
                seed = binding_seed(cfg.seed, obj.object_id, pattern_id)
                all_spawns.extend(
                    spawn_from_impulses(
                        events,
                        action.entity_kind,
                        action.size_base,
                        action.size_per_strength,
                        action.placement,
                        seed,
                    )
                )

        if bounce_actions:
            tails = {a.tail for a in bounce_actions}
            if len(tails) > 1:
                raise SceneError(f"object {obj.object_id!r}: bounce bindings disagree on tail mode")
            if bounce_times:
                trajectory = solve_bounce(
                    sorted(bounce_times), BallisticParams(g=cfg.gravity, tail_mode=tails.pop())
                )
                position_providers.append(trajectory.position)
            for event, squash in soft_events:
                profile = squash_profile(event.t_s, event.strength, squash)
                scale_providers.append(profile.scale)
        if steer_actions:
            speeds = {a.speed for a in steer_actions}
            bounds = {(a.z_min, a.z_max) for a in steer_actions}
            if len(speeds) > 1 or len(bounds) > 1:
                raise SceneError(
                    f"object {obj.object_id!r}: move_up/move_down bindings disagree on speed or bounds"
                )
            curve = steer_vertical(ups, downs, speeds.pop(), bounds.pop())
            position_providers.append(curve.position)

        all_curves.append(
            sample(position_providers, scale_providers, duration, cfg.fps, object_id=obj.object_id)
        )

    all_spawns.sort(key=lambda sp: (sp.t_s, sp.entity_kind, sp.size))
    return AnimationOutput(
        curves=tuple(all_curves),
        spawns=tuple(all_spawns),
        fps=cfg.fps,
        seed=cfg.seed,
        duration_s=duration,
    )


def animation_document(output: AnimationOutput) -> str:
    """The structured animation document: global settings plus the spawn list."""
    return docio.dump_json(
        {
            "duration_s": float(output.duration_s),
            "fps": float(output.fps),
            "seed": int(output.seed),
            "objects": [c.object_id for c in output.curves],
            "spawns": [
                {
                    "t": float(sp.t_s),
                    "kind": sp.entity_kind,
                    "size": float(sp.size),
                    "position": [float(c) for c in sp.position],
                }
                for sp in output.spawns
            ],
        }
    )
