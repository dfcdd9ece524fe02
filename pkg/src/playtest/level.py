"""Level geometry: axis-aligned boxes with behaviour flags, moving platforms,
goals, a spawn point, and the line-oriented text format that describes them.

Box flags:
  solid      blocks movement and rays
  climbable  blocks movement and rays; agents pressing forward against it climb
  nocollide  authored geometry with a missing collision mesh: invisible to
             physics and rays, but still part of the authored level (the
             navmesh bakes it as an obstacle)
  trap       trigger volume; an agent whose position enters it is immobilized
             until the episode times out
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

BOX_FLAGS = frozenset({"solid", "climbable", "nocollide", "trap"})

BoxTuple = tuple[float, float, float, float, float, float]


class LevelError(ValueError):
    """Raised when a level file fails to parse or violates a level invariant."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Box:
    x0: float
    y0: float
    z0: float
    x1: float
    y1: float
    z1: float
    flags: frozenset[str]

    def as_tuple(self) -> BoxTuple:
        return (self.x0, self.y0, self.z0, self.x1, self.y1, self.z1)

    def contains_point(self, x: float, y: float, z: float) -> bool:
        return (self.x0 <= x <= self.x1
                and self.y0 <= y <= self.y1
                and self.z0 <= z <= self.z1)


@dataclass(frozen=True)
class Platform:
    """A solid box that ping-pongs between two waypoints at constant speed.

    The authored AABB is the box at phase 0; the waypoints define a relative
    path (the box translates by the vector from w0 toward w1 and back).
    """

    x0: float
    y0: float
    z0: float
    x1: float
    y1: float
    z1: float
    w0: tuple[float, float, float]
    w1: tuple[float, float, float]
    speed: float

    @property
    def path_length(self) -> float:
        dx = self.w1[0] - self.w0[0]
        dy = self.w1[1] - self.w0[1]
        dz = self.w1[2] - self.w0[2]
        return math.sqrt(dx * dx + dy * dy + dz * dz)

    def box_at(self, phase: float) -> BoxTuple:
        """Box tuple at a phase in [0, 2); 0 -> authored position, 1 -> far end."""
        tri = phase if phase <= 1.0 else 2.0 - phase
        ox = (self.w1[0] - self.w0[0]) * tri
        oy = (self.w1[1] - self.w0[1]) * tri
        oz = (self.w1[2] - self.w0[2]) * tri
        return (self.x0 + ox, self.y0 + oy, self.z0 + oz,
                self.x1 + ox, self.y1 + oy, self.z1 + oz)

    def advance_phase(self, phase: float, dt: float) -> float:
        length = self.path_length
        if length <= 0.0 or self.speed <= 0.0:
            return phase
        return (phase + self.speed * dt / length) % 2.0


@dataclass(frozen=True)
class Goal:
    x: float
    y: float
    z: float
    radius: float


@dataclass(frozen=True)
class LevelSpec:
    bounds: BoxTuple
    spawn: tuple[float, float, float]
    spawn_yaw: float  # radians
    goals: tuple[Goal, ...]
    boxes: tuple[Box, ...]
    platforms: tuple[Platform, ...]
    # Derived collision sets, precomputed once for the hot path.
    collision_boxes: tuple[BoxTuple, ...] = field(default=(), compare=False)
    climbable_boxes: tuple[BoxTuple, ...] = field(default=(), compare=False)
    nocollide_boxes: tuple[BoxTuple, ...] = field(default=(), compare=False)
    trap_boxes: tuple[BoxTuple, ...] = field(default=(), compare=False)

    @property
    def diagonal(self) -> float:
        x0, y0, z0, x1, y1, z1 = self.bounds
        return math.sqrt((x1 - x0) ** 2 + (y1 - y0) ** 2 + (z1 - z0) ** 2)

    def platform_boxes_at(self, phases: tuple[float, ...]) -> tuple[BoxTuple, ...]:
        return tuple(p.box_at(ph) for p, ph in zip(self.platforms, phases))


def _make_level(bounds, spawn, spawn_yaw, goals, boxes, platforms) -> LevelSpec:
    collision = []
    climbable = []
    nocollide = []
    traps = []
    for b in boxes:
        t = b.as_tuple()
        if "nocollide" in b.flags:
            nocollide.append(t)
            continue
        if "trap" in b.flags:
            traps.append(t)
        if "solid" in b.flags or "climbable" in b.flags:
            collision.append(t)
        if "climbable" in b.flags:
            climbable.append(t)
    return LevelSpec(
        bounds=bounds,
        spawn=spawn,
        spawn_yaw=spawn_yaw,
        goals=tuple(goals),
        boxes=tuple(boxes),
        platforms=tuple(platforms),
        collision_boxes=tuple(collision),
        climbable_boxes=tuple(climbable),
        nocollide_boxes=tuple(nocollide),
        trap_boxes=tuple(traps),
    )


def _parse_floats(tokens: list[str], n: int, line: int, what: str) -> list[float]:
    if len(tokens) != n:
        raise LevelError(f"{what}: expected {n} numbers, got {len(tokens)}", line)
    out = []
    for tok in tokens:
        try:
            out.append(float(tok))
        except ValueError:
            raise LevelError(f"{what}: bad number {tok!r}", line) from None
    return out


def _check_aabb(v: list[float], line: int, what: str) -> None:
    if not (v[0] < v[3] and v[1] < v[4] and v[2] < v[5]):
        raise LevelError(f"{what}: AABB must have min < max per axis", line)


def _inside(bounds: BoxTuple, x: float, y: float, z: float) -> bool:
    return (bounds[0] <= x <= bounds[3]
            and bounds[1] <= y <= bounds[4]
            and bounds[2] <= z <= bounds[5])


def parse_level(text: str) -> LevelSpec:
    """Parse the line-oriented level format into a validated LevelSpec.

    One record per line; '#' starts a comment; tokens are whitespace-separated.
    Records: bounds, spawn, goal, box, platform (see module docstring and the
    shipped .lvl files). Raises LevelError with a line number on any problem.
    """
    bounds: BoxTuple | None = None
    spawn = None
    spawn_yaw = 0.0
    goals: list[Goal] = []
    boxes: list[Box] = []
    platforms: list[Platform] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind, args = tokens[0], tokens[1:]

        if kind == "bounds":
            v = _parse_floats(args, 6, lineno, "bounds")
            _check_aabb(v, lineno, "bounds")
            bounds = tuple(v)
        elif kind == "spawn":
            v = _parse_floats(args, 4, lineno, "spawn")
            spawn = (v[0], v[1], v[2])
            spawn_yaw = math.radians(v[3])
        elif kind == "goal":
            v = _parse_floats(args, 4, lineno, "goal")
            if v[3] <= 0:
                raise LevelError("goal: radius must be > 0", lineno)
            goals.append(Goal(v[0], v[1], v[2], v[3]))
        elif kind == "box":
            if len(args) != 7:
                raise LevelError("box: expected 6 numbers and a flag list", lineno)
            v = _parse_floats(args[:6], 6, lineno, "box")
            _check_aabb(v, lineno, "box")
            flags = frozenset(args[6].split(","))
            bad = flags - BOX_FLAGS
            if bad:
                raise LevelError(f"box: unknown flag(s) {sorted(bad)}", lineno)
            boxes.append(Box(*v, flags=flags))
        elif kind == "platform":
            v = _parse_floats(args, 13, lineno, "platform")
            _check_aabb(v[:6], lineno, "platform")
            if v[12] < 0:
                raise LevelError("platform: speed must be >= 0", lineno)
            platforms.append(Platform(
                v[0], v[1], v[2], v[3], v[4], v[5],
                w0=(v[6], v[7], v[8]), w1=(v[9], v[10], v[11]), speed=v[12],
            ))
        else:
            raise LevelError(f"unknown record {kind!r}", lineno)

    if bounds is None:
        raise LevelError("missing bounds record")
    if spawn is None:
        raise LevelError("missing spawn record")
    if not goals:
        raise LevelError("level must define at least one goal")
    if not _inside(bounds, *spawn):
        raise LevelError("spawn outside bounds")
    for i, g in enumerate(goals):
        if not _inside(bounds, g.x, g.y, g.z):
            raise LevelError(f"goal {i} outside bounds")

    return _make_level(bounds, spawn, spawn_yaw, goals, boxes, platforms)


def load_level(path: str) -> LevelSpec:
    """Load a level from a file path or a built-in by `pkg:<name>` reference."""
    if path.startswith("pkg:"):
        return load_builtin(path[4:])
    with open(path, "r", encoding="utf-8") as fh:
        return parse_level(fh.read())


def builtin_level_names() -> list[str]:
    files = resources.files("playtest").joinpath("levels")
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".lvl"))


def builtin_level_text(name: str) -> str:
    ref = resources.files("playtest").joinpath("levels").joinpath(name + ".lvl")
    if not ref.is_file():
        raise LevelError(f"unknown built-in level {name!r} "
                         f"(have: {', '.join(builtin_level_names())})")
    return ref.read_text(encoding="utf-8")


def load_builtin(name: str) -> LevelSpec:
    return parse_level(builtin_level_text(name))


def level_text_for_path(path: str) -> str:
    """Raw level file text (used for wire-protocol level hashing)."""
    if path.startswith("pkg:"):
        return builtin_level_text(path[4:])
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()
