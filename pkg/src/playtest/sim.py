"""Deterministic fixed-timestep character simulation.

The agent is an axis-aligned box moved with move-and-slide collision against
level geometry and moving platforms. All math is scalar float arithmetic in a
fixed order, so for a given (level, seed, action sequence) two runs produce
bitwise-identical state sequences.

Conventions: position is the center of the agent's bottom face ("feet"); yaw 0
faces +z and increases counter-clockwise; forward = (sin yaw, 0, cos yaw).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .level import BoxTuple, LevelSpec

# Fixed timestep. 30 Hz so that one decision at action repeat 3 is a tenth of
# a second, the usual human input cadence.
DT = 1.0 / 30.0

HALF_WIDTH = 0.45
HEIGHT = 1.8

WALK_SPEED = 6.0
STRAFE_SPEED = 4.0
TURN_RATE = math.pi          # rad/s at full turn input
GRAVITY = 20.0               # magnitude, applied -y
JUMP_APEX = 1.5              # jump reaches this height on flat ground
JUMP_IMPULSE = math.sqrt(2.0 * GRAVITY * JUMP_APEX)
JUMP_COOLDOWN = 0.5
CLIMB_SPEED = 3.0
CLIMB_REACH = 0.4            # horizontal distance at which a climbable engages

JUMP_THRESHOLD = 0.5         # jump axis fires above this value

# Penetrations at or below this depth are resting contact, not overlap; without
# it a 1-ulp graze on one axis triggers a full ejection on another.
CONTACT_EPS = 1e-7


@dataclass(frozen=True, slots=True)
class Action:
    """Continuous controller input; every axis is clamped to [-1, 1]."""

    forward: float = 0.0
    turn: float = 0.0
    strafe: float = 0.0
    jump: float = -1.0


@dataclass(frozen=True, slots=True)
class StepInfo:
    goal_reached: bool
    trap_entered: bool
    defect_crossed: bool
    position_before: tuple[float, float, float]
    position_after: tuple[float, float, float]


@dataclass(frozen=True, slots=True)
class WorldState:
    px: float
    py: float
    pz: float
    vx: float
    vy: float
    vz: float
    yaw: float
    grounded: bool
    climbing: bool
    trapped: bool
    jump_cooldown_remaining: float
    sim_time: float
    platform_phase: tuple[float, ...]
    platform_index: int          # index of the platform the agent stands on, -1 if none
    goal_index: int
    decision_step: int
    episode_steps_remaining: int
    seed: int

    @property
    def position(self) -> tuple[float, float, float]:
        return (self.px, self.py, self.pz)

    @property
    def velocity(self) -> tuple[float, float, float]:
        return (self.vx, self.vy, self.vz)

    @property
    def orientation(self) -> tuple[float, float, float, float]:
        """Unit quaternion (x, y, z, w) for a rotation of yaw about +y."""
        half = 0.5 * self.yaw
        return (0.0, math.sin(half), 0.0, math.cos(half))


def reset(level: LevelSpec, seed: int, episode_length: int = 1000) -> WorldState:
    """Initial state: agent at spawn, at rest, first goal active, full clock.

    Spawn placement is fixed, never randomized; the seed is stored for
    reproducibility bookkeeping (platform phases all start at 0).
    """
    return WorldState(
        px=level.spawn[0], py=level.spawn[1], pz=level.spawn[2],
        vx=0.0, vy=0.0, vz=0.0,
        yaw=level.spawn_yaw,
        grounded=False, climbing=False, trapped=False,
        jump_cooldown_remaining=0.0,
        sim_time=0.0,
        platform_phase=(0.0,) * len(level.platforms),
        platform_index=-1,
        goal_index=0,
        decision_step=0,
        episode_steps_remaining=episode_length,
        seed=seed,
    )


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


def _wrap_pi(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def segment_hits_box(p0: tuple[float, float, float],
                     p1: tuple[float, float, float],
                     box: BoxTuple) -> bool:
    """Slab test: does the segment p0->p1 intersect the AABB (inclusive)?"""
    tmin, tmax = 0.0, 1.0
    for axis in range(3):
        o = p0[axis]
        d = p1[axis] - p0[axis]
        lo = box[axis]
        hi = box[axis + 3]
        if abs(d) < 1e-12:
            if o < lo or o > hi:
                return False
        else:
            t0 = (lo - o) / d
            t1 = (hi - o) / d
            if t0 > t1:
                t0, t1 = t1, t0
            if t0 > tmin:
                tmin = t0
            if t1 < tmax:
                tmax = t1
            if tmin > tmax:
                return False
    return True


def raycast(level: LevelSpec,
            origin: tuple[float, float, float],
            direction: tuple[float, float, float],
            max_range: float,
            platform_boxes: tuple[BoxTuple, ...] | None = None) -> float:
    """Distance to the nearest solid/climbable/platform box along a unit ray.

    Returns max_range on a miss. nocollide boxes are absent from the physics
    world and are never hit; trap volumes are triggers, not geometry.
    platform_boxes lets callers pass current platform positions; by default
    platforms are tested at their authored (phase 0) location.
    """
    if platform_boxes is None:
        platform_boxes = tuple(p.box_at(0.0) for p in level.platforms)
    ox, oy, oz = origin
    dx, dy, dz = direction
    best = max_range
    for boxes in (level.collision_boxes, platform_boxes):
        for (x0, y0, z0, x1, y1, z1) in boxes:
            tmin = 0.0
            tmax = best
            hit = True
            for o, d, lo, hi in ((ox, dx, x0, x1), (oy, dy, y0, y1), (oz, dz, z0, z1)):
                if abs(d) < 1e-12:
                    if o < lo or o > hi:
                        hit = False
                        break
                else:
                    t0 = (lo - o) / d
                    t1 = (hi - o) / d
                    if t0 > t1:
                        t0, t1 = t1, t0
                    if t0 > tmin:
                        tmin = t0
                    if t1 < tmax:
                        tmax = t1
                    if tmin > tmax:
                        hit = False
                        break
            if hit and tmin < best:
                best = tmin
    return best


def active_goal_distance(level: LevelSpec, state: WorldState) -> float:
    """Euclidean distance from the agent to the active goal (0 if all done)."""
    if state.goal_index >= len(level.goals):
        return 0.0
    g = level.goals[state.goal_index]
    return math.sqrt((g.x - state.px) ** 2 + (g.y - state.py) ** 2 + (g.z - state.pz) ** 2)


def step(level: LevelSpec, state: WorldState, control: Action,
         dt: float = DT) -> tuple[WorldState, StepInfo]:
    """Advance the world one fixed timestep.

    Control axes are clamped; a trapped agent ignores controls entirely but
    time and platforms keep advancing. Never raises on degenerate geometry.
    """
    pos_before = (state.px, state.py, state.pz)

    # Platforms move regardless of the agent.
    platforms = level.platforms
    old_phases = state.platform_phase
    new_phases = tuple(p.advance_phase(ph, dt) for p, ph in zip(platforms, old_phases))
    new_platform_boxes = [p.box_at(ph) for p, ph in zip(platforms, new_phases)]

    cooldown = state.jump_cooldown_remaining - dt
    if cooldown < 0.0:
        cooldown = 0.0

    if state.trapped:
        new_state = replace(
            state,
            vx=0.0, vy=0.0, vz=0.0,
            grounded=True, climbing=False,
            jump_cooldown_remaining=cooldown,
            sim_time=state.sim_time + dt,
            platform_phase=new_phases,
            platform_index=-1,
        )
        info = StepInfo(
            goal_reached=False, trap_entered=False,
            defect_crossed=_crosses_defect(level, pos_before, pos_before),
            position_before=pos_before, position_after=pos_before,
        )
        return new_state, info

    fwd = _clamp(control.forward, -1.0, 1.0)
    turn = _clamp(control.turn, -1.0, 1.0)
    strafe = _clamp(control.strafe, -1.0, 1.0)
    jump = _clamp(control.jump, -1.0, 1.0)

    yaw = _wrap_pi(state.yaw + turn * TURN_RATE * dt)
    sin_y = math.sin(yaw)
    cos_y = math.cos(yaw)

    # Control velocity in the horizontal plane; facing is (sin, cos), agent
    # right is (cos, -sin).
    cvx = fwd * WALK_SPEED * sin_y + strafe * STRAFE_SPEED * cos_y
    cvz = fwd * WALK_SPEED * cos_y - strafe * STRAFE_SPEED * sin_y

    px, py, pz = state.px, state.py, state.pz

    # Climbing engages while pressing forward within reach of a climbable box,
    # body below the box top.
    climbing = False
    if fwd > 0.0 and level.climbable_boxes:
        ax0 = px - HALF_WIDTH - CLIMB_REACH
        ax1 = px + HALF_WIDTH + CLIMB_REACH
        az0 = pz - HALF_WIDTH - CLIMB_REACH
        az1 = pz + HALF_WIDTH + CLIMB_REACH
        ay0 = py
        ay1 = py + HEIGHT
        for (x0, y0, z0, x1, y1, z1) in level.climbable_boxes:
            if (ax0 < x1 and ax1 > x0 and az0 < z1 and az1 > z0
                    and ay0 < y1 and ay1 > y0):
                climbing = True
                break

    if climbing:
        vy = CLIMB_SPEED
    elif state.grounded and cooldown == 0.0 and jump > JUMP_THRESHOLD:
        vy = JUMP_IMPULSE
        cooldown = JUMP_COOLDOWN
    else:
        vy = state.vy - GRAVITY * dt

    # Displacement for this step; an agent standing on a platform is carried
    # by the platform's own displacement.
    dx = cvx * dt
    dy = vy * dt
    dz = cvz * dt
    if 0 <= state.platform_index < len(platforms):
        ob = platforms[state.platform_index].box_at(old_phases[state.platform_index])
        nb = new_platform_boxes[state.platform_index]
        dx += nb[0] - ob[0]
        dy += nb[1] - ob[1]
        dz += nb[2] - ob[2]

    solids = level.collision_boxes
    bx0, by0, bz0, bx1, by1, bz1 = level.bounds

    grounded = False
    platform_index = -1
    n_solid = len(solids)

    eps = CONTACT_EPS

    # ---- X axis ----
    px += dx
    for boxes in (solids, new_platform_boxes):
        for (x0, y0, z0, x1, y1, z1) in boxes:
            if (px - HALF_WIDTH < x1 - eps and px + HALF_WIDTH > x0 + eps
                    and py < y1 - eps and py + HEIGHT > y0 + eps
                    and pz - HALF_WIDTH < z1 - eps and pz + HALF_WIDTH > z0 + eps):
                push_left = px + HALF_WIDTH - x0
                push_right = x1 - (px - HALF_WIDTH)
                px += push_right if push_right < push_left else -push_left
    px = _clamp(px, bx0 + HALF_WIDTH, bx1 - HALF_WIDTH)

    # ---- Z axis ----
    pz += dz
    for boxes in (solids, new_platform_boxes):
        for (x0, y0, z0, x1, y1, z1) in boxes:
            if (px - HALF_WIDTH < x1 - eps and px + HALF_WIDTH > x0 + eps
                    and py < y1 - eps and py + HEIGHT > y0 + eps
                    and pz - HALF_WIDTH < z1 - eps and pz + HALF_WIDTH > z0 + eps):
                push_back = pz + HALF_WIDTH - z0
                push_fwd = z1 - (pz - HALF_WIDTH)
                pz += push_fwd if push_fwd < push_back else -push_back
    pz = _clamp(pz, bz0 + HALF_WIDTH, bz1 - HALF_WIDTH)

    # ---- Y axis ----
    py += dy
    for bi, boxes in enumerate((solids, new_platform_boxes)):
        for i, (x0, y0, z0, x1, y1, z1) in enumerate(boxes):
            if (px - HALF_WIDTH < x1 - eps and px + HALF_WIDTH > x0 + eps
                    and py < y1 - eps and py + HEIGHT > y0 + eps
                    and pz - HALF_WIDTH < z1 - eps and pz + HALF_WIDTH > z0 + eps):
                push_up = y1 - py
                push_down = py + HEIGHT - y0
                if push_up < push_down:
                    py = y1
                    grounded = True
                    if bi == 1:
                        platform_index = i
                else:
                    py = y0 - HEIGHT
    if py < by0:
        py = by0
        grounded = True
    elif py > by1 - HEIGHT:
        py = by1 - HEIGHT

    # Velocity is the realized displacement rate: collisions cancel the
    # penetrating component, platform carry shows up as inherited velocity.
    inv_dt = 1.0 / dt
    vx_out = (px - pos_before[0]) * inv_dt
    vy_out = (py - pos_before[1]) * inv_dt
    vz_out = (pz - pos_before[2]) * inv_dt

    trapped = False
    for (x0, y0, z0, x1, y1, z1) in level.trap_boxes:
        if x0 <= px <= x1 and y0 <= py <= y1 and z0 <= pz <= z1:
            trapped = True
            break

    goal_reached = False
    if state.goal_index < len(level.goals):
        g = level.goals[state.goal_index]
        gd2 = (g.x - px) ** 2 + (g.y - py) ** 2 + (g.z - pz) ** 2
        goal_reached = gd2 <= g.radius * g.radius

    pos_after = (px, py, pz)
    info = StepInfo(
        goal_reached=goal_reached,
        trap_entered=trapped,
        defect_crossed=_crosses_defect(level, pos_before, pos_after),
        position_before=pos_before,
        position_after=pos_after,
    )
    new_state = replace(
        state,
        px=px, py=py, pz=pz,
        vx=vx_out, vy=vy_out, vz=vz_out,
        yaw=yaw,
        grounded=grounded,
        climbing=climbing,
        trapped=trapped,
        jump_cooldown_remaining=cooldown,
        sim_time=state.sim_time + dt,
        platform_phase=new_phases,
        platform_index=platform_index,
    )
    return new_state, info


def _crosses_defect(level: LevelSpec,
                    p0: tuple[float, float, float],
                    p1: tuple[float, float, float]) -> bool:
    for box in level.nocollide_boxes:
        if segment_hits_box(p0, p1, box):
            return True
    return False
