"""Deterministic 16 Hz deathmatch / aim-train simulator with scripted bots.

The world advances by fixed ticks; identical (seed, input sequence) produces a
bit-identical state sequence. Bots are driven internally from the world's RNG
and emit the same PlayerInput structure external agents use, so telemetry
scraped from bot play is label-recoverable.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .actions import ActionLabel, quantize_mouse, snap_counts
from .geom import bearing_deg, ray_circle, wrap_deg
from .maps import MapGrid, builtin_aimtrain_map, builtin_deathmatch_map

TICK_RATE = 16
DT = 1.0 / TICK_RATE


class Mode(str, Enum):
    AIM_TRAIN = "aim_train"
    DM_EASY = "dm_easy"
    DM_MEDIUM = "dm_medium"

    @property
    def wraps_ammo(self) -> bool:
        """Modes where the magazine auto-refills and reload is never needed."""
        return self is not Mode.DM_MEDIUM


class Team(str, Enum):
    T = "t"
    CT = "ct"

    @property
    def other(self) -> Team:
        return Team.CT if self is Team.T else Team.T


class EventKind(str, Enum):
    KILL = "kill"
    DEATH = "death"
    SHOT_FIRED = "shot_fired"
    RELOAD = "reload"
    SPAWN = "spawn"


class SimError(Exception):
    pass


class InputError(SimError):
    pass


class SessionFinished(SimError):
    pass


class RosterError(SimError):
    pass


@dataclass(frozen=True)
class SimConfig:
    mouse_deg_per_count: float = 0.022
    sensitivity: float = 2.50
    max_speed: float = 5.0            # m/s
    player_radius: float = 0.3        # hit cylinder and collision radius, m
    body_height: float = 1.8          # m
    eye_height: float = 1.5           # m above feet
    damage: int = 36                  # 3 hits kill at 100 hp
    max_health: int = 100
    mag_size: int = 30
    reserve_ammo: int = 90
    respawn_ticks: int = 48           # 3 s
    target_respawn_ticks: int = 16    # aim-train targets come back quickly
    reload_ticks: int = 32            # 2 s; fire ignored during the window
    jump_ticks: int = 16              # 1 s arc
    jump_height: float = 0.6          # m peak eye offset
    spread_base_deg: float = 0.1
    spread_move_deg_per_mps: float = 0.5
    recoil_per_shot_deg: float = 0.8
    recoil_decay_deg_per_s: float = 2.0
    pitch_limit_deg: float = 89.0
    mouse_count_limit: int = 1000
    fire_cone_deg: float = 2.5        # bots fire when perceived yaw error is inside
    bot_recoil_pause_deg: float = 2.4 # bots pause fire above this accumulated recoil
    bot_jump_prob: float = 0.002      # per tick while navigating
    bot_goal_refresh_ticks: int = 160

    @property
    def counts_to_deg(self) -> float:
        return self.mouse_deg_per_count * self.sensitivity


@dataclass(frozen=True)
class BotParams:
    reaction_ticks: int
    aim_noise_deg: float
    fire_range_m: float
    preferred_range_m: float
    stop_to_shoot: bool
    strafe_in_combat: bool


EASY_BOT = BotParams(reaction_ticks=12, aim_noise_deg=6.0, fire_range_m=15.0,
                     preferred_range_m=8.0, stop_to_shoot=False, strafe_in_combat=True)
MEDIUM_BOT = BotParams(reaction_ticks=6, aim_noise_deg=3.0, fire_range_m=30.0,
                       preferred_range_m=15.0, stop_to_shoot=True, strafe_in_combat=False)
# Scripted stand-in for a strong human demonstrator (HQ recordings).
EXPERT_BOT = BotParams(reaction_ticks=2, aim_noise_deg=0.5, fire_range_m=30.0,
                       preferred_range_m=12.0, stop_to_shoot=True, strafe_in_combat=False)

BOT_PARAMS = {"easy": EASY_BOT, "medium": MEDIUM_BOT, "expert": EXPERT_BOT}

PLAYER_KINDS = ("external", "easy", "medium", "expert", "target")


@dataclass(frozen=True)
class PlayerInput:
    keys: frozenset[str] = frozenset()
    fire: bool = False
    mouse_dx: int = 0
    mouse_dy: int = 0


@dataclass(frozen=True)
class GameEvent:
    tick: int
    kind: EventKind
    actor_id: int
    victim_id: int | None = None


@dataclass(frozen=True)
class PlayerSpec:
    team: Team
    kind: str = "medium"  # one of PLAYER_KINDS

    def __post_init__(self) -> None:
        if self.kind not in PLAYER_KINDS:
            raise RosterError(f"unknown player kind {self.kind!r}")


@dataclass
class PlayerState:
    id: int
    team: Team
    pos: np.ndarray                  # (2,) float64 meters
    eye_height_offset: float = 0.0
    yaw: float = 0.0                 # degrees [0, 360)
    pitch: float = 0.0               # degrees [-89, +89]
    vel: np.ndarray = field(default_factory=lambda: np.zeros(2))
    health: int = 100
    ammo: int = 30
    reserve_ammo: int = 90
    kills: int = 0
    deaths: int = 0
    shots_fired: int = 0
    is_bot: bool = True
    recoil_accum: float = 0.0
    respawn_cooldown: int = 0
    kind: str = "medium"
    # internal mechanics state
    reload_ticks_left: int = 0
    jump_phase: int = 0
    anchored: bool = False
    invulnerable: bool = False
    last_damage_tick: int | None = None

    @property
    def alive(self) -> bool:
        return self.health > 0

    def eye_z(self, cfg: SimConfig) -> float:
        return cfg.eye_height + self.eye_height_offset


@dataclass
class BotBrain:
    goal: tuple[int, int] | None = None
    path: list[tuple[int, int]] = field(default_factory=list)
    path_i: int = 0
    goal_age: int = 0
    seen_ticks: int = 0
    aim_noise: tuple[float, float] = (0.0, 0.0)
    noise_age: int = 0
    strafe_key: str = ""
    strafe_left: int = 0
    stuck_ticks: int = 0


@dataclass
class WorldState:
    tick: int
    mode: Mode
    players: list[PlayerState]
    map: MapGrid
    rng_seed: int
    event_log: list[GameEvent]
    cfg: SimConfig
    rng: np.random.Generator
    brains: dict[int, BotBrain]
    max_ticks: int | None = None
    finished: bool = False
    last_inputs: dict[int, PlayerInput] = field(default_factory=dict)
    completed_reloads: set[int] = field(default_factory=set)

    def player(self, player_id: int) -> PlayerState:
        return self.players[player_id]

    def alive_enemies(self, of: PlayerState) -> list[PlayerState]:
        return [p for p in self.players if p.team is not of.team and p.alive]


def default_deathmatch_roster(kind: str = "medium", n_per_team: int = 12,
                              external_slots: int = 0) -> list[PlayerSpec]:
    roster = []
    for i in range(n_per_team):
        roster.append(PlayerSpec(Team.T, "external" if i < external_slots else kind))
    roster.extend(PlayerSpec(Team.CT, kind) for _ in range(n_per_team))
    return roster


def default_aimtrain_roster(player_kind: str = "external", n_targets: int = 6) -> list[PlayerSpec]:
    return [PlayerSpec(Team.CT, player_kind)] + [PlayerSpec(Team.T, "target")] * n_targets


def _validate_roster(mode: Mode, roster: list[PlayerSpec]) -> None:
    if not roster:
        raise RosterError("empty roster")
    if mode is Mode.AIM_TRAIN:
        shooters = [s for s in roster if s.kind != "target"]
        targets = [s for s in roster if s.kind == "target"]
        if len(shooters) != 1 or not targets:
            raise RosterError("aim-train roster needs exactly one player plus targets")
        if any(t.team is shooters[0].team for t in targets):
            raise RosterError("aim-train targets must be on the opposing team")
    else:
        teams = {t: sum(1 for s in roster if s.team is t) for t in Team}
        if min(teams.values()) < 1:
            raise RosterError("deathmatch roster needs players on both teams")
        if any(s.kind == "target" for s in roster):
            raise RosterError("target players are aim-train only")


def make_session(mode: Mode, seed: int, roster: list[PlayerSpec],
                 map_grid: MapGrid | None = None, cfg: SimConfig | None = None,
                 max_ticks: int | None = None) -> WorldState:
    """Build the initial WorldState at tick 0 with everyone spawned."""
    cfg = cfg or SimConfig()
    _validate_roster(mode, roster)
    if map_grid is None:
        map_grid = builtin_aimtrain_map() if mode is Mode.AIM_TRAIN else builtin_deathmatch_map()
    rng = np.random.default_rng(np.random.PCG64(seed))
    players: list[PlayerState] = []
    brains: dict[int, BotBrain] = {}
    events: list[GameEvent] = []
    for pid, spec in enumerate(roster):
        p = PlayerState(id=pid, team=spec.team, pos=np.zeros(2), kind=spec.kind,
                        is_bot=spec.kind != "external",
                        health=cfg.max_health, ammo=cfg.mag_size,
                        reserve_ammo=cfg.reserve_ammo)
        players.append(p)
        if p.is_bot:
            brains[pid] = BotBrain()
    world = WorldState(tick=0, mode=mode, players=players, map=map_grid,
                       rng_seed=seed, event_log=events, cfg=cfg, rng=rng,
                       brains=brains, max_ticks=max_ticks)
    for p in players:
        _spawn(world, p, initial=True)
        events.append(GameEvent(0, EventKind.SPAWN, p.id))
    return world


def _spawn_cells(world: WorldState, p: PlayerState) -> list[tuple[int, int]]:
    if world.mode is Mode.AIM_TRAIN and p.kind == "target":
        return world.map.edge_cells()
    cells = world.map.spawns_t if p.team is Team.T else world.map.spawns_ct
    return cells or world.map.walkable_cells()


def _spawn(world: WorldState, p: PlayerState, initial: bool = False) -> None:
    cfg = world.cfg
    if world.mode is Mode.AIM_TRAIN and p.kind != "target":
        p.pos = world.map.center()
        p.yaw = 0.0
        p.anchored = True
        p.invulnerable = True
    else:
        cells = _spawn_cells(world, p)
        col, row = cells[int(world.rng.integers(len(cells)))]
        p.pos = world.map.cell_center(col, row)
        p.yaw = float(world.rng.integers(0, 360))
    p.pitch = 0.0
    p.vel = np.zeros(2)
    p.eye_height_offset = 0.0
    p.health = cfg.max_health
    p.ammo = cfg.mag_size
    p.reserve_ammo = cfg.reserve_ammo
    p.recoil_accum = 0.0
    p.respawn_cooldown = 0
    p.reload_ticks_left = 0
    p.jump_phase = 0
    if not initial:
        world.event_log.append(GameEvent(world.tick, EventKind.SPAWN, p.id))


def nearest_visible_enemy(world: WorldState, p: PlayerState) -> PlayerState | None:
    enemies = world.alive_enemies(p)
    enemies.sort(key=lambda e: (float(np.sum((e.pos - p.pos) ** 2)), e.id))
    for e in enemies:
        if world.map.line_of_sight(p.pos, e.pos):
            return e
    return None


def _refresh_path(world: WorldState, p: PlayerState, brain: BotBrain) -> None:
    grid = world.map
    here = grid.cell_at(p.pos)
    walkable = grid.walkable_cells()
    for _ in range(8):
        goal = walkable[int(world.rng.integers(len(walkable)))]
        path = grid.bfs_path(here, goal)
        if len(path) > 2:
            brain.goal = goal
            brain.path = path
            brain.path_i = 1
            brain.goal_age = 0
            return
    brain.goal = here
    brain.path = [here]
    brain.path_i = 0
    brain.goal_age = 0


def bot_policy(world: WorldState, bot_id: int, params: BotParams,
               rng: np.random.Generator) -> PlayerInput:
    """Waypoint navigation plus delayed, noisy aim at the nearest visible enemy."""
    cfg = world.cfg
    p = world.players[bot_id]
    if not p.alive:
        return PlayerInput()
    brain = world.brains[bot_id]
    k = cfg.counts_to_deg

    if p.kind == "target":
        # unarmed aim-train fodder: run straight at the shooter
        shooter = next(q for q in world.players if q.kind != "target")
        derr = wrap_deg(bearing_deg(p.pos, shooter.pos) - p.yaw)
        dx = snap_counts(derr / k)
        keys = frozenset({"w"}) if (abs(derr) < 75.0
                                    and float(np.hypot(*(shooter.pos - p.pos))) > 1.2) else frozenset()
        return PlayerInput(keys=keys, mouse_dx=dx)

    enemy = nearest_visible_enemy(world, p)
    if enemy is None:
        brain.seen_ticks = 0
    else:
        brain.seen_ticks += 1

    keys: set[str] = set()
    fire = False
    dx_counts = 0
    dy_counts = 0

    in_combat = enemy is not None and brain.seen_ticks >= params.reaction_ticks
    if in_combat:
        brain.noise_age += 1
        if brain.noise_age >= 8 or brain.seen_ticks == params.reaction_ticks:
            brain.aim_noise = (float(rng.normal(0.0, params.aim_noise_deg)),
                               float(rng.normal(0.0, params.aim_noise_deg * 0.4)))
            brain.noise_age = 0
        dist = float(np.hypot(*(enemy.pos - p.pos)))
        want_yaw = bearing_deg(p.pos, enemy.pos) + brain.aim_noise[0]
        derr = wrap_deg(want_yaw - p.yaw)
        dx_counts = snap_counts(derr / k)
        target_z = enemy.eye_height_offset + cfg.body_height * 0.5
        want_pitch = math.degrees(math.atan2(p.eye_z(cfg) - target_z, max(dist, 1e-6)))
        want_pitch = -want_pitch + brain.aim_noise[1]  # positive pitch looks up
        dy_counts = snap_counts((p.pitch - want_pitch) / k)
        if dist <= params.fire_range_m and abs(derr) < cfg.fire_cone_deg \
                and p.reload_ticks_left == 0 \
                and p.recoil_accum < cfg.bot_recoil_pause_deg:
            fire = True
        if not world.mode.wraps_ammo and p.ammo == 0 and p.reserve_ammo > 0:
            keys.add("r")
            fire = False
        if dist > params.preferred_range_m:
            keys.add("w")  # close toward the aim direction until comfortable
        elif dist < 3.0:
            keys.add("s")
        elif params.stop_to_shoot:
            pass  # hold position for accuracy
        else:
            keys.add("w")
            if params.strafe_in_combat:
                if brain.strafe_left <= 0:
                    brain.strafe_key = ("a", "d")[int(rng.integers(2))]
                    brain.strafe_left = 8
                brain.strafe_left -= 1
                keys.add(brain.strafe_key)
    else:
        grid = world.map
        brain.goal_age += 1
        if not brain.path or brain.path_i >= len(brain.path) \
                or brain.goal_age > cfg.bot_goal_refresh_ticks:
            _refresh_path(world, p, brain)
        if brain.path_i < len(brain.path):
            target = grid.cell_center(*brain.path[brain.path_i])
            if float(np.hypot(*(target - p.pos))) < 0.45:
                brain.path_i += 1
            if brain.path_i < len(brain.path):
                target = grid.cell_center(*brain.path[brain.path_i])
                derr = wrap_deg(bearing_deg(p.pos, target) - p.yaw)
                dx_counts = snap_counts(derr / k)
                if abs(derr) < 75.0:
                    keys.add("w")
        dy_counts = snap_counts(p.pitch / k)  # level the view
        if brain.stuck_ticks > 8:
            _refresh_path(world, p, brain)
            brain.stuck_ticks = 0
        if rng.random() < cfg.bot_jump_prob and p.jump_phase == 0:
            keys.add("space")
        if not world.mode.wraps_ammo and p.ammo < 10 and p.reserve_ammo > 0 \
                and p.reload_ticks_left == 0:
            keys.add("r")
    return PlayerInput(keys=frozenset(keys), fire=fire,
                       mouse_dx=dx_counts, mouse_dy=dy_counts)


def _bot_params_for(kind: str) -> BotParams:
    return BOT_PARAMS.get(kind, MEDIUM_BOT)


def _apply_mouse(cfg: SimConfig, p: PlayerState, inp: PlayerInput) -> None:
    k = cfg.counts_to_deg
    p.yaw = (p.yaw + inp.mouse_dx * k) % 360.0
    lim = cfg.pitch_limit_deg
    p.pitch = min(lim, max(-lim, p.pitch - inp.mouse_dy * k))


def _apply_movement(world: WorldState, p: PlayerState, inp: PlayerInput) -> None:
    cfg = world.cfg
    old = p.pos.copy()
    if not p.anchored:
        fwd_back = ("w" in inp.keys) - ("s" in inp.keys)
        right_left = ("d" in inp.keys) - ("a" in inp.keys)
        if fwd_back or right_left:
            r = math.radians(p.yaw)
            fx, fy = math.cos(r), math.sin(r)
            wx = fx * fwd_back - fy * right_left
            wy = fy * fwd_back + fx * right_left
            n = math.hypot(wx, wy)
            vx, vy = cfg.max_speed * wx / n, cfg.max_speed * wy / n
            nx = p.pos[0] + vx * DT
            if not world.map.circle_blocked((nx, p.pos[1]), cfg.player_radius):
                p.pos[0] = nx
            ny = p.pos[1] + vy * DT
            if not world.map.circle_blocked((p.pos[0], ny), cfg.player_radius):
                p.pos[1] = ny
    moved = p.pos - old
    p.vel = moved / DT
    if p.is_bot and p.id in world.brains:
        pressed = bool(inp.keys & {"w", "a", "s", "d"})
        if pressed and float(np.hypot(*moved)) < 0.01:
            world.brains[p.id].stuck_ticks += 1
        else:
            world.brains[p.id].stuck_ticks = 0


def _apply_jump(cfg: SimConfig, p: PlayerState, inp: PlayerInput) -> None:
    if "space" in inp.keys and p.jump_phase == 0:
        p.jump_phase = 1
    elif p.jump_phase > 0:
        p.jump_phase += 1
        if p.jump_phase > cfg.jump_ticks:
            p.jump_phase = 0
    t = p.jump_phase / (cfg.jump_ticks + 1)
    p.eye_height_offset = cfg.jump_height * 4.0 * t * (1.0 - t)


def _start_reload(world: WorldState, p: PlayerState) -> None:
    cfg = world.cfg
    if world.mode.wraps_ammo or p.reload_ticks_left > 0:
        return
    if p.ammo >= cfg.mag_size or p.reserve_ammo <= 0:
        return
    p.reload_ticks_left = cfg.reload_ticks
    world.event_log.append(GameEvent(world.tick, EventKind.RELOAD, p.id))


def _tick_reload(world: WorldState, p: PlayerState) -> None:
    cfg = world.cfg
    if p.reload_ticks_left == 0:
        return
    p.reload_ticks_left -= 1
    if p.reload_ticks_left == 0:
        take = min(cfg.mag_size - p.ammo, p.reserve_ammo)
        p.ammo += take
        p.reserve_ammo -= take
        world.completed_reloads.add(p.id)


def _resolve_shot(world: WorldState, shooter: PlayerState) -> list[GameEvent]:
    cfg = world.cfg
    events = [GameEvent(world.tick, EventKind.SHOT_FIRED, shooter.id)]
    shooter.shots_fired += 1
    speed = float(np.hypot(*shooter.vel))
    sigma = cfg.spread_base_deg + cfg.spread_move_deg_per_mps * speed + shooter.recoil_accum
    eps_h = float(world.rng.normal(0.0, sigma))
    eps_v = float(world.rng.normal(0.0, sigma))
    shooter.recoil_accum += cfg.recoil_per_shot_deg
    ang = shooter.yaw + eps_h
    t_wall = world.map.raycast_wall(shooter.pos, ang)
    direction = np.array([math.cos(math.radians(ang)), math.sin(math.radians(ang))])
    pitch = math.radians(shooter.pitch + eps_v)
    eye_z = shooter.eye_z(cfg)
    best: tuple[float, PlayerState] | None = None
    for victim in world.alive_enemies(shooter):
        t = ray_circle(shooter.pos, direction, victim.pos, cfg.player_radius)
        if t is None or t >= t_wall:
            continue
        z = eye_z + math.tan(pitch) * t
        if not victim.eye_height_offset <= z <= victim.eye_height_offset + cfg.body_height:
            continue
        if best is None or t < best[0]:
            best = (t, victim)
    if best is not None:
        victim = best[1]
        if not victim.invulnerable:
            victim.health -= cfg.damage
            victim.last_damage_tick = world.tick
            if victim.health <= 0:
                victim.health = 0
                victim.deaths += 1
                victim.respawn_cooldown = (cfg.target_respawn_ticks if victim.kind == "target"
                                           else cfg.respawn_ticks)
                victim.reload_ticks_left = 0
                victim.vel = np.zeros(2)
                shooter.kills += 1
                events.append(GameEvent(world.tick, EventKind.KILL, shooter.id, victim.id))
                events.append(GameEvent(world.tick, EventKind.DEATH, victim.id, shooter.id))
    return events


def _apply_fire(world: WorldState, p: PlayerState, inp: PlayerInput) -> list[GameEvent]:
    cfg = world.cfg
    if not inp.fire or p.reload_ticks_left > 0:
        return []
    if world.mode.wraps_ammo:
        p.ammo = cfg.mag_size if p.ammo <= 1 else p.ammo - 1
    else:
        if p.ammo <= 0:
            return []
        p.ammo -= 1
    return _resolve_shot(world, p)


def step(world: WorldState,
         inputs: dict[int, PlayerInput] | None = None) -> tuple[WorldState, list[GameEvent]]:
    """Advance one tick. External inputs validated; bot inputs generated internally."""
    if world.finished:
        raise SessionFinished(f"session finished at tick {world.tick}")
    inputs = dict(inputs or {})
    for pid in inputs:
        if not 0 <= pid < len(world.players):
            raise InputError(f"unknown player id {pid}")
        if world.players[pid].is_bot:
            raise InputError(f"player {pid} is bot-controlled")
    cfg = world.cfg
    world.tick += 1
    world.completed_reloads = set()
    events: list[GameEvent] = []

    # respawns
    for p in world.players:
        if not p.alive:
            p.respawn_cooldown -= 1
            if p.respawn_cooldown <= 0:
                _spawn(world, p)
                events.append(world.event_log[-1])

    # bot decisions, from the pre-update state, in id order
    applied: dict[int, PlayerInput] = {}
    for p in world.players:
        if p.is_bot:
            applied[p.id] = bot_policy(world, p.id, _bot_params_for(p.kind), world.rng)
        else:
            applied[p.id] = inputs.get(p.id, PlayerInput())

    for p in world.players:
        inp = applied[p.id]
        if not p.alive:
            inp = PlayerInput()
        else:
            lim = cfg.mouse_count_limit
            dx = max(-lim, min(lim, inp.mouse_dx))
            dy = max(-lim, min(lim, inp.mouse_dy))
            if (dx, dy) != (inp.mouse_dx, inp.mouse_dy):
                inp = replace(inp, mouse_dx=dx, mouse_dy=dy)
        applied[p.id] = inp
        if not p.alive:
            continue
        p.recoil_accum = max(0.0, p.recoil_accum - cfg.recoil_decay_deg_per_s * DT)
        _apply_mouse(cfg, p, inp)
        _apply_movement(world, p, inp)
        _apply_jump(cfg, p, inp)
        _tick_reload(world, p)
        if "r" in inp.keys:
            _start_reload(world, p)
        events.extend(_apply_fire(world, p, inp))

    world.last_inputs = applied
    world.event_log.extend(e for e in events if e.kind is not EventKind.SPAWN)
    if world.max_ticks is not None and world.tick >= world.max_ticks:
        world.finished = True
    return world, events


def world_digest(world: WorldState) -> str:
    """SHA-256 over the dynamic state, for replay / determinism checks."""
    h = hashlib.sha256()
    h.update(struct.pack("<qi", world.tick, len(world.event_log)))
    for p in world.players:
        h.update(struct.pack(
            "<i dd d dd d iiiiii ii",
            p.id, p.pos[0], p.pos[1], p.yaw, p.vel[0], p.vel[1], p.pitch,
            p.health, p.ammo, p.reserve_ammo, p.kills, p.deaths, p.shots_fired,
            p.respawn_cooldown, p.reload_ticks_left))
        h.update(struct.pack("<dd", p.eye_height_offset, p.recoil_accum))
    return h.hexdigest()


@dataclass
class TickTruth:
    """Effective per-tick actions of one player, as applied by the simulator."""

    tick: int
    label: ActionLabel
    kill: bool
    death: bool


class EffectiveLabelRecorder:
    """Records ground-truth action labels while a session runs.

    fire/space/r are effective actions: fire marks an actual shot, space the
    tick a jump started, r the tick a reload started *and later completed*
    (a reload cancelled by death never becomes telemetry-visible).
    """

    def __init__(self, player_id: int):
        self.player_id = player_id
        self.rows: list[TickTruth] = []
        self._pending_reload: int | None = None  # row index awaiting completion

    def after_step(self, world: WorldState, events: list[GameEvent]) -> None:
        pid = self.player_id
        p = world.players[pid]
        inp = world.last_inputs.get(pid, PlayerInput())
        fired = any(e.kind is EventKind.SHOT_FIRED and e.actor_id == pid for e in events)
        killed = any(e.kind is EventKind.KILL and e.actor_id == pid for e in events)
        died = any(e.kind is EventKind.DEATH and e.actor_id == pid for e in events)
        reload_started = any(e.kind is EventKind.RELOAD and e.actor_id == pid for e in events)
        label = ActionLabel(
            w="w" in inp.keys, a="a" in inp.keys, s="s" in inp.keys, d="d" in inp.keys,
            space=p.jump_phase == 1,  # phase is 1 only on the tick a jump starts
            r=False,
            fire=fired,
            mouse_x_bin=quantize_mouse(inp.mouse_dx),
            mouse_y_bin=quantize_mouse(inp.mouse_dy),
        )
        self.rows.append(TickTruth(world.tick, label, killed, died))
        if reload_started:
            self._pending_reload = len(self.rows) - 1
        if pid in world.completed_reloads and self._pending_reload is not None:
            row = self.rows[self._pending_reload]
            self.rows[self._pending_reload] = TickTruth(
                row.tick, replace(row.label, r=True), row.kill, row.death)
            self._pending_reload = None
        if died:
            self._pending_reload = None


def run_bots(world: WorldState, ticks: int, recorders: list[EffectiveLabelRecorder] | None = None,
             on_tick=None) -> WorldState:
    """Drive a bots-only session for `ticks` ticks."""
    for _ in range(ticks):
        world, events = step(world)
        for rec in recorders or []:
            rec.after_step(world, events)
        if on_tick is not None:
            on_tick(world, events)
    return world
