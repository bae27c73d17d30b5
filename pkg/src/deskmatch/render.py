"""First-person rendering and the crop -> box-downsample -> augment pipeline.

The renderer is a column raycaster over the map grid: walls with distance
shading, other players as team-colored billboard sprites occluded by a
per-column depth buffer, pitch shifting the horizon, and a green center-dot
crosshair. It is a pure, deterministic function of WorldState.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .sim import PlayerState, WorldState

WALL_HEIGHT_M = 3.0
SPRITE_WIDTH_M = 0.6
TEAM_COLORS = {"t": (235, 130, 40), "ct": (70, 110, 230)}
FLOOR_COLOR = (52, 48, 44)
CEILING_COLOR = (150, 156, 164)
CROSSHAIR_COLOR = (0, 255, 0)
DAMAGE_BAR_COLOR = (200, 30, 30)
DAMAGE_FLASH_TICKS = 8


class RenderError(ValueError):
    pass


@dataclass(frozen=True)
class ObsConfig:
    """Native render size, centered crop window, and training output size.

    Defaults are desk scale; crop ratios follow the 584/1024 and 488/768
    screen-processing proportions.
    """

    native_w: int = 256
    native_h: int = 192
    crop_w: int = 146
    crop_h: int = 122
    out_w: int = 90
    out_h: int = 40
    fov_deg: float = 90.0
    spectator_view: bool = True  # hides the damage bar indicators

    def __post_init__(self) -> None:
        if self.crop_w > self.native_w or self.crop_h > self.native_h:
            raise RenderError("crop larger than native frame")
        if min(self.native_w, self.native_h, self.crop_w, self.crop_h,
               self.out_w, self.out_h) < 4:
            raise RenderError("degenerate dimensions")


# the full-scale pipeline the screen processing was designed around
PAPER_OBS = ObsConfig(native_w=1024, native_h=768, crop_w=584, crop_h=488,
                      out_w=180, out_h=80)


@dataclass
class Frame:
    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self) -> None:
        if self.pixels.shape != (self.height, self.width, 3):
            raise RenderError("pixel buffer shape mismatch")


@dataclass
class Observation:
    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8
    tick: int = 0

    def __post_init__(self) -> None:
        if self.pixels.shape != (self.height, self.width, 3):
            raise RenderError("pixel buffer shape mismatch")


def _raycast_columns(world: WorldState, pos: np.ndarray, yaw: float,
                     fov_deg: float, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Perpendicular wall distance and side flag for every screen column."""
    grid = world.map
    cs = grid.cell_size
    half = math.tan(math.radians(fov_deg) / 2.0)
    r = math.radians(yaw)
    fwd = np.array([math.cos(r), math.sin(r)])
    right = np.array([-math.sin(r), math.cos(r)])
    u = (2.0 * (np.arange(width) + 0.5) / width - 1.0) * half
    dirs = fwd[None, :] + u[:, None] * right[None, :]
    norms = np.hypot(dirs[:, 0], dirs[:, 1])
    dirs = dirs / norms[:, None]
    dx = np.where(np.abs(dirs[:, 0]) < 1e-12, 1e-12, dirs[:, 0])
    dy = np.where(np.abs(dirs[:, 1]) < 1e-12, 1e-12, dirs[:, 1])

    col0, row0 = grid.cell_at(pos)
    cols = np.full(width, col0, dtype=np.int64)
    rows = np.full(width, row0, dtype=np.int64)
    step_c = np.where(dx > 0, 1, -1)
    step_r = np.where(dy > 0, 1, -1)
    t_dx = np.abs(cs / dx)
    t_dy = np.abs(cs / dy)
    t_max_x = ((cols + (dx > 0)) * cs - pos[0]) / dx
    t_max_y = ((rows + (dy > 0)) * cs - pos[1]) / dy
    dist = np.zeros(width)
    side = np.zeros(width, dtype=bool)
    active = np.ones(width, dtype=bool)
    solid = grid.solid
    while active.any():
        go_x = active & (t_max_x < t_max_y)
        go_y = active & ~go_x
        dist[go_x] = t_max_x[go_x]
        t_max_x[go_x] += t_dx[go_x]
        cols[go_x] += step_c[go_x]
        side[go_x] = False
        dist[go_y] = t_max_y[go_y]
        t_max_y[go_y] += t_dy[go_y]
        rows[go_y] += step_r[go_y]
        side[go_y] = True
        np.clip(cols, 0, grid.width - 1, out=cols)
        np.clip(rows, 0, grid.height - 1, out=rows)
        active &= ~solid[rows, cols]
    # perpendicular distance avoids the fisheye bow
    perp = dist * (dirs @ fwd)
    return np.maximum(perp, 1e-6), side


def render(world: WorldState, player_id: int, cfg: ObsConfig) -> Frame:
    """Render player_id's first-person view at native resolution."""
    if not 0 <= player_id < len(world.players):
        raise RenderError(f"unknown player id {player_id}")
    me = world.players[player_id]
    w, h = cfg.native_w, cfg.native_h
    proj = (w / 2.0) / math.tan(math.radians(cfg.fov_deg) / 2.0)
    eye_z = me.eye_z(world.cfg)
    horizon = h / 2.0 + math.tan(math.radians(me.pitch)) * proj

    perp, side = _raycast_columns(world, me.pos, me.yaw, cfg.fov_deg, w)
    top = horizon - (WALL_HEIGHT_M - eye_z) * proj / perp
    bottom = horizon + eye_z * proj / perp

    shade = 1.0 / (1.0 + 0.06 * perp)
    wall_val = (205.0 * shade * np.where(side, 0.78, 1.0))
    wall_rgb = np.stack([wall_val * 0.98, wall_val, wall_val * 1.02], axis=1)

    rows_idx = np.arange(h)[:, None]
    img = np.empty((h, w, 3), dtype=np.float64)
    img[:] = np.array(CEILING_COLOR, dtype=np.float64)
    floor_mask = rows_idx > np.round(bottom)[None, :]
    img[floor_mask] = np.array(FLOOR_COLOR, dtype=np.float64)
    wall_mask = (rows_idx >= np.round(top)[None, :]) & (rows_idx <= np.round(bottom)[None, :])
    img[wall_mask] = np.repeat(wall_rgb[None, :, :], h, axis=0)[wall_mask]

    # player sprites, far to near, depth-tested per column
    others = [p for p in world.players if p.id != player_id and p.alive]
    r = math.radians(me.yaw)
    fwd = np.array([math.cos(r), math.sin(r)])
    right = np.array([-math.sin(r), math.cos(r)])
    half = math.tan(math.radians(cfg.fov_deg) / 2.0)
    order = sorted(others, key=lambda p: -float(np.sum((p.pos - me.pos) ** 2)))
    for p in order:
        rel = p.pos - me.pos
        depth = float(rel @ fwd)
        if depth <= 0.15:
            continue
        lateral = float(rel @ right)
        xc = (lateral / depth / half + 1.0) * w / 2.0
        sw = SPRITE_WIDTH_M * proj / depth
        sh = world.cfg.body_height * proj / depth
        foot = horizon + (eye_z - p.eye_height_offset) * proj / depth
        x0, x1 = int(round(xc - sw / 2)), int(round(xc + sw / 2))
        y0, y1 = int(round(foot - sh)), int(round(foot))
        x0c, x1c = max(x0, 0), min(x1, w)
        y0c, y1c = max(y0, 0), min(y1, h)
        if x0c >= x1c or y0c >= y1c:
            continue
        visible = perp[x0c:x1c] > depth
        if not visible.any():
            continue
        color = np.array(TEAM_COLORS[p.team.value], dtype=np.float64)
        tone = 0.35 + 0.65 / (1.0 + 0.05 * depth)
        body = color * tone
        head_rows = max(1, int(0.2 * (y1c - y0c)))
        block = img[y0c:y1c, x0c:x1c]
        block[:, visible] = body
        block[:head_rows, visible] = body * 0.6
        perp_slice = perp[x0c:x1c].copy()
        perp_slice[visible] = depth  # sprites occlude sprites behind them
        perp[x0c:x1c] = perp_slice

    if not cfg.spectator_view and getattr(me, "last_damage_tick", None) is not None \
            and world.tick - me.last_damage_tick <= DAMAGE_FLASH_TICKS:
        bar = max(2, h // 48)
        img[h - bar:, :] = np.array(DAMAGE_BAR_COLOR, dtype=np.float64)

    cx, cy = w // 2, h // 2
    img[cy - 1:cy + 1, cx - 1:cx + 1] = np.array(CROSSHAIR_COLOR, dtype=np.float64)

    return Frame(w, h, np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8))


@lru_cache(maxsize=8)
def _box_weights(n_in: int, n_out: int) -> np.ndarray:
    """Row-normalized area-overlap weights for exact box-filter resampling."""
    w = np.zeros((n_out, n_in))
    scale = n_in / n_out
    for o in range(n_out):
        a, b = o * scale, (o + 1) * scale
        for i in range(int(math.floor(a)), min(int(math.ceil(b)), n_in)):
            w[o, i] = min(b, i + 1.0) - max(a, float(i))
    return w / scale


def crop_downsample(frame: Frame, cfg: ObsConfig, tick: int = 0) -> Observation:
    """Centered crop, then box-filter average to the output size (round half up)."""
    if (frame.width, frame.height) != (cfg.native_w, cfg.native_h):
        raise RenderError("frame dims do not match config native dims")
    x0 = (cfg.native_w - cfg.crop_w) // 2
    y0 = (cfg.native_h - cfg.crop_h) // 2
    crop = frame.pixels[y0:y0 + cfg.crop_h, x0:x0 + cfg.crop_w].astype(np.float64)
    wr = _box_weights(cfg.crop_h, cfg.out_h)
    wc = _box_weights(cfg.crop_w, cfg.out_w)
    tmp = (wr @ crop.reshape(cfg.crop_h, -1)).reshape(cfg.out_h, cfg.crop_w, 3)
    out = np.moveaxis(np.moveaxis(tmp, 1, 2) @ wc.T, 1, 2)
    pixels = np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)
    return Observation(cfg.out_w, cfg.out_h, pixels, tick=tick)


BRIGHTNESS_RANGE = (-32.0, 32.0)
CONTRAST_RANGE = (0.8, 1.25)


def augment(obs: Observation, brightness_delta: float | None = None,
            contrast_scale: float | None = None,
            rng: np.random.Generator | None = None) -> Observation:
    """Photometric-only augmentation; output dims always equal input dims."""
    if brightness_delta is None or contrast_scale is None:
        if rng is None:
            raise RenderError("need explicit parameters or an rng to sample them")
        if brightness_delta is None:
            brightness_delta = float(rng.uniform(*BRIGHTNESS_RANGE))
        if contrast_scale is None:
            contrast_scale = float(rng.uniform(*CONTRAST_RANGE))
    if not BRIGHTNESS_RANGE[0] <= brightness_delta <= BRIGHTNESS_RANGE[1]:
        raise RenderError(f"brightness_delta {brightness_delta} out of range")
    if not CONTRAST_RANGE[0] <= contrast_scale <= CONTRAST_RANGE[1]:
        raise RenderError(f"contrast_scale {contrast_scale} out of range")
    p = obs.pixels.astype(np.float64)
    out = contrast_scale * (p - 128.0) + 128.0 + brightness_delta
    pixels = np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)
    return Observation(obs.width, obs.height, pixels, tick=obs.tick)


def augment_batch(pixels: np.ndarray, brightness_delta: float, contrast_scale: float) -> np.ndarray:
    """Same transform applied to a (..., H, W, 3) uint8 array."""
    out = contrast_scale * (pixels.astype(np.float64) - 128.0) + 128.0 + brightness_delta
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def write_ppm(image: Frame | Observation, path: str | Path) -> None:
    """Binary P6 dump, handy for eyeballing frames."""
    with open(path, "wb") as fh:
        fh.write(f"P6\n{image.width} {image.height}\n255\n".encode())
        fh.write(image.pixels.tobytes())


def observe(world: WorldState, player_id: int, cfg: ObsConfig) -> Observation:
    """render + crop_downsample in one call, stamped with the world tick."""
    return crop_downsample(render(world, player_id, cfg), cfg, tick=world.tick)
