"""Grid maps: text format parsing, built-in arenas, LOS and wall raycasts.

Map file format: first line `<width> <height> <cell_size_m>`, then `height`
rows of `width` characters each: `#` wall, `.` empty, `T`/`C` team spawns.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CELL_EMPTY = 0
CELL_WALL = 1
CELL_SPAWN_T = 2
CELL_SPAWN_CT = 3

_CHAR_TO_CELL = {".": CELL_EMPTY, "#": CELL_WALL, "T": CELL_SPAWN_T, "C": CELL_SPAWN_CT}
_CELL_TO_CHAR = {v: k for k, v in _CHAR_TO_CELL.items()}


class MapError(ValueError):
    pass


@dataclass
class MapGrid:
    width: int
    height: int
    cell_size: float
    cells: np.ndarray  # (height, width) uint8, row 0 = northmost line
    spawns_t: list[tuple[int, int]] = field(default_factory=list)  # (col, row)
    spawns_ct: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.cells.shape != (self.height, self.width):
            raise MapError("cell array shape does not match declared dims")
        if not (self.cells[0].all() and self.cells[-1].all()
                and self.cells[:, 0].all() and self.cells[:, -1].all()):
            raise MapError("map border must be wall")
        self.spawns_t = [(int(c), int(r)) for r, c in zip(*np.where(self.cells == CELL_SPAWN_T))]
        self.spawns_ct = [(int(c), int(r)) for r, c in zip(*np.where(self.cells == CELL_SPAWN_CT))]
        for col, row in self.spawns_t + self.spawns_ct:
            if not self._touches_empty(col, row):
                raise MapError(f"spawn cell ({col},{row}) has no adjacent empty cell")
        # Solid mask for collision / raycasts: walls only, spawns are walkable.
        self.solid = self.cells == CELL_WALL

    def _touches_empty(self, col: int, row: int) -> bool:
        for dc, dr in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            c, r = col + dc, row + dr
            if 0 <= c < self.width and 0 <= r < self.height and self.cells[r, c] == CELL_EMPTY:
                return True
        return False

    @property
    def world_w(self) -> float:
        return self.width * self.cell_size

    @property
    def world_h(self) -> float:
        return self.height * self.cell_size

    def center(self) -> np.ndarray:
        return np.array([self.world_w / 2.0, self.world_h / 2.0])

    def cell_center(self, col: int, row: int) -> np.ndarray:
        return np.array([(col + 0.5) * self.cell_size, (row + 0.5) * self.cell_size])

    def cell_at(self, pos: np.ndarray) -> tuple[int, int]:
        return int(pos[0] // self.cell_size), int(pos[1] // self.cell_size)

    def is_solid(self, col: int, row: int) -> bool:
        if not (0 <= col < self.width and 0 <= row < self.height):
            return True
        return bool(self.solid[row, col])

    def circle_blocked(self, pos: np.ndarray, radius: float) -> bool:
        """True if a disc of `radius` at pos overlaps any wall cell."""
        cs = self.cell_size
        c0 = int((pos[0] - radius) // cs)
        c1 = int((pos[0] + radius) // cs)
        r0 = int((pos[1] - radius) // cs)
        r1 = int((pos[1] + radius) // cs)
        for row in range(r0, r1 + 1):
            for col in range(c0, c1 + 1):
                if not self.is_solid(col, row):
                    continue
                # closest point on the cell rectangle to the disc center
                nx = min(max(pos[0], col * cs), (col + 1) * cs)
                ny = min(max(pos[1], row * cs), (row + 1) * cs)
                if (pos[0] - nx) ** 2 + (pos[1] - ny) ** 2 < radius * radius:
                    return True
        return False

    def raycast_wall(self, origin: np.ndarray, angle_deg: float, max_dist: float = 1e9) -> float:
        """Distance from origin along angle to the first wall (DDA)."""
        cs = self.cell_size
        dx = math.cos(math.radians(angle_deg))
        dy = math.sin(math.radians(angle_deg))
        col, row = self.cell_at(origin)
        t_max_x = ((col + (dx > 0)) * cs - origin[0]) / dx if dx != 0 else math.inf
        t_max_y = ((row + (dy > 0)) * cs - origin[1]) / dy if dy != 0 else math.inf
        t_dx = abs(cs / dx) if dx != 0 else math.inf
        t_dy = abs(cs / dy) if dy != 0 else math.inf
        step_c = 1 if dx > 0 else -1
        step_r = 1 if dy > 0 else -1
        t = 0.0
        while t <= max_dist:
            if t_max_x < t_max_y:
                t = t_max_x
                t_max_x += t_dx
                col += step_c
            else:
                t = t_max_y
                t_max_y += t_dy
                row += step_r
            if self.is_solid(col, row):
                return min(t, max_dist)
        return max_dist

    def line_of_sight(self, a: np.ndarray, b: np.ndarray) -> bool:
        d = b - a
        dist = float(np.hypot(d[0], d[1]))
        if dist < 1e-9:
            return True
        ang = math.degrees(math.atan2(d[1], d[0]))
        return self.raycast_wall(a, ang, dist) >= dist - 1e-9

    def walkable_cells(self) -> list[tuple[int, int]]:
        rows, cols = np.where(~self.solid)
        return [(int(c), int(r)) for r, c in zip(rows, cols)]

    def edge_cells(self) -> list[tuple[int, int]]:
        """Walkable cells adjacent to the border wall ring."""
        out = []
        for col, row in self.walkable_cells():
            if col in (1, self.width - 2) or row in (1, self.height - 2):
                out.append((col, row))
        return out

    def bfs_path(self, start: tuple[int, int], goal: tuple[int, int]) -> list[tuple[int, int]]:
        """Shortest 4-connected path of cells from start to goal (inclusive)."""
        if start == goal:
            return [start]
        prev: dict[tuple[int, int], tuple[int, int]] = {start: start}
        q = deque([start])
        while q:
            cur = q.popleft()
            if cur == goal:
                break
            for dc, dr in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                nxt = (cur[0] + dc, cur[1] + dr)
                if nxt in prev or self.is_solid(*nxt):
                    continue
                prev[nxt] = cur
                q.append(nxt)
        if goal not in prev:
            return []
        path = [goal]
        while path[-1] != start:
            path.append(prev[path[-1]])
        path.reverse()
        return path


def parse_map(text: str) -> MapGrid:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MapError("empty map file")
    head = lines[0].split()
    if len(head) != 3:
        raise MapError("header must be '<width> <height> <cell_size_m>'")
    try:
        width, height, cell_size = int(head[0]), int(head[1]), float(head[2])
    except ValueError as exc:
        raise MapError(f"bad header values: {exc}") from None
    rows = lines[1:]
    if len(rows) != height:
        raise MapError(f"expected {height} rows, got {len(rows)}")
    cells = np.zeros((height, width), dtype=np.uint8)
    for r, row in enumerate(rows):
        if len(row) != width:
            raise MapError(f"row {r} has length {len(row)}, expected {width}")
        for c, ch in enumerate(row):
            if ch not in _CHAR_TO_CELL:
                raise MapError(f"unknown cell char {ch!r} at ({c},{r})")
            cells[r, c] = _CHAR_TO_CELL[ch]
    return MapGrid(width, height, cell_size, cells)


def load_map(path: str | Path) -> MapGrid:
    return parse_map(Path(path).read_text())


def dump_map(grid: MapGrid) -> str:
    lines = [f"{grid.width} {grid.height} {grid.cell_size:g}"]
    for r in range(grid.height):
        lines.append("".join(_CELL_TO_CHAR[int(v)] for v in grid.cells[r]))
    return "\n".join(lines) + "\n"


def _yard_rows(size: int) -> list[str]:
    """Symmetric deathmatch arena: outer ring, four pillar blocks, a cross wall."""
    rows = [["." for _ in range(size)] for _ in range(size)]
    for i in range(size):
        rows[0][i] = rows[size - 1][i] = "#"
        rows[i][0] = rows[i][size - 1] = "#"
    q = size // 4
    for br, bc in ((q, q), (q, size - q - 2), (size - q - 2, q), (size - q - 2, size - q - 2)):
        for r in range(br, br + 2):
            for c in range(bc, bc + 2):
                rows[r][c] = "#"
    mid = size // 2
    for off in range(-(size // 6), size // 6 + 1):
        rows[mid][mid + off] = "#"
    # door gaps in the cross wall
    rows[mid][mid - size // 12] = "."
    rows[mid][mid + size // 12] = "."
    for i in range(2, size - 2, 2):
        rows[2][i] = "T"
        rows[size - 3][i] = "C"
    return ["".join(r) for r in rows]


def builtin_deathmatch_map(size: int = 40, cell_size: float = 1.0) -> MapGrid:
    text = f"{size} {size} {cell_size:g}\n" + "\n".join(_yard_rows(size))
    return parse_map(text)


def builtin_aimtrain_map(size: int = 32, cell_size: float = 1.0) -> MapGrid:
    rows = [["." for _ in range(size)] for _ in range(size)]
    for i in range(size):
        rows[0][i] = rows[size - 1][i] = "#"
        rows[i][0] = rows[i][size - 1] = "#"
    rows[size // 2][size // 2] = "C"
    text = f"{size} {size} {cell_size:g}\n" + "\n".join("".join(r) for r in rows)
    return parse_map(text)
