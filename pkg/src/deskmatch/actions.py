"""Action labels and the uneven 19-bin mouse grid shared across the pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Per-tick mouse counts, finer near zero, coarser at the edges.
MOUSE_BIN_VALUES: tuple[int, ...] = (
    -300, -100, -60, -30, -20, -10, -5, -3, -1, 0, 1, 3, 5, 10, 20, 30, 60, 100, 300,
)
N_MOUSE_BINS = len(MOUSE_BIN_VALUES)
MOUSE_ZERO_BIN = MOUSE_BIN_VALUES.index(0)

_GRID = np.array(MOUSE_BIN_VALUES, dtype=np.int64)

KEY_ORDER = ("w", "a", "s", "d", "space", "r", "fire")


def quantize_mouse(delta_counts: int | float, grid: np.ndarray = _GRID) -> int:
    """Index of the grid value nearest to delta; ties go to smaller magnitude."""
    dist = np.abs(grid - delta_counts)
    best = np.flatnonzero(dist == dist.min())
    if len(best) == 1:
        return int(best[0])
    return int(best[np.argmin(np.abs(grid[best]))])


def quantize_mouse_many(deltas: np.ndarray, grid: np.ndarray = _GRID) -> np.ndarray:
    """Vectorized quantize_mouse with the same tie-break."""
    dist = np.abs(grid[None, :] - np.asarray(deltas, dtype=np.float64)[:, None])
    # bias ties toward smaller |grid value| by a sub-integer margin
    tiebreak = np.abs(grid).astype(np.float64)[None, :] * 1e-9
    return np.argmin(dist + tiebreak, axis=1).astype(np.int64)


def dequantize(bin_index: int, grid: np.ndarray = _GRID) -> int:
    if not 0 <= bin_index < len(grid):
        raise IndexError(f"mouse bin index {bin_index} out of range 0..{len(grid) - 1}")
    return int(grid[bin_index])


def snap_counts(counts: float) -> int:
    """Nearest representable mouse move for a desired raw count value."""
    return dequantize(quantize_mouse(int(round(counts))))


@dataclass(frozen=True)
class ActionLabel:
    """One frame's supervised target: six keys + fire + two mouse bins."""

    w: bool = False
    a: bool = False
    s: bool = False
    d: bool = False
    space: bool = False
    r: bool = False
    fire: bool = False
    mouse_x_bin: int = MOUSE_ZERO_BIN
    mouse_y_bin: int = MOUSE_ZERO_BIN

    def __post_init__(self) -> None:
        if not (0 <= self.mouse_x_bin < N_MOUSE_BINS and 0 <= self.mouse_y_bin < N_MOUSE_BINS):
            raise ValueError("mouse bin index out of range")

    def key_bits(self) -> int:
        """Bitfield: bit0=w 1=a 2=s 3=d 4=space 5=r 6=fire."""
        bits = 0
        for i, name in enumerate(KEY_ORDER):
            if getattr(self, name):
                bits |= 1 << i
        return bits

    @classmethod
    def from_bits(cls, bits: int, mouse_x_bin: int, mouse_y_bin: int) -> ActionLabel:
        kw = {name: bool(bits >> i & 1) for i, name in enumerate(KEY_ORDER)}
        return cls(mouse_x_bin=mouse_x_bin, mouse_y_bin=mouse_y_bin, **kw)

    def key_vector(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in KEY_ORDER], dtype=np.float32)
