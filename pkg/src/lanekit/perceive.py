"""Post-segmentation front end: bird's-eye masks, cleaning and line following.

Grid convention
---------------
A :class:`MaskGrid` stores ``values[row, col]`` with rows running forward and
columns running to the left of the vehicle::

    x = origin[0] + row * resolution
    y = origin[1] + col * resolution

so cell ``(0, 0)`` is the rear-right corner of the covered area.  Image
homographies act on ``(col, row)`` pixel coordinates, as in OpenCV.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import EmptyGridError, NonInvertibleHomographyError

TRACKED, RECOVERED, LOST = "tracked", "recovered", "lost"


@dataclass(frozen=True)
class MaskGrid:
    values: np.ndarray
    resolution: float = 0.05
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError("mask values must be a 2-D array")
        if v.shape[0] < 16 or v.shape[1] < 16:
            raise ValueError(f"mask must be at least 16x16 cells, got {v.shape}")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        if v.dtype != np.uint8:
            v = np.clip(v, 0, 255).astype(np.uint8)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def blank(cls, height: int, width: int, resolution: float = 0.05,
              origin=(0.0, 0.0)) -> "MaskGrid":
        return cls(np.zeros((height, width), dtype=np.uint8), resolution, origin)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def with_values(self, values) -> "MaskGrid":
        return MaskGrid(values, self.resolution, self.origin)

    def cell_centers(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        cols = np.asarray(cols, dtype=float)
        return np.column_stack([self.origin[0] + rows * self.resolution,
                                self.origin[1] + cols * self.resolution])

    def to_cell(self, points) -> np.ndarray:
        """Fractional ``(row, col)`` indices of vehicle-frame points."""
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.column_stack([(p[:, 0] - self.origin[0]) / self.resolution,
                                (p[:, 1] - self.origin[1]) / self.resolution])


def rasterize_points(grid: MaskGrid, points, radius: float, value: int = 255) -> MaskGrid:
    """Draw filled discs of ``radius`` metres around each point."""
    out = grid.values.copy()
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts):
        r = radius / grid.resolution
        k = int(np.ceil(r))
        dr, dc = np.mgrid[-k:k + 1, -k:k + 1]
        cells = grid.to_cell(pts)
        centers = np.rint(cells).astype(int)
        frac = cells - centers
        inside = ((dr[None] - frac[:, 0, None, None]) ** 2
                  + (dc[None] - frac[:, 1, None, None]) ** 2) <= r * r
        rr = (centers[:, 0, None, None] + dr[None])[inside]
        cc = (centers[:, 1, None, None] + dc[None])[inside]
        ok = (rr >= 0) & (rr < out.shape[0]) & (cc >= 0) & (cc < out.shape[1])
        out[rr[ok], cc[ok]] = value
    return grid.with_values(out)


@dataclass(frozen=True)
class CameraModel:
    """Homography from image pixels ``(u, v, 1)`` to BEV cells ``(col, row, 1)``."""

    homography: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.homography, dtype=float).reshape(3, 3)
        if abs(np.linalg.det(H)) <= 1e-12:
            raise NonInvertibleHomographyError("homography is singular")
        object.__setattr__(self, "homography", H)


def ipm_project(image_mask, camera: CameraModel, target: MaskGrid) -> MaskGrid:
    """Warp an image-space mask onto the bird's-eye grid ``target``.

    Each target cell looks up its source pixel through the inverse
    homography (nearest neighbour); cells that map outside the image are 0.
    """
    H = np.asarray(camera.homography, dtype=float)
    if abs(np.linalg.det(H)) <= 1e-12:
        raise NonInvertibleHomographyError("homography is singular")
    img = np.asarray(image_mask)
    Hinv = np.linalg.inv(H)
    rows, cols = np.mgrid[0:target.height, 0:target.width]
    cells = np.stack([cols.ravel(), rows.ravel(), np.ones(rows.size)])
    src = Hinv @ cells
    with np.errstate(divide="ignore", invalid="ignore"):
        u = src[0] / src[2]
        v = src[1] / src[2]
    ok = np.isfinite(u) & np.isfinite(v) & (src[2] > 0)
    ui = np.full(u.shape, -1, dtype=np.int64)
    vi = np.full(v.shape, -1, dtype=np.int64)
    ui[ok] = np.rint(u[ok]).astype(np.int64)
    vi[ok] = np.rint(v[ok]).astype(np.int64)
    ok &= (ui >= 0) & (ui < img.shape[1]) & (vi >= 0) & (vi < img.shape[0])
    out = np.zeros(rows.size, dtype=np.uint8)
    out[ok] = img[vi[ok], ui[ok]]
    return target.with_values(out.reshape(target.height, target.width))


def clean_mask(grid: MaskGrid, threshold: int = 128, open_radius: int = 1) -> MaskGrid:
    """Binarize at ``threshold`` and apply a square morphological opening."""
    if not 1 <= threshold <= 254:
        raise ValueError(f"threshold must lie in [1, 254], got {threshold}")
    binary = grid.values >= threshold
    if open_radius > 0:
        size = 2 * open_radius + 1
        binary = ndimage.binary_opening(binary, structure=np.ones((size, size), bool))
    return grid.with_values(binary.astype(np.uint8) * 255)


@dataclass(frozen=True)
class WlfConfig:
    window_width: float = 1.0
    window_height: float = 1.5
    min_points: int = 5
    max_windows: int = 40
    seed_band_height: float = 3.0
    recovery_radius: float = 2.5

    def __post_init__(self):
        for name in ("window_width", "window_height", "seed_band_height", "recovery_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.min_points < 3 or self.max_windows < 1:
            raise ValueError("min_points must be >= 3 and max_windows >= 1")


@dataclass(frozen=True)
class LineSelection:
    points: np.ndarray
    cells: np.ndarray
    status: str
    lost_beyond: float | None = None


@dataclass(frozen=True)
class WlfResult:
    left: LineSelection
    right: LineSelection
    shared_seed: bool = False

    @property
    def left_points(self) -> np.ndarray:
        return self.left.points

    @property
    def right_points(self) -> np.ndarray:
        return self.right.points

    @property
    def status(self) -> dict:
        return {"left": self.left.status, "right": self.right.status}


_EMPTY_LINE = LineSelection(np.empty((0, 2)), np.empty((0, 2), dtype=int), LOST)


def _clusters(counts: np.ndarray, max_gap: int) -> list[tuple[int, int]]:
    """Runs of non-zero entries, merging runs separated by ``<= max_gap`` zeros."""
    nz = np.flatnonzero(counts)
    if nz.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(nz) > max_gap + 1)
    starts = np.concatenate([[nz[0]], nz[breaks + 1]])
    ends = np.concatenate([nz[breaks], [nz[-1]]])
    return list(zip(starts, ends))


def _prior_lateral(prior, x) -> float | None:
    """Lateral coordinate of a prior polyline at forward coordinate ``x``."""
    if prior is None or len(prior) < 2:
        return None
    p = np.asarray(prior)
    order = np.argsort(p[:, 0])
    xs, ys = p[order, 0], p[order, 1]
    if x < xs[0] - 5.0 or x > xs[-1] + 5.0:
        return None
    if x <= xs[0] or x >= xs[-1]:
        # linear continuation past the ends of the prior
        i0, i1 = (0, min(1, len(xs) - 1)) if x <= xs[0] else (len(xs) - 2, len(xs) - 1)
        if xs[i1] == xs[i0]:
            return float(ys[i0])
        slope = (ys[i1] - ys[i0]) / (xs[i1] - xs[i0])
        return float(ys[i0] + slope * (x - xs[i0]))
    return float(np.interp(x, xs, ys))


class _Follower:
    def __init__(self, binary: np.ndarray, grid: MaskGrid, config: WlfConfig):
        self.b = binary
        self.grid = grid
        self.cfg = config
        self.res = grid.resolution
        self.half_w = max(1, int(round(config.window_width / 2 / self.res)))
        self.h = max(1, int(round(config.window_height / self.res)))

    def box(self, r0: int, r1: int, c0: int, c1: int):
        r0, c0 = max(r0, 0), max(c0, 0)
        r1, c1 = min(r1, self.b.shape[0]), min(c1, self.b.shape[1])
        if r1 <= r0 or c1 <= c0:
            return np.empty((0, 2), dtype=int)
        rr, cc = np.nonzero(self.b[r0:r1, c0:c1])
        return np.column_stack([rr + r0, cc + c0])

    def corridor(self, r0: int, r1: int, lateral) -> np.ndarray:
        """Cells in rows ``[r0, r1)`` within half a window of ``lateral(row)``."""
        found = []
        for r in range(max(r0, 0), min(r1, self.b.shape[0])):
            c = lateral(r)
            if c is None:
                continue
            cells = self.box(r, r + 1, int(np.floor(c)) - self.half_w,
                             int(np.ceil(c)) + self.half_w + 1)
            if len(cells):
                found.append(cells)
        return np.vstack(found) if found else np.empty((0, 2), dtype=int)

    def seed_from_density(self, side: str) -> float | None:
        band = max(1, int(round(self.cfg.seed_band_height / self.res)))
        counts = self.b[:band].sum(axis=0)
        col0 = -self.grid.origin[1] / self.res  # column of the vehicle axis
        best = None
        for a, z in _clusters(counts, max_gap=2):
            mass = counts[a:z + 1].sum()
            if mass < self.cfg.min_points:
                continue
            cols = np.arange(a, z + 1)
            center = float(np.average(cols, weights=counts[a:z + 1]))
            if side == "left" and z < col0 or side == "right" and a > col0:
                continue
            dist = abs(center - col0)
            if best is None or dist < best[0]:
                best = (dist, center)
        return None if best is None else best[1]

    def follow(self, seed_col: float, prior, taken: np.ndarray | None) -> LineSelection:
        cfg, res = self.cfg, self.res
        prior_cells = None
        if prior is not None and len(prior) >= 2:
            prior_cells = self.grid.to_cell(prior)

        def prior_col(row: float):
            if prior_cells is None:
                return None
            return _prior_lateral(prior_cells, row)

        center = np.array([self.h / 2.0, seed_col])
        direction = np.array([1.0, 0.0])
        prev_center = None
        collected = []
        status = TRACKED
        lost_beyond = None
        for _ in range(cfg.max_windows):
            if center[0] - self.h / 2 >= self.b.shape[0]:
                break
            r0 = int(np.floor(center[0] - self.h / 2))
            c0 = int(np.floor(center[1])) - self.half_w
            cells = self.box(r0, r0 + self.h, c0, c0 + 2 * self.half_w + 1)
            cells = _drop_taken(cells, taken)
            if len(cells) < cfg.min_points:
                cells = self.recover(r0, center, direction, prior_col, taken)
                if len(cells) < cfg.min_points:
                    lost_beyond = float(self.grid.origin[0] + r0 * res)
                    break
                status = RECOVERED
            collected.append(cells)
            mean = cells.mean(axis=0)
            if prev_center is not None:
                step = mean - prev_center
                if np.hypot(*step) > 1e-9:
                    direction = step / np.hypot(*step)
            direction[0] = max(direction[0], 0.3)
            direction /= np.hypot(*direction)
            prev_center = mean
            nxt = mean + direction * self.h
            # no rows skipped past the last hit, and never backwards
            nxt[0] = min(nxt[0], cells[:, 0].max() + 1 + self.h / 2)
            nxt[0] = max(nxt[0], center[0] + 0.5 * self.h)
            center = nxt
            if not -self.half_w <= center[1] <= self.b.shape[1] + self.half_w:
                break
        if not collected:
            return LineSelection(np.empty((0, 2)), np.empty((0, 2), dtype=int), LOST,
                                 lost_beyond)
        cells = np.unique(np.vstack(collected), axis=0)
        return LineSelection(self.row_centroids(cells), cells, status, lost_beyond)

    def recover(self, r0: int, center, direction, prior_col, taken) -> np.ndarray:
        reach = self.h + int(round(self.cfg.recovery_radius / self.res))
        slope = direction[1] / direction[0]

        def lateral(row):
            c = prior_col(row)
            if c is None:
                c = center[1] + slope * (row - center[0])
            return c

        cells = _drop_taken(self.corridor(r0, r0 + reach, lateral), taken)
        if len(cells) < self.cfg.min_points:
            return cells
        # first window-high block with enough support; skips stray tail cells
        rows = np.sort(cells[:, 0])
        counts = np.searchsorted(rows, rows + self.h) - np.arange(len(rows))
        ok = np.flatnonzero(counts >= self.cfg.min_points)
        if len(ok) == 0:
            return cells[:0]
        first = rows[ok[0]]
        return cells[(cells[:, 0] >= first) & (cells[:, 0] < first + self.h)]

    def row_centroids(self, cells: np.ndarray) -> np.ndarray:
        rows, inv = np.unique(cells[:, 0], return_inverse=True)
        col_mean = np.bincount(inv, weights=cells[:, 1]) / np.bincount(inv)
        return self.grid.cell_centers(rows, col_mean)


def _drop_taken(cells: np.ndarray, taken: np.ndarray | None) -> np.ndarray:
    if taken is None or len(cells) == 0:
        return cells
    return cells[~taken[cells[:, 0], cells[:, 1]]]


def wlf_select(grid: MaskGrid, config: WlfConfig | None = None, prior=None) -> WlfResult:
    """Window-based line following for the two lines bounding the ego lane.

    Parameters
    ----------
    grid : MaskGrid
        Cleaned bird's-eye mask; any non-zero cell is a feature point.
    config : WlfConfig, optional
    prior : mapping, optional
        ``{"left": polyline, "right": polyline}`` with the previous line
        estimates in the current vehicle frame.  Used to seed the search and
        to recover across gaps.

    Returns
    -------
    WlfResult
        Per line: one point per grid row (centroid of the selected cells, so
        the forward coordinate increases strictly), the selected cells and a
        status in ``{"tracked", "recovered", "lost"}``.

    Raises
    ------
    EmptyGridError
        When neither side yields a seed; the all-lost result is attached.
    """
    cfg = config or WlfConfig()
    prior = prior or {}
    follower = _Follower(grid.values > 0, grid, cfg)
    seeds = {}
    for side in ("left", "right"):
        seed = None
        p = prior.get(side)
        if p is not None and len(p) >= 2:
            col = _prior_lateral(grid.to_cell(p), follower.h / 2.0)
            if col is not None:
                band = int(round(cfg.seed_band_height / grid.resolution))
                c0 = int(np.floor(col)) - 2 * follower.half_w
                cells = follower.box(0, band, c0, c0 + 4 * follower.half_w + 1)
                if len(cells) >= cfg.min_points:
                    seed = float(cells[:, 1].mean())
                else:
                    seed = col
        if seed is None:
            seed = follower.seed_from_density(side)
        seeds[side] = seed
    if seeds["left"] is None and seeds["right"] is None:
        result = WlfResult(_EMPTY_LINE, _EMPTY_LINE)
        raise EmptyGridError("no line seed found on either side", result)

    shared = (seeds["left"] is not None and seeds["right"] is not None
              and abs(seeds["left"] - seeds["right"]) < 2 * follower.half_w)
    lines = {}
    taken = np.zeros(grid.values.shape, dtype=bool)
    for side in ("left", "right"):
        if seeds[side] is None:
            lines[side] = _EMPTY_LINE
            continue
        sel = follower.follow(seeds[side], prior.get(side), taken)
        lines[side] = sel
        if len(sel.cells):
            taken[sel.cells[:, 0], sel.cells[:, 1]] = True
    return WlfResult(lines["left"], lines["right"], shared)


_PGM_HEADER = re.compile(rb"^P5\s+(?:#.*\s+)*(\d+)\s+(?:#.*\s+)*(\d+)\s+(?:#.*\s+)*(\d+)\s")


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) portable graymap with maxval <= 255."""
    data = Path(path).read_bytes()
    m = _PGM_HEADER.match(data)
    if not m:
        raise ValueError(f"{path}: not a binary PGM file")
    width, height, maxval = (int(g) for g in m.groups())
    if maxval > 255:
        raise ValueError(f"{path}: 16-bit PGM is not supported")
    body = data[m.end():m.end() + width * height]
    if len(body) != width * height:
        raise ValueError(f"{path}: truncated pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path, values) -> None:
    v = np.asarray(values)
    if v.dtype != np.uint8:
        v = np.clip(v, 0, 255).astype(np.uint8)
    header = f"P5\n{v.shape[1]} {v.shape[0]}\n255\n".encode()
    Path(path).write_bytes(header + np.ascontiguousarray(v).tobytes())


def frame_path(directory, frame: int) -> Path:
    return Path(directory) / f"frame_{frame:06d}.pgm"


def list_frames(directory) -> list[Path]:
    pat = re.compile(r"^frame_(\d{6})\.pgm$")
    names = sorted(n for n in os.listdir(directory) if pat.match(n))
    return [Path(directory) / n for n in names]
