"""Spatial memory: a rasterized top-view of the path walked since the last
landmark.

The 200x200 image starts at 5 m/px with the trace origin pinned to the
center pixel. Whenever a new point would land closer than 10 px to the
boundary, the scale grows by 1.25x (re-rasterizing the whole trace) until
it fits. Geo points project onto a local tangent plane about the origin:
x grows east, y grows north, pixel rows grow downward.

The raster stores class codes (background/path/start/current); colors are
applied only at PNG export. Path pixels live in a separate layer updated
incrementally; markers are composed on read so they never leave stale
pixels behind.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .citygraph import EARTH_RADIUS_M, GeoPoint

IMAGE_SIZE = 200
CENTER_PX = IMAGE_SIZE // 2
MARGIN_PX = 10
INITIAL_SCALE_M_PER_PX = 5.0
RESCALE_FACTOR = 1.25
START_MARKER_HALF = 2  # 5x5 square
CURRENT_MARKER_RADIUS = 3

CLS_BACKGROUND = 0
CLS_PATH = 1
CLS_START = 2
CLS_CURRENT = 3

_DEG = math.pi / 180.0

_r = CURRENT_MARKER_RADIUS
_yy, _xx = np.ogrid[-_r:_r + 1, -_r:_r + 1]
_DISK_MASK = _xx * _xx + _yy * _yy <= _r * _r


def _local_meters(origin: GeoPoint, p: GeoPoint) -> tuple[float, float]:
    """Equirectangular tangent-plane offset (east_m, north_m) about origin."""
    east = (p.lon - origin.lon) * math.cos(origin.lat * _DEG) * EARTH_RADIUS_M * _DEG
    north = (p.lat - origin.lat) * EARTH_RADIUS_M * _DEG
    return east, north


def _pixel(origin: GeoPoint, p: GeoPoint, scale: float) -> tuple[int, int]:
    east, north = _local_meters(origin, p)
    px = int(math.floor(CENTER_PX + east / scale + 0.5))
    py = int(math.floor(CENTER_PX - north / scale + 0.5))
    return px, py


def _within_margin(px: int, py: int) -> bool:
    lo, hi = MARGIN_PX, IMAGE_SIZE - MARGIN_PX
    return lo <= px <= hi and lo <= py <= hi


def _draw_segment(layer: np.ndarray, a: tuple[int, int], b: tuple[int, int]) -> None:
    """Integer line rasterization (Bresenham). Plain loops beat vectorized
    drawing here: segments are a handful of pixels at walking scales."""
    (x0, y0), (x1, y1) = a, b
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        layer[y0, x0] = 1
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def render_path_layer(origin: GeoPoint, trace: list[GeoPoint], scale: float) -> np.ndarray:
    """One-shot rasterization of a full trace at a fixed scale."""
    layer = np.zeros((IMAGE_SIZE, IMAGE_SIZE), dtype=np.uint8)
    pixels = [_pixel(origin, p, scale) for p in trace]
    if len(pixels) == 1:
        px, py = pixels[0]
        layer[py, px] = 1
    for a, b in zip(pixels, pixels[1:]):
        _draw_segment(layer, a, b)
    return layer


@dataclass
class MemoryImage:
    """Single-writer raster memory for one episode leg."""

    origin: GeoPoint
    trace: list[GeoPoint]
    rescale_count: int = 0
    path_layer: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        if self.path_layer is None:
            self.path_layer = render_path_layer(self.origin, self.trace, self.scale)

    @property
    def scale(self) -> float:
        # 5 * 1.25^n is exact in binary floating point at any plausible n
        return INITIAL_SCALE_M_PER_PX * RESCALE_FACTOR**self.rescale_count

    @property
    def current(self) -> GeoPoint:
        return self.trace[-1]

    def pixel_of(self, p: GeoPoint) -> tuple[int, int]:
        return _pixel(self.origin, p, self.scale)

    @property
    def raster(self) -> np.ndarray:
        """Class-code image: path layer with the two markers composed on top."""
        img = np.where(self.path_layer > 0, np.uint8(CLS_PATH), np.uint8(CLS_BACKGROUND))
        sx, sy = self.pixel_of(self.trace[0])
        img[sy - START_MARKER_HALF:sy + START_MARKER_HALF + 1,
            sx - START_MARKER_HALF:sx + START_MARKER_HALF + 1] = CLS_START
        cx, cy = self.pixel_of(self.current)
        r = CURRENT_MARKER_RADIUS
        patch = img[cy - r:cy + r + 1, cx - r:cx + r + 1]
        patch[_DISK_MASK] = CLS_CURRENT
        return img


def init_memory(start: GeoPoint) -> MemoryImage:
    """Fresh memory: scale 5 m/px, both markers at the center pixel."""
    return MemoryImage(origin=start, trace=[start])


def append_point(mem: MemoryImage, p: GeoPoint) -> MemoryImage:
    """Extends the trace to p, rescaling by 1.25x steps until the new pixel
    keeps 10 px clearance from every boundary. Mutates and returns mem."""
    if not (math.isfinite(p.lat) and math.isfinite(p.lon)):
        raise ValueError(f"non-finite point {p}")
    prev_pixel = mem.pixel_of(mem.current)
    mem.trace.append(p)
    px, py = mem.pixel_of(p)
    if _within_margin(px, py):
        _draw_segment(mem.path_layer, prev_pixel, (px, py))
        return mem
    while not _within_margin(px, py):
        mem.rescale_count += 1
        px, py = mem.pixel_of(p)
    mem.path_layer = render_path_layer(mem.origin, mem.trace, mem.scale)
    return mem


def reset_at_landmark(mem: MemoryImage, current: GeoPoint) -> MemoryImage:
    """Reinitializes the memory to start from the current position."""
    return init_memory(current)


def featurize(mem: MemoryImage, blocks: int = 10) -> np.ndarray:
    """Block-occupancy histogram of non-background pixels plus the scale.

    Default: 10x10 blocks of 20x20 px, each reporting its occupied fraction,
    concatenated with scale / 5 (so a fresh memory reads 1.0). Length 101.
    """
    raster = mem.raster
    size = IMAGE_SIZE // blocks
    occupied = (raster != CLS_BACKGROUND).astype(np.float64)
    grid = occupied.reshape(blocks, size, blocks, size).sum(axis=(1, 3)) / (size * size)
    return np.concatenate([grid.ravel(), [mem.scale / INITIAL_SCALE_M_PER_PX]])


_PALETTE = {
    CLS_BACKGROUND: (255, 255, 255),
    CLS_PATH: (255, 0, 0),
    CLS_START: (0, 0, 255),
    CLS_CURRENT: (0, 0, 255),
}


def export_png(mem: MemoryImage, path: str | Path) -> None:
    """Writes the memory as a PNG (red path, blue markers, white background)
    with a sidecar JSON recording the scale."""
    from PIL import Image

    raster = mem.raster
    rgb = np.zeros((IMAGE_SIZE, IMAGE_SIZE, 3), dtype=np.uint8)
    for cls, color in _PALETTE.items():
        rgb[raster == cls] = color
    path = Path(path)
    Image.fromarray(rgb, "RGB").save(path)
    sidecar = path.with_suffix(path.suffix + ".json") if path.suffix != ".png" \
        else path.with_suffix(".json")
    with open(sidecar, "w", encoding="utf-8") as f:
        json.dump({"scale_m_per_px": mem.scale}, f)
        f.write("\n")


def png_bytes(mem: MemoryImage) -> bytes:
    """In-memory PNG encoding (used by the HTTP service)."""
    import io

    from PIL import Image

    raster = mem.raster
    rgb = np.zeros((IMAGE_SIZE, IMAGE_SIZE, 3), dtype=np.uint8)
    for cls, color in _PALETTE.items():
        rgb[raster == cls] = color
    buf = io.BytesIO()
    Image.fromarray(rgb, "RGB").save(buf, format="PNG")
    return buf.getvalue()
