"""Static visualization emitters: SVG scatter of a 2-D pool and a raster of
a model's decision regions. File emission only, deterministic for fixed
inputs; both formats open their files with a format-identifying first line
(the XML declaration, the PPM magic).
"""

from __future__ import annotations

import numpy as np

from .condensation import CondensationResult
from .errors import UnsupportedDimensionError
from .experience import ExperiencePool, squared_distance_block
from .neighbors import NearestBoundaryModel

__all__ = ["PALETTE", "scatter_svg", "region_ppm"]

# one color per action id, reused by every emitter (and the report figures)
PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)


def action_color(action: int) -> str:
    return PALETTE[action % len(PALETTE)]


def _hex_rgb(color: str) -> tuple[int, int, int]:
    return int(color[1:3], 16), int(color[3:5], 16), int(color[5:7], 16)


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def scatter_svg(
    pool: ExperiencePool,
    path,
    condensation: CondensationResult | None = None,
    size: int = 640,
    title: str | None = None,
) -> None:
    """Scatter of a 2-D pool, colored by action.

    With a condensation result, boundary points are filled and interior
    points hollow.
    """
    if pool.dim != 2:
        raise UnsupportedDimensionError(f"scatter needs a 2-D pool, got dim {pool.dim}")
    pool.require_nonempty()
    lo = pool.states.min(axis=0)
    hi = pool.states.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    margin = 0.06 * size
    scale = (size - 2 * margin) / span

    def to_px(p):
        x = margin + (p[0] - lo[0]) * scale[0]
        y = size - margin - (p[1] - lo[1]) * scale[1]  # y grows upward
        return x, y

    interior = set()
    if condensation is not None:
        interior = set(condensation.interior_indices)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{size // 2}" y="18" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{title}</text>'
        )
    for i in range(len(pool)):
        x, y = to_px(pool.states[i])
        color = action_color(int(pool.actions[i]))
        if i in interior:
            parts.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="none" '
                f'stroke="{color}" stroke-width="1"/>'
            )
        else:
            parts.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="{color}"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


def region_ppm(
    model: NearestBoundaryModel,
    path,
    bounds: tuple[float, float, float, float] | None = None,
    width: int = 400,
    height: int = 400,
) -> None:
    """Decision-region raster: each cell colored by the model's action.

    ``bounds`` is (x_min, x_max, y_min, y_max); defaults to the model pool's
    bounding box padded by 5%. Written as binary PPM (P6). Rows run from
    y_max down to y_min, image convention.
    """
    if model.pool.dim != 2:
        raise UnsupportedDimensionError(
            f"region raster needs a 2-D model, got dim {model.pool.dim}"
        )
    if bounds is None:
        lo = model.pool.states.min(axis=0)
        hi = model.pool.states.max(axis=0)
        pad = 0.05 * np.maximum(hi - lo, 1e-12)
        bounds = (lo[0] - pad[0], hi[0] + pad[0], lo[1] - pad[1], hi[1] + pad[1])
    x0, x1, y0, y1 = bounds
    xs = x0 + (np.arange(width) + 0.5) * (x1 - x0) / width
    ys = y1 - (np.arange(height) + 0.5) * (y1 - y0) / height
    grid = np.empty((height * width, 2), dtype=np.float64)
    grid[:, 0] = np.tile(xs, height)
    grid[:, 1] = np.repeat(ys, width)
    # exact NN scan over the model pool; backends answer identically, the
    # vectorized scan is just the fastest way to ask
    d2 = squared_distance_block(grid, model.pool.states)
    acts = model.pool.actions[np.argmin(d2, axis=1)]
    lut = np.array([_hex_rgb(PALETTE[a]) for a in range(len(PALETTE))], dtype=np.uint8)
    pixels = lut[np.asarray(acts) % len(PALETTE)]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        fh.write(pixels.astype(np.uint8).tobytes())
