"""Procedural anime-style illustrations for desk-scale experiments.

Each picture is cel-shaded: a soft gradient sky, flat-filled shapes with a
two-tone shadow, dark anti-aliased line art, hair-like strokes and eye
highlights.  Drawing happens at 4x resolution and is box-filtered down,
which gives the soft line edges of digitally inked art.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from PIL import Image, ImageChops, ImageDraw

from .imagecore import RasterImage, save_image

__all__ = ["anime_like", "write_corpus"]

SUPERSAMPLE = 4


def _color(rng, lo=40, hi=255):
    return tuple(int(v) for v in rng.integers(lo, hi, size=3))


def _shade(color, k):
    return tuple(max(0, min(255, int(c * k))) for c in color)


def _gradient(size, top, bottom):
    t = np.linspace(0.0, 1.0, size)[:, None, None]
    arr = (1 - t) * np.asarray(top, float) + t * np.asarray(bottom, float)
    return Image.fromarray(np.repeat(arr, size, axis=1).astype(np.uint8))


def _blob(rng, s):
    """Random ellipse or polygon footprint, as (kind, geometry)."""
    cx, cy = rng.uniform(0.1, 0.9, size=2) * s
    r = rng.uniform(0.08, 0.3) * s
    if rng.random() < 0.5:
        ar = rng.uniform(0.5, 1.6)
        return "ellipse", [cx - r, cy - r * ar, cx + r, cy + r * ar]
    n = int(rng.integers(3, 8))
    angles = np.sort(rng.uniform(0, 2 * math.pi, n))
    radii = r * rng.uniform(0.6, 1.2, n)
    return "polygon", [(cx + rr * math.cos(a), cy + rr * math.sin(a)) for a, rr in zip(angles, radii)]


def _draw_shape(draw, kind, geom, **kw):
    if kind == "ellipse":
        draw.ellipse(geom, **kw)
    else:
        draw.polygon(geom, **kw)


def _offset(kind, geom, dx, dy):
    if kind == "ellipse":
        return [geom[0] + dx, geom[1] + dy, geom[2] + dx, geom[3] + dy]
    return [(x + dx, y + dy) for x, y in geom]


def anime_like(seed: int, size: int = 128) -> RasterImage:
    """One deterministic RGB illustration of ``size`` x ``size`` pixels."""
    rng = np.random.default_rng(seed)
    s = size * SUPERSAMPLE
    line = _shade(_color(rng, 0, 60), 1.0)
    canvas = _gradient(s, _color(rng, 150), _color(rng, 90)).convert("RGB")
    draw = ImageDraw.Draw(canvas)

    # background décor: soft discs and stripes
    for _ in range(int(rng.integers(2, 6))):
        cx, cy = rng.uniform(0, s, 2)
        r = rng.uniform(0.03, 0.12) * s
        draw.ellipse([cx - r, cy - r, cx + r, cy + r], fill=_color(rng, 120))
    if rng.random() < 0.5:
        step = int(rng.uniform(0.06, 0.15) * s)
        col = _color(rng, 100)
        for y in range(0, s, 2 * step):
            draw.rectangle([0, y, s, y + step // 2], fill=col)

    lw = SUPERSAMPLE * int(rng.integers(1, 3))
    for _ in range(int(rng.integers(3, 7))):
        kind, geom = _blob(rng, s)
        fill = _color(rng)
        mask = Image.new("L", (s, s), 0)
        _draw_shape(ImageDraw.Draw(mask), kind, geom, fill=255)
        canvas.paste(Image.new("RGB", (s, s), fill), (0, 0), mask)
        # cel shadow: the shape shifted, clipped to the shape itself
        dx, dy = rng.uniform(-0.06, 0.06, 2) * s
        shadow = Image.new("L", (s, s), 0)
        _draw_shape(ImageDraw.Draw(shadow), kind, _offset(kind, geom, dx, dy), fill=255)
        shadow = ImageChops.subtract(mask, shadow)
        canvas.paste(Image.new("RGB", (s, s), _shade(fill, rng.uniform(0.55, 0.8))), (0, 0), shadow)
        _draw_shape(draw, kind, geom, outline=line, width=lw)

    # hair-like strands
    hair = _color(rng)
    for _ in range(int(rng.integers(4, 12))):
        x0, y0 = rng.uniform(0, s, 2)
        ang = rng.uniform(0, 2 * math.pi)
        amp = 0.15 * s * rng.uniform(-1.0, 1.0)
        reach = rng.uniform(0.2, 0.45) * s
        pts = []
        for t in np.linspace(0, 1, 16):
            bend = amp * math.sin(t * math.pi)
            length = t * reach
            pts.append((x0 + length * math.cos(ang) - bend * math.sin(ang),
                        y0 + length * math.sin(ang) + bend * math.cos(ang)))
        draw.line(pts, fill=hair, width=int(rng.integers(3, 8)) * SUPERSAMPLE, joint="curve")
        draw.line(pts, fill=line, width=max(SUPERSAMPLE, lw // 2))

    # eyes with specular highlights
    for _ in range(int(rng.integers(0, 3))):
        cx, cy = rng.uniform(0.2, 0.8, 2) * s
        rx, ry = rng.uniform(0.03, 0.07) * s, rng.uniform(0.05, 0.1) * s
        draw.ellipse([cx - rx, cy - ry, cx + rx, cy + ry], fill=_color(rng, 20, 200),
                     outline=line, width=lw)
        hr = rx * 0.35
        draw.ellipse([cx - rx * 0.4 - hr, cy - ry * 0.4 - hr, cx - rx * 0.4 + hr,
                      cy - ry * 0.4 + hr], fill=(255, 255, 255))

    small = canvas.resize((size, size), Image.Resampling.BOX)
    return RasterImage.from_u8(np.asarray(small, dtype=np.uint8))


def write_corpus(directory, count: int, size: int = 128, seed: int = 0,
                 prefix: str = "illust") -> list[Path]:
    """Write ``count`` PNG illustrations into ``directory``; returns their paths."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        p = out / f"{prefix}_{i:03d}.png"
        save_image(anime_like(seed * 100003 + i, size), p)
        paths.append(p)
    return paths
