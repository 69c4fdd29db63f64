"""Slow, obviously-correct scalar reference implementations used by the tests.

Everything here is written as explicit loops over pixels and taps so it
shares no code path with the vectorised library.
"""

from __future__ import annotations

import math

import numpy as np


def rgb_to_ycbcr_pixel(r, g, b):
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 0.5 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 0.5 + 0.5 * r - 0.418688 * g - 0.081312 * b
    return tuple(min(1.0, max(0.0, v)) for v in (y, cb, cr))


def _same_pad_before(n, k, stride):
    out = -(-n // stride)
    total = max((out - 1) * stride + k - n, 0)
    return out, total // 2


def conv2d(x, w, b, stride=1):
    """x (N, C, H, W), w (F, C, k, k): zero-padded Same cross-correlation."""
    n, c, h, wd = x.shape
    f, _, k, _ = w.shape
    oh, pt = _same_pad_before(h, k, stride)
    ow, pl = _same_pad_before(wd, k, stride)
    out = np.zeros((n, f, oh, ow))
    for ni in range(n):
        for fi in range(f):
            for i in range(oh):
                for j in range(ow):
                    acc = b[fi]
                    for ci in range(c):
                        for u in range(k):
                            for v in range(k):
                                yy = i * stride + u - pt
                                xx = j * stride + v - pl
                                if 0 <= yy < h and 0 <= xx < wd:
                                    acc += x[ni, ci, yy, xx] * w[fi, ci, u, v]
                    out[ni, fi, i, j] = acc
    return out


def conv2d_transpose(x, w, b, stride=1):
    """Scatter form of the transposed convolution; w is (Cin, Cout, k, k).

    Each input pixel stamps its kernel onto the stride-x larger output grid,
    offset by the Same padding the matching forward convolution would use.
    """
    n, cin, h, wd = x.shape
    _, cout, k, _ = w.shape
    oh, ow = h * stride, wd * stride
    _, pt = _same_pad_before(oh, k, stride)
    _, pl = _same_pad_before(ow, k, stride)
    out = np.zeros((n, cout, oh, ow))
    for ni in range(n):
        for ci in range(cin):
            for i in range(h):
                for j in range(wd):
                    for co in range(cout):
                        for u in range(k):
                            for v in range(k):
                                yy = i * stride + u - pt
                                xx = j * stride + v - pl
                                if 0 <= yy < oh and 0 <= xx < ow:
                                    out[ni, co, yy, xx] += x[ni, ci, i, j] * w[ci, co, u, v]
    return out + np.asarray(b)[None, :, None, None]


def cubic(t, a=-0.5):
    t = abs(t)
    if t <= 1:
        return (a + 2) * t**3 - (a + 3) * t**2 + 1
    if t < 2:
        return a * t**3 - 5 * a * t**2 + 8 * a * t - 4 * a
    return 0.0


def resample_pixel(plane, oy, ox, ry, rx, method):
    """One output sample of a half-pixel-centred, clamp-to-edge resampler."""
    h, w = plane.shape
    sy = (oy + 0.5) / ry - 0.5
    sx = (ox + 0.5) / rx - 0.5

    def at(y, x):
        return plane[min(max(y, 0), h - 1), min(max(x, 0), w - 1)]

    if method == "nearest":
        return at(int(math.floor((oy + 0.5) / ry)), int(math.floor((ox + 0.5) / rx)))
    if method == "bilinear":
        y0, x0 = math.floor(sy), math.floor(sx)
        fy, fx = sy - y0, sx - x0
        return ((1 - fy) * (1 - fx) * at(y0, x0) + (1 - fy) * fx * at(y0, x0 + 1)
                + fy * (1 - fx) * at(y0 + 1, x0) + fy * fx * at(y0 + 1, x0 + 1))
    y0, x0 = math.floor(sy), math.floor(sx)
    acc = 0.0
    for m in range(-1, 3):
        for n in range(-1, 3):
            acc += cubic(sy - (y0 + m)) * cubic(sx - (x0 + n)) * at(y0 + m, x0 + n)
    return acc


def resample(plane, out_h, out_w, method, ratio=None):
    """Resample to (out_h, out_w); the coordinate ratio defaults to out/in per axis."""
    h, w = plane.shape
    ry, rx = (out_h / h, out_w / w) if ratio is None else (ratio, ratio)
    out = np.empty((out_h, out_w))
    for i in range(out_h):
        for j in range(out_w):
            out[i, j] = resample_pixel(plane, i, j, ry, rx, method)
    return np.clip(out, 0.0, 1.0)


def mse(a, b):
    h, w, c = a.shape
    acc = 0.0
    for i in range(h):
        for j in range(w):
            for k in range(c):
                d = float(a[i, j, k]) * 255.0 - float(b[i, j, k]) * 255.0
                acc += d * d
    return acc / (h * w * c)


def ssim_plane(x, y, size=11, sigma=1.5, c1=1e-4, c2=9e-4):
    """Mean SSIM over every valid Gaussian window, one window at a time."""
    ax = [t - (size - 1) / 2 for t in range(size)]
    g = [[math.exp(-(u * u + v * v) / (2 * sigma * sigma)) for v in ax] for u in ax]
    tot = sum(map(sum, g))
    g = [[v / tot for v in row] for row in g]
    h, w = x.shape
    vals = []
    for i in range(h - size + 1):
        for j in range(w - size + 1):
            mx = my = 0.0
            for u in range(size):
                for v in range(size):
                    mx += g[u][v] * x[i + u, j + v]
                    my += g[u][v] * y[i + u, j + v]
            vx = vy = cxy = 0.0
            for u in range(size):
                for v in range(size):
                    dx, dy = x[i + u, j + v] - mx, y[i + u, j + v] - my
                    vx += g[u][v] * dx * dx
                    vy += g[u][v] * dy * dy
                    cxy += g[u][v] * dx * dy
            vals.append((2 * mx * my + c1) * (2 * cxy + c2)
                        / ((mx * mx + my * my + c1) * (vx + vy + c2)))
    return sum(vals) / len(vals)


def bilateral(img, diameter, sigma_color, sigma_space):
    h, w, c = img.shape
    r = diameter // 2
    out = np.empty((h, w, c))
    for i in range(h):
        for j in range(w):
            num = [0.0] * c
            den = 0.0
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    yy, xx = min(max(i + dy, 0), h - 1), min(max(j + dx, 0), w - 1)
                    d2 = sum((float(img[yy, xx, k]) - float(img[i, j, k])) ** 2 for k in range(c))
                    wt = math.exp(-(dy * dy + dx * dx) / (2 * sigma_space**2)
                                  - d2 / (2 * sigma_color**2))
                    den += wt
                    for k in range(c):
                        num[k] += wt * float(img[yy, xx, k])
            for k in range(c):
                out[i, j, k] = num[k] / den
    return np.clip(out, 0.0, 1.0)


def nlm(img, h_param, template_size, search_size):
    h, w, c = img.shape
    rs, rt = search_size // 2, template_size // 2
    sigma = max(template_size / 4.0, 0.5)
    g = {}
    for u in range(-rt, rt + 1):
        for v in range(-rt, rt + 1):
            g[u, v] = math.exp(-(u * u + v * v) / (2 * sigma * sigma))
    tot = sum(g.values())

    def px(y, x, k):
        return float(img[min(max(y, 0), h - 1), min(max(x, 0), w - 1), k])

    out = np.empty((h, w, c))
    for i in range(h):
        for j in range(w):
            num = [0.0] * c
            den = 0.0
            for dy in range(-rs, rs + 1):
                for dx in range(-rs, rs + 1):
                    d2 = 0.0
                    for (u, v), gw in g.items():
                        sq = sum((px(i + u, j + v, k) - px(i + dy + u, j + dx + v, k)) ** 2
                                 for k in range(c)) / c
                        d2 += gw / tot * sq
                    wt = math.exp(-d2 / (h_param * h_param))
                    den += wt
                    for k in range(c):
                        num[k] += wt * px(i + dy, j + dx, k)
            for k in range(c):
                out[i, j, k] = num[k] / den
    return np.clip(out, 0.0, 1.0)


def gaussian_blur(img, diameter, sigma):
    h, w, c = img.shape
    r = diameter // 2
    g = {(u, v): math.exp(-(u * u + v * v) / (2 * sigma * sigma))
         for u in range(-r, r + 1) for v in range(-r, r + 1)}
    tot = sum(g.values())
    out = np.zeros((h, w, c))
    for i in range(h):
        for j in range(w):
            for (u, v), gw in g.items():
                yy, xx = min(max(i + u, 0), h - 1), min(max(j + v, 0), w - 1)
                out[i, j] += gw / tot * img[yy, xx]
    return out
