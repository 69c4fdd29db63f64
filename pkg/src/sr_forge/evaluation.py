"""Reference-based comparison of enlargement methods (PSNR / SSIM table).

Protocol: every reference is cropped to a multiple of the factor ``k``,
shrunk by ``1/k`` with bilinear interpolation and enlarged back by ``k``
with each method.  All methods of one (image, factor) cell share the same
shrunken input.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .imagecore import RasterImage
from .interp import ScaleMethod, scale
from .metrics import SsimParams, evaluate
from .neuralnet import Network
from .pipeline.inference import upscale

__all__ = [
    "CSV_HEADER",
    "INTERP_METHODS",
    "METHODS",
    "METHOD_LABELS",
    "MODEL_METHODS",
    "EvalReport",
    "degraded_input",
    "run_eval",
    "thread_count",
]

INTERP_METHODS = ("nearest", "bilinear", "bicubic")
MODEL_METHODS = ("srcnn-up-bilinear", "srcnn-up-bicubic", "msrcnn-up-bilinear", "msrcnn-up-bicubic")
METHODS = INTERP_METHODS + MODEL_METHODS
METHOD_LABELS = {
    "nearest": "Nearest Neighbor",
    "bilinear": "Bilinear",
    "bicubic": "Bicubic",
    "srcnn-up-bilinear": "SRCNN (Up-Bilinear)",
    "srcnn-up-bicubic": "SRCNN (Up-Bicubic)",
    "msrcnn-up-bilinear": "m-SRCNN (Up-Bilinear)",
    "msrcnn-up-bicubic": "m-SRCNN (Up-Bicubic)",
}
CSV_HEADER = ("factor", "method", "psnr", "ssim")


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("SR_FORGE_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class EvalReport:
    """Mean PSNR/SSIM per (factor, method) over ``image_count`` references."""

    factors: tuple[int, ...]
    methods: tuple[str, ...]
    cells: dict[tuple[int, str], tuple[float, float]] = field(default_factory=dict)
    image_count: int = 0
    per_image: list[dict] = field(default_factory=list)

    def psnr(self, factor: int, method: str) -> float:
        return self.cells[(factor, method)][0]

    def ssim(self, factor: int, method: str) -> float:
        return self.cells[(factor, method)][1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for k in self.factors:
            for m in self.methods:
                p, s = self.cells[(k, m)]
                w.writerow([k, m, _fmt(p), _fmt(s)])
        return buf.getvalue()

    def to_table(self) -> str:
        """Factors down the side, methods across, a PSNR and an SSIM column per method."""
        labels = [METHOD_LABELS.get(m, m) for m in self.methods]
        width = max(15, *(len(l) for l in labels))
        half = (width - 1) // 2
        lines = [
            " " * 6 + "".join(f"| {l:^{width}} " for l in labels),
            " " * 6 + "".join(f"| {'PSNR':>{half}} {'SSIM':>{width - half - 1}} " for _ in labels),
        ]
        lines.insert(1, "-" * len(lines[0]))
        for k in self.factors:
            row = f"{str(k) + 'x':<6}"
            for m in self.methods:
                p, s = self.cells[(k, m)]
                row += f"| {_fmt(p):>{half}} {_fmt(s):>{width - half - 1}} "
            lines.append(row)
        lines.append(f"({self.image_count} reference images)")
        return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return "inf" if math.isinf(v) else f"{v:.4f}"


def degraded_input(reference: RasterImage, factor: int) -> tuple[RasterImage, RasterImage]:
    """(cropped reference, bilinear-shrunk test input) for one enlargement factor."""
    h = reference.height - reference.height % factor
    w = reference.width - reference.width % factor
    if h < factor or w < factor:
        raise DataError(f"reference {reference.width}x{reference.height} too small for {factor}x")
    ref = reference.crop(0, 0, h, w)
    small = scale(ref, 1.0 / factor, ScaleMethod.BILINEAR)
    if (small.height * factor, small.width * factor) != (h, w):
        raise DataError("degraded input does not round-trip to the reference size")
    return ref, small


def _score_image(reference: RasterImage, factors, methods, models, on_luma, params):
    scores = {}
    for k in factors:
        ref, small = degraded_input(reference, k)
        for m in methods:
            if m in INTERP_METHODS:
                out = scale(small, k, ScaleMethod.parse(m))
            else:
                out = upscale(small, models[m], k)
            v = evaluate(ref, out, on_luma=on_luma, params=params)
            scores[(k, m)] = (v.psnr, v.ssim)
    return scores


def run_eval(references, models: dict[str, Network] | None = None, factors=(2, 3, 4), *,
             on_luma: bool = True, params: SsimParams | None = None,
             threads: int | None = None) -> EvalReport:
    """Score the interpolation baselines and any supplied models.

    ``references`` is a sequence of ``(name, RasterImage)``; results are
    aggregated in name order.  ``models`` maps method names from
    ``MODEL_METHODS`` to networks; missing variants are left out of the
    report.
    """
    refs = sorted(((str(n), img) for n, img in references), key=lambda t: t[0])
    if not refs:
        raise DataError("no reference images to evaluate")
    models = dict(models or {})
    unknown = set(models) - set(MODEL_METHODS)
    if unknown:
        raise DataError(f"unknown model variants: {sorted(unknown)}")
    methods = INTERP_METHODS + tuple(m for m in MODEL_METHODS if m in models)
    factors = tuple(int(k) for k in factors)

    def job(item):
        return _score_image(item[1], factors, methods, models, on_luma, params)

    threads = thread_count() if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(job, refs))
    else:
        results = [job(r) for r in refs]

    report = EvalReport(factors, methods, image_count=len(refs))
    for (name, _), scores in zip(refs, results):
        report.per_image.append({"name": name, **{f"{k}x/{m}": v for (k, m), v in scores.items()}})
    for k in factors:
        for m in methods:
            report.cells[(k, m)] = (
                float(np.mean([r[(k, m)][0] for r in results])),
                float(np.mean([r[(k, m)][1] for r in results])),
            )
    return report
