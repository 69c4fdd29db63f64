"""``sr-forge`` command line: preprocess, train, upscale, eval (plus synth).

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 data/format error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from pathlib import Path

from . import __version__
from .errors import DataError, FormatError, SrForgeError
from .evaluation import MODEL_METHODS, run_eval
from .imagecore import list_images, load_image, save_image
from .neuralnet import load_checkpoint
from .pipeline import (
    DenoiseParams,
    PostProcessMode,
    TrainConfig,
    assign_splits,
    load_archive,
    post_process,
    preprocess_corpus,
    save_archive,
    train,
)

log = logging.getLogger("sr_forge")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _denoise_from(args) -> DenoiseParams:
    if args.denoise == "bilateral":
        return DenoiseParams.bilateral(args.bilateral_diameter, args.sigma_color, args.sigma_space)
    if args.denoise == "nlm":
        return DenoiseParams.nlm(args.nlm_h, args.nlm_template, args.nlm_search)
    return DenoiseParams.none()


def _add_denoise_flags(p, default: str):
    g = p.add_argument_group("denoising")
    g.add_argument("--denoise", choices=("none", "bilateral", "nlm"), default=default)
    g.add_argument("--bilateral-diameter", type=int, default=5)
    g.add_argument("--sigma-color", type=float, default=0.1)
    g.add_argument("--sigma-space", type=float, default=2.0)
    g.add_argument("--nlm-h", type=float, default=0.04)
    g.add_argument("--nlm-template", type=int, default=7)
    g.add_argument("--nlm-search", type=int, default=21)


def _parse_ratios(text: str) -> tuple[int, int, int]:
    try:
        parts = tuple(int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected TRAIN:VAL:TEST, got {text!r}") from None
    if len(parts) != 3 or min(parts) < 0 or parts[0] == 0:
        raise argparse.ArgumentTypeError(f"expected TRAIN:VAL:TEST, got {text!r}")
    return parts


def _read_images(directory):
    paths = list_images(directory)
    good, bad = [], []
    for p in paths:
        try:
            good.append((p.name, load_image(p)))
        except (FormatError, OSError) as exc:
            log.warning("skipping %s: %s", p.name, exc)
            bad.append(p)
    return good, bad


# ---------------------------------------------------------------------------


def cmd_preprocess(args) -> int:
    images, bad = _read_images(args.input_dir)
    if not images:
        what = "no readable images" if bad else "no images"
        raise DataError(f"{what} in {args.input_dir}")
    if args.split:
        splits = assign_splits([n for n, _ in images], args.split)
    else:
        splits = {n: "train" for n, _ in images}
    archive = preprocess_corpus(
        images, args.degradation, sharpen_first=not args.no_sharpen,
        denoise=_denoise_from(args), patch_size=args.patch_size, stride=args.stride,
        channels=args.channels, splits=splits,
    )
    save_archive(archive, args.output)
    counts = Counter(e["split"] for e in archive.manifest)
    print(f"wrote {args.output}: {len(archive)} pairs of {archive.patch_size}x"
          f"{archive.patch_size}x{archive.channels}")
    print(f"images: {len(images)} used ({counts['train']} train, {counts['val']} val, "
          f"{counts['test']} test), {len(bad)} skipped; degradation={args.degradation}")
    for e in archive.manifest:
        print(f"  {e['filename']}  {e['split']:<5}  {e['pairs'][1]} pairs")
    return EXIT_OK


def cmd_train(args) -> int:
    archive = load_archive(args.archive)
    degradation = args.degradation
    if degradation is None:
        seen = {e.get("degradation") for e in archive.manifest} - {None}
        degradation = seen.pop() if len(seen) == 1 else "bilinear"
    cfg = TrainConfig(epochs=args.epochs, lr=args.lr, batch_size=args.batch_size, seed=args.seed,
                      degradation=degradation, preset=args.preset, optimizer=args.optimizer,
                      slope=args.slope)

    def progress(epoch, train_mse, val_mse):
        print(f"epoch {epoch:3d}/{cfg.epochs}  train_mse {train_mse:.6f}  val_mse {val_mse:.6f}",
              flush=True)

    ckpt = train(archive, cfg, args.output, resume=args.resume, progress=progress)
    print(f"final checkpoint: epoch {ckpt.epoch} in {args.output}")
    return EXIT_OK


def cmd_upscale(args) -> int:
    img = load_image(args.input)
    ckpt = load_checkpoint(args.checkpoint)
    out = post_process(img, args.mode, ckpt, _denoise_from(args), args.factor)
    output = Path(args.output)
    if output.suffix.lower() != ".png":
        output = output.with_suffix(".png")
    save_image(out, output)
    print(f"{args.input}: {img.width}x{img.height} -> {output}: {out.width}x{out.height} "
          f"({args.mode})")
    return EXIT_OK


def cmd_eval(args) -> int:
    refs, _ = _read_images(args.reference_dir)
    if not refs:
        raise DataError(f"no reference images in {args.reference_dir}")
    models = {}
    for method in MODEL_METHODS:
        path = getattr(args, method.replace("-", "_"))
        if path:
            models[method] = load_checkpoint(path).network()
        else:
            log.info("no checkpoint for %s; column omitted", method)
    report = run_eval(refs, models, args.factors, on_luma=not args.rgb_metrics)
    table = report.to_table()
    print(table, end="")
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    if args.table:
        Path(args.table).write_text(table)
    return EXIT_OK


def cmd_synth(args) -> int:
    from .synth import write_corpus

    paths = write_corpus(args.output_dir, args.count, args.size, args.seed, args.prefix)
    print(f"wrote {len(paths)} images to {args.output_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sr-forge", description="SRCNN / m-SRCNN super-resolution toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pre = sub.add_parser("preprocess", help="build a training archive from an image folder")
    pre.add_argument("input_dir")
    pre.add_argument("-o", "--output", required=True)
    pre.add_argument("--degradation", choices=("bilinear", "bicubic"), default="bilinear")
    pre.add_argument("--patch-size", type=int, default=32)
    pre.add_argument("--stride", type=int, default=16)
    pre.add_argument("--channels", type=int, choices=(1, 3), default=1)
    pre.add_argument("--no-sharpen", action="store_true")
    pre.add_argument("--split", type=_parse_ratios, default=None, metavar="TRAIN:VAL:TEST",
                     help="hold images out by ratio, e.g. 8:1:1 (default: all train)")
    pre.add_argument("--seed", type=int, default=0, help="accepted for symmetry; unused")
    _add_denoise_flags(pre, "bilateral")
    pre.set_defaults(func=cmd_preprocess)

    tr = sub.add_parser("train", help="train a network on an archive")
    tr.add_argument("archive")
    tr.add_argument("-o", "--output", required=True, help="checkpoint directory")
    tr.add_argument("--preset", choices=("srcnn", "msrcnn"), default="msrcnn")
    tr.add_argument("--epochs", type=int, default=50)
    tr.add_argument("--lr", type=float, default=0.003)
    tr.add_argument("--batch-size", type=int, default=32)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    tr.add_argument("--slope", type=float, default=0.3, help="LeakyReLU negative slope")
    tr.add_argument("--degradation", choices=("bilinear", "bicubic"), default=None,
                    help="label recorded in the checkpoint (default: from the archive)")
    tr.add_argument("--resume", action="store_true",
                    help="continue from the newest checkpoint in the output directory")
    tr.set_defaults(func=cmd_train)

    up = sub.add_parser("upscale", help="enlarge and/or enhance an image")
    up.add_argument("input")
    up.add_argument("-c", "--checkpoint", required=True)
    up.add_argument("-o", "--output", required=True)
    up.add_argument("--mode", choices=[m.value for m in PostProcessMode],
                    default=PostProcessMode.ENLARGE_ENHANCE.value)
    up.add_argument("--factor", type=int, choices=(2, 3, 4), default=2)
    up.add_argument("--seed", type=int, default=0, help="accepted for symmetry; unused")
    _add_denoise_flags(up, "bilateral")
    up.set_defaults(func=cmd_upscale)

    ev = sub.add_parser("eval", help="PSNR/SSIM comparison against reference images")
    ev.add_argument("reference_dir")
    for method in MODEL_METHODS:
        ev.add_argument(f"--{method}", metavar="CKPT", default=None)
    ev.add_argument("--factors", type=int, nargs="+", choices=(2, 3, 4), default=[2, 3, 4])
    ev.add_argument("--rgb-metrics", action="store_true", help="score RGB instead of luma")
    ev.add_argument("--csv", default=None)
    ev.add_argument("--table", default=None)
    ev.add_argument("--seed", type=int, default=0, help="accepted for symmetry; unused")
    ev.set_defaults(func=cmd_eval)

    sy = sub.add_parser("synth", help="write procedural anime-style test images")
    sy.add_argument("output_dir")
    sy.add_argument("--count", type=int, default=25)
    sy.add_argument("--size", type=int, default=128)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--prefix", default="illust")
    sy.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SrForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
