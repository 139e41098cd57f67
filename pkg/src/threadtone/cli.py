"""Command line interface.

    threadtone run --input portrait.png --out painting.png --out-seq pins.txt
    threadtone bench corpus/ --csv report.csv

Settings can also come from a ``key = value`` file passed with ``--config``;
command-line flags take precedence over the file, which takes precedence
over built-in defaults.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .image import crop_region, load_grayscale, save_image
from .pipeline import SAMPLERS, PaintConfig, build_problem, region_view, sample
from .render import export_sequence
from .sampling import estimate_chord_count
from .solver import reconstruct, solve_fitness, write_fitness_table

log = logging.getLogger("threadtone")

IMAGE_SUFFIXES = {".png", ".pgm", ".ppm", ".pnm", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".gif", ".webp"}


class StageError(Exception):
    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, kind, exc, tb):
        if exc is not None and not isinstance(exc, (StageError, KeyboardInterrupt)):
            raise StageError(self.name, exc) from exc
        return False


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _add_paint_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("painting")
    g.add_argument("--shape", choices=("circle", "square"), default="circle",
                   help="canvas boundary (default: %(default)s)")
    g.add_argument("--pins", type=int, default=300,
                   help="number of pins P (default: %(default)s, published experiment setting)")
    g.add_argument("--alpha", type=float, default=0.0,
                   help="edge emphasis in [0, 1] blending ink and gradient magnitude in the target "
                        "(default: %(default)s, published method default; 0.5 for edge enhancement)")
    g.add_argument("--beta", type=float, default=5.0,
                   help="short-chord penalty weight (default: %(default)s, published experiment setting)")
    g.add_argument("--gamma", type=float, default=10.0,
                   help="edge-crossing penalty weight (default: %(default)s, published experiment setting)")
    g.add_argument("--temperature", type=float, default=30.0,
                   help="sharpness T of the tanh fitness normalization; larger T spreads chords apart "
                        "(default: %(default)s, published experiment setting)")
    g.add_argument("--eps", type=int, default=2,
                   help="error-diffusion neighbourhood radius in pin steps "
                        "(default: %(default)s, published experiment setting)")
    g.add_argument("--s-min", type=int, default=1,
                   help="shortest chord span enumerated (default: %(default)s, local choice)")
    g.add_argument("--min-loop", type=int, default=5,
                   help="greedy baseline: shortest chord span it may take (default: %(default)s, local choice)")
    g.add_argument("--reduction", type=float, default=15.0,
                   help="greedy baseline: ink removed per covering chord "
                        "(default: %(default)s, as in the original baseline)")
    g.add_argument("--tol", type=float, default=1e-6,
                   help="solver relative residual tolerance (default: %(default)s, local choice)")
    g.add_argument("--max-iter", type=int, default=500,
                   help="solver iteration cap (default: %(default)s, local choice)")
    g.add_argument("--out-size", type=int, default=1001,
                   help="output canvas side in pixels, odd (default: %(default)s, published output size)")
    g.add_argument("--start-pin", type=int, default=None,
                   help="first pin of the winding (default: 0, or random when --seed is given)")
    g.add_argument("--seed", type=int, default=None,
                   help="seed for choosing a random start pin (default: none, start at pin 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="threadtone", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="turn one image into a thread painting",
                         formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    run.add_argument("--config", help="key = value settings file (flags override it)")
    run.add_argument("--input", help="input raster image (PNG, PGM, JPEG, ...)")
    run.add_argument("--mask", help="importance mask, same size as the input or the crop; "
                                    "pixels > 127 get weight 2")
    run.add_argument("--center", type=int, nargs=2, metavar=("X", "Y"), default=None,
                     help="region centre in input pixels (default: image centre)")
    run.add_argument("--radius", type=int, default=None,
                     help="region radius or half side (default: largest that fits)")
    run.add_argument("--chords", type=int, default=None,
                     help="chord budget k (default: 500 + 10 * (255 - mean gray))")
    run.add_argument("--sampler", choices=SAMPLERS, default="connected", help="chord selection strategy")
    run.add_argument("--out", default="painting.png", help="painting image (PNG or PGM)")
    run.add_argument("--out-seq", default="painting.txt", help="pin sequence file")
    run.add_argument("--out-errmap", default=None, help="optional fitness reconstruction error map image")
    run.add_argument("--out-fitness", default=None, help="optional plain-text dump of raw chord fitness")
    _add_paint_options(run)

    bench = sub.add_parser("bench", help="SSIM comparison of all samplers over a directory of images",
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    bench.add_argument("corpus", help="directory of input images")
    bench.add_argument("--config", help="key = value settings file (flags override it)")
    bench.add_argument("--chords", type=int, default=None,
                       help="chord budget for every image (default: estimated per image)")
    bench.add_argument("--csv", default="ssim_report.csv", help="CSV report path")
    bench.add_argument("--table", default=None, help="also write the text table here")
    _add_paint_options(bench)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        values = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
        known = {a.dest: a for a in sub._actions}  # noqa: SLF001
        defaults = {}
        for key, raw in values.items():
            if key not in known or key in ("config", "help"):
                raise ValueError(f"{args.config}: unknown setting {key!r}")
            action = known[key]
            if action.nargs == 2:
                defaults[key] = [action.type(x) for x in raw.replace(",", " ").split()]
            else:
                defaults[key] = action.type(raw) if action.type else raw
            if action.choices and defaults[key] not in action.choices:
                raise ValueError(f"{args.config}: {key} must be one of {sorted(action.choices)}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _paint_config(args) -> PaintConfig:
    return PaintConfig(shape=args.shape, pins=args.pins, alpha=args.alpha, beta=args.beta,
                       gamma=args.gamma, temperature=args.temperature, eps=args.eps,
                       s_min=args.s_min, min_loop_span=args.min_loop, reduction=args.reduction,
                       tol=args.tol, max_iter=args.max_iter, output_size=args.out_size)


def _start_pin(args) -> int:
    if args.start_pin is not None:
        if not 0 <= args.start_pin < args.pins:
            raise ValueError(f"start pin must lie in [0, {args.pins})")
        return args.start_pin
    if args.seed is not None:
        return int(np.random.default_rng(args.seed).integers(args.pins))
    return 0


def cmd_run(args) -> int:
    from .metrics import evaluate_pair

    with _Stage("config"):
        if not args.input:
            raise ValueError("--input is required")
        config = _paint_config(args)
        if args.chords is not None and args.chords < 1:
            raise ValueError("--chords must be at least 1")
        start = _start_pin(args)
    with _Stage("load"):
        img = load_grayscale(args.input)
        mask = load_grayscale(args.mask) if args.mask else None
    with _Stage("crop"):
        center = tuple(args.center) if args.center else None
        crop, region = crop_region(img, config.shape, center, args.radius)
        if mask is not None and mask.shape == img.shape and mask.shape != crop.shape:
            mask, _ = crop_region(mask, config.shape, center, args.radius)
    with _Stage("setup"):
        problem = build_problem(crop, region, config, mask)
        k = args.chords if args.chords is not None else estimate_chord_count(crop, region)
        print(f"chords: {k}" + ("" if args.chords is not None else " (estimated from mean gray)"))
    fitness = None
    if args.sampler != "greedy" or args.out_errmap or args.out_fitness:
        with _Stage("solve"):
            t0 = time.perf_counter()
            fitness = solve_fitness(problem.system, config.tol, config.max_iter)
            print(f"solver: {fitness.iterations} iterations, relative residual {fitness.residual:.2e}"
                  f"{'' if fitness.converged else ' (not converged)'}, {time.perf_counter() - t0:.1f}s")
    with _Stage("sample"):
        painting = sample(problem, args.sampler, k, config, fitness, start)
        if painting.terminated:
            print(f"greedy baseline stopped early after {painting.chord_count} chords")
    with _Stage("write"):
        save_image(painting.image, args.out)
        if painting.pins is not None:
            export_sequence(painting.pins, args.out_seq, config.pins, config.shape)
        else:
            with open(args.out_seq, "w", encoding="ascii", newline="\n") as fh:
                fh.write(f"P {config.pins} {config.shape} chords\n")
                for i, j in problem.space.pairs[painting.chords]:
                    fh.write(f"{i} {j}\n")
        if args.out_errmap:
            save_image(reconstruct(problem.system, fitness.f, region)[1], args.out_errmap)
        if args.out_fitness:
            write_fitness_table(args.out_fitness, problem.space, fitness)
    with _Stage("evaluate"):
        score = evaluate_pair(region_view(crop, region), painting.image)
        print(f"ssim: {score:.4f}")
    return 0


def cmd_bench(args) -> int:
    from .metrics import SSIMReport, compare_methods

    with _Stage("config"):
        config = _paint_config(args)
        start = _start_pin(args)
        corpus = Path(args.corpus)
        if not corpus.is_dir():
            raise NotADirectoryError(f"corpus {corpus} is not a directory")
        files = sorted(p for p in corpus.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    report = SSIMReport()
    if not files:
        log.warning("no images found in %s; writing an empty report", corpus)
        print(f"warning: no images found in {corpus}", file=sys.stderr)
    for path in files:
        with _Stage(f"bench {path.name}"):
            crop, region = crop_region(load_grayscale(path), config.shape)
            rows = compare_methods(path.stem, crop, region, config, args.chords, start)
            report.rows.extend(rows)
            log.info("%s: %s", path.name, ", ".join(f"{r.method}={r.ssim_original:.3f}" for r in rows))
    with _Stage("write"):
        Path(args.csv).write_text(report.to_csv(), encoding="ascii", newline="\n")
        table = report.to_table()
        if args.table:
            Path(args.table).write_text(table + "\n", encoding="ascii", newline="\n")
        print(table)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except (OSError, ValueError) as exc:
        print(f"threadtone: error: config: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    log.debug("kernel backend: %s", kernels.BACKEND)
    try:
        return cmd_run(args) if args.command == "run" else cmd_bench(args)
    except StageError as exc:
        print(f"threadtone: error in {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
