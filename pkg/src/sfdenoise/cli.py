"""Command-line front end: add-noise, estimate-noise, denoise, sweep, bench.

Exit status is 0 on success, 2 on usage errors and 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
import time
from collections import defaultdict
from pathlib import Path

import numpy as np

from sfdenoise.imagecore import BOUNDARIES, DEFAULT_BOUNDARY, PGMError, convolve, load_pgm, psnr, quantize, save_pgm
from sfdenoise.kernels import KernelParams, make_kernel
from sfdenoise.noise import Distribution, NoiseSpec, corrupt, estimate_sigma
from sfdenoise.risk import RiskEstimate, filter_divergence
from sfdenoise.svgs import DenoiseConfig, default_workers, denoise

log = logging.getLogger("sfdenoise")

DISTS = [d.value for d in Distribution]

SWEEP_FIELDS = ("sigma_f", "estimated_risk", "oracle_cost_minus_norm_x", "full_oracle_cost")
BENCH_FIELDS = (
    "image", "dist", "sigma", "sigma_hat", "seed", "input_psnr", "output_psnr",
    "wall_time_s", "block", "apron", "kernel",
)


class UsageError(Exception):
    pass


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def parse_range(text: str) -> np.ndarray:
    """``lo:hi:step`` -> inclusive grid ``lo, lo+step, ..., <= hi``."""
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise UsageError(f"malformed range {text!r}, expected lo:hi:step") from None
    if not (step > 0 and hi >= lo and all(map(math.isfinite, (lo, hi, step)))):
        raise UsageError(f"malformed range {text!r}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 12)


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _dist_list(text: str) -> list[str]:
    out = [v.strip() for v in text.split(",") if v.strip()]
    bad = [v for v in out if v not in DISTS]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"unknown distribution(s) {bad or text!r}")
    return out


def _positive(text: str) -> float:
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


# -- commands ----------------------------------------------------------------

def cmd_add_noise(args) -> int:
    clean = load_pgm(args.inp)
    noisy = corrupt(clean, NoiseSpec(args.dist, args.sigma, args.seed))
    save_pgm(noisy, args.out)
    print(f"input PSNR: {psnr(clean, quantize(noisy).astype(np.float64)):.4f} dB")
    return 0


def cmd_estimate_noise(args) -> int:
    print(f"{estimate_sigma(load_pgm(args.inp), args.dist):.6f}")
    return 0


def cmd_denoise(args) -> int:
    noisy = load_pgm(args.inp)
    clean = load_pgm(args.clean) if args.clean else None
    if clean is not None and clean.shape != noisy.shape:
        raise ValueError(f"--clean image size {clean.shape} differs from input {noisy.shape}")
    cfg = DenoiseConfig(
        kernel_side=args.kernel,
        block=args.block,
        apron=args.apron,
        sigma=args.sigma,
        noise_dist=args.dist or Distribution.GAUSSIAN,
        workers=args.threads or default_workers(),
        boundary=args.boundary,
    )
    t0 = time.perf_counter()
    out, params = denoise(noisy, cfg)
    elapsed = time.perf_counter() - t0
    save_pgm(out, args.out)
    if args.sigma is None:
        print(f"estimated sigma: {params.sigma:.6f}")
    print(f"wall time: {elapsed:.3f} s")
    if clean is not None:
        print(f"output PSNR: {psnr(clean, out):.4f} dB")
    if args.params_out:
        params.write_csv(args.params_out)
    return 0


def sweep_rows(clean: np.ndarray, noisy: np.ndarray, sigma: float, sigmas_f, side: int = 9,
               boundary: str = DEFAULT_BOUNDARY):
    """One row per isotropic spread: estimate, oracle without ||x||^2, full oracle."""
    if clean.shape != noisy.shape:
        raise ValueError(f"dimension mismatch: {clean.shape} vs {noisy.shape}")
    norm_x = float(np.sum(clean * clean))
    n = clean.size
    rows = []
    for sf in sigmas_f:
        kernel = make_kernel(KernelParams(float(sf), float(sf), 0.0), side)
        filtered = convolve(noisy, kernel, boundary)
        resid = float(np.sum((filtered - noisy) ** 2))
        div = filter_divergence(kernel, clean.shape, None, boundary)
        est = RiskEstimate.from_terms(resid, div, sigma, n).value
        oracle = float(np.sum((clean - filtered) ** 2))
        rows.append((float(sf), est, oracle - norm_x, oracle))
    return rows


def cmd_sweep(args) -> int:
    sigmas_f = parse_range(args.range)
    clean, noisy = load_pgm(args.clean), load_pgm(args.noisy)
    try:
        rows = sweep_rows(clean, noisy, args.sigma, sigmas_f, args.kernel, args.boundary)
    except ValueError as exc:
        if "outside" in str(exc):
            raise UsageError(f"range {args.range!r}: {exc}") from None
        raise
    _write_csv(args.out, SWEEP_FIELDS, rows)
    arr = np.array(rows)
    print(f"argmin estimated risk: sigma_f = {arr[np.argmin(arr[:, 1]), 0]:.4f}")
    print(f"argmin oracle cost:    sigma_f = {arr[np.argmin(arr[:, 3]), 0]:.4f}")
    return 0


def bench_records(images: dict, sigmas, dists, seeds: int, cfg: DenoiseConfig, use_estimate=False):
    for name, clean in images.items():
        for dist in dists:
            for sigma in sigmas:
                for seed in range(seeds):
                    noisy = corrupt(clean, NoiseSpec(dist, sigma, seed))
                    t0 = time.perf_counter()
                    sigma_hat = estimate_sigma(noisy, dist)
                    run_cfg = DenoiseConfig(
                        kernel_side=cfg.kernel_side, block=cfg.block, apron=cfg.apron,
                        sigma=sigma_hat if use_estimate else sigma, noise_dist=dist,
                        optimizer=cfg.optimizer, workers=cfg.workers, boundary=cfg.boundary,
                    )
                    out, _ = denoise(noisy, run_cfg)
                    elapsed = time.perf_counter() - t0
                    yield (name, dist, sigma, sigma_hat, seed, psnr(clean, noisy), psnr(clean, out),
                           elapsed, cfg.block, cfg.apron, cfg.kernel_side)


def format_summary(rows) -> str:
    groups = defaultdict(list)
    for r in rows:
        groups[(r[0], r[1], r[2])].append(r)
    lines = [f"{'image':<16}{'dist':<11}{'sigma':>7}{'sigma_hat':>11}{'in PSNR':>10}{'out PSNR':>10}{'time s':>9}"]
    for (name, dist, sigma), rs in groups.items():
        m = np.mean([[r[3], r[5], r[6], r[7]] for r in rs], axis=0)
        lines.append(f"{name:<16}{dist:<11}{sigma:>7g}{m[0]:>11.2f}{m[1]:>10.2f}{m[2]:>10.2f}{m[3]:>9.2f}")
    return "\n".join(lines)


def cmd_bench(args) -> int:
    paths = sorted(Path(args.clean_dir).glob("*.pgm"))
    if not paths:
        raise ValueError(f"no .pgm images in {args.clean_dir}")
    images = {p.stem: load_pgm(p) for p in paths}
    cfg = DenoiseConfig(kernel_side=args.kernel, block=args.block, apron=args.apron,
                        workers=args.threads or default_workers(), boundary=args.boundary)
    rows = []
    for row in bench_records(images, args.sigmas, args.dists, args.seeds, cfg, args.use_estimate):
        log.info("%s %s sigma=%g seed=%d: %.2f -> %.2f dB", *row[:3], row[4], row[5], row[6])
        rows.append(row)
    _write_csv(args.out, BENCH_FIELDS, rows)
    print(format_summary(rows))
    return 0


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sfdenoise", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("add-noise", help="corrupt a clean PGM with synthetic noise")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dist", choices=DISTS, default="gaussian")
    p.add_argument("--sigma", type=_positive, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_add_noise)

    p = sub.add_parser("estimate-noise", help="print the estimated noise standard deviation")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--dist", choices=DISTS, default="gaussian")
    p.set_defaults(func=cmd_estimate_noise)

    p = sub.add_parser("denoise", help="spatially-varying Gaussian smoothing")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    noise = p.add_mutually_exclusive_group(required=True)
    noise.add_argument("--sigma", type=_positive, help="known noise standard deviation")
    noise.add_argument("--dist", choices=DISTS, help="estimate sigma assuming this noise law")
    p.add_argument("--block", type=int, default=8)
    p.add_argument("--apron", type=int, default=4)
    p.add_argument("--kernel", type=int, default=9)
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--params-out", help="write per-block parameters as CSV")
    p.add_argument("--clean", help="reference image for PSNR reporting")
    p.add_argument("--boundary", choices=BOUNDARIES, default=DEFAULT_BOUNDARY)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("sweep", help="risk estimate vs oracle cost over isotropic spreads")
    p.add_argument("--clean", required=True)
    p.add_argument("--noisy", required=True)
    p.add_argument("--sigma", type=_positive, required=True)
    p.add_argument("--range", required=True, help="lo:hi:step")
    p.add_argument("--kernel", type=int, default=9)
    p.add_argument("--out", required=True)
    p.add_argument("--boundary", choices=BOUNDARIES, default=DEFAULT_BOUNDARY)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="PSNR table over images, noise laws, levels and seeds")
    p.add_argument("--clean-dir", required=True)
    p.add_argument("--sigmas", type=_float_list, default=[10.0, 20.0, 50.0, 80.0])
    p.add_argument("--dists", type=_dist_list, default=list(DISTS))
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--block", type=int, default=8)
    p.add_argument("--apron", type=int, default=4)
    p.add_argument("--kernel", type=int, default=9)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--use-estimate", action="store_true", help="denoise with the estimated sigma")
    p.add_argument("--boundary", choices=BOUNDARIES, default=DEFAULT_BOUNDARY)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, PGMError, ValueError) as exc:
        print(f"{parser.prog}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
