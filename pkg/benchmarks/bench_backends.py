"""Throughput comparison of the native kernels vs the numpy fallback.

Runs every hot kernel on both backends and prints a table of timings and
speedups. The native extension is optional; when it is missing only the
fallback column is reported.

    python benchmarks/bench_backends.py [--pixels N] [--repeats R]
"""

import argparse
import time

import numpy as np

from tonepipe import _kernels_py as fallback

try:
    from tonepipe import _kernels as native
except ImportError:
    native = None


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def _workloads(pixels, rng):
    values = rng.random(pixels)
    coeffs = rng.uniform(-1, 1, 8)
    maps = rng.uniform(0, 1, (8, pixels // 3))
    x = rng.random((pixels // 3, 3))
    rgb = np.ascontiguousarray(10 ** rng.uniform(-4, 4, (pixels // 3, 3)))
    row = rng.integers(0, 200, size=(4, 2048)).astype(np.uint8)
    row[:, :512] = 37  # give the RLE coder some runs
    row = np.ascontiguousarray(row)
    rle_blob = fallback.rle_encode_scanline(row)
    rle_arr = np.frombuffer(rle_blob, np.uint8)

    return [
        ("mu_law_forward", lambda k: k.mu_law_forward(values, 5000.0)),
        ("gamma_forward", lambda k: k.gamma_forward(values, 0.45, 1.0)),
        ("polynomial_eval deg7", lambda k: k.polynomial_eval(coeffs, values)),
        ("horner_maps deg7", lambda k: k.horner_maps(maps, x)),
        ("quantize 8-bit", lambda k: k.quantize_values(values, 255.0)),
        ("rgbe_encode_pixels", lambda k: k.rgbe_encode_pixels(rgb)),
        (
            "rle_encode 2048px x64",
            lambda k: [k.rle_encode_scanline(row) for _ in range(64)],
        ),
        (
            "rle_decode 2048px x64",
            lambda k: [k.rle_decode_components(rle_arr, 0, 2048) for _ in range(64)],
        ),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pixels", type=int, default=3_000_000, help="sample count per kernel")
    parser.add_argument("--repeats", type=int, default=5, help="repetitions (best-of)")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    rows = []
    for name, call in _workloads(args.pixels, rng):
        t_py = _time(lambda: call(fallback), args.repeats)
        if native is not None:
            t_c = _time(lambda: call(native), args.repeats)
            rows.append((name, t_py, t_c, t_py / t_c))
        else:
            rows.append((name, t_py, None, None))

    print(f"samples per kernel: {args.pixels:,} (best of {args.repeats})")
    header = f"{'kernel':<24}{'numpy':>12}{'native':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, t_py, t_c, speedup in rows:
        if t_c is None:
            print(f"{name:<24}{t_py * 1e3:>10.2f}ms{'n/a':>12}{'n/a':>10}")
        else:
            print(f"{name:<24}{t_py * 1e3:>10.2f}ms{t_c * 1e3:>10.2f}ms{speedup:>9.2f}x")
    if native is None:
        print("native extension not built; showing fallback only")


if __name__ == "__main__":
    main()
