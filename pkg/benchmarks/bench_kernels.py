#!/usr/bin/env python3
"""Time the jitted kernels against their numpy fallbacks.

Both implementations are called directly, so one process covers both paths;
numba is warmed up first so compilation is not counted.  With ``--pipeline``
the script also times ``recover_weights`` end to end in two subprocesses, one
with ``FI_DISABLE_NUMBA=1``, to show the effect of the environment switch.

    python benchmarks/bench_kernels.py [--repeat 5] [--pipeline]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from faceintersect import kernels as K


def _cases(rng):
    W = rng.random((5, 10))
    W /= W.sum(1, keepdims=True)
    A = rng.dirichlet(np.ones(5), 600)
    X = A @ W + 1e-3 * rng.standard_normal((600, 10))
    G, H = W @ W.T, X @ W.T
    Q = np.linalg.qr(rng.standard_normal((10, 3)))[0]
    Y = rng.standard_normal((2000, 8))
    P = rng.dirichlet(np.ones(3), 5000)
    return {
        "project_simplex_rows (2000x8)": (K._project_simplex_rows_nb, K._project_simplex_rows_np, (Y,)),
        "simplex_lstsq_rows (600x5)": (K._simplex_lstsq_rows_nb, K._simplex_lstsq_rows_np, (G, H, 20000, 1e-13)),
        "residual_norms (600x10, d=3)": (K._residual_norms_nb, K._residual_norms_np, (X, Q)),
        "lemma1_regions (5000x3)": (K._lemma1_regions_nb, K._lemma1_regions_np, (P,)),
    }


def _best(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


_PIPELINE_SNIPPET = """
import time, numpy as np
from faceintersect import generate_experiment, recover_weights
from faceintersect.kernels import HAVE_NUMBA
inst = generate_experiment(noise=0.01, seed=0)
recover_weights(inst.M_noisy.entries[:5], inst.W)  # warm-up / compile
t = time.perf_counter()
recover_weights(inst.M_noisy.entries, inst.W)
print(HAVE_NUMBA, time.perf_counter() - t)
"""


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--pipeline", action="store_true")
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        print("numba is disabled or missing; nothing to compare", file=sys.stderr)
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'numba ms':>10s} {'numpy ms':>10s} {'speed-up':>9s}")
    for name, (nb, npy, a) in _cases(rng).items():
        nb(*a)  # compile
        t_nb, t_np = _best(nb, a, args.repeat), _best(npy, a, args.repeat)
        print(f"{name:32s} {1e3 * t_nb:10.3f} {1e3 * t_np:10.3f} {t_np / t_nb:9.1f}x")
    if args.pipeline:
        for flag in ("0", "1"):
            env = dict(os.environ, FI_DISABLE_NUMBA=flag)
            out = subprocess.run([sys.executable, "-c", _PIPELINE_SNIPPET], env=env, capture_output=True, text=True, check=True)
            have, secs = out.stdout.split()
            print(f"recover_weights on 600 rows, FI_DISABLE_NUMBA={flag} (numba live: {have}): {1e3 * float(secs):.1f} ms")
    return 0


if __name__ == "__main__":
    sys.exit(main())
