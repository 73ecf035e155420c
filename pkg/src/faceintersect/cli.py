"""Command-line entry point: ``generate``, ``factorize``, ``evaluate`` and ``bench``.

Exit codes: 0 success, 1 usage error, 2 algorithmic failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench as benchmod
from .completion import PipelineError, face_intersect
from .config import AlgoConfig, ConfigError, load_config
from .io import FormatError, load_data_matrix, read_matrix, write_instance, write_matrix
from .metrics import matched_w_error, max_row_error, reconstruction_errors
from .synthetic import generate_experiment

EXIT_OK, EXIT_USAGE, EXIT_ALGO, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad arguments; usage errors here are 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _cmd_generate(a) -> int:
    inst = generate_experiment(a.r, a.m, a.n1, a.n2, a.noise, a.seed)
    write_instance(a.out, inst)
    print(f"wrote {a.out} (measured_noise={inst.measured_noise:.6g}, clamp_count={inst.clamp_count})")
    return EXIT_OK


def _cmd_factorize(a) -> int:
    cfg = load_config(a.config, r=a.r) if a.config else AlgoConfig.calibrated(r=a.r)
    M = load_data_matrix(a.input)
    try:
        rep = face_intersect(M, a.r, cfg, threads=a.threads)
    except PipelineError as exc:
        diag = " ".join(f"{k}={v}" for k, v in exc.diagnostics.items())
        print(f"factorization failed: {exc} {diag}".rstrip(), file=sys.stderr)
        return EXIT_ALGO
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "W_hat.csv", rep.factorization.W)
    write_matrix(out / "A_hat.csv", rep.factorization.A)
    (out / "report").write_text(rep.to_text())
    print(f"facets={rep.facet_count} intersection={rep.intersection_vertex_count} "
          f"anchors={rep.anchor_vertex_count} residual={rep.residual:.3e}")
    return EXIT_OK


def _cmd_evaluate(a) -> int:
    truth, est = Path(a.truth), Path(a.est)
    W = read_matrix(truth / "W.csv")
    M = read_matrix(truth / "M.csv")
    noisy = truth / "M_noisy.csv"
    M_obs = read_matrix(noisy) if noisy.exists() else M
    W_hat = read_matrix(est / "W_hat.csv")
    A_hat = read_matrix(est / "A_hat.csv")
    if W.shape != W_hat.shape or A_hat.shape != (M.shape[0], W.shape[0]):
        print("shape mismatch between truth and estimate", file=sys.stderr)
        return EXIT_USAGE
    errs = reconstruction_errors(M, M_obs, A_hat, W_hat)
    print(f"w_error = {matched_w_error(W, W_hat):.17g}")
    print(f"m_tilde_error = {errs['m_tilde_error']:.17g}")
    print(f"m_error = {errs['m_error']:.17g}")
    if a.extended:
        print(f"w_max_row_error = {max_row_error(W, W_hat):.17g}")
        print(f"m_tilde_error_fro = {errs['m_tilde_error_fro']:.17g}")
        print(f"m_error_fro = {errs['m_error_fro']:.17g}")
    return EXIT_OK


def _cmd_bench(a) -> int:
    spec = benchmod.load_bench_spec(a.spec)

    def progress(b):
        if a.verbose:
            print(f"{b.method:>18s} noise={b.noise_level:g} seed={b.seed} w_error={b.w_error:.4g}", file=sys.stderr)

    results = benchmod.run_benchmark(spec, threads=a.threads, progress=progress)
    summary = benchmod.write_results(a.out, results)
    sys.stdout.write(benchmod.aggregates_csv(benchmod.aggregate(results)))
    print(f"wrote {a.out} and {summary}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="faceintersect", description="Subset-separable NMF via facet intersection.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic instance directory")
    g.add_argument("--r", type=int, default=5)
    g.add_argument("--m", type=int, default=10)
    g.add_argument("--n1", type=int, default=100)
    g.add_argument("--n2", type=int, default=100)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_generate)

    f = sub.add_parser("factorize", help="run face-intersect on a matrix")
    f.add_argument("--in", dest="input", required=True, help="instance directory or M.csv")
    f.add_argument("--r", type=int, required=True)
    f.add_argument("--config", help="key = value file; defaults to the calibrated preset")
    f.add_argument("--threads", type=int)
    f.add_argument("--out", required=True)
    f.set_defaults(func=_cmd_factorize)

    e = sub.add_parser("evaluate", help="compare an estimate with ground truth")
    e.add_argument("--truth", required=True)
    e.add_argument("--est", required=True)
    e.add_argument("--extended", action="store_true", help="also print Frobenius norms")
    e.set_defaults(func=_cmd_evaluate)

    b = sub.add_parser("bench", help="noise sweep over all three methods")
    b.add_argument("--spec", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--threads", type=int)
    b.set_defaults(func=_cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return a.func(a)
    except (ConfigError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, ConfigError) else EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
