"""Noise sweep comparing face-intersect with the two baselines.

A bench spec is a ``key = value`` file.  Sweep keys:

``noise_levels``  comma-separated noise ratios (required)
``seeds``         comma-separated integers, or ``a:b`` for ``range(a, b)``
``r, m, n1, n2``  instance shape (defaults 5, 10, 100, 100)
``pg_iters``      iteration cap for projected gradient (default 2000)
``methods``       subset of the three method names (default: all)

Every other key is passed to :class:`~faceintersect.config.AlgoConfig`,
starting from the calibrated preset unless ``preset`` says otherwise.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import anchor_words, projected_gradient_nmf
from .completion import face_intersect
from .config import ConfigError, config_from_mapping, parse_key_values
from .metrics import matched_w_error, reconstruction_errors
from .synthetic import generate_experiment

log = logging.getLogger(__name__)

METHODS = ("face-intersect", "anchor-words", "projected-gradient")
COLUMNS = ("method", "noise", "seed", "w_error", "m_tilde_error", "m_error", "wall_ms")
_SWEEP_KEYS = {"noise_levels", "seeds", "r", "m", "n1", "n2", "pg_iters", "methods"}


@dataclass(frozen=True)
class BenchResult:
    method: str
    noise_level: float
    seed: int
    w_error: float  # nan marks a failed run
    m_tilde_error: float
    m_error: float
    wall_ms: int

    @property
    def failed(self) -> bool:
        return math.isnan(self.w_error)


@dataclass
class BenchSpec:
    noise_levels: tuple[float, ...]
    seeds: tuple[int, ...]
    r: int = 5
    m: int = 10
    n1: int = 100
    n2: int = 100
    pg_iters: int = 2000
    methods: tuple[str, ...] = METHODS
    algo: object = None  # AlgoConfig


def _parse_seeds(raw: str) -> tuple[int, ...]:
    raw = raw.strip()
    if ":" in raw:
        a, b = raw.split(":", 1)
        return tuple(range(int(a), int(b)))
    return tuple(int(s) for s in raw.split(",") if s.strip())


def parse_bench_spec(text: str, source: str = "<string>") -> BenchSpec:
    kv = parse_key_values(text, source)
    if "noise_levels" not in kv:
        raise ConfigError(f"{source}: noise_levels is required")
    try:
        noise = tuple(float(s) for s in kv["noise_levels"].split(",") if s.strip())
        seeds = _parse_seeds(kv.get("seeds", "0"))
        shape = {k: int(kv[k]) for k in ("r", "m", "n1", "n2", "pg_iters") if k in kv}
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    if not noise or not seeds:
        raise ConfigError(f"{source}: empty noise_levels or seeds")
    if any(x < 0 for x in noise):
        raise ConfigError(f"{source}: noise levels must be non-negative")
    methods = METHODS
    if "methods" in kv:
        methods = tuple(s.strip() for s in kv["methods"].split(",") if s.strip())
        bad = [x for x in methods if x not in METHODS]
        if bad:
            raise ConfigError(f"{source}: unknown methods {bad}")
    algo_kv = {k: v for k, v in kv.items() if k not in _SWEEP_KEYS}
    algo_kv.setdefault("preset", "calibrated")
    algo = config_from_mapping(algo_kv, r=shape.get("r", 5))
    return BenchSpec(noise, seeds, methods=methods, algo=algo, **shape)


def load_bench_spec(path) -> BenchSpec:
    path = Path(path)
    return parse_bench_spec(path.read_text(), str(path))


def _run_method(method, inst, spec: BenchSpec, threads):
    M_obs = inst.M_noisy
    if method == "face-intersect":
        return face_intersect(M_obs, spec.r, spec.algo, threads=threads).factorization
    if method == "anchor-words":
        return anchor_words(M_obs, spec.r)
    return projected_gradient_nmf(M_obs, spec.r, max_iters=spec.pg_iters, seed=inst.meta["seed"])


def run_cell(method: str, inst, spec: BenchSpec, threads: int | None = None) -> BenchResult:
    """One (method, instance) evaluation; any exception becomes an NA row."""
    noise, seed = inst.meta["noise"], inst.meta["seed"]
    t0 = time.perf_counter()
    try:
        fac = _run_method(method, inst, spec, threads)
        errs = reconstruction_errors(inst.M.entries, inst.M_noisy.entries, fac.A, fac.W)
        w_err = matched_w_error(inst.W, fac.W)
        vals = (w_err, errs["m_tilde_error"], errs["m_error"])
    except Exception as exc:  # a failed method must not stop the sweep
        log.warning("%s failed at noise=%g seed=%d: %s", method, noise, seed, exc)
        vals = (math.nan,) * 3
    ms = int(round(1e3 * (time.perf_counter() - t0)))
    return BenchResult(method, noise, seed, *vals, ms)


def run_benchmark(spec: BenchSpec, threads: int | None = None, progress=None) -> list[BenchResult]:
    """Run every (noise, seed, method) cell; rows come back sorted by that key."""
    out = []
    for noise in spec.noise_levels:
        for seed in spec.seeds:
            inst = generate_experiment(spec.r, spec.m, spec.n1, spec.n2, noise, seed)
            for method in spec.methods:
                res = run_cell(method, inst, spec, threads)
                out.append(res)
                if progress is not None:
                    progress(res)
    order = {m: i for i, m in enumerate(METHODS)}
    out.sort(key=lambda b: (b.noise_level, b.seed, order[b.method]))
    return out


def _fmt(x: float) -> str:
    return "NA" if math.isnan(x) else f"{x:.17g}"


def results_csv(results: list[BenchResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for b in results:
        w.writerow(
            [b.method, f"{b.noise_level:.17g}", b.seed, _fmt(b.w_error), _fmt(b.m_tilde_error), _fmt(b.m_error), b.wall_ms]
        )
    return buf.getvalue()


def aggregate(results: list[BenchResult]) -> list[dict]:
    """Mean and standard error per (noise, method) over the successful seeds."""
    groups: dict[tuple[float, str], list[BenchResult]] = {}
    for b in results:
        groups.setdefault((b.noise_level, b.method), []).append(b)
    order = {m: i for i, m in enumerate(METHODS)}
    rows = []
    for (noise, method), bs in sorted(groups.items(), key=lambda kv: (kv[0][0], order[kv[0][1]])):
        ok = [b for b in bs if not b.failed]
        row = {"method": method, "noise": noise, "n_ok": len(ok), "n_failed": len(bs) - len(ok)}
        for col in ("w_error", "m_tilde_error", "m_error"):
            v = np.array([getattr(b, col) for b in ok])
            row[f"{col}_mean"] = float(v.mean()) if len(v) else math.nan
            row[f"{col}_se"] = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else math.nan
        rows.append(row)
    return rows


def aggregates_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = list(rows[0])
    w.writerow(keys)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in (row[k] for k in keys)])
    return buf.getvalue()


def write_results(path, results: list[BenchResult]) -> Path:
    """Write the per-run CSV to ``path`` and the aggregates next to it as ``<stem>.summary.csv``."""
    path = Path(path)
    path.write_text(results_csv(results))
    summary = path.with_name(path.stem + ".summary.csv")
    summary.write_text(aggregates_csv(aggregate(results)))
    return summary
