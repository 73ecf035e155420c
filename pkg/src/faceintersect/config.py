"""Algorithm configuration, config-file parsing and data-driven defaults.

``AlgoConfig`` keeps every tolerance the algorithm needs.  Fields left as
``None`` are filled in by :func:`resolve` from the data at hand:

* ``noise_sigma`` from the singular values of ``M`` beyond the r-th,
* ``eps`` as ``eps_scale * noise_sigma * sqrt(m)`` (the expected row-noise norm),
* ``alpha`` as ``sigma_r`` of the rows picked by greedy residual selection,
* ``gamma`` as ``gamma_scale * alpha**2 / (16 d)`` with ``d = facet_dim`` or ``r - 1``
  (``gamma_scale`` is phased in linearly while ``eps**2`` is below
  ``GAMMA_RAMP`` times the unscaled value, so it has no effect on exact data),
* ``n_min`` as ``n // (2 (r + 1))``.

The radii default to the asymptotic expressions with the ``c_near`` and
``c_prune`` constants; ``near_scale``, ``near_radius``, ``merge_radius`` and
``eps_S`` override them.  :meth:`AlgoConfig.calibrated` returns the preset the
benchmark uses, tuned on synthetic instances (see the README).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np


GAMMA_RAMP = 1e-3


class ConfigError(ValueError):
    """Malformed or unknown configuration entry."""


@dataclass(frozen=True)
class AlgoConfig:
    r: int = 5
    eps: float | None = None
    gamma: float | None = None
    alpha: float | None = None
    n_min: int | None = None
    c_near: float = 10.0
    c_prune: float = 10.0
    h_param: float = 1.0
    solver_tol: float = 1e-7
    max_outer_iters: int = 10
    # data-driven defaults
    noise_sigma: float | None = None
    eps_scale: float = 0.5
    gamma_scale: float = 1.0
    facet_dim: int | None = None
    # practical overrides of the asymptotic radii
    near_scale: float | None = None
    near_radius: float | None = None
    merge_radius: float | None = None
    eps_S: float | None = None
    refit_iters: int = 0
    reduce: bool = True
    threads: int | None = None

    def __post_init__(self):
        if self.r < 2:
            raise ConfigError("r must be at least 2")
        if self.max_outer_iters < self.r:
            raise ConfigError("max_outer_iters must be at least r")
        for name in ("c_near", "c_prune", "h_param", "solver_tol", "eps_scale", "gamma_scale"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("eps", "noise_sigma", "near_radius", "merge_radius", "eps_S", "near_scale"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ConfigError(f"{name} must be non-negative")
        for name in ("gamma", "alpha"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.n_min is not None and self.n_min < 1:
            raise ConfigError("n_min must be at least 1")
        if self.refit_iters < 0:
            raise ConfigError("refit_iters must be non-negative")

    def replace(self, **kw) -> "AlgoConfig":
        return dataclasses.replace(self, **kw)

    @classmethod
    def calibrated(cls, r: int = 5, **kw) -> "AlgoConfig":
        """Settings that work on the synthetic benchmark at 0-5% noise."""
        base = dict(
            r=r,
            eps_scale=0.5,
            gamma_scale=60.0,
            near_scale=1.0,
            refit_iters=10,
            merge_radius=0.3,
            eps_S=0.02,
        )
        base.update(kw)
        return cls(**base)


PRESETS = {"calibrated": AlgoConfig.calibrated}

_FIELD_TYPES = {f.name: f.type for f in fields(AlgoConfig)}


def _coerce(name: str, raw: str):
    t = str(_FIELD_TYPES[name])
    val = raw.strip()
    if val.lower() in {"none", "auto", ""} and "None" in t:
        return None
    try:
        if t.startswith("bool"):
            if val.lower() in {"1", "true", "yes", "on"}:
                return True
            if val.lower() in {"0", "false", "no", "off"}:
                return False
            raise ValueError(val)
        if t.startswith("int"):
            return int(val)
        return float(val)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def parse_key_values(text: str, source: str = "<string>") -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, val = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = val
    return out


def config_from_mapping(kv: dict[str, str], r: int | None = None) -> AlgoConfig:
    """Build an :class:`AlgoConfig`; a ``preset`` key selects the starting point."""
    kv = dict(kv)
    preset = kv.pop("preset", None)
    unknown = sorted(set(kv) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    values = {k: _coerce(k, v) for k, v in kv.items()}
    if r is not None:
        values["r"] = r
    if preset is None:
        return AlgoConfig(**values)
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}")
    return PRESETS[preset](**values)


def load_config(path, r: int | None = None) -> AlgoConfig:
    path = Path(path)
    return config_from_mapping(parse_key_values(path.read_text(), str(path)), r=r)


# ---------------------------------------------------------------------------
# Resolution of data-driven quantities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Resolved:
    """Concrete numbers derived from an :class:`AlgoConfig` and a data matrix."""

    r: int
    eps: float
    gamma: float
    alpha: float
    n_min: int
    noise_sigma: float
    merge_radius: float
    eps_S: float
    cfg: AlgoConfig
    ambient_dim: int | None = None  # dimension of the points discovery works on

    def near_radius(self, dim: int) -> float:
        c = self.cfg
        if c.near_radius is not None:
            rad = c.near_radius
        elif c.near_scale is not None:
            # a point's noise off a dim-d subspace has about sqrt(p - d) sigma norm
            p = self.ambient_dim or self.r
            rad = c.near_scale * self.noise_sigma * math.sqrt(max(p - dim, 1))
        else:
            rad = c.c_near * math.sqrt(self.r) * self.eps / (self.alpha * self.gamma)
        return max(rad, 1e-7)

    def as_dict(self) -> dict[str, float]:
        return {
            "eps": self.eps,
            "gamma": self.gamma,
            "alpha": self.alpha,
            "n_min": self.n_min,
            "noise_sigma": self.noise_sigma,
            "merge_radius": self.merge_radius,
            "eps_S": self.eps_S,
        }


def estimate_noise_sigma(M: np.ndarray, r: int) -> float:
    """Per-entry noise level from the energy outside the top-r singular space.

    Returns 0 when that energy is at round-off level, so exact data is treated
    as noise-free.
    """
    n, m = M.shape
    if m <= r or n <= r:
        return 0.0
    s = np.linalg.svd(M, compute_uv=False)
    tail = float(np.sqrt(np.sum(s[r:] ** 2) / (n * (m - r))))
    scale = float(np.linalg.norm(M)) / math.sqrt(n * m)
    return 0.0 if tail <= 1e-10 * scale else tail


def greedy_anchor_rows(X: np.ndarray, k: int) -> list[int]:
    """Indices picked by repeated max-residual selection (ties: lowest index)."""
    from .kernels import residual_norms  # local import keeps module load light

    chosen: list[int] = []
    Q = np.zeros((X.shape[1], 0))
    for _ in range(k):
        res = residual_norms(X, Q)
        j = int(np.argmax(res))
        chosen.append(j)
        U, s, _ = np.linalg.svd(X[chosen].T, full_matrices=False)
        Q = U[:, s > 1e-12 * max(s[0], 1e-300)]
    return chosen


def resolve(cfg: AlgoConfig, M: np.ndarray, X: np.ndarray | None = None) -> Resolved:
    """Fill the ``None`` fields of ``cfg`` from the (normalized) data ``M``.

    ``X`` is the matrix the algorithm will actually work on (the reduced
    coordinates when dimension reduction is on); ``alpha`` is measured there.
    """
    M = np.asarray(M, dtype=np.float64)
    n, m = M.shape
    r = cfg.r
    X = M if X is None else X
    sigma = cfg.noise_sigma if cfg.noise_sigma is not None else estimate_noise_sigma(M, r)
    eps = cfg.eps if cfg.eps is not None else cfg.eps_scale * sigma * math.sqrt(m)
    if cfg.alpha is not None:
        alpha = cfg.alpha
    else:
        idx = greedy_anchor_rows(X, min(r, n))
        sv = np.linalg.svd(X[idx], compute_uv=False)
        alpha = float(sv[-1]) if sv.size >= r else 0.0
        alpha = max(alpha, 1e-12)
    d = cfg.facet_dim if cfg.facet_dim is not None else r - 1
    # gamma_scale only exists to lift the threshold above noise eigenvalues
    # (of order eps**2); at vanishing noise it would cut off genuinely thin
    # facet directions, so it is phased in as eps**2 grows against gamma
    base_gamma = alpha**2 / (16 * d)
    ramp = min(1.0, eps**2 / (GAMMA_RAMP * base_gamma))
    gamma = cfg.gamma if cfg.gamma is not None else (1 + (cfg.gamma_scale - 1) * ramp) * base_gamma
    n_min = cfg.n_min if cfg.n_min is not None else max(1, n // (2 * (r + 1)))
    base = cfg.h_param * math.sqrt(r) * eps / (alpha * gamma)
    merge = cfg.merge_radius if cfg.merge_radius is not None else cfg.c_prune * base
    merge = max(merge, 1e-7)
    eps_S = cfg.eps_S if cfg.eps_S is not None else base
    return Resolved(r, eps, gamma, alpha, n_min, sigma, merge, eps_S, cfg, X.shape[1])
