import functools

import numpy as np
import pytest

from faceintersect import AlgoConfig, face_intersect, generate_experiment
from faceintersect.completion import reduce_dimension
from faceintersect.config import resolve
from faceintersect.discovery import find_all_facets


@functools.lru_cache(maxsize=None)
def instance(noise: float, seed: int):
    return generate_experiment(noise=noise, seed=seed)


@functools.lru_cache(maxsize=None)
def pipeline(noise: float, seed: int):
    """Calibrated face-intersect run, cached so tests and criteria can share it."""
    inst = instance(noise, seed)
    return face_intersect(inst.M_noisy, 5, AlgoConfig.calibrated())


@functools.lru_cache(maxsize=None)
def discovery(noise: float, seed: int):
    """Reduced points, resolved parameters and facet candidates for one instance."""
    inst = instance(noise, seed)
    M = inst.M_noisy.entries
    X, red = reduce_dimension(M, 5)
    res = resolve(AlgoConfig.calibrated(), M, X)
    return X, red, res, find_all_facets(X, res)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
