"""Shared fixtures: the reference decompositions and long trajectories are
expensive, so they are computed once per session and reused across modules."""

import warnings

import numpy as np
import pytest

from floqdyn.scenarios import (
    build_generator,
    build_three_level,
    decompose_scenario,
    efficiency,
    evolve,
)


@pytest.fixture(scope="session")
def h0_three():
    return np.diag([0.0, 3.0, 2.5]).astype(complex)


@pytest.fixture(scope="session")
def cfg_v0():
    return build_three_level("v0")


@pytest.fixture(scope="session")
def cfg_v1():
    return build_three_level("v1")


@pytest.fixture(scope="session")
def dec_v0(cfg_v0):
    return decompose_scenario(cfg_v0)


@pytest.fixture(scope="session")
def dec_v1(cfg_v1):
    return decompose_scenario(cfg_v1)


@pytest.fixture(scope="session")
def gen_v0(cfg_v0, dec_v0):
    return build_generator(cfg_v0, decomposition=dec_v0)


@pytest.fixture(scope="session")
def gen_v1(cfg_v1, dec_v1):
    return build_generator(cfg_v1, decomposition=dec_v1)


@pytest.fixture(scope="session")
def long_runs(cfg_v0, cfg_v1, gen_v0, gen_v1):
    """eta(t ~ 6000) for the three 3-level presets, shared by several tests."""
    import time

    t0 = time.time()
    cfg_nd = build_three_level("nondriven")
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out["nondriven"] = evolve(cfg_nd, 6000.0)
        out["v0"] = evolve(cfg_v0, 6000.0, generator=gen_v0)
        out["v1"] = evolve(cfg_v1, 6000.0, generator=gen_v1)
    out["eta"] = {k: efficiency(v).eta for k, v in out.items()}
    out["elapsed"] = time.time() - t0
    return out


def random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (a + a.conj().T)
