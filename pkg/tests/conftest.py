"""Shared fixtures: seeded RNG and a one-time kernel warmup."""

import math

import numpy as np
import pytest

import dch


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # the first call through each kernel may JIT-compile; keep that cost
    # out of the timed acceptance tests
    cmap = dch.build_rect_lattice(0.5, math.pi / 4, 2, 2)
    f = dch.monomial(cmap, 2)
    dch.is_holomorphic(f)
    dch.primitive(f)
    fp = dch.derive_duffin(f)
    dch.derivative_edge_residuals(f, fp)
    dch.exp_product(cmap, 0.25)
    dch.integrate_path(f, [0, 1, 2])
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
