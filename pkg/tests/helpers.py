"""Shared builders for kernels and random inputs."""
import cmath

import numpy as np

from qfock import SiteGrid, build_anyonic_kernel, build_window_kernel, random_kernel


def unit(theta: float) -> complex:
    return cmath.exp(1j * theta)


def named_kernels(m: int = 3, weight: float = 0.8):
    """The four reference kernel families on a small grid."""
    grid = SiteGrid(np.arange(m, dtype=float), np.linspace(weight, 1.3 * weight, m))
    return {
        "boson": build_anyonic_kernel(grid, 1.0),
        "fermion": build_anyonic_kernel(grid, -1.0),
        "window": build_window_kernel(grid, 1.5),
        "anyon": build_anyonic_kernel(grid, unit(0.9)),
    }


def kernel_from_seed(seed: int, m: int, real: bool = False):
    r = np.random.default_rng(seed)
    grid = SiteGrid(np.arange(m, dtype=float), r.uniform(0.3, 1.5, size=m))
    return random_kernel(grid, r, real=real)


def crandn(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)
