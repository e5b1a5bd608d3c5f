"""Discretized underlying space and the exchange kernel Q.

The continuum space is replaced by a finite ordered grid of cells with
positive masses.  Q lives on pairs of cells; its diagonal is fixed to 1,
which is where the (measure-zero) excluded set of the continuum ends up.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidKernel, NotUnimodular

KERNEL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SiteGrid:
    """Ordered sites ``t_1 < ... < t_m`` with cell masses ``sigma_i > 0``."""

    sites: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        sites = np.asarray(self.sites, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if sites.size < 1:
            raise ValueError("a grid needs at least one site")
        if sites.shape != weights.shape:
            raise ValueError("sites and weights must have the same length")
        if np.any(np.diff(sites) <= 0):
            raise ValueError("sites must be strictly increasing")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise ValueError("weights must be finite and strictly positive")
        sites.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, m: int, spacing: float = 1.0, weight: float = 1.0) -> "SiteGrid":
        return cls(np.arange(m) * float(spacing), np.full(m, float(weight)))

    @property
    def m(self) -> int:
        return self.sites.size

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def indicator(self, cells) -> np.ndarray:
        """Indicator function of a set of cell indices."""
        chi = np.zeros(self.m)
        chi[list(np.atleast_1d(cells))] = 1.0
        return chi

    def delta(self, i: int) -> np.ndarray:
        """Discrete delta at site ``i``: integrates to 1 against sigma."""
        d = np.zeros(self.m)
        d[i] = 1.0 / self.weights[i]
        return d


@dataclass(frozen=True, eq=False)
class QKernel:
    """Hermitian unimodular coefficient matrix on the grid.

    ``cell_mean`` holds, per site, the sigma-average of the continuum kernel
    over one cell paired with itself.  The Fock-space machinery only uses
    ``matrix`` (whose diagonal is 1); ``cell_mean`` enters the quadratic form
    of :func:`qfock.fock.negdef_form`, where the diagonal of sigma x sigma
    must carry no mass.
    """

    grid: SiteGrid
    matrix: np.ndarray
    q: complex | None = None
    cell_mean: np.ndarray | None = field(default=None)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.shape != (self.grid.m, self.grid.m):
            raise InvalidKernel(f"kernel must be {self.grid.m}x{self.grid.m}, got {mat.shape}")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)
        cm = self.cell_mean
        if cm is None:
            cm = np.real(np.diag(mat)).copy()
        else:
            cm = np.broadcast_to(np.asarray(cm, dtype=float), (self.grid.m,)).copy()
        cm.flags.writeable = False
        object.__setattr__(self, "cell_mean", cm)

    @property
    def m(self) -> int:
        return self.grid.m

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    @property
    def is_real(self) -> bool:
        return bool(np.max(np.abs(self.matrix.imag)) <= KERNEL_TOL)

    @property
    def is_bosonic(self) -> bool:
        return bool(np.max(np.abs(self.matrix - 1.0)) <= KERNEL_TOL)

    def __getitem__(self, key):
        return self.matrix[key]


@dataclass(frozen=True)
class KernelReport:
    hermitian_defect: float
    modulus_defect: float
    diagonal_defect: float

    @property
    def ok(self) -> bool:
        return max(self.hermitian_defect, self.modulus_defect, self.diagonal_defect) <= KERNEL_TOL


def validate_kernel(k) -> KernelReport:
    """Entrywise defects of Hermitian symmetry, unimodularity and unit diagonal."""
    mat = np.asarray(k.matrix if isinstance(k, QKernel) else k, dtype=complex)
    return KernelReport(
        hermitian_defect=float(np.max(np.abs(mat - mat.conj().T))),
        modulus_defect=float(np.max(np.abs(np.abs(mat) - 1.0))),
        diagonal_defect=float(np.max(np.abs(np.diag(mat) - 1.0))),
    )


def build_anyonic_kernel(grid: SiteGrid, q: complex) -> QKernel:
    """``Q = q`` above the diagonal, ``conj(q)`` below, 1 on it."""
    q = complex(q)
    if abs(abs(q) - 1.0) > KERNEL_TOL:
        raise NotUnimodular(f"|q| = {abs(q)!r} is not 1")
    m = grid.m
    upper = np.triu(np.ones((m, m), dtype=bool), 1)
    mat = np.where(upper, q, np.where(upper.T, q.conjugate(), 1.0 + 0j))
    # inside a non-atomic cell half the mass has s < t and half s > t
    return QKernel(grid, mat, q=q, cell_mean=np.full(m, q.real))


def build_window_kernel(grid: SiteGrid, r: float) -> QKernel:
    """``Q = -1`` for distinct sites closer than ``r``, else ``+1``."""
    if not r > 0:
        raise ValueError("window radius must be positive")
    dist = np.abs(grid.sites[:, None] - grid.sites[None, :])
    mat = np.where(dist < r, -1.0, 1.0).astype(complex)
    np.fill_diagonal(mat, 1.0)
    # points of one shrinking cell are always closer than r
    return QKernel(grid, mat, cell_mean=np.full(grid.m, -1.0))


def build_explicit_kernel(grid: SiteGrid, matrix, cell_mean=None) -> QKernel:
    """Kernel from a user matrix; rejects anything that fails validation."""
    mat = np.asarray(matrix, dtype=complex)
    if mat.shape != (grid.m, grid.m):
        raise InvalidKernel(f"kernel must be {grid.m}x{grid.m}, got {mat.shape}")
    report = validate_kernel(mat)
    if not report.ok:
        raise InvalidKernel(f"invalid kernel matrix: {report}")
    return QKernel(grid, mat, cell_mean=cell_mean)


def random_kernel(grid: SiteGrid, rng: np.random.Generator, real: bool = False) -> QKernel:
    """Random Hermitian unimodular kernel with unit diagonal."""
    m = grid.m
    if real:
        upper = rng.choice([-1.0, 1.0], size=(m, m)).astype(complex)
    else:
        upper = np.exp(2j * np.pi * rng.random((m, m)))
    mat = np.triu(upper, 1)
    mat = mat + mat.conj().T
    np.fill_diagonal(mat, 1.0)
    return QKernel(grid, mat)
