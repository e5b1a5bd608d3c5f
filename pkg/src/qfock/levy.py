"""Q-Levy processes on the product of the grid with the atoms of a jump measure.

Product sites are flattened as ``p = i * K + j`` for grid cell i and atom j,
with mass ``sigma_i * w_j``.  The extended kernel ignores the jump
coordinate, so two product sites over the same grid cell see the value 1.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CutoffTooSmall, SupportOverlap, WordTooLong
from .fock import GradedOperator, annihilate, create, gram, neutral
from .field import moment_tensors
from .kernel import QKernel, SiteGrid, build_anyonic_kernel
from .partitions import cumulants_from_moments, diagonal_measure, mixed_cumulant
from .symmetrize import SYM_TOL, check_envelope, symmetrize, tensor

MASS_TOL = 1e-12
RANK_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class JumpMeasure:
    """Finitely supported probability measure ``sum_j w_j delta_{x_j}``."""

    x: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        w = np.asarray(self.w, dtype=float).ravel()
        if x.size < 1 or x.shape != w.shape:
            raise ValueError("need at least one atom and one weight per atom")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > MASS_TOL:
            raise ValueError("weights must be positive and sum to 1")
        if np.unique(x).size != x.size:
            raise ValueError("atoms must be distinct")
        x.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "w", w)

    @classmethod
    def point(cls, lam: float) -> "JumpMeasure":
        return cls([lam], [1.0])

    @property
    def K(self) -> int:
        return self.x.size

    def moment(self, n: int) -> float:
        return float(np.sum(self.w * self.x**n))

    @property
    def levy_masses(self) -> np.ndarray:
        """``w_j / x_j^2`` off zero, 0 at a zero atom."""
        nz = self.x != 0
        return np.where(nz, self.w / np.where(nz, self.x, 1.0) ** 2, 0.0)

    @property
    def zero_weight(self) -> float:
        return float(self.w[self.x == 0].sum())

    def levy_moment(self, n: int) -> float:
        return float(np.sum(self.levy_masses * self.x**n))

    def monomial(self, k: int) -> np.ndarray:
        """Values of ``x^k`` on the atoms."""
        return self.x**k


@dataclass(frozen=True, eq=False)
class LevySpace:
    kernel: QKernel
    jumps: JumpMeasure
    product: QKernel

    @property
    def m(self) -> int:
        return self.kernel.m

    @property
    def K(self) -> int:
        return self.jumps.K

    def lift(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        """``f (x) g`` as a function on the flattened product grid."""
        return np.outer(np.asarray(f), np.asarray(g)).ravel()

    def transform(self, F: np.ndarray) -> np.ndarray:
        """Unitary rescaling to the Levy-measure form: ``F(t, 0)`` at a zero atom, ``x F(t, x)`` elsewhere."""
        x = np.tile(self.jumps.x, self.m)
        return np.where(x == 0, 1.0, x) * np.asarray(F)

    def transformed_weights(self) -> np.ndarray:
        """Product masses for the Levy-measure form: ``sigma_i`` times ``nu({0})`` or ``w_j / x_j^2``."""
        nu = self.jumps
        per_atom = np.where(nu.x == 0, nu.w, nu.levy_masses)
        return np.outer(self.kernel.weights, per_atom).ravel()


def build_levy_space(kernel: QKernel, jumps: JumpMeasure) -> LevySpace:
    grid = kernel.grid
    K = jumps.K
    weights = np.outer(grid.weights, jumps.w).ravel()
    pgrid = SiteGrid(np.arange(grid.m * K, dtype=float), weights)
    matrix = np.kron(kernel.matrix, np.ones((K, K)))
    cell_mean = np.repeat(kernel.cell_mean, K)
    return LevySpace(kernel, jumps, QKernel(pgrid, matrix, cell_mean=cell_mean))


def power_jump(space: LevySpace, f: np.ndarray, k: int, N: int) -> GradedOperator:
    """``X_k(f) = a+(f x^{k-1}) + a0(f x^k) + a-(f x^{k-1})``."""
    if k < 1:
        raise ValueError("power jumps start at k = 1")
    f = np.asarray(f, dtype=complex)
    nu = space.jumps
    lo = space.lift(f, nu.monomial(k - 1))
    hi = space.lift(f, nu.monomial(k))
    P = space.product
    return create(P, lo, N) + neutral(P, hi, N) + annihilate(P, np.conj(lo), N)


def xi(space: LevySpace, f: np.ndarray, N: int) -> GradedOperator:
    if N < 2:
        raise CutoffTooSmall("the Levy field needs a cutoff of at least 2")
    return power_jump(space, f, 1, N)


def xi_moment_tensors(space: LevySpace, N: int, n_max: int) -> dict:
    ops = [xi(space, space.kernel.grid.indicator(i), N) for i in range(space.m)]
    return moment_tensors(ops, space.product, N, n_max)


def word_state(space: LevySpace, word: Sequence[np.ndarray], N: int) -> complex:
    """``tau(<f_1,xi> ... <f_n,xi>)``."""
    if len(word) > N:
        raise WordTooLong(f"word of length {len(word)} exceeds the cutoff {N}")
    P = space.product
    comps = [np.zeros((P.m,) * n, dtype=complex) for n in range(N + 1)]
    comps[0] = np.asarray(1.0 + 0j)
    for f in reversed(word):
        comps = xi(space, f, N).act(comps)
    return complex(comps[0])


@dataclass(frozen=True)
class StationarityReport:
    residual: float
    asserted: bool
    tolerance: float = SYM_TOL

    @property
    def ok(self) -> bool:
        # off uniform grids or for general kernels the value is only reported
        return self.residual <= self.tolerance or not self.asserted


def stationarity_residual(space: LevySpace, first, second, n_max: int = 5, N: int | None = None) -> StationarityReport:
    """``max_n |tau(<chi_1,xi>^n) - tau(<chi_2,xi>^n)|`` for two cell sets of equal mass.

    Asserted only for anyonic or constant kernels on equal-weight cells,
    where crossing coefficients depend on relative order alone.
    """
    N = n_max if N is None else N
    k = space.kernel
    grid = k.grid
    c1, c2 = grid.indicator(first), grid.indicator(second)
    if abs(float(c1 @ k.weights) - float(c2 @ k.weights)) > MASS_TOL:
        raise ValueError("the two cell sets must carry the same mass")
    res = 0.0
    for n in range(1, n_max + 1):
        res = max(res, abs(word_state(space, [c1] * n, N) - word_state(space, [c2] * n, N)))
    cells = sorted(set(np.flatnonzero(c1)) | set(np.flatnonzero(c2)))
    uniform = np.ptp(k.weights[cells]) <= MASS_TOL
    order_only = k.q is not None or np.ptp(k.matrix.real) + np.ptp(k.matrix.imag) == 0
    return StationarityReport(float(res), bool(uniform and order_only))


@dataclass(frozen=True)
class LevyCumulantReport:
    cumulant_residual: float
    levy_measure_residual: float
    n_max: int
    tolerance: float = SYM_TOL

    @property
    def ok(self) -> bool:
        return max(self.cumulant_residual, self.levy_measure_residual) <= self.tolerance


def verify_levy_cumulants(space: LevySpace, N: int, n_max: int) -> tuple[dict, LevyCumulantReport]:
    """Cumulants of the field against ``(int x^{n-2} dnu) * delta`` on the diagonal."""
    if n_max > min(N, 6):
        raise CutoffTooSmall(f"n_max = {n_max} needs a cutoff of at least {n_max} (and <= 6)")
    k = space.kernel
    nu = space.jumps
    c = cumulants_from_moments(k, xi_moment_tensors(space, N, n_max))
    res = float(np.max(np.abs(c[1])))
    for n in range(2, n_max + 1):
        res = max(res, float(np.max(np.abs(c[n] - diagonal_measure(k, n, nu.moment(n - 2))))))
    lres = 0.0
    chi = np.ones(k.m)
    mass = k.grid.total_mass
    for n in range(3, n_max + 1):
        got = mixed_cumulant(c[n], [chi] * n)
        lres = max(lres, abs(got - nu.levy_moment(n) * mass))
    return c, LevyCumulantReport(res, lres, n_max)


def _support(f: np.ndarray) -> set:
    return set(np.flatnonzero(np.abs(np.asarray(f)) > 0).tolist())


def pyramidal_residual(
    space: LevySpace,
    A: Sequence[int],
    B: Sequence[int],
    left: Sequence[np.ndarray],
    middle: Sequence[np.ndarray],
    right: Sequence[np.ndarray],
    N: int,
) -> float:
    """``|tau(f.. g.. f..) - tau(f.. f..) tau(g..)|`` for f's on A and g's on B."""
    A, B = set(A), set(B)
    if A & B:
        raise SupportOverlap(f"cell sets overlap at {sorted(A & B)}")
    for f in list(left) + list(right):
        if not _support(f) <= A:
            raise SupportOverlap("an outer function leaves its cell set")
    for g in middle:
        if not _support(g) <= B:
            raise SupportOverlap("an inner function leaves its cell set")
    whole = word_state(space, list(left) + list(middle) + list(right), N)
    outer = word_state(space, list(left) + list(right), N)
    inner = word_state(space, list(middle), N)
    return abs(whole - outer * inner)


def pyramidal_trials(
    space: LevySpace, rng: np.random.Generator, trials: int, max_len: int, N: int
) -> float:
    """Max pyramidal residual over random disjoint splits and random words."""
    m = space.m
    if m < 2:
        raise ValueError("pyramidal trials need at least two cells")
    worst = 0.0
    for _ in range(trials):
        perm = rng.permutation(m)
        cut = int(rng.integers(1, m))
        A, B = sorted(perm[:cut].tolist()), sorted(perm[cut:].tolist())
        total = int(rng.integers(1, max_len + 1))
        sizes = rng.multinomial(total, [1 / 3] * 3)

        def draw(cells, count):
            out = []
            for _ in range(count):
                f = np.zeros(m)
                f[cells] = rng.normal(size=len(cells))
                out.append(f)
            return out

        worst = max(
            worst,
            pyramidal_residual(
                space, A, B, draw(A, sizes[0]), draw(B, sizes[1]), draw(A, sizes[2]), N
            ),
        )
    return worst


def _rank(gram_matrix: np.ndarray) -> int:
    if gram_matrix.size == 0:
        return 0
    s = np.linalg.svd(gram_matrix, compute_uv=False)
    return int(np.sum(s > RANK_RTOL * s.max())) if s.max() > 0 else 0


def target_span_components(space: LevySpace, L: int) -> list:
    """Batch of ``P_i[e_a (x) x^{l_1} ... x^{l_i}]`` with ``i + sum(l) <= L``."""
    P = space.product
    m = space.m
    cols: list[list] = []
    for i in range(L + 1):
        for exps in itertools.product(range(L - i + 1), repeat=i):
            if i + sum(exps) > L:
                continue
            for cells in itertools.product(range(m), repeat=i):
                factors = [space.lift(np.eye(m)[a], space.jumps.monomial(l)) for a, l in zip(cells, exps)]
                cols.append([i, symmetrize(P, tensor(*factors))])
    comps = [np.zeros((P.m,) * n + (len(cols),), dtype=complex) for n in range(L + 1)]
    for c, (i, t) in enumerate(cols):
        comps[i][..., c] = t
    return comps


def cyclicity_rank(space: LevySpace, L: int, N: int | None = None) -> tuple[int, int]:
    """Rank of all vacuum-word images of length <= L, and the target span dimension."""
    N = L if N is None else N
    if L > N:
        raise CutoffTooSmall("word length must not exceed the cutoff")
    P = space.product
    check_envelope(P.m, N)
    ops = [xi(space, space.kernel.grid.indicator(i), max(N, 2)) for i in range(space.m)]
    NN = max(N, 2)
    level = [np.zeros((P.m,) * n + (1,), dtype=complex) for n in range(NN + 1)]
    level[0][...] = 1.0
    words = [level]
    for _ in range(L):
        applied = [op.act(level) for op in ops]
        level = [np.concatenate([a[n] for a in applied], axis=-1) for n in range(NN + 1)]
        words.append(level)
    allw = [np.concatenate([w[n] for w in words], axis=-1) for n in range(NN + 1)]
    achieved = _rank(gram(P, allw, allw))
    target = target_span_components(space, L)
    target = [target[n] if n < len(target) else np.zeros((P.m,) * n + (target[0].shape[-1],)) for n in range(NN + 1)]
    return achieved, _rank(gram(P, target, target))


def cyclicity_refinement_gap(q: complex, jumps: JumpMeasure, cells: int, L: int = 2) -> float:
    """Relative distance from ``chi_T (x) x`` to the span of vacuum words of length <= L.

    T is split into ``cells`` equal cells of total mass 1.  On an atomic grid
    this vector is out of reach (each cell's square drags along its own
    diagonal tensor), and the gap closes only as the cells are refined.
    """
    grid = SiteGrid.uniform(cells, weight=1.0 / cells)
    space = build_levy_space(build_anyonic_kernel(grid, q), jumps)
    P = space.product
    N = max(L, 2)
    ops = [xi(space, grid.indicator(i), N) for i in range(cells)]
    level = [np.zeros((P.m,) * n + (1,), dtype=complex) for n in range(N + 1)]
    level[0][...] = 1.0
    words = [level]
    for _ in range(L):
        applied = [op.act(level) for op in ops]
        level = [np.concatenate([a[n] for a in applied], axis=-1) for n in range(N + 1)]
        words.append(level)
    allw = [np.concatenate([w[n] for w in words], axis=-1) for n in range(N + 1)]
    target = [np.zeros((P.m,) * n + (1,), dtype=complex) for n in range(N + 1)]
    target[1][:, 0] = space.lift(np.ones(cells), jumps.monomial(1))
    G = gram(P, allw, allw)
    b = gram(P, allw, target)[:, 0]
    tt = gram(P, target, target)[0, 0].real
    proj = float(np.real(np.conj(b) @ np.linalg.pinv(G, rcond=1e-10, hermitian=True) @ b))
    return float(np.sqrt(max(tt - proj, 0.0) / tt))
