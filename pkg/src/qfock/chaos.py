"""Orthogonal polynomials of the jump measure, power jumps and chaos expansions.

Polynomials are handled through their values on the atoms; monic
coefficient vectors (lowest degree first) are kept for reporting.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CutoffTooSmall, DegenerateMeasure, IndexOutOfRange, NotGroupSymmetric
from .fock import GradedOperator, annihilate, create, neutral, tensor_inner
from .levy import JumpMeasure, LevySpace, RANK_RTOL
from .symmetrize import SYM_TOL, check_envelope, symmetrize, symmetrizer_matrix, symmetry_defect

DEGENERATE_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class OrthoPolyBasis:
    """Monic orthogonal polynomials ``p^(0..K-1)`` of a K-atom measure.

    ``values[k, j] = p^(k)(x_j)``; ``b[k]`` for ``k < K`` and ``a[k]`` for
    ``1 <= k < K`` (``a[0]`` is unused and set to 0).
    """

    jumps: JumpMeasure
    values: np.ndarray
    coeffs: np.ndarray
    a: np.ndarray
    b: np.ndarray
    C: np.ndarray

    @property
    def K(self) -> int:
        return self.jumps.K

    def p(self, k: int) -> np.ndarray:
        """Values of ``p^(k)`` on the atoms; zero for ``k < 0`` or ``k >= K``."""
        if k < 0 or k >= self.K:
            return np.zeros(self.K)
        return self.values[k]

    def neutral_multiplier(self, k: int) -> np.ndarray:
        """``p^(k+1) + b_k p^(k) + a_k p^(k-1)`` on the atoms."""
        self._check(k)
        return self.p(k + 1) + self.b[k] * self.p(k) + self.a[k] * self.p(k - 1)

    def favard_residual(self) -> float:
        x = self.jumps.x
        return max(
            float(np.max(np.abs(x * self.p(k) - self.neutral_multiplier(k)))) for k in range(self.K)
        )

    def gram(self) -> np.ndarray:
        return (self.values * self.jumps.w) @ self.values.T

    def orthogonality_residual(self) -> float:
        return float(np.max(np.abs(self.gram() - np.diag(self.C))))

    def monomial_coefficients(self, k: int) -> np.ndarray:
        """``c`` with ``x^k = sum_j c_j p^(j)`` on the atoms."""
        xk = self.jumps.monomial(k)
        return (self.values * self.jumps.w) @ xk / self.C

    def _check(self, k: int) -> None:
        if not 0 <= k < self.K:
            raise IndexOutOfRange(f"polynomial index {k} outside 0..{self.K - 1}")


def ortho_polys(jumps: JumpMeasure) -> OrthoPolyBasis:
    """Stieltjes procedure: three-term recurrence against the atoms."""
    x, w = jumps.x, jumps.w
    K = jumps.K
    values = np.zeros((K, K))
    coeffs = np.zeros((K, K))
    a = np.zeros(K)
    b = np.zeros(K)
    C = np.zeros(K)
    prev_v, prev_c = np.zeros(K), np.zeros(K)
    cur_v, cur_c = np.ones(K), np.eye(K)[0]
    for k in range(K):
        Ck = float(np.sum(w * cur_v**2))
        if Ck <= DEGENERATE_TOL:
            raise DegenerateMeasure(f"norm of p^({k}) is {Ck!r}")
        values[k], coeffs[k], C[k] = cur_v, cur_c, Ck
        b[k] = float(np.sum(w * x * cur_v**2)) / Ck
        if k > 0:
            a[k] = Ck / C[k - 1]
        if k + 1 < K:
            nxt_v = (x - b[k]) * cur_v - a[k] * prev_v
            nxt_c = np.roll(cur_c, 1) - b[k] * cur_c - a[k] * prev_c
            prev_v, prev_c, cur_v, cur_c = cur_v, cur_c, nxt_v, nxt_c
    return OrthoPolyBasis(jumps, values, coeffs, a, b, C)


def orthogonalized_jump(
    space: LevySpace, basis: OrthoPolyBasis, f: np.ndarray, k: int, N: int
) -> GradedOperator:
    """``Y_k(f) = a+(f p^k) + a0(f (p^{k+1} + b_k p^k + a_k p^{k-1})) + a-(f p^k)``."""
    basis._check(k)
    f = np.asarray(f, dtype=complex)
    P = space.product
    lo = space.lift(f, basis.p(k))
    mid = space.lift(f, basis.neutral_multiplier(k))
    return create(P, lo, N) + neutral(P, mid, N) + annihilate(P, np.conj(lo), N)


def chaos_slots(alpha: Sequence[int]) -> list[int]:
    """Nondecreasing polynomial indices ``k_1 <= ... <= k_n`` of a multi-index."""
    return [k for k, count in enumerate(alpha) for _ in range(count)]


def group_ranges(alpha: Sequence[int]) -> list[range]:
    out, start = [], 0
    for count in alpha:
        out.append(range(start, start + count))
        start += count
    return out


def group_symmetry_defect(space: LevySpace, alpha: Sequence[int], f: np.ndarray) -> float:
    """Max Q-symmetry defect of f within each group of equal polynomial index."""
    k = space.kernel
    f = np.asarray(f)
    slots = [j for r in group_ranges(alpha) for j in list(r)[:-1]]
    return symmetry_defect(k, f, slots=slots)


def group_symmetrize(space: LevySpace, alpha: Sequence[int], f: np.ndarray) -> np.ndarray:
    """Apply ``P_{alpha_0} (x) P_{alpha_1} (x) ...`` to f."""
    k = space.kernel
    out = np.asarray(f, dtype=complex)
    n = out.ndim
    for r in group_ranges(alpha):
        if len(r) < 2:
            continue
        # bring the group's slots to the front, symmetrize them, move them back
        order = list(r) + [i for i in range(n) if i not in r]
        moved = np.transpose(out, order)
        moved = symmetrize(k, moved, len(r))
        out = np.transpose(moved, np.argsort(order))
    return out


def lift_tensor(space: LevySpace, f: np.ndarray, factors: Sequence[np.ndarray]) -> np.ndarray:
    """``f(t_1..t_n) g_1(x_1) ... g_n(x_n)`` on the flattened product grid."""
    f = np.asarray(f, dtype=complex)
    n = f.ndim
    full = f
    for g in factors:
        full = np.multiply.outer(full, np.asarray(g))
    order = [ax for i in range(n) for ax in (i, n + i)]
    return np.transpose(full, order).reshape((space.m * space.K,) * n)


def multiple_integral(
    space: LevySpace,
    basis: OrthoPolyBasis,
    alpha: Sequence[int],
    f: np.ndarray,
    N: int,
    project: bool = False,
) -> np.ndarray:
    """Fock image ``P_n[f(t) p^{k_1}(x_1) ... p^{k_n}(x_n)]`` of the multiple integral.

    f must be Q-symmetric within each group of equal k; with ``project``
    it is first projected group-wise instead.
    """
    alpha = tuple(alpha)
    if len(alpha) > basis.K and any(alpha[basis.K :]):
        raise IndexOutOfRange("multi-index uses polynomials beyond the support size")
    ks = chaos_slots(alpha)
    n = len(ks)
    if n > N:
        raise CutoffTooSmall(f"|alpha| = {n} exceeds the cutoff {N}")
    f = np.asarray(f, dtype=complex)
    if f.shape != (space.m,) * n:
        raise ValueError(f"kernel tensor must have shape {(space.m,) * n}")
    if project:
        f = group_symmetrize(space, alpha, f)
    elif group_symmetry_defect(space, alpha, f) > SYM_TOL:
        raise NotGroupSymmetric("f is not Q-symmetric within its groups")
    return symmetrize(space.product, lift_tensor(space, f, [basis.p(k) for k in ks]))


def chaos_weight(basis: OrthoPolyBasis, alpha: Sequence[int]) -> float:
    """``prod_i alpha_i! C_i^{alpha_i}``."""
    return float(np.prod([math.factorial(a) * basis.C[i] ** a for i, a in enumerate(alpha)]))


def fock_norm_sq(space: LevySpace, F: np.ndarray) -> float:
    n = np.ndim(F)
    return math.factorial(n) * tensor_inner(space.product, F, F, n).real


def multi_indices(K: int, n: int) -> list[tuple]:
    """All alpha with ``|alpha| = n`` over polynomial indices ``0..K-1``."""
    out = []
    for ks in itertools.combinations_with_replacement(range(K), n):
        out.append(tuple(ks.count(i) for i in range(K)))
    return out


@dataclass(frozen=True)
class ChaosReport:
    favard_residual: float
    polynomial_orthogonality: float
    chaos_orthogonality: float
    norm_residual: float
    dimensions: dict
    table: list

    @property
    def dimensions_ok(self) -> bool:
        return all(a == b for a, b in self.dimensions.values())

    @property
    def ok(self) -> bool:
        worst = max(
            self.favard_residual,
            self.polynomial_orthogonality,
            self.chaos_orthogonality,
            self.norm_residual,
        )
        return worst <= SYM_TOL and self.dimensions_ok


def _rank(G: np.ndarray) -> int:
    s = np.linalg.svd(G, compute_uv=False)
    return int(np.sum(s > RANK_RTOL * s.max())) if s.size and s.max() > 0 else 0


def chaos_orthogonality_report(
    space: LevySpace, basis: OrthoPolyBasis, N: int, rng: np.random.Generator, samples: int = 2
) -> ChaosReport:
    """Orthogonality of distinct chaos spaces, the norm identity and dimension counts."""
    check_envelope(space.m * space.K, N)
    m = space.m
    P = space.product
    vectors: dict = {}
    norm_res = 0.0
    for n in range(N + 1):
        for alpha in multi_indices(basis.K, n):
            vs = []
            for _ in range(samples):
                raw = rng.normal(size=(m,) * n) + 1j * rng.normal(size=(m,) * n)
                f = group_symmetrize(space, alpha, raw)
                F = multiple_integral(space, basis, alpha, f, N)
                expected = chaos_weight(basis, alpha) * tensor_inner(space.kernel, f, f, n).real
                norm_res = max(norm_res, abs(fock_norm_sq(space, F) - expected))
                vs.append(F)
            vectors[alpha] = vs
    ortho = 0.0
    for a1, a2 in itertools.combinations(vectors, 2):
        if sum(a1) != sum(a2):
            continue  # different degrees are orthogonal by grading
        n = sum(a1)
        for F in vectors[a1]:
            for G in vectors[a2]:
                ortho = max(ortho, abs(math.factorial(n) * tensor_inner(P, F, G, n)))
    dims = {}
    for n in range(N + 1):
        total = 0
        for alpha in multi_indices(basis.K, n):
            ks = chaos_slots(alpha)
            cols = []
            for idx in itertools.product(range(m), repeat=n):
                e = np.zeros((m,) * n)
                e[idx] = 1.0
                cols.append(symmetrize(P, lift_tensor(space, e, [basis.p(k) for k in ks])).ravel())
            A = np.array(cols).T if cols else np.zeros((1, 0))
            total += _rank(A.conj().T @ A) if A.shape[1] else 0
        S = symmetrizer_matrix(P, n) if n else np.ones((1, 1))
        dims[n] = (total, _rank(S))
    table = [
        {"k": k, "a": float(basis.a[k]) if k else None, "b": float(basis.b[k]), "C": float(basis.C[k])}
        for k in range(basis.K)
    ]
    return ChaosReport(
        basis.favard_residual(),
        basis.orthogonality_residual(),
        ortho,
        norm_res,
        dims,
        table,
    )
