"""Truncated Q-Fock space and its creation, annihilation and neutral operators.

A graded vector is a list of components, one per degree ``0..N``; the
degree-n component has shape ``(m,) * n`` followed by optional batch axes
shared by all components.  Operators are closures acting on such lists;
they truncate at the cutoff (creation on degree N gives 0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BosonCase, CutoffTooSmall
from .kernel import QKernel
from .symmetrize import (
    SYM_TOL,
    check_envelope,
    create_tensor,
    q_number,
    symmetric_basis,
    symmetrize,
    symmetry_defect,
)

Components = list


def _batch_shape(comps: Components) -> tuple:
    return np.shape(comps[0])


def weight_tensor(k: QKernel, n: int) -> np.ndarray:
    """``sigma_{i1} ... sigma_{in}`` as a degree-n tensor."""
    out = np.asarray(1.0)
    for _ in range(n):
        out = np.multiply.outer(out, k.weights)
    return out


def tensor_inner(k: QKernel, f: np.ndarray, g: np.ndarray, n: int | None = None) -> complex:
    """``<f, g>_n = sum f conj(g) prod sigma`` (linear in f)."""
    f = np.asarray(f)
    n = f.ndim if n is None else n
    return complex(np.sum(f * np.conj(g) * weight_tensor(k, n)))


@dataclass
class GradedVector:
    """Truncated Fock vector; ``components[n]`` has degree n."""

    kernel: QKernel
    components: list

    @property
    def cutoff(self) -> int:
        return len(self.components) - 1

    @classmethod
    def zero(cls, k: QKernel, N: int) -> "GradedVector":
        return cls(k, [np.zeros((k.m,) * n, dtype=complex) for n in range(N + 1)])

    @classmethod
    def vacuum(cls, k: QKernel, N: int) -> "GradedVector":
        v = cls.zero(k, N)
        v.components[0] = np.asarray(1.0 + 0j)
        return v

    @classmethod
    def from_tensor(cls, k: QKernel, f: np.ndarray, N: int) -> "GradedVector":
        v = cls.zero(k, N)
        f = np.asarray(f, dtype=complex)
        v.components[f.ndim] = f
        return v

    def __add__(self, other: "GradedVector") -> "GradedVector":
        return GradedVector(self.kernel, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "GradedVector") -> "GradedVector":
        return GradedVector(self.kernel, [a - b for a, b in zip(self.components, other.components)])

    def __rmul__(self, c) -> "GradedVector":
        return GradedVector(self.kernel, [c * a for a in self.components])

    def inner(self, other: "GradedVector") -> complex:
        return sum(
            math.factorial(n) * tensor_inner(self.kernel, a, b, n)
            for n, (a, b) in enumerate(zip(self.components, other.components))
        )

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self).real, 0.0))

    def symmetry_defect(self) -> float:
        return max(symmetry_defect(self.kernel, c) for c in self.components)

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(c), initial=0.0)) for c in self.components)


class GradedOperator:
    """Linear map on truncated Fock vectors, closed under + - scalar * and @."""

    def __init__(self, kernel: QKernel, N: int, action: Callable[[Components], Components]):
        self.kernel = kernel
        self.N = N
        self._action = action

    def act(self, comps: Components) -> Components:
        return self._action(comps)

    def __call__(self, v: GradedVector) -> GradedVector:
        return GradedVector(v.kernel, self._action(list(v.components)))

    def __matmul__(self, other: "GradedOperator") -> "GradedOperator":
        return GradedOperator(self.kernel, self.N, lambda c: self.act(other.act(c)))

    def __add__(self, other: "GradedOperator") -> "GradedOperator":
        return GradedOperator(
            self.kernel, self.N, lambda c: [a + b for a, b in zip(self.act(c), other.act(c))]
        )

    def __neg__(self) -> "GradedOperator":
        return (-1.0) * self

    def __sub__(self, other: "GradedOperator") -> "GradedOperator":
        return self + (-1.0) * other

    def __rmul__(self, c) -> "GradedOperator":
        return GradedOperator(self.kernel, self.N, lambda comps: [c * a for a in self.act(comps)])


def identity(k: QKernel, N: int) -> GradedOperator:
    return GradedOperator(k, N, lambda c: [np.asarray(a, dtype=complex) for a in c])


def create(k: QKernel, h: np.ndarray, N: int) -> GradedOperator:
    """``a+(h)``: degree n -> n+1, ``f -> h ⊛ f``; degree N is dropped."""
    if N < 1:
        raise CutoffTooSmall("creation needs a cutoff of at least 1")
    h = np.asarray(h, dtype=complex)
    Q = k.matrix

    def action(comps):
        out = [np.zeros_like(comps[0], dtype=complex)]
        for n in range(N):
            out.append(create_tensor(Q, h, comps[n], n))
        return out

    return GradedOperator(k, N, action)


def annihilate(k: QKernel, h: np.ndarray, N: int) -> GradedOperator:
    """``a-(h)``: degree n -> n-1, ``n sum_s conj(h(s)) f(s, ...) sigma_s``."""
    if N < 1:
        raise CutoffTooSmall("annihilation needs a cutoff of at least 1")
    hw = np.conj(np.asarray(h, dtype=complex)) * k.weights

    def action(comps):
        out = [n * np.tensordot(hw, comps[n], axes=(0, 0)) for n in range(1, N + 1)]
        out.append(np.zeros((k.m,) * N + _batch_shape(comps), dtype=complex))
        return out

    return GradedOperator(k, N, action)


def multiplier_sum(h: np.ndarray, n: int, extra: int = 0) -> np.ndarray:
    """``h(t_1) + ... + h(t_n)`` as a broadcastable degree-n tensor."""
    h = np.asarray(h)
    m = h.shape[0]
    out = np.zeros((1,) * (n + extra), dtype=h.dtype)
    for l in range(n):
        shape = [1] * (n + extra)
        shape[l] = m
        out = out + h.reshape(shape)
    return out


def neutral(k: QKernel, h: np.ndarray, N: int) -> GradedOperator:
    """``a0(h)``: multiply degree n by ``h(t_1) + ... + h(t_n)``."""
    h = np.asarray(h)

    def action(comps):
        extra = len(_batch_shape(comps))
        return [comps[n] * multiplier_sum(h, n, extra) for n in range(N + 1)]

    return GradedOperator(k, N, action)


def point_operators(k: QKernel, i: int, N: int) -> tuple[GradedOperator, GradedOperator]:
    """Creator and annihilator at site i, smeared with the discrete delta."""
    d = k.grid.delta(i)
    return create(k, d, N), annihilate(k, d, N)


def basis_components(k: QKernel, N: int, degrees: Sequence[int]) -> Components:
    """Batch of graded vectors spanning the Q-symmetric subspace on ``degrees``.

    The batch axis is last; each column is ``P_n e_idx`` for one
    nondecreasing multi-index at one degree.
    """
    blocks = [symmetric_basis(k, n) for n in degrees]
    total = sum(b.shape[-1] for b in blocks)
    comps = [np.zeros((k.m,) * n + (total,), dtype=complex) for n in range(N + 1)]
    col = 0
    for n, b in zip(degrees, blocks):
        comps[n][..., col : col + b.shape[-1]] = b
        col += b.shape[-1]
    return comps


def random_symmetric_components(
    k: QKernel, N: int, degrees: Sequence[int], count: int, rng: np.random.Generator
) -> Components:
    """``count`` random Q-symmetric graded vectors supported on ``degrees``."""
    comps = [np.zeros((k.m,) * n + (count,), dtype=complex) for n in range(N + 1)]
    for n in degrees:
        raw = rng.normal(size=(k.m,) * n + (count,)) + 1j * rng.normal(size=(k.m,) * n + (count,))
        comps[n] = symmetrize(k, raw, n)
    return comps


def gram(k: QKernel, left: Components, right: Components) -> np.ndarray:
    """Matrix of Fock inner products between batch columns (linear in left)."""
    out = 0
    for n, (a, b) in enumerate(zip(left, right)):
        w = weight_tensor(k, n)[..., None]
        a2 = (a * w).reshape(-1, a.shape[-1])
        b2 = b.reshape(-1, b.shape[-1])
        out = out + math.factorial(n) * (a2.T @ np.conj(b2))
    return out


def max_entry(comps: Components) -> float:
    return max(float(np.max(np.abs(c), initial=0.0)) for c in comps)


def _diff(a: Components, b: Components) -> float:
    return max(float(np.max(np.abs(x - y), initial=0.0)) for x, y in zip(a, b))


@dataclass(frozen=True)
class ResidualReport:
    residual: float
    tolerance: float
    guard: str

    @property
    def ok(self) -> bool:
        return self.residual <= self.tolerance


def check_adjointness(k: QKernel, h: np.ndarray, N: int) -> ResidualReport:
    """``<a+(h) F, G> = <F, a-(h) G>`` on Q-symmetric bases, degrees <= N-1 for F."""
    check_envelope(k.m, N)
    F = basis_components(k, N, range(N))
    G = basis_components(k, N, range(N + 1))
    lhs = gram(k, create(k, h, N).act(F), G)
    rhs = gram(k, F, annihilate(k, h, N).act(G))
    return ResidualReport(
        float(np.max(np.abs(lhs - rhs))), SYM_TOL, "F supported on degrees <= N-1"
    )


def check_ccr(k: QKernel, N: int, samples: int | None = None, rng=None) -> ResidualReport:
    """Residual of the three Q-commutation relations over all site pairs.

    Inputs live on degrees ``<= N-2``; with ``samples`` set, random
    Q-symmetric vectors replace the full basis (for large grids).
    """
    if N < 3:
        raise CutoffTooSmall("commutation relations need a cutoff of at least 3")
    check_envelope(k.m, N)
    degrees = range(N - 1)
    if samples is None:
        comps = basis_components(k, N, degrees)
    else:
        rng = np.random.default_rng(0) if rng is None else rng
        comps = random_symmetric_components(k, N, degrees, samples, rng)
    Q = k.matrix
    ops = [point_operators(k, i, N) for i in range(k.m)]
    cre = [c.act(comps) for c, _ in ops]
    ann = [a.act(comps) for _, a in ops]
    res = 0.0
    for i in range(k.m):
        ci, ai = ops[i]
        for j in range(k.m):
            cj, aj = ops[j]
            d = (1.0 / k.weights[i]) if i == j else 0.0
            lhs = ai.act(cre[j])
            rhs = [Q[i, j] * x + d * y for x, y in zip(cj.act(ann[i]), comps)]
            res = max(res, _diff(lhs, rhs))
            res = max(res, _diff(ai.act(ann[j]), [Q[j, i] * x for x in aj.act(ann[i])]))
            res = max(res, _diff(ci.act(cre[j]), [Q[j, i] * x for x in cj.act(cre[i])]))
    return ResidualReport(res, SYM_TOL, "inputs on degrees <= N-2")


def negdef_form(k: QKernel, f: np.ndarray) -> complex:
    """``sum Q(s,t) f(s) conj(f(t)) sigma(ds) sigma(dt)``.

    Diagonal cells contribute their continuum cell average ``cell_mean``,
    since the diagonal of sigma x sigma carries no mass.
    """
    f = np.asarray(f, dtype=complex)
    fw = f * k.weights
    Q = np.array(k.matrix)
    np.fill_diagonal(Q, k.cell_mean)
    return complex(fw @ Q @ np.conj(fw))


def negdef_test_vector(k: QKernel, first, second) -> np.ndarray:
    """``(b/a) conj(q) chi_first + chi_second`` with ``a, b`` the two masses."""
    if k.q is None:
        raise ValueError("the test vector needs an anyonic kernel")
    grid = k.grid
    a = float(grid.weights[list(np.atleast_1d(first))].sum())
    b = float(grid.weights[list(np.atleast_1d(second))].sum())
    return (b / a) * np.conj(k.q) * grid.indicator(first) + grid.indicator(second)


@dataclass(frozen=True)
class CreationNormReport:
    closed_form: float
    bound: float
    power_iteration: float
    argmax: int

    @property
    def agreement(self) -> float:
        return abs(self.closed_form - self.power_iteration)


def _mahonian(n: int) -> np.ndarray:
    """Number of permutations of n letters with each inversion count."""
    counts = np.array([1], dtype=object)
    for j in range(1, n + 1):
        new = np.zeros(counts.size + j - 1, dtype=object)
        for shift in range(j):
            new[shift : shift + counts.size] += counts
        counts = new
    return counts


def _shift_gram(q: complex, delta_mass: float, n_max: int) -> np.ndarray:
    """Gram diagonal ``||chi^{⊛n}||^2`` for n = 0..n_max of a cell of given mass.

    On a cell of the continuum every ordering of distinct points carries the
    same modulus ``|sum_pi q^{inv(pi)}| / n!``, counted by inversion numbers.
    """
    out = []
    vanished = False
    for n in range(n_max + 1):
        counts = _mahonian(n).astype(float)
        chamber = abs(np.sum(counts * q ** np.arange(counts.size)))
        # at a root of unity the sum cancels to rounding noise; once
        # chi^{⊛n} vanishes every higher power does too
        vanished = vanished or chamber <= 1e-10 * counts.sum()
        out.append(0.0 if vanished else delta_mass**n * chamber**2 / math.factorial(n))
    return np.array(out)


def _power_norm(gram_diag: np.ndarray, rng: np.random.Generator) -> float:
    """Operator norm of the shift ``chi^{⊛n} -> chi^{⊛(n+1)}`` by power iteration."""
    size = gram_diag.size
    shift = np.zeros((size, size))
    shift[1:, :-1] = np.eye(size - 1)
    root = np.sqrt(gram_diag)
    inv = np.where(root > 0, 1.0 / np.where(root > 0, root, 1.0), 0.0)
    t = root[:, None] * shift * inv[None, :]
    a = t.T @ t
    # repeated squaring runs 2**60 power steps in 60 products
    b = a / max(np.linalg.norm(a), 1e-300)
    for _ in range(60):
        b = b @ b
        nb = np.linalg.norm(b)
        if nb == 0:
            return 0.0
        b = b / nb
    v = b @ rng.normal(size=size)
    if np.linalg.norm(v) == 0:
        return 0.0
    v = v / np.linalg.norm(v)
    return math.sqrt(max(float(v @ a @ v), 0.0))


def restricted_creation_norm(
    q: complex, delta_mass: float, n_max: int, rng: np.random.Generator | None = None
) -> CreationNormReport:
    """Norm of ``a+(chi_Delta)`` on the span of ``Omega, chi, chi^{⊛2}, ...``."""
    q = complex(q)
    if abs(q - 1) <= 1e-12:
        raise BosonCase("for q = 1 the restricted creation operator is unbounded")
    if delta_mass <= 0 or n_max < 1:
        raise ValueError("need a positive mass and n_max >= 1")
    ratios = [abs(q_number(q, n)) / math.sqrt(n) for n in range(1, n_max + 1)]
    best = int(np.argmax(ratios))
    closed = ratios[best] * math.sqrt(delta_mass)
    bound = 2.0 / abs(1 - q) * math.sqrt(delta_mass)
    rng = np.random.default_rng(0) if rng is None else rng
    gram_diag = _shift_gram(q, delta_mass, n_max)
    return CreationNormReport(closed, bound, _power_norm(gram_diag, rng), best + 1)
