"""Q-symmetrization of tensors over the grid.

A degree-n tensor is an ndarray of shape ``(m,) * n``; degree 0 is a 0-d
array.  Internal helpers also accept trailing batch axes beyond the first
``n``, which lets operators act on many vectors at once.

Permutations are 0-based image tuples: ``pi[i]`` is the image of ``i``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BadRoot, EnvelopeExceeded, IndexOutOfRange, NotSymmetric, RangeError
from .kernel import QKernel

SYM_TOL = 1e-10
MAX_DEGREE = 8
DIRECT_SUM_MAX_DEGREE = 6
MAX_ENTRIES = 1 << 22


def check_envelope(m: int, n: int) -> None:
    if n > MAX_DEGREE:
        raise EnvelopeExceeded(f"degree {n} exceeds the cap {MAX_DEGREE}")
    if m**n > MAX_ENTRIES:
        raise EnvelopeExceeded(f"{m}^{n} tensor entries exceed the dense envelope")


def _pair(Q: np.ndarray, n: int, i: int, j: int, extra: int = 0) -> np.ndarray:
    """``Q[t_i, t_j]`` broadcast over an n-slot tensor (i != j)."""
    m = Q.shape[0]
    mat = Q if i < j else Q.T
    shape = [1] * (n + extra)
    shape[min(i, j)] = m
    shape[max(i, j)] = m
    return mat.reshape(shape)


@lru_cache(maxsize=None)
def _inversions(pi: tuple) -> tuple:
    n = len(pi)
    return tuple((i, j) for i in range(n) for j in range(i + 1, n) if pi[i] > pi[j])


def inversion_count(pi) -> int:
    return len(_inversions(tuple(pi)))


def _coeff_tensor(Q: np.ndarray, pi: tuple, extra: int = 0) -> np.ndarray | complex:
    n = len(pi)
    out = np.ones((1,) * (n + extra), dtype=complex)
    for i, j in _inversions(pi):
        out = out * _pair(Q, n, i, j, extra)
    return out


def q_coeff(k: QKernel, pi, idx) -> complex:
    """Product of ``Q(t_i, t_j)`` over the inversion pairs of ``pi``."""
    pi = tuple(pi)
    if len(idx) != len(pi):
        raise IndexOutOfRange("index tuple and permutation differ in length")
    if sorted(pi) != list(range(len(pi))):
        raise ValueError(f"{pi} is not a permutation of 0..{len(pi) - 1}")
    out = 1.0 + 0j
    for i, j in _inversions(pi):
        out *= k.matrix[idx[i], idx[j]]
    return out


def psi(k: QKernel, j: int, f: np.ndarray, n: int | None = None) -> np.ndarray:
    """Twisted transposition of slots ``j`` and ``j + 1`` (0-based)."""
    f = np.asarray(f)
    n = f.ndim if n is None else n
    if not 0 <= j < n - 1:
        raise IndexOutOfRange(f"slot {j} is invalid for degree {n}")
    return _pair(k.matrix, n, j, j + 1, f.ndim - n) * np.swapaxes(f, j, j + 1)


def symmetry_defect(k: QKernel, f: np.ndarray, n: int | None = None, slots=None) -> float:
    """Max entry of ``psi_j f - f`` over adjacent slot pairs (default: all)."""
    f = np.asarray(f)
    n = f.ndim if n is None else n
    slots = range(n - 1) if slots is None else slots
    defect = 0.0
    for j in slots:
        defect = max(defect, float(np.max(np.abs(psi(k, j, f, n) - f), initial=0.0)))
    return defect


def _prefix(Q: np.ndarray, n: int, kslot: int, extra: int = 0):
    """``Q(t_0, t_k) Q(t_1, t_k) ... Q(t_{k-1}, t_k)`` over n slots."""
    out = np.ones((1,) * (n + extra), dtype=complex)
    for l in range(kslot):
        out = out * _pair(Q, n, l, kslot, extra)
    return out


def _symmetrize_direct(Q: np.ndarray, f: np.ndarray, n: int) -> np.ndarray:
    extra = f.ndim - n
    tail = tuple(range(n, n + extra))
    out = np.zeros(f.shape, dtype=complex)
    for pi in itertools.permutations(range(n)):
        out += _coeff_tensor(Q, pi, extra) * np.transpose(f, pi + tail)
    return out / math.factorial(n)


def _join(Q: np.ndarray, g: np.ndarray, n: int) -> np.ndarray:
    """Apply ``(1/n) sum_k Psi_{k-1}...Psi_1`` to g (n slots, any tail)."""
    extra = g.ndim - n
    out = g.astype(complex)
    for kslot in range(1, n):
        out = out + _prefix(Q, n, kslot, extra) * np.moveaxis(g, 0, kslot)
    return out / n


def _symmetrize_recursive(Q: np.ndarray, f: np.ndarray, n: int) -> np.ndarray:
    if n <= 1:
        return f.astype(complex)
    # P_n = (1/n)(1 + Psi_1 + Psi_2 Psi_1 + ...)(1 (x) P_{n-1})
    inner = _symmetrize_recursive(Q, np.moveaxis(f, 0, -1), n - 1)
    return _join(Q, np.moveaxis(inner, -1, 0), n)


def symmetrize(k: QKernel, f: np.ndarray, n: int | None = None) -> np.ndarray:
    """Orthogonal projection P_n onto Q-symmetric tensors."""
    f = np.asarray(f)
    n = f.ndim if n is None else n
    check_envelope(k.m, n)
    if n <= 1:
        return f.astype(complex)
    if n <= DIRECT_SUM_MAX_DEGREE:
        return _symmetrize_direct(k.matrix, f, n)
    return _symmetrize_recursive(k.matrix, f, n)


def symmetrize_recursive(k: QKernel, h: np.ndarray, f: np.ndarray, check: bool = True) -> np.ndarray:
    """``h ⊛ f`` for a Q-symmetric f via the (n+1)-term prefix-product sum."""
    f = np.asarray(f)
    h = np.asarray(h)
    n = f.ndim
    check_envelope(k.m, n + 1)
    if check and n >= 2 and symmetry_defect(k, f) > SYM_TOL:
        raise NotSymmetric("the right factor is not Q-symmetric")
    return create_tensor(k.matrix, h, f, n)


def create_tensor(Q: np.ndarray, h: np.ndarray, f: np.ndarray, n: int) -> np.ndarray:
    """``h ⊛ f`` for Q-symmetric f with n slots and any trailing batch axes."""
    return _join(Q, np.multiply.outer(h, f), n + 1)


def tensor(*factors) -> np.ndarray:
    """Plain tensor product of the given tensors."""
    out = np.asarray(1.0 + 0j)
    for fac in factors:
        out = np.multiply.outer(out, np.asarray(fac))
    return out


def q_product(k: QKernel, *factors) -> np.ndarray:
    """Q-symmetric tensor product of any number of tensors."""
    t = tensor(*factors)
    return symmetrize(k, t)


def q_number(q: complex, n: int) -> complex:
    return complex(sum(q**i for i in range(n)))


def q_factorial(q: complex, n: int) -> complex:
    out = 1.0 + 0j
    for i in range(1, n + 1):
        out *= q_number(q, i)
    return out


def increasing_mask(m: int, n: int) -> np.ndarray:
    """Boolean mask of strictly increasing index tuples."""
    if n <= 1:
        return np.ones((m,) * n, dtype=bool)
    grids = np.indices((m,) * n)
    return np.all(np.diff(grids, axis=0) > 0, axis=0)


def q_power(k: QKernel, f: np.ndarray, n: int) -> np.ndarray:
    """``f ⊛ f ⊛ ... ⊛ f`` (n factors); degree 0 gives the unit."""
    out = np.asarray(1.0 + 0j)
    for deg in range(n):
        out = create_tensor(k.matrix, f, out, deg)
    return out


@dataclass(frozen=True)
class ExclusionReport:
    q: complex
    N: int
    residual: float
    closed_form_residual: float
    note: str = "evaluated on strictly increasing index tuples only"

    @property
    def ok(self) -> bool:
        return max(self.residual, self.closed_form_residual) <= SYM_TOL


def check_exclusion(k: QKernel, f: np.ndarray, N: int) -> ExclusionReport:
    """``f^{⊛N}`` off the diagonal, and the closed form for ``n <= N``."""
    if k.q is None:
        raise BadRoot("exclusion needs an anyonic kernel")
    q = k.q
    if abs(q - 1) <= SYM_TOL or abs(q**N - 1) > SYM_TOL:
        raise BadRoot(f"q = {q} is not a nontrivial {N}-th root of unity")
    if k.m < N:
        raise RangeError(f"need at least {N} sites, grid has {k.m}")
    f = np.asarray(f, dtype=complex)
    power = np.asarray(1.0 + 0j)
    closed = 0.0
    for n in range(1, N + 1):
        power = create_tensor(k.matrix, f, power, n - 1)
        mask = increasing_mask(k.m, n)
        expected = q_factorial(q, n) / math.factorial(n) * tensor(*([f] * n))
        closed = max(closed, float(np.max(np.abs(power - expected)[mask])))
    residual = float(np.max(np.abs(power)[increasing_mask(k.m, N)]))
    return ExclusionReport(q=q, N=N, residual=residual, closed_form_residual=closed)


def exclusion_remark_witness(k: QKernel, f: np.ndarray, g: np.ndarray) -> tuple[float, float]:
    """Off-diagonal maxima of ``f⊛g⊛f⊛f`` and ``g⊛f⊛f⊛f``.

    For q a primitive cube root of unity the second vanishes while the
    first generally does not.
    """
    mask = increasing_mask(k.m, 4)
    fgff = q_product(k, f, g, f, f)
    gfff = create_tensor(k.matrix, g, q_power(k, f, 3), 3)
    return float(np.max(np.abs(fgff)[mask])), float(np.max(np.abs(gfff)[mask]))


def symmetrizer_matrix(k: QKernel, n: int) -> np.ndarray:
    """Dense ``m^n x m^n`` matrix of P_n acting on flattened tensors."""
    check_envelope(k.m, n)
    m = k.m
    size = m**n
    eye = np.eye(size, dtype=complex).reshape((m,) * n + (size,))
    return symmetrize(k, eye, n).reshape(size, size)


def symmetric_basis(k: QKernel, n: int) -> np.ndarray:
    """Columns ``P_n e_idx`` for nondecreasing idx: a basis of the range of P_n.

    Returned with shape ``(m,) * n + (count,)``.
    """
    m = k.m
    check_envelope(m, n)
    tuples = list(itertools.combinations_with_replacement(range(m), n))
    basis = np.zeros((m,) * n + (len(tuples),), dtype=complex)
    for col, idx in enumerate(tuples):
        basis[idx + (col,)] = 1.0
    return symmetrize(k, basis, n)


def _weighted_inner(k: QKernel, f: np.ndarray, g: np.ndarray) -> complex:
    w = np.asarray(1.0)
    for _ in range(np.ndim(f)):
        w = np.multiply.outer(w, k.weights)
    return complex(np.sum(f * np.conj(g) * w))


def _block_symmetrize(k: QKernel, f: np.ndarray, a: int) -> np.ndarray:
    """``(P_a (x) P_b) f`` for a degree ``a + b`` tensor."""
    n = f.ndim
    head = symmetrize(k, f, a)  # trailing slots ride along as a batch
    tail = np.moveaxis(head, list(range(a)), list(range(n - a, n)))
    tail = symmetrize(k, tail, n - a)
    return np.moveaxis(tail, list(range(n - a, n)), list(range(a)))


@dataclass(frozen=True)
class ProjectionReport:
    n: int
    idempotency: float
    self_adjointness: float
    psi_unitarity: float
    psi_involution: float
    yang_baxter: float
    factorization: float
    route_agreement: float

    @property
    def residual(self) -> float:
        return max(
            self.idempotency,
            self.self_adjointness,
            self.psi_unitarity,
            self.psi_involution,
            self.yang_baxter,
            self.factorization,
            self.route_agreement,
        )

    @property
    def ok(self) -> bool:
        return self.residual <= SYM_TOL


def projection_report(k: QKernel, n: int, rng: np.random.Generator, samples: int = 3) -> ProjectionReport:
    """Projection, Psi and factorization identities on random degree-n tensors."""
    check_envelope(k.m, n)
    if n < 1:
        raise RangeError("degree must be at least 1")
    shape = (k.m,) * n
    res = dict.fromkeys(
        ["idem", "adj", "unit", "inv", "yb", "fact", "route"], 0.0
    )

    def bump(key, value):
        res[key] = max(res[key], float(value))

    for _ in range(samples):
        f = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        g = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        Pf, Pg = symmetrize(k, f), symmetrize(k, g)
        bump("idem", np.max(np.abs(symmetrize(k, Pf) - Pf)))
        bump("adj", abs(_weighted_inner(k, Pf, g) - _weighted_inner(k, f, Pg)))
        bump("route", np.max(np.abs(_symmetrize_direct(k.matrix, f, n) - _symmetrize_recursive(k.matrix, f, n))))
        for j in range(n - 1):
            pf = psi(k, j, f)
            bump("unit", abs(_weighted_inner(k, pf, psi(k, j, g)) - _weighted_inner(k, f, g)))
            bump("inv", np.max(np.abs(psi(k, j, pf) - f)))
        for j in range(n - 2):
            lhs = psi(k, j, psi(k, j + 1, psi(k, j, f)))
            rhs = psi(k, j + 1, psi(k, j, psi(k, j + 1, f)))
            bump("yb", np.max(np.abs(lhs - rhs)))
        for a in range(1, n):
            bump("fact", np.max(np.abs(symmetrize(k, _block_symmetrize(k, f, a)) - Pf)))
    return ProjectionReport(
        n, res["idem"], res["adj"], res["unit"], res["inv"], res["yb"], res["fact"], res["route"]
    )
