"""Set partitions, marked partitions, crossing coefficients and cumulants.

Elements of ``{0..n-1}`` are 0-based.  Blocks are sorted tuples listed by
their minimal element.  A measure on the n-fold grid is a tensor of cell
masses, so integrating ``f_1 x ... x f_n`` is ``sum(mass * f_1 ... f_n)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import RangeError
from .kernel import QKernel

MAX_PARTITION_SIZE = 8
MAX_MARKED_SIZE = 6


@dataclass(frozen=True)
class SetPartition:
    n: int
    blocks: tuple

    def __post_init__(self):
        elems = sorted(e for b in self.blocks for e in b)
        if elems != list(range(self.n)):
            raise ValueError(f"{self.blocks} is not a partition of 0..{self.n - 1}")
        canon = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0]))
        object.__setattr__(self, "blocks", canon)

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def is_full(self) -> bool:
        return len(self.blocks) == 1

    def crossing_pairs(self) -> list[tuple[tuple, tuple]]:
        """Ordered block pairs with ``min B1 < min B2 < max B1 < max B2``."""
        return crossing_pairs(self.blocks)


@dataclass(frozen=True)
class MarkedPartition:
    partition: SetPartition
    marks: tuple

    def __post_init__(self):
        if len(self.marks) != len(self.partition.blocks):
            raise ValueError("one mark per block is required")
        for b, mk in zip(self.partition.blocks, self.marks):
            if mk not in (1, -1):
                raise ValueError("marks are +1 or -1")
            if len(b) == 1 and mk != 1:
                raise ValueError("singleton blocks must be marked +1")

    @property
    def n(self) -> int:
        return self.partition.n

    def marked_blocks(self) -> list[tuple[tuple, int]]:
        return list(zip(self.partition.blocks, self.marks))


def crossing_pairs(blocks: Sequence[tuple]) -> list[tuple[tuple, tuple]]:
    out = []
    for b1 in blocks:
        for b2 in blocks:
            if b1[0] < b2[0] < b1[-1] < b2[-1]:
                out.append((b1, b2))
    return out


def _restricted_growth(n: int) -> Iterator[list[int]]:
    """Restricted growth strings of length n in lexicographic order."""
    if n == 0:
        yield []
        return
    a = [0] * n

    def rec(i: int, top: int):
        if i == n:
            yield list(a)
            return
        for v in range(top + 2):
            a[i] = v
            yield from rec(i + 1, max(top, v))

    a[0] = 0
    yield from rec(1, 0)


def enumerate_partitions(n: int, kind: str = "all") -> list[SetPartition]:
    """All partitions of n elements; ``kind`` is ``all``, ``min2`` or ``pair``."""
    if not 0 <= n <= MAX_PARTITION_SIZE:
        raise RangeError(f"partition size must be in 0..{MAX_PARTITION_SIZE}, got {n}")
    if kind not in ("all", "min2", "pair"):
        raise ValueError(f"unknown filter {kind!r}")
    out = []
    for rgs in _restricted_growth(n):
        nb = max(rgs) + 1 if rgs else 0
        blocks = [tuple(i for i in range(n) if rgs[i] == b) for b in range(nb)]
        sizes = [len(b) for b in blocks]
        if kind == "min2" and any(s < 2 for s in sizes):
            continue
        if kind == "pair" and any(s != 2 for s in sizes):
            continue
        out.append(SetPartition(n, tuple(blocks)))
    return out


def enumerate_marked(n: int) -> list[MarkedPartition]:
    """Marked partitions: each block of size >= 2 is marked +1 or -1."""
    if not 0 <= n <= MAX_MARKED_SIZE:
        raise RangeError(f"marked partition size must be in 0..{MAX_MARKED_SIZE}, got {n}")
    out = []
    for p in enumerate_partitions(n):
        choices = [(1, -1) if len(b) >= 2 else (1,) for b in p.blocks]
        for marks in itertools.product(*choices):
            out.append(MarkedPartition(p, tuple(marks)))
    return out


def crossing_coeff(k: QKernel, V: SetPartition, idx: Sequence[int]) -> complex:
    """Product of ``Q(t_{min B2}, t_{max B1})`` over crossing block pairs."""
    if len(idx) != V.n:
        raise ValueError("index tuple has the wrong length")
    out = 1.0 + 0j
    for b1, b2 in V.crossing_pairs():
        out *= k.matrix[idx[b2[0]], idx[b1[-1]]]
    return out


def marked_crossing_coeff(k: QKernel, V: MarkedPartition, idx: Sequence[int]) -> complex:
    """Crossings between two -1 blocks, and -1 blocks straddling the max of a +1 block."""
    if len(idx) != V.n:
        raise ValueError("index tuple has the wrong length")
    out = 1.0 + 0j
    for b1, m1 in V.marked_blocks():
        for b2, m2 in V.marked_blocks():
            if m2 != -1:
                continue
            if m1 == -1 and b1[0] < b2[0] < b1[-1] < b2[-1]:
                out *= k.matrix[idx[b2[0]], idx[b1[-1]]]
            elif m1 == 1 and b2[0] < b1[-1] < b2[-1]:
                out *= k.matrix[idx[b2[0]], idx[b1[-1]]]
    return out


def crossing_tensor(k: QKernel, V: SetPartition) -> np.ndarray:
    """``Q(V; t_1..t_n)`` as a degree-n tensor (broadcast shape)."""
    n = V.n
    m = k.m
    out = np.ones((1,) * n, dtype=complex)
    for b1, b2 in V.crossing_pairs():
        a, b = b2[0], b1[-1]
        shape = [1] * n
        shape[a] = m
        shape[b] = m
        out = out * k.matrix.reshape(shape)
    return out


def diagonal_measure(k: QKernel, size: int, scale: complex = 1.0) -> np.ndarray:
    """``scale * delta(dt_1 x ... x dt_size)``: mass ``sigma_i`` on cell ``(i, ..., i)``."""
    out = np.zeros((k.m,) * size, dtype=complex)
    for i in range(k.m):
        out[(i,) * size] = scale * k.weights[i]
    return out


def partition_product(V: SetPartition, block_tensors: Sequence[np.ndarray]) -> np.ndarray:
    """``prod_B c_B(dt_B)`` as a degree-n tensor; one tensor per block of V."""
    out = np.asarray(1.0 + 0j)
    order: list[int] = []
    for b, t in zip(V.blocks, block_tensors):
        out = np.multiply.outer(out, t)
        order.extend(b)
    return np.transpose(out, np.argsort(order))


def moment_formula(k: QKernel, lam: float, fs: Sequence[np.ndarray]) -> complex:
    """Partition-sum value of the vacuum moment of ``<f_1,w>...<f_n,w>``."""
    n = len(fs)
    if n > MAX_PARTITION_SIZE:
        raise RangeError(f"moment formula supports n <= {MAX_PARTITION_SIZE}")
    fs = [np.asarray(f, dtype=complex) for f in fs]
    total = 0.0 + 0j
    for V in enumerate_partitions(n, "min2"):
        nb = len(V.blocks)
        pos = {b: i for i, b in enumerate(V.blocks)}
        term = np.ones((1,) * nb, dtype=complex)
        for b in V.blocks:
            w = lam ** (len(b) - 2) * k.weights * np.prod([fs[j] for j in b], axis=0)
            shape = [1] * nb
            shape[pos[b]] = k.m
            term = term * w.reshape(shape)
        for b1, b2 in V.crossing_pairs():
            shape = [1] * nb
            shape[pos[b1]] = k.m
            shape[pos[b2]] = k.m
            # Q(s_{B2}, s_{B1}) on the site axes of the two blocks
            mat = k.matrix.T if pos[b1] < pos[b2] else k.matrix
            term = term * mat.reshape(shape)
        total += term.sum()
    return complex(total)


def _cumulant_expansion(k: QKernel, n: int, cumulants: dict, skip_full: bool) -> np.ndarray:
    out = np.zeros((k.m,) * n, dtype=complex)
    for V in enumerate_partitions(n):
        if skip_full and V.is_full:
            continue
        blocks = [cumulants[len(b)] for b in V.blocks]
        out = out + crossing_tensor(k, V) * partition_product(V, blocks)
    return out


def cumulants_from_moments(k: QKernel, moments: dict) -> dict:
    """Invert ``m_n = sum_V Q(V; .) prod_B c_|B|`` degree by degree.

    ``moments`` maps degree n (1..n_max) to a cell-mass tensor.
    """
    n_max = max(moments)
    if n_max > MAX_MARKED_SIZE:
        raise RangeError(f"cumulants supported for n <= {MAX_MARKED_SIZE}")
    c: dict = {}
    for n in range(1, n_max + 1):
        c[n] = np.asarray(moments[n], dtype=complex) - _cumulant_expansion(k, n, c, True)
    return c


def moments_from_cumulants(k: QKernel, cumulants: dict) -> dict:
    n_max = max(cumulants)
    if n_max > MAX_PARTITION_SIZE:
        raise RangeError(f"moments supported for n <= {MAX_PARTITION_SIZE}")
    return {n: _cumulant_expansion(k, n, cumulants, False) for n in range(1, n_max + 1)}


def mixed_cumulant(c_n: np.ndarray, fs: Sequence[np.ndarray]) -> complex:
    """``C_n(<f_1,.>, ..., <f_n,.>)``: contract the cumulant tensor with the f's."""
    out = np.asarray(c_n)
    for f in fs:
        out = np.tensordot(np.asarray(f), out, axes=(0, 0))
    return complex(out)


def independence_test(cumulants: dict, fs: Sequence[np.ndarray], depth: int) -> float:
    """Max mixed cumulant over all non-constant index sequences of length <= depth."""
    if depth > 5:
        raise RangeError("independence test depth is limited to 5")
    worst = 0.0
    for length in range(2, depth + 1):
        for seq in itertools.product(range(len(fs)), repeat=length):
            if len(set(seq)) == 1:
                continue
            val = mixed_cumulant(cumulants[length], [fs[j] for j in seq])
            worst = max(worst, abs(val))
    return worst
