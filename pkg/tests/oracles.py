"""Slow, loop-based reference implementations used as independent oracles.

Nothing here shares code with the package beyond plain numpy.  The
symmetrizer is built from the twisted transpositions by closing them into a
group orbit, rather than from the inversion-pair product formula.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def brute_psi(Q: np.ndarray, j: int, f: np.ndarray) -> np.ndarray:
    """``(Psi_j f)(t) = Q(t_j, t_{j+1}) f(.., t_{j+1}, t_j, ..)`` by loops."""
    out = np.zeros(f.shape, dtype=complex)
    for idx in itertools.product(range(f.shape[0]), repeat=f.ndim):
        swapped = list(idx)
        swapped[j], swapped[j + 1] = swapped[j + 1], swapped[j]
        out[idx] = Q[idx[j], idx[j + 1]] * f[tuple(swapped)]
    return out


def brute_symmetrize(Q: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Average of ``Psi_pi f`` over the orbit generated by adjacent twists."""
    f = np.asarray(f, dtype=complex)
    n = f.ndim
    if n <= 1:
        return f.copy()
    start = tuple(range(n))
    seen = {start: f}
    frontier = [start]
    while frontier:
        nxt = []
        for perm in frontier:
            for j in range(n - 1):
                p = list(perm)
                p[j], p[j + 1] = p[j + 1], p[j]
                p = tuple(p)
                if p not in seen:
                    seen[p] = brute_psi(Q, j, seen[perm])
                    nxt.append(p)
        frontier = nxt
    assert len(seen) == math.factorial(n)
    return sum(seen.values()) / math.factorial(n)


def brute_inner(weights: np.ndarray, f: np.ndarray, g: np.ndarray) -> complex:
    total = 0.0 + 0j
    for idx in itertools.product(range(len(weights)), repeat=np.ndim(f)):
        total += f[idx] * np.conj(g[idx]) * np.prod([weights[i] for i in idx])
    return complex(total)


def brute_annihilate(weights: np.ndarray, h: np.ndarray, f: np.ndarray) -> np.ndarray:
    """``n sum_s conj(h(s)) f(s, t_2..t_n) sigma_s``."""
    n = f.ndim
    m = len(weights)
    out = np.zeros((m,) * (n - 1), dtype=complex)
    for idx in itertools.product(range(m), repeat=n - 1):
        out[idx] = n * sum(np.conj(h[s]) * f[(s,) + idx] * weights[s] for s in range(m))
    return out


def set_partitions(elems: list):
    """All set partitions of ``elems`` by inserting the first element."""
    if not elems:
        yield []
        return
    first, rest = elems[0], elems[1:]
    for p in set_partitions(rest):
        yield [[first]] + p
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1 :]


def double_factorial(n: int) -> int:
    return 1 if n <= 0 else n * double_factorial(n - 2)


def gram_schmidt(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Monic orthogonal polynomial values on the atoms by Gram-Schmidt of monomials."""
    K = len(x)
    out = []
    for k in range(K):
        v = x.astype(float) ** k
        for u in out:
            v = v - (np.sum(w * v * u) / np.sum(w * u * u)) * u
        out.append(v)
    return np.array(out)
