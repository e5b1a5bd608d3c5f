"""The field ``w = d+ + lam d+ d + d``, its vacuum state and Wick calculus.

Test functions are smeared linearly: ``<f, w> = a+(f) + lam a0(f) + a-(conj f)``,
which is the usual field for real f and keeps word moments multilinear in
complex f.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CutoffTooSmall, WordTooLong
from .fock import (
    GradedOperator,
    GradedVector,
    annihilate,
    basis_components,
    create,
    identity,
    neutral,
    point_operators,
)
from .kernel import QKernel
from .partitions import MarkedPartition, enumerate_marked
from .symmetrize import SYM_TOL, symmetrize, tensor

WITNESS_TOL = 1e-6


@dataclass(frozen=True)
class FieldConfig:
    kernel: QKernel
    lam: float
    N: int

    def __post_init__(self):
        if self.N < 2:
            raise CutoffTooSmall("the field needs a cutoff of at least 2")

    @property
    def m(self) -> int:
        return self.kernel.m


def omega(cfg: FieldConfig, f: np.ndarray) -> GradedOperator:
    f = np.asarray(f, dtype=complex)
    k, N = cfg.kernel, cfg.N
    op = create(k, f, N) + annihilate(k, np.conj(f), N)
    if cfg.lam != 0:
        op = op + cfg.lam * neutral(k, f, N)
    return op


def point_field(cfg: FieldConfig, i: int) -> GradedOperator:
    """``w(t_i)``: the field smeared with the discrete delta at site i."""
    return omega(cfg, cfg.kernel.grid.delta(i))


def word_vector(cfg: FieldConfig, word: Sequence[np.ndarray]) -> GradedVector:
    """``<f_1,w> ... <f_n,w> Omega``, applying the rightmost factor first."""
    if len(word) > cfg.N:
        raise WordTooLong(f"word of length {len(word)} exceeds the cutoff {cfg.N}")
    v = GradedVector.vacuum(cfg.kernel, cfg.N)
    for f in reversed(word):
        v = omega(cfg, f)(v)
    return v


def vacuum_state(cfg: FieldConfig, word: Sequence[np.ndarray]) -> complex:
    return complex(word_vector(cfg, word).components[0])


def moment_tensors(ops: Sequence[GradedOperator], kernel: QKernel, N: int, n_max: int) -> dict:
    """Cell-mass moment tensors ``m_n[i_1..i_n] = tau(X_{i_1} ... X_{i_n})``.

    ``ops[i]`` is the operator smeared with the indicator of cell i.  Words
    are built level by level on a batch axis, rightmost factor first.
    """
    if n_max > N:
        raise WordTooLong(f"moments of order {n_max} need a cutoff of at least {n_max}")
    m = len(ops)
    comps = [np.zeros((kernel.m,) * n + (1,), dtype=complex) for n in range(N + 1)]
    comps[0][...] = 1.0
    out = {}
    for r in range(1, n_max + 1):
        # new batch index = i_1 * m^{r-1} + (old index), i_1 the new leftmost factor
        applied = [op.act(comps) for op in ops]
        comps = [np.concatenate([a[n] for a in applied], axis=-1) for n in range(N + 1)]
        out[r] = comps[0].reshape((m,) * r)
    return out


def field_moment_tensors(cfg: FieldConfig, n_max: int) -> dict:
    grid = cfg.kernel.grid
    ops = [omega(cfg, grid.indicator(i)) for i in range(cfg.m)]
    return moment_tensors(ops, cfg.kernel, cfg.N, n_max)


def wick_polynomial_vector(cfg: FieldConfig, f: np.ndarray) -> np.ndarray:
    """Fock image of ``<f, :w^n:>``: the Q-symmetrization of f."""
    f = np.asarray(f)
    if f.ndim > cfg.N:
        raise WordTooLong(f"degree {f.ndim} exceeds the cutoff {cfg.N}")
    return symmetrize(cfg.kernel, f)


def wick_recurrence_apply(cfg: FieldConfig, idx: Sequence[int]) -> GradedOperator:
    """``:w(t_1)...w(t_n):`` at grid sites, built by the three-term recurrence."""
    idx = tuple(idx)
    if len(idx) > cfg.N:
        raise WordTooLong(f"{len(idx)} points exceed the cutoff {cfg.N}")
    k, lam = cfg.kernel, cfg.lam
    Q, sigma = k.matrix, k.weights
    fields = {i: point_field(cfg, i) for i in set(idx)}

    def action(comps):
        memo: dict = {}

        def wick(pos: tuple):
            if pos in memo:
                return memo[pos]
            if not pos:
                res = [np.asarray(c, dtype=complex) for c in comps]
            else:
                first, rest = pos[0], pos[1:]
                s = idx[first]
                inner = wick(rest)
                res = fields[s].act(inner)
                hits = sum(1 for p in rest if idx[p] == s)
                if lam != 0 and hits:
                    c = lam * hits / sigma[s]
                    res = [a - c * b for a, b in zip(res, inner)]
                prefix = 1.0 + 0j
                for j, p in enumerate(rest):
                    if idx[p] == s:
                        sub = wick(rest[:j] + rest[j + 1 :])
                        c = prefix / sigma[s]
                        res = [a - c * b for a, b in zip(res, sub)]
                    prefix *= Q[s, idx[p]]
            memo[pos] = res
            return res

        return wick(tuple(range(len(idx))))

    return GradedOperator(k, cfg.N, action)


def _letters(lam: float) -> list[tuple[str, ...]]:
    """Expansion of one field into normal-ordered letter groups with weights."""
    out = [(("c",), 1.0), (("a",), 1.0)]
    if lam != 0:
        out.append((("c", "a"), lam))
    return out


def normal_order_product(cfg: FieldConfig, idx: Sequence[int]) -> GradedOperator:
    """Wick (normal) ordering of ``w(t_1)...w(t_n)``.

    Every word in creators and annihilators is reordered so creators stand
    left; each annihilator at position u moved past a creator at a later
    position v contributes ``Q(t_u, t_v)``.  With ``lam = 0`` this is the
    sum over ordered bipartitions (I, J) weighted by ``Q_{I,J}``.
    """
    idx = tuple(idx)
    k, N = cfg.kernel, cfg.N
    Q = k.matrix
    points = {i: point_operators(k, i, N) for i in set(idx)}
    total = None
    for choice in itertools.product(_letters(cfg.lam), repeat=len(idx)):
        weight = 1.0 + 0j
        seq = []
        for t, (letters, w) in zip(idx, choice):
            weight *= w
            seq.extend((letter, t) for letter in letters)
        for u, (lu, tu) in enumerate(seq):
            if lu != "a":
                continue
            for lv, tv in seq[u + 1 :]:
                if lv == "c":
                    weight *= Q[tu, tv]
        op = identity(k, N)
        for letter, t in [s for s in seq if s[0] == "c"] + [s for s in seq if s[0] == "a"]:
            op = op @ (points[t][0] if letter == "c" else points[t][1])
        term = weight * op
        total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class WickNormalReport:
    residual: float
    expected_equal: bool
    tolerance: float = SYM_TOL

    @property
    def ok(self) -> bool:
        if self.expected_equal:
            return self.residual <= self.tolerance
        return self.residual > WITNESS_TOL


def wick_equals_normal_expected(cfg: FieldConfig) -> bool:
    k = cfg.kernel
    return k.is_bosonic or (k.is_real and cfg.lam == 0)


def wick_vs_normal_report(cfg: FieldConfig, n: int = 3, triples=None) -> WickNormalReport:
    """Compare the recurrence and normal-ordered forms at all n-tuples of sites.

    Inputs live on degrees ``<= N - n`` so no truncation is seen.
    """
    k = cfg.kernel
    if cfg.N < n:
        raise CutoffTooSmall(f"need a cutoff of at least {n}")
    comps = basis_components(k, cfg.N, range(cfg.N - n + 1))
    tuples = itertools.product(range(k.m), repeat=n) if triples is None else triples
    res = 0.0
    for idx in tuples:
        a = wick_recurrence_apply(cfg, idx).act(comps)
        b = normal_order_product(cfg, idx).act(comps)
        res = max(res, max(float(np.max(np.abs(x - y), initial=0.0)) for x, y in zip(a, b)))
    return WickNormalReport(res, wick_equals_normal_expected(cfg))


def wick_term(cfg: FieldConfig, V: MarkedPartition, fs: Sequence[np.ndarray]) -> np.ndarray:
    """Fock vector of the marked-partition term of ``<f_1,w>...<f_n,w> Omega``.

    Blocks marked +1 keep one field (at their largest element) carrying the
    pointwise product of their functions times ``lam^(|B|-1)``; blocks marked
    -1 are integrated out with ``lam^(|B|-2)``.  The crossing coefficient
    ties -1 block sites to each other and to the surviving slots.
    """
    k = cfg.kernel
    lam = cfg.lam
    Q, sigma = k.matrix, k.weights
    fs = [np.asarray(f, dtype=complex) for f in fs]
    blocks = V.marked_blocks()
    plus = sorted((b for b, mk in blocks if mk == 1), key=lambda b: b[-1])
    minus = [b for b, mk in blocks if mk == -1]
    r = len(plus)
    out = np.zeros((k.m,) * r, dtype=complex)
    base_plus = [lam ** (len(b) - 1) * np.prod([fs[j] for j in b], axis=0) for b in plus]
    base_minus = [lam ** (len(b) - 2) * sigma * np.prod([fs[j] for j in b], axis=0) for b in minus]
    for sites in itertools.product(range(k.m), repeat=len(minus)):
        scalar = 1.0 + 0j
        for b, s, w in zip(minus, sites, base_minus):
            scalar *= w[s]
        for (b1, s1), (b2, s2) in itertools.product(zip(minus, sites), repeat=2):
            if b1[0] < b2[0] < b1[-1] < b2[-1]:
                scalar *= Q[s2, s1]
        if scalar == 0:
            continue
        slots = []
        for b, g in zip(plus, base_plus):
            g = g.copy()
            for b2, s2 in zip(minus, sites):
                if b2[0] < b[-1] < b2[-1]:
                    g = g * Q[s2, :]
            slots.append(g)
        out = out + scalar * tensor(*slots)
    return symmetrize(k, out)


@dataclass(frozen=True)
class WickRuleReport:
    terms: int
    residual: float
    tolerance: float = SYM_TOL

    @property
    def ok(self) -> bool:
        return self.residual <= self.tolerance


def wick_rule_expand(cfg: FieldConfig, fs: Sequence[np.ndarray]) -> tuple[list, WickRuleReport]:
    """All marked-partition terms and their agreement with the operator product."""
    n = len(fs)
    if n > 6:
        raise WordTooLong("the Wick rule expansion supports n <= 6")
    if n > cfg.N:
        raise WordTooLong(f"word of length {n} exceeds the cutoff {cfg.N}")
    terms = [(V, wick_term(cfg, V, fs)) for V in enumerate_marked(n)]
    summed = [np.zeros((cfg.m,) * d, dtype=complex) for d in range(cfg.N + 1)]
    for _, t in terms:
        summed[t.ndim] = summed[t.ndim] + t
    direct = word_vector(cfg, fs).components
    res = max(float(np.max(np.abs(a - b), initial=0.0)) for a, b in zip(summed, direct))
    return terms, WickRuleReport(len(terms), res)


def traciality_residual(
    cfg: FieldConfig, rng: np.random.Generator, trials: int = 20, max_len: int = 6
) -> float:
    """Max ``|tau(w1 w2) - tau(w2 w1)|`` over random real words of total length <= max_len."""
    if max_len > cfg.N:
        raise WordTooLong(f"words of length {max_len} exceed the cutoff {cfg.N}")
    worst = 0.0
    for _ in range(trials):
        total = int(rng.integers(2, max_len + 1))
        cut = int(rng.integers(1, total))
        fs = [rng.normal(size=cfg.m) for _ in range(total)]
        w1, w2 = fs[:cut], fs[cut:]
        worst = max(worst, abs(vacuum_state(cfg, w1 + w2) - vacuum_state(cfg, w2 + w1)))
    return worst


@dataclass(frozen=True)
class TracialityWitness:
    """The two word pairs that break traciality, and their predicted values."""

    five_word: complex
    five_rotated: complex
    four_word: complex
    four_rotated: complex
    expected_five: complex
    expected_five_rotated: complex
    expected_four: complex
    expected_four_rotated: complex

    @property
    def residual(self) -> float:
        return max(
            abs(self.five_word - self.expected_five),
            abs(self.five_rotated - self.expected_five_rotated),
            abs(self.four_word - self.expected_four),
            abs(self.four_rotated - self.expected_four_rotated),
        )

    @property
    def gap(self) -> float:
        """Largest violation of ``tau(p1 p2) = tau(p2 p1)`` among the two pairs."""
        return max(abs(self.five_word - self.five_rotated), abs(self.four_word - self.four_rotated))


def traciality_witness(cfg: FieldConfig, first, second) -> TracialityWitness:
    """Alternating indicator words on two disjoint cell sets.

    With ``f1 = f3 = f5 = chi_1`` and ``f2 = f4 = chi_2``, the 5-word gives
    ``lam s1 s2`` while its rotation gives ``lam`` times the Q-weighted mass
    with Q(t2, t1); the 4-words give the Q(t2, t1) and Q(t1, t2) integrals.
    """
    grid = cfg.kernel.grid
    first, second = list(np.atleast_1d(first)), list(np.atleast_1d(second))
    if set(first) & set(second):
        raise ValueError("the two cell sets must be disjoint")
    if cfg.N < 5:
        raise CutoffTooSmall("the witnesses need a cutoff of at least 5")
    c1, c2 = grid.indicator(first), grid.indicator(second)
    w1, w2 = c1 * cfg.kernel.weights, c2 * cfg.kernel.weights
    Q = cfg.kernel.matrix
    q21 = complex(w2 @ Q @ w1)  # int_{D1} int_{D2} Q(t2, t1)
    q12 = complex(w1 @ Q @ w2)
    s1, s2 = float(w1.sum()), float(w2.sum())
    lam = cfg.lam
    return TracialityWitness(
        five_word=vacuum_state(cfg, [c1, c2, c1, c2, c1]),
        five_rotated=vacuum_state(cfg, [c1, c1, c2, c1, c2]),
        four_word=vacuum_state(cfg, [c1, c2, c1, c2]),
        four_rotated=vacuum_state(cfg, [c2, c1, c2, c1]),
        expected_five=lam * s1 * s2,
        expected_five_rotated=lam * q21,
        expected_four=q21,
        expected_four_rotated=q12,
    )
