"""One test per acceptance criterion; each prints a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""
import cmath
import math
import time

import numpy as np

from qfock import (
    FieldConfig,
    JumpMeasure,
    SiteGrid,
    build_anyonic_kernel,
    build_levy_space,
    check_ccr,
    check_exclusion,
    chaos_orthogonality_report,
    cumulants_from_moments,
    cyclicity_rank,
    independence_test,
    moment_formula,
    negdef_form,
    omega,
    ortho_polys,
    random_kernel,
    restricted_creation_norm,
    symmetrize,
    symmetrize_recursive,
    vacuum_state,
    verify_levy_cumulants,
    wick_vs_normal_report,
    xi,
)
from qfock.field import field_moment_tensors, traciality_residual, traciality_witness
from qfock.fock import basis_components, negdef_test_vector
from qfock.levy import cyclicity_refinement_gap, pyramidal_trials
from qfock.partitions import diagonal_measure
from qfock.symmetrize import (
    _symmetrize_direct,
    _symmetrize_recursive,
    exclusion_remark_witness,
    projection_report,
    tensor,
)

from helpers import crandn, named_kernels, unit

TOL = 1e-10
WITNESS = 1e-6

SYMMETRIC = JumpMeasure([-1.0, 1.0], [0.5, 0.5])
ASYMMETRIC = JumpMeasure([-0.5, 0.4, 2.0], [0.3, 0.5, 0.2])


def report(number: int, ok: bool, detail: str) -> None:
    print(f"\ncriterion {number:2d} {'PASS' if ok else 'FAIL'}: {detail}")


def grid(m: int, rng=None) -> SiteGrid:
    weights = np.linspace(0.4, 1.2, m) if rng is None else rng.uniform(0.3, 1.5, size=m)
    return SiteGrid(np.arange(m, dtype=float), weights)


def test_criterion_01_projection_suite():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for m in range(1, 5):
        for _ in range(3):
            k = random_kernel(grid(m, rng), rng)
            for n in range(1, 5):
                worst = max(worst, projection_report(k, n, rng).residual)
    elapsed = time.perf_counter() - start
    ok = worst <= TOL and elapsed < 5.0
    report(1, ok, f"max residual {worst:.2e} (<= 1e-10), {elapsed:.2f} s (< 5 s)")
    assert worst <= TOL
    assert elapsed < 5.0


def test_criterion_02_route_equivalence():
    rng = np.random.default_rng(102)
    worst = 0.0
    for m in (2, 3):
        k = random_kernel(grid(m, rng), rng)
        for n in range(1, 6):
            f = crandn(rng, *(m,) * n)
            worst = max(worst, np.max(np.abs(_symmetrize_direct(k.matrix, f, n) - _symmetrize_recursive(k.matrix, f, n))))
            # h ⊛ (Q-symmetric rest) built by prefix products vs the full permutation sum
            h = crandn(rng, m)
            rest = symmetrize(k, crandn(rng, *(m,) * (n - 1)))
            worst = max(worst, np.max(np.abs(symmetrize_recursive(k, h, rest) - symmetrize(k, tensor(h, rest)))))
    report(2, worst <= TOL, f"max entrywise difference {worst:.2e} for n <= 5")
    assert worst <= TOL


def test_criterion_03_commutation_relations():
    kernels = named_kernels(3)
    residuals = {name: check_ccr(k, 5).residual for name, k in kernels.items()}
    worst = max(residuals.values())
    detail = ", ".join(f"{n} {r:.1e}" for n, r in residuals.items())
    report(3, worst <= TOL, f"{detail} (inputs on degrees <= 3, cutoff 5)")
    assert worst <= TOL


def test_criterion_04_anyon_exclusion():
    rng = np.random.default_rng(104)
    worst = 0.0
    for N in (2, 3, 4, 5):
        q = cmath.exp(2j * math.pi / N)
        r = check_exclusion(build_anyonic_kernel(grid(5), q), crandn(rng, 5), N)
        worst = max(worst, r.residual, r.closed_form_residual)
    k3 = build_anyonic_kernel(grid(4), cmath.exp(2j * math.pi / 3))
    fgff, gfff = exclusion_remark_witness(k3, crandn(rng, 4), crandn(rng, 4))
    ok = worst <= TOL and fgff > WITNESS
    report(4, ok, f"power/closed-form residual {worst:.2e}; f⊛g⊛f⊛f witness {fgff:.3f} (g⊛f⊛f⊛f {gfff:.1e})")
    assert worst <= TOL
    assert fgff > WITNESS


def test_criterion_05_moment_oracle():
    rng = np.random.default_rng(105)
    start = time.perf_counter()
    worst = 0.0
    for lam in (0.0, 1.0, 0.7):
        k = build_anyonic_kernel(grid(3), unit(rng.uniform(0, 2 * math.pi)))
        cfg = FieldConfig(k, lam, 6)
        for n in range(1, 7):
            for _ in range(2):
                fs = [rng.normal(size=3) for _ in range(n)]
                worst = max(worst, abs(vacuum_state(cfg, fs) - moment_formula(k, lam, fs)))
    elapsed = time.perf_counter() - start
    ok = worst <= TOL and elapsed < 30.0
    report(5, ok, f"max |operator - partition sum| {worst:.2e}, {elapsed:.2f} s (< 30 s)")
    assert worst <= TOL
    assert elapsed < 30.0


def test_criterion_06_wick_vs_normal():
    rng = np.random.default_rng(106)
    kernels = named_kernels(3)
    real = [kernels["boson"], kernels["fermion"], kernels["window"], random_kernel(grid(3, rng), rng, real=True)]
    equal = 0.0
    for k in real:
        for n in range(1, 5):
            equal = max(equal, wick_vs_normal_report(FieldConfig(k, 0.0, 5), n).residual)
    gauss = wick_vs_normal_report(FieldConfig(build_anyonic_kernel(grid(3), 1j), 0.0, 5), 3).residual
    poisson = wick_vs_normal_report(FieldConfig(kernels["window"], 1.0, 5), 3).residual
    ok = equal <= TOL and gauss > WITNESS and poisson > WITNESS
    report(6, ok, f"real Q, lambda 0: {equal:.1e}; witnesses q = i: {gauss:.3f}, lambda 1 window: {poisson:.3f}")
    assert equal <= TOL
    assert gauss > WITNESS and poisson > WITNESS


def test_criterion_07_negative_semidefinite_value():
    rng = np.random.default_rng(107)
    worst = 0.0
    dichotomy = True
    thetas = np.concatenate([[math.pi, 0.0], rng.uniform(0, 2 * math.pi, size=30)])
    for theta in thetas:
        q = -1.0 if theta == math.pi else unit(theta)
        a, b = rng.uniform(0.2, 2.0, size=2)
        k = build_anyonic_kernel(SiteGrid([0.0, 1.0], [a, b]), q)
        val = negdef_form(k, negdef_test_vector(k, 0, 1))
        worst = max(worst, abs(val - 2 * b**2 * (q.real + 1)) / max(1.0, b**2))
        # nonpositive on every sampled vector exactly when q = -1
        samples = [negdef_form(k, crandn(rng, 2)).real for _ in range(20)] + [val.real]
        nonpositive = max(samples) <= TOL
        dichotomy &= nonpositive == (q == -1.0)
    ok = worst <= TOL and dichotomy
    report(7, ok, f"test-vector value residual {worst:.2e}; nonpositive iff q = -1: {dichotomy}")
    assert worst <= TOL
    assert dichotomy


def test_criterion_08_restricted_creation_norm():
    rng = np.random.default_rng(108)
    worst = 0.0
    within = True
    qs = [-1.0, 1j, cmath.exp(2j * math.pi / 3)] + [unit(t) for t in rng.uniform(0.05, 2 * math.pi - 0.05, size=20)]
    for q in qs:
        r = restricted_creation_norm(q, float(rng.uniform(0.2, 3.0)), 12, rng)
        worst = max(worst, r.agreement)
        within &= r.closed_form <= r.bound + 1e-12
    ok = worst <= 1e-8 and within
    report(8, ok, f"closed form vs power iteration {worst:.2e} (<= 1e-8); below 2/|1-q| bound: {within}")
    assert worst <= 1e-8
    assert within


def test_criterion_09_field_cumulants():
    worst = 0.0
    indep = 0.0
    for lam in (0.0, 1.0, 0.7):
        k = build_anyonic_kernel(grid(3), unit(1.1))
        c = cumulants_from_moments(k, field_moment_tensors(FieldConfig(k, lam, 5), 5))
        worst = max(worst, np.max(np.abs(c[1])))
        for n in range(2, 6):
            scale = lam ** (n - 2) if n > 2 else 1.0
            worst = max(worst, np.max(np.abs(c[n] - diagonal_measure(k, n, scale))))
        fs = [k.grid.indicator(0) * 0.7, np.array([0.0, 1.3, -0.4])]
        indep = max(indep, independence_test(c, fs, 5))
    ok = worst <= TOL and indep <= TOL
    report(9, ok, f"cumulant residual {worst:.2e}; max mixed cumulant on disjoint supports {indep:.2e}")
    assert worst <= TOL
    assert indep <= TOL


def test_criterion_10_levy_identification():
    k = build_anyonic_kernel(grid(2), unit(2.2))
    worst = 0.0
    for nu in (JumpMeasure.point(0.7), SYMMETRIC, ASYMMETRIC):
        _, r = verify_levy_cumulants(build_levy_space(k, nu), 5, 5)
        worst = max(worst, r.cumulant_residual, r.levy_measure_residual)
    k3 = build_anyonic_kernel(grid(3), unit(0.8))
    space = build_levy_space(k3, JumpMeasure.point(0.6))
    F = basis_components(k3, 4, range(4))
    f = np.array([0.3, -1.0, 2.0])
    a = xi(space, f, 4).act(F)
    b = omega(FieldConfig(k3, 0.6, 4), f).act(F)
    degenerate = max(float(np.max(np.abs(x - y))) for x, y in zip(a, b))
    # one atom: the product grid is the base grid bit for bit
    same_space = np.array_equal(space.product.matrix, k3.matrix) and np.array_equal(space.product.weights, k3.weights)
    ok = worst <= TOL and same_space and degenerate <= TOL
    report(
        10,
        ok,
        f"cumulant and Levy-moment residual {worst:.2e}; K = 1 space identical: {same_space}, "
        f"operator difference {degenerate:.1e}",
    )
    assert worst <= TOL
    assert same_space
    assert degenerate <= TOL


def test_criterion_11_pyramidal_independence():
    rng = np.random.default_rng(111)
    k = build_anyonic_kernel(grid(3), unit(0.7))
    worst = 0.0
    for nu in (SYMMETRIC, ASYMMETRIC):
        worst = max(worst, pyramidal_trials(build_levy_space(k, nu), rng, 50, 5, 5))
    report(11, worst <= TOL, f"max factorization residual {worst:.2e} over 100 configurations")
    assert worst <= TOL


def test_criterion_12_cyclicity():
    space = build_levy_space(build_anyonic_kernel(grid(2), unit(0.8)), SYMMETRIC)
    achieved, target = cyclicity_rank(space, 3)
    gaps = [cyclicity_refinement_gap(-1.0, SYMMETRIC, r) for r in (1, 4, 16)]
    ok = achieved == target
    report(
        12,
        ok,
        f"word-image rank {achieved} vs target dimension {target} (m = 2, K = 2, L = 3); "
        f"distance of chi (x) x to words of length 2 under refinement: "
        + ", ".join(f"{g:.3f}" for g in gaps),
    )
    assert achieved == target


def test_criterion_13_chaos_suite():
    rng = np.random.default_rng(113)
    start = time.perf_counter()
    worst = 0.0
    dims_ok = True
    cases = [
        (3, JumpMeasure.point(0.5)),
        (3, SYMMETRIC),
        (3, ASYMMETRIC),
        (2, JumpMeasure([0.0, 1.0, 3.0], [0.2, 0.5, 0.3])),
    ]
    for m, nu in cases:
        k = build_anyonic_kernel(grid(m), unit(rng.uniform(0, 2 * math.pi)))
        r = chaos_orthogonality_report(build_levy_space(k, nu), ortho_polys(nu), 3, rng)
        worst = max(worst, r.favard_residual, r.polynomial_orthogonality, r.chaos_orthogonality, r.norm_residual)
        dims_ok &= r.dimensions_ok
    elapsed = time.perf_counter() - start
    ok = worst <= TOL and dims_ok and elapsed < 60.0
    report(13, ok, f"max residual {worst:.2e}; dimension counts exact: {dims_ok}; {elapsed:.2f} s (< 60 s)")
    assert worst <= TOL
    assert dims_ok
    assert elapsed < 60.0


def test_criterion_14_traciality():
    rng = np.random.default_rng(114)
    kernels = named_kernels(3)
    tracial = 0.0
    for k in (kernels["boson"], kernels["fermion"], kernels["window"], random_kernel(grid(3, rng), rng, real=True)):
        tracial = max(tracial, traciality_residual(FieldConfig(k, 0.0, 6), rng, trials=20, max_len=6))
    lam = 0.9
    k = build_anyonic_kernel(grid(3), unit(1.3))
    w = traciality_witness(FieldConfig(k, lam, 5), 0, 2)
    five = lam * k.weights[0] * k.weights[2]
    ok = tracial <= TOL and w.residual <= TOL and abs(w.five_word - five) <= TOL and w.gap > WITNESS
    report(
        14,
        ok,
        f"real Q words commute to {tracial:.1e}; anyonic witness values off by {w.residual:.1e}, "
        f"5-word {w.five_word.real:.4f} = lambda s1 s2, rotation gap {w.gap:.3f}",
    )
    assert tracial <= TOL
    assert w.residual <= TOL
    assert abs(w.five_word - five) <= TOL
    assert w.gap > WITNESS
