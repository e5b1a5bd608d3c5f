"""Command-line front end: run verification suites from a JSON config.

    qfock verify|moments|cumulants|wick|levy|chaos|exclusion --config run.json
          [--seed N] [--out json|csv]

Exit codes: 0 all checks pass, 1 a residual check failed, 2 bad config or
arguments, 3 envelope exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .chaos import chaos_orthogonality_report, multi_indices, ortho_polys
from .errors import ConfigError, EnvelopeExceeded, QFockError
from .field import (
    WITNESS_TOL,
    FieldConfig,
    field_moment_tensors,
    traciality_residual,
    traciality_witness,
    vacuum_state,
    wick_equals_normal_expected,
    wick_rule_expand,
    wick_vs_normal_report,
)
from .fock import check_adjointness, check_ccr, restricted_creation_norm
from .kernel import (
    QKernel,
    SiteGrid,
    build_anyonic_kernel,
    build_explicit_kernel,
    build_window_kernel,
    validate_kernel,
)
from .levy import (
    JumpMeasure,
    LevySpace,
    build_levy_space,
    cyclicity_rank,
    pyramidal_trials,
    verify_levy_cumulants,
)
from .partitions import cumulants_from_moments, diagonal_measure, moment_formula
from .symmetrize import SYM_TOL, check_exclusion, projection_report

MAX_SITES = 6
MAX_CUTOFF = 6
MAX_ATOMS = 4
MAX_WORD = 6
# dense tensors handled by basis-wide checks stay below this many entries
WORK_ENTRIES = 4096

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_ENVELOPE = 0, 1, 2, 3


@dataclass
class RunConfig:
    kernel: QKernel
    lam: float
    N: int
    jumps: JumpMeasure | None = None
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    word: list | None = None
    f: np.ndarray | None = None
    trials: int = 20
    cyclicity_length: int = 2

    @property
    def m(self) -> int:
        return self.kernel.m

    def tol(self, name: str, kind: str = "identity") -> float:
        default = WITNESS_TOL if kind == "witness" else SYM_TOL
        return float(self.tolerances.get(name, self.tolerances.get(kind, default)))

    def levy_space(self) -> LevySpace:
        if self.jumps is None:
            raise ConfigError("this command needs a 'jumps' section")
        return build_levy_space(self.kernel, self.jumps)


# ---------------------------------------------------------------- config


def parse_complex(value) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"not a number: {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, dict) and set(value) <= {"re", "im"}:
        try:
            return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad complex number {value!r}") from exc
    raise ConfigError(f"not a number: {value!r}")


def encode_complex(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _vector(raw, m: int, what: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != m:
        raise ConfigError(f"{what} must be a list of {m} site values")
    return np.array([parse_complex(v) for v in raw])


def _parse_grid(raw) -> SiteGrid:
    if not isinstance(raw, dict):
        raise ConfigError("'grid' must be an object")
    try:
        if "uniform" in raw:
            u = raw["uniform"]
            m = int(u["m"])
            if m > MAX_SITES:
                raise EnvelopeExceeded(f"m = {m} exceeds the site limit {MAX_SITES}")
            return SiteGrid.uniform(m, float(u.get("spacing", 1.0)), float(u.get("weight", 1.0)))
        sites = [float(s) for s in raw["sites"]]
        if len(sites) > MAX_SITES:
            raise EnvelopeExceeded(f"m = {len(sites)} exceeds the site limit {MAX_SITES}")
        return SiteGrid(np.array(sites), np.array([float(w) for w in raw["weights"]]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, QFockError):
            raise
        raise ConfigError(f"bad grid: {exc}") from exc


def _parse_kernel(raw, grid: SiteGrid) -> QKernel:
    if not isinstance(raw, dict) or len(raw) != 1:
        raise ConfigError("'kernel' must have exactly one of anyonic, window, explicit")
    kind, body = next(iter(raw.items()))
    try:
        if kind == "anyonic":
            return build_anyonic_kernel(grid, parse_complex(body))
        if kind == "window":
            return build_window_kernel(grid, float(body["r"]))
        if kind == "explicit":
            rows = body["matrix"]
            if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
                raise ConfigError("explicit kernel matrix must be a list of rows")
            if len({len(r) for r in rows}) > 1:
                raise ConfigError("explicit kernel matrix rows differ in length")
            matrix = [[parse_complex(v) for v in row] for row in rows]
            return build_explicit_kernel(grid, matrix)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad kernel: {exc}") from exc
    except QFockError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown kernel type {kind!r}")


def _parse_jumps(raw) -> JumpMeasure:
    try:
        atoms = raw["atoms"]
        x = [float(a["x"]) for a in atoms]
        w = [float(a["w"]) for a in atoms]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad jump measure: {exc}") from exc
    if len(x) > MAX_ATOMS:
        raise EnvelopeExceeded(f"K = {len(x)} exceeds the atom limit {MAX_ATOMS}")
    try:
        return JumpMeasure(x, w)
    except ValueError as exc:
        raise ConfigError(f"bad jump measure: {exc}") from exc


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("grid", "kernel"):
        if key not in doc:
            raise ConfigError(f"missing '{key}'")
    grid = _parse_grid(doc["grid"])
    kernel = _parse_kernel(doc["kernel"], grid)
    try:
        lam = float(doc.get("lambda", 0.0))
        N = int(doc.get("cutoff", 4))
        seed = int(doc.get("seed", 0))
        trials = int(doc.get("trials", 20))
        cyc = int(doc.get("cyclicity_length", 2))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad scalar setting: {exc}") from exc
    if not 2 <= N:
        raise ConfigError("cutoff must be at least 2")
    if N > MAX_CUTOFF:
        raise EnvelopeExceeded(f"cutoff {N} exceeds the limit {MAX_CUTOFF}")
    if seed < 0 or seed >= 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    jumps = _parse_jumps(doc["jumps"]) if doc.get("jumps") is not None else None
    tolerances = doc.get("tolerances", {})
    if not isinstance(tolerances, dict):
        raise ConfigError("'tolerances' must be an object")
    word = None
    if doc.get("word") is not None:
        if not isinstance(doc["word"], list):
            raise ConfigError("'word' must be a list of site vectors")
        if len(doc["word"]) > MAX_WORD:
            raise EnvelopeExceeded(f"word length exceeds the limit {MAX_WORD}")
        word = [_vector(v, grid.m, "each word entry") for v in doc["word"]]
    f = _vector(doc["f"], grid.m, "'f'") if doc.get("f") is not None else None
    return RunConfig(kernel, lam, N, jumps, seed, tolerances, word, f, trials, cyc)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return parse_config(doc)


# ---------------------------------------------------------------- checks


def work_cutoff(m: int, N: int) -> int:
    """Largest degree <= N whose dense tensors fit the working budget."""
    n = N
    while n > 1 and m**n > WORK_ENTRIES:
        n -= 1
    return n


def _levy_order(space: LevySpace, n_max: int) -> int:
    # moment tensors carry m^n words of (mK)^n entries each
    n = n_max
    while n > 1 and (space.m * space.product.m) ** n > (1 << 22):
        n -= 1
    return n


def _result(name, residual, tolerance, passed, kind="identity", detail=None) -> dict:
    out = {
        "name": name,
        "kind": kind,
        "residual": float(residual),
        "tolerance": float(tolerance),
        "pass": bool(passed),
    }
    if detail:
        out["detail"] = detail
    return out


def _skipped(cfg: RunConfig, name: str, reason: str) -> dict:
    """A check the cutoff is too small to run: nothing compared, nothing failed."""
    return _result(name, 0.0, cfg.tol(name), True, "skipped", {"reason": reason})


def _identity(cfg: RunConfig, name: str, residual: float, detail=None) -> dict:
    tol = cfg.tol(name)
    return _result(name, residual, tol, residual <= tol, detail=detail)


def check_kernel(cfg: RunConfig, rng) -> dict:
    r = validate_kernel(cfg.kernel)
    res = max(r.hermitian_defect, r.modulus_defect, r.diagonal_defect)
    tol = float(cfg.tolerances.get("kernel_validity", 1e-12))
    return _result("kernel_validity", res, tol, res <= tol)


def check_projection(cfg: RunConfig, rng) -> dict:
    top = min(work_cutoff(cfg.m, cfg.N), 5)
    res = max(projection_report(cfg.kernel, n, rng).residual for n in range(1, top + 1))
    return _identity(cfg, "projection", res, {"max_degree": top})


def check_adjoint(cfg: RunConfig, rng) -> dict:
    N = work_cutoff(cfg.m, cfg.N)
    h = rng.normal(size=cfg.m) + 1j * rng.normal(size=cfg.m)
    return _identity(cfg, "adjointness", check_adjointness(cfg.kernel, h, N).residual, {"cutoff": N})


def check_commutation(cfg: RunConfig, rng) -> dict:
    N = max(work_cutoff(cfg.m, cfg.N), 3)
    N = min(N, cfg.N)
    if N < 3:
        return _skipped(cfg, "ccr", "the relations need a cutoff of at least 3")
    samples = None if cfg.m ** (N - 2) <= 64 else 8
    r = check_ccr(cfg.kernel, N, samples=samples, rng=rng)
    return _identity(cfg, "ccr", r.residual, {"cutoff": N, "sampled": samples is not None})


def root_order(q: complex, limit: int) -> int | None:
    """Smallest r in 2..limit with q^r = 1, if any."""
    if abs(q - 1) <= SYM_TOL:
        return None
    for r in range(2, limit + 1):
        if abs(q**r - 1) <= SYM_TOL:
            return r
    return None


def check_exclusion_suite(cfg: RunConfig, rng) -> dict:
    k = cfg.kernel
    order = root_order(k.q, min(k.m, MAX_CUTOFF))
    f = cfg.f if cfg.f is not None else rng.normal(size=k.m) + 1j * rng.normal(size=k.m)
    r = check_exclusion(k, f, order)
    return _identity(
        cfg, "exclusion", max(r.residual, r.closed_form_residual), {"order": order}
    )


def check_wick_normal(cfg: RunConfig, rng) -> dict:
    # degree-1 inputs are needed for the discrepancy to show at three points
    N = min(max(work_cutoff(cfg.m, cfg.N), 4), cfg.N)
    fc = FieldConfig(cfg.kernel, cfg.lam, N)
    need = 3 if wick_equals_normal_expected(fc) else 4
    if N < need:
        return _skipped(cfg, "wick_vs_normal", f"the three-point comparison needs a cutoff of at least {need} here")
    tuples = list(itertools.product(range(min(cfg.m, 3)), repeat=3))
    r = wick_vs_normal_report(fc, 3, tuples)
    if r.expected_equal:
        return _identity(cfg, "wick_vs_normal", r.residual)
    tol = cfg.tol("wick_vs_normal", "witness")
    return _result("wick_vs_normal", r.residual, tol, r.residual > tol, kind="witness")


def _random_word(cfg: RunConfig, rng, n: int) -> list:
    return [rng.normal(size=cfg.m) for _ in range(n)]


def check_moments(cfg: RunConfig, rng) -> dict:
    fc = FieldConfig(cfg.kernel, cfg.lam, cfg.N)
    res = 0.0
    for n in range(1, min(cfg.N, 5) + 1):
        fs = _random_word(cfg, rng, n)
        res = max(res, abs(vacuum_state(fc, fs) - moment_formula(cfg.kernel, cfg.lam, fs)))
    return _identity(cfg, "moment_oracle", res, {"max_length": min(cfg.N, 5)})


def field_cumulant_residual(cfg: RunConfig, n_max: int) -> tuple[dict, float]:
    fc = FieldConfig(cfg.kernel, cfg.lam, cfg.N)
    c = cumulants_from_moments(cfg.kernel, field_moment_tensors(fc, n_max))
    res = float(np.max(np.abs(c[1])))
    for n in range(2, n_max + 1):
        scale = cfg.lam ** (n - 2) if n > 2 else 1.0
        res = max(res, float(np.max(np.abs(c[n] - diagonal_measure(cfg.kernel, n, scale)))))
    return c, res


def _field_order(cfg: RunConfig) -> int:
    n = min(cfg.N, 5)
    while n > 1 and cfg.m ** (2 * n) > (1 << 22):
        n -= 1
    return n


def check_cumulants(cfg: RunConfig, rng) -> dict:
    n = _field_order(cfg)
    _, res = field_cumulant_residual(cfg, n)
    return _identity(cfg, "field_cumulants", res, {"max_order": n})


def _witness_cells(cfg: RunConfig) -> tuple[int, int] | None:
    Q = cfg.kernel.matrix
    best, pair = 0.0, None
    for i in range(cfg.m):
        for j in range(cfg.m):
            if i == j:
                continue
            score = abs(Q[j, i] - 1) if cfg.lam != 0 else abs(Q[j, i].imag)
            if score > best + 1e-12:
                best, pair = score, (i, j)
    return pair


def check_traciality(cfg: RunConfig, rng) -> dict:
    k = cfg.kernel
    fc = FieldConfig(k, cfg.lam, cfg.N)
    tracial = k.is_bosonic or (k.is_real and cfg.lam == 0)
    if tracial:
        res = traciality_residual(fc, rng, trials=10, max_len=min(cfg.N, 6))
        return _identity(cfg, "traciality", res)
    pair = _witness_cells(cfg)
    if pair is None or cfg.N < 5:
        reason = "no witness cells" if pair is None else "witness words need a cutoff of at least 5"
        return _skipped(cfg, "traciality", reason)
    w = traciality_witness(fc, pair[0], pair[1])
    tol = cfg.tol("traciality", "witness")
    ok = w.gap > tol and w.residual <= cfg.tol("identity")
    detail = {"cells": list(pair), "value_residual": w.residual}
    return _result("traciality", w.gap, tol, ok, "witness", detail)


def check_creation_norm(cfg: RunConfig, rng) -> dict:
    r = restricted_creation_norm(cfg.kernel.q, float(cfg.kernel.weights[0]), 12, rng)
    tol = float(cfg.tolerances.get("creation_norm", 1e-8))
    ok = r.agreement <= tol and r.closed_form <= r.bound + tol
    return _result("creation_norm", r.agreement, tol, ok, detail={"closed_form": r.closed_form})


def check_levy(cfg: RunConfig, rng) -> dict:
    space = cfg.levy_space()
    n = _levy_order(space, min(cfg.N, 5))
    _, r = verify_levy_cumulants(space, n, n)
    res = max(r.cumulant_residual, r.levy_measure_residual)
    return _identity(cfg, "levy_cumulants", res, {"max_order": n})


def _pyramid_length(space: LevySpace, N: int) -> int:
    n = min(N, 5)
    while n > 1 and space.product.m**n > (1 << 20):
        n -= 1
    return n


def check_pyramidal(cfg: RunConfig, rng) -> dict:
    space = cfg.levy_space()
    L = _pyramid_length(space, cfg.N)
    res = pyramidal_trials(space, rng, cfg.trials, L, L)
    return _identity(cfg, "pyramidal", res, {"trials": cfg.trials, "max_length": L})


def cyclicity_result(cfg: RunConfig, space: LevySpace) -> dict:
    L = min(cfg.cyclicity_length, cfg.N)
    achieved, target = cyclicity_rank(space, L)
    # ranks either match or not; the residual is the missing dimension count
    return _result(
        "cyclicity",
        target - achieved,
        0,
        achieved == target,
        detail={"length": L, "achieved": achieved, "target": target},
    )


def check_cyclicity(cfg: RunConfig, rng) -> dict:
    return cyclicity_result(cfg, cfg.levy_space())


def _chaos_degree(space: LevySpace, N: int) -> int:
    n = min(N, 3)
    while n > 1 and space.product.m ** (2 * n) > (1 << 22):
        n -= 1
    return n


def check_chaos(cfg: RunConfig, rng) -> dict:
    space = cfg.levy_space()
    n = _chaos_degree(space, cfg.N)
    r = chaos_orthogonality_report(space, ortho_polys(space.jumps), n, rng)
    res = max(r.favard_residual, r.polynomial_orthogonality, r.chaos_orthogonality, r.norm_residual)
    tol = cfg.tol("chaos")
    return _result(
        "chaos", res, tol, res <= tol and r.dimensions_ok, detail={"max_degree": n, "dimensions_ok": r.dimensions_ok}
    )


def verify_checks(cfg: RunConfig) -> list[tuple[str, Callable]]:
    k = cfg.kernel
    checks = [
        ("kernel_validity", check_kernel),
        ("projection", check_projection),
        ("adjointness", check_adjoint),
        ("ccr", check_commutation),
    ]
    if k.q is not None and root_order(k.q, min(k.m, MAX_CUTOFF)) is not None:
        checks.append(("exclusion", check_exclusion_suite))
    checks += [
        ("wick_vs_normal", check_wick_normal),
        ("moment_oracle", check_moments),
        ("field_cumulants", check_cumulants),
    ]
    if not k.is_bosonic:
        checks.append(("traciality", check_traciality))
    if k.q is not None and abs(k.q - 1) > SYM_TOL:
        checks.append(("creation_norm", check_creation_norm))
    if cfg.jumps is not None:
        checks.append(("levy_cumulants", check_levy))
        if cfg.m >= 2:
            checks.append(("pyramidal", check_pyramidal))
        checks.append(("cyclicity", check_cyclicity))
        checks.append(("chaos", check_chaos))
    return checks


def run_checks(cfg: RunConfig, checks, workers: int = 4) -> list[dict]:
    """Run independent checks in a thread pool; results keep the input order."""
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(checks))

    def run(item):
        (name, fn), ss = item
        try:
            return fn(cfg, np.random.default_rng(ss))
        except EnvelopeExceeded:
            raise
        except QFockError as exc:
            return _result(name, math.nan, cfg.tol(name), False, detail={"error": str(exc)})

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, zip(checks, seeds)))


# ---------------------------------------------------------------- commands


def _describe(cfg: RunConfig) -> dict:
    k = cfg.kernel
    out = {
        "m": k.m,
        "sites": k.grid.sites.tolist(),
        "weights": k.weights.tolist(),
        "lambda": cfg.lam,
        "cutoff": cfg.N,
        "seed": cfg.seed,
    }
    if k.q is not None:
        out["q"] = encode_complex(k.q)
    if cfg.jumps is not None:
        out["atoms"] = [{"x": float(x), "w": float(w)} for x, w in zip(cfg.jumps.x, cfg.jumps.w)]
    return out


@dataclass
class Outcome:
    payload: dict
    rows: list
    ok: bool = True


def cmd_verify(cfg: RunConfig) -> Outcome:
    results = run_checks(cfg, verify_checks(cfg))
    ok = all(r["pass"] for r in results)
    rows = [
        {k: r[k] for k in ("name", "kind", "residual", "tolerance", "pass")} for r in results
    ]
    return Outcome({"command": "verify", "config": _describe(cfg), "checks": results, "pass": ok}, rows, ok)


def _word(cfg: RunConfig, rng, length: int) -> list:
    if cfg.word is not None:
        if len(cfg.word) > cfg.N:
            raise ConfigError(f"word of length {len(cfg.word)} exceeds the cutoff {cfg.N}")
        return cfg.word
    return _random_word(cfg, rng, min(length, cfg.N))


def cmd_moments(cfg: RunConfig) -> Outcome:
    rng = np.random.default_rng(cfg.seed)
    fs = _word(cfg, rng, 4)
    fc = FieldConfig(cfg.kernel, cfg.lam, cfg.N)
    value = vacuum_state(fc, fs)
    oracle = moment_formula(cfg.kernel, cfg.lam, fs)
    res = abs(value - oracle)
    tol = cfg.tol("moment_oracle")
    payload = {
        "command": "moments",
        "config": _describe(cfg),
        "inputs": [[encode_complex(v) for v in f] for f in fs],
        "value_re": value.real,
        "value_im": value.imag,
        "residuals": {"moment_oracle": res},
        "pass": res <= tol,
    }
    rows = [{"value_re": value.real, "value_im": value.imag, "moment_oracle": res}]
    return Outcome(payload, rows, res <= tol)


def cmd_wick(cfg: RunConfig) -> Outcome:
    rng = np.random.default_rng(cfg.seed)
    fs = _word(cfg, rng, 4)
    fc = FieldConfig(cfg.kernel, cfg.lam, cfg.N)
    terms, report = wick_rule_expand(fc, fs)
    value = vacuum_state(fc, fs)
    listing = []
    for V, t in terms:
        listing.append(
            {
                "blocks": [list(b) for b in V.partition.blocks],
                "marks": list(V.marks),
                "degree": int(np.ndim(t)),
                "max_abs": float(np.max(np.abs(t), initial=0.0)),
            }
        )
    ok = report.ok
    payload = {
        "command": "wick",
        "config": _describe(cfg),
        "inputs": [[encode_complex(v) for v in f] for f in fs],
        "value_re": value.real,
        "value_im": value.imag,
        "residuals": {"wick_rule": report.residual},
        "terms": listing,
        "pass": ok,
    }
    rows = [
        {"blocks": json.dumps(t["blocks"]), "marks": json.dumps(t["marks"]), "degree": t["degree"], "max_abs": t["max_abs"]}
        for t in listing
    ]
    return Outcome(payload, rows, ok)


def sparse_cells(tensor: np.ndarray, tol: float = 1e-13) -> list[dict]:
    out = []
    for idx in zip(*np.nonzero(np.abs(tensor) > tol)):
        z = complex(tensor[idx])
        out.append({"indices": [int(i) for i in idx], "re": z.real, "im": z.imag})
    return out


def cmd_cumulants(cfg: RunConfig) -> Outcome:
    if cfg.jumps is not None:
        space = cfg.levy_space()
        n = _levy_order(space, min(cfg.N, 5))
        c, r = verify_levy_cumulants(space, n, n)
        res = max(r.cumulant_residual, r.levy_measure_residual)
        process = "levy"
    else:
        n = _field_order(cfg)
        c, res = field_cumulant_residual(cfg, n)
        process = "field"
    tol = cfg.tol("cumulants")
    degrees = [{"degree": d, "cells": sparse_cells(c[d])} for d in sorted(c)]
    payload = {
        "command": "cumulants",
        "config": _describe(cfg),
        "process": process,
        "cumulants": degrees,
        "residuals": {"closed_form": res},
        "pass": res <= tol,
    }
    rows = [
        {"degree": d["degree"], "indices": " ".join(map(str, cell["indices"])), "re": cell["re"], "im": cell["im"]}
        for d in degrees
        for cell in d["cells"]
    ]
    return Outcome(payload, rows, res <= tol)


def cmd_levy(cfg: RunConfig) -> Outcome:
    checks = [("levy_cumulants", check_levy), ("cyclicity", check_cyclicity)]
    if cfg.m >= 2:
        checks.insert(1, ("pyramidal", check_pyramidal))
    results = run_checks(cfg, checks)
    nu = cfg.jumps
    moments = [
        {"n": n, "levy_moment": nu.levy_moment(n), "cumulant_scale": nu.moment(n - 2)}
        for n in range(3, 6)
    ]
    ok = all(r["pass"] for r in results)
    payload = {
        "command": "levy",
        "config": _describe(cfg),
        "levy_measure": {"zero_weight": nu.zero_weight, "masses": nu.levy_masses.tolist(), "moments": moments},
        "checks": results,
        "pass": ok,
    }
    rows = [{k: r[k] for k in ("name", "kind", "residual", "tolerance", "pass")} for r in results]
    return Outcome(payload, rows, ok)


def cmd_chaos(cfg: RunConfig) -> Outcome:
    space = cfg.levy_space()
    basis = ortho_polys(space.jumps)
    n = _chaos_degree(space, cfg.N)
    r = chaos_orthogonality_report(space, basis, n, np.random.default_rng(cfg.seed))
    tol = cfg.tol("chaos")
    ok = r.ok if tol == SYM_TOL else (
        max(r.favard_residual, r.polynomial_orthogonality, r.chaos_orthogonality, r.norm_residual) <= tol
        and r.dimensions_ok
    )
    payload = {
        "command": "chaos",
        "config": _describe(cfg),
        "recurrence": r.table,
        "polynomial_gram": basis.gram().tolist(),
        "residuals": {
            "favard": r.favard_residual,
            "polynomial_orthogonality": r.polynomial_orthogonality,
            "chaos_orthogonality": r.chaos_orthogonality,
            "norm_identity": r.norm_residual,
        },
        "dimensions": [
            {"degree": d, "chaos_sum": a, "symmetric_rank": b, "indices": len(multi_indices(basis.K, d))}
            for d, (a, b) in sorted(r.dimensions.items())
        ],
        "pass": ok,
    }
    rows = [{"k": t["k"], "a": "" if t["a"] is None else t["a"], "b": t["b"], "C": t["C"]} for t in r.table]
    return Outcome(payload, rows, ok)


def cmd_exclusion(cfg: RunConfig) -> Outcome:
    k = cfg.kernel
    if k.q is None:
        raise ConfigError("exclusion needs an anyonic kernel")
    order = root_order(k.q, MAX_CUTOFF)
    if order is None:
        raise ConfigError(f"q = {k.q} is not a nontrivial root of unity of order <= {MAX_CUTOFF}")
    rng = np.random.default_rng(cfg.seed)
    f = cfg.f if cfg.f is not None else rng.normal(size=k.m) + 1j * rng.normal(size=k.m)
    r = check_exclusion(k, f, order)
    tol = cfg.tol("exclusion")
    ok = max(r.residual, r.closed_form_residual) <= tol
    payload = {
        "command": "exclusion",
        "config": _describe(cfg),
        "order": order,
        "f": [encode_complex(v) for v in f],
        "residuals": {"power_off_diagonal": r.residual, "closed_form": r.closed_form_residual},
        "note": r.note,
        "pass": ok,
    }
    rows = [{"order": order, "power_off_diagonal": r.residual, "closed_form": r.closed_form_residual}]
    return Outcome(payload, rows, ok)


COMMANDS = {
    "verify": cmd_verify,
    "moments": cmd_moments,
    "cumulants": cmd_cumulants,
    "wick": cmd_wick,
    "levy": cmd_levy,
    "chaos": cmd_chaos,
    "exclusion": cmd_exclusion,
}


def render(outcome: Outcome, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(outcome.payload, indent=2, allow_nan=True) + "\n"
    buf = io.StringIO()
    if outcome.rows:
        writer = csv.DictWriter(buf, fieldnames=list(outcome.rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(outcome.rows)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qfock", description="Q-deformed Fock space verification suites")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="path to a JSON run config")
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--out", choices=("json", "csv"), default="json")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            cfg.seed = args.seed
        if args.command in ("levy", "chaos") and cfg.jumps is None:
            raise ConfigError(f"'{args.command}' needs a 'jumps' section")
        outcome = COMMANDS[args.command](cfg)
    except EnvelopeExceeded as exc:
        print(f"qfock: envelope exceeded: {exc}", file=sys.stderr)
        return EXIT_ENVELOPE
    except QFockError as exc:
        print(f"qfock: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(render(outcome, args.out))
    return EXIT_OK if outcome.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
