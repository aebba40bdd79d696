"""Acceptance criteria, one test each, with a printed pass/fail line per criterion.

Run ``pytest tests/test_acceptance.py`` (lines appear in the terminal summary)
or ``python tests/test_acceptance.py`` for the lines alone.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import scipy.linalg

sys.path.insert(0, str(Path(__file__).parent))

from cli_cases import CASES, invoke  # noqa: E402
from modulaire.entropy import araki_relative_entropy, entanglement_entropy, relative_entropy_oracle  # noqa: E402
from modulaire.factorlab import (  # noqa: E402
    SectorVerdict,
    TailRule,
    TensorChainState,
    TraceVerdict,
    functional_F,
    sector_overlap,
    trace_property_test,
    witness_pair,
)
from modulaire.linalg import (  # noqa: E402
    Tolerances,
    kron,
    partial_trace,
    random_hermitian,
    random_matrix,
    random_unit_vector,
)
from modulaire.modular import modular_data, modular_flow  # noqa: E402
from modulaire.projlat import PartialIsometry, is_minimal, leq_positive, mvn_equivalent, preceq  # noqa: E402
from modulaire.staralg import analyze, commutant, full_matrix_algebra, generate_algebra  # noqa: E402
from modulaire.states import density_of  # noqa: E402

RESULTS = []
TOL = Tolerances()


def record(number, title, ok, detail, elapsed, limit=None):
    timing = f"{elapsed:.3f}s" + (f" (limit {limit:g}s)" if limit is not None else "")
    ok = ok and (limit is None or elapsed < limit)
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail} | {timing}"
    RESULTS.append(line)
    print(line)
    return ok


def criterion_1():
    t0 = time.perf_counter()
    checks = {}
    c = commutant(full_matrix_algebra(3), TOL)
    checks["commutant(M3) = C I3"] = c.dim == 1 and c.contains(np.eye(3), TOL)
    aab = generate_algebra([np.diag([1.0, 1.0, 2.0])], TOL)
    c = commutant(aab, TOL)
    block = np.zeros((3, 3), dtype=complex)
    block[:2, :2] = random_matrix(2, np.random.default_rng(0))
    off = np.zeros((3, 3))
    off[0, 2] = 1
    checks["diag(a,a,b) commutant dim 5, M2+C"] = (
        c.dim == 5 and c.contains(block, TOL) and c.contains(np.diag([0, 0, 1.0]), TOL) and not c.contains(off, TOL)
    )
    p = np.ones((3, 3)) / 3
    e11 = np.diag([1.0, 0.0, 0.0])
    u = np.zeros((3, 3))
    u[:, 0] = 1 / np.sqrt(3)
    lit = PartialIsometry.from_matrix(u, TOL)
    witness = mvn_equivalent(e11, p, TOL)
    checks["P rank 1, U U^dagger = P, U^dagger U = E11"] = (
        np.linalg.matrix_rank(p) == 1
        and np.abs(u @ u.T - p).max() < 1e-10
        and np.abs(u.T @ u - e11).max() < 1e-10
        and lit.initial.rank == lit.final.rank == 1
        and witness is not None
        and np.abs(witness.matrix @ witness.matrix.conj().T - p).max() < 1e-10
    )
    q, r = np.diag([1.0, 1.0, 0.0]), np.diag([0.0, 0.0, 1.0])
    checks["Q - R has eigenvalue -1, leq fails, preceq holds"] = (
        np.isclose(np.linalg.eigvalsh(q - r).min(), -1.0) and not leq_positive(r, q, TOL) and preceq(r, q, TOL)
    )
    checks["E M3 E = C E"] = is_minimal(e11, full_matrix_algebra(3), TOL)
    elapsed = time.perf_counter() - t0
    failed = [k for k, v in checks.items() if not v]
    detail = "all worked examples hold" if not failed else "failed: " + "; ".join(failed)
    return record(1, "worked example suite", not failed, detail, elapsed, limit=1.0)


def criterion_2():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for k in range(500):
        n = 2 + k % 5
        psi = random_unit_vector(n * n, rng)
        md = modular_data(psi, (n, n), TOL)
        a = random_matrix(n, rng)
        eye_n, eye = np.eye(n), np.eye(n * n)
        s, j, delta = md.tomita(), md.conjugation(), md.delta()
        worst = max(
            worst,
            np.abs(s(kron(a, eye_n) @ psi) - kron(a.conj().T, eye_n) @ psi).max(),
            np.abs(s.compose(s) - eye).max(),
            np.abs(s(psi) - psi).max(),
            np.abs(delta @ psi - psi).max(),
            np.abs(j.after_linear(md.delta_power(0.5)).matrix - s.matrix).max(),
            np.abs(j.after_linear(delta).compose(j) - md.delta_power(-1)).max(),
        )
    elapsed = time.perf_counter() - t0
    return record(2, "Tomita suite, 500 states", worst < 1e-9, f"max residual {worst:.2e} (< 1e-9)", elapsed, 10.0)


def criterion_3():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    worst_slot = worst_group = worst_thermal = 0.0
    for k in range(60):
        n = 2 + k % 4
        md = modular_data(random_unit_vector(n * n, rng), (n, n), TOL)
        a = random_matrix(n, rng)
        s, t = rng.uniform(-2, 2, size=2)
        big = md.delta_power(1j * s) @ kron(a, np.eye(n)) @ md.delta_power(-1j * s)
        worst_slot = max(worst_slot, np.abs(big - kron(modular_flow(md, a, s), np.eye(n))).max())
        b = random_matrix(n, rng)
        worst_slot = max(worst_slot, np.abs(big @ kron(np.eye(n), b) - kron(np.eye(n), b) @ big).max())
        lhs = modular_flow(md, modular_flow(md, a, t), s)
        worst_group = max(worst_group, np.abs(lhs - modular_flow(md, a, s + t)).max())
    for n in range(2, 6):
        h = random_hermitian(n, rng)
        rho = scipy.linalg.expm(-h)
        rho /= np.trace(rho).real
        md = modular_data(scipy.linalg.sqrtm(rho).reshape(-1), (n, n), TOL)
        a = random_matrix(n, rng)
        s = rng.uniform(-2, 2)
        want = scipy.linalg.expm(-1j * h * s) @ a @ scipy.linalg.expm(1j * h * s)
        worst_thermal = max(worst_thermal, np.abs(modular_flow(md, a, s) - want).max())
    elapsed = time.perf_counter() - t0
    worst = max(worst_slot, worst_group, worst_thermal)
    detail = f"first slot {worst_slot:.2e}, group law {worst_group:.2e}, thermal {worst_thermal:.2e} (< 1e-9)"
    return record(3, "modular flow suite", worst < 1e-9, detail, elapsed)


def criterion_4():
    t0 = time.perf_counter()
    rng = np.random.default_rng(303)
    worst = 0.0
    lowest = math.inf
    for k in range(1000):
        n = 2 + k % 5
        psi, phi = random_unit_vector(n * n, rng), random_unit_vector(n * n, rng)
        got = araki_relative_entropy(psi, phi, (n, n), TOL).value
        rho1 = partial_trace(density_of(psi), (n, n), 0)
        sigma1 = partial_trace(density_of(phi), (n, n), 0)
        worst = max(worst, abs(got - relative_entropy_oracle(rho1, sigma1, TOL)))
        lowest = min(lowest, got)
    vanish = 0.0
    for n in (2, 3, 4):
        psi = random_unit_vector(n * n, rng)
        u = np.linalg.qr(random_matrix(n, rng))[0]
        vanish = max(vanish, abs(araki_relative_entropy(psi, kron(np.eye(n), u) @ psi, (n, n), TOL).value))
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    spot_bell = abs(entanglement_entropy(bell, (2, 2), TOL).value - math.log(2))
    phi = np.array([np.sqrt(1 / 3), 0, 0, np.sqrt(2 / 3)])
    spot_pair = abs(araki_relative_entropy(bell, phi, (2, 2), TOL).value - 0.5 * math.log(9 / 8))
    ok = worst < 1e-9 and lowest >= -TOL.eig and vanish < 1e-9 and spot_bell < 1e-9 and spot_pair < 1e-9
    detail = (
        f"route gap {worst:.2e}, min value {lowest:.2e}, vanishing {vanish:.2e}, "
        f"ln 2 gap {spot_bell:.1e}, ln(9/8)/2 gap {spot_pair:.1e}"
    )
    return record(4, "entropy route equivalence, 1000 pairs", ok, detail, time.perf_counter() - t0)


def criterion_5():
    t0 = time.perf_counter()
    n = 200
    one = trace_property_test(TensorChainState((), TailRule.identity(), n), 200, seed=5, tol=TOL)
    half_state = TensorChainState((), TailRule.constant(0.5), n)
    half = trace_property_test(half_state, 200, seed=5, tol=TOL)
    a, b = witness_pair(half_state)
    fab, fba = functional_F(half_state, a @ b), functional_F(half_state, b @ a)
    ok = (
        one.verdict is TraceVerdict.TRACIAL
        and one.max_deviation < 1e-9
        and half.verdict is TraceVerdict.NON_TRACIAL
        and abs(fab - 2 / 3) < 1e-12
        and abs(fba - 1 / 3) < 1e-12
    )
    detail = (
        f"lambda=1 max dev {one.max_deviation:.1e}; lambda=1/2 F(ab)-2/3 = {abs(fab - 2 / 3):.1e}, "
        f"F(ba)-1/3 = {abs(fba - 1 / 3):.1e}"
    )
    return record(5, "factor-lab trace dichotomy, truncation 200", ok, detail, time.perf_counter() - t0, 5.0)


def criterion_6():
    t0 = time.perf_counter()
    n = 10_000
    cos30 = sector_overlap(lambda k: np.full_like(k, math.cos(math.pi / 6)), n, TOL)
    inv_sq = sector_overlap(lambda k: 1.0 - k**-2.0, n, TOL)
    monotone = all(np.all(np.diff(r.partial_products) <= 0) for r in (cos30, inv_sq))
    # prod_{k=2}^{N} (1 - 1/k^2) = (N + 1) / (2 N)
    limit_gap = abs(inv_sq.partial_products[-1] - (n + 1) / (2 * n))
    elapsed = time.perf_counter() - t0
    ok = (
        cos30.verdict is SectorVerdict.ORTHOGONAL_SECTORS
        and inv_sq.verdict is SectorVerdict.SAME_SECTOR
        and monotone
        and limit_gap < 1e-10
    )
    detail = (
        f"cos 30 -> {cos30.verdict.value}, 1-1/k^2 -> {inv_sq.verdict.value}, "
        f"monotone {monotone}, telescoped limit gap {limit_gap:.1e}"
    )
    return record(6, "sector orthogonality, truncation 10000", ok, detail, elapsed, 1.0)


def criterion_7():
    t0 = time.perf_counter()
    rng = np.random.default_rng(707)
    vn = 0
    order_ok = True
    for k in range(100):
        n = 1 + k % 6
        gens = [random_matrix(n, rng) * (rng.random((n, n)) < 0.35) for _ in range(int(rng.integers(1, 3)))]
        alg = generate_algebra(gens, TOL)
        vn += analyze(alg, TOL).is_von_neumann
        bigger = generate_algebra(gens + [random_matrix(n, rng) * (rng.random((n, n)) < 0.35)], TOL)
        order_ok &= alg.is_subalgebra_of(bigger, TOL) and commutant(bigger, TOL).is_subalgebra_of(
            commutant(alg, TOL), TOL
        )
    ok = vn == 100 and order_ok
    detail = f"{vn}/100 equal their double commutant; order reversal {'holds' if order_ok else 'fails'}"
    return record(7, "double commutant property", ok, detail, time.perf_counter() - t0)


def criterion_8():
    t0 = time.perf_counter()
    first = {name: invoke(argv) for name, argv in CASES.items()}
    second = {name: invoke(argv) for name, argv in CASES.items()}
    codes_ok = all(r[0] == 0 for r in first.values())
    same = [name for name in CASES if first[name] == second[name]]
    ok = codes_ok and len(same) == len(CASES)
    detail = f"{len(same)}/{len(CASES)} corpus reports byte-identical across two runs"
    return record(8, "CLI determinism", ok, detail, time.perf_counter() - t0)


def test_criterion_1_worked_examples():
    assert criterion_1()


def test_criterion_2_tomita_suite():
    assert criterion_2()


def test_criterion_3_modular_flow():
    assert criterion_3()


def test_criterion_4_entropy_routes():
    assert criterion_4()


def test_criterion_5_trace_dichotomy():
    assert criterion_5()


def test_criterion_6_sector_orthogonality():
    assert criterion_6()


def test_criterion_7_double_commutant():
    assert criterion_7()


def test_criterion_8_determinism():
    assert criterion_8()


if __name__ == "__main__":
    checks = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]
    results = [check() for check in checks]
    sys.exit(0 if all(results) else 1)
