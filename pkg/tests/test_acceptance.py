"""End-to-end acceptance battery.

Each test here is one headline numerical claim about the package, checked at
its stated tolerance over freshly seeded random instances and printed as a
single PASS/FAIL line (run with ``pytest -s`` to see them).  These are the
slow, authoritative checks; the per-module unit tests live in the other
files.
"""

import itertools
import time

import numpy as np

from qimet import metrics
from qimet.channels import ChoiMatrix
from qimet.linalg import col_vec, kron, rng
from qimet.oracle import diamond_lower_hillclimb, diamond_norm
from qimet.verify import run_trial, run_trials, shipped_counterexample_model


def _report(criterion, ok, detail):
    print(f"\n[{criterion}] {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"{criterion}: {detail}"


def _max_err(records):
    return max(r.abs_error for r in records)


def test_criterion_1_stochastic_diamond_identity_vs_sdp():
    # 200 random stochastic channels, dims 2 and 3, weight nu in [0.2, 1]:
    # closed-form halved diamond distance to the identity vs the SDP.
    t0 = time.time()
    records = []
    for dim, base in ((2, 1000), (3, 2000)):
        records += run_trials("t-stochastic-diamond-identity", 100, seed=base,
                              dim_d=dim, dim_e=dim)
    elapsed = time.time() - t0
    err = _max_err(records)
    ok = all(r.passed for r in records) and err <= 1e-5 and elapsed < 300.0
    _report("criterion 1", ok,
            f"max |closed - sdp| = {err:.3e} over {len(records)} trials "
            f"(tol 1e-5, {elapsed:.1f}s)")


def test_criterion_2_uniform_fidelity_closed_form():
    # 504 uniform models over D in {2,3}, E in {1,2,3}: closed-form process
    # fidelity vs direct Choi-matrix fidelity of the full channels.
    t0 = time.time()
    records = []
    for idx, (d, e) in enumerate(itertools.product((2, 3), (1, 2, 3))):
        records += run_trials("cor-uniform-fidelity", 84,
                              seed=10_000 + 1000 * idx, dim_d=d, dim_e=e)
    err = _max_err(records)
    ok = len(records) >= 500 and all(r.passed for r in records) and err <= 1e-8
    _report("criterion 2", ok,
            f"max fidelity error = {err:.3e} over {len(records)} trials "
            f"(tol 1e-8, {time.time() - t0:.1f}s)")


def test_criterion_3_nonuniform_fidelity_closed_form():
    # 204 outcome-dependent models over the same dimension grid.
    t0 = time.time()
    records = []
    for idx, (d, e) in enumerate(itertools.product((2, 3), (1, 2, 3))):
        records += run_trials("cor-nonuniform-fidelity", 34,
                              seed=20_000 + 1000 * idx, dim_d=d, dim_e=e)
    err = _max_err(records)
    ok = len(records) >= 200 and all(r.passed for r in records) and err <= 1e-8
    _report("criterion 3", ok,
            f"max fidelity error = {err:.3e} over {len(records)} trials "
            f"(tol 1e-8, {time.time() - t0:.1f}s)")


def test_criterion_4_uniform_diamond_closed_form_and_saturation():
    # 50 uniform D=2, E=2 models: 2(1 - nu00*lambda00) vs the SDP, and the
    # probe lower bound evaluated at the T00-optimal state must saturate it.
    t0 = time.time()
    records = run_trials("thm-uniform-diamond", 50, seed=30_000,
                         dim_d=2, dim_e=2)
    err = _max_err(records)
    ok = all(r.passed for r in records) and err <= 1e-4
    _report("criterion 4", ok,
            f"max deviation (closed form and saturation) = {err:.3e} over "
            f"{len(records)} trials (tol 1e-4, {time.time() - t0:.1f}s)")


def test_criterion_5_instrument_bound_sandwich():
    # 100 general D=2 implementations, E in {1,2}: maximized probe lower
    # bound <= SDP diamond norm <= summed-branch upper bound, slack 1e-6.
    t0 = time.time()
    records = []
    for e, base in ((1, 40_000), (2, 41_000)):
        records += run_trials("thm-instrument-bounds", 50, seed=base,
                              dim_d=2, dim_e=e)
    violation = _max_err(records)
    ok = all(r.passed for r in records) and violation <= 1e-6
    _report("criterion 5", ok,
            f"max bracket violation = {violation:.3e} over {len(records)} "
            f"trials (slack 1e-6, {time.time() - t0:.1f}s)")


def test_criterion_6_shipped_counterexample():
    # the shipped outcome-dependent dephasing model: SDP value 0.4, and the
    # outcome-averaged fidelity route must disagree by at least 0.01
    t0 = time.time()
    record = run_trial("sec7-counterexample", 0)
    model = shipped_counterexample_model()
    fidelity_route = 1.0 - metrics.fidelity_nonuniform_closed(model)
    separation = abs(0.5 * record.closed_form - fidelity_route)
    ok = (record.passed and abs(record.oracle_value - 0.4) <= 1e-4
          and separation >= 0.01)
    _report("criterion 6", ok,
            f"sdp = {record.oracle_value:.6f} (want 0.4 +- 1e-4), "
            f"fidelity-route separation = {separation:.4f} (want >= 0.01, "
            f"{time.time() - t0:.1f}s)")


def test_criterion_7_fidelity_trace_distance_chain():
    # 1000 state pairs in dims 2-4 (200 with pure rho), chain slack 1e-10,
    # plus the fixed pure-vs-maximally-mixed qubit case.
    t0 = time.time()
    records = run_trials("fvg-appendix", 1000, seed=3000)
    pure_trials = sum(1 for i in range(1000) if (3000 + i) % 5 == 0)
    violation = _max_err(records)
    rho = np.diag([1.0, 0.0]).astype(complex)
    lo, mid, up = metrics.fvg_bounds(rho, np.eye(2, dtype=complex) / 2)
    fixed = (abs(lo - 0.5) <= 1e-5 and abs(mid - 0.5) <= 1e-5
             and abs(up - 0.70711) <= 1e-5)
    ok = (all(r.passed for r in records) and violation <= 1e-10
          and pure_trials == 200 and fixed)
    _report("criterion 7", ok,
            f"max chain violation = {violation:.3e} over 1000 pairs "
            f"({pure_trials} pure), fixed case {(lo, mid, up)} "
            f"({time.time() - t0:.1f}s)")


def test_criterion_8_kraus_rank_vectorization_orthogonality():
    # structural identities: Kraus rank == Choi rank on 200 random channels,
    # col(ABC) == kron(C^T, A) col(B) and tr(A^+ B) == <col A, col B> on 200
    # random triples, and 200 orthogonal-support additivity families.
    t0 = time.time()
    rank_records = run_trials("kraus-rank", 200, seed=50_000)
    vec_err = 0.0
    for i in range(200):
        gen = rng(60_000 + i)
        m, n, p, q = (2 + int(k) for k in gen.integers(3, size=4))
        a = gen.normal(size=(m, n)) + 1j * gen.normal(size=(m, n))
        b = gen.normal(size=(n, p)) + 1j * gen.normal(size=(n, p))
        c = gen.normal(size=(p, q)) + 1j * gen.normal(size=(p, q))
        vec_err = max(vec_err, float(np.max(np.abs(
            col_vec(a @ b @ c) - kron(c.T, a) @ col_vec(b)))))
        d = gen.normal(size=(m, n)) + 1j * gen.normal(size=(m, n))
        vec_err = max(vec_err, abs(
            np.vdot(col_vec(a), col_vec(d)) - np.trace(a.conj().T @ d)))
    orth_records = run_trials("lemma-orthogonality", 200, seed=70_000)
    orth_err = _max_err(orth_records)
    ok = (all(r.abs_error == 0.0 for r in rank_records)
          and vec_err <= 1e-12
          and all(r.passed for r in orth_records) and orth_err <= 1e-10)
    _report("criterion 8", ok,
            f"rank mismatches = {sum(r.abs_error != 0 for r in rank_records)}"
            f"/200, vectorization err = {vec_err:.3e} (tol 1e-12), "
            f"orthogonality err = {orth_err:.3e} (tol 1e-10, "
            f"{time.time() - t0:.1f}s)")


def test_criterion_9_solver_certificates_and_hillclimb():
    # 50 random Hermiticity-preserving maps: certified gap <= 1e-6, the
    # hill-climbed lower bound never exceeds the dual certificate, and lands
    # within 1e-3 of the SDP value with 100 restarts.
    t0 = time.time()
    worst_gap = worst_dev = 0.0
    ok = True
    for i in range(50):
        din, dout = ((2, 2), (2, 3), (3, 2))[i % 3]
        gen = rng(80_000 + i)
        side = din * dout
        m = gen.normal(size=(side, side)) + 1j * gen.normal(size=(side, side))
        choi = ChoiMatrix(din, dout, (m + m.conj().T) / (2 * side))
        result = diamond_norm(choi, tol=1e-6)
        climbed = diamond_lower_hillclimb(choi, restarts=100, seed=80_000 + i)
        ok = ok and result.gap <= 1e-6 and climbed <= result.dual_bound + 1e-9
        worst_gap = max(worst_gap, result.gap)
        worst_dev = max(worst_dev, abs(climbed - result.value))
    ok = ok and worst_dev <= 1e-3
    _report("criterion 9", ok,
            f"max certified gap = {worst_gap:.3e} (tol 1e-6), max "
            f"|hillclimb - sdp| = {worst_dev:.3e} (tol 1e-3) over 50 maps "
            f"({time.time() - t0:.1f}s)")
