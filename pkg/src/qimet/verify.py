"""Randomized verification runners for the package's central identities.

Each runner draws one random instance from a trial seed, evaluates the same
quantity along two *independent* routes — a closed form or bound from the
metrics module versus a direct numerical computation (SDP oracle, explicit
Choi-matrix fidelity, plain trace norms) — and reports the discrepancy as a
:class:`VerificationRecord`.  ``passed`` means the absolute error is within
the per-check tolerance below.

For bracket-style checks (instrument sandwich, Fuchs-van de Graaf chain) the
record stores the two outer values and ``abs_error`` is the total amount by
which the bracket is violated (zero when the chain holds).
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

import numpy as np

from . import metrics
from .channels import (ChoiMatrix, KrausChannel, StochasticChannel,
                       choi_from_kraus, identity_channel, kraus_rank,
                       random_stochastic_channel)
from .instruments import (NonUniformStochasticModel, expand_nonuniform,
                          expand_uniform, extend_with_reference, full_channel,
                          ideal_instrument, random_general_implementation,
                          random_nonuniform_model, random_uniform_model)
from .linalg import (psd_sqrt, random_density, random_pure, rng,
                     support_projector, trace_norm)
from .oracle import diamond_lower_hillclimb_state, diamond_norm

__all__ = [
    "THEOREM_IDS",
    "TOLERANCES",
    "VerificationRecord",
    "run_trial",
    "run_trials",
    "summarize",
]

THEOREM_IDS = (
    "t-stochastic-diamond-identity",
    "cor-uniform-fidelity",
    "cor-nonuniform-fidelity",
    "thm-instrument-bounds",
    "thm-uniform-diamond",
    "sec7-counterexample",
    "fvg-appendix",
    "lemma-orthogonality",
    "kraus-rank",
)

#: Per-check pass tolerances (the acceptance thresholds).
TOLERANCES = {
    "t-stochastic-diamond-identity": 1e-5,
    "cor-uniform-fidelity": 1e-8,
    "cor-nonuniform-fidelity": 1e-8,
    "thm-instrument-bounds": 1e-6,
    "thm-uniform-diamond": 1e-4,
    "sec7-counterexample": 1e-4,
    "fvg-appendix": 1e-10,
    "lemma-orthogonality": 1e-10,
    "kraus-rank": 0.0,
}

#: Default (D, E) per check when the caller does not override them.
DEFAULT_DIMS = {
    "t-stochastic-diamond-identity": (2, 2),
    "cor-uniform-fidelity": (2, 2),
    "cor-nonuniform-fidelity": (2, 2),
    "thm-instrument-bounds": (2, 2),
    "thm-uniform-diamond": (2, 2),
    "sec7-counterexample": (2, 2),
    "fvg-appendix": (2, 3),
    "lemma-orthogonality": (2, 6),
    "kraus-rank": (2, 3),
}


@dataclass(frozen=True)
class VerificationRecord:
    theorem_id: str
    trial_seed: int
    closed_form: float
    oracle_value: float
    abs_error: float
    passed: bool


def record_to_json(record: VerificationRecord) -> dict:
    return {
        "theorem_id": record.theorem_id,
        "trial_seed": record.trial_seed,
        "closed_form": record.closed_form,
        "oracle_value": record.oracle_value,
        "abs_error": record.abs_error,
        "passed": record.passed,
    }


def _make(theorem_id, seed, closed, oracle, err, tol) -> VerificationRecord:
    return VerificationRecord(theorem_id, seed, float(closed), float(oracle),
                              float(err), bool(err <= tol))


def _direct_choi_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    # raw linalg route, independent of the metrics closed forms
    root = trace_norm(psd_sqrt(a) @ psd_sqrt(b))
    return root * root


def _instrument_delta(impl) -> ChoiMatrix:
    ideal = ideal_instrument(impl.D, impl.E)
    return (choi_from_kraus(full_channel(impl))
            - choi_from_kraus(full_channel(ideal)))


# ------------------------------------------------------------------
# individual checks
# ------------------------------------------------------------------

def _check_stochastic_diamond(seed, D, E, tol):
    # halved diamond distance of T to the identity: closed form vs SDP
    gen = rng(seed)
    nu = 0.2 + 0.8 * float(gen.uniform())
    t = random_stochastic_channel(E, nu=nu, seed=seed)
    closed = metrics.diamond_identity_stochastic(t)
    delta = t.choi() - choi_from_kraus(identity_channel(E))
    oracle = 0.5 * diamond_norm(delta, tol=1e-7).value
    return _make("t-stochastic-diamond-identity", seed, closed, oracle,
                 abs(closed - oracle), tol)


def _check_uniform_fidelity(seed, D, E, tol):
    model = random_uniform_model(D, E, seed=seed)
    closed = metrics.fidelity_uniform_closed(model)
    impl = expand_uniform(model)
    ideal = ideal_instrument(D, E)
    oracle = _direct_choi_fidelity(
        choi_from_kraus(full_channel(ideal)).matrix,
        choi_from_kraus(full_channel(impl)).matrix)
    return _make("cor-uniform-fidelity", seed, closed, oracle,
                 abs(closed - oracle), tol)


def _check_nonuniform_fidelity(seed, D, E, tol):
    model = random_nonuniform_model(D, E, seed=seed)
    closed = metrics.fidelity_nonuniform_closed(model)
    impl = expand_nonuniform(model)
    ideal = ideal_instrument(D, E)
    oracle = _direct_choi_fidelity(
        choi_from_kraus(full_channel(ideal)).matrix,
        choi_from_kraus(full_channel(impl)).matrix)
    return _make("cor-nonuniform-fidelity", seed, closed, oracle,
                 abs(closed - oracle), tol)


def _check_instrument_bounds(seed, D, E, tol):
    # sandwich: lower_max <= ||Delta||_dia <= upper; abs_error = violation
    impl = random_general_implementation(D, E, seed=seed)
    lower = metrics.instrument_diamond_lower_max(impl, restarts=8, seed=seed)
    upper = metrics.instrument_diamond_upper(impl)
    oracle = diamond_norm(_instrument_delta(impl), tol=1e-7).value
    violation = max(lower - oracle, 0.0) + max(oracle - upper, 0.0)
    return _make("thm-instrument-bounds", seed, lower, oracle, violation, tol)


def _check_uniform_diamond(seed, D, E, tol):
    # closed form 2(1 - nu00*lambda00) vs SDP, plus saturation of the probe
    # lower bound at the T00-optimal state on (reference x E)
    model = random_uniform_model(D, E, seed=seed)
    closed = 2.0 * metrics.uniform_diamond_exact(model)
    impl = expand_uniform(model)
    oracle = diamond_norm(_instrument_delta(impl), tol=1e-6).value
    t00 = model.table.get((0, 0))
    if t00 is None:
        t00 = StochasticChannel(E, 0.0, {})
    d00 = t00.choi() - choi_from_kraus(identity_channel(E))
    _, psi = diamond_lower_hillclimb_state(d00, restarts=10, seed=seed)
    extended = extend_with_reference(impl, E)
    saturated = metrics.instrument_diamond_lower(
        extended, np.outer(psi, psi.conj()), 0)
    err = max(abs(closed - oracle), abs(saturated - oracle))
    return _make("thm-uniform-diamond", seed, closed, oracle, err, tol)


def shipped_counterexample_model() -> NonUniformStochasticModel:
    """Outcome-dependent qubit-dephasing model: clean on outcome 0, phase
    flip with probability 0.2 on outcome 1."""
    t0 = StochasticChannel(2, 1.0, {(0, 0): 1.0})
    t1 = StochasticChannel(2, 1.0, {(0, 0): 0.8, (0, 1): 0.2})
    return NonUniformStochasticModel(2, 2, {(0, 0, 0): t0, (0, 0, 1): t1})


def _check_sec7(seed, D, E, tol):
    # fixed counterexample: outcome-resolved closed form vs SDP, and the
    # uniform-theory fidelity route must disagree by at least 0.01
    model = shipped_counterexample_model()
    closed = metrics.nonuniform_outcome_diamond(model)
    impl = expand_nonuniform(model)
    oracle = diamond_norm(_instrument_delta(impl), tol=1e-6).value
    err = abs(closed - oracle)
    fidelity_route = 1.0 - metrics.fidelity_nonuniform_closed(model)
    separated = abs(0.5 * closed - fidelity_route) >= 0.01
    return VerificationRecord("sec7-counterexample", seed, closed, oracle,
                              float(err), bool(err <= tol and separated))


def _check_fvg(seed, D, E, tol):
    # chain lower <= middle <= upper; abs_error = total violation
    gen = rng(seed)
    dim = 2 + int(gen.integers(3))
    if seed % 5 == 0:
        psi = random_pure(dim, gen)
        rho = np.outer(psi, psi.conj())
    else:
        rho = random_density(dim, gen, rank=1 + int(gen.integers(dim)))
    sigma = random_density(dim, gen)
    lo, mid, up = metrics.fvg_bounds(rho, sigma, support_projector(rho))
    violation = max(lo - mid, 0.0) + max(mid - up, 0.0)
    return _make("fvg-appendix", seed, lo, up, violation, tol)


def _check_orthogonality(seed, D, E, tol):
    # Hermitian blocks with orthogonal supports: ||sum|| _1 == sum ||.||_1
    gen = rng(seed)
    dim = max(E, 2)
    q, _ = np.linalg.qr(gen.normal(size=(dim, dim))
                        + 1j * gen.normal(size=(dim, dim)))
    cut = 1 + int(gen.integers(dim - 1))
    parts = []
    for block in (q[:, :cut], q[:, cut:]):
        k = block.shape[1]
        h = gen.normal(size=(k, k)) + 1j * gen.normal(size=(k, k))
        h = h + h.conj().T
        parts.append(block @ h @ block.conj().T)
    closed = sum(trace_norm(p) for p in parts)
    oracle = trace_norm(sum(parts))
    return _make("lemma-orthogonality", seed, closed, oracle,
                 abs(closed - oracle), tol)


def _check_kraus_rank(seed, D, E, tol):
    # generic channels: number of independent Kraus operators == Choi rank
    gen = rng(seed)
    din, dout = D, E
    r = 1 + int(gen.integers(min(din * dout, 4)))
    ops = tuple(gen.normal(size=(dout, din)) + 1j * gen.normal(size=(dout, din))
                for _ in range(r))
    channel = KrausChannel(din, dout, ops)
    measured = kraus_rank(channel)
    return _make("kraus-rank", seed, float(r), float(measured),
                 abs(r - measured), tol)


_RUNNERS = {
    "t-stochastic-diamond-identity": _check_stochastic_diamond,
    "cor-uniform-fidelity": _check_uniform_fidelity,
    "cor-nonuniform-fidelity": _check_nonuniform_fidelity,
    "thm-instrument-bounds": _check_instrument_bounds,
    "thm-uniform-diamond": _check_uniform_diamond,
    "sec7-counterexample": _check_sec7,
    "fvg-appendix": _check_fvg,
    "lemma-orthogonality": _check_orthogonality,
    "kraus-rank": _check_kraus_rank,
}


# ------------------------------------------------------------------
# driving
# ------------------------------------------------------------------

def run_trial(theorem_id: str, trial_seed: int, dim_d: int | None = None,
              dim_e: int | None = None,
              tol: float | None = None) -> VerificationRecord:
    """Run a single randomized check of ``theorem_id`` at ``trial_seed``."""
    if theorem_id not in _RUNNERS:
        raise ValueError(f"unknown theorem id {theorem_id!r}; "
                         f"choose one of {', '.join(THEOREM_IDS)}")
    d_default, e_default = DEFAULT_DIMS[theorem_id]
    return _RUNNERS[theorem_id](
        trial_seed,
        d_default if dim_d is None else dim_d,
        e_default if dim_e is None else dim_e,
        TOLERANCES[theorem_id] if tol is None else tol,
    )


def run_trials(theorem_id: str, trials: int, seed: int,
               dim_d: int | None = None, dim_e: int | None = None,
               tol: float | None = None, threads: int = 1) -> list:
    """Run ``trials`` independent checks seeded ``seed + i``.

    Records come back in trial-index order regardless of ``threads``.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    seeds = [seed + i for i in range(trials)]
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as tp:
            return list(tp.map(
                lambda s: run_trial(theorem_id, s, dim_d, dim_e, tol), seeds))
    return [run_trial(theorem_id, s, dim_d, dim_e, tol) for s in seeds]


def summarize(records) -> dict:
    records = list(records)
    return {
        "trials": len(records),
        "passed": sum(1 for r in records if r.passed),
        "max_abs_error": max((r.abs_error for r in records), default=0.0),
    }
