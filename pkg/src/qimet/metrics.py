"""Figures of merit for noisy subsystem measurements.

Closed-form process fidelities and diamond distances for stochastic
instrument implementations, certified bounds for general implementations,
and sharpened Fuchs-van de Graaf inequalities.

Diamond-norm conventions in this module:

* :func:`diamond_identity_stochastic` and :func:`uniform_diamond_exact`
  return the *halved* norm ``(1/2)||.||_diamond`` (the natural [0, 1]
  error rate);
* :func:`instrument_diamond_lower`, :func:`instrument_diamond_lower_max`,
  :func:`instrument_diamond_upper`, :func:`nonuniform_outcome_diamond`
  and every field of :class:`MetricsReport` use the *full* norm.

Each docstring restates the convention of its function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (ChoiMatrix, StochasticChannel, choi_from_kraus,
                       nu_lambda)
from .config import TOL
from .errors import DimensionMismatch, InvalidModel, InvalidProjector
from .instruments import (InstrumentImplementation, NonUniformStochasticModel,
                          UniformStochasticModel, expand_nonuniform,
                          expand_uniform, ideal_instrument)
from .linalg import (check_density, check_projector, kron, psd_sqrt,
                     random_pure, rng, support_projector, trace_norm)

__all__ = [
    "MetricsReport",
    "process_fidelity",
    "instrument_fidelity_branchwise",
    "fidelity_uniform_closed",
    "fidelity_nonuniform_closed",
    "diamond_identity_stochastic",
    "instrument_diamond_lower",
    "instrument_diamond_lower_max",
    "instrument_diamond_upper",
    "uniform_diamond_exact",
    "nonuniform_outcome_diamond",
    "fvg_bounds",
    "build_report",
    "report_to_json",
]


# ==================================================================
# fidelities
# ==================================================================

def process_fidelity(ja: ChoiMatrix, jb: ChoiMatrix) -> float:
    """Process fidelity ``F = ||sqrt(JA) sqrt(JB)||_1^2`` between Choi states.

    Accepts subnormalized Choi states (trace-decreasing maps); symmetric in
    its arguments.

    :raises DimensionMismatch: on unequal dimensions.
    :raises NotPSD: if either matrix has a genuinely negative eigenvalue.
    """
    if (ja.dim_in, ja.dim_out) != (jb.dim_in, jb.dim_out):
        raise DimensionMismatch(
            f"Choi dimensions ({ja.dim_in}, {ja.dim_out}) vs "
            f"({jb.dim_in}, {jb.dim_out})")
    root = trace_norm(psd_sqrt(ja.matrix) @ psd_sqrt(jb.matrix))
    return root * root


def instrument_fidelity_branchwise(a: InstrumentImplementation,
                                   b: InstrumentImplementation) -> float:
    """Process fidelity between two instruments from their branches.

    Because branch outputs land in orthogonal outcome sectors, the square
    root of the full-channel fidelity splits into a sum over outcomes:
    ``F(A, B) = (sum_j sqrt(F(J(A_j), J(B_j))))**2``.
    """
    if (a.D, a.E) != (b.D, b.E):
        raise DimensionMismatch(
            f"instrument dimensions ({a.D}, {a.E}) vs ({b.D}, {b.E})")
    total = 0.0
    for ma, mb in zip(a.branches, b.branches):
        total += np.sqrt(max(process_fidelity(choi_from_kraus(ma),
                                              choi_from_kraus(mb)), 0.0))
    return total * total


def fidelity_uniform_closed(model: UniformStochasticModel) -> float:
    """Fidelity of a uniform stochastic implementation to the ideal
    measurement: ``nu_00 * lambda_00`` of the dressing channel ``T_(0,0)``.

    Returns 0 when the model has no ``(0, 0)`` entry.
    """
    t00 = model.table.get((0, 0))
    if t00 is None:
        return 0.0
    nu, lam = nu_lambda(t00)
    return nu * lam


def fidelity_nonuniform_closed(model: NonUniformStochasticModel) -> float:
    """Fidelity of an outcome-dependent stochastic implementation:
    ``((1/D) sum_j sqrt(nu_00j * lambda_00j))**2``.

    Outcomes with no ``(0, 0, j)`` entry contribute zero.
    """
    acc = 0.0
    for j in range(model.D):
        t = model.table.get((0, 0, j))
        if t is not None:
            nu, lam = nu_lambda(t)
            acc += np.sqrt(max(nu * lam, 0.0))
    val = acc / model.D
    return val * val


# ==================================================================
# diamond distances: closed forms
# ==================================================================

def diamond_identity_stochastic(t: StochasticChannel) -> float:
    """Halved diamond distance of an unnormalized stochastic channel to the
    identity: ``(1/2)||T - I||_diamond = (1 + nu)/2 - nu*lambda``."""
    nu, lam = nu_lambda(t)
    return (1.0 + nu) / 2.0 - nu * lam


def uniform_diamond_exact(model: UniformStochasticModel) -> float:
    """Halved diamond distance of a uniform stochastic implementation to the
    ideal measurement: ``(1/2)||Delta||_diamond = 1 - nu_00*lambda_00``.

    Degenerate models with ``nu_00 = 0`` return 1.
    """
    return 1.0 - fidelity_uniform_closed(model)


def nonuniform_outcome_diamond(model: NonUniformStochasticModel) -> float:
    """Full diamond distance for purely outcome-dependent unmeasured-register
    errors: ``||Delta||_diamond = max_j ||T_j - I_E||_diamond
    = max_j 2*(1 - lambda_j)``.

    Only models whose table has nothing but trace-preserving ``(0, 0, j)``
    entries qualify.  Note the outcome-resolved error is *not* ``2*(1 - F)``
    of the fidelity closed form; see :func:`fidelity_nonuniform_closed`.

    :raises InvalidModel: if off-``(0, 0)`` entries are present or a branch
        channel is not trace preserving.
    """
    worst = 0.0
    for (a, b, j), t in model.table.items():
        if (a, b) != (0, 0):
            raise InvalidModel(
                f"entry {(a, b, j)}: only (0, 0, j) errors are supported")
        nu, lam = nu_lambda(t)
        if abs(nu - 1.0) > TOL.weight_sum:
            raise InvalidModel(f"branch {j} has weight {nu!r}, expected 1")
        worst = max(worst, 2.0 * (1.0 - lam))
    return worst


# ==================================================================
# diamond distances: general bounds
# ==================================================================

def _embedded_state(sigma: np.ndarray, D: int, j: int) -> np.ndarray:
    return kron(sigma, np.outer(np.eye(D)[j], np.eye(D)[j]))


def instrument_diamond_lower(impl: InstrumentImplementation,
                             sigma: np.ndarray, j: int) -> float:
    """Lower bound on the full diamond distance between an implementation and
    the ideal measurement, from a single probe state:
    ``1 - tr M_j(sigma_j) + ||M_j(sigma_j) - sigma_j||_1`` with
    ``sigma_j = sigma ⊗ |j><j|``.

    :param sigma: density matrix on the unmeasured register (dimension E).
    :param j: outcome whose branch is probed.
    """
    if not 0 <= j < impl.D:
        raise ValueError(f"outcome index {j} out of range for D={impl.D}")
    sigma = check_density(sigma, impl.E)
    sigma_j = _embedded_state(sigma, impl.D, j)
    out = impl.branches[j].apply(sigma_j)
    return (1.0 - float(np.trace(out).real)
            + trace_norm(out - sigma_j))


def instrument_diamond_lower_max(impl: InstrumentImplementation,
                                 restarts: int = 20, seed: int = 0) -> float:
    """Best probe-state lower bound over all outcomes and a candidate set of
    states: the maximally mixed state, every computational basis state, and
    ``restarts`` random pure states.  Full-norm convention.

    Deterministic per seed and monotone nondecreasing in ``restarts``.
    """
    if restarts < 0:
        raise ValueError(f"restarts must be >= 0, got {restarts}")
    eye = np.eye(impl.E, dtype=complex)
    candidates = [eye / impl.E]
    candidates += [np.outer(eye[i], eye[i]) for i in range(impl.E)]
    gen = rng(seed)
    for _ in range(restarts):
        psi = random_pure(impl.E, gen)
        candidates.append(np.outer(psi, psi.conj()))
    return max(instrument_diamond_lower(impl, sigma, j)
               for sigma in candidates for j in range(impl.D))


def instrument_diamond_upper(impl: InstrumentImplementation) -> float:
    """Upper bound on the full diamond distance to the ideal measurement:
    ``D*E * sum_k ||J(M_k) - J(ad_pi_k)||_1``."""
    ideal = ideal_instrument(impl.D, impl.E)
    total = 0.0
    for noisy, clean in zip(impl.branches, ideal.branches):
        total += trace_norm(choi_from_kraus(noisy).matrix
                            - choi_from_kraus(clean).matrix)
    return impl.D * impl.E * total


def _per_branch_trace_distances(impl: InstrumentImplementation) -> tuple:
    ideal = ideal_instrument(impl.D, impl.E)
    return tuple(
        trace_norm(choi_from_kraus(noisy).matrix
                   - choi_from_kraus(clean).matrix)
        for noisy, clean in zip(impl.branches, ideal.branches))


# ==================================================================
# Fuchs-van de Graaf bounds
# ==================================================================

def fvg_bounds(rho: np.ndarray, sigma: np.ndarray,
               pi: np.ndarray | None = None) -> tuple:
    """Sharpened Fuchs-van de Graaf bracket around the trace distance.

    Returns ``(lower, middle, upper)`` with ``lower = 1 - tr(pi sigma)``,
    ``middle = (1/2)||rho - sigma||_1`` and
    ``upper = sqrt(1 - ||sqrt(rho) sqrt(sigma)||_1^2)``, where ``pi`` is any
    projector fixing ``rho`` (default: the support projector of ``rho``).
    The chain ``lower <= middle <= upper`` holds for every valid input.

    :raises InvalidProjector: if ``pi`` is supplied but ``pi rho != rho``.
    """
    rho = check_density(rho)
    sigma = check_density(sigma, rho.shape[0])
    if pi is None:
        pi = support_projector(rho)
    else:
        pi = check_projector(pi)
        dev = float(np.max(np.abs(pi @ rho - rho)))
        if dev > TOL.projector:
            raise InvalidProjector(
                f"projector does not fix rho: max |pi rho - rho| = {dev:.3e}")
    lower = 1.0 - float(np.trace(pi @ sigma).real)
    middle = 0.5 * trace_norm(rho - sigma)
    root = trace_norm(psd_sqrt(rho) @ psd_sqrt(sigma))
    upper = float(np.sqrt(max(1.0 - root * root, 0.0)))
    return lower, middle, upper


# ==================================================================
# aggregated report
# ==================================================================

@dataclass(frozen=True)
class MetricsReport:
    """Bundle of figures of merit for one implementation.

    All diamond-distance fields use the full norm ``||Delta||_diamond``;
    ``diamond_exact``, ``nu00`` and ``lambda00`` are model properties that
    only exist for uniform stochastic models and are ``None`` otherwise.
    """

    fidelity: float
    diamond_lower: float
    diamond_upper: float
    diamond_exact: float | None
    nu00: float | None
    lambda00: float | None
    per_branch_trace_distances: tuple

    def __post_init__(self):
        if self.diamond_lower > self.diamond_upper + 1e-9:
            raise ValueError(
                f"lower bound {self.diamond_lower!r} exceeds upper bound "
                f"{self.diamond_upper!r}")
        if self.diamond_exact is not None:
            if not (self.diamond_lower - 1e-9 <= self.diamond_exact
                    <= self.diamond_upper + 1e-9):
                raise ValueError(
                    f"exact value {self.diamond_exact!r} outside bracket "
                    f"[{self.diamond_lower!r}, {self.diamond_upper!r}]")
        object.__setattr__(self, "per_branch_trace_distances",
                           tuple(float(x) for x in
                                 self.per_branch_trace_distances))


def report_to_json(report: MetricsReport) -> dict:
    return {
        "fidelity": report.fidelity,
        "diamond_lower": report.diamond_lower,
        "diamond_upper": report.diamond_upper,
        "diamond_exact": report.diamond_exact,
        "nu00": report.nu00,
        "lambda00": report.lambda00,
        "per_branch_trace_distances": list(report.per_branch_trace_distances),
        "conventions": {"diamond": "full-norm"},
    }


def build_report(obj, restarts: int = 20, seed: int = 0) -> MetricsReport:
    """Compute a :class:`MetricsReport` for a stochastic model or a general
    implementation.

    Stochastic models are expanded to implementations for the bound
    computations; closed forms supply the fidelity (and, for uniform models,
    the exact diamond distance ``2*(1 - nu00*lambda00)``).
    """
    diamond_exact = nu00 = lambda00 = None
    if isinstance(obj, UniformStochasticModel):
        impl = expand_uniform(obj)
        fidelity = fidelity_uniform_closed(obj)
        diamond_exact = 2.0 * uniform_diamond_exact(obj)
        t00 = obj.table.get((0, 0))
        nu00, lambda00 = nu_lambda(t00) if t00 is not None else (0.0, 1.0)
    elif isinstance(obj, NonUniformStochasticModel):
        impl = expand_nonuniform(obj)
        fidelity = fidelity_nonuniform_closed(obj)
    elif isinstance(obj, InstrumentImplementation):
        impl = obj
        fidelity = instrument_fidelity_branchwise(
            ideal_instrument(impl.D, impl.E), impl)
    else:
        raise TypeError(
            f"expected a stochastic model or an implementation, "
            f"got {type(obj).__name__}")
    return MetricsReport(
        fidelity=float(fidelity),
        diamond_lower=instrument_diamond_lower_max(impl, restarts, seed),
        diamond_upper=instrument_diamond_upper(impl),
        diamond_exact=diamond_exact,
        nu00=nu00,
        lambda00=lambda00,
        per_branch_trace_distances=_per_branch_trace_distances(impl),
    )
