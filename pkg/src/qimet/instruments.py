"""Subsystem measurements and their noisy implementations.

An ideal subsystem measurement reads out a ``D``-dimensional register in the
computational basis while an ``E``-dimensional register idles.  The global
tensor order is fixed as

    (unmeasured E) ⊗ (measured D) ⊗ (outcome register D)

so the ideal instrument has branch maps ``ad_{pi_j}`` with
``pi_j = I_E ⊗ |j><j|``, and a noisy implementation is any collection of D
completely positive branch maps on H_{ED} whose sum is trace preserving.

Structured error models:

* uniform stochastic — branch ``j`` has Kraus operators
  ``B ⊗ |j+a><j+b|`` over all ``(a, b)`` and Kraus operators ``B`` of
  outcome-independent stochastic channels ``T_(a,b)`` on the unmeasured
  register (index arithmetic mod D);
* non-uniform stochastic — the same construction with channels ``T_(a,b,j)``
  that may depend on the observed outcome ``j``.

Normalization of the non-uniform weights: this package enforces
``sum_(a,b) nu_(a,b,j) = 1`` for every outcome ``j``.  Note that per-outcome
normalization alone does not make the total channel trace preserving when
weight sits on off-diagonal report flips ``b != 0`` non-uniformly in ``j``;
``expand_nonuniform`` therefore additionally validates the trace-preserving
condition and rejects tables that violate it.  The random model generator
samples tables whose ``b``-marginals are outcome independent, which satisfies
both conditions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .channels import (KrausChannel, StochasticChannel, channel_from_json,
                       channel_to_json, stochastic_from_json,
                       stochastic_to_json)
from .config import TOL, Tolerances
from .errors import DimensionMismatch, InvalidModel, UnsupportedDimension
from .linalg import check_density, kron, rng

__all__ = [
    "SubsystemMeasurement",
    "InstrumentImplementation",
    "UniformStochasticModel",
    "NonUniformStochasticModel",
    "ideal_instrument",
    "expand_uniform",
    "expand_nonuniform",
    "full_channel",
    "born_probabilities",
    "average_over_outcomes",
    "extend_with_reference",
    "random_uniform_model",
    "random_nonuniform_model",
    "random_general_implementation",
    "model_to_json",
    "model_from_json",
]


# ==================================================================
# measurement and implementation types
# ==================================================================

@dataclass(frozen=True)
class SubsystemMeasurement:
    """Computational-basis measurement of the D register, idling the E register."""

    D: int
    E: int

    def __post_init__(self):
        if self.D < 2:
            raise UnsupportedDimension(f"measured register needs D >= 2, got {self.D}")
        if self.E < 1:
            raise UnsupportedDimension(f"unmeasured register needs E >= 1, got {self.E}")

    def projector(self, j: int) -> np.ndarray:
        """``pi_j = I_E ⊗ |j><j|`` on H_{ED}."""
        if not 0 <= j < self.D:
            raise DimensionMismatch(f"outcome {j} out of range for D={self.D}")
        basis = np.zeros((self.D, self.D), dtype=complex)
        basis[j, j] = 1.0
        return kron(np.eye(self.E, dtype=complex), basis)

    def projectors(self) -> list:
        return [self.projector(j) for j in range(self.D)]

    def ideal(self) -> "InstrumentImplementation":
        branches = tuple(
            KrausChannel(self.E * self.D, self.E * self.D, (self.projector(j),))
            for j in range(self.D))
        return InstrumentImplementation(self.D, self.E, branches)


@dataclass(frozen=True)
class InstrumentImplementation:
    """Noisy instrument: D completely positive branch maps on H_{ED}.

    The branch maps are CP by construction (Kraus form); the constructor
    additionally checks that their sum is trace preserving.
    """

    D: int
    E: int
    branches: tuple

    def __post_init__(self):
        if self.D < 2 or self.E < 1:
            raise UnsupportedDimension(
                f"need D >= 2 and E >= 1, got D={self.D}, E={self.E}")
        branches = tuple(self.branches)
        if len(branches) != self.D:
            raise InvalidModel(
                f"expected {self.D} branch maps, got {len(branches)}")
        side = self.E * self.D
        acc = np.zeros((side, side), dtype=complex)
        for m in branches:
            if not isinstance(m, KrausChannel):
                raise InvalidModel("branches must be KrausChannel values")
            if m.dim_in != side or m.dim_out != side:
                raise DimensionMismatch(
                    f"branch dims ({m.dim_in}, {m.dim_out}) do not match E*D = {side}")
            for k in m.kraus_ops:
                acc += k.conj().T @ k
        dev = float(np.max(np.abs(acc - np.eye(side))))
        if dev > TOL.trace_preserving:
            raise InvalidModel(
                f"total channel is not trace preserving: max |sum K†K - I| = {dev:.3e}")
        object.__setattr__(self, "branches", branches)


def ideal_instrument(D: int, E: int) -> InstrumentImplementation:
    """The ideal subsystem measurement as an implementation (branch ``j`` is
    the single-Kraus map ``ad_{pi_j}``)."""
    return SubsystemMeasurement(D, E).ideal()


# ==================================================================
# structured error models
# ==================================================================

def _validate_table(table: Mapping, D: int, E: int, labels: int) -> dict:
    """Common table validation: key arity/range and channel dimensions."""
    clean = {}
    for key, channel in dict(table).items():
        key = tuple(int(k) for k in key)
        if len(key) != labels:
            raise InvalidModel(f"table key {key} must have {labels} indices")
        if any(not 0 <= k < D for k in key):
            raise InvalidModel(f"table key {key} out of range for D={D}")
        if not isinstance(channel, StochasticChannel):
            raise InvalidModel(f"table entry {key} is not a StochasticChannel")
        if channel.dim != E:
            raise InvalidModel(
                f"table entry {key} acts on dimension {channel.dim}, expected E={E}")
        if key in clean:
            raise InvalidModel(f"duplicate table key {key}")
        clean[key] = channel
    return dict(sorted(clean.items()))


@dataclass(frozen=True)
class UniformStochasticModel:
    """Outcome-independent error table ``(a, b) -> T_(a,b)`` with total
    weight ``sum nu_(a,b) = 1``.  Absent keys mean weight zero."""

    D: int
    E: int
    table: Mapping

    def __post_init__(self):
        if self.D < 2 or self.E < 1:
            raise UnsupportedDimension(
                f"need D >= 2 and E >= 1, got D={self.D}, E={self.E}")
        table = _validate_table(self.table, self.D, self.E, labels=2)
        total = sum(t.nu for t in table.values())
        if abs(total - 1.0) > TOL.weight_sum:
            raise InvalidModel(
                f"total weight sum_(a,b) nu = {total!r} must be 1")
        object.__setattr__(self, "table", table)


@dataclass(frozen=True)
class NonUniformStochasticModel:
    """Outcome-dependent error table ``(a, b, j) -> T_(a,b,j)`` normalized
    per outcome: ``sum_(a,b) nu_(a,b,j) = 1`` for each ``j``."""

    D: int
    E: int
    table: Mapping

    def __post_init__(self):
        if self.D < 2 or self.E < 1:
            raise UnsupportedDimension(
                f"need D >= 2 and E >= 1, got D={self.D}, E={self.E}")
        table = _validate_table(self.table, self.D, self.E, labels=3)
        for j in range(self.D):
            total = sum(t.nu for (a, b, jj), t in table.items() if jj == j)
            if abs(total - 1.0) > TOL.weight_sum:
                raise InvalidModel(
                    f"outcome {j}: sum_(a,b) nu = {total!r} must be 1")
        object.__setattr__(self, "table", table)


def _basis_flip(D: int, row: int, col: int) -> np.ndarray:
    out = np.zeros((D, D), dtype=complex)
    out[row % D, col % D] = 1.0
    return out


def _expand_branches(D: int, E: int, channel_at) -> tuple:
    """Branch Kraus sets ``B ⊗ |j+a><j+b|`` for ``B`` in ``channel_at(a, b, j)``."""
    branches = []
    for j in range(D):
        ops = []
        for a in range(D):
            for b in range(D):
                channel = channel_at(a, b, j)
                if channel is None:
                    continue
                flip = _basis_flip(D, j + a, j + b)
                for op in channel.kraus_ops():
                    if np.any(op):
                        ops.append(kron(op, flip))
        if not ops:
            ops = [np.zeros((E * D, E * D), dtype=complex)]
        branches.append(KrausChannel(E * D, E * D, tuple(ops)))
    return tuple(branches)


def expand_uniform(model: UniformStochasticModel) -> InstrumentImplementation:
    """Build the instrument with branch-``j`` Kraus operators
    ``B ⊗ |j+a><j+b|`` over all table entries ``(a, b)`` (mod-D arithmetic)."""
    return InstrumentImplementation(
        model.D, model.E,
        _expand_branches(model.D, model.E,
                         lambda a, b, j: model.table.get((a, b))))


def expand_nonuniform(model: NonUniformStochasticModel) -> InstrumentImplementation:
    """Same construction with outcome-dependent channels ``T_(a,b,j)``.

    :raises InvalidModel: if the weights fail the trace-preserving condition
        ``sum_(a,b) nu_(a,b,(c-b) mod D) = 1`` for every basis column ``c``
        (per-outcome normalization alone does not imply it).
    """
    for c in range(model.D):
        total = sum(t.nu for (a, b, j), t in model.table.items()
                    if (j + b) % model.D == c)
        if abs(total - 1.0) > TOL.weight_sum:
            raise InvalidModel(
                f"weights are not trace preserving: basis column {c} receives "
                f"total weight {total!r} (must be 1)")
    return InstrumentImplementation(
        model.D, model.E,
        _expand_branches(model.D, model.E,
                         lambda a, b, j: model.table.get((a, b, j))))


# ==================================================================
# derived channels and probabilities
# ==================================================================

def full_channel(impl: InstrumentImplementation) -> KrausChannel:
    """The implementation as one channel H_{ED} -> H_{ED} ⊗ H_D, appending
    the outcome register: each Kraus ``K`` of branch ``j`` becomes ``K ⊗ |j>``."""
    side = impl.E * impl.D
    ops = []
    for j, branch in enumerate(impl.branches):
        ket = np.zeros((impl.D, 1), dtype=complex)
        ket[j, 0] = 1.0
        for k in branch.kraus_ops:
            ops.append(kron(k, ket))
    return KrausChannel(side, side * impl.D, tuple(ops))


def born_probabilities(impl: InstrumentImplementation, rho: np.ndarray,
                       tol: Tolerances = TOL) -> np.ndarray:
    """Outcome distribution ``p(j) = trace(M_j(rho))``."""
    rho = check_density(rho, dim=impl.E * impl.D, tol=tol)
    return np.array([float(branch.apply(rho).trace().real)
                     for branch in impl.branches])


def average_over_outcomes(model: NonUniformStochasticModel) -> UniformStochasticModel:
    """Collapse an outcome-dependent table by averaging:
    ``T_(a,b) = (1/D) sum_j T_(a,b,j)`` (weights averaged entrywise)."""
    table = {}
    for a in range(model.D):
        for b in range(model.D):
            weights = {}
            for j in range(model.D):
                entry = model.table.get((a, b, j))
                if entry is None:
                    continue
                for key, w in entry.weights.items():
                    weights[key] = weights.get(key, 0.0) + w / model.D
            if weights:
                table[(a, b)] = StochasticChannel.from_weights(model.E, weights)
    return UniformStochasticModel(model.D, model.E, table)


def extend_with_reference(impl: InstrumentImplementation,
                          dim_ref: int) -> InstrumentImplementation:
    """Attach an idle ``dim_ref``-dimensional reference to the unmeasured
    register: branch Kraus ``K -> I_ref ⊗ K``.  The diamond distance to the
    (equally extended) ideal instrument is unchanged; the extension exists so
    the lower bound of the instrument-distance theorem can be evaluated on
    reference-assisted states, where it becomes tight."""
    if dim_ref < 1:
        raise UnsupportedDimension(f"reference dimension must be >= 1, got {dim_ref}")
    eye = np.eye(dim_ref, dtype=complex)
    branches = tuple(
        KrausChannel(dim_ref * impl.E * impl.D, dim_ref * impl.E * impl.D,
                     tuple(kron(eye, k) for k in branch.kraus_ops))
        for branch in impl.branches)
    return InstrumentImplementation(impl.D, dim_ref * impl.E, branches)


# ==================================================================
# random model generation
# ==================================================================

def random_uniform_model(D: int, E: int, seed: int,
                         concentration: float = 1.0) -> UniformStochasticModel:
    """Random uniform model: Dirichlet weights ``nu`` over the D² table slots
    and an independent random stochastic channel in each slot."""
    if not 2 <= D <= 4:
        raise UnsupportedDimension(f"random models support D in 2..4, got {D}")
    if not 1 <= E <= 4:
        raise UnsupportedDimension(f"random models support E in 1..4, got {E}")
    gen = rng(seed)
    nus = gen.dirichlet(np.full(D * D, concentration))
    table = {}
    for a in range(D):
        for b in range(D):
            probs = gen.dirichlet(np.full(E * E, concentration))
            weights = {(x, y): nus[a * D + b] * probs[x * E + y]
                       for x in range(E) for y in range(E)}
            table[(a, b)] = StochasticChannel.from_weights(E, weights)
    return UniformStochasticModel(D, E, table)


def random_nonuniform_model(D: int, E: int, seed: int,
                            concentration: float = 1.0) -> NonUniformStochasticModel:
    """Random non-uniform model with outcome-independent report-flip
    marginals: ``sum_a nu_(a,b,j) = mu_b`` for every ``j``, which makes the
    expanded instrument trace preserving while the channels and the
    ``a``-splits remain outcome dependent."""
    if not 2 <= D <= 4:
        raise UnsupportedDimension(f"random models support D in 2..4, got {D}")
    if not 1 <= E <= 4:
        raise UnsupportedDimension(f"random models support E in 1..4, got {E}")
    gen = rng(seed)
    mu = gen.dirichlet(np.full(D, concentration))  # report-flip marginal over b
    table = {}
    for j in range(D):
        for b in range(D):
            splits = gen.dirichlet(np.full(D, concentration))  # over a
            for a in range(D):
                nu = mu[b] * splits[a]
                probs = gen.dirichlet(np.full(E * E, concentration))
                weights = {(x, y): nu * probs[x * E + y]
                           for x in range(E) for y in range(E)}
                table[(a, b, j)] = StochasticChannel.from_weights(E, weights)
    return NonUniformStochasticModel(D, E, table)


def random_general_implementation(D: int, E: int, seed: int,
                                  noise: float = 0.15) -> InstrumentImplementation:
    """Random unstructured implementation near the ideal instrument.

    Each branch gets the ideal projector perturbed by a random operator plus
    one extra random low-weight Kraus operator; the collection is then
    normalized globally (right multiplication by ``(sum K†K)^{-1/2}``) so the
    total channel is exactly trace preserving.
    """
    if not 2 <= D <= 4:
        raise UnsupportedDimension(f"random models support D in 2..4, got {D}")
    if not 1 <= E <= 4:
        raise UnsupportedDimension(f"random models support E in 1..4, got {E}")
    meas = SubsystemMeasurement(D, E)
    gen = rng(seed)
    side = E * D
    raw = []
    for j in range(D):
        g0 = gen.normal(size=(side, side)) + 1j * gen.normal(size=(side, side))
        g1 = gen.normal(size=(side, side)) + 1j * gen.normal(size=(side, side))
        raw.append([meas.projector(j) + noise * g0 / np.sqrt(side),
                    noise * g1 / np.sqrt(side)])
    acc = np.zeros((side, side), dtype=complex)
    for ops in raw:
        for k in ops:
            acc += k.conj().T @ k
    vals, vecs = np.linalg.eigh(0.5 * (acc + acc.conj().T))
    inv_root = (vecs * (1.0 / np.sqrt(vals))) @ vecs.conj().T
    branches = tuple(
        KrausChannel(side, side, tuple(k @ inv_root for k in ops))
        for ops in raw)
    return InstrumentImplementation(D, E, branches)


# ==================================================================
# serialization
# ==================================================================

def model_to_json(model) -> dict:
    """Encode a model or general implementation as the shared model JSON."""
    if isinstance(model, UniformStochasticModel):
        return {
            "type": "uniform", "D": model.D, "E": model.E,
            "table": [{"a": a, "b": b, "channel": stochastic_to_json(t)}
                      for (a, b), t in model.table.items()],
        }
    if isinstance(model, NonUniformStochasticModel):
        return {
            "type": "nonuniform", "D": model.D, "E": model.E,
            "table": [{"a": a, "b": b, "j": j, "channel": stochastic_to_json(t)}
                      for (a, b, j), t in model.table.items()],
        }
    if isinstance(model, InstrumentImplementation):
        return {
            "type": "general", "D": model.D, "E": model.E,
            "branches": [channel_to_json(m) for m in model.branches],
        }
    raise TypeError(f"cannot serialize {type(model).__name__} as a model")


def model_from_json(obj: dict):
    """Decode and validate a model JSON object.

    All structural failures discovered while decoding are collected and
    reported together in a single :class:`InvalidModel`.
    """
    try:
        kind = obj["type"]
        D, E = int(obj["D"]), int(obj["E"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed model object: {exc}") from exc

    failures = []
    if kind == "general":
        try:
            branches = tuple(channel_from_json(b) for b in obj["branches"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed model object: {exc}") from exc
        try:
            return InstrumentImplementation(D, E, branches)
        except (InvalidModel, DimensionMismatch, UnsupportedDimension) as exc:
            failures.append(str(exc))
    elif kind in ("uniform", "nonuniform"):
        table = {}
        try:
            for entry in obj["table"]:
                key = (int(entry["a"]), int(entry["b"])) if kind == "uniform" \
                    else (int(entry["a"]), int(entry["b"]), int(entry["j"]))
                table[key] = stochastic_from_json(entry["channel"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed model object: {exc}") from exc
        except InvalidModel as exc:
            failures.append(str(exc))
        if not failures:
            cls = UniformStochasticModel if kind == "uniform" \
                else NonUniformStochasticModel
            try:
                return cls(D, E, table)
            except (InvalidModel, UnsupportedDimension) as exc:
                failures.append(str(exc))
    else:
        raise ValueError(f"unknown model type {kind!r}")
    raise InvalidModel("model validation failed: " + "; ".join(failures))
