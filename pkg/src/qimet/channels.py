"""Quantum channels: Kraus and Choi representations, stochastic mixtures.

The Choi state of a channel with Kraus operators ``{K_j}`` is

    J = (1/dim_in) * sum_j col_vec(K_j) col_vec(K_j)†

living on (input copy) ⊗ (output), with the input factor carrying the slow
index.  ``trace(J) = 1`` exactly when the channel is trace preserving; for
general completely positive maps ``trace(J)`` equals the trace of the map's
normalization.

A *stochastic* channel is a nonnegative mixture of pairwise Hilbert-Schmidt
orthogonal unitaries, one of which is the identity:

    T(rho) = sum_k w_k U_k rho U_k†,   trace(U_j† U_k) = dim * delta_jk.

Its two scalar invariants are ``nu = sum_k w_k`` (the trace of the Choi
state) and ``nu * lambda = w_identity`` (the identity component's weight,
equal to the entanglement fidelity with the identity scaled by ``nu``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .config import TOL, Tolerances
from .errors import (DimensionMismatch, InvalidModel, NotHermitian,
                     UnsupportedDimension)
from .linalg import (col_vec, hermitize, kron, matrix_from_json,
                     matrix_to_json, numerical_rank, uncol, _clamped_psd_eig,
                     rng)

__all__ = [
    "KrausChannel",
    "ChoiMatrix",
    "StochasticChannel",
    "identity_channel",
    "choi_from_kraus",
    "kraus_from_choi",
    "kraus_rank",
    "apply_channel",
    "superoperator",
    "is_trace_preserving",
    "maximally_entangled",
    "weyl_operators",
    "nu_lambda",
    "is_stochastic_kraus",
    "random_stochastic_channel",
    "channel_to_json",
    "channel_from_json",
    "choi_to_json",
    "choi_from_json",
    "stochastic_to_json",
    "stochastic_from_json",
]


# ==================================================================
# core types
# ==================================================================

def _freeze(mat: np.ndarray) -> np.ndarray:
    out = np.array(mat, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class KrausChannel:
    """A completely positive map given by its Kraus operators.

    Operators have shape ``(dim_out, dim_in)``.  The map need not be trace
    preserving (subnormalized branches of instruments are represented this
    way too); use :func:`is_trace_preserving` to check.
    """

    dim_in: int
    dim_out: int
    kraus_ops: tuple

    def __post_init__(self):
        if self.dim_in < 1 or self.dim_out < 1:
            raise DimensionMismatch("channel dimensions must be positive")
        ops = tuple(_freeze(k) for k in self.kraus_ops)
        if not ops:
            raise DimensionMismatch("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (self.dim_out, self.dim_in):
                raise DimensionMismatch(
                    f"Kraus operator shape {k.shape} does not match "
                    f"({self.dim_out}, {self.dim_in})")
        object.__setattr__(self, "kraus_ops", ops)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return apply_channel(self, rho)

    def choi(self) -> "ChoiMatrix":
        return choi_from_kraus(self)


@dataclass(frozen=True)
class ChoiMatrix:
    """Choi state of a map, on (input copy) ⊗ (output).

    The matrix must be Hermitian; it is positive semidefinite exactly for
    completely positive maps, but differences of Choi states (Hermiticity
    preserving maps) are first-class values here as well.
    """

    dim_in: int
    dim_out: int
    matrix: np.ndarray

    def __post_init__(self):
        side = self.dim_in * self.dim_out
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (side, side):
            raise DimensionMismatch(
                f"Choi matrix shape {mat.shape} does not match side {side}")
        dev = float(np.max(np.abs(mat - mat.conj().T)))
        if dev > TOL.herm:
            raise NotHermitian(
                f"Choi matrix deviates from Hermitian by {dev:.3e}")
        object.__setattr__(self, "matrix", _freeze(mat))

    def _check_compatible(self, other: "ChoiMatrix"):
        if (self.dim_in, self.dim_out) != (other.dim_in, other.dim_out):
            raise DimensionMismatch(
                f"Choi matrices on different spaces: "
                f"({self.dim_in},{self.dim_out}) vs ({other.dim_in},{other.dim_out})")

    def __sub__(self, other: "ChoiMatrix") -> "ChoiMatrix":
        self._check_compatible(other)
        return ChoiMatrix(self.dim_in, self.dim_out, self.matrix - other.matrix)

    def __add__(self, other: "ChoiMatrix") -> "ChoiMatrix":
        self._check_compatible(other)
        return ChoiMatrix(self.dim_in, self.dim_out, self.matrix + other.matrix)


def identity_channel(dim: int) -> KrausChannel:
    """The identity map on a ``dim``-dimensional system."""
    return KrausChannel(dim, dim, (np.eye(dim, dtype=complex),))


# ==================================================================
# conversions
# ==================================================================

def choi_from_kraus(channel: KrausChannel) -> ChoiMatrix:
    """Choi state ``(1/dim_in) sum_j col_vec(K_j) col_vec(K_j)†``."""
    side = channel.dim_in * channel.dim_out
    mat = np.zeros((side, side), dtype=complex)
    for k in channel.kraus_ops:
        v = col_vec(k)
        mat += np.outer(v, v.conj())
    mat /= channel.dim_in
    return ChoiMatrix(channel.dim_in, channel.dim_out, hermitize(mat))


def kraus_from_choi(choi: ChoiMatrix, tol: Tolerances = TOL) -> KrausChannel:
    """Kraus operators from the eigendecomposition of a PSD Choi state.

    One operator per eigenvalue above ``rank_rel * w_max``, so the number of
    returned operators equals the Kraus rank.

    :raises NotPSD: if the Choi matrix has an eigenvalue below the clamp band.
    """
    vals, vecs = _clamped_psd_eig(choi.matrix, tol)
    top = float(vals[-1]) if vals.size else 0.0
    ops = []
    if top > 0.0:
        for w, v in zip(vals, vecs.T):
            if w > tol.rank_rel * top:
                ops.append(np.sqrt(choi.dim_in * w)
                           * uncol(v, choi.dim_out, choi.dim_in))
    if not ops:
        ops = [np.zeros((choi.dim_out, choi.dim_in), dtype=complex)]
    return KrausChannel(choi.dim_in, choi.dim_out, tuple(ops))


def kraus_rank(channel: KrausChannel, tol: Tolerances = TOL) -> int:
    """Minimal number of Kraus operators: the rank of the Choi state."""
    return numerical_rank(choi_from_kraus(channel).matrix, tol)


def apply_channel(channel: KrausChannel, rho: np.ndarray) -> np.ndarray:
    """Evaluate ``sum_j K_j rho K_j†``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (channel.dim_in, channel.dim_in):
        raise DimensionMismatch(
            f"state shape {rho.shape} does not match dim_in {channel.dim_in}")
    out = np.zeros((channel.dim_out, channel.dim_out), dtype=complex)
    for k in channel.kraus_ops:
        out += k @ rho @ k.conj().T
    return out


def superoperator(channel: KrausChannel) -> np.ndarray:
    """Matrix acting on column-stacked states:
    ``col_vec(E(rho)) = superoperator(E) @ col_vec(rho)``."""
    side_out = channel.dim_out ** 2
    side_in = channel.dim_in ** 2
    out = np.zeros((side_out, side_in), dtype=complex)
    for k in channel.kraus_ops:
        out += kron(k.conj(), k)
    return out


def is_trace_preserving(channel: KrausChannel, tol: Tolerances = TOL) -> bool:
    """True if ``sum_j K_j† K_j`` equals the identity within tolerance."""
    acc = np.zeros((channel.dim_in, channel.dim_in), dtype=complex)
    for k in channel.kraus_ops:
        acc += k.conj().T @ k
    return bool(np.max(np.abs(acc - np.eye(channel.dim_in)))
                <= tol.trace_preserving)


def maximally_entangled(dim: int) -> np.ndarray:
    """Density matrix of the maximally entangled state
    ``(1/dim) col_vec(I) col_vec(I)†`` on two ``dim``-dimensional factors."""
    v = col_vec(np.eye(dim, dtype=complex))
    return np.outer(v, v.conj()) / dim


# ==================================================================
# stochastic channels
# ==================================================================

def weyl_operators(dim: int) -> dict:
    """Shift-and-phase unitary basis ``U_(a,b) = X^a Z^b`` on ``dim`` levels.

    ``X`` is the cyclic shift ``|k> -> |k+1 mod dim>``, ``Z`` the phase
    ``|k> -> exp(2 pi i k / dim)|k>``.  The ``dim**2`` operators are pairwise
    Hilbert-Schmidt orthogonal with ``trace(U† U) = dim`` and ``U_(0,0) = I``.

    :return: dict mapping ``(a, b)`` to the unitary, in lexicographic order.
    """
    if dim < 1:
        raise UnsupportedDimension(f"dimension must be >= 1, got {dim}")
    shift = np.zeros((dim, dim), dtype=complex)
    for k in range(dim):
        shift[(k + 1) % dim, k] = 1.0
    phases = np.exp(2j * np.pi * np.arange(dim) / dim)
    ops = {}
    x_pow = np.eye(dim, dtype=complex)
    for a in range(dim):
        z_pow = np.ones(dim, dtype=complex)
        for b in range(dim):
            ops[(a, b)] = x_pow * z_pow  # X^a followed by diag phase Z^b
            z_pow = z_pow * phases
        x_pow = shift @ x_pow
    return ops


@dataclass(frozen=True)
class StochasticChannel:
    """Nonnegative mixture of shift-and-phase unitaries.

    ``weights`` maps ``(a, b)`` basis labels to weights ``w >= 0`` with
    ``sum w = nu``; absent labels mean weight zero.  The map acts as
    ``rho -> sum w_(a,b) U_(a,b) rho U_(a,b)†`` and is trace preserving
    exactly when ``nu = 1``.
    """

    dim: int
    nu: float
    weights: Mapping

    def __post_init__(self):
        if self.dim < 1:
            raise UnsupportedDimension(f"dimension must be >= 1, got {self.dim}")
        clean = {}
        for key, w in dict(self.weights).items():
            a, b = (int(key[0]), int(key[1]))
            if not (0 <= a < self.dim and 0 <= b < self.dim):
                raise InvalidModel(f"weight label {key} out of range for "
                                   f"dimension {self.dim}")
            w = float(w)
            if w < 0.0:
                raise InvalidModel(f"negative weight {w!r} at {key}")
            if (a, b) in clean:
                raise InvalidModel(f"duplicate weight label {(a, b)}")
            clean[(a, b)] = w
        total = sum(clean.values())
        if abs(total - self.nu) > TOL.weight_sum:
            raise InvalidModel(
                f"weights sum to {total!r}, but nu = {self.nu!r}")
        object.__setattr__(self, "weights", dict(sorted(clean.items())))

    @classmethod
    def from_weights(cls, dim: int, weights: Mapping) -> "StochasticChannel":
        """Build a mixture with ``nu`` derived from the weight sum."""
        total = float(sum(float(w) for w in dict(weights).values()))
        return cls(dim, total, weights)

    def kraus_ops(self) -> tuple:
        """Kraus operators ``sqrt(w) U_(a,b)`` for the nonzero weights."""
        basis = weyl_operators(self.dim)
        ops = tuple(np.sqrt(w) * basis[key]
                    for key, w in self.weights.items() if w > 0.0)
        if not ops:
            ops = (np.zeros((self.dim, self.dim), dtype=complex),)
        return ops

    def as_channel(self) -> KrausChannel:
        return KrausChannel(self.dim, self.dim, self.kraus_ops())

    def choi(self) -> ChoiMatrix:
        return choi_from_kraus(self.as_channel())


def nu_lambda(obj, tol: Tolerances = TOL) -> tuple:
    """Extract ``(nu, lambda)`` of a square-dimension map from its Choi state.

    ``nu = trace(J)`` and ``nu * lambda = (1/dim) col_vec(I)† J col_vec(I)``
    (the weight of the identity component, i.e. ``nu`` times the entanglement
    fidelity with the identity).  By convention ``lambda = 1`` when ``nu = 0``.

    Accepts a :class:`StochasticChannel`, :class:`KrausChannel` or
    :class:`ChoiMatrix`.
    """
    if isinstance(obj, StochasticChannel):
        choi = obj.choi()
    elif isinstance(obj, KrausChannel):
        choi = choi_from_kraus(obj)
    elif isinstance(obj, ChoiMatrix):
        choi = obj
    else:
        raise TypeError(f"cannot extract nu/lambda from {type(obj).__name__}")
    if choi.dim_in != choi.dim_out:
        raise DimensionMismatch(
            "nu/lambda extraction needs equal input and output dimensions")
    dim = choi.dim_in
    nu = float(choi.matrix.trace().real)
    v = col_vec(np.eye(dim, dtype=complex))
    nu_lam = float((v.conj() @ choi.matrix @ v).real) / dim
    if nu <= tol.weight_sum:
        return nu, 1.0
    return nu, nu_lam / nu


def is_stochastic_kraus(ops: Sequence[np.ndarray], tol: Tolerances = TOL):
    """Validate a Kraus set as a stochastic channel and return ``(nu, lambda)``.

    Checks that the operators act on one system, are pairwise
    Hilbert-Schmidt orthogonal, and that the identity direction is carried by
    a single operator proportional to ``I`` (all others traceless).

    :raises InvalidModel: if any structural requirement fails.
    """
    mats = [np.asarray(k, dtype=complex) for k in ops]
    if not mats:
        raise InvalidModel("empty Kraus set")
    dim = mats[0].shape[0]
    for k in mats:
        if k.shape != (dim, dim):
            raise InvalidModel(f"operator shape {k.shape} != ({dim}, {dim})")
    scale = max(float(np.max(np.abs(k))) for k in mats)
    thresh = 1e-10 * max(1.0, scale) ** 2 * dim
    id_count = 0
    for i, ki in enumerate(mats):
        for kj in mats[i + 1:]:
            if abs(np.trace(ki.conj().T @ kj)) > thresh:
                raise InvalidModel(
                    "Kraus operators are not pairwise orthogonal")
        tr = np.trace(ki)
        if abs(tr) > np.sqrt(thresh):
            # the operator carrying the identity direction must *be* ~ I
            if np.max(np.abs(ki - (tr / dim) * np.eye(dim))) > np.sqrt(thresh):
                raise InvalidModel(
                    "an operator with nonzero trace is not proportional to I")
            id_count += 1
    if id_count > 1:
        raise InvalidModel("more than one operator carries the identity")
    channel = KrausChannel(dim, dim, tuple(mats))
    return nu_lambda(choi_from_kraus(channel), tol)


def random_stochastic_channel(dim: int, nu: float, seed: int,
                              concentration: float = 1.0) -> StochasticChannel:
    """Random mixture over the full shift-and-phase basis.

    Weights are ``nu`` times a Dirichlet draw with the given concentration
    over all ``dim**2`` labels.  Deterministic in ``seed`` (counter-based
    generator).

    :raises UnsupportedDimension: for ``dim`` outside 1..4.
    """
    if dim < 1 or dim > 4:
        raise UnsupportedDimension(
            f"random stochastic channels support dimensions 1..4, got {dim}")
    if nu < 0.0:
        raise InvalidModel(f"nu must be nonnegative, got {nu!r}")
    gen = rng(seed)
    probs = gen.dirichlet(np.full(dim * dim, float(concentration)))
    weights = {(a, b): nu * probs[a * dim + b]
               for a in range(dim) for b in range(dim)}
    return StochasticChannel(dim, nu, weights)


# ==================================================================
# serialization
# ==================================================================

def channel_to_json(channel: KrausChannel) -> dict:
    return {
        "dim_in": channel.dim_in,
        "dim_out": channel.dim_out,
        "kraus": [matrix_to_json(k) for k in channel.kraus_ops],
    }


def channel_from_json(obj: dict) -> KrausChannel:
    try:
        dim_in, dim_out = int(obj["dim_in"]), int(obj["dim_out"])
        kraus = tuple(matrix_from_json(k) for k in obj["kraus"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed channel object: {exc}") from exc
    return KrausChannel(dim_in, dim_out, kraus)


def choi_to_json(choi: ChoiMatrix) -> dict:
    return {
        "dim_in": choi.dim_in,
        "dim_out": choi.dim_out,
        "matrix": matrix_to_json(choi.matrix),
    }


def choi_from_json(obj: dict) -> ChoiMatrix:
    try:
        dim_in, dim_out = int(obj["dim_in"]), int(obj["dim_out"])
        mat = matrix_from_json(obj["matrix"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed Choi object: {exc}") from exc
    return ChoiMatrix(dim_in, dim_out, mat)


def stochastic_to_json(channel: StochasticChannel) -> dict:
    return {
        "dim": channel.dim,
        "nu": channel.nu,
        "weights": [{"a": a, "b": b, "w": w}
                    for (a, b), w in channel.weights.items()],
    }


def stochastic_from_json(obj: dict) -> StochasticChannel:
    try:
        dim = int(obj["dim"])
        nu = float(obj["nu"])
        weights = {(int(e["a"]), int(e["b"])): float(e["w"])
                   for e in obj["weights"]}
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed stochastic channel object: {exc}") from exc
    return StochasticChannel(dim, nu, weights)
