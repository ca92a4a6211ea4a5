"""Dense linear algebra helpers shared by the rest of the package.

Conventions (fixed once here, relied on everywhere else):

* ``col_vec`` stacks *columns*: ``col_vec(A)[c * rows + r] == A[r, c]``.
  With this choice ``col_vec(A @ B @ C) == kron(C.T, A) @ col_vec(B)`` and
  ``col_vec(A).conj() @ col_vec(B) == trace(A† B)``.
* ``kron`` follows numpy: the *first* factor owns the slow (most significant)
  index.  ``partial_trace`` uses the same subsystem ordering.

All functions accept array-likes and return plain ``numpy`` arrays.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .config import TOL, Tolerances
from .errors import DimensionMismatch, InvalidProjector, NotHermitian, NotPSD

__all__ = [
    "col_vec",
    "uncol",
    "kron",
    "trace_norm",
    "spectral_norm",
    "singular_values",
    "numerical_rank",
    "hermitize",
    "is_hermitian",
    "herm_eig",
    "psd_sqrt",
    "nearest_density",
    "partial_trace",
    "check_density",
    "support_projector",
    "check_projector",
    "random_pure",
    "random_density",
    "rng",
    "matrix_to_json",
    "matrix_from_json",
]


# ==================================================================
# vectorization
# ==================================================================

def col_vec(mat: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization of a matrix.

    ``col_vec(A)[c * rows + r] == A[r, c]`` — the column index is the slow
    (most significant) index of the output vector.
    """
    mat = np.asarray(mat)
    if mat.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {mat.shape}")
    return mat.reshape(-1, order="F")


def uncol(vec: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`col_vec`: reshape a vector back into a matrix."""
    vec = np.asarray(vec).reshape(-1)
    if vec.size != rows * cols:
        raise DimensionMismatch(
            f"vector of length {vec.size} cannot fill a {rows}x{cols} matrix")
    return vec.reshape((rows, cols), order="F")


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor carries the slow index."""
    return np.kron(np.asarray(a), np.asarray(b))


# ==================================================================
# norms, spectra
# ==================================================================

def singular_values(mat: np.ndarray) -> np.ndarray:
    """Singular values of ``mat`` in descending order."""
    return np.linalg.svd(np.asarray(mat), compute_uv=False)


def trace_norm(mat: np.ndarray) -> float:
    """Trace norm (Schatten 1-norm): the sum of singular values."""
    return float(np.sum(singular_values(mat)))


def spectral_norm(mat: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    s = singular_values(mat)
    return float(s[0]) if s.size else 0.0


def numerical_rank(mat: np.ndarray, tol: Tolerances = TOL) -> int:
    """Number of singular values above ``rank_rel * s_max``."""
    s = singular_values(mat)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_rel * s[0]))


# ==================================================================
# Hermitian / PSD machinery
# ==================================================================

def hermitize(mat: np.ndarray) -> np.ndarray:
    """Return the Hermitian part ``(A + A†)/2``."""
    mat = np.asarray(mat)
    return 0.5 * (mat + mat.conj().T)


def is_hermitian(mat: np.ndarray, tol: Tolerances = TOL) -> bool:
    """True if ``max |A - A†| <= tol.herm``."""
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        return False
    return bool(np.max(np.abs(mat - mat.conj().T)) <= tol.herm)


def herm_eig(mat: np.ndarray, tol: Tolerances = TOL):
    """Eigendecomposition of a Hermitian matrix.

    The input is checked against ``tol.herm`` and symmetrized before the
    solve, so the returned eigenvalues are exactly real.  Eigenvalues come
    out in ascending order (numpy convention).

    :return: ``(eigenvalues, eigenvectors)`` with columns as eigenvectors.
    :raises NotHermitian: if ``max |A - A†| > tol.herm``.
    """
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {mat.shape}")
    dev = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
    if dev > tol.herm:
        raise NotHermitian(f"max |A - A†| = {dev:.3e} exceeds {tol.herm:.1e}")
    vals, vecs = np.linalg.eigh(hermitize(mat))
    return vals, vecs


def _clamped_psd_eig(mat: np.ndarray, tol: Tolerances = TOL):
    """Eigendecomposition with small negative eigenvalues clamped to zero.

    The clamp threshold scales with the matrix: ``psd_clamp * max(1, |w|_max)``.
    """
    vals, vecs = herm_eig(mat, tol)
    scale = max(1.0, float(np.max(np.abs(vals))) if vals.size else 0.0)
    floor = -tol.psd_clamp * scale
    if vals.size and vals[0] < floor:
        raise NotPSD(
            f"eigenvalue {vals[0]:.3e} below clamp threshold {floor:.3e}")
    return np.maximum(vals, 0.0), vecs


def psd_sqrt(mat: np.ndarray, tol: Tolerances = TOL) -> np.ndarray:
    """Principal square root of a PSD matrix.

    Symmetrizes the input, clamps eigenvalues in the roundoff band
    ``[-psd_clamp * max(1, ||A||), 0)`` to zero, and raises ``NotPSD`` for
    anything genuinely negative.
    """
    vals, vecs = _clamped_psd_eig(mat, tol)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def nearest_density(mat: np.ndarray, tol: Tolerances = TOL) -> np.ndarray:
    """Project a Hermitian matrix to a density matrix.

    Negative eigenvalues are clipped to zero and the spectrum renormalized to
    unit trace.  Used to repair almost-feasible interior-point iterates into
    exactly valid certificates.
    """
    vals, vecs = herm_eig(mat, tol.with_(herm=np.inf))
    vals = np.maximum(vals, 0.0)
    total = float(np.sum(vals))
    if total <= 0.0:
        # fall back to the maximally mixed state
        dim = mat.shape[0]
        return np.eye(dim, dtype=complex) / dim
    vals /= total
    return (vecs * vals) @ vecs.conj().T


# ==================================================================
# subsystems
# ==================================================================

def partial_trace(mat: np.ndarray, dims: Sequence[int],
                  keep: Iterable[int]) -> np.ndarray:
    """Trace out all subsystems except those in ``keep``.

    :param mat: square matrix on the tensor product of subsystems with the
        given ``dims``, ordered as in :func:`kron` (first factor slow).
    :param dims: subsystem dimensions.
    :param keep: indices (into ``dims``) of the subsystems to keep; the kept
        factors stay in their original relative order.
    """
    mat = np.asarray(mat)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if mat.shape != (total, total):
        raise DimensionMismatch(
            f"matrix shape {mat.shape} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionMismatch(f"keep indices {keep} out of range")

    n = len(dims)
    tensor = mat.reshape(dims + dims)
    # trace out the complement, highest index first so positions stay valid
    for idx in reversed(range(n)):
        if idx not in keep:
            tensor = np.trace(tensor, axis1=idx, axis2=idx + n)
            n -= 1
    kept = int(np.prod([dims[k] for k in keep])) if keep else 1
    return tensor.reshape((kept, kept))


# ==================================================================
# states and projectors
# ==================================================================

def check_density(rho: np.ndarray, dim: int | None = None,
                  tol: Tolerances = TOL) -> np.ndarray:
    """Validate a density matrix and return it as a complex array.

    Checks Hermiticity (``tol.herm``), positivity up to the clamp band, and
    unit trace (``tol.trace_one``).
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise DimensionMismatch(
            f"expected a {dim}x{dim} density matrix, got {rho.shape}")
    _clamped_psd_eig(rho, tol)  # raises NotHermitian / NotPSD
    tr = float(rho.trace().real)
    if abs(tr - 1.0) > tol.trace_one:
        raise ValueError(f"trace {tr!r} deviates from 1 beyond {tol.trace_one}")
    return rho


def support_projector(rho: np.ndarray, tol: Tolerances = TOL) -> np.ndarray:
    """Orthogonal projector onto the support (range) of a PSD matrix.

    Eigenvalues below ``rank_rel * w_max`` count as zero.
    """
    vals, vecs = _clamped_psd_eig(rho, tol)
    top = float(vals[-1]) if vals.size else 0.0
    if top <= 0.0:
        return np.zeros_like(np.asarray(rho, dtype=complex))
    cols = vecs[:, vals > tol.rank_rel * top]
    return cols @ cols.conj().T


def check_projector(pi: np.ndarray, tol: Tolerances = TOL) -> np.ndarray:
    """Validate an orthogonal projector (Hermitian and idempotent)."""
    pi = np.asarray(pi, dtype=complex)
    if pi.ndim != 2 or pi.shape[0] != pi.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {pi.shape}")
    if np.max(np.abs(pi - pi.conj().T)) > tol.projector:
        raise InvalidProjector("projector is not Hermitian")
    if np.max(np.abs(pi @ pi - pi)) > tol.projector:
        raise InvalidProjector("projector is not idempotent")
    return pi


# ==================================================================
# randomness
# ==================================================================

def rng(seed: int) -> np.random.Generator:
    """Counter-based generator (Philox) for reproducible, splittable streams.

    Every random operation in the package takes an explicit seed and derives
    its stream through this function, so identical seeds give bit-identical
    results regardless of call order elsewhere.
    """
    return np.random.Generator(np.random.Philox(seed))


def random_pure(dim: int, gen: np.random.Generator) -> np.ndarray:
    """Haar-random pure state vector of the given dimension."""
    v = gen.normal(size=dim) + 1j * gen.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, gen: np.random.Generator,
                   rank: int | None = None) -> np.ndarray:
    """Random density matrix (Hilbert-Schmidt-like ensemble of given rank)."""
    if rank is None:
        rank = dim
    g = gen.normal(size=(dim, rank)) + 1j * gen.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / rho.trace().real


# ==================================================================
# serialization
# ==================================================================

def matrix_to_json(mat: np.ndarray) -> dict:
    """Encode a complex matrix as ``{"rows", "cols", "re", "im"}``."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {mat.shape}")
    return {
        "rows": int(mat.shape[0]),
        "cols": int(mat.shape[1]),
        "re": mat.real.tolist(),
        "im": mat.imag.tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    """Decode a matrix produced by :func:`matrix_to_json`."""
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise ValueError(
            f"matrix entries have shape {re.shape}/{im.shape}, "
            f"expected ({rows}, {cols})")
    return re + 1j * im
