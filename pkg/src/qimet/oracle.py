"""Certified diamond-norm computation for Hermiticity-preserving maps.

The diamond norm of a Hermiticity-preserving map with (unnormalized) Choi
operator ``C = dim_in * J`` is the optimum of the standard semidefinite
program

    minimize   (1/2)||Tr_out Y0||_inf + (1/2)||Tr_out Y1||_inf
    subject to [[Y0, -C], [-C†, Y1]] >= 0.

For Hermitian ``C`` (the only case this package needs: differences of Choi
states) the program is invariant under swapping the two blocks, so an optimal
point has ``Y0 = Y1 = Y`` and the block constraint splits under the rotation
``(u, v) -> ((u+v)/sqrt(2), (u-v)/sqrt(2))`` into ``Y >= C`` and ``Y >= -C``.
This module therefore solves the reduced program

    minimize   t
    subject to Y - C >= 0,   Y + C >= 0,   t*I - Tr_out(Y) >= 0

with a dense primal-dual path-following interior-point method using the
Nesterov-Todd scaling, specialized to the three diagonal blocks above.
Hermitian matrix variables are realified through an orthonormal Hermitian
basis, giving a linear system of side ``n**2 + 1`` per iteration
(``n = dim_in * dim_out``).

Certification does not trust convergence.  At every iterate two *exactly
feasible* bounds are extracted:

* upper bound — the iterate ``Y`` satisfies ``Y >= ±C`` by construction
  (line searches keep the slacks positive definite), and for any such ``Y``
  and any primal-feasible pair, ``<C, X> <= lambda_max(Tr_out Y)``;
* lower bound — for *any* density ``rho`` on the input factor,
  ``max { <C, X> : -rho ⊗ I <= X <= rho ⊗ I } = || (sqrt(rho) ⊗ I) C
  (sqrt(rho) ⊗ I) ||_1``, which is a valid lower bound on the diamond norm;
  ``rho`` is taken as the input-factor block of the dual iterate, repaired
  to an exact density.

The reported value is the midpoint of the best bounds; the call succeeds
when their gap is at most the requested tolerance.

A see-saw hill climb over pure reference-assisted inputs provides an
independent lower bound used as a solver sanity check.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .channels import ChoiMatrix
from .errors import DimensionTooLarge, Unconverged
from .linalg import (col_vec, hermitize, kron, nearest_density,
                     partial_trace, psd_sqrt, rng, trace_norm, uncol)

__all__ = [
    "DiamondNormResult",
    "diamond_norm",
    "diamond_lower_hillclimb",
    "diamond_lower_hillclimb_state",
    "result_to_json",
]

#: Hard cap on the Choi side dimension accepted by the dense solver.
MAX_CHOI_SIDE = 144


@dataclass(frozen=True)
class DiamondNormResult:
    """Certified diamond-norm value.

    ``primal_bound <= value <= dual_bound`` always holds, with both bounds
    produced by exactly feasible points of the underlying semidefinite
    program; ``gap = dual_bound - primal_bound``.
    """

    value: float
    primal_bound: float
    dual_bound: float
    gap: float
    iterations: int


def result_to_json(result: DiamondNormResult) -> dict:
    return {
        "value": result.value,
        "primal_bound": result.primal_bound,
        "dual_bound": result.dual_bound,
        "gap": result.gap,
        "iterations": result.iterations,
    }


# ==================================================================
# orthonormal Hermitian basis bookkeeping
# ==================================================================
#
# Basis of the real vector space of n x n Hermitian matrices, ordered as:
# n diagonal elements E_pp, then (E_pq + E_qp)/sqrt(2) for p < q (row-major),
# then i(E_qp - E_pq)/sqrt(2) for p < q.  Each element has at most two
# nonzero entries; the (flat column-stacked index, coefficient) pairs are
# precomputed so Schur-complement assembly can use plain fancy indexing.

class _HermBasis:
    def __init__(self, n: int):
        self.n = n
        self.m = n * n
        p, q = np.triu_indices(n, k=1)
        s = 1.0 / np.sqrt(2.0)
        diag = np.arange(n)
        # first support entry of each basis element: (row r1, col c1, w1)
        self.r1 = np.concatenate([diag, p, p])
        self.c1 = np.concatenate([diag, q, q])
        self.w1 = np.concatenate([np.ones(n), np.full(p.size, s),
                                  np.full(p.size, -1j * s)]).astype(complex)
        # second support entry (duplicate of the first for diagonal elements,
        # with zero weight so it contributes nothing)
        self.r2 = np.concatenate([diag, q, q])
        self.c2 = np.concatenate([diag, p, p])
        self.w2 = np.concatenate([np.zeros(n), np.full(p.size, s),
                                  np.full(p.size, 1j * s)]).astype(complex)
        self._p, self._q = p, q

    def to_matrix(self, y: np.ndarray) -> np.ndarray:
        """Hermitian matrix with coordinate vector ``y``."""
        n, p, q = self.n, self._p, self._q
        k = p.size
        out = np.zeros((n, n), dtype=complex)
        out[np.arange(n), np.arange(n)] = y[:n]
        upper = (y[n:n + k] - 1j * y[n + k:]) / np.sqrt(2.0)
        out[p, q] = upper
        out[q, p] = upper.conj()
        return out

    def to_coords(self, mat: np.ndarray) -> np.ndarray:
        """Coordinates ``<H_k, M>`` of a Hermitian matrix (real vector)."""
        n, p, q = self.n, self._p, self._q
        s = np.sqrt(2.0)
        return np.concatenate([
            np.diag(mat).real,
            s * mat[p, q].real,
            -s * mat[p, q].imag,
        ])


@lru_cache(maxsize=None)
def _herm_basis(n: int) -> _HermBasis:
    return _HermBasis(n)


def _schur_yy(basis: _HermBasis, a: np.ndarray) -> np.ndarray:
    """Matrix ``M[k, l] = trace(H_k A H_l A)`` for Hermitian ``A``.

    Uses ``trace(H A H' A) = sum over support entries`` with
    ``K[(r,c), (r',c')] = A[c', c] * A[r, r']`` gathered directly from ``A``,
    never materializing the n² x n² tensor.
    """
    out = np.zeros((basis.m, basis.m))
    for rs, cs, ws in ((basis.r1, basis.c1, basis.w1),
                       (basis.r2, basis.c2, basis.w2)):
        for rt, ct, wt in ((basis.r1, basis.c1, basis.w1),
                           (basis.r2, basis.c2, basis.w2)):
            coeff = np.outer(ws.conj(), wt)
            out += (coeff * a[ct[None, :], cs[:, None]]
                    * a[rs[:, None], rt[None, :]]).real
    return out


@lru_cache(maxsize=None)
def _traced_basis(dim_in: int, dim_out: int) -> np.ndarray:
    """Columns ``col_vec(Tr_out H_k)`` for the full-space Hermitian basis.

    Shape ``(dim_in**2, n**2)`` complex; column ``k`` encodes the partial
    trace of basis element ``H_k`` over the output factor.
    """
    n = dim_in * dim_out
    basis = _herm_basis(n)
    q = np.zeros((dim_in * dim_in, basis.m), dtype=complex)
    for rows, cols, ws in ((basis.r1, basis.c1, basis.w1),
                           (basis.r2, basis.c2, basis.w2)):
        ra, rb = rows // dim_out, rows % dim_out
        ca, cb = cols // dim_out, cols % dim_out
        keep = rb == cb
        flat = ca[keep] * dim_in + ra[keep]
        np.add.at(q, (flat, np.nonzero(keep)[0]), ws[keep])
    return q


# ==================================================================
# interior-point machinery
# ==================================================================

def _nt_scaling(s: np.ndarray, z: np.ndarray):
    """Inverse Nesterov-Todd scaling point: W^{-1} with W Z W = S."""
    ws, us = np.linalg.eigh(hermitize(s))
    ws = np.maximum(ws, 1e-300)
    root = (us * np.sqrt(ws)) @ us.conj().T
    inv_root = (us * (1.0 / np.sqrt(ws))) @ us.conj().T
    g = hermitize(root @ z @ root)
    wg, ug = np.linalg.eigh(g)
    wg = np.maximum(wg, 1e-300)
    w_inv = inv_root @ (ug * np.sqrt(wg)) @ ug.conj().T @ inv_root
    return hermitize(w_inv)


def _max_step(s: np.ndarray, ds: np.ndarray) -> float:
    """Largest alpha with S + alpha*dS positive definite (inf if unbounded)."""
    chol = np.linalg.cholesky(hermitize(s))
    t = scipy.linalg.solve_triangular(chol, ds, lower=True)
    t = scipy.linalg.solve_triangular(chol, t.conj().T, lower=True)
    lam = float(np.linalg.eigvalsh(hermitize(t)).min())
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def _certificates(c: np.ndarray, y: np.ndarray, z3: np.ndarray,
                  dim_in: int, dim_out: int):
    """Exactly feasible bounds from the current iterate.

    Upper: ``lambda_max(Tr_out Y)`` is valid whenever ``Y >= ±C``, which the
    line search maintains.  Lower: ``||(sqrt(rho) ⊗ I) C (sqrt(rho) ⊗ I)||_1``
    is valid for any density ``rho``.
    """
    upper = float(np.linalg.eigvalsh(
        hermitize(partial_trace(y, [dim_in, dim_out], [0]))).max())
    rho = nearest_density(hermitize(z3))
    g = kron(psd_sqrt(rho), np.eye(dim_out))
    lower = trace_norm(g @ c @ g)
    return lower, upper


def _solve_sdp(c: np.ndarray, dim_in: int, dim_out: int, tol: float,
               max_iterations: int):
    """Path-following solve of the reduced program; returns
    ``(lower, upper, iterations)`` with certified bounds."""
    n = dim_in * dim_out
    basis = _herm_basis(n)
    q_traced = _traced_basis(dim_in, dim_out)
    m_y = basis.m
    n_total = 2 * n + dim_in
    eye_in = np.eye(dim_in, dtype=complex)
    eye_out = np.eye(dim_out, dtype=complex)

    # exactly feasible start: scaled identity blocks
    eta = 1.25  # > ||C||_2 = 1 after normalization
    y = eta * np.eye(n, dtype=complex)
    t = eta * dim_out + 1.0
    z1 = np.eye(n, dtype=complex) / (2.0 * dim_in)
    z2 = z1.copy()
    z3 = eye_in / dim_in

    best_lower, best_upper = 0.0, np.inf
    iterations = 0

    def record(lo, up):
        nonlocal best_lower, best_upper
        best_lower = max(best_lower, lo)
        best_upper = min(best_upper, up)

    for iterations in range(1, max_iterations + 1):
        s1 = hermitize(y - c)
        s2 = hermitize(y + c)
        s3 = hermitize(t * eye_in - partial_trace(y, [dim_in, dim_out], [0]))

        record(*_certificates(c, y, z3, dim_in, dim_out))
        if best_upper - best_lower <= tol:
            return best_lower, best_upper, iterations - 1

        try:
            mu = (np.vdot(s1, z1).real + np.vdot(s2, z2).real
                  + np.vdot(s3, z3).real) / n_total
            if mu <= 0:
                break

            wi1, wi2, wi3 = (_nt_scaling(s1, z1), _nt_scaling(s2, z2),
                             _nt_scaling(s3, z3))

            # Schur complement of the Newton system in the NT scaling
            m_mat = np.empty((m_y + 1, m_y + 1))
            m_mat[:m_y, :m_y] = _schur_yy(basis, wi1) + _schur_yy(basis, wi2)
            k3 = np.kron(wi3.T, wi3)
            m_mat[:m_y, :m_y] += (q_traced.conj().T @ k3 @ q_traced).real
            col = -basis.to_coords(kron(wi3 @ wi3, eye_out))
            m_mat[:m_y, m_y] = col
            m_mat[m_y, :m_y] = col
            m_mat[m_y, m_y] = float(np.trace(wi3 @ wi3).real)
            chol = scipy.linalg.cho_factor(m_mat, check_finite=False)

            def solve_direction(rhs):
                dx = scipy.linalg.cho_solve(chol, rhs, check_finite=False)
                dy_mat = basis.to_matrix(dx[:m_y])
                ds1 = dy_mat
                ds2 = dy_mat
                ds3 = dx[m_y] * eye_in \
                    - partial_trace(dy_mat, [dim_in, dim_out], [0])
                return dx, (ds1, ds2, ds3)

            rhs_affine = np.zeros(m_y + 1)
            rhs_affine[m_y] = -1.0
            dx_a, ds_a = solve_direction(rhs_affine)
            dz_a = tuple(hermitize(-z - wi @ ds @ wi) for z, wi, ds in
                         ((z1, wi1, ds_a[0]), (z2, wi2, ds_a[1]),
                          (z3, wi3, ds_a[2])))
            alpha_p = min(1.0, 0.99 * min(_max_step(s, ds)
                                          for s, ds in zip((s1, s2, s3), ds_a)))
            alpha_d = min(1.0, 0.99 * min(_max_step(z, dz)
                                          for z, dz in zip((z1, z2, z3), dz_a)))
            mu_affine = sum(np.vdot(s + alpha_p * ds, z + alpha_d * dz).real
                            for s, ds, z, dz in
                            ((s1, ds_a[0], z1, dz_a[0]),
                             (s2, ds_a[1], z2, dz_a[1]),
                             (s3, ds_a[2], z3, dz_a[2]))) / n_total
            sigma = min(max((max(mu_affine, 0.0) / mu) ** 3, 1e-6), 1.0 - 1e-6)

            # centering-corrector step toward sigma * mu
            s_invs = []
            for s in (s1, s2, s3):
                ch = np.linalg.cholesky(s)
                inv = scipy.linalg.solve_triangular(
                    ch, np.eye(s.shape[0], dtype=complex), lower=True)
                s_invs.append(hermitize(inv.conj().T @ inv))
            rhs = sigma * mu * np.concatenate([
                basis.to_coords(s_invs[0] + s_invs[1]
                                - kron(s_invs[2], eye_out)),
                [float(np.trace(s_invs[2]).real)],
            ])
            rhs[m_y] -= 1.0
            dx, ds = solve_direction(rhs)
            dz = tuple(hermitize(sigma * mu * si - z - wi @ d @ wi)
                       for si, z, wi, d in
                       ((s_invs[0], z1, wi1, ds[0]),
                        (s_invs[1], z2, wi2, ds[1]),
                        (s_invs[2], z3, wi3, ds[2])))

            tau = 0.9 if mu > 1e-4 else 0.98
            alpha_p = min(1.0, tau * min(_max_step(s, d)
                                         for s, d in zip((s1, s2, s3), ds)))
            alpha_d = min(1.0, tau * min(_max_step(z, d)
                                         for z, d in zip((z1, z2, z3), dz)))
            if min(alpha_p, alpha_d) < 1e-12:
                break

            y = hermitize(y + alpha_p * basis.to_matrix(dx[:m_y]))
            t = t + alpha_p * dx[m_y]
            z1 = hermitize(z1 + alpha_d * dz[0])
            z2 = hermitize(z2 + alpha_d * dz[1])
            z3 = hermitize(z3 + alpha_d * dz[2])
        except np.linalg.LinAlgError:
            break

    # final certificates from the last completed state
    record(*_certificates(c, y, z3, dim_in, dim_out))
    return best_lower, best_upper, iterations


def diamond_norm(delta: ChoiMatrix, tol: float = 1e-6,
                 max_iterations: int = 200) -> DiamondNormResult:
    """Diamond norm of the Hermiticity-preserving map with Choi state ``delta``.

    :param delta: Choi state (Hermitian; typically a difference of channel
        Choi states).
    :param tol: requested absolute certification gap on the returned value.
    :return: result with ``gap <= tol`` on success.
    :raises DimensionTooLarge: if the Choi side exceeds ``MAX_CHOI_SIDE``.
    :raises Unconverged: if the certified gap is still above ``tol`` after
        ``max_iterations`` (the partial result rides on the exception).
    """
    n = delta.dim_in * delta.dim_out
    if n > MAX_CHOI_SIDE:
        raise DimensionTooLarge(
            f"Choi side {n} exceeds the dense-solver limit {MAX_CHOI_SIDE}")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")
    # ChoiMatrix guarantees Hermiticity; symmetrize residual roundoff
    c = hermitize(np.asarray(delta.matrix, dtype=complex)) * delta.dim_in

    scale = float(np.linalg.norm(c, 2)) if n > 1 else abs(float(c[0, 0].real))
    if scale == 0.0:
        return DiamondNormResult(0.0, 0.0, 0.0, 0.0, 0)
    if n == 1:
        v = abs(float(c[0, 0].real))
        return DiamondNormResult(v, v, v, 0.0, 0)

    lower, upper, iterations = _solve_sdp(
        c / scale, delta.dim_in, delta.dim_out, tol / scale, max_iterations)
    lower *= scale
    upper = min(upper * scale, _trivial_upper(c))
    lower = min(lower, upper)  # roundoff guard; bounds stay ordered
    gap = max(upper - lower, 0.0)
    result = DiamondNormResult(0.5 * (lower + upper), lower, upper,
                               gap, iterations)
    if gap > tol:
        raise Unconverged(
            f"certified gap {gap:.3e} exceeds tolerance {tol:.1e} "
            f"after {iterations} iterations", result)
    return result


def _trivial_upper(c: np.ndarray) -> float:
    """Cheap always-valid upper bound: ||Delta||_diamond <= ||C||_1."""
    return trace_norm(c)


# ==================================================================
# hill-climbing lower bound
# ==================================================================

def _signed_kraus(delta: ChoiMatrix):
    """Decompose a Hermitian Choi state as a signed sum of Kraus actions:
    ``Delta(rho) = sum_k s_k L_k rho L_k†`` with ``s_k = ±1``."""
    vals, vecs = np.linalg.eigh(hermitize(np.asarray(delta.matrix)))
    top = float(np.max(np.abs(vals))) if vals.size else 0.0
    ops, signs = [], []
    for w, v in zip(vals, vecs.T):
        if abs(w) > 1e-14 * max(top, 1.0):
            ops.append(np.sqrt(delta.dim_in * abs(w))
                       * uncol(v, delta.dim_out, delta.dim_in))
            signs.append(1.0 if w >= 0 else -1.0)
    return ops, signs


def _hillclimb_from(psi, lifted, signs, dim_in, dim_out, max_rounds=200):
    """Locally maximize ``||(I ⊗ Delta)(psi psi†)||_1`` by alternating the
    optimal distinguishing observable and the optimal input state."""
    value = -np.inf
    for _ in range(max_rounds):
        cols = [op @ psi for op in lifted]
        omega = np.zeros((dim_in * dim_out, dim_in * dim_out), dtype=complex)
        for s, col in zip(signs, cols):
            omega += s * np.outer(col, col.conj())
        vals, vecs = np.linalg.eigh(hermitize(omega))
        new_value = float(np.sum(np.abs(vals)))
        if new_value - value <= 1e-13 * max(1.0, abs(new_value)):
            value = max(value, new_value)
            break
        value = new_value
        p = (vecs * np.where(vals >= 0.0, 1.0, -1.0)) @ vecs.conj().T
        g = np.zeros((dim_in * dim_in, dim_in * dim_in), dtype=complex)
        for s, op in zip(signs, lifted):
            g += s * (op.conj().T @ p @ op)
        gvals, gvecs = np.linalg.eigh(hermitize(g))
        psi = gvecs[:, -1]
    return value, psi


def diamond_lower_hillclimb_state(delta: ChoiMatrix, restarts: int = 20,
                                  seed: int = 0):
    """Hill-climbed lower bound on the diamond norm, returning
    ``(value, psi)`` with ``psi`` the best pure input found on
    (reference ⊗ input), reference dimension equal to the input dimension.

    The value is always a true lower bound; it is monotone nondecreasing in
    ``restarts`` for a fixed seed and deterministic per seed.
    """
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    din, dout = delta.dim_in, delta.dim_out
    ops, signs = _signed_kraus(delta)
    if not ops:
        return 0.0, col_vec(np.eye(din, dtype=complex)) / np.sqrt(din)
    eye_ref = np.eye(din, dtype=complex)
    lifted = [kron(eye_ref, op) for op in ops]

    gen = rng(seed)
    starts = [col_vec(eye_ref) / np.sqrt(din)]
    for _ in range(restarts):
        v = gen.normal(size=din * din) + 1j * gen.normal(size=din * din)
        starts.append(v / np.linalg.norm(v))

    best_value, best_psi = -np.inf, starts[0]
    for psi in starts:
        value, opt = _hillclimb_from(psi, lifted, signs, din, dout)
        if value > best_value:
            best_value, best_psi = value, opt
    return max(best_value, 0.0), best_psi


def diamond_lower_hillclimb(delta: ChoiMatrix, restarts: int = 20,
                            seed: int = 0) -> float:
    """Lower bound on ``||Delta||_diamond`` by see-saw over pure inputs."""
    value, _ = diamond_lower_hillclimb_state(delta, restarts, seed)
    return value
