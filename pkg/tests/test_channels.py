"""Tests for channel representations and stochastic mixtures."""

import json

import numpy as np
import pytest

from qimet import channels as ch
from qimet import linalg
from qimet.errors import (DimensionMismatch, InvalidModel, NotHermitian,
                          NotPSD, UnsupportedDimension)

X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def _random_kraus_set(gen, dim_in, dim_out, count):
    """Trace-preserving channel from a random isometry split into blocks."""
    g = gen.normal(size=(dim_out * count, dim_in)) \
        + 1j * gen.normal(size=(dim_out * count, dim_in))
    q, _ = np.linalg.qr(g)
    return tuple(q[i * dim_out:(i + 1) * dim_out, :] for i in range(count))


# ------------------------------------------------------------------
# Kraus / Choi basics
# ------------------------------------------------------------------

def test_identity_choi_is_maximally_entangled():
    for dim in [2, 3, 4]:
        choi = ch.choi_from_kraus(ch.identity_channel(dim))
        np.testing.assert_allclose(choi.matrix, ch.maximally_entangled(dim),
                                   atol=1e-14)
        assert abs(choi.matrix.trace().real - 1.0) < 1e-14


def test_choi_trace_one_for_trace_preserving():
    gen = linalg.rng(201)
    for dim_in, dim_out, count in [(2, 2, 3), (3, 2, 2), (2, 4, 5)]:
        kraus = _random_kraus_set(gen, dim_in, dim_out, count)
        channel = ch.KrausChannel(dim_in, dim_out, kraus)
        assert ch.is_trace_preserving(channel)
        choi = ch.choi_from_kraus(channel)
        assert abs(choi.matrix.trace().real - 1.0) < 1e-12


def test_choi_kraus_roundtrip_action():
    gen = linalg.rng(202)
    for dim_in, dim_out, count in [(2, 2, 2), (3, 3, 4), (2, 3, 3)]:
        channel = ch.KrausChannel(
            dim_in, dim_out, _random_kraus_set(gen, dim_in, dim_out, count))
        back = ch.kraus_from_choi(ch.choi_from_kraus(channel))
        rho = linalg.random_density(dim_in, gen)
        np.testing.assert_allclose(ch.apply_channel(back, rho),
                                   ch.apply_channel(channel, rho), atol=1e-12)


def test_kraus_rank_counts_independent_operators():
    gen = linalg.rng(203)
    for dim, count in [(2, 1), (2, 3), (3, 5), (4, 2)]:
        channel = ch.KrausChannel(dim, dim,
                                  _random_kraus_set(gen, dim, dim, count))
        assert ch.kraus_rank(channel) == count
        # redundant operators don't raise the rank
        padded = ch.KrausChannel(
            dim, dim,
            tuple(k / np.sqrt(2) for k in channel.kraus_ops) * 2)
        assert ch.kraus_rank(padded) == count
    assert len(ch.kraus_from_choi(
        ch.choi_from_kraus(channel)).kraus_ops) == ch.kraus_rank(channel)


def test_apply_matches_superoperator_route():
    gen = linalg.rng(204)
    channel = ch.KrausChannel(3, 2, _random_kraus_set(gen, 3, 2, 2))
    rho = linalg.random_density(3, gen)
    direct = ch.apply_channel(channel, rho)
    via_super = linalg.uncol(ch.superoperator(channel) @ linalg.col_vec(rho),
                             2, 2)
    np.testing.assert_allclose(direct, via_super, atol=1e-12)


def test_choi_reproduces_action_via_partial_trace():
    # E(rho) = dim_in * Tr_in[ (rho^T ⊗ I) J ]
    gen = linalg.rng(205)
    channel = ch.KrausChannel(2, 3, _random_kraus_set(gen, 2, 3, 2))
    choi = ch.choi_from_kraus(channel)
    rho = linalg.random_density(2, gen)
    lifted = linalg.kron(rho.T, np.eye(3)) @ choi.matrix
    recovered = 2 * linalg.partial_trace(lifted, [2, 3], [1])
    np.testing.assert_allclose(recovered, ch.apply_channel(channel, rho),
                               atol=1e-12)


def test_maximally_entangled_marginals():
    phi = ch.maximally_entangled(3)
    assert abs(np.trace(phi).real - 1.0) < 1e-14
    np.testing.assert_allclose(linalg.partial_trace(phi, [3, 3], [0]),
                               np.eye(3) / 3, atol=1e-14)
    np.testing.assert_allclose(linalg.partial_trace(phi, [3, 3], [1]),
                               np.eye(3) / 3, atol=1e-14)


def test_choi_matrix_validates():
    with pytest.raises(NotHermitian):
        ch.ChoiMatrix(2, 1, np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(DimensionMismatch):
        ch.ChoiMatrix(2, 2, np.eye(3))


def test_choi_difference_arithmetic():
    a = ch.choi_from_kraus(ch.identity_channel(2))
    b = ch.choi_from_kraus(ch.KrausChannel(2, 2, (X,)))
    delta = a - b
    np.testing.assert_allclose(delta.matrix, a.matrix - b.matrix)
    with pytest.raises(DimensionMismatch):
        a - ch.choi_from_kraus(ch.identity_channel(3))


def test_kraus_from_choi_rejects_negative():
    j = ch.choi_from_kraus(ch.identity_channel(2)) \
        - ch.choi_from_kraus(ch.KrausChannel(2, 2, (X,)))
    with pytest.raises(NotPSD):
        ch.kraus_from_choi(j)


# ------------------------------------------------------------------
# shift-and-phase basis
# ------------------------------------------------------------------

def test_weyl_operators_qubit():
    ops = ch.weyl_operators(2)
    np.testing.assert_array_equal(ops[(0, 0)], np.eye(2))
    np.testing.assert_array_equal(ops[(1, 0)], X)
    np.testing.assert_allclose(ops[(0, 1)], Z, atol=1e-15)
    np.testing.assert_allclose(ops[(1, 1)], X @ Z, atol=1e-15)


def test_weyl_operators_orthogonal_unitary():
    for dim in [1, 2, 3, 4]:
        ops = ch.weyl_operators(dim)
        assert len(ops) == dim * dim
        keys = list(ops)
        assert keys == sorted(keys)  # lexicographic order
        for key, u in ops.items():
            np.testing.assert_allclose(u @ u.conj().T, np.eye(dim), atol=1e-13)
        for i, ki in enumerate(keys):
            for kj in keys[i:]:
                ip = np.trace(ops[ki].conj().T @ ops[kj])
                expected = dim if ki == kj else 0.0
                assert abs(ip - expected) < 1e-12


# ------------------------------------------------------------------
# stochastic channels
# ------------------------------------------------------------------

def test_stochastic_channel_basics():
    t = ch.StochasticChannel(2, 1.0, {(0, 0): 0.9, (1, 0): 0.1})
    assert ch.is_trace_preserving(t.as_channel())
    choi = t.choi()
    assert abs(choi.matrix.trace().real - 1.0) < 1e-14
    nu, lam = ch.nu_lambda(t)
    assert abs(nu - 1.0) < 1e-12
    assert abs(lam - 0.9) < 1e-12


def test_stochastic_channel_subnormalized():
    t = ch.StochasticChannel.from_weights(3, {(0, 0): 0.3, (2, 1): 0.2})
    assert abs(t.nu - 0.5) < 1e-15
    nu, lam = ch.nu_lambda(t)
    assert abs(nu - 0.5) < 1e-12
    assert abs(lam - 0.6) < 1e-12
    assert abs(t.choi().matrix.trace().real - 0.5) < 1e-12


def test_stochastic_zero_channel_lambda_convention():
    t = ch.StochasticChannel(2, 0.0, {})
    nu, lam = ch.nu_lambda(t)
    assert nu == 0.0
    assert lam == 1.0


def test_stochastic_channel_validation():
    with pytest.raises(InvalidModel):
        ch.StochasticChannel(2, 1.0, {(0, 0): 0.5})  # sum != nu
    with pytest.raises(InvalidModel):
        ch.StochasticChannel(2, 0.5, {(0, 0): 0.7, (1, 1): -0.2})
    with pytest.raises(InvalidModel):
        ch.StochasticChannel(2, 1.0, {(0, 2): 1.0})  # label out of range


def test_identity_vector_is_choi_eigenvector():
    # col_vec(I) is an eigenvector of the Choi matrix with eigenvalue
    # nu * lambda -- the invariant behind the closed-form extraction
    gen = linalg.rng(210)
    for trial in range(20):
        dim = int(gen.integers(1, 5))
        t = ch.random_stochastic_channel(dim, float(gen.uniform(0.1, 1.0)),
                                         seed=300 + trial)
        v = linalg.col_vec(np.eye(dim))
        nu, lam = ch.nu_lambda(t)
        resid = t.choi().matrix @ v - (nu * lam) * v
        assert np.max(np.abs(resid)) < 1e-12


def test_nu_lambda_matches_stored_weights():
    gen = linalg.rng(211)
    for trial in range(50):
        dim = int(gen.integers(1, 5))
        nu_in = float(gen.uniform(0.0, 1.0))
        t = ch.random_stochastic_channel(dim, nu_in, seed=400 + trial,
                                         concentration=float(gen.uniform(0.3, 3.0)))
        nu, lam = ch.nu_lambda(t)
        assert abs(nu - nu_in) < 1e-10
        assert abs(nu * lam - t.weights.get((0, 0), 0.0)) < 1e-10


def test_nu_lambda_on_plain_channel():
    nu, lam = ch.nu_lambda(ch.identity_channel(3))
    assert abs(nu - 1.0) < 1e-14 and abs(lam - 1.0) < 1e-14
    with pytest.raises(DimensionMismatch):
        ch.nu_lambda(ch.KrausChannel(2, 3, (np.zeros((3, 2)),)))


def test_is_stochastic_kraus():
    nu, lam = ch.is_stochastic_kraus(
        [np.sqrt(0.9) * np.eye(2), np.sqrt(0.1) * X])
    assert abs(nu - 1.0) < 1e-12 and abs(lam - 0.9) < 1e-12
    # orthogonal but non-unitary traceless second operator also qualifies
    nu, lam = ch.is_stochastic_kraus(
        [np.sqrt(0.8) * np.eye(2), np.sqrt(0.4) * (X + Z) / np.sqrt(2)])
    assert abs(nu - 1.2) < 1e-12
    with pytest.raises(InvalidModel):
        ch.is_stochastic_kraus([np.eye(2), np.eye(2) + 0.1 * X])
    with pytest.raises(InvalidModel):
        # traceful operator that is not proportional to the identity
        ch.is_stochastic_kraus([np.diag([1.0, 0.5])])


def test_random_stochastic_channel_deterministic():
    a = ch.random_stochastic_channel(3, 0.7, seed=42)
    b = ch.random_stochastic_channel(3, 0.7, seed=42)
    assert a.weights == b.weights
    c = ch.random_stochastic_channel(3, 0.7, seed=43)
    assert a.weights != c.weights
    assert abs(sum(a.weights.values()) - 0.7) < 1e-12
    assert all(w >= 0 for w in a.weights.values())


def test_random_stochastic_channel_dimension_guard():
    with pytest.raises(UnsupportedDimension):
        ch.random_stochastic_channel(5, 1.0, seed=1)
    with pytest.raises(UnsupportedDimension):
        ch.random_stochastic_channel(0, 1.0, seed=1)


# ------------------------------------------------------------------
# serialization
# ------------------------------------------------------------------

def test_channel_json_roundtrip():
    gen = linalg.rng(220)
    channel = ch.KrausChannel(2, 3, _random_kraus_set(gen, 2, 3, 2))
    text = json.dumps(ch.channel_to_json(channel))
    back = ch.channel_from_json(json.loads(text))
    assert back.dim_in == 2 and back.dim_out == 3
    for k1, k2 in zip(back.kraus_ops, channel.kraus_ops):
        np.testing.assert_array_equal(k1, k2)


def test_stochastic_json_roundtrip_bit_exact():
    t = ch.random_stochastic_channel(3, 0.654321, seed=77)
    text = json.dumps(ch.stochastic_to_json(t))
    back = ch.stochastic_from_json(json.loads(text))
    assert back.dim == t.dim
    assert back.nu == t.nu
    assert back.weights == t.weights  # exact float equality after round trip


def test_choi_json_roundtrip():
    choi = ch.choi_from_kraus(ch.identity_channel(2))
    back = ch.choi_from_json(json.loads(json.dumps(ch.choi_to_json(choi))))
    np.testing.assert_array_equal(back.matrix, choi.matrix)
    assert (back.dim_in, back.dim_out) == (2, 2)


def test_channel_from_json_malformed():
    with pytest.raises(ValueError):
        ch.channel_from_json({"dim_in": 2})
