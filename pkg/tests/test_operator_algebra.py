import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from qde import operator_algebra as oa
from qde.errors import DimMismatch, NotHermitian


def random_hermitian(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


seeds = st.integers(0, 2**32 - 1)
dims = st.sampled_from([2, 3, 4, 8])


def test_pauli_algebra():
    assert np.allclose(oa.SX @ oa.SY, 1j * oa.SZ)
    assert np.allclose(oa.commutator(oa.SX, oa.SY), 2j * oa.SZ)
    assert np.allclose(oa.SP + oa.SM, oa.SX)


@given(seeds, dims, st.floats(-3, 3))
@settings(max_examples=40, deadline=None)
def test_propagator_matches_expm(seed, n, t):
    h = random_hermitian(seed, n)
    u = oa.propagator(h, t)
    assert oa.unitarity_error(u) < 1e-12
    assert np.allclose(u, expm(-1j * h * t), atol=1e-10)


@given(seeds, dims)
@settings(max_examples=30, deadline=None)
def test_eig_reconstructs(seed, n):
    h = random_hermitian(seed, n)
    spec = oa.hermitian_eig(h)
    assert np.all(np.diff(spec.eigenvalues) >= 0)
    assert np.allclose(spec.reconstruct(), h, atol=1e-12)


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitian):
        oa.check_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


def test_embed_order():
    # subsystem 0 is the most significant factor
    op = oa.embed(oa.SZ, 0, (2, 2, 2))
    assert np.allclose(np.diag(op).real, [1, 1, 1, 1, -1, -1, -1, -1])
    with pytest.raises(DimMismatch):
        oa.embed(oa.SZ, 1, (2, 3))


@given(seeds)
@settings(max_examples=25, deadline=None)
def test_partial_trace_of_product(seed):
    rng = np.random.default_rng(seed)
    states = []
    for d in (2, 3, 2):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v /= np.linalg.norm(v)
        states.append(np.outer(v, v.conj()))
    rho = oa.kron(*states)
    assert np.allclose(oa.partial_trace(rho, (2, 3, 2), [1]), states[1])
    assert np.allclose(oa.partial_trace(rho, (2, 3, 2), [0, 2]), oa.kron(states[0], states[2]))


@given(seeds, st.floats(-np.pi, np.pi))
@settings(max_examples=30, deadline=None)
def test_phase_distance_ignores_global_phase(seed, phi):
    u = oa.propagator(random_hermitian(seed, 4), 1.0)
    assert oa.phase_distance(np.exp(1j * phi) * u, u) < 1e-12
    assert oa.phase_distance(u, -u) < 1e-12


def test_phase_distance_separates():
    assert oa.phase_distance(oa.SX, oa.SZ) == pytest.approx(2.0)
