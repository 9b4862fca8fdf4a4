import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncsim.quantum import (
    I2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DimensionMismatch,
    InvalidDecomposition,
    InvalidState,
    PovmDecomposition,
    ProjectiveDecomposition,
    QuantumState,
    ZeroProbabilityOutcome,
    allclose,
    born_probabilities,
    collapse,
    commutes,
    projector,
    random_hermitian,
    tensor,
    total_variation,
    unitary_from_hermitian,
)


def random_unitary(dim, seed):
    rng = np.random.default_rng(seed)
    return unitary_from_hermitian(random_hermitian(dim, rng), 2.0)


def random_state(dim, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return QuantumState.mixed(rho / np.trace(rho).real)


def test_pauli_algebra():
    assert allclose(SIGMA_X @ SIGMA_Y, 1j * SIGMA_Z)
    assert not commutes(SIGMA_X, SIGMA_Z)
    assert commutes(tensor(SIGMA_Z, SIGMA_X), tensor(SIGMA_X, SIGMA_Z))
    assert tensor(I2, I2, I2).shape == (8, 8)


def test_unnormalized_amplitudes_rejected():
    with pytest.raises(InvalidState):
        QuantumState.pure([1, 1j])


def test_pure_state():
    s = QuantumState.pure(np.array([1, 1j]) / np.sqrt(2))
    assert s.is_pure
    assert np.isclose(np.trace(s.rho).real, 1.0)
    assert allclose(s.rho, s.rho.conj().T)


@pytest.mark.parametrize("rho", [
    np.array([[1, 0], [0, 1]]),           # trace 2
    np.array([[1.5, 0], [0, -0.5]]),      # negative eigenvalue
    np.array([[0.5, 0.5j], [0.5, 0.5]]),  # not Hermitian
])
def test_invalid_states_rejected(rho):
    with pytest.raises(InvalidState):
        QuantumState.mixed(rho)


def test_zero_vector_rejected():
    with pytest.raises(InvalidState):
        QuantumState.pure([0, 0])


def test_decomposition_validation():
    with pytest.raises(InvalidDecomposition):
        ProjectiveDecomposition((projector([1, 0]),))
    with pytest.raises(InvalidDecomposition):
        ProjectiveDecomposition((projector([1, 0]), projector([1, 1])))
    with pytest.raises(InvalidDecomposition):
        PovmDecomposition((np.eye(2) * 0.5, np.eye(2) * 0.6))


def test_from_observable_groups_degenerate_eigenvalues():
    d = ProjectiveDecomposition.from_observable(tensor(SIGMA_Z, SIGMA_Z))
    assert len(d) == 2
    assert sorted(d.labels) == [-1.0, 1.0]
    assert all(np.isclose(np.trace(p).real, 2) for p in d.projectors)


def test_born_on_bell_state(phi_plus):
    zz = ProjectiveDecomposition.from_basis(np.eye(4))
    assert np.allclose(born_probabilities(phi_plus, zz), [0.5, 0, 0, 0.5])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        born_probabilities(QuantumState.pure([1, 0]), ProjectiveDecomposition.from_basis(np.eye(3)))


def test_collapse_zero_probability():
    s = QuantumState.pure([1, 0])
    with pytest.raises(ZeroProbabilityOutcome):
        collapse(s, ProjectiveDecomposition.from_basis(np.eye(2)), 1)


def test_luders_collapse_on_povm():
    e0 = np.diag([0.75, 0.25]).astype(complex)
    povm = PovmDecomposition((e0, np.eye(2) - e0))
    after = collapse(QuantumState.pure(np.array([1, 1]) / np.sqrt(2)), povm, 0)
    assert np.isclose(np.trace(after.rho).real, 1.0)
    assert after.rho[0, 0].real > 0.5


@settings(max_examples=40, deadline=None)
@given(dim=st.integers(2, 6), seed=st.integers(0, 2**32 - 1))
def test_born_invariants(dim, seed):
    u = random_unitary(dim, seed)
    basis = ProjectiveDecomposition.from_basis(u.T)
    state = random_state(dim, seed + 1)
    p = born_probabilities(state, basis)
    assert np.all(p >= 0)
    assert np.isclose(p.sum(), 1.0)
    # unitary covariance: rotating state and basis together changes nothing
    v = random_unitary(dim, seed + 2)
    rotated = QuantumState.mixed(v @ state.rho @ v.conj().T)
    assert np.allclose(born_probabilities(rotated, basis.conjugated(v)), p, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(dim=st.integers(2, 5), seed=st.integers(0, 2**32 - 1))
def test_repeated_measurement_is_certain(dim, seed):
    basis = ProjectiveDecomposition.from_basis(random_unitary(dim, seed).T)
    state = random_state(dim, seed + 3)
    j = int(np.argmax(born_probabilities(state, basis)))
    after = collapse(state, basis, j)
    assert np.isclose(born_probabilities(after, basis)[j], 1.0)


def test_total_variation():
    assert total_variation([1, 0], [0, 1]) == 1.0
    assert total_variation([0.5, 0.5], [0.5, 0.5]) == 0.0


def test_tensor_examples():
    assert allclose(tensor(I2, I2), np.eye(4))
    zx = tensor(SIGMA_Z, SIGMA_X)
    assert np.allclose(np.sort(np.linalg.eigvalsh(zx)), [-1, -1, 1, 1])
    assert allclose(tensor(SIGMA_Z, I2) @ tensor(I2, SIGMA_X), zx)


def test_collapse_examples(phi_plus):
    zz = ProjectiveDecomposition.from_observable(tensor(SIGMA_Z, SIGMA_Z))
    xx = ProjectiveDecomposition.from_observable(tensor(SIGMA_X, SIGMA_X))
    plus = zz.labels.index(1.0)
    after = collapse(phi_plus, zz, plus)
    assert born_probabilities(after, xx)[xx.labels.index(1.0)] == pytest.approx(1.0)

    v = np.array([0.6, 0.8j])
    rank1 = ProjectiveDecomposition.from_basis([v, [0.8, -0.6j]])
    out = collapse(QuantumState.pure([1, 0]), rank1, 0)
    assert allclose(out.rho, np.outer(v, v.conj()), 1e-12)


def test_povm_of_projectors_matches_projective(phi_plus):
    d = ProjectiveDecomposition.from_observable(tensor(SIGMA_Z, SIGMA_X))
    p = PovmDecomposition(d.projectors)
    assert np.array_equal(born_probabilities(phi_plus, d), born_probabilities(phi_plus, p))


def test_maximally_mixed_triad():
    q, _ = np.linalg.qr(np.random.default_rng(1).normal(size=(3, 3)))
    p = born_probabilities(QuantumState.maximally_mixed(3), ProjectiveDecomposition.from_basis(q.T))
    assert np.allclose(p, 1 / 3)
