import numpy as np
import pytest

from g4vspec.spinops import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    eigh,
    expectation,
    kron,
    spin_matrices,
)

from conftest import random_hermitian

SPINS = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5]


def test_spin_half_matches_pauli():
    ops = spin_matrices(0.5)
    assert np.allclose(ops.z, np.diag([0.5, -0.5]))
    assert np.allclose(ops.x, 0.5 * SIGMA_X)
    assert np.allclose(ops.y, 0.5 * SIGMA_Y)


def test_spin_zero_is_one_by_one_zero():
    ops = spin_matrices(0.0)
    for m in (ops.x, ops.y, ops.z, ops.sq):
        assert m.shape == (1, 1)
        assert np.allclose(m, 0.0)


def test_spin_nine_half_casimir_diagonal():
    ops = spin_matrices(4.5)
    assert ops.dim == 10
    # product computed explicitly, not taken from the .sq field
    explicit = ops.x @ ops.x + ops.y @ ops.y + ops.z @ ops.z
    assert np.allclose(np.diag(explicit), 24.75)
    assert np.allclose(explicit, ops.sq)


def test_spin_rejects_non_half_integer():
    with pytest.raises(ValueError):
        spin_matrices(0.3)
    with pytest.raises(ValueError):
        spin_matrices(-0.5)


@pytest.mark.parametrize("i", SPINS)
def test_commutators_and_casimir(i):
    ops = spin_matrices(i)
    for a, b, c in ((ops.x, ops.y, ops.z), (ops.y, ops.z, ops.x), (ops.z, ops.x, ops.y)):
        assert np.abs(a @ b - b @ a - 1j * c).max() < 1e-12
    assert np.abs(ops.sq - i * (i + 1.0) * np.eye(ops.dim)).max() < 1e-12


def test_kron_identities():
    assert np.allclose(kron(IDENTITY_2, IDENTITY_2), np.eye(4))
    assert np.allclose(kron(SIGMA_Z, SIGMA_Z), np.diag([1, -1, -1, 1]))


def test_kron_sign_rule_spin_nine_half():
    # diag of (sz x sz) x Iz enumerated by the sign rule s1*s2*m
    iz = spin_matrices(4.5).z
    got = np.diag(kron(SIGMA_Z, SIGMA_Z, iz)).real
    ms = 4.5 - np.arange(10)
    expected = [s1 * s2 * m for s1 in (1, -1) for s2 in (1, -1) for m in ms]
    assert np.allclose(got, expected)
    assert set(np.round(np.abs(got), 6)) == set(np.round(np.abs(ms), 6))


def test_kron_associativity(rng):
    a = random_hermitian(rng, 2)
    b = random_hermitian(rng, 3)
    c = random_hermitian(rng, 4)
    left = kron(kron(a, b), c)
    right = kron(a, kron(b, c))
    assert np.abs(left - right).max() < 1e-14 * max(1.0, np.abs(left).max())


def test_eigh_already_diagonal():
    es = eigh(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(es.values, [1.0, 2.0, 3.0])


def test_eigh_pauli_x():
    es = eigh(SIGMA_X)
    assert np.allclose(es.values, [-1.0, 1.0])
    minus, plus = es.vectors[:, 0], es.vectors[:, 1]
    ref_minus = np.array([1.0, -1.0]) / np.sqrt(2.0)
    ref_plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    assert abs(abs(ref_minus @ minus) - 1.0) < 1e-12
    assert abs(abs(ref_plus @ plus) - 1.0) < 1e-12


def test_eigh_reconstruction_random_40(rng):
    h = 1e3 * random_hermitian(rng, 40)
    es = eigh(h)
    assert np.abs(es.reconstruct() - h).max() < 1e-8 * np.abs(h).max()
    gram = es.vectors.conj().T @ es.vectors
    assert np.abs(gram - np.eye(40)).max() < 1e-10


def test_eigh_values_invariant_under_unitary_conjugation(rng):
    h = random_hermitian(rng, 12)
    q, _ = np.linalg.qr(random_hermitian(rng, 12) + 1j * random_hermitian(rng, 12))
    es1 = eigh(h)
    es2 = eigh(q @ h @ q.conj().T)
    scale = max(1.0, np.abs(es1.values).max())
    assert np.abs(es1.values - es2.values).max() < 1e-8 * scale


def test_eigh_rejects_non_hermitian():
    m = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError, match="asymmetry"):
        eigh(m)


def test_eigh_degenerate_rotation_labels():
    # twofold degeneracy resolved into eigenstates of the label operator
    h = np.diag([1.0, 1.0, 5.0]).astype(complex)
    label_op = np.zeros((3, 3), dtype=complex)
    label_op[0, 1] = label_op[1, 0] = 1.0
    es = eigh(h, degeneracy_operator=label_op)
    lab = [np.real(es.vectors[:, k].conj() @ label_op @ es.vectors[:, k]) for k in range(3)]
    assert np.allclose(lab[:2], [-1.0, 1.0])
    assert np.abs(es.reconstruct() - h).max() < 1e-12


def test_eigh_deterministic():
    rng = np.random.Generator(np.random.PCG64(7))
    h = random_hermitian(rng, 16)
    a = eigh(h)
    b = eigh(h)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.vectors, b.vectors)


def test_expectation_identity_and_sigma_z():
    v = np.array([1.0, 0.0])
    assert expectation(np.eye(2), v) == pytest.approx(1.0)
    assert expectation(SIGMA_Z, v) == pytest.approx(1.0)


def test_expectation_singlet_total_spin_zero():
    # two spin-1/2: J^2 of the singlet state is exactly zero
    half = spin_matrices(0.5)
    ops = [kron(m, np.eye(2)) + kron(np.eye(2), m) for m in (half.x, half.y, half.z)]
    jsq = sum(o @ o for o in ops)
    singlet = np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2.0)
    assert abs(expectation(jsq, singlet)) < 1e-12


def test_expectation_rejects_unnormalized():
    with pytest.raises(ValueError, match="normalized"):
        expectation(np.eye(2), np.array([1.0, 1.0]))
