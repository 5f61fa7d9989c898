"""Finite-dimensional angular-momentum operators and a dense Hermitian
eigensolver with deterministic handling of degenerate subspaces.

Conventions used throughout the package: hbar = 1 (operators are
dimensionless), energies are frequencies in MHz, and angular-momentum
bases are ordered m = +j ... -j.
"""
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpinOperators",
    "EigenSystem",
    "spin_matrices",
    "kron",
    "eigh",
    "expectation",
    "is_hermitian",
    "require_hermitian",
    "hermiticity_defect",
]

# Pauli matrices on a two-level degree of freedom (orbital or spin-1/2).
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class SpinOperators:
    """x/y/z angular-momentum matrices and their Casimir I^2 = Ix^2+Iy^2+Iz^2."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    sq: np.ndarray

    @property
    def dim(self) -> int:
        return self.z.shape[0]


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues (ascending, MHz) and orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.vectors
        return (v * self.values) @ v.conj().T


def hermiticity_defect(m) -> float:
    m = np.asarray(m)
    return float(np.abs(m - m.conj().T).max())


def is_hermitian(m, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    scale = float(np.abs(m).max()) or 1.0
    return hermiticity_defect(m) <= tol * scale


def require_hermitian(m, tol: float = 1e-9) -> None:
    m = np.asarray(m)
    scale = float(np.abs(m).max()) or 1.0
    defect = hermiticity_defect(m)
    if defect > tol * scale:
        raise ValueError(
            f"matrix is not Hermitian: max asymmetry {defect:.3e} "
            f"({defect / scale:.3e} relative)"
        )


def spin_matrices(i) -> SpinOperators:
    """Standard spin matrices for a half-integer spin quantum number.

    Basis ordering is m = +i ... -i; for i = 0 all operators are the 1x1
    zero matrix.
    """
    i = float(i)
    two_i = 2.0 * i
    if i < 0 or abs(two_i - round(two_i)) > 1e-9:
        raise ValueError(f"spin quantum number must be a non-negative half-integer, got {i}")
    dim = int(round(two_i)) + 1
    m = i - np.arange(dim)
    iz = np.diag(m.astype(complex))
    plus = np.zeros((dim, dim), dtype=complex)
    for row in range(1, dim):
        # <m+1| I+ |m> = sqrt(i(i+1) - m(m+1))
        plus[row - 1, row] = np.sqrt(i * (i + 1.0) - m[row] * (m[row] + 1.0))
    ix = 0.5 * (plus + plus.conj().T)
    iy = -0.5j * (plus - plus.conj().T)
    isq = ix @ ix + iy @ iy + iz @ iz
    return SpinOperators(x=ix, y=iy, z=iz, sq=isq)


def kron(*ops) -> np.ndarray:
    """Kronecker product of square matrices, left to right.

    The package-wide ordering is orbital (x) electron-spin (x) nuclear-spin.
    """
    if len(ops) < 2:
        raise ValueError("kron needs at least two factors")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        op = np.asarray(op, dtype=complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1] or out.shape[0] != out.shape[1]:
            raise ValueError("kron factors must be square matrices")
        out = np.kron(out, op)
    return out


def _cluster_slices(values: np.ndarray, tol: float):
    """Slices of consecutive eigenvalues closer than tol (degenerate clusters)."""
    start = 0
    for k in range(1, len(values) + 1):
        if k == len(values) or values[k] - values[k - 1] > tol:
            yield slice(start, k)
            start = k


def eigh(h, degeneracy_operator=None, cluster_tol: float = 1e-6,
         hermitian_tol: float = 1e-9) -> EigenSystem:
    """Diagonalize a Hermitian matrix, ascending eigenvalues.

    When `degeneracy_operator` is given, each eigenvalue cluster (gap below
    `cluster_tol`) is post-rotated into the eigenbasis of that operator
    projected onto the cluster, and ordered by its ascending eigenvalue.
    This pins an otherwise arbitrary degenerate-subspace basis, so labels
    such as <J^2> are reproducible.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("eigh expects a square matrix")
    require_hermitian(h, hermitian_tol)
    values, vectors = np.linalg.eigh(h)
    if degeneracy_operator is not None:
        dop = np.asarray(degeneracy_operator, dtype=complex)
        vectors = vectors.copy()
        for sl in _cluster_slices(values, cluster_tol):
            if sl.stop - sl.start > 1:
                block = vectors[:, sl]
                proj = block.conj().T @ dop @ block
                proj = 0.5 * (proj + proj.conj().T)
                _, rot = np.linalg.eigh(proj)
                vectors[:, sl] = block @ rot
    return EigenSystem(values=values, vectors=vectors)


def expectation(op, vec) -> float:
    """Real expectation value <v|O|v> of a Hermitian operator.

    The state must be normalized to 1e-10; any imaginary residue beyond
    1e-10 (relative) indicates a non-Hermitian operator and raises.
    """
    op = np.asarray(op, dtype=complex)
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"state vector is not normalized: |v| = {norm!r}")
    val = complex(vec.conj() @ (op @ vec))
    if abs(val.imag) > 1e-10 * (1.0 + abs(val.real)):
        raise ValueError(f"expectation value has imaginary residue {val.imag:.3e}")
    return val.real
