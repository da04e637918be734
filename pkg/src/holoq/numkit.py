"""Small dense complex linear algebra for the three-level state space.

States are ``(3,)`` complex arrays and operators ``(3, 3)`` arrays in the
ordered basis ``|0>, |1>, |e>``. Qubit gates are ``(2, 2)`` arrays in the
``|0>, |1>`` basis. Plain numpy arrays are used throughout; the helpers here
only validate and combine them.
"""
from __future__ import annotations

import numpy as np

TOL_ALGEBRAIC = 1e-12
TOL_DYNAMICS = 1e-8

KET0 = np.array([1, 0, 0], dtype=complex)
KET1 = np.array([0, 1, 0], dtype=complex)
KETE = np.array([0, 0, 1], dtype=complex)

IDENTITY2 = np.eye(2, dtype=complex)
IDENTITY3 = np.eye(3, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

# projector onto the computational subspace span{|0>, |1>}
P0 = np.diag([1.0, 1.0, 0.0]).astype(complex)


class HoloqError(ValueError):
    """Base class for rejected inputs."""


class DefectError(HoloqError):
    """An input failed a structural check; ``defect`` is the measured violation."""

    def __init__(self, message: str, defect: float):
        super().__init__(f"{message} (defect {defect:.3e})")
        self.defect = defect


def ket(*amplitudes) -> np.ndarray:
    return np.asarray(amplitudes, dtype=complex)


def outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ``|a><b|``."""
    return np.outer(a, np.conj(b))


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0


def unitarity_defect(m: np.ndarray) -> float:
    m = np.asarray(m)
    eye = np.eye(m.shape[-1])
    return float(np.max(np.abs(dagger(m) @ m - eye)))


def idempotency_defect(p: np.ndarray) -> float:
    return float(np.max(np.abs(p @ p - p)))


def check_hermitian(m: np.ndarray, atol: float = TOL_ALGEBRAIC) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    defect = hermiticity_defect(m)
    if not defect <= atol:
        raise DefectError("matrix is not hermitian", defect)
    return m


def check_unitary(m: np.ndarray, atol: float = TOL_ALGEBRAIC) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    defect = unitarity_defect(m)
    if not defect <= atol:
        raise DefectError("matrix is not unitary", defect)
    return m


def herm_propagator(h: np.ndarray, s: float, atol: float = TOL_ALGEBRAIC) -> np.ndarray:
    """Return ``exp(-i s H)`` for a hermitian ``H`` by spectral decomposition."""
    h = check_hermitian(h, atol)
    if s == 0:
        return IDENTITY3.copy()
    evals, evecs = np.linalg.eigh(0.5 * (h + dagger(h)))
    return (evecs * np.exp(-1j * s * evals)) @ dagger(evecs)


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``1 - |Tr(A^dag B)| / d`` without validating unitarity."""
    a = np.asarray(a)
    overlap = abs(np.trace(dagger(a) @ np.asarray(b))) / a.shape[0]
    return float(max(0.0, 1.0 - overlap))


def gate_distance_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = TOL_DYNAMICS) -> float:
    """Phase-insensitive distance between two qubit gates.

    Returns ``1 - |Tr(A^dag B)|/2``, which lies in ``[0, 1]`` and vanishes
    exactly when ``A = exp(i g) B`` for some real ``g``.
    """
    check_unitary(a, atol)
    check_unitary(b, atol)
    return phase_distance(a, b)


def projector_defect(p: np.ndarray, q: np.ndarray, atol: float = 1e-10) -> float:
    """Frobenius distance between two orthogonal projectors."""
    for m in (p, q):
        d = max(idempotency_defect(m), hermiticity_defect(m))
        if not d <= atol:
            raise DefectError("matrix is not an orthogonal projector", d)
    return float(np.linalg.norm(np.asarray(p) - np.asarray(q)))


def projector_onto(*vectors: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the span of orthonormal ``vectors``."""
    return sum(outer(v, v) for v in vectors)


def reunitarize(m: np.ndarray) -> np.ndarray:
    """Closest unitary (polar factor) to ``m``; works on stacks."""
    w, _, vh = np.linalg.svd(m)
    return w @ vh


def pauli_dot(n) -> np.ndarray:
    """``n . sigma`` for a real 3-vector ``n``."""
    return n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z


def su2_rotation(n, angle: float) -> np.ndarray:
    """``exp(-i angle/2 n.sigma)`` for a unit vector ``n``."""
    return np.cos(angle / 2) * IDENTITY2 - 1j * np.sin(angle / 2) * pauli_dot(n)


def restrict_to_qubit(m: np.ndarray) -> np.ndarray:
    """Upper-left 2x2 block, i.e. the action on span{|0>, |1>}."""
    return np.array(m[:2, :2], dtype=complex)


def random_hermitian(rng: np.random.Generator, dim: int = 3, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (a + dagger(a))


def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)
