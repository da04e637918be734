"""Pure-numpy fallback for the compiled propagation kernel."""
from __future__ import annotations

import numpy as np

from .numkit import dagger, reunitarize


def expm_stack(b_stack: np.ndarray, dt: float) -> np.ndarray:
    """``exp(-i dt B_k)`` for every hermitian ``B_k`` in a stack."""
    b = 0.5 * (b_stack + dagger(b_stack))
    evals, evecs = np.linalg.eigh(b)
    return (evecs * np.exp(-1j * dt * evals)[..., None, :]) @ dagger(evecs)


def expm_product(b_stack, dt: float, stride: int = 0):
    """Ordered product ``exp(-i dt B[M-1]) ... exp(-i dt B[0])``.

    Returns ``(U, traj)``. With ``stride > 0``, ``traj`` holds the partial
    products after every ``stride`` factors, starting with the identity;
    otherwise it is ``None``.
    """
    b_stack = np.ascontiguousarray(b_stack, dtype=complex)
    if b_stack.ndim != 3 or b_stack.shape[1:] != (3, 3):
        raise ValueError("expected a stack of 3x3 matrices")
    factors = expm_stack(b_stack, dt)
    if stride > 0:
        traj = np.empty((len(factors) // stride + 1, 3, 3), dtype=complex)
        acc = np.eye(3, dtype=complex)
        traj[0] = acc
        slot = 1
        for k, f in enumerate(factors, start=1):
            acc = f @ acc
            if k % stride == 0:
                acc = reunitarize(acc)
                traj[slot] = acc
                slot += 1
        return reunitarize(acc), traj
    # pairwise reduction keeps the time order: later factors multiply from the left
    while len(factors) > 1:
        if len(factors) % 2:
            factors = np.concatenate([factors, np.eye(3, dtype=complex)[None]])
        factors = reunitarize(factors[1::2] @ factors[0::2])
    if len(factors) == 0:
        return np.eye(3, dtype=complex), None
    return factors[0], None
