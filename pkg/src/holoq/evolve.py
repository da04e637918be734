"""Propagation of the driven Lambda system.

Closed-form segment propagators, a fixed-step fourth-order commutator-free
integrator for arbitrary time-dependent Hamiltonians, and the diagnostics that
certify a path is purely geometric.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import _backend
from .model import (
    LaserParams,
    PulseEnvelope,
    dark_bright,
    hamiltonian_eta_shifted,
    hamiltonian_offresonant,
)
from .numkit import (
    KETE,
    DefectError,
    HoloqError,
    dagger,
    herm_propagator,
    hermiticity_defect,
    outer,
    unitarity_defect,
)

# two-exponential commutator-free scheme on Gauss-Legendre nodes
_NODES = (0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6)
_W_MAJOR = 0.25 + math.sqrt(3) / 6
_W_MINOR = 0.25 - math.sqrt(3) / 6


class ConvergenceError(HoloqError):
    """Step doubling did not reach the requested tolerance."""

    def __init__(self, achieved: float, steps: int, tolerance: float):
        super().__init__(f"integration did not converge: step-halving error {achieved:.3e} "
                         f"> tolerance {tolerance:.3e} at {steps} steps")
        self.achieved = achieved
        self.steps = steps


@dataclass(frozen=True)
class IntegratorConfig:
    step_count: int = 256
    tolerance: float = 1e-10
    max_doublings: int = 6
    store_trajectory: bool = False

    def __post_init__(self):
        if self.step_count < 16:
            raise HoloqError(f"step_count must be at least 16, got {self.step_count}")
        if not self.tolerance > 0:
            raise HoloqError("tolerance must be positive")


@dataclass
class Propagation:
    final_unitary: np.ndarray
    step_count: int
    error_estimate: float
    dyn_phase_samples: list = field(default_factory=list)
    trajectory: list | None = None


class Drive:
    """Time-dependent Hamiltonian ``envelope(t) * coupling + static``.

    Callable at a single time and vectorized through :meth:`sample`.
    """

    def __init__(self, coupling: np.ndarray, envelope: PulseEnvelope | Callable | None = None,
                 static: np.ndarray | None = None):
        self.coupling = np.asarray(coupling, dtype=complex)
        self.envelope = envelope
        self.static = np.zeros((3, 3), complex) if static is None else np.asarray(static, complex)

    def sample(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        amp = np.ones_like(ts) if self.envelope is None else np.asarray(self.envelope(ts), float)
        return amp[:, None, None] * self.coupling + self.static

    def __call__(self, t: float) -> np.ndarray:
        return self.sample(np.array([t]))[0]


def resonant_drive(params: LaserParams, envelope: PulseEnvelope, eta: float = 0.0) -> Drive:
    return Drive(hamiltonian_eta_shifted(params, eta), envelope)


def offresonant_drive(params: LaserParams, envelope: PulseEnvelope, delta: float) -> Drive:
    return Drive(hamiltonian_eta_shifted(params, 0.0), envelope, static=delta * outer(KETE, KETE))


def sample_hamiltonian(hamiltonian_of_t, ts: np.ndarray) -> np.ndarray:
    sampler = getattr(hamiltonian_of_t, "sample", None)
    if sampler is not None:
        return np.asarray(sampler(ts), dtype=complex)
    return np.array([hamiltonian_of_t(float(t)) for t in ts], dtype=complex)


def frame_propagator(e_vec: np.ndarray, b_vec: np.ndarray, d_vec: np.ndarray, area: float) -> np.ndarray:
    """``exp(-i a (|e><b| + |b><e|))`` assembled term by term in a given frame."""
    dd = outer(d_vec, d_vec)
    coupler = outer(e_vec, b_vec) + outer(b_vec, e_vec)
    return dd + math.cos(area) * (np.eye(3) - dd) - 1j * math.sin(area) * coupler


def segment_propagator_closed(params: LaserParams, eta: float, area: float) -> np.ndarray:
    """Propagator of a resonant pulse pair of area ``area`` with common phase shift ``eta``."""
    d, b = dark_bright(params.shifted(eta))
    return frame_propagator(KETE, b, d, area)


def offres_square_propagator(omega0_rabi: float, delta: float, params: LaserParams, t: float) -> np.ndarray:
    return herm_propagator(hamiltonian_offresonant(omega0_rabi, delta, params), t)


def _exponents(hamiltonian_of_t, t0: float, t1: float, steps: int) -> tuple[np.ndarray, float]:
    dt = (t1 - t0) / steps
    starts = t0 + dt * np.arange(steps)
    ts = np.empty(2 * steps)
    ts[0::2] = starts + _NODES[0] * dt
    ts[1::2] = starts + _NODES[1] * dt
    h = sample_hamiltonian(hamiltonian_of_t, ts)
    defect = hermiticity_defect(h)
    if not defect <= 1e-10 * max(1.0, float(np.max(np.abs(h)))):
        raise DefectError("Hamiltonian is not hermitian at the sampled times", defect)
    h1, h2 = h[0::2], h[1::2]
    b = np.empty_like(h)
    b[0::2] = _W_MAJOR * h1 + _W_MINOR * h2
    b[1::2] = _W_MINOR * h1 + _W_MAJOR * h2
    return b, dt


def propagate_fixed(hamiltonian_of_t, t0: float, t1: float, steps: int, trajectory: bool = False):
    """Fixed-step fourth-order propagator over ``[t0, t1]``.

    Returns ``(U, traj)`` where ``traj`` has the propagator at every step
    boundary when ``trajectory`` is set.
    """
    b, dt = _exponents(hamiltonian_of_t, t0, t1, steps)
    return _backend.expm_product(b, dt, 2 if trajectory else 0)


def integrate(hamiltonian_of_t, t0: float, t1: float, cfg: IntegratorConfig = IntegratorConfig()) -> Propagation:
    """Time-ordered propagator with a step-halving error estimate.

    The step count starts at ``cfg.step_count`` and doubles until the result
    moves by at most ``cfg.tolerance`` (max-abs entry) when the step count is
    halved. Raises :class:`ConvergenceError` after ``cfg.max_doublings``.
    """
    if not t1 > t0:
        raise HoloqError(f"need t1 > t0, got [{t0}, {t1}]")
    steps = cfg.step_count
    coarse, _ = propagate_fixed(hamiltonian_of_t, t0, t1, max(steps // 2, 1))
    for _ in range(cfg.max_doublings + 1):
        fine, traj = propagate_fixed(hamiltonian_of_t, t0, t1, steps, cfg.store_trajectory)
        err = float(np.max(np.abs(fine - coarse)))
        if err <= cfg.tolerance:
            break
        coarse = fine
        steps *= 2
    else:
        raise ConvergenceError(err, steps // 2, cfg.tolerance)
    if unitarity_defect(fine) > 1e-10:
        raise DefectError("integrated propagator lost unitarity", unitarity_defect(fine))
    result = Propagation(fine, steps, err)
    if cfg.store_trajectory:
        times = np.linspace(t0, t1, steps + 1)
        result.trajectory = list(zip(times.tolist(), traj))
    return result


def _check_frame(vectors) -> None:
    m = np.column_stack(vectors)
    defect = float(np.max(np.abs(dagger(m) @ m - np.eye(m.shape[1]))))
    leak = float(np.max(np.abs(KETE.conj() @ m)))
    if not max(defect, leak) <= 1e-10:
        raise DefectError("frame must be orthonormal and orthogonal to |e>", max(defect, leak))


def dynamical_elements(hamiltonian_of_t, prop: Propagation, initial_frame):
    """Dynamical matrix elements along a propagation that stored its trajectory.

    Returns ``(max_abs, samples)``; ``max_abs`` is normalized by the peak
    spectral norm of ``H(t)`` on the grid.
    """
    frame = np.column_stack(initial_frame)
    times = np.array([t for t, _ in prop.trajectory])
    us = np.array([u for _, u in prop.trajectory])
    hs = sample_hamiltonian(hamiltonian_of_t, times)
    psi = us @ frame
    elems = dagger(psi) @ hs @ psi
    peak = float(np.max(np.linalg.norm(hs, ord=2, axis=(1, 2))))
    max_abs = float(np.max(np.abs(elems))) / peak if peak > 0 else 0.0
    samples = list(zip(times.tolist(), elems))
    prop.dyn_phase_samples = samples
    return max_abs, samples


def dynamical_phase_trace(hamiltonian_of_t, initial_frame, t0: float, t1: float,
                          cfg: IntegratorConfig = IntegratorConfig()):
    """Largest dynamical matrix element ``<psi_k(t)|H(t)|psi_l(t)>`` along the path.

    ``initial_frame`` is the pair ``(d, b)``. The frame is propagated on the
    integrator grid and one ``(t, 2x2 matrix)`` sample is kept per grid time.
    Returns ``(max_abs, samples)``.
    """
    _check_frame(initial_frame)
    prop = integrate(hamiltonian_of_t, t0, t1, replace(cfg, store_trajectory=True))
    return dynamical_elements(hamiltonian_of_t, prop, initial_frame)


def commutator_defect(hamiltonian_of_t, t0: float, t1: float, sample_count: int = 33) -> float:
    """Max normalized ``||[H(t), H(t')]||_F`` over sampled time pairs."""
    if sample_count < 2:
        raise HoloqError("need at least two samples")
    hs = sample_hamiltonian(hamiltonian_of_t, np.linspace(t0, t1, sample_count))
    norms = np.linalg.norm(hs, axis=(1, 2))
    keep = norms > 0
    hs, norms = hs[keep], norms[keep]
    if len(hs) < 2:
        return 0.0
    comm = hs[:, None] @ hs[None, :] - hs[None, :] @ hs[:, None]
    scaled = np.linalg.norm(comm, axis=(2, 3)) / np.outer(norms, norms)
    return float(np.max(scaled))
