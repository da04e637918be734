"""Holonomic one-qubit gates: closed forms, loop composition and synthesis.

Four schemes are covered:

``single-pi``
    one resonant pulse pair of area pi, gate ``n.sigma`` (traceless only);
``two-loop``
    two consecutive pi pairs with axes ``n1, n2``;
``off-resonant``
    one detuned square pulse pair closing after ``2 pi / sqrt(D^2 + 4 W^2)``;
``multi-pulse-l2``
    two resonant pi/2 pairs forming one loop, the second shifted by ``eta``.

Gates act on span{|0>, |1>} and are compared up to a global phase.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .evolve import (
    Drive,
    IntegratorConfig,
    dynamical_elements,
    frame_propagator,
    integrate,
    offres_square_propagator,
    offresonant_drive,
)
from .model import (
    BlochAxis,
    LaserParams,
    LoopSpec,
    PulseEnvelope,
    SegmentSpec,
    cyclic_duration_offres,
    dark_bright,
    omegas_from_bloch,
    pulse_area,
)
from .numkit import (
    IDENTITY2,
    KETE,
    P0,
    DefectError,
    HoloqError,
    dagger,
    outer,
    pauli_dot,
    projector_defect,
    su2_rotation,
)

TWO_PI = 2 * math.pi
CLOSURE_TOL_CLOSED = 1e-12
CLOSURE_TOL_NUMERIC = 1e-8
TRACE_TOL = 1e-6

SCHEME_KINDS = ("single-pi", "two-loop", "off-resonant", "multi-pulse-l2")


class UnreachableTargetError(HoloqError):
    def __init__(self, scheme: str, reachable: str, angle: float):
        super().__init__(f"rotation angle {angle!r} is unreachable by scheme {scheme!r}; "
                         f"reachable angles: {reachable}")
        self.scheme = scheme
        self.reachable = reachable


class SquarePulseRequired(HoloqError):
    """The off-resonant scheme stays geometric only for square pulses."""


def _unit(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if not abs(np.linalg.norm(n) - 1.0) <= 1e-12:
        raise HoloqError(f"axis must be a unit vector, |n| = {np.linalg.norm(n)!r}")
    return n


def laser_for_axis(n) -> LaserParams:
    return omegas_from_bloch(BlochAxis.from_vector(_unit(n)))


@dataclass(frozen=True)
class GateTarget:
    """Rotation ``exp(-i angle/2 m.sigma)``, defined up to a global phase."""

    axis: tuple
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "axis", tuple(float(x) for x in _unit(self.axis)))
        object.__setattr__(self, "angle", float(self.angle) % TWO_PI)

    @property
    def unitary(self) -> np.ndarray:
        return su2_rotation(np.array(self.axis), self.angle)

    @property
    def trace_abs(self) -> float:
        return 2 * abs(math.cos(self.angle / 2))

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "GateTarget":
        """Axis-angle form of a 2x2 unitary; the angle is returned in ``[0, pi]``."""
        u = np.asarray(u, dtype=complex)
        w = u / np.sqrt(np.linalg.det(u))
        c = np.trace(w).real / 2
        v = np.array([(1j * np.trace(w @ s) / 2).real for s in (pauli_dot((1, 0, 0)),
                                                                  pauli_dot((0, 1, 0)),
                                                                  pauli_dot((0, 0, 1)))])
        if c < 0:
            c, v = -c, -v
        s = float(np.linalg.norm(v))
        if s < 1e-15:
            return cls((0.0, 0.0, 1.0), 0.0)
        return cls(tuple(v / s), 2 * math.atan2(s, c))


@dataclass(frozen=True)
class SingleLoopPi:
    n: tuple
    kind = "single-pi"

    def gate(self) -> np.ndarray:
        return gate_single_pi(self.n)


@dataclass(frozen=True)
class TwoLoopPi:
    n1: tuple
    n2: tuple
    kind = "two-loop"

    def gate(self) -> np.ndarray:
        return gate_two_loop(self.n1, self.n2)


@dataclass(frozen=True)
class OffResonant:
    n: tuple
    ratio: float
    kind = "off-resonant"

    def __post_init__(self):
        if not self.ratio >= 0:
            raise HoloqError("detuning ratio must be non-negative")

    def gate(self) -> np.ndarray:
        return gate_offresonant(self.n, self.ratio)[0]


@dataclass(frozen=True)
class MultiPulseL2:
    n: tuple
    eta: float
    kind = "multi-pulse-l2"

    def gate(self) -> np.ndarray:
        return gate_l2(self.n, self.eta)


SchemeParams = Union[SingleLoopPi, TwoLoopPi, OffResonant, MultiPulseL2]


def gate_single_pi(n) -> np.ndarray:
    """Holonomy of a single resonant pi pulse pair: ``n.sigma``."""
    return pauli_dot(_unit(n))


def gate_two_loop(n1, n2) -> np.ndarray:
    """Two consecutive pi loops: ``n1.n2 - i (n1 x n2).sigma``."""
    n1, n2 = _unit(n1), _unit(n2)
    return float(np.dot(n1, n2)) * IDENTITY2 - 1j * pauli_dot(np.cross(n1, n2))


def chi_offresonant(ratio: float) -> float:
    return math.pi * ratio / math.sqrt(ratio**2 + 1)


def gate_offresonant(n, ratio: float) -> tuple[np.ndarray, float]:
    """Off-resonant single-loop gate for ``ratio = detuning / (2 Rabi)``; returns ``(gate, chi)``."""
    if not ratio >= 0:
        raise HoloqError("detuning ratio must be non-negative")
    chi = chi_offresonant(ratio)
    angle = math.pi - chi
    return np.exp(0.5j * angle) * su2_rotation(_unit(n), angle), chi


def gate_l2(n, eta: float) -> np.ndarray:
    """Two pi/2 pulse pairs in one loop: ``|d><d| - exp(-i eta)|b><b|``."""
    d, b = dark_bright(laser_for_axis(n))
    g = outer(d, d) - np.exp(-1j * eta) * outer(b, b)
    return g[:2, :2]


def gate_l2_rotation_form(n, eta: float) -> np.ndarray:
    """Same gate written as a rotation about ``n`` by ``pi - eta``, global phase kept."""
    angle = math.pi - eta
    return np.exp(0.5j * angle) * su2_rotation(_unit(n), angle)


@dataclass
class HolonomyResult:
    gate: np.ndarray
    closure_defect: float
    dyn_phase_max: float
    valid: bool = True
    propagator: np.ndarray | None = field(default=None, repr=False)
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "gate": [[[z.real, z.imag] for z in row] for row in np.asarray(self.gate).tolist()],
            "closure_defect": self.closure_defect,
            "dyn_phase_max": self.dyn_phase_max,
            "valid": self.valid,
            "message": self.message,
        }


def build_v2(frame, eta: float) -> np.ndarray:
    """Basis change between segments, given the transported frame ``(e, b, d)``.

    Keeps the excited vector fixed and multiplies the bright and dark vectors
    by ``exp(i eta)`` and ``exp(-i eta)``.
    """
    e, b, d = (np.asarray(v, dtype=complex) for v in frame)
    m = np.column_stack([e, b, d])
    defect = float(np.max(np.abs(dagger(m) @ m - np.eye(3))))
    if not defect <= 1e-10:
        raise DefectError("transported frame is not orthonormal", defect)
    return outer(e, e) + np.exp(1j * eta) * outer(b, b) + np.exp(-1j * eta) * outer(d, d)


def _closed_form_dyn_max(frame, area: float, samples: int = 33) -> float:
    e, b, d = frame
    h = outer(e, b) + outer(b, e)
    worst = 0.0
    for a in np.linspace(0.0, area, samples):
        psi = frame_propagator(e, b, d, a) @ np.column_stack([d, b])
        worst = max(worst, float(np.max(np.abs(dagger(psi) @ h @ psi))))
    return worst


def compose_loop(loop: LoopSpec, numeric: bool = False, cfg: IntegratorConfig | None = None,
                 closure_tol: float | None = None) -> HolonomyResult:
    """Holonomy of a segmented loop ``U_L ... U_1 P(0)``.

    Each segment frame is the previous one transported by its ideal propagator
    and then rotated by :func:`build_v2` with the segment's ``eta``. With
    ``numeric`` the segment propagators come from integrating the actual
    envelopes instead of the closed form. A result whose transported subspace
    misses span{|0>, |1>} by more than ``closure_tol`` is marked invalid.
    """
    cfg = cfg or IntegratorConfig()
    if closure_tol is None:
        closure_tol = CLOSURE_TOL_NUMERIC if numeric else CLOSURE_TOL_CLOSED
    d, b = dark_bright(loop.laser)
    frame = (KETE.copy(), b, d)
    total = np.eye(3, dtype=complex)
    dyn_max = 0.0
    for idx, seg in enumerate(loop.segments):
        if idx > 0:
            v = build_v2(frame, seg.eta)
            frame = tuple(v @ x for x in frame)
        e_n, b_n, d_n = frame
        ideal = frame_propagator(e_n, b_n, d_n, seg.target_area)
        if numeric:
            env = seg.envelope
            drive = Drive(outer(e_n, b_n) + outer(b_n, e_n), env)
            prop = integrate(drive, env.start, env.end, IntegratorConfig(
                cfg.step_count, cfg.tolerance, cfg.max_doublings, store_trajectory=True))
            u = prop.final_unitary
            dyn, _ = dynamical_elements(drive, prop, (d_n, b_n))
        else:
            u = ideal
            dyn = _closed_form_dyn_max(frame, seg.target_area)
        dyn_max = max(dyn_max, dyn)
        total = u @ total
        frame = tuple(ideal @ x for x in frame)
    transported = total @ P0 @ dagger(total)
    closure = projector_defect(transported, P0)
    gate = total[:2, :2].copy()
    valid = closure <= closure_tol
    msg = "" if valid else (f"not a loop: closure_defect {closure:.3e} exceeds {closure_tol:.1e}; "
                            "gate invalid")
    return HolonomyResult(gate, closure, dyn_max, valid, total, msg)


def _fold(angle: float) -> float:
    return float(angle) % TWO_PI


def _two_loop_axes(m: np.ndarray, angle: float) -> tuple[np.ndarray, np.ndarray]:
    ref = np.array([0.0, 0.0, 1.0])
    if np.linalg.norm(np.cross(m, ref)) < 1e-8:
        ref = np.array([1.0, 0.0, 0.0])
    n1 = ref - np.dot(ref, m) * m
    n1 /= np.linalg.norm(n1)
    half = angle / 2
    # Rodrigues rotation of n1 about m (n1 is orthogonal to m)
    n2 = math.cos(half) * n1 + math.sin(half) * np.cross(m, n1)
    n2 /= np.linalg.norm(n2)
    return n1, n2


def synthesize(target: GateTarget, scheme: str, trace_tol: float = TRACE_TOL) -> SchemeParams:
    """Scheme parameters realizing ``target`` up to a global phase."""
    m = np.array(target.axis)
    alpha = _fold(target.angle)
    if scheme == "multi-pulse-l2":
        if alpha == 0.0:
            m = np.array([0.0, 0.0, 1.0])  # identity: any axis works
        return MultiPulseL2(tuple(m), _fold(math.pi - alpha))
    if scheme == "two-loop":
        n1, n2 = _two_loop_axes(m, alpha)
        return TwoLoopPi(tuple(n1), tuple(n2))
    if scheme == "single-pi":
        if target.trace_abs > trace_tol:
            raise UnreachableTargetError(scheme, "{pi}", alpha)
        return SingleLoopPi(tuple(m))
    if scheme == "off-resonant":
        if alpha > math.pi:
            if 2 * abs(math.cos(alpha / 2)) > trace_tol:
                raise UnreachableTargetError(scheme, "(0, pi]", alpha)
            alpha = math.pi
        if alpha <= 0:
            raise UnreachableTargetError(scheme, "(0, pi]", alpha)
        c = 1 - alpha / math.pi
        return OffResonant(tuple(m), c / math.sqrt(1 - c * c))
    raise HoloqError(f"unknown scheme {scheme!r}; expected one of {SCHEME_KINDS}")


def select_scheme(target: GateTarget, trace_tol: float = TRACE_TOL) -> str:
    """Multi-pulse L=2 for gates with nonvanishing trace, the single pi loop otherwise."""
    return "multi-pulse-l2" if target.trace_abs > trace_tol else "single-pi"


def reachable_schemes(target: GateTarget, trace_tol: float = TRACE_TOL) -> list[str]:
    out = []
    for kind in SCHEME_KINDS:
        try:
            synthesize(target, kind, trace_tol)
        except UnreachableTargetError:
            continue
        out.append(kind)
    return out


@dataclass(frozen=True)
class OffResSpec:
    laser: LaserParams
    omega0_rabi: float
    delta: float
    envelope: PulseEnvelope

    @property
    def duration(self) -> float:
        return self.envelope.duration

    @property
    def total_area(self) -> float:
        return pulse_area(self.envelope)


@dataclass(frozen=True)
class Program:
    """A compiled pulse program: either resonant loops or one off-resonant pulse pair."""

    scheme: SchemeParams
    loops: tuple = ()
    offres: OffResSpec | None = None

    @property
    def loop_count(self) -> int:
        return 1 if self.offres is not None else len(self.loops)

    @property
    def total_area(self) -> float:
        if self.offres is not None:
            return self.offres.total_area
        return sum(loop.total_area for loop in self.loops)

    @property
    def laser(self) -> LaserParams:
        return self.offres.laser if self.offres is not None else self.loops[0].laser


def _template(shape_family, tau: float) -> PulseEnvelope:
    if isinstance(shape_family, PulseEnvelope):
        return shape_family
    return PulseEnvelope(shape_family, tau)


def _shifted(env: PulseEnvelope, start: float) -> PulseEnvelope:
    return replace(env, start=start)


def compile_to_segments(params: SchemeParams, shape_family="gaussian", tau_per_segment: float = 1.0,
                        omega0_rabi: float = 1.0, strict: bool = False) -> Program:
    """Turn scheme parameters into pulse segments.

    ``shape_family`` is a shape name or a template :class:`PulseEnvelope`.
    Consecutive segments are placed back to back in time. The off-resonant
    scheme always uses a square pulse of Rabi amplitude ``omega0_rabi``; a
    different shape warns, or raises :class:`SquarePulseRequired` when
    ``strict``.
    """
    if isinstance(params, OffResonant):
        shape = shape_family.shape if isinstance(shape_family, PulseEnvelope) else shape_family
        if shape != "square":
            msg = (f"off-resonant pulses must be square-shaped to stay geometric; "
                   f"shape {shape!r} not allowed")
            if strict:
                raise SquarePulseRequired(msg)
            warnings.warn(msg + ", using a square pulse", stacklevel=2)
        delta = 2 * omega0_rabi * params.ratio
        tau = cyclic_duration_offres(omega0_rabi, delta)
        env = PulseEnvelope("square", tau, omega0_rabi)
        return Program(params, offres=OffResSpec(laser_for_axis(params.n), omega0_rabi, delta, env))
    tmpl = _template(shape_family, tau_per_segment)
    tau = tmpl.duration
    if isinstance(params, SingleLoopPi):
        loop = LoopSpec(laser_for_axis(params.n), [SegmentSpec.build(tmpl, 0.0, math.pi)])
        return Program(params, loops=(loop,))
    if isinstance(params, MultiPulseL2):
        segs = [SegmentSpec.build(_shifted(tmpl, 0.0), 0.0, math.pi / 2),
                SegmentSpec.build(_shifted(tmpl, tau), params.eta, math.pi / 2)]
        return Program(params, loops=(LoopSpec(laser_for_axis(params.n), segs),))
    if isinstance(params, TwoLoopPi):
        loops = (LoopSpec(laser_for_axis(params.n1), [SegmentSpec.build(_shifted(tmpl, 0.0), 0.0, math.pi)]),
                 LoopSpec(laser_for_axis(params.n2), [SegmentSpec.build(_shifted(tmpl, tau), 0.0, math.pi)]))
        return Program(params, loops=loops)
    raise HoloqError(f"unsupported scheme parameters {params!r}")


def run_program(program: Program, numeric: bool = False, cfg: IntegratorConfig | None = None,
                closure_tol: float | None = None) -> HolonomyResult:
    """Evaluate a compiled program, closed form or by numeric integration."""
    cfg = cfg or IntegratorConfig()
    if closure_tol is None:
        closure_tol = CLOSURE_TOL_NUMERIC if numeric else CLOSURE_TOL_CLOSED
    if program.offres is not None:
        spec = program.offres
        d, b = dark_bright(spec.laser)
        if numeric:
            drive = offresonant_drive(spec.laser, spec.envelope, spec.delta)
            prop = integrate(drive, spec.envelope.start, spec.envelope.end, IntegratorConfig(
                cfg.step_count, cfg.tolerance, cfg.max_doublings, store_trajectory=True))
            total = prop.final_unitary
            dyn, _ = dynamical_elements(drive, prop, (d, b))
        else:
            total = offres_square_propagator(spec.omega0_rabi, spec.delta, spec.laser, spec.duration)
            dyn = 0.0  # constant Hamiltonian: <psi_k|H|psi_l> is conserved and zero at t = 0
        closure = projector_defect(total @ P0 @ dagger(total), P0)
        valid = closure <= closure_tol
        return HolonomyResult(total[:2, :2].copy(), closure, dyn, valid, total,
                              "" if valid else "not a loop; gate invalid")
    gate = IDENTITY2.copy()
    closure = dyn = 0.0
    valid, msgs = True, []
    for loop in program.loops:
        r = compose_loop(loop, numeric, cfg, closure_tol)
        gate = r.gate @ gate
        closure = max(closure, r.closure_defect)
        dyn = max(dyn, r.dyn_phase_max)
        valid &= r.valid
        if r.message:
            msgs.append(r.message)
    return HolonomyResult(gate, closure, dyn, valid, None, "; ".join(msgs))


def rotation_angle(gate: np.ndarray) -> float:
    """Rotation angle in ``[0, pi]`` of a unitary 2x2 gate, ignoring global phase."""
    return GateTarget.from_unitary(gate).angle
