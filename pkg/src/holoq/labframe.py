"""Two-pulse-pair gate simulated with counter-rotating terms kept.

In the interaction picture with respect to the bare Hamiltonian the pulse
pairs produce couplings ``c_p g_n(t) (1 + exp(-2i nu_p t))`` (first pair) and
``c_p g_n(t) (exp(i eta) + exp(-2i nu_p t - i eta))`` (second pair). Dropping
the ``exp(-2i nu_p t)`` terms gives back the rotating-frame Hamiltonians used
by :mod:`holoq.holonomy`; keeping them measures the error of that
approximation.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .evolve import IntegratorConfig, integrate
from .holonomy import gate_l2
from .model import LaserParams, PulseEnvelope, bloch_from_omegas, pulse_area, scale_to_area
from .numkit import P0, HoloqError, dagger, phase_distance, projector_defect

STEPS_PER_PERIOD = 16


@dataclass(frozen=True)
class LabFrameSpec:
    """Transition frequencies, effective couplings, phase shift and the two envelopes.

    ``coupling_p`` folds the dipole matrix element, polarization and laser
    phase of transition ``p`` into one complex number, so the rotating-frame
    coupling is ``coupling_p * envelope_n(t)``.
    """

    nu_e0: float
    nu_e1: float
    coupling0: complex
    coupling1: complex
    eta: float
    envelope1: PulseEnvelope
    envelope2: PulseEnvelope

    def __post_init__(self):
        if not (self.nu_e0 > 0 and self.nu_e1 > 0):
            raise HoloqError("transition frequencies must be positive")
        if self.rabi_scale == 0:
            raise HoloqError("couplings vanish")
        if self.envelope2.start < self.envelope1.end - 1e-12:
            raise HoloqError("the two pulse pairs must not overlap in time")

    @property
    def rabi_scale(self) -> float:
        return math.hypot(abs(self.coupling0), abs(self.coupling1))

    @property
    def laser(self) -> LaserParams:
        return LaserParams.normalized(self.coupling0, self.coupling1)

    @property
    def nu_max(self) -> float:
        return max(self.nu_e0, self.nu_e1)

    @property
    def tau(self) -> float:
        return self.envelope1.duration

    @property
    def rwa_ratio(self) -> float:
        """``2 pi / (nu tau)`` for the fastest transition and the first pulse length."""
        return 2 * math.pi / (self.nu_max * self.tau)

    def with_ratio(self, ratio: float) -> "LabFrameSpec":
        """Copy with both transition frequencies set to give ``2 pi / (nu tau) = ratio``."""
        nu = 2 * math.pi / (ratio * self.tau)
        return replace(self, nu_e0=nu, nu_e1=nu)

    @classmethod
    def build(cls, laser: LaserParams, eta: float, ratio: float, shape: str | PulseEnvelope = "gaussian",
              tau: float = 1.0, gap: float = 0.0) -> "LabFrameSpec":
        """Spec with two back-to-back pi/2 pulse pairs and equal transition frequencies."""
        tmpl = shape if isinstance(shape, PulseEnvelope) else PulseEnvelope(shape, tau)
        env1 = scale_to_area(replace(tmpl, start=0.0), math.pi / 2)
        env2 = replace(env1, start=env1.end + gap)
        nu = 2 * math.pi / (ratio * env1.duration)
        return cls(nu, nu, laser.omega0, laser.omega1, eta, env1, env2)


@dataclass(frozen=True)
class RwaSweepRow:
    ratio: float
    infidelity: float
    closure_defect: float
    ok: bool = True
    error: str = ""


@dataclass
class LabFrameResult:
    gate: np.ndarray
    infidelity: float
    closure_defect: float
    propagator: np.ndarray
    steps: tuple


class LabFrameDrive:
    """Interaction-picture Hamiltonian of one pulse pair, vectorized over time."""

    def __init__(self, spec: LabFrameSpec, pulse_index: int, counter_rotating: bool = True):
        if pulse_index not in (1, 2):
            raise HoloqError("pulse_index must be 1 or 2")
        self.spec = spec
        self.pulse_index = pulse_index
        self.counter_rotating = counter_rotating
        self.envelope = spec.envelope1 if pulse_index == 1 else spec.envelope2

    def sample(self, ts) -> np.ndarray:
        s = self.spec
        ts = np.asarray(ts, dtype=float)
        g = np.asarray(self.envelope(ts), dtype=float)
        co = 1.0 if self.pulse_index == 1 else np.exp(1j * s.eta)
        counter_phase = 1.0 if self.pulse_index == 1 else np.exp(-1j * s.eta)
        h = np.zeros(ts.shape + (3, 3), dtype=complex)
        for p, (c, nu) in enumerate(((s.coupling0, s.nu_e0), (s.coupling1, s.nu_e1))):
            factor = co
            if self.counter_rotating:
                factor = co + counter_phase * np.exp(-2j * nu * ts)
            up = c * g * factor
            h[..., 2, p] = up
            h[..., p, 2] = np.conj(up)
        return h

    def __call__(self, t: float) -> np.ndarray:
        return self.sample(np.array([t]))[0]


def interaction_hamiltonian(spec: LabFrameSpec, pulse_index: int, t, counter_rotating: bool = True) -> np.ndarray:
    """``H_n(t)`` of pulse pair ``pulse_index``; zero outside the envelope support."""
    drive = LabFrameDrive(spec, pulse_index, counter_rotating)
    t = np.asarray(t, dtype=float)
    return drive.sample(t) if t.ndim else drive(float(t))


def required_steps(spec: LabFrameSpec, envelope: PulseEnvelope, per_period: int = STEPS_PER_PERIOD) -> int:
    """Steps resolving the ``exp(-2i nu t)`` oscillation with ``per_period`` points."""
    return int(math.ceil(per_period * spec.nu_max * envelope.duration / math.pi))


def default_config(spec: LabFrameSpec, tolerance: float = 1e-10) -> IntegratorConfig:
    steps = max(256, required_steps(spec, spec.envelope1), required_steps(spec, spec.envelope2))
    return IntegratorConfig(step_count=steps, tolerance=tolerance)


def _check_areas(spec: LabFrameSpec) -> None:
    for n, env in ((1, spec.envelope1), (2, spec.envelope2)):
        area = spec.rabi_scale * pulse_area(env)
        if not abs(area - math.pi / 2) <= 1e-10:
            raise HoloqError(f"pulse pair {n} has area {area!r}; both pairs need area pi/2")


def simulate_labframe_gate(spec: LabFrameSpec, cfg: IntegratorConfig | None = None,
                           counter_rotating: bool = True) -> LabFrameResult:
    """Integrate both pulse pairs and compare the qubit action with the L=2 holonomy."""
    _check_areas(spec)
    cfg = cfg or default_config(spec)
    limit = math.pi / (4 * spec.nu_max)
    for env in (spec.envelope1, spec.envelope2):
        dt = env.duration / cfg.step_count
        if counter_rotating and dt >= limit:
            raise HoloqError(f"step {dt:.3e} cannot resolve the 2*nu oscillation (needs < {limit:.3e}); "
                             f"use at least {required_steps(spec, env)} steps")
    total = np.eye(3, dtype=complex)
    steps = []
    for idx, env in ((1, spec.envelope1), (2, spec.envelope2)):
        prop = integrate(LabFrameDrive(spec, idx, counter_rotating), env.start, env.end, cfg)
        total = prop.final_unitary @ total
        steps.append(prop.step_count)
    gate = total[:2, :2].copy()
    n = bloch_from_omegas(spec.laser).vector
    infidelity = phase_distance(gate, gate_l2(n, spec.eta))
    closure = projector_defect(total @ P0 @ dagger(total), P0)
    return LabFrameResult(gate, infidelity, closure, total, tuple(steps))


def _sweep_point(args) -> RwaSweepRow:
    spec, counter_rotating = args
    ratio = spec.rwa_ratio
    try:
        r = simulate_labframe_gate(spec, counter_rotating=counter_rotating)
    except HoloqError as exc:
        return RwaSweepRow(ratio, math.nan, math.nan, ok=False, error=str(exc))
    return RwaSweepRow(ratio, r.infidelity, r.closure_defect)


def rwa_error_sweep(template: LabFrameSpec, nu_values, workers: int = 1) -> list[RwaSweepRow]:
    """Gate infidelity against the rotating-wave result for each transition frequency.

    Rows come back sorted by ``2 pi / (nu tau)``; failed points are kept with
    ``ok=False``.
    """
    specs = [(replace(template, nu_e0=float(nu), nu_e1=float(nu)), True) for nu in nu_values]
    if any(s.nu_e0 <= 0 for s, _ in specs):
        raise HoloqError("transition frequencies must be positive")
    if workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_sweep_point, specs))
    else:
        rows = [_sweep_point(a) for a in specs]
    return sorted(rows, key=lambda r: r.ratio)


def sweep_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["ratio", "infidelity", "closure_defect"])
    for r in rows:
        w.writerow([format(r.ratio, ".17g"), format(r.infidelity, ".17g"), format(r.closure_defect, ".17g")])
    return buf.getvalue()


@dataclass
class PhaseGateReport:
    zeta: float
    eta: float
    gate: np.ndarray
    relative_phase: float
    distance_phase_on_1: float
    distance_phase_on_0: float
    infidelity_vs_rwa: float
    closure_defect: float

    def to_dict(self) -> dict:
        return {
            "zeta": self.zeta,
            "eta": self.eta,
            "relative_phase": self.relative_phase,
            "distance_phase_on_1": self.distance_phase_on_1,
            "distance_phase_on_0": self.distance_phase_on_0,
            "infidelity_vs_rwa": self.infidelity_vs_rwa,
            "closure_defect": self.closure_defect,
            "gate": [[[z.real, z.imag] for z in row] for row in self.gate.tolist()],
        }


def phase_gate_demo(zeta: float, template: LabFrameSpec, cfg: IntegratorConfig | None = None,
                    counter_rotating: bool = True) -> PhaseGateReport:
    """Phase gate from two pi/2 pairs with ``w0 = 1`` and ``eta = pi - zeta``.

    With ``(w0, w1) = (1, 0)`` the dark state is ``|1>`` and the bright state
    ``|0>``, so the loop yields ``diag(exp(i zeta), 1)``: the phase lands on
    ``|0>``. The convention ``|x> -> exp(i x zeta)|x>`` puts it on ``|1>``
    instead; the two agree up to ``zeta -> -zeta``, so distances to both are
    reported. ``relative_phase`` is ``arg(G11 / G00)`` of the realized gate.
    """
    eta = (math.pi - zeta) % (2 * math.pi)
    rabi = template.rabi_scale
    spec = replace(template, coupling0=complex(rabi), coupling1=0j, eta=eta)
    r = simulate_labframe_gate(spec, cfg, counter_rotating)
    g = r.gate
    rel = float(np.angle(g[1, 1] / g[0, 0]))
    on_1 = np.diag([1.0, np.exp(1j * zeta)])
    on_0 = np.diag([np.exp(1j * zeta), 1.0])
    return PhaseGateReport(zeta, eta, g, rel, phase_distance(g, on_1), phase_distance(g, on_0),
                           r.infidelity, r.closure_defect)
