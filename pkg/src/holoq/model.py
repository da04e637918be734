"""Lambda-system Hamiltonians, laser parameters and pulse envelopes.

Units: hbar = 1, times in inverse reference Rabi frequency. Basis order is
``|0>, |1>, |e>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .numkit import KET0, KET1, KETE, HoloqError, outer

SHAPES = ("square", "gaussian", "sin2", "sampled")
DEFAULT_GAUSSIAN_WIDTH = 1.0 / 6.0
_POLE_EPS = 1e-14


@dataclass(frozen=True)
class BlochAxis:
    theta: float
    phi: float

    @property
    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    @classmethod
    def from_vector(cls, n) -> "BlochAxis":
        n = np.asarray(n, dtype=float)
        norm = float(np.linalg.norm(n))
        if not abs(norm - 1.0) <= 1e-12:
            raise HoloqError(f"axis must be a unit vector, |n| = {norm!r}")
        theta = math.acos(max(-1.0, min(1.0, n[2])))
        phi = math.atan2(n[1], n[0]) % (2 * math.pi) if math.hypot(n[0], n[1]) > _POLE_EPS else 0.0
        return cls(theta, phi)


@dataclass(frozen=True)
class LaserParams:
    """Relative complex amplitudes of the two pulses in a pair."""

    omega0: complex
    omega1: complex

    def __post_init__(self):
        norm = abs(self.omega0) ** 2 + abs(self.omega1) ** 2
        if not abs(norm - 1.0) <= 1e-12:
            raise HoloqError(f"laser parameters not normalized: |w0|^2+|w1|^2 = {norm!r}")

    @classmethod
    def normalized(cls, omega0: complex, omega1: complex) -> "LaserParams":
        s = math.sqrt(abs(omega0) ** 2 + abs(omega1) ** 2)
        if s == 0:
            raise HoloqError("both laser amplitudes vanish")
        return cls(complex(omega0) / s, complex(omega1) / s)

    def shifted(self, eta: float) -> "LaserParams":
        """Common phase shift ``w_p -> exp(i eta) w_p``."""
        ph = complex(math.cos(eta), math.sin(eta))
        return LaserParams(self.omega0 * ph, self.omega1 * ph)

    @property
    def axis(self) -> BlochAxis:
        return bloch_from_omegas(self)


@dataclass(frozen=True)
class Detunings:
    delta0: float = 0.0
    delta1: float = 0.0


@dataclass(frozen=True)
class PulseEnvelope:
    """Real envelope ``Omega(t)`` supported on ``[start, start + duration]``.

    ``amplitude`` is the peak for the analytic shapes and a multiplier on the
    sample values for ``sampled``. Sample times run from 0 to ``duration``.
    ``width`` is the gaussian standard deviation as a fraction of the duration.
    """

    shape: str
    duration: float
    amplitude: float = 1.0
    start: float = 0.0
    width: float = DEFAULT_GAUSSIAN_WIDTH
    samples: tuple = field(default=(), compare=True)

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise HoloqError(f"unknown envelope shape {self.shape!r}; expected one of {SHAPES}")
        if not self.duration > 0:
            raise HoloqError(f"envelope duration must be positive, got {self.duration!r}")
        if self.shape == "sampled":
            ts = np.array([s[0] for s in self.samples], dtype=float)
            if len(ts) < 2:
                raise HoloqError("sampled envelope needs at least two samples")
            if np.any(np.diff(ts) <= 0):
                raise HoloqError("sample times must be strictly increasing")
            if abs(ts[0]) > 1e-12 or abs(ts[-1] - self.duration) > 1e-12 * max(1.0, self.duration):
                raise HoloqError("sample times must span [0, duration]")
        if self.shape == "gaussian" and not self.width > 0:
            raise HoloqError("gaussian width must be positive")

    @classmethod
    def from_samples(cls, times: Sequence[float], values: Sequence[float], amplitude: float = 1.0,
                     start: float = 0.0) -> "PulseEnvelope":
        times = [float(t) for t in times]
        t0 = times[0]
        samples = tuple((t - t0, float(v)) for t, v in zip(times, values))
        return cls("sampled", samples[-1][0], amplitude, start=start, samples=samples)

    @property
    def end(self) -> float:
        return self.start + self.duration

    @cached_property
    def _spline(self) -> CubicSpline:
        ts, vs = zip(*self.samples)
        return CubicSpline(np.array(ts), np.array(vs))

    def __call__(self, t):
        """Evaluate the envelope at scalar or array ``t``."""
        t = np.asarray(t, dtype=float)
        x = t - self.start
        inside = (x >= 0) & (x <= self.duration)
        xc = np.clip(x, 0.0, self.duration)
        tau = self.duration
        if self.shape == "square":
            vals = np.full_like(xc, self.amplitude)
        elif self.shape == "gaussian":
            sigma = self.width * tau
            vals = self.amplitude * np.exp(-((xc - tau / 2) ** 2) / (2 * sigma**2))
        elif self.shape == "sin2":
            vals = self.amplitude * np.sin(np.pi * xc / tau) ** 2
        else:
            vals = self.amplitude * self._spline(xc)
        out = np.where(inside, vals, 0.0)
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        d = {"shape": self.shape, "duration": self.duration, "amplitude": self.amplitude}
        if self.start:
            d["start"] = self.start
        if self.shape == "gaussian":
            d["width"] = self.width
        if self.shape == "sampled":
            d["samples"] = [list(s) for s in self.samples]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PulseEnvelope":
        shape = d.get("shape", "square")
        if shape == "sampled":
            samples = d["samples"]
            env = cls.from_samples([s[0] for s in samples], [s[1] for s in samples],
                                   amplitude=float(d.get("amplitude", 1.0)),
                                   start=float(d.get("start", 0.0)))
            return env
        return cls(shape, float(d["duration"]), float(d.get("amplitude", 1.0)),
                   start=float(d.get("start", 0.0)),
                   width=float(d.get("width", DEFAULT_GAUSSIAN_WIDTH)))


@dataclass(frozen=True)
class SegmentSpec:
    """One resonant pulse pair of a loop: envelope, phase shift and intended area."""

    envelope: PulseEnvelope
    eta: float
    target_area: float

    def __post_init__(self):
        if not self.target_area > 0:
            raise HoloqError(f"segment area must be positive, got {self.target_area!r}")
        area = pulse_area(self.envelope)
        if not abs(area - self.target_area) <= 1e-10 * max(1.0, self.target_area):
            raise HoloqError(f"envelope area {area!r} differs from target {self.target_area!r}; "
                             "use SegmentSpec.build to rescale")

    @classmethod
    def build(cls, envelope: PulseEnvelope, eta: float, area: float) -> "SegmentSpec":
        return cls(scale_to_area(envelope, area), eta, area)


@dataclass(frozen=True)
class LoopSpec:
    laser: LaserParams
    segments: tuple

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise HoloqError("a loop needs at least one segment")
        if self.segments[0].eta != 0:
            raise HoloqError("the first segment carries the reference phase eta = 0")

    @property
    def total_area(self) -> float:
        return sum(s.target_area for s in self.segments)


def omegas_from_bloch(axis: BlochAxis) -> LaserParams:
    """Laser parameters for Bloch axis ``n`` in the gauge where ``w1 >= 0`` is real."""
    h = axis.theta / 2
    w0 = -complex(math.cos(axis.phi), math.sin(axis.phi)) * math.sin(h)
    return LaserParams(w0, complex(math.cos(h)))


def bloch_from_omegas(params: LaserParams) -> BlochAxis:
    w0, w1 = complex(params.omega0), complex(params.omega1)
    theta = 2 * math.atan2(abs(w0), abs(w1))
    if abs(w0) <= _POLE_EPS:
        return BlochAxis(theta, 0.0)
    if abs(w1) > _POLE_EPS:
        w0 = w0 * abs(w1) / w1  # gauge: make w1 real positive
    return BlochAxis(theta, math.atan2((-w0).imag, (-w0).real) % (2 * math.pi))


def dark_bright(params: LaserParams) -> tuple[np.ndarray, np.ndarray]:
    w0, w1 = params.omega0, params.omega1
    d = -w1 * KET0 + w0 * KET1
    b = np.conj(w0) * KET0 + np.conj(w1) * KET1
    return d, b


def hamiltonian_general(up0: complex, up1: complex, det: Detunings = Detunings()) -> np.ndarray:
    """Rotating-frame Lambda Hamiltonian with couplings ``up0, up1`` and detunings."""
    h = np.zeros((3, 3), dtype=complex)
    h[0, 0] = det.delta0
    h[1, 1] = det.delta1
    h[2, 0] = up0
    h[2, 1] = up1
    h[0, 2] = np.conj(up0)
    h[1, 2] = np.conj(up1)
    return h


def hamiltonian_resonant_core(params: LaserParams) -> np.ndarray:
    """Dimensionless ``H = |e><b| + |b><e|``."""
    _, b = dark_bright(params)
    return outer(KETE, b) + outer(b, KETE)


def hamiltonian_offresonant(omega0_rabi: float, delta: float, params: LaserParams) -> np.ndarray:
    if not omega0_rabi > 0:
        raise HoloqError("Rabi amplitude must be positive")
    return delta * outer(KETE, KETE) + omega0_rabi * hamiltonian_resonant_core(params)


def hamiltonian_eta_shifted(params: LaserParams, eta: float) -> np.ndarray:
    return hamiltonian_resonant_core(params.shifted(eta))


def pulse_area(env: PulseEnvelope) -> float:
    tau = env.duration
    if env.shape == "square":
        return env.amplitude * tau
    if env.shape == "sin2":
        return env.amplitude * tau / 2
    if env.shape == "gaussian":
        sigma = env.width * tau
        return env.amplitude * sigma * math.sqrt(2 * math.pi) * math.erf(tau / (2 * math.sqrt(2) * sigma))
    return env.amplitude * float(env._spline.integrate(0.0, tau))


def scale_to_area(env: PulseEnvelope, a_target: float) -> PulseEnvelope:
    """Rescale the amplitude so the envelope has area ``a_target``."""
    if not a_target > 0:
        raise HoloqError(f"target area must be positive, got {a_target!r}")
    area = pulse_area(env)
    if area == 0 or not math.isfinite(area):
        raise HoloqError("cannot rescale an envelope with zero area")
    return replace(env, amplitude=env.amplitude * a_target / area)


def cyclic_duration_offres(omega0_rabi: float, delta: float) -> float:
    """Pulse length closing the loop for a square off-resonant pulse pair."""
    if omega0_rabi == 0 and delta == 0:
        raise HoloqError("Rabi amplitude and detuning cannot both vanish")
    return 2 * math.pi / math.sqrt(delta**2 + 4 * omega0_rabi**2)
