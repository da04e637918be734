import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import taylor_expm
from holoq.model import LaserParams, dark_bright
from holoq.numkit import (
    KET0,
    KET1,
    KETE,
    P0,
    SIGMA_X,
    SIGMA_Z,
    DefectError,
    gate_distance_up_to_phase,
    herm_propagator,
    outer,
    projector_defect,
    projector_onto,
    random_hermitian,
    unitarity_defect,
)

H_B1 = outer(KETE, KET1) + outer(KET1, KETE)  # |e><b| + |b><e| with b = |1>
D_VEC = -KET0  # dark state for (w0, w1) = (0, 1)


def test_propagator_zero_is_identity(rng):
    h = random_hermitian(rng)
    assert np.array_equal(herm_propagator(h, 0.0), np.eye(3))


def test_propagator_pi_matches_taylor_and_projector_form():
    u = herm_propagator(H_B1, math.pi)
    expected = outer(D_VEC, D_VEC) - outer(KET1, KET1) - outer(KETE, KETE)
    assert np.allclose(u, taylor_expm(-1j * math.pi * H_B1), atol=1e-12, rtol=0)
    assert np.allclose(u, expected, atol=1e-12, rtol=0)


def test_propagator_half_pi_form():
    u = herm_propagator(H_B1, math.pi / 2)
    expected = outer(D_VEC, D_VEC) - 1j * (outer(KETE, KET1) + outer(KET1, KETE))
    assert np.allclose(u, expected, atol=1e-12, rtol=0)


def test_propagator_random_vs_taylor(rng):
    for _ in range(10):
        h = random_hermitian(rng)
        s = rng.uniform(-3, 3)
        assert np.allclose(herm_propagator(h, s), taylor_expm(-1j * s * h), atol=1e-12, rtol=0)


def test_propagator_rejects_non_hermitian():
    m = np.zeros((3, 3), complex)
    m[0, 1] = 1.0
    with pytest.raises(DefectError) as err:
        herm_propagator(m, 1.0)
    assert err.value.defect == pytest.approx(1.0)


def test_propagator_group_property(rng):
    for _ in range(50):
        h = random_hermitian(rng)
        s, t = rng.uniform(-10, 10, size=2)
        lhs = herm_propagator(h, s) @ herm_propagator(h, t)
        assert np.allclose(lhs, herm_propagator(h, s + t), atol=1e-12, rtol=0)
        assert unitarity_defect(herm_propagator(h, s)) < 1e-12


@pytest.mark.parametrize("a, b, expected", [
    (SIGMA_Z, SIGMA_Z, 0.0),
    (SIGMA_Z, np.exp(0.7j) * SIGMA_Z, 0.0),
    (SIGMA_Z, SIGMA_X, 1.0),  # Tr(sz sx) = 0
])
def test_gate_distance_examples(a, b, expected):
    assert gate_distance_up_to_phase(a, b) == pytest.approx(expected, abs=1e-15)


def test_gate_distance_rejects_non_unitary():
    with pytest.raises(DefectError):
        gate_distance_up_to_phase(2 * SIGMA_Z, SIGMA_Z)


def _random_u2(rng):
    q, r = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return q * (np.diag(r) / abs(np.diag(r)))


def test_gate_distance_symmetric_and_phase_invariant(rng):
    a, b = _random_u2(rng), _random_u2(rng)
    d = gate_distance_up_to_phase(a, b)
    assert gate_distance_up_to_phase(b, a) == pytest.approx(d, abs=1e-14)
    for g in rng.uniform(0, 2 * math.pi, size=100):
        assert gate_distance_up_to_phase(np.exp(1j * g) * a, b) == pytest.approx(d, abs=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, math.pi), st.floats(0, 2 * math.pi))
def test_projector_defect_dark_bright_span(theta, phi):
    w0 = -complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2)
    d, b = dark_bright(LaserParams(w0, complex(math.cos(theta / 2))))
    assert projector_defect(P0, projector_onto(d, b)) < 1e-12


def test_projector_defect_examples():
    assert projector_defect(P0, P0) == 0.0
    q = projector_onto(KET0, KETE)
    assert projector_defect(P0, q) == pytest.approx(math.sqrt(2), abs=1e-15)


def test_projector_defect_rejects_non_idempotent():
    with pytest.raises(DefectError):
        projector_defect(2 * P0, P0)


def test_zero_projector_defect_implies_containment(rng):
    for _ in range(20):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        p = projector_onto(q[:, 0], q[:, 1])
        same = projector_onto((q[:, 0] + q[:, 1]) / math.sqrt(2), (q[:, 0] - q[:, 1]) / math.sqrt(2))
        assert projector_defect(p, same) < 1e-12
        assert np.allclose(p @ same, same, atol=1e-10)
