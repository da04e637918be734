import math
import warnings

import numpy as np
import pytest

from holoq.evolve import segment_propagator_closed
from holoq.holonomy import (
    SCHEME_KINDS,
    GateTarget,
    MultiPulseL2,
    OffResonant,
    SingleLoopPi,
    SquarePulseRequired,
    TwoLoopPi,
    UnreachableTargetError,
    build_v2,
    chi_offresonant,
    compile_to_segments,
    compose_loop,
    gate_l2,
    gate_l2_rotation_form,
    gate_offresonant,
    gate_single_pi,
    gate_two_loop,
    laser_for_axis,
    reachable_schemes,
    rotation_angle,
    run_program,
    select_scheme,
    synthesize,
)
from holoq.model import LaserParams, LoopSpec, PulseEnvelope, SegmentSpec, dark_bright, pulse_area
from holoq.numkit import (
    IDENTITY2,
    KETE,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DefectError,
    HoloqError,
    gate_distance_up_to_phase,
    random_unit_vector,
    unitarity_defect,
)

X, Y, Z = (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)
SHAPES = ("square", "gaussian", "sin2")


def l2_loop(n, eta, shape="gaussian", area=math.pi / 2, tau=1.0):
    tmpl = PulseEnvelope(shape, tau)
    segs = [SegmentSpec.build(tmpl, 0.0, area),
            SegmentSpec.build(PulseEnvelope(shape, tau, start=tau), eta, area)]
    return LoopSpec(laser_for_axis(n), segs)


def test_gate_single_pi_examples():
    assert np.array_equal(gate_single_pi(Z), SIGMA_Z)
    assert np.array_equal(gate_single_pi(X), SIGMA_X)
    n = np.ones(3) / math.sqrt(3)
    g = gate_single_pi(n)
    assert np.allclose(g, (SIGMA_X + SIGMA_Y + SIGMA_Z) / math.sqrt(3))
    assert abs(np.trace(g)) < 1e-15
    assert np.allclose(g, g.conj().T) and unitarity_defect(g) < 1e-15


def test_gate_single_pi_rejects_non_unit_axis():
    with pytest.raises(HoloqError):
        gate_single_pi((1.0, 1.0, 0.0))


def test_gate_two_loop_examples(rng):
    assert np.allclose(gate_two_loop(Z, Z), IDENTITY2)
    assert np.allclose(gate_two_loop(Z, X), -1j * SIGMA_Y)
    for _ in range(50):
        n1, n2 = random_unit_vector(rng), random_unit_vector(rng)
        assert np.max(np.abs(gate_two_loop(n1, n2) - gate_single_pi(n2) @ gate_single_pi(n1))) <= 1e-12


def test_offresonant_examples(rng):
    n = random_unit_vector(rng)
    g, chi = gate_offresonant(n, 0.0)
    assert chi == 0.0
    assert gate_distance_up_to_phase(g, gate_single_pi(n)) < 1e-15
    g, chi = gate_offresonant(n, 1.0)
    assert chi == pytest.approx(math.pi / math.sqrt(2))
    assert rotation_angle(g) == pytest.approx(math.pi * (1 - 1 / math.sqrt(2)), abs=1e-12)
    g, _ = gate_offresonant(n, 1e3)
    assert gate_distance_up_to_phase(g, IDENTITY2) <= 1e-5
    with pytest.raises(HoloqError):
        gate_offresonant(n, -0.1)


def test_chi_formula():
    for r in (0.0, 0.25, 1.0, 4.0):
        w0 = 1.0
        delta = 2 * w0 * r
        assert chi_offresonant(r) == pytest.approx(math.pi * delta / math.sqrt(delta**2 + 4 * w0**2))


def test_gate_l2_forms_agree(rng):
    for _ in range(50):
        n, eta = random_unit_vector(rng), rng.uniform(0, 2 * math.pi)
        assert np.max(np.abs(gate_l2(n, eta) - gate_l2_rotation_form(n, eta))) <= 1e-12


def test_gate_l2_reductions(rng):
    for _ in range(20):
        n = random_unit_vector(rng)
        assert np.max(np.abs(gate_l2(n, 0.0) - gate_single_pi(n))) <= 1e-15
        assert gate_distance_up_to_phase(gate_l2(n, math.pi), IDENTITY2) < 1e-15


@pytest.mark.parametrize("zeta", [0.4, math.pi / 2, 2.5])
def test_gate_l2_phase_gate(zeta):
    # (w0, w1) = (1, 0) is the south pole: d = |1>, b = |0>, phase lands on |0>
    g = gate_l2((0.0, 0.0, -1.0), math.pi - zeta)
    assert np.allclose(g, np.diag([np.exp(1j * zeta), 1.0]), atol=1e-15)
    # north pole puts it on |1>
    g = gate_l2(Z, math.pi - zeta)
    assert np.allclose(g, np.diag([1.0, np.exp(1j * zeta)]), atol=1e-15)


def test_gate_target_from_unitary_round_trip(rng):
    for _ in range(50):
        m, alpha = random_unit_vector(rng), rng.uniform(0, 2 * math.pi)
        t = GateTarget(tuple(m), alpha)
        back = GateTarget.from_unitary(np.exp(1j * rng.uniform(0, 6)) * t.unitary)
        assert 0 <= back.angle <= math.pi + 1e-12
        assert gate_distance_up_to_phase(back.unitary, t.unitary) < 1e-12
    assert GateTarget.from_unitary(IDENTITY2).angle == 0.0


def test_gate_target_folds_angle():
    assert GateTarget(Z, 5 * math.pi).angle == pytest.approx(math.pi)
    with pytest.raises(HoloqError):
        GateTarget((0.0, 0.0, 2.0), 1.0)


def test_build_v2_images_after_first_half_pi():
    p = LaserParams(0, 1)
    d, b = dark_bright(p)
    u1 = segment_propagator_closed(p, 0.0, math.pi / 2)
    frame = (u1 @ KETE, u1 @ b, u1 @ d)
    assert np.allclose(frame[0], -1j * b) and np.allclose(frame[1], -1j * KETE) and np.allclose(frame[2], d)
    v = build_v2(frame, 0.0)
    assert np.allclose(v, np.eye(3))
    v = build_v2(frame, math.pi / 2)
    assert np.allclose(v @ frame[0], -1j * b)
    assert np.allclose(v @ frame[1], -1j * 1j * KETE)
    assert np.allclose(v @ frame[2], -1j * d)


def test_build_v2_unitary(rng):
    for _ in range(20):
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        v = build_v2((q[:, 0], q[:, 1], q[:, 2]), rng.uniform(0, 2 * math.pi))
        assert unitarity_defect(v) < 1e-13
    with pytest.raises(DefectError):
        build_v2((KETE, KETE, KETE), 0.3)


def test_compose_single_segment_pi(rng):
    n = random_unit_vector(rng)
    loop = LoopSpec(laser_for_axis(n), [SegmentSpec.build(PulseEnvelope("sin2", 1.0), 0.0, math.pi)])
    r = compose_loop(loop)
    assert r.valid and r.closure_defect <= 1e-12
    assert np.max(np.abs(r.gate - gate_single_pi(n))) <= 1e-12


def test_compose_two_segments_half_pi(rng):
    for _ in range(20):
        n, eta = random_unit_vector(rng), rng.uniform(0, 2 * math.pi)
        r = compose_loop(l2_loop(n, eta))
        assert r.valid and r.closure_defect <= 1e-12
        assert np.max(np.abs(r.gate - gate_l2(n, eta))) <= 1e-12
        assert r.dyn_phase_max <= 1e-12


def test_compose_third_pi_is_not_a_loop():
    r = compose_loop(l2_loop(Z, 0.5, area=math.pi / 3))
    assert not r.valid
    assert r.closure_defect > 0.1
    assert "not a loop" in r.message and "gate invalid" in r.message


def test_compose_accepts_per_segment_eta():
    tmpl = PulseEnvelope("square", 1.0)
    segs = [SegmentSpec.build(tmpl, 0.0, math.pi / 2),
            SegmentSpec.build(PulseEnvelope("square", 1.0, start=1.0), 0.4, math.pi / 2),
            SegmentSpec.build(PulseEnvelope("square", 1.0, start=2.0), 1.1, math.pi)]
    r = compose_loop(LoopSpec(laser_for_axis(X), segs))
    assert unitarity_defect(r.propagator) < 1e-12


def test_end_to_end_numeric_l2(rng):
    for k in range(50):
        n, eta = random_unit_vector(rng), rng.uniform(0, 2 * math.pi)
        r = compose_loop(l2_loop(n, eta, SHAPES[k % 3]), numeric=True)
        assert gate_distance_up_to_phase(r.gate, gate_l2(n, eta)) <= 1e-8
        assert r.closure_defect <= 1e-8
        assert r.dyn_phase_max <= 1e-10


def test_synthesize_examples():
    p = synthesize(GateTarget(Z, math.pi), "multi-pulse-l2")
    assert p == MultiPulseL2(Z, 0.0)
    assert np.allclose(p.gate(), SIGMA_Z)
    t = GateTarget(Z, math.pi / 2)
    p = synthesize(t, "multi-pulse-l2")
    assert p.eta == pytest.approx(math.pi / 2)
    q = synthesize(t, "two-loop")
    assert float(np.dot(q.n1, q.n2)) == pytest.approx(math.cos(math.pi / 4))
    for s in (p, q):
        assert gate_distance_up_to_phase(s.gate(), t.unitary) <= 1e-10
    ident = synthesize(GateTarget(X, 0.0), "multi-pulse-l2")
    assert ident.n == Z and ident.eta == pytest.approx(math.pi)


def test_synthesize_two_loop_tie_break():
    q = synthesize(GateTarget(X, 1.2), "two-loop")
    assert np.allclose(q.n1, Z)
    q = synthesize(GateTarget(Z, 1.2), "two-loop")
    assert np.allclose(q.n1, X)
    assert np.allclose(np.cross(q.n1, q.n2) / np.linalg.norm(np.cross(q.n1, q.n2)), Z)


def _random_target(rng, scheme):
    m = tuple(random_unit_vector(rng))
    if scheme == "single-pi":
        return GateTarget(m, math.pi)
    if scheme == "off-resonant":
        return GateTarget(m, rng.uniform(1e-6, math.pi))
    return GateTarget(m, rng.uniform(0, 2 * math.pi))


@pytest.mark.parametrize("scheme", SCHEME_KINDS)
def test_synthesis_round_trip(rng, scheme):
    for _ in range(100):
        t = _random_target(rng, scheme)
        params = synthesize(t, scheme)
        assert params.kind == scheme
        prog = compile_to_segments(params, "square")
        r = run_program(prog)
        assert gate_distance_up_to_phase(params.gate(), t.unitary) <= 1e-10
        assert gate_distance_up_to_phase(r.gate, t.unitary) <= 1e-10


def test_synthesis_unreachable():
    with pytest.raises(UnreachableTargetError, match=r"\{pi\}"):
        synthesize(GateTarget(Z, 1.0), "single-pi")
    with pytest.raises(UnreachableTargetError, match=r"\(0, pi\]"):
        synthesize(GateTarget(Z, 4.0), "off-resonant")
    with pytest.raises(UnreachableTargetError):
        synthesize(GateTarget(Z, 0.0), "off-resonant")
    with pytest.raises(HoloqError):
        synthesize(GateTarget(Z, 1.0), "three-loop")


def test_select_scheme_examples():
    assert select_scheme(GateTarget(X, math.pi)) == "single-pi"
    assert select_scheme(GateTarget(Z, math.pi / 2)) == "multi-pulse-l2"
    assert select_scheme(GateTarget(Y, math.pi)) == "single-pi"


def test_select_scheme_depends_only_on_trace(rng):
    for _ in range(100):
        alpha = rng.uniform(0, 2 * math.pi)
        kinds = {select_scheme(GateTarget(tuple(random_unit_vector(rng)), alpha)) for _ in range(5)}
        assert len(kinds) == 1
        expected = "multi-pulse-l2" if 2 * abs(math.cos(alpha / 2)) > 1e-6 else "single-pi"
        assert kinds == {expected}


def test_reachable_schemes():
    assert reachable_schemes(GateTarget(Z, math.pi)) == list(SCHEME_KINDS)
    assert reachable_schemes(GateTarget(Z, math.pi / 2)) == ["two-loop", "off-resonant", "multi-pulse-l2"]


def test_compile_examples():
    prog = compile_to_segments(MultiPulseL2(Z, 0.8), "gaussian")
    (loop,) = prog.loops
    assert [s.target_area for s in loop.segments] == [math.pi / 2, math.pi / 2]
    assert [s.eta for s in loop.segments] == [0.0, 0.8]
    assert all(s.envelope.shape == "gaussian" for s in loop.segments)
    assert loop.segments[1].envelope.start == pytest.approx(loop.segments[0].envelope.end)
    assert prog.total_area == pytest.approx(math.pi)

    prog = compile_to_segments(SingleLoopPi(X), "sin2")
    assert len(prog.loops) == 1 and len(prog.loops[0].segments) == 1
    assert pulse_area(prog.loops[0].segments[0].envelope) == pytest.approx(math.pi)

    prog = compile_to_segments(TwoLoopPi(X, Y), "square")
    assert prog.loop_count == 2 and prog.total_area == pytest.approx(2 * math.pi)

    prog = compile_to_segments(OffResonant(Z, 1.0), "square")
    assert prog.offres.envelope.shape == "square"
    assert prog.offres.duration == pytest.approx(2 * math.pi / math.sqrt(8))
    assert prog.offres.delta == pytest.approx(2.0)


def test_compile_offresonant_shape_policy():
    with pytest.warns(UserWarning, match="square"):
        prog = compile_to_segments(OffResonant(Z, 1.0), "gaussian")
    assert prog.offres.envelope.shape == "square"
    with pytest.raises(SquarePulseRequired, match="square"):
        compile_to_segments(OffResonant(Z, 1.0), "gaussian", strict=True)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        compile_to_segments(OffResonant(Z, 1.0), "square", strict=True)


@pytest.mark.parametrize("ratio", [0.0, 0.25, 1.0, 4.0])
def test_run_program_offresonant(rng, ratio):
    n = tuple(random_unit_vector(rng))
    prog = compile_to_segments(OffResonant(n, ratio), "square")
    r = run_program(prog)
    assert r.valid and r.closure_defect <= 1e-10
    assert gate_distance_up_to_phase(r.gate, gate_offresonant(n, ratio)[0]) <= 1e-9
    num = run_program(prog, numeric=True)
    assert gate_distance_up_to_phase(num.gate, r.gate) <= 1e-8
    assert num.dyn_phase_max <= 1e-10


def test_run_program_numeric_two_loop(rng):
    n1, n2 = tuple(random_unit_vector(rng)), tuple(random_unit_vector(rng))
    r = run_program(compile_to_segments(TwoLoopPi(n1, n2), "gaussian"), numeric=True)
    assert gate_distance_up_to_phase(r.gate, gate_two_loop(n1, n2)) <= 1e-8


def test_holonomy_result_to_dict():
    d = compose_loop(l2_loop(Z, 0.3)).to_dict()
    assert set(d) == {"gate", "closure_defect", "dyn_phase_max", "valid", "message"}
    assert len(d["gate"]) == 2 and len(d["gate"][0][0]) == 2
