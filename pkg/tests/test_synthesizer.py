"""Tests for the pulse-sequence compiler"""

import math

import numpy as np
import pytest
from scipy.special import roots_genlaguerre

from ionsynth.channels import ChannelId, LambDicke, Nonlinear, Pulse, apply_pulse
from ionsynth.errors import DimensionMismatchError, PulseInfeasible, SynthesisFailed
from ionsynth.fock import (
    BasisIndex,
    CompositeState,
    InternalLevel,
    embed_target,
    fidelity_single,
    index_of,
    subspace_probabilities,
    vacuum,
)
from ionsynth.synthesizer import (
    Direction,
    PulseSequence,
    apply_sequence,
    build_A,
    build_B,
    build_C,
    de_evolve,
    op_count_expected,
    op_count_gczs,
    preparation_sequence,
    solve_cancellation,
)
from ionsynth.targets import cat_state, fock_state, random_target

A, B, C = InternalLevel.A, InternalLevel.B, InternalLevel.C


def state_with(j_max, entries):
    s = CompositeState.zeros(j_max)
    for b, value in entries.items():
        s.set_amplitude(b, value)
    s.amplitudes /= s.norm()
    return s


def random_amplitude(rng):
    return complex(rng.standard_normal(), rng.standard_normal())


def test_cancel_source_side():
    s = state_with(1, {BasisIndex(0, 1, A): 0.6 * np.exp(0.4j), BasisIndex(1, 0, B): -0.8j})
    cancel = BasisIndex(0, 1, A)
    q_cancel, q_partner = s.amplitude(cancel), s.amplitude(BasisIndex(1, 0, B))
    theta, base = solve_cancellation(q_cancel, q_partner, 1.0, cancel_is_source=True)
    out = apply_pulse(s, Pulse(ChannelId.EXCHANGE_AB, cancel, theta, base))
    assert abs(out.amplitude(cancel)) <= 1e-12
    assert abs(out.amplitude(BasisIndex(1, 0, B))) == pytest.approx(1.0, abs=1e-12)


def test_cancel_partner_side():
    cancel = BasisIndex(1, 1, B)
    s = state_with(2, {BasisIndex(1, 1, A): 0.3 - 0.2j, cancel: 0.5 + 0.7j})
    theta, base = solve_cancellation(
        s.amplitude(cancel), s.amplitude(BasisIndex(1, 1, A)), 1.0, cancel_is_source=False
    )
    out = apply_pulse(s, Pulse(ChannelId.CARRIER_AB, cancel, theta, base))
    assert abs(out.amplitude(cancel)) <= 1e-12


def test_cancel_with_negative_coupling():
    """A negative Rabi factor is compensated by a pi phase shift"""
    theta_pos, base_pos = solve_cancellation(0.6 + 0j, 0.8 + 0j, 0.5)
    theta_neg, base_neg = solve_cancellation(0.6 + 0j, 0.8 + 0j, -0.5)
    assert base_neg == base_pos == pytest.approx(math.atan2(0.6, 0.8) / 0.5)
    assert theta_neg == pytest.approx((theta_pos + math.pi) % (2 * math.pi))


def test_cancel_into_empty_partner():
    theta, base = solve_cancellation(1j, 0j, 2.0)
    assert base == pytest.approx(math.pi / 4)
    assert 0 <= theta < 2 * math.pi


def test_skip_and_infeasible():
    assert solve_cancellation(1e-16, 1.0, 1.0) == (0.0, 0.0)
    assert solve_cancellation(0.0, 1.0, 0.0) == (0.0, 0.0)
    with pytest.raises(PulseInfeasible):
        solve_cancellation(0.5, 0.5, 0.0)


def test_block_A_clears_subspace(rng):
    J = 4
    entries = {BasisIndex(k, J - k, A): random_amplitude(rng) for k in range(J + 1)}
    entries[BasisIndex(J, 0, B)] = random_amplitude(rng)
    s = state_with(J, entries)
    pulses, skipped = build_A(J, s)
    assert len(pulses) + skipped == 2 * J
    assert abs(s.amplitude(BasisIndex(J, 0, A))) == pytest.approx(1.0, abs=1e-12)
    assert s.norm() == pytest.approx(1.0, abs=1e-12)


def test_block_B_clears_upper_levels(rng):
    J = 3
    entries = {}
    for k in range(J + 1):
        entries[BasisIndex(k, J - k, B)] = random_amplitude(rng)
        entries[BasisIndex(k, J - k, C)] = random_amplitude(rng)
    s = state_with(J, entries)
    pulses, skipped = build_B(J, s)
    assert len(pulses) + skipped == 2 * J + 1
    assert abs(s.amplitude(BasisIndex(J, 0, B))) == pytest.approx(1.0, abs=1e-12)


def test_block_C_moves_down():
    s = state_with(3, {BasisIndex(3, 0, A): 1j})
    pulses, skipped = build_C(3, s)
    assert (len(pulses), skipped) == (1, 0)
    assert abs(s.amplitude(BasisIndex(2, 0, B))) == pytest.approx(1.0, abs=1e-12)


def test_block_arguments():
    s = vacuum(2)
    with pytest.raises(ValueError):
        build_A(0, s)
    with pytest.raises(ValueError):
        build_C(0, s)
    assert build_B(0, s) == ([], 1)


def test_support_shrinks(rng):
    """After clearing J, nothing remains at or above J"""
    t = random_target(3, 3, rng)
    s = embed_target(t)
    for J in range(t.j_max, 0, -1):
        build_A(J, s)
        build_B(J - 1, s)
        build_C(J, s)
        probs = subspace_probabilities(s)
        assert probs[J:].sum() <= 1e-12
        assert s.norm() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("cutoff", [1, 2, 3, 4])
def test_round_trip(cutoff):
    """25 random targets per cutoff de-evolve to the vacuum and are prepared back"""
    rng = np.random.default_rng(1000 + cutoff)
    for _ in range(25):
        t = random_target(cutoff, cutoff, rng)
        result = de_evolve(t)
        assert result.residual_vacuum_infidelity <= 1e-9

        prepare = preparation_sequence(result)
        prepared = apply_sequence(vacuum(t.j_max), prepare)
        assert fidelity_single(prepared, t) >= 1 - 1e-9

        expected = np.exp(1j * prepare.global_phase) * embed_target(t).amplitudes
        np.testing.assert_allclose(prepared.amplitudes, expected, atol=1e-9)


def test_deevolution_reaches_vacuum_phase(rng):
    t = random_target(2, 2, rng)
    result = de_evolve(t)
    final = apply_sequence(embed_target(t), result.sequence)
    assert abs(final.amplitudes[0]) == pytest.approx(1.0, abs=1e-9)
    assert np.angle(final.amplitudes[0]) == pytest.approx(result.global_phase, abs=1e-9)


def test_preparation_sequence_shape(small_cat):
    result = de_evolve(small_cat)
    prepare = preparation_sequence(result)
    assert prepare.direction is Direction.PREPARE
    assert len(prepare) == len(result.sequence)
    assert prepare.skipped == result.sequence.skipped
    assert prepare.global_phase == -result.global_phase
    first, last = prepare.pulses[0], result.sequence.pulses[-1]
    assert first.cancel == last.cancel
    assert first.theta == pytest.approx((last.theta + math.pi) % (2 * math.pi))


def test_slot_count(rng):
    for j_max in range(25):
        t = random_target(j_max // 2, j_max - j_max // 2, rng)
        seq = de_evolve(t).sequence
        assert seq.j_max == j_max
        assert seq.slots == op_count_expected(j_max)


def test_operation_counts():
    assert op_count_expected(0) == 1
    assert op_count_expected(24) == 1201
    assert abs(op_count_expected(24) - 8 * 12**2) / (8 * 12**2) <= 0.05
    assert op_count_gczs(12) == 2 * 12 * 4096


def test_vacuum_target_needs_no_pulses():
    result = de_evolve(fock_state(0, 0))
    assert len(result.sequence) == 0
    assert result.sequence.skipped == 1
    assert result.residual_vacuum_infidelity == 0.0


def test_single_fock_target():
    t = fock_state(1, 2)
    result = de_evolve(t)
    prepared = apply_sequence(vacuum(3), preparation_sequence(result))
    assert abs(prepared.amplitude(BasisIndex(1, 2, A))) == pytest.approx(1.0, abs=1e-12)
    assert result.sequence.slots == op_count_expected(3)


def test_cat_sequence_size(small_cat):
    result = de_evolve(small_cat)
    report = result.report()
    assert report["slots"] == report["expected_slots"] == op_count_expected(6)
    assert report["emitted"] + report["skipped"] == report["slots"]


def test_nonlinear_round_trip(rng):
    regime = Nonlinear(0.3, 0.3)
    t = random_target(2, 2, rng)
    result = de_evolve(t, regime)
    assert all(p.regime == regime for p in result.sequence.pulses)
    prepared = apply_sequence(vacuum(t.j_max), preparation_sequence(result))
    assert fidelity_single(prepared, t) >= 1 - 1e-9


def test_laguerre_zero_is_infeasible(rng):
    """A vanishing exchange coupling cannot cancel a nonzero amplitude"""
    roots, _ = roots_genlaguerre(3, 1)
    regime = Nonlinear(math.sqrt(float(np.min(roots))), 0.1)
    t = random_target(2, 2, rng)
    with pytest.raises(PulseInfeasible) as info:
        de_evolve(t, regime)
    assert info.value.channel == int(ChannelId.EXCHANGE_AB)
    assert info.value.cancel == BasisIndex(3, 1, A)


def test_failed_deevolution_raises(mocker, small_cat):
    mocker.patch("ionsynth.synthesizer.apply_pulse", side_effect=lambda s, p, inplace=False: s)
    with pytest.raises(SynthesisFailed) as info:
        de_evolve(small_cat)
    assert info.value.residual > 1e-9


def test_tolerances_from_environment(monkeypatch, small_cat):
    monkeypatch.setenv("IONSYNTH_RESIDUAL_TOL", "1e-20")
    monkeypatch.setenv("IONSYNTH_SKIP_TOL", "0.5")
    # a huge skip tolerance leaves most of the state in place
    with pytest.raises(SynthesisFailed):
        de_evolve(small_cat)


def test_sequence_validation():
    with pytest.raises(DimensionMismatchError):
        PulseSequence(
            Direction.PREPARE, 1, [Pulse(ChannelId.CARRIER_AB, BasisIndex(1, 1, B), 0.0, 1.0)]
        )
    seq = PulseSequence("prepare", 2, regime=LambDicke())
    assert seq.direction is Direction.PREPARE
    with pytest.raises(DimensionMismatchError):
        apply_sequence(vacuum(3), seq)


def test_cancellation_targets_are_zeroed(small_cat):
    """Replaying a de-evolution pulse by pulse, each pulse zeroes its component"""
    result = de_evolve(small_cat)
    s = embed_target(small_cat)
    for p in result.sequence.pulses:
        apply_pulse(s, p, inplace=True)
        assert abs(s.amplitudes[index_of(p.cancel, s.j_max)]) <= 1e-12
