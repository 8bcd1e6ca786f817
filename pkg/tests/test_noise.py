import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from surfdec.code import ideal_syndrome
from surfdec.noise import (
    FaultEvent,
    InvalidFaultError,
    InvalidNoiseError,
    NoiseParams,
    enumerate_single_faults,
    fault_locations_per_round,
    sample_faults,
    simulate,
)
from surfdec.pauli import PauliOperator, multiply


def test_noise_params_range():
    NoiseParams(0.0)
    NoiseParams(0.3)
    with pytest.raises(InvalidNoiseError):
        NoiseParams(1.0)
    with pytest.raises(InvalidNoiseError):
        NoiseParams(-0.1)


def test_zero_rate_samples_nothing(circuit3):
    rng = np.random.default_rng(0)
    assert sample_faults(circuit3, NoiseParams(0.0), 5, rng) == []


def test_cnot_payload_frequencies(circuit3):
    # every one of the 15 two-qubit payloads occurs at rate p/15
    p = 0.15
    rng = np.random.default_rng(42)
    rounds = -(-10**6 // circuit3.n_cnots_per_round)  # >= 1e6 CNOT locations
    faults = sample_faults(circuit3, NoiseParams(p), rounds, rng)
    n_loc = rounds * circuit3.n_cnots_per_round
    counts = Counter(f.payload for f in faults if f.kind == "cnot")
    expect = n_loc * p / 15
    sigma = math.sqrt(n_loc * (p / 15) * (1 - p / 15))
    assert set(counts) == set(range(15))
    for payload in range(15):
        assert abs(counts[payload] - expect) < 3 * sigma


def test_idle_pauli_frequencies(circuit3):
    p = 0.3
    rng = np.random.default_rng(43)
    n_data = circuit3.layout.n_data
    rounds = -(-10**6 // n_data)
    faults = sample_faults(circuit3, NoiseParams(p), rounds, rng)
    n_loc = rounds * n_data
    counts = Counter(f.payload for f in faults if f.kind == "idle")
    expect = n_loc * p / 3
    sigma = math.sqrt(n_loc * (p / 3) * (1 - p / 3))
    for payload in range(3):
        assert abs(counts[payload] - expect) < 3 * sigma


def test_no_faults_no_events(layout3, circuit3):
    hist = simulate(layout3, circuit3, [], 4, True)
    assert hist.x_lattice_events == ()
    assert hist.z_lattice_events == ()
    assert hist.residual.is_identity


def test_measurement_flip_makes_temporal_pair(layout3, circuit3):
    t = 2
    for kind, idx in (("meas_z", 3), ("meas_x", 2)):
        hist = simulate(layout3, circuit3, [FaultEvent(t, kind, idx)], 4, True)
        events = (
            hist.x_lattice_events if kind == "meas_z" else hist.z_lattice_events
        )
        other = (
            hist.z_lattice_events if kind == "meas_z" else hist.x_lattice_events
        )
        assert events == ((idx, t), (idx, t + 1))
        assert other == ()
        assert hist.residual.is_identity


def test_idle_y_fault_pairs_match_ideal_syndrome(layout3, circuit3):
    # Y on the central data qubit during round 2's measure step is seen by
    # both lattices from round 3 on, at the stabilizers of its syndrome
    q = layout3.data_index[(2, 2)]
    hist = simulate(
        layout3, circuit3, [FaultEvent(2, "idle", q, 1)], 4, True
    )
    syn = ideal_syndrome(layout3, PauliOperator.single(13, q, "Y"))
    n_x = len(layout3.x_stabilizers)
    expect_z_lattice = tuple(
        sorted((i, 3) for i in range(n_x) if syn[i])
    )
    expect_x_lattice = tuple(
        sorted((i, 3) for i in range(6) if syn[n_x + i])
    )
    assert hist.z_lattice_events == expect_z_lattice
    assert hist.x_lattice_events == expect_x_lattice
    assert hist.residual == PauliOperator.single(13, q, "Y")


def test_invalid_fault_location(layout3, circuit3):
    with pytest.raises(InvalidFaultError):
        simulate(layout3, circuit3, [FaultEvent(1, "cnot", 10**6, 0)], 2, True)
    with pytest.raises(InvalidFaultError):
        simulate(layout3, circuit3, [FaultEvent(9, "idle", 0, 0)], 2, True)


def _events_sets(hist):
    return set(hist.x_lattice_events), set(hist.z_lattice_events)


def test_linearity_over_fault_pairs(layout3, circuit3):
    # detection events are GF(2)-additive and residuals multiply
    rng = np.random.default_rng(7)
    params = NoiseParams(0.05)
    for _ in range(300):
        f1 = sample_faults(circuit3, params, 3, rng)
        f2 = sample_faults(circuit3, params, 3, rng)
        h1 = simulate(layout3, circuit3, f1, 3, True)
        h2 = simulate(layout3, circuit3, f2, 3, True)
        h12 = simulate(layout3, circuit3, f1 + f2, 3, True)
        x1, z1 = _events_sets(h1)
        x2, z2 = _events_sets(h2)
        x12, z12 = _events_sets(h12)
        assert x12 == x1 ^ x2
        assert z12 == z1 ^ z2
        assert h12.residual == multiply(h1.residual, h2.residual)


def test_enumeration_at_most_two_events_per_lattice(layout3, circuit3):
    records = enumerate_single_faults(layout3, circuit3, 3)
    for rec in records:
        assert len(rec.x_events) <= 2
        assert len(rec.z_events) <= 2


def test_enumeration_coefficients(layout3, circuit3):
    records = enumerate_single_faults(layout3, circuit3, 3)
    for rec in records:
        expected = {
            "idle": Fraction(1, 3),
            "cnot": Fraction(1, 15),
            "meas_x": Fraction(1),
            "meas_z": Fraction(1),
        }[rec.fault.kind]
        assert rec.coeff == expected


def test_enumeration_counts(layout3, circuit3):
    T = 3
    records = enumerate_single_faults(layout3, circuit3, T)
    per_round = (
        circuit3.n_cnots_per_round * 15
        + circuit3.n_x
        + circuit3.n_z
        + layout3.n_data * 3
    )
    assert len(records) == per_round * T
    no_idle = enumerate_single_faults(layout3, circuit3, T, include_idle=False)
    assert len(no_idle) == (per_round - layout3.n_data * 3) * T


def test_temporal_edge_has_five_fault_locations(layout3, circuit3):
    # an interior temporal pair is produced by 4 CNOT locations + 1 flip
    records = enumerate_single_faults(layout3, circuit3, 3)
    target = ((3, 2), (3, 3))
    locations = {
        (r.fault.round, r.fault.kind, r.fault.index)
        for r in records
        if r.x_events == target
    }
    assert len(locations) == 5
    kinds = Counter(kind for _, kind, _ in locations)
    assert kinds == Counter({"cnot": 4, "meas_z": 1})


def test_idle_noise_off_runs_clean(layout3, circuit3):
    rng = np.random.default_rng(5)
    faults = sample_faults(circuit3, NoiseParams(0.1), 3, rng, include_idle=False)
    assert all(f.kind != "idle" for f in faults)
    simulate(layout3, circuit3, faults, 3, True)
    assert fault_locations_per_round(circuit3, include_idle=False) == (
        fault_locations_per_round(circuit3) - layout3.n_data
    )


def test_monte_carlo_single_fault_signatures(layout3, circuit3):
    # among trials with exactly one fault, signature frequencies equal the
    # enumeration's relative rates (exact conditional law, 3-sigma band)
    T, p = 3, 0.002
    records = enumerate_single_faults(layout3, circuit3, T)
    total = sum(r.coeff for r in records if r.fault.kind != "cnot") + Fraction(
        sum(1 for r in records if r.fault.kind == "cnot"), 15
    )
    sig_coeff = {}
    for r in records:
        key = (r.x_events, r.z_events)
        sig_coeff[key] = sig_coeff.get(key, Fraction(0)) + r.coeff

    rng = np.random.default_rng(11)
    params = NoiseParams(p)
    n_samples = 40_000
    singles = 0
    counts = Counter()
    for _ in range(n_samples):
        faults = sample_faults(circuit3, params, T, rng)
        if len(faults) != 1:
            continue
        singles += 1
        hist = simulate(layout3, circuit3, faults, T, True)
        counts[
            (tuple(sorted(hist.x_lattice_events)), tuple(sorted(hist.z_lattice_events)))
        ] += 1

    assert singles > 5000
    top = sorted(sig_coeff.items(), key=lambda kv: -kv[1])[:15]
    for sig, coeff in top:
        q = float(coeff / total)
        expect = singles * q
        sigma = math.sqrt(singles * q * (1 - q))
        assert abs(counts[sig] - expect) <= 3 * sigma, (sig, counts[sig], expect)
