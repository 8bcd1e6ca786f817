"""Circuit-level depolarizing noise: sampling, Pauli-frame simulation,
and exhaustive single-fault enumeration.

Noise model (fault rate p):

1. each data qubit suffers a uniform Pauli from {X, Y, Z} with probability
   p at its one idle step per round (the measure-and-reset step),
2. each CNOT suffers a uniform two-qubit Pauli from the 15 nontrivial
   pairs with probability p,
3. each ancilla measurement reports the wrong outcome with probability p.

Simulation tracks X and Z frames (bit vectors over all qubits) through the
Clifford schedule: a CNOT copies X from control to target and Z from target
to control.  Z-basis ancilla outcomes read the X frame, X-basis outcomes
read the Z frame; ancillas are reset after each measurement.  Frames are
exact for Pauli faults on Clifford circuits, and the map from fault sets to
detection events is linear over GF(2).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .code import CodeLayout, SECircuit
from .pauli import PauliOperator

# Two-qubit payload tables: payload index i in 0..14 encodes the pair
# (P_control, P_target) = divmod(i + 1, 4) with I,X,Y,Z = 0,1,2,3.
_PAIR = [divmod(i + 1, 4) for i in range(15)]
PAYLOAD_XC = np.array([pc in (1, 2) for pc, _ in _PAIR], dtype=bool)
PAYLOAD_ZC = np.array([pc in (2, 3) for pc, _ in _PAIR], dtype=bool)
PAYLOAD_XT = np.array([pt in (1, 2) for _, pt in _PAIR], dtype=bool)
PAYLOAD_ZT = np.array([pt in (2, 3) for _, pt in _PAIR], dtype=bool)

# Single-qubit payloads 0,1,2 = X,Y,Z.
PAYLOAD_X1 = np.array([True, True, False])
PAYLOAD_Z1 = np.array([False, True, True])

_PAULI_NAMES = "IXYZ"


class InvalidNoiseError(ValueError):
    """Noise parameters outside the supported range."""


class InvalidFaultError(ValueError):
    """A fault event references a location that does not exist."""


@dataclass(frozen=True)
class NoiseParams:
    """Physical fault rate for all three fault mechanisms."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise InvalidNoiseError(f"fault rate must be in [0, 1), got {self.p}")


@dataclass(frozen=True)
class FaultEvent:
    """A single injected fault.

    kind/index/payload:
      * "idle":  index = data qubit, payload 0,1,2 = X,Y,Z
      * "cnot":  index = flat CNOT position in the round schedule,
                 payload 0..14 = nontrivial (P_control, P_target) pair
      * "meas_x" / "meas_z": index = stabilizer, payload unused (flip)
    """

    round: int
    kind: str
    index: int
    payload: int = 0

    def describe(self, circuit: SECircuit) -> str:
        if self.kind == "idle":
            return f"r{self.round} idle q{self.index} {_PAULI_NAMES[self.payload + 1]}"
        if self.kind == "cnot":
            pc, pt = _PAIR[self.payload]
            layer, c, t = circuit.cnot_flat()[self.index]
            return (
                f"r{self.round} cnot#{self.index}(step {layer}, {c}->{t}) "
                f"{_PAULI_NAMES[pc]}{_PAULI_NAMES[pt]}"
            )
        return f"r{self.round} {self.kind}{self.index} flip"

    def coefficient(self) -> Fraction:
        """First-order probability of this fault in units of p."""
        if self.kind == "idle":
            return Fraction(1, 3)
        if self.kind == "cnot":
            return Fraction(1, 15)
        return Fraction(1)


def _cnot_flat(circuit: SECircuit):
    """Flat (layer, control, target) list over the round schedule, cached."""
    flat = getattr(circuit, "_cnot_flat_cache", None)
    if flat is None:
        flat = []
        for k, (cs, ts) in enumerate(circuit.cnot_layers):
            flat.extend((k, int(c), int(t)) for c, t in zip(cs, ts))
        object.__setattr__(circuit, "_cnot_flat_cache", flat)
    return flat


# Expose on SECircuit for describe(); kept here so code.py stays structural.
SECircuit.cnot_flat = _cnot_flat


@dataclass(frozen=True)
class SyndromeHistory:
    """Measured outcomes, derived detection events, and the residual error.

    ``x_lattice_events`` are detections of X-type errors, i.e. nodes
    (z_stabilizer_index, round); ``z_lattice_events`` are detections of
    Z-type errors on X-stabilizers.  Round indices are 1-based; when the
    history ends with a perfect round its outcomes occupy round T+1.
    """

    T: int
    final_round_perfect: bool
    x_anc_outcomes: np.ndarray  # (rounds, n_x) X-ancilla outcomes
    z_anc_outcomes: np.ndarray  # (rounds, n_z) Z-ancilla outcomes
    x_lattice_events: tuple[tuple[int, int], ...]
    z_lattice_events: tuple[tuple[int, int], ...]
    residual: PauliOperator

    @property
    def rounds_measured(self) -> int:
        return self.T + (1 if self.final_round_perfect else 0)


def sample_faults(
    circuit: SECircuit,
    params: NoiseParams,
    T: int,
    rng: np.random.Generator,
    include_idle: bool = True,
) -> list[FaultEvent]:
    """Draw independent faults for T rounds of the schedule.

    Locations are consumed in a fixed order (rounds ascending; within a
    round: CNOTs in schedule order, X measurements, Z measurements, data
    idles), so equal generators give equal fault lists.  ``include_idle``
    switches the once-per-round data memory fault on or off.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    p = params.p
    n_cnot = circuit.n_cnots_per_round
    n_x, n_z = circuit.n_x, circuit.n_z
    n_data = circuit.layout.n_data
    faults: list[FaultEvent] = []
    if p == 0.0:
        return faults
    for t in range(1, T + 1):
        for i in np.nonzero(rng.random(n_cnot) < p)[0]:
            faults.append(FaultEvent(t, "cnot", int(i), int(rng.integers(0, 15))))
        for i in np.nonzero(rng.random(n_x) < p)[0]:
            faults.append(FaultEvent(t, "meas_x", int(i)))
        for i in np.nonzero(rng.random(n_z) < p)[0]:
            faults.append(FaultEvent(t, "meas_z", int(i)))
        if include_idle:
            for i in np.nonzero(rng.random(n_data) < p)[0]:
                faults.append(FaultEvent(t, "idle", int(i), int(rng.integers(0, 3))))
    return faults


def _group_faults(circuit: SECircuit, faults, T: int):
    """Index faults by (round, phase) for the simulation loop."""
    flat = _cnot_flat(circuit)
    n_data = circuit.layout.n_data
    grouped: dict[tuple[int, str], list] = {}
    for f in faults:
        if not 1 <= f.round <= T:
            raise InvalidFaultError(f"fault round {f.round} outside 1..{T}")
        if f.kind == "cnot":
            if not 0 <= f.index < len(flat):
                raise InvalidFaultError(f"cnot index {f.index} out of range")
            layer, c, t = flat[f.index]
            grouped.setdefault((f.round, f"cnot{layer}"), []).append(
                (c, t, f.payload)
            )
        elif f.kind == "idle":
            if not 0 <= f.index < n_data:
                raise InvalidFaultError(f"idle qubit {f.index} out of range")
            grouped.setdefault((f.round, "idle"), []).append((f.index, f.payload))
        elif f.kind in ("meas_x", "meas_z"):
            limit = circuit.n_x if f.kind == "meas_x" else circuit.n_z
            if not 0 <= f.index < limit:
                raise InvalidFaultError(f"{f.kind} index {f.index} out of range")
            grouped.setdefault((f.round, f.kind), []).append(f.index)
        else:
            raise InvalidFaultError(f"unknown fault kind {f.kind!r}")
    return grouped


def _events_from_outcomes(outcomes: np.ndarray) -> tuple[tuple[int, int], ...]:
    """Detection events: outcome differs from the previous round (round 0 = 0)."""
    diffs = outcomes.copy()
    diffs[1:] ^= outcomes[:-1]
    ts, ss = np.nonzero(diffs)
    return tuple((int(s), int(t) + 1) for t, s in zip(ts, ss))


def simulate(
    layout: CodeLayout,
    circuit: SECircuit,
    faults,
    T: int,
    final_round_perfect: bool = True,
    initial_error: PauliOperator | None = None,
) -> SyndromeHistory:
    """Propagate the given faults through T rounds of syndrome extraction.

    An optional ``initial_error`` is applied to the data qubits before the
    first round.  When ``final_round_perfect`` is set, one fault-free
    syndrome readout of the residual error is appended (row T+1).
    """
    n_data = layout.n_data
    x = np.zeros(circuit.n_qubits, dtype=bool)
    z = np.zeros(circuit.n_qubits, dtype=bool)
    if initial_error is not None:
        if initial_error.n != n_data:
            raise ValueError("initial error size does not match data-qubit count")
        for q in range(n_data):
            x[q] = bool((initial_error.x_mask >> q) & 1)
            z[q] = bool((initial_error.z_mask >> q) & 1)

    grouped = _group_faults(circuit, faults, T)
    first_round = 1
    if initial_error is None and grouped:
        first_round = min(r for r, _ in grouped.keys())
    elif initial_error is None and not grouped:
        first_round = T + 1  # nothing ever happens

    anc = np.concatenate([circuit.x_anc_global, circuit.z_anc_global])
    out_x = np.zeros((T, circuit.n_x), dtype=np.uint8)
    out_z = np.zeros((T, circuit.n_z), dtype=np.uint8)

    for t in range(first_round, T + 1):
        for k, (cs, ts) in enumerate(circuit.cnot_layers):
            x[ts] ^= x[cs]
            z[cs] ^= z[ts]
            for c, tq, pay in grouped.get((t, f"cnot{k}"), ()):
                x[c] ^= bool(PAYLOAD_XC[pay])
                z[c] ^= bool(PAYLOAD_ZC[pay])
                x[tq] ^= bool(PAYLOAD_XT[pay])
                z[tq] ^= bool(PAYLOAD_ZT[pay])
        ox = z[circuit.x_anc_global].astype(np.uint8)
        oz = x[circuit.z_anc_global].astype(np.uint8)
        for i in grouped.get((t, "meas_x"), ()):
            ox[i] ^= 1
        for i in grouped.get((t, "meas_z"), ()):
            oz[i] ^= 1
        out_x[t - 1] = ox
        out_z[t - 1] = oz
        x[anc] = False
        z[anc] = False
        for q, pay in grouped.get((t, "idle"), ()):
            x[q] ^= bool(PAYLOAD_X1[pay])
            z[q] ^= bool(PAYLOAD_Z1[pay])

    if final_round_perfect:
        perfect_x = (circuit.x_support @ z[:n_data].astype(np.uint8)) & 1
        perfect_z = (circuit.z_support @ x[:n_data].astype(np.uint8)) & 1
        out_x = np.vstack([out_x, perfect_x[None, :]])
        out_z = np.vstack([out_z, perfect_z[None, :]])

    x_mask = int.from_bytes(
        np.packbits(x[:n_data], bitorder="little").tobytes(), "little"
    )
    z_mask = int.from_bytes(
        np.packbits(z[:n_data], bitorder="little").tobytes(), "little"
    )

    return SyndromeHistory(
        T=T,
        final_round_perfect=final_round_perfect,
        x_anc_outcomes=out_x,
        z_anc_outcomes=out_z,
        x_lattice_events=_events_from_outcomes(out_z),
        z_lattice_events=_events_from_outcomes(out_x),
        residual=PauliOperator(n_data, x_mask, z_mask),
    )


@dataclass(frozen=True)
class FaultRecord:
    """One enumerated fault with its detection signature and rate.

    ``x_residual`` / ``z_residual`` are the data-qubit masks of the fault's
    residual error after all rounds; they supply the per-edge correction
    content when decoding graphs are assembled.
    """

    fault: FaultEvent
    x_events: tuple[tuple[int, int], ...]
    z_events: tuple[tuple[int, int], ...]
    coeff: Fraction  # first-order probability = coeff * p
    x_residual: int = 0
    z_residual: int = 0


def enumerate_single_faults(
    layout: CodeLayout,
    circuit: SECircuit,
    T: int,
    final_round_perfect: bool = True,
    include_idle: bool = True,
) -> list[FaultRecord]:
    """Inject every possible single fault once and record its signature.

    The returned list covers every (round, location, payload) triple of the
    noise model exactly once.  Signatures are sorted event tuples; the
    linearity of frame propagation makes them the exact first-order
    detection pattern of the fault.  ``include_idle`` mirrors the sampler's
    idle-noise switch.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    records = []
    n_cnot = circuit.n_cnots_per_round

    def run(fault: FaultEvent) -> FaultRecord:
        hist = simulate(layout, circuit, [fault], T, final_round_perfect)
        return FaultRecord(
            fault=fault,
            x_events=tuple(sorted(hist.x_lattice_events)),
            z_events=tuple(sorted(hist.z_lattice_events)),
            coeff=fault.coefficient(),
            x_residual=hist.residual.x_mask,
            z_residual=hist.residual.z_mask,
        )

    for t in range(1, T + 1):
        for i in range(n_cnot):
            for pay in range(15):
                records.append(run(FaultEvent(t, "cnot", i, pay)))
        for i in range(circuit.n_x):
            records.append(run(FaultEvent(t, "meas_x", i)))
        for i in range(circuit.n_z):
            records.append(run(FaultEvent(t, "meas_z", i)))
        if include_idle:
            for q in range(layout.n_data):
                for pay in range(3):
                    records.append(run(FaultEvent(t, "idle", q, pay)))
    return records


def fault_locations_per_round(circuit: SECircuit, include_idle: bool = True) -> int:
    """Number of independent fault locations in one round of the schedule."""
    n = circuit.n_cnots_per_round + circuit.n_x + circuit.n_z
    if include_idle:
        n += circuit.layout.n_data
    return n
