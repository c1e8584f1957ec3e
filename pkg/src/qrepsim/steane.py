"""[[7,1,3]] Steane code over Pauli frames.

Data positions are 0-indexed here; position ``i`` corresponds to Hamming
position ``i + 1``.  The X-type generators are measured first (they detect Z
errors), then the Z-type ones, each with its own ancilla prepared in |+> and
read out in the X basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Sequence

from .pauli_frame import ChannelParams, ContractViolation, PhysicalQubit, QubitState, gate, measure

N_DATA = 7
N_ANCILLA = 6

# Hamming-ordered supports: generator k covers positions whose (1-indexed)
# binary label has bit k set.
SUPPORTS: tuple[tuple[int, ...], ...] = (
    (0, 2, 4, 6),
    (1, 2, 5, 6),
    (3, 4, 5, 6),
)

# (seed position, pivot positions) of the encoder below.
SEED_POSITION = 2
_SEED_SPREAD = (4, 5)
_PIVOTS = (0, 1, 3)


@dataclass
class LogicalQubit:
    data: list[PhysicalQubit]
    node: int

    def __post_init__(self):
        if len(self.data) != N_DATA or len({q.id for q in self.data}) != N_DATA:
            raise ContractViolation("a logical qubit needs 7 distinct physical qubits")
        if any(q.node != self.node for q in self.data):
            raise ContractViolation(f"all data qubits must live on node {self.node}")

    def frames(self) -> list[tuple[int, int]]:
        return [(q.frame.x, q.frame.z) for q in self.data]

    def x_pattern(self) -> int:
        return sum(q.frame.x << i for i, q in enumerate(self.data))

    def z_pattern(self) -> int:
        return sum(q.frame.z << i for i, q in enumerate(self.data))


@dataclass(frozen=True)
class Syndrome:
    """``x_bits`` come from the Z-type generators, ``z_bits`` from the X-type."""

    x_bits: tuple[int, int, int]
    z_bits: tuple[int, int, int]

    @property
    def x_position(self) -> int | None:
        return _bits_to_position(self.x_bits)

    @property
    def z_position(self) -> int | None:
        return _bits_to_position(self.z_bits)

    def is_trivial(self) -> bool:
        return not any(self.x_bits) and not any(self.z_bits)


def _bits_to_position(bits: Sequence[int]) -> int | None:
    label = bits[0] | (bits[1] << 1) | (bits[2] << 2)
    return label - 1 if label else None


def _check_same_node(qubits: Sequence[PhysicalQubit]) -> int:
    node = qubits[0].node
    if any(q.node != node for q in qubits):
        raise ContractViolation("encoding needs all qubits on one node")
    return node


def encode_from_physical(seed: PhysicalQubit, fresh: Sequence[PhysicalQubit], lambda_gate: float,
                         rng: Random) -> LogicalQubit:
    """Encode ``seed`` into a Steane block together with six fresh qubits.

    The seed sits at position 3 and is first spread to positions 5 and 6
    (X on {3,5,6} is a logical X, Z on {1,2,3} a logical Z after the
    pivots fan out).  Positions 1, 2 and 4 are Hadamard pivots that fan out
    the three X-type generators.  All gates go through the noisy gate model.
    """
    if len(fresh) != N_DATA - 1:
        raise ContractViolation(f"encoding needs 6 fresh qubits, got {len(fresh)}")
    node = _check_same_node([seed, *fresh])
    data = list(fresh[:SEED_POSITION]) + [seed] + list(fresh[SEED_POSITION:])
    for t in _SEED_SPREAD:
        gate("CNOT", (data[SEED_POSITION], data[t]), lambda_gate, rng)
    for p in _PIVOTS:
        gate("H", (data[p],), lambda_gate, rng)
    for p, support in zip(_PIVOTS, SUPPORTS):
        for t in support:
            if t != p:
                gate("CNOT", (data[p], data[t]), lambda_gate, rng)
    return LogicalQubit(data, node)


def prepare_logical(qubits: Sequence[PhysicalQubit], plus: bool, lambda_gate: float, rng: Random) -> LogicalQubit:
    """Prepare |0> (or |+> when ``plus``) from seven fresh qubits."""
    seed = qubits[SEED_POSITION]
    if plus:
        gate("H", (seed,), lambda_gate, rng)
    return encode_from_physical(seed, [q for i, q in enumerate(qubits) if i != SEED_POSITION], lambda_gate, rng)


def extract_syndrome(lq: LogicalQubit, ancillas: Sequence[PhysicalQubit], params: ChannelParams, now: float,
                     rng: Random) -> Syndrome:
    """Measure g1..g6 with one ancilla each (non fault tolerant)."""
    if len(ancillas) < N_ANCILLA:
        raise ContractViolation(f"syndrome extraction needs {N_ANCILLA} ancillas, got {len(ancillas)}")
    if any(a.node != lq.node for a in ancillas):
        raise ContractViolation("ancillas must be on the logical qubit's node")
    lam = params.lambda_gate
    bits = []
    for k in range(N_ANCILLA):
        anc = ancillas[k]
        anc.state = QubitState.ANCILLA
        coupling = "CNOT" if k < 3 else "CZ"
        gate("H", (anc,), lam, rng)
        for pos in SUPPORTS[k % 3]:
            gate(coupling, (anc, lq.data[pos]), lam, rng)
        bits.append(1 if measure(anc, "X", params, now, rng) < 0 else 0)
    return Syndrome(x_bits=(bits[3], bits[4], bits[5]), z_bits=(bits[0], bits[1], bits[2]))


def correct(lq: LogicalQubit, s: Syndrome) -> LogicalQubit:
    """Pauli-frame correction of the single-qubit error the syndrome points at."""
    pos = s.x_position
    if pos is not None:
        lq.data[pos].frame.x ^= 1
    pos = s.z_position
    if pos is not None:
        lq.data[pos].frame.z ^= 1
    return lq


def run_qec(lq: LogicalQubit, ancillas: Sequence[PhysicalQubit], params: ChannelParams, now: float,
            rng: Random) -> Syndrome:
    s = extract_syndrome(lq, ancillas, params, now, rng)
    correct(lq, s)
    return s


def transversal_gate(gate_name: str, lqs: Sequence[LogicalQubit], lambda_gate: float, rng: Random):
    if gate_name == "CNOT":
        if len(lqs) != 2:
            raise ContractViolation("logical CNOT needs two blocks")
        control, target = lqs
        if control.node != target.node:
            raise ContractViolation("transversal CNOT needs both blocks on one node")
        for a, b in zip(control.data, target.data):
            gate("CNOT", (a, b), lambda_gate, rng)
    else:
        if len(lqs) != 1:
            raise ContractViolation(f"logical {gate_name} acts on one block")
        for q in lqs[0].data:
            gate(gate_name, (q,), lambda_gate, rng)
    return lqs


def apply_logical_pauli(lq: LogicalQubit, pauli: str) -> LogicalQubit:
    """Noise-free logical byproduct correction (X^7, Z^7 or both)."""
    for q in lq.data:
        q.frame.apply(pauli)
    return lq


def hamming_syndrome(bits: Sequence[int]) -> int:
    label = 0
    for k, support in enumerate(SUPPORTS):
        if sum(bits[i] for i in support) & 1:
            label |= 1 << k
    return label


def hamming_correct(bits: Sequence[int]) -> tuple[list[int], int]:
    """Correct a single bit flip against the [7,4,3] code; return (bits, parity)."""
    if len(bits) != N_DATA:
        raise ContractViolation("Hamming decoding needs 7 bits")
    out = [int(bool(b)) for b in bits]
    label = hamming_syndrome(out)
    if label:
        out[label - 1] ^= 1
    return out, sum(out) & 1


def logical_measure(lq: LogicalQubit, basis: str, params: ChannelParams, now: float, rng: Random,
                    ancillas: Sequence[PhysicalQubit] | None = None) -> int:
    """QEC, transversal readout and classical Hamming decoding.

    Pass ``ancillas=None`` to skip the QEC round (used by tests that isolate
    the classical decoder).
    """
    if ancillas is not None:
        run_qec(lq, ancillas, params, now, rng)
    bits = [1 if measure(q, basis, params, now, rng) < 0 else 0 for q in lq.data]
    _, parity = hamming_correct(bits)
    return -1 if parity else 1
