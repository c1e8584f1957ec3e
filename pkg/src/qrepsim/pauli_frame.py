"""Pauli error frames, noise channels and noisy single-qubit readout.

Each physical qubit carries a two-bit record of the Pauli error it has
accumulated: ``x`` set means an X factor, ``z`` set means a Z factor and both
set means Y (global phase is dropped).  Clifford gates conjugate the record,
noise channels XOR random Paulis into it and a measurement reports whether the
recorded error anticommutes with the measured observable.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from random import Random
from typing import Iterable, Sequence

# Pauli index convention used by the samplers: 0=I, 1=X, 2=Y, 3=Z.
PAULI_BITS = ((0, 0), (1, 0), (1, 1), (0, 1))
PAULI_LABELS = "IXYZ"

SINGLE_QUBIT_GATES = frozenset({"H", "S", "X", "Y", "Z", "I"})
TWO_QUBIT_GATES = frozenset({"CNOT", "CZ"})

MEMORY_DISABLED = math.inf


class ContractViolation(ValueError):
    """Raised when an operation is called outside its preconditions."""


class PauliFrame:
    """Mutable (x, z) error record of one qubit."""

    __slots__ = ("x", "z")

    def __init__(self, x: int = 0, z: int = 0):
        self.x = int(bool(x))
        self.z = int(bool(z))

    def __repr__(self) -> str:
        return f"PauliFrame({self.label})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliFrame):
            return NotImplemented
        return self.x == other.x and self.z == other.z

    def __hash__(self) -> int:
        return hash((self.x, self.z))

    @property
    def label(self) -> str:
        return PAULI_LABELS[PAULI_BITS.index((self.x, self.z))]

    @classmethod
    def from_label(cls, label: str) -> "PauliFrame":
        return cls(*PAULI_BITS[PAULI_LABELS.index(label.upper())])

    def copy(self) -> "PauliFrame":
        return PauliFrame(self.x, self.z)

    def is_clean(self) -> bool:
        return not (self.x or self.z)

    def clear(self) -> None:
        self.x = 0
        self.z = 0

    def apply(self, pauli: str | int) -> "PauliFrame":
        """XOR a Pauli (label or 0..3 index) into the frame."""
        if isinstance(pauli, str):
            pauli = PAULI_LABELS.index(pauli.upper())
        bx, bz = PAULI_BITS[pauli]
        self.x ^= bx
        self.z ^= bz
        return self

    def anticommutes_with(self, basis: str) -> bool:
        if basis == "Z":
            return bool(self.x)
        if basis == "X":
            return bool(self.z)
        if basis == "Y":
            return self.x != self.z
        raise ContractViolation(f"unknown measurement basis {basis!r}")


class QubitState(enum.Enum):
    FREE = "free"
    EMITTING = "emitting"
    ENTANGLED = "entangled"
    ANCILLA = "ancilla-in-use"


_qubit_ids = itertools.count()


class PhysicalQubit:
    """A matter qubit: error frame, owning node and initialization time.

    ``pool`` is the free-list the qubit returns to on release; it is set by
    :class:`qrepsim.desim.QubitPool` and is ``None`` for stand-alone qubits.
    """

    __slots__ = ("id", "node", "frame", "initialized_at", "state", "pool")

    def __init__(self, node: int = 0, initialized_at: float = 0.0, state: QubitState = QubitState.ENTANGLED,
                 pool=None):
        self.id = next(_qubit_ids)
        self.node = node
        self.frame = PauliFrame()
        self.initialized_at = initialized_at
        self.state = state
        self.pool = pool

    def __repr__(self) -> str:
        return (f"PhysicalQubit(id={self.id}, node={self.node}, frame={self.frame.label}, "
                f"t0={self.initialized_at:g}, state={self.state.value})")

    def reset(self, now: float) -> None:
        self.frame.clear()
        self.initialized_at = now
        self.state = QubitState.FREE


@dataclass(frozen=True)
class ChannelParams:
    """Noise parameters shared by every operation in one trajectory.

    ``tau`` is the memory lifetime in seconds; ``math.inf`` disables memory
    errors.
    """

    p_depo: float = 0.025
    lambda_gate: float = 0.0
    tau: float = 0.01
    p_meas: float = 0.0
    loss_db_per_km: float = 0.3

    def __post_init__(self):
        for name in ("p_depo", "lambda_gate", "p_meas"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
                raise ValueError(f"{name} must be a probability in [0, 1], got {value!r}")
        if not (isinstance(self.tau, (int, float)) and self.tau > 0) or math.isnan(self.tau):
            raise ValueError(f"tau must be positive (or infinite to disable memory errors), got {self.tau!r}")
        if not (isinstance(self.loss_db_per_km, (int, float)) and 0.0 <= self.loss_db_per_km < math.inf):
            raise ValueError(f"loss_db_per_km must be finite and >= 0, got {self.loss_db_per_km!r}")

    @property
    def memory_enabled(self) -> bool:
        return math.isfinite(self.tau)

    @classmethod
    def noiseless(cls) -> "ChannelParams":
        return cls(p_depo=0.0, lambda_gate=0.0, tau=MEMORY_DISABLED, p_meas=0.0, loss_db_per_km=0.0)


def apply_depolarizing(frame: PauliFrame, p_depo: float, rng: Random) -> PauliFrame:
    """With probability ``p_depo`` apply X, Y or Z, each with probability p_depo/3."""
    if p_depo <= 0.0:
        return frame
    r = rng.random()
    if r < p_depo:
        k = 1 + int(3.0 * r / p_depo)
        bx, bz = PAULI_BITS[k if k < 4 else 3]
        frame.x ^= bx
        frame.z ^= bz
    return frame


def _propagate_single(gate: str, f: PauliFrame) -> None:
    if gate == "H":
        f.x, f.z = f.z, f.x
    elif gate == "S":
        f.z ^= f.x
    elif gate not in ("X", "Y", "Z", "I"):
        raise ContractViolation(f"unknown single-qubit gate {gate!r}")


def _propagate_two(gate: str, c: PauliFrame, t: PauliFrame) -> None:
    if gate == "CNOT":
        t.x ^= c.x
        c.z ^= t.z
    elif gate == "CZ":
        cx = c.x
        c.z ^= t.x
        t.z ^= cx
    else:
        raise ContractViolation(f"unknown two-qubit gate {gate!r}")


def propagate_clifford(gate: str, *frames: PauliFrame) -> tuple[PauliFrame, ...]:
    """Conjugate the frame(s) through an ideal Clifford gate, in place.

    Two-qubit gates take ``(control, target)``.
    """
    if gate in TWO_QUBIT_GATES:
        if len(frames) != 2:
            raise ContractViolation(f"{gate} needs exactly two frames, got {len(frames)}")
        _propagate_two(gate, frames[0], frames[1])
    elif gate in SINGLE_QUBIT_GATES:
        if len(frames) != 1:
            raise ContractViolation(f"{gate} needs exactly one frame, got {len(frames)}")
        _propagate_single(gate, frames[0])
    else:
        raise ContractViolation(f"unknown gate {gate!r}")
    return frames


def apply_gate(gate: str, frames: Sequence[PauliFrame], lambda_gate: float, rng: Random) -> Sequence[PauliFrame]:
    """Noisy Clifford gate: ideal propagation followed by a uniform Pauli draw.

    With probability ``lambda_gate`` one of the 4 (or 16 for two-qubit gates)
    Pauli products is applied.  Identity is part of the draw, so the effective
    error rates are 3λ/4 and 15λ/16.
    """
    propagate_clifford(gate, *frames)
    if lambda_gate > 0.0:
        r = rng.random()
        if r < lambda_gate:
            if len(frames) == 1:
                bx, bz = PAULI_BITS[min(int(4.0 * r / lambda_gate), 3)]
                frames[0].x ^= bx
                frames[0].z ^= bz
            else:
                k = min(int(16.0 * r / lambda_gate), 15)
                ax, az = PAULI_BITS[k >> 2]
                bx, bz = PAULI_BITS[k & 3]
                frames[0].x ^= ax
                frames[0].z ^= az
                frames[1].x ^= bx
                frames[1].z ^= bz
    return frames


def gate(gate_name: str, qubits: Iterable[PhysicalQubit], lambda_gate: float, rng: Random) -> None:
    """:func:`apply_gate` on the frames of physical qubits."""
    apply_gate(gate_name, [q.frame for q in qubits], lambda_gate, rng)


def effective_gate_error_rates(lambda_gate: float) -> tuple[float, float]:
    """Probability that a one-/two-qubit gate leaves a non-identity error."""
    return 0.75 * lambda_gate, 15.0 * lambda_gate / 16.0


def memory_error_prob(elapsed: float, tau: float) -> float:
    """Depolarizing probability after storing a qubit for ``elapsed`` seconds."""
    if elapsed < 0:
        raise ContractViolation(f"elapsed time must be non-negative, got {elapsed!r}")
    if tau <= 0:
        raise ContractViolation(f"memory lifetime must be positive, got {tau!r}")
    if math.isinf(tau):
        return 0.0
    return 0.75 * -math.expm1(-elapsed / tau)


def apply_memory(qubit: PhysicalQubit, now: float, tau: float, rng: Random) -> PhysicalQubit:
    """Apply the stored-time depolarizing error to ``qubit``."""
    elapsed = now - qubit.initialized_at
    if elapsed < -1e-15:
        raise ContractViolation(f"qubit {qubit.id} initialized in the future ({qubit.initialized_at} > {now})")
    if elapsed > 0 and math.isfinite(tau):
        apply_depolarizing(qubit.frame, memory_error_prob(elapsed, tau), rng)
    return qubit


def measure(qubit: PhysicalQubit, basis: str, params: ChannelParams, now: float, rng: Random) -> int:
    """Noisy single-qubit readout, returning +1 or -1.

    The ideal reference outcome is +1; the memory error is applied first, the
    result is negated when the frame anticommutes with ``basis`` and finally
    flipped with probability ``params.p_meas``.
    """
    if qubit.state is QubitState.FREE:
        raise ContractViolation(f"cannot measure free qubit {qubit.id}")
    apply_memory(qubit, now, params.tau, rng)
    f = qubit.frame
    if basis == "Z":
        flipped = f.x
    elif basis == "X":
        flipped = f.z
    elif basis == "Y":
        flipped = f.x ^ f.z
    else:
        raise ContractViolation(f"unknown measurement basis {basis!r}")
    if params.p_meas > 0.0 and rng.random() < params.p_meas:
        flipped ^= 1
    return -1 if flipped else 1
