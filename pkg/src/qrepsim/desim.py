"""A small deterministic discrete-event engine with generator processes.

Processes are plain generators that yield :class:`Signal` objects (timeouts,
pool grants, other processes) and are resumed with the signal's value.  Events
are ordered by ``(time, seq)`` where ``seq`` is the insertion counter, so
equal-time events run first-in first-out and a fixed seed gives a fixed trace.
"""
from __future__ import annotations

import heapq
import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Generator, Hashable, Iterable, NamedTuple

from .pauli_frame import ContractViolation, PhysicalQubit, QubitState


class Event(NamedTuple):
    time: float
    seq: int
    action: Callable[[], Any]


class StopSimulation(Exception):
    pass


class Signal:
    """One-shot occurrence that processes can wait on."""

    __slots__ = ("sim", "triggered", "value", "_callbacks")

    def __init__(self, sim: "Simulator"):
        self.sim = sim
        self.triggered = False
        self.value = None
        self._callbacks: list[Callable[[Any], None]] | None = []

    def succeed(self, value=None) -> "Signal":
        if self.triggered:
            raise ContractViolation("signal already triggered")
        self.triggered = True
        self.value = value
        callbacks, self._callbacks = self._callbacks, None
        for cb in callbacks:
            cb(value)
        return self

    def add_callback(self, cb: Callable[[Any], None]) -> None:
        if self.triggered:
            cb(self.value)
        else:
            self._callbacks.append(cb)


class Process(Signal):
    """Drives a generator; triggers with the generator's return value."""

    __slots__ = ("_gen", "name")

    def __init__(self, sim: "Simulator", gen: Generator, name: str = ""):
        super().__init__(sim)
        self._gen = gen
        self.name = name
        sim.schedule(sim.now, lambda: self._resume(None))

    def _resume(self, value) -> None:
        gen = self._gen
        while True:
            try:
                target = gen.send(value)
            except StopIteration as stop:
                self.succeed(stop.value)
                return
            if isinstance(target, (int, float)):
                target = self.sim.timeout(target)
            if target.triggered:
                value = target.value
                continue
            target.add_callback(self._resume)
            return


def _action_name(action) -> str:
    # partials would otherwise show object addresses and break trace equality
    action = getattr(action, "func", action)
    return getattr(action, "__qualname__", type(action).__name__)


class Simulator:
    """Event loop with a simulated clock in seconds."""

    def __init__(self, trace: bool = False):
        self.now = 0.0
        self._queue: list[tuple[float, int, Callable[[], Any]]] = []
        self._seq = itertools.count()
        self.trace: list[tuple[float, int, str]] | None = [] if trace else None
        self.events_processed = 0

    def schedule(self, t: float, action: Callable[[], Any]) -> int:
        if t < self.now:
            raise ContractViolation(f"cannot schedule at {t} before now={self.now}")
        seq = next(self._seq)
        heapq.heappush(self._queue, (t, seq, action))
        return seq

    def timeout(self, delay: float, value=None) -> Signal:
        sig = Signal(self)
        if delay <= 0:
            sig.triggered = True
            sig.value = value
            sig._callbacks = None
            return sig
        self.schedule(self.now + delay, lambda: sig.succeed(value))
        return sig

    def process(self, gen: Generator, name: str = "") -> Process:
        return Process(self, gen, name)

    def stop(self) -> None:
        raise StopSimulation

    def step(self) -> None:
        t, seq, action = heapq.heappop(self._queue)
        self.now = t
        self.events_processed += 1
        if self.trace is not None:
            self.trace.append((t, seq, _action_name(action)))
        action()

    def run(self, until: float | None = None) -> None:
        try:
            while self._queue:
                if until is not None and self._queue[0][0] > until:
                    self.now = until
                    return
                self.step()
        except StopSimulation:
            pass

    def pending(self) -> list[Event]:
        return [Event(*e) for e in sorted(self._queue)]


class QubitPool:
    """Free list of qubits with atomic, FIFO-fair blocking acquisition."""

    def __init__(self, sim: Simulator, node: int, name: str, size: int):
        if size < 0:
            raise ValueError("pool size must be non-negative")
        self.sim = sim
        self.node = node
        self.name = name
        self.size = size
        self._free: deque[PhysicalQubit] = deque(
            PhysicalQubit(node=node, initialized_at=sim.now, state=QubitState.FREE, pool=self) for _ in range(size))
        self._waiters: deque[tuple[int, Signal]] = deque()

    def __repr__(self) -> str:
        return f"QubitPool(node={self.node}, name={self.name!r}, free={len(self._free)}/{self.size})"

    @property
    def free(self) -> int:
        return len(self._free)

    def _grant(self, n: int) -> list[PhysicalQubit]:
        now = self.sim.now
        out = []
        for _ in range(n):
            q = self._free.popleft()
            q.initialized_at = now
            q.state = QubitState.ENTANGLED
            out.append(q)
        return out

    def acquire(self, n: int = 1) -> Signal:
        if n <= 0:
            raise ContractViolation("request size must be positive")
        if n > self.size:
            raise ContractViolation(f"request for {n} qubits exceeds pool {self.name!r} size {self.size}")
        sig = Signal(self.sim)
        if not self._waiters and len(self._free) >= n:
            sig.triggered = True
            sig.value = self._grant(n)
            sig._callbacks = None
        else:
            self._waiters.append((n, sig))
        return sig

    def release(self, qubits: Iterable[PhysicalQubit]) -> None:
        now = self.sim.now
        for q in qubits:
            if q.pool is not self:
                raise ContractViolation(f"qubit {q.id} does not belong to pool {self.name!r}")
            if q.state is QubitState.FREE:
                raise ContractViolation(f"double release of qubit {q.id}")
            q.reset(now)
            self._free.append(q)
        while self._waiters and len(self._free) >= self._waiters[0][0]:
            n, sig = self._waiters.popleft()
            self.sim.schedule(now, partial(sig.succeed, self._grant(n)))


def release(qubits: Iterable[PhysicalQubit]) -> None:
    """Return qubits to whichever pools own them."""
    for q in qubits:
        q.pool.release((q,))


class Store:
    """FIFO queue of items (Bell resources) with blocking ``get``."""

    def __init__(self, sim: Simulator, key: Hashable = None):
        self.sim = sim
        self.key = key
        self.items: deque = deque()
        self._waiters: deque[tuple[int, Signal]] = deque()
        self.put_count = 0

    def __len__(self) -> int:
        return len(self.items)

    def put(self, item) -> None:
        self.put_count += 1
        self.items.append(item)
        while self._waiters and len(self.items) >= self._waiters[0][0]:
            n, sig = self._waiters.popleft()
            self.sim.schedule(self.sim.now, partial(sig.succeed, [self.items.popleft() for _ in range(n)]))

    def get(self, n: int = 1) -> Signal:
        sig = Signal(self.sim)
        if not self._waiters and len(self.items) >= n:
            sig.triggered = True
            sig.value = [self.items.popleft() for _ in range(n)]
            sig._callbacks = None
        else:
            self._waiters.append((n, sig))
        return sig


@dataclass
class Node:
    id: int
    position_km: float
    pools: dict[str, QubitPool] = field(default_factory=dict)

    def pool(self, name: str) -> QubitPool:
        return self.pools[name]

    def qubit_count(self) -> int:
        return sum(p.size for p in self.pools.values())


def classical_delay(from_node: Node, to_node: Node, c_fiber: float) -> float:
    return abs(from_node.position_km - to_node.position_km) / c_fiber
