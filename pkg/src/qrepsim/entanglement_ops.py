"""Network protocols as event-driven processes.

Every protocol here is a generator meant to run inside
:meth:`qrepsim.desim.Simulator.process`; the value it returns is the produced
:class:`BellResource` (or ``None`` when a purification round rejects).

Resources are stored left-to-right: ``left_node < right_node``.  Byproduct
corrections of swaps always land on the right end.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from random import Random
from typing import Sequence, Union

from .desim import Node, QubitPool, Simulator, classical_delay, release
from .pauli_frame import ChannelParams, ContractViolation, PhysicalQubit, apply_depolarizing, gate, measure
from .steane import (LogicalQubit, apply_logical_pauli, encode_from_physical, logical_measure, prepare_logical,
                     run_qec, transversal_gate, N_ANCILLA, N_DATA)

PHYSICAL = "physical"
LOGICAL = "logical"

Half = Union[PhysicalQubit, LogicalQubit]


@dataclass
class BellResource:
    kind: str
    left_node: int
    right_node: int
    left: Half
    right: Half
    created_at: float
    # link-level pairs that went into this resource (its own plus everything it absorbed)
    link_pairs: int = 1

    def __post_init__(self):
        if self.left_node == self.right_node:
            raise ContractViolation("a Bell resource must span two different nodes")

    def qubits(self) -> list[PhysicalQubit]:
        if self.kind == PHYSICAL:
            return [self.left, self.right]
        return [*self.left.data, *self.right.data]

    def spans(self, a: int, b: int) -> bool:
        return self.left_node == a and self.right_node == b


@dataclass
class Network:
    """Shared context of one trajectory: clock, nodes, noise and random stream."""

    sim: Simulator
    nodes: list[Node]
    params: ChannelParams
    rng: Random
    c_fiber: float = 300_000.0
    counters: Counter = field(default_factory=Counter)

    def delay(self, a: int, b: int) -> float:
        return classical_delay(self.nodes[a], self.nodes[b], self.c_fiber)

    def distance(self, a: int, b: int) -> float:
        return abs(self.nodes[a].position_km - self.nodes[b].position_km)

    def pool(self, node: int, name: str) -> QubitPool:
        return self.nodes[node].pools[name]


def link_success_probability(loss_db_per_km: float, distance_km: float) -> float:
    return 10.0 ** (-loss_db_per_km * distance_km / 10.0)


def link_attempt(p_success: float, rng: Random) -> bool:
    """One heralded attempt: both photons detected at the analyzer."""
    return p_success >= 1.0 or rng.random() < p_success


def attempts_until_success(p_success: float, rng: Random) -> int:
    if p_success <= 0.0:
        raise ContractViolation("link success probability is zero; generation would never finish")
    k = 1
    while not link_attempt(p_success, rng):
        k += 1
    return k


def generate_link_pair(net: Network, left: int, right: int, left_pool: QubitPool, right_pool: QubitPool,
                       rng: Random | None = None):
    """Repeat-until-success memory-memory link generation.

    The analyzer sits at ``right``: an attempt costs one photon flight from
    ``left`` plus one heralding message back, so each attempt takes two
    one-way delays.  Failed attempts leave the qubits clean, so only the
    final attempt matters for their frames and timestamps.

    ``rng`` lets each generator own a stream so that runs of different
    strategies with the same seed see the same attempt sequences.
    """
    if right != left + 1:
        raise ContractViolation(f"link generation needs adjacent nodes, got {left}-{right}")
    (q1,) = yield left_pool.acquire(1)
    (q2,) = yield right_pool.acquire(1)
    t_delay = net.delay(left, right)
    p = link_success_probability(net.params.loss_db_per_km, net.distance(left, right))
    rng = rng or net.rng
    k = attempts_until_success(p, rng)
    net.counters["link_attempts"] += k
    yield 2.0 * t_delay * k
    now = net.sim.now
    q1.initialized_at = now - 2.0 * t_delay
    q2.initialized_at = now - t_delay
    apply_depolarizing(q1.frame, net.params.p_depo, rng)
    apply_depolarizing(q2.frame, net.params.p_depo, rng)
    net.counters["link_pairs"] += 1
    return BellResource(PHYSICAL, left, right, q1, q2, now)


def _check_same_span(*resources: BellResource) -> None:
    a, b = resources[0].left_node, resources[0].right_node
    for r in resources:
        if r.kind != PHYSICAL:
            raise ContractViolation("Ss-Dp purifies physical pairs only")
        if not r.spans(a, b):
            raise ContractViolation("purification needs three pairs between the same two nodes")


def ss_dp_purify(net: Network, resource: BellResource, aux1: BellResource, aux2: BellResource):
    """Single-selection double-purification round.

    At both ends: CNOT(resource -> aux1), CNOT(aux2 -> resource); aux1 is read
    in Z (catches X errors), aux2 in X (catches Z errors).  After the outcomes
    are exchanged the resource is kept only when both checks agree.
    """
    _check_same_span(resource, aux1, aux2)
    params, rng, sim = net.params, net.rng, net.sim
    lam = params.lambda_gate
    for side in ("left", "right"):
        r, a1, a2 = getattr(resource, side), getattr(aux1, side), getattr(aux2, side)
        gate("CNOT", (r, a1), lam, rng)
        gate("CNOT", (a2, r), lam, rng)
    now = sim.now
    z_check = measure(aux1.left, "Z", params, now, rng) * measure(aux1.right, "Z", params, now, rng)
    x_check = measure(aux2.left, "X", params, now, rng) * measure(aux2.right, "X", params, now, rng)
    net.counters["purify_attempts"] += 1
    net.counters["purify_pairs_consumed"] += 3
    yield net.delay(resource.left_node, resource.right_node)
    release(aux1.qubits() + aux2.qubits())
    if z_check > 0 and x_check > 0:
        net.counters["purify_accepted"] += 1
        resource.created_at = sim.now
        resource.link_pairs += aux1.link_pairs + aux2.link_pairs
        return resource
    release(resource.qubits())
    return None


def _swap_delay(net: Network, left_node: int, swapper: int, right_node: int) -> float:
    # results go to both ends; only the longer flight gates the next step
    return max(net.delay(swapper, left_node), net.delay(swapper, right_node))


def swap_physical(net: Network, left: BellResource, right: BellResource, swapper: int):
    if left.right_node != swapper or right.left_node != swapper:
        raise ContractViolation(f"pairs {left.left_node}-{left.right_node} and {right.left_node}-{right.right_node} "
                                f"do not meet at node {swapper}")
    params, rng, sim = net.params, net.rng, net.sim
    b, c = left.right, right.left
    gate("CNOT", (b, c), params.lambda_gate, rng)
    gate("H", (b,), params.lambda_gate, rng)
    now = sim.now
    m_b = measure(b, "Z", params, now, rng)
    m_c = measure(c, "Z", params, now, rng)
    release((b, c))
    net.counters["swaps"] += 1
    yield _swap_delay(net, left.left_node, swapper, right.right_node)
    d = right.right
    if m_c < 0:
        d.frame.x ^= 1
    if m_b < 0:
        d.frame.z ^= 1
    return BellResource(PHYSICAL, left.left_node, right.right_node, left.left, d, sim.now,
                        left.link_pairs + right.link_pairs)


def qec(net: Network, lq: LogicalQubit):
    """Process: borrow six ancillas on the block's node and run one QEC round."""
    ancillas = yield net.pool(lq.node, "ancilla").acquire(N_ANCILLA)
    run_qec(lq, ancillas, net.params, net.sim.now, net.rng)
    release(ancillas)
    net.counters["qec_rounds"] += 1


def measure_logical(net: Network, lq: LogicalQubit, basis: str):
    """Process: QEC followed by transversal readout; returns +1/-1."""
    ancillas = yield net.pool(lq.node, "ancilla").acquire(N_ANCILLA)
    outcome = logical_measure(lq, basis, net.params, net.sim.now, net.rng, ancillas)
    release(ancillas)
    net.counters["qec_rounds"] += 1
    return outcome


def swap_logical(net: Network, left: BellResource, right: BellResource, swapper: int):
    if left.kind != LOGICAL or right.kind != LOGICAL:
        raise ContractViolation("logical swap needs two logical resources")
    if left.right_node != swapper or right.left_node != swapper:
        raise ContractViolation(f"logical pairs do not meet at node {swapper}")
    params, rng, sim = net.params, net.rng, net.sim
    b, c = left.right, right.left
    yield from qec(net, b)
    yield from qec(net, c)
    transversal_gate("CNOT", (b, c), params.lambda_gate, rng)
    yield from qec(net, b)
    yield from qec(net, c)
    transversal_gate("H", (b,), params.lambda_gate, rng)
    yield from qec(net, b)
    m_b = yield from measure_logical(net, b, "Z")
    m_c = yield from measure_logical(net, c, "Z")
    release(b.data + c.data)
    net.counters["swaps"] += 1
    yield _swap_delay(net, left.left_node, swapper, right.right_node)
    d = right.right
    if m_c < 0:
        apply_logical_pauli(d, "X")
    if m_b < 0:
        apply_logical_pauli(d, "Z")
    return BellResource(LOGICAL, left.left_node, right.right_node, left.left, d, sim.now,
                        left.link_pairs + right.link_pairs)


def swap(net: Network, left: BellResource, right: BellResource, swapper: int):
    if left.kind == PHYSICAL and right.kind == PHYSICAL:
        return (yield from swap_physical(net, left, right, swapper))
    return (yield from swap_logical(net, left, right, swapper))


def nonlocal_cnot_encode(net: Network, pairs: Sequence[BellResource], left_pool: QubitPool, right_pool: QubitPool):
    """Logical Bell pair from |+> (left) and |0> (right) via seven teleported CNOTs.

    Per position i: left does CNOT(data_i -> a_i) and reads a_i in Z; after
    one delay right applies the X byproduct to b_i, does CNOT(b_i -> data_i),
    H(b_i) and reads b_i in Z; after a second delay left applies the Z
    byproduct to data_i.
    """
    if len(pairs) != N_DATA:
        raise ContractViolation(f"non-local CNOT encoding needs 7 Bell pairs, got {len(pairs)}")
    _check_same_span(*pairs)
    left, right = pairs[0].left_node, pairs[0].right_node
    params, rng, sim = net.params, net.rng, net.sim
    lam = params.lambda_gate
    dl = yield left_pool.acquire(N_DATA)
    dr = yield right_pool.acquire(N_DATA)
    block_l = prepare_logical(dl, True, lam, rng)
    block_r = prepare_logical(dr, False, lam, rng)
    now = sim.now
    m1 = []
    for i, pair in enumerate(pairs):
        gate("CNOT", (block_l.data[i], pair.left), lam, rng)
        m1.append(measure(pair.left, "Z", params, now, rng))
    release([p.left for p in pairs])
    t_delay = net.delay(left, right)
    yield t_delay
    now = sim.now
    m2 = []
    for i, pair in enumerate(pairs):
        b = pair.right
        if m1[i] < 0:
            b.frame.x ^= 1
        gate("CNOT", (b, block_r.data[i]), lam, rng)
        gate("H", (b,), lam, rng)
        m2.append(measure(b, "Z", params, now, rng))
    release([p.right for p in pairs])
    yield t_delay
    for i in range(N_DATA):
        if m2[i] < 0:
            block_l.data[i].frame.z ^= 1
    net.counters["ncx_encodings"] += 1
    net.counters["ncx_pairs_consumed"] += N_DATA
    return BellResource(LOGICAL, left, right, block_l, block_r, sim.now, sum(p.link_pairs for p in pairs))


def encode_pair(net: Network, resource: BellResource, left_pool: QubitPool, right_pool: QubitPool):
    """Purified encoding: each end encodes its half of a physical pair with six fresh qubits.

    The logical resource is registered once both ends have heard that the
    other block is ready (one classical delay).
    """
    if resource.kind != PHYSICAL:
        raise ContractViolation("only physical pairs can seed an encoding")
    lam, rng = net.params.lambda_gate, net.rng
    fl = yield left_pool.acquire(N_DATA - 1)
    fr = yield right_pool.acquire(N_DATA - 1)
    block_l = encode_from_physical(resource.left, fl, lam, rng)
    block_r = encode_from_physical(resource.right, fr, lam, rng)
    net.counters["seed_encodings"] += 1
    yield net.delay(resource.left_node, resource.right_node)
    return BellResource(LOGICAL, resource.left_node, resource.right_node, block_l, block_r, net.sim.now,
                        resource.link_pairs)


def werner_pair(net: Network, left: int, right: int, fidelity: float, left_pool: QubitPool,
                right_pool: QubitPool):
    """Test helper: a pair whose left half carries I/X/Y/Z with weights F, (1-F)/3 x3."""
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError("fidelity must be in [0, 1]")
    (q1,) = yield left_pool.acquire(1)
    (q2,) = yield right_pool.acquire(1)
    apply_depolarizing(q1.frame, 1.0 - fidelity, net.rng)
    return BellResource(PHYSICAL, left, right, q1, q2, net.sim.now)


def measure_pair(net: Network, resource: BellResource, basis: str):
    """Process: read both halves in ``basis`` and return the outcome product."""
    if resource.kind == PHYSICAL:
        now = net.sim.now
        a = measure(resource.left, basis, net.params, now, net.rng)
        b = measure(resource.right, basis, net.params, now, net.rng)
    else:
        a = yield from measure_logical(net, resource.left, basis)
        b = yield from measure_logical(net, resource.right, basis)
    release(resource.qubits())
    return a * b
