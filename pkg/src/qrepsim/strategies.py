"""The six entanglement-distribution strategies on a linear repeater chain.

A trajectory wires pipelined processes together through FIFO stores:

    link generators -> link stage -> round-based swaps -> end stage -> estimator

Link and end stages are identity, Ss-Dp, Ss-Dp + encoding or non-local CNOT
encoding depending on the strategy.  The estimator measures end-to-end pairs
in XX, YY, ZZ blocks and stops the trajectory after ``n_meas`` samples.
"""
from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from random import Random
from typing import Any

from . import entanglement_ops as ops
from .desim import Node, QubitPool, Simulator, Store
from .pauli_frame import ChannelParams

STRATEGIES = ("ZeroG", "OneG", "E2E-OneG", "TwoG", "HG-PE", "E2E-HG-PE")
SUPPORTED_HOPS = (2, 4, 8)

_ALIASES = {
    "zerog": "ZeroG", "0g": "ZeroG",
    "oneg": "OneG", "1g": "OneG",
    "e2e-oneg": "E2E-OneG", "e2e-1g": "E2E-OneG",
    "twog": "TwoG", "2g": "TwoG",
    "hg-pe": "HG-PE", "hgpe": "HG-PE",
    "e2e-hg-pe": "E2E-HG-PE", "e2e-hgpe": "E2E-HG-PE",
}

# link-level Bell pairs consumed per link-level product
LINK_CONSUMPTION = {"ZeroG": 1, "OneG": 3, "E2E-OneG": 1, "TwoG": 7, "HG-PE": 3, "E2E-HG-PE": 1}

# link-level pairs behind each delivered end-to-end pair, per hop
PAIRS_PER_DELIVERED = {"ZeroG": 1, "OneG": 3, "E2E-OneG": 3, "TwoG": 7, "HG-PE": 3, "E2E-HG-PE": 3}

# Phi+ is stabilized by +XX, -YY, +ZZ
REFERENCE_SIGN = {"X": 1, "Y": -1, "Z": 1}


class ConfigError(ValueError):
    pass


def canonical_strategy(name: str) -> str:
    if name in STRATEGIES:
        return name
    try:
        return _ALIASES[name.strip().lower().replace("_", "-")]
    except KeyError:
        raise ConfigError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGIES)}") from None


def is_logical(strategy: str) -> bool:
    return strategy in ("TwoG", "HG-PE", "E2E-HG-PE")


@dataclass(frozen=True)
class Topology:
    """Chain geometry and per-node memory sizes.

    Every node owns ``memory_qubits`` qubits per neighbouring link.  Strategies
    that encode at a node carve ``data_qubits`` (fresh qubits for logical
    blocks) and ``ancilla_qubits`` (syndrome qubits) out of that budget; the
    rest are communication qubits, one per concurrent generation attempt.
    All strategies therefore run on the same hardware.
    """

    total_km: float = 100.0
    c_fiber: float = 300_000.0
    memory_qubits: int = 64
    data_qubits: int = 14
    ancilla_qubits: int = 6

    def __post_init__(self):
        if not (self.total_km > 0 and math.isfinite(self.total_km)):
            raise ConfigError(f"total_km must be positive and finite, got {self.total_km!r}")
        if not (self.c_fiber > 0 and math.isfinite(self.c_fiber)):
            raise ConfigError(f"c_fiber must be positive and finite, got {self.c_fiber!r}")
        for name in ("memory_qubits", "data_qubits", "ancilla_qubits"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ConfigError(f"{name} must be a non-negative integer, got {v!r}")


def encodes_at(strategy: str, node: int, hops: int) -> bool:
    """Whether ``node`` holds logical blocks under ``strategy``."""
    if strategy in ("TwoG", "HG-PE"):
        return True
    return strategy == "E2E-HG-PE" and node in (0, hops)


def interface_layout(strategy: str, topology: Topology, node: int, hops: int) -> dict[str, int]:
    """Split one link interface's memory into link, data and ancilla qubits."""
    strategy = canonical_strategy(strategy)
    data = ancilla = 0
    if encodes_at(strategy, node, hops):
        data, ancilla = topology.data_qubits, topology.ancilla_qubits
    return {"link": topology.memory_qubits - data - ancilla, "data": data, "ancilla": ancilla}


def minimum_pool_sizes(strategy: str) -> dict[str, int]:
    strategy = canonical_strategy(strategy)
    link = {"ZeroG": 1, "OneG": 3, "E2E-OneG": 3, "TwoG": 7, "HG-PE": 3, "E2E-HG-PE": 3}[strategy]
    data = {"TwoG": 7, "HG-PE": 6, "E2E-HG-PE": 6}.get(strategy, 0)
    ancilla = 6 if is_logical(strategy) else 0
    return {"link": link, "data": data, "ancilla": ancilla}


def validate_pools(strategy: str, topology: Topology, hops: int = 2) -> None:
    need = minimum_pool_sizes(strategy)
    shortfalls = []
    for node in (0, 1):
        layout = interface_layout(strategy, topology, node, hops)
        if not encodes_at(strategy, node, hops):
            layout = dict(layout, data=need["data"], ancilla=need["ancilla"])
        for name, have in layout.items():
            if have < need[name]:
                shortfalls.append(f"{name} qubits {have} < {need[name]}")
    if shortfalls:
        raise ConfigError(f"strategy {strategy} needs more memory per interface: " + ", ".join(dict.fromkeys(shortfalls)))


@dataclass(frozen=True)
class StrategyConfig:
    strategy: str = "ZeroG"
    hops: int = 2
    n_meas: int = 9000
    trajectories: int = 1
    channel: ChannelParams = field(default_factory=ChannelParams)
    topology: Topology = field(default_factory=Topology)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "strategy", canonical_strategy(self.strategy))
        if self.hops not in SUPPORTED_HOPS:
            raise ConfigError(f"hops must be one of {SUPPORTED_HOPS}, got {self.hops!r}")
        if self.n_meas < 3:
            raise ConfigError(f"n_meas must be at least 3, got {self.n_meas}")
        if self.trajectories < 1:
            raise ConfigError("trajectories must be at least 1")
        validate_pools(self.strategy, self.topology, self.hops)

    def with_(self, **changes) -> "StrategyConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def swap_schedule(hops: int) -> list[list[tuple[int, int, int]]]:
    """Rounds of (left, swapper, right) node triples for a power-of-two chain."""
    if hops not in SUPPORTED_HOPS:
        raise ConfigError(f"unsupported hop count {hops}; expected one of {SUPPORTED_HOPS}")
    rounds = []
    step = 1
    while step < hops:
        rounds.append([(a, a + step, a + 2 * step) for a in range(0, hops, 2 * step)])
        step *= 2
    return rounds


def basis_schedule(n_meas: int) -> list[str]:
    """XX, YY, ZZ in blocks of n_meas // 3; the remainder goes to ZZ."""
    if n_meas < 3:
        raise ConfigError("n_meas must be at least 3")
    k = n_meas // 3
    return ["X"] * k + ["Y"] * k + ["Z"] * (n_meas - 2 * k)


@dataclass
class FidelityEstimate:
    exp_xx: float
    exp_yy: float
    exp_zz: float
    n_per_basis: dict[str, int]
    fidelity_raw: float
    stderr: float

    @property
    def fidelity(self) -> float:
        return min(1.0, max(0.0, self.fidelity_raw))

    @classmethod
    def from_sums(cls, sums: dict[str, int], counts: dict[str, int]) -> "FidelityEstimate":
        """Build from per-basis sums of sign-corrected outcome products."""
        exp = {}
        var = 0.0
        for b in "XYZ":
            n = counts.get(b, 0)
            if n == 0:
                raise ValueError(f"no samples in basis {b}{b}")
            m = sums.get(b, 0) / n
            exp[b] = m
            var += (1.0 - m * m) / max(n - 1, 1)
        raw = (1.0 + exp["X"] - exp["Y"] + exp["Z"]) / 4.0
        return cls(exp["X"], exp["Y"], exp["Z"], {b + b: counts[b] for b in "XYZ"}, raw, math.sqrt(var) / 4.0)


def estimate_fidelity(samples) -> FidelityEstimate:
    """``samples``: iterable of (basis, raw outcome product) with reference +1 per qubit."""
    sums: Counter = Counter()
    counts: Counter = Counter()
    for basis, product in samples:
        sums[basis] += product * REFERENCE_SIGN[basis]
        counts[basis] += 1
    return FidelityEstimate.from_sums(sums, counts)


@dataclass
class TrajectoryResult:
    sums: Counter
    counts: Counter
    simulated_s: float
    counters: Counter
    delivered: int
    trace: list | None = None


@dataclass
class RunResult:
    config: StrategyConfig
    estimate: FidelityEstimate
    throughput: float
    simulated_s: float
    wall_s: float
    counters: dict[str, int]

    @property
    def fidelity(self) -> float:
        return self.estimate.fidelity

    def row(self) -> dict[str, Any]:
        c = self.config
        return {
            "strategy": c.strategy,
            "hops": c.hops,
            "lambda_gate": c.channel.lambda_gate,
            "p_meas": c.channel.p_meas,
            "fidelity": self.estimate.fidelity,
            "fidelity_stderr": self.estimate.stderr,
            "exp_xx": self.estimate.exp_xx,
            "exp_yy": self.estimate.exp_yy,
            "exp_zz": self.estimate.exp_zz,
            "throughput_pairs_per_s": self.throughput,
            "simulated_s": self.simulated_s,
            "wall_s": self.wall_s,
            "seed": c.seed,
        }


def trajectory_seed(seed: int, index: int) -> str:
    return f"qrepsim:{seed}:{index}"


class Trajectory:
    """One engine, one random stream, one pipelined run of a strategy."""

    def __init__(self, config: StrategyConfig, index: int = 0, trace: bool = False):
        self.config = config
        self.index = index
        self.sim = Simulator(trace=trace)
        self.rng = Random(trajectory_seed(config.seed, index))
        self.net = ops.Network(self.sim, self._build_nodes(), config.channel, self.rng, config.topology.c_fiber)
        self.stores: dict[tuple[int, int], Store] = {}
        self.sums: Counter = Counter()
        self.counts: Counter = Counter()
        self.delivered = 0
        self.finished_at: float | None = None

    def _build_nodes(self) -> list[Node]:
        cfg, topo = self.config, self.config.topology
        hops = cfg.hops
        nodes = []
        for i in range(hops + 1):
            node = Node(i, topo.total_km * i / hops)
            ancilla = 0
            for j in (i - 1, i + 1):
                if 0 <= j <= hops:
                    layout = interface_layout(cfg.strategy, topo, i, hops)
                    node.pools[f"link{j}"] = QubitPool(self.sim, i, f"link{j}", layout["link"])
                    if layout["data"]:
                        name = "data_e2e" if cfg.strategy == "E2E-HG-PE" else f"data{j}"
                        node.pools[name] = QubitPool(self.sim, i, name, layout["data"])
                    ancilla += layout["ancilla"]
            if ancilla:
                node.pools["ancilla"] = QubitPool(self.sim, i, "ancilla", ancilla)
            nodes.append(node)
        return nodes

    def store(self, a: int, b: int) -> Store:
        key = (a, b)
        if key not in self.stores:
            self.stores[key] = Store(self.sim, key)
        return self.stores[key]

    # -- process wiring --------------------------------------------------

    def _generator(self, i: int, g: int, out: Store):
        net = self.net
        left_pool = net.pool(i, f"link{i + 1}")
        right_pool = net.pool(i + 1, f"link{i}")
        rng = Random(f"{trajectory_seed(self.config.seed, self.index)}:link:{i}:{g}")
        while True:
            res = yield from ops.generate_link_pair(net, i, i + 1, left_pool, right_pool, rng)
            out.put(res)

    def _purify_then(self, triple, out: Store, encode_pools=None):
        res = yield from ops.ss_dp_purify(self.net, *triple)
        if res is None:
            return
        if encode_pools is not None:
            res = yield from ops.encode_pair(self.net, res, *encode_pools)
        out.put(res)

    def _purifier(self, src: Store, out: Store, encode_pools=None):
        while True:
            triple = yield src.get(3)
            self.sim.process(self._purify_then(triple, out, encode_pools))

    def _ncx_then(self, pairs, out: Store, pools):
        res = yield from ops.nonlocal_cnot_encode(self.net, pairs, *pools)
        out.put(res)

    def _ncx_encoder(self, src: Store, out: Store, pools):
        while True:
            pairs = yield src.get(ops.N_DATA)
            self.sim.process(self._ncx_then(pairs, out, pools))

    def _swap_then(self, left, right, swapper: int, out: Store):
        res = yield from ops.swap(self.net, left, right, swapper)
        out.put(res)

    def _swapper(self, a: int, s: int, b: int):
        src_l, src_r, out = self.store(a, s), self.store(s, b), self.store(a, b)
        while True:
            (left,) = yield src_l.get(1)
            (right,) = yield src_r.get(1)
            self.sim.process(self._swap_then(left, right, s, out))

    def _estimator(self, src: Store, n_meas: int):
        net = self.net
        for basis in basis_schedule(n_meas):
            (res,) = yield src.get(1)
            net.counters["delivered_link_pairs"] += res.link_pairs
            product = yield from ops.measure_pair(net, res, basis)
            self.sums[basis] += product * REFERENCE_SIGN[basis]
            self.counts[basis] += 1
            self.delivered += 1
        self.finished_at = self.sim.now
        self.sim.stop()

    def start(self) -> None:
        cfg = self.config
        strategy, hops = cfg.strategy, cfg.hops
        net = self.net
        for i in range(hops):
            raw = Store(self.sim, ("raw", i))
            attempts = min(net.pool(i, f"link{i + 1}").size, net.pool(i + 1, f"link{i}").size)
            for g in range(attempts):
                self.sim.process(self._generator(i, g, raw), name=f"gen{i}.{g}")
            ready = self.store(i, i + 1)
            if strategy in ("ZeroG", "E2E-OneG", "E2E-HG-PE"):
                self.stores[(i, i + 1)] = raw
            elif strategy == "OneG":
                self.sim.process(self._purifier(raw, ready))
            elif strategy == "HG-PE":
                pools = (net.pool(i, f"data{i + 1}"), net.pool(i + 1, f"data{i}"))
                self.sim.process(self._purifier(raw, ready, pools))
            elif strategy == "TwoG":
                pools = (net.pool(i, f"data{i + 1}"), net.pool(i + 1, f"data{i}"))
                self.sim.process(self._ncx_encoder(raw, ready, pools))
        for rnd in swap_schedule(hops):
            for a, s, b in rnd:
                self.sim.process(self._swapper(a, s, b))
        e2e = self.store(0, hops)
        if strategy == "E2E-OneG":
            final = Store(self.sim, "final")
            self.sim.process(self._purifier(e2e, final))
        elif strategy == "E2E-HG-PE":
            final = Store(self.sim, "final")
            pools = (net.pool(0, "data_e2e"), net.pool(hops, "data_e2e"))
            self.sim.process(self._purifier(e2e, final, pools))
        else:
            final = e2e
        self.sim.process(self._estimator(final, cfg.n_meas))

    def run(self) -> TrajectoryResult:
        self.start()
        self.sim.run()
        if self.finished_at is None:
            raise RuntimeError("simulation ended before enough end-to-end pairs were measured")
        return TrajectoryResult(self.sums, self.counts, self.finished_at, self.net.counters, self.delivered,
                                self.sim.trace)


def run_trajectory(config: StrategyConfig, index: int = 0, trace: bool = False) -> TrajectoryResult:
    return Trajectory(config, index, trace).run()


def measure_throughput(delivered: int, simulated_s: float) -> float:
    """Delivered pairs per simulated second, timed from the first link attempt (t = 0)."""
    if simulated_s <= 0:
        raise ValueError("throughput needs a positive simulated duration")
    return delivered / simulated_s


def run_strategy(config: StrategyConfig) -> RunResult:
    t0 = time.perf_counter()
    sums: Counter = Counter()
    counts: Counter = Counter()
    counters: Counter = Counter()
    simulated = 0.0
    delivered = 0
    for k in range(config.trajectories):
        tr = run_trajectory(config, k)
        sums.update(tr.sums)
        counts.update(tr.counts)
        counters.update(tr.counters)
        simulated += tr.simulated_s
        delivered += tr.delivered
    estimate = FidelityEstimate.from_sums(sums, counts)
    counters["delivered"] = delivered
    return RunResult(config, estimate, measure_throughput(delivered, simulated), simulated,
                     time.perf_counter() - t0, dict(counters))
