import math
from random import Random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrepsim.analytic_oracle import f_e2e
from qrepsim.pauli_frame import ChannelParams, PhysicalQubit, apply_depolarizing, measure
from qrepsim.strategies import (
    LINK_CONSUMPTION, PAIRS_PER_DELIVERED, STRATEGIES, ConfigError, FidelityEstimate, StrategyConfig, Topology,
    basis_schedule, canonical_strategy, estimate_fidelity, interface_layout, measure_throughput, minimum_pool_sizes,
    run_strategy, run_trajectory, swap_schedule,
)

NOISELESS = ChannelParams.noiseless()
DEP_ONLY = ChannelParams(p_depo=0.025, lambda_gate=0.0, tau=math.inf, p_meas=0.0, loss_db_per_km=0.0)


def test_swap_schedule_rounds():
    assert swap_schedule(2) == [[(0, 1, 2)]]
    assert swap_schedule(4) == [[(0, 1, 2), (2, 3, 4)], [(0, 2, 4)]]
    assert swap_schedule(8) == [[(0, 1, 2), (2, 3, 4), (4, 5, 6), (6, 7, 8)], [(0, 2, 4), (4, 6, 8)], [(0, 4, 8)]]
    with pytest.raises(ConfigError):
        swap_schedule(3)


@given(st.integers(3, 10_000))
def test_basis_schedule_blocks(n):
    sched = basis_schedule(n)
    k = n // 3
    assert len(sched) == n
    assert sched[:k] == ["X"] * k and sched[k:2 * k] == ["Y"] * k
    assert sched[2 * k:] == ["Z"] * (n - 2 * k)


def test_basis_schedule_remainder_goes_to_zz():
    assert basis_schedule(10).count("Z") == 4


def test_aliases_and_unknown_names():
    assert canonical_strategy("e2e-hg-pe") == "E2E-HG-PE"
    assert canonical_strategy("1g") == "OneG"
    assert canonical_strategy("TwoG") == "TwoG"
    with pytest.raises(ConfigError):
        canonical_strategy("3G")


def test_config_validation():
    with pytest.raises(ConfigError):
        StrategyConfig(hops=3)
    with pytest.raises(ConfigError):
        StrategyConfig(n_meas=2)
    with pytest.raises(ConfigError):
        StrategyConfig(trajectories=0)
    with pytest.raises(ConfigError):
        Topology(total_km=0.0)
    with pytest.raises(ConfigError):
        Topology(memory_qubits=-1)


def test_insufficient_memory_names_the_shortfall():
    with pytest.raises(ConfigError, match="link qubits"):
        StrategyConfig(strategy="TwoG", topology=Topology(memory_qubits=19, data_qubits=7, ancilla_qubits=6))
    with pytest.raises(ConfigError, match="data qubits"):
        StrategyConfig(strategy="HG-PE", topology=Topology(data_qubits=5))
    with pytest.raises(ConfigError, match="ancilla qubits"):
        StrategyConfig(strategy="E2E-HG-PE", topology=Topology(ancilla_qubits=2))
    StrategyConfig(strategy="ZeroG", topology=Topology(memory_qubits=1, data_qubits=0, ancilla_qubits=0))


def test_minimum_pool_sizes():
    assert minimum_pool_sizes("TwoG") == {"link": 7, "data": 7, "ancilla": 6}
    assert minimum_pool_sizes("ZeroG") == {"link": 1, "data": 0, "ancilla": 0}


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_interface_layout_uses_whole_budget(strategy):
    topo = Topology()
    for node in range(5):
        layout = interface_layout(strategy, topo, node, 4)
        assert sum(layout.values()) == topo.memory_qubits
    middle = interface_layout(strategy, topo, 2, 4)
    end = interface_layout(strategy, topo, 0, 4)
    if strategy in ("ZeroG", "OneG", "E2E-OneG"):
        assert middle["data"] == end["data"] == 0
    elif strategy == "E2E-HG-PE":
        assert middle["data"] == 0 and end["data"] == topo.data_qubits
    else:
        assert middle["data"] == end["data"] == topo.data_qubits


# --- estimator -----------------------------------------------------------------

def test_estimator_on_perfect_samples():
    est = estimate_fidelity([("X", 1), ("Y", 1), ("Z", 1)])
    assert (est.exp_xx, est.exp_yy, est.exp_zz) == (1.0, -1.0, 1.0)
    assert est.fidelity == 1.0


def test_estimator_clips_but_keeps_raw():
    est = FidelityEstimate.from_sums({"X": -10, "Y": 10, "Z": -10}, {"X": 10, "Y": 10, "Z": 10})
    assert est.fidelity_raw == pytest.approx(-0.5) and est.fidelity == 0.0
    with pytest.raises(ValueError):
        FidelityEstimate.from_sums({"X": 1}, {"X": 1})


def _werner_samples(f, n, seed):
    rng = Random(seed)
    params = ChannelParams.noiseless()
    for basis in basis_schedule(n):
        a, b = PhysicalQubit(), PhysicalQubit()
        apply_depolarizing(a.frame, 1 - f, rng)
        yield basis, measure(a, basis, params, 0.0, rng) * measure(b, basis, params, 0.0, rng)


@pytest.mark.parametrize("f", [0.9, 0.25])
def test_estimator_on_werner_pairs(f):
    est = estimate_fidelity(_werner_samples(f, 90_000, 1))
    assert est.fidelity == pytest.approx(f, abs=0.01)


def test_fully_depolarized_links_give_quarter():
    chan = ChannelParams(p_depo=0.75, tau=math.inf, loss_db_per_km=0.0)
    r = run_strategy(StrategyConfig("ZeroG", 2, n_meas=30_000, channel=chan, seed=2))
    assert r.fidelity == pytest.approx(0.25, abs=0.015)


# --- whole runs ------------------------------------------------------------------

@pytest.mark.parametrize("strategy", STRATEGIES)
def test_noiseless_runs_are_perfect(strategy):
    r = run_strategy(StrategyConfig(strategy, 4, n_meas=30, channel=NOISELESS, seed=1))
    assert r.fidelity == 1.0 and r.estimate.fidelity_raw == 1.0


def test_trace_is_deterministic_and_seed_sensitive():
    cfg = StrategyConfig("OneG", 2, n_meas=60, seed=4)
    a = run_trajectory(cfg, trace=True)
    b = run_trajectory(cfg, trace=True)
    c = run_trajectory(cfg.with_(seed=5), trace=True)
    assert a.trace == b.trace and a.sums == b.sums
    assert a.trace != c.trace


def test_zero_g_matches_swap_formula():
    r = run_strategy(StrategyConfig("ZeroG", 2, n_meas=9000, trajectories=3, channel=DEP_ONLY, seed=3))
    assert r.fidelity == pytest.approx(f_e2e(0.025), abs=0.01)


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_resource_accounting(strategy):
    r = run_strategy(StrategyConfig(strategy, 2, n_meas=60, seed=9))
    c = r.counters
    assert c["delivered"] == 60
    assert c.get("purify_pairs_consumed", 0) == 3 * c.get("purify_attempts", 0)
    assert c.get("ncx_pairs_consumed", 0) == 7 * c.get("ncx_encodings", 0)
    assert c["link_pairs"] >= c.get("purify_pairs_consumed", 0) + c.get("ncx_pairs_consumed", 0)
    if strategy in ("HG-PE", "E2E-HG-PE"):
        assert c["seed_encodings"] <= c["purify_accepted"]


@pytest.mark.parametrize("strategy", STRATEGIES)
@pytest.mark.parametrize("hops", [2, 4])
def test_delivered_pairs_trace_back_to_exact_link_counts(strategy, hops):
    r = run_strategy(StrategyConfig(strategy, hops, n_meas=30, seed=3))
    c = r.counters
    assert c["delivered_link_pairs"] == c["delivered"] * PAIRS_PER_DELIVERED[strategy] * hops


@pytest.mark.parametrize("strategy", ["ZeroG", "OneG", "TwoG", "HG-PE"])
def test_noiseless_link_products_match_consumption_ratio(strategy):
    """Without noise nothing is rejected, so link pairs per link-level product is exact."""
    r = run_strategy(StrategyConfig(strategy, 2, n_meas=30, channel=NOISELESS, seed=1))
    c = r.counters
    ratio = LINK_CONSUMPTION[strategy]
    if strategy in ("OneG", "HG-PE"):
        assert c["purify_accepted"] == c["purify_attempts"]
        assert c["purify_pairs_consumed"] == ratio * c["purify_accepted"]
    elif strategy == "TwoG":
        assert c["ncx_pairs_consumed"] == ratio * c["ncx_encodings"]
    else:
        assert c["swaps"] >= c["delivered"]


def test_throughput_definition():
    assert measure_throughput(100, 0.5) == 200.0
    with pytest.raises(ValueError):
        measure_throughput(1, 0.0)
    r = run_strategy(StrategyConfig("ZeroG", 2, n_meas=300, trajectories=2, seed=1))
    assert r.throughput == pytest.approx(600 / r.simulated_s)


def test_throughput_is_steady():
    small = run_strategy(StrategyConfig("ZeroG", 2, n_meas=3000, seed=6))
    large = run_strategy(StrategyConfig("ZeroG", 2, n_meas=6000, seed=6))
    assert large.throughput == pytest.approx(small.throughput, rel=0.10)


def test_zero_g_outpaces_hg_pe():
    z = run_strategy(StrategyConfig("ZeroG", 2, n_meas=600, seed=2))
    h = run_strategy(StrategyConfig("HG-PE", 2, n_meas=600, seed=2))
    assert z.throughput > h.throughput


def test_estimates_are_stationary_across_seeds():
    results = [run_strategy(StrategyConfig("ZeroG", 2, n_meas=3000, seed=s)) for s in range(10)]
    weights = [1 / r.estimate.stderr ** 2 for r in results]
    pooled = sum(w * r.fidelity for w, r in zip(weights, results)) / sum(weights)
    for r in results:
        assert abs(r.fidelity - pooled) < 3 * r.estimate.stderr


def test_infinite_memory_zero_g_degrades_with_hops():
    chan = ChannelParams(tau=math.inf)
    fids = [run_strategy(StrategyConfig("ZeroG", h, n_meas=6000, channel=chan, seed=8)).estimate for h in (2, 4, 8)]
    for a, b in zip(fids, fids[1:]):
        assert b.fidelity <= a.fidelity + 3 * math.hypot(a.stderr, b.stderr)
    assert fids[2].fidelity < fids[0].fidelity


def test_row_schema():
    r = run_strategy(StrategyConfig("ZeroG", 2, n_meas=30, seed=1))
    assert list(r.row()) == ["strategy", "hops", "lambda_gate", "p_meas", "fidelity", "fidelity_stderr", "exp_xx",
                             "exp_yy", "exp_zz", "throughput_pairs_per_s", "simulated_s", "wall_s", "seed"]
