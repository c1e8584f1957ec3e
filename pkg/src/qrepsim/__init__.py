"""Discrete-event simulation of entanglement distribution over linear quantum-repeater chains."""
from .analytic_oracle import enumerate_ssdp, f_e2e, f_link, f_ssdp, f_ssdp_e2e, f_swap
from .pauli_frame import ChannelParams, PauliFrame
from .strategies import STRATEGIES, RunResult, StrategyConfig, Topology, run_strategy, swap_schedule

__all__ = [
    "ChannelParams", "PauliFrame", "STRATEGIES", "RunResult", "StrategyConfig", "Topology",
    "enumerate_ssdp", "f_e2e", "f_link", "f_ssdp", "f_ssdp_e2e", "f_swap", "run_strategy", "swap_schedule",
]
__version__ = "0.1.0"
