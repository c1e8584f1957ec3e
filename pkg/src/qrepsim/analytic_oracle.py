"""Closed-form fidelities and a brute-force Ss-Dp enumerator.

These are used to cross-check the Monte Carlo simulator in the
depolarizing-only regime.  The enumerator does not share code with the
simulator: it walks all 64 Pauli-error assignments of three Werner pairs
through the purification circuit using plain bit arithmetic.
"""
from __future__ import annotations

import itertools

# (x, z) bits of I, X, Y, Z on one half of a pair
_PAULIS = ((0, 0), (1, 0), (1, 1), (0, 1))


def f_link(p_depo: float) -> float:
    """Pair fidelity after both halves pass a depolarizing channel."""
    return p_depo ** 2 / 3.0 + (1.0 - p_depo) ** 2


def f_swap(f1: float, f2: float) -> float:
    return f1 * f2 + (1.0 - f1) * (1.0 - f2) / 3.0


def f_ssdp(f: float) -> float:
    return (14.0 * f * f - 7.0 * f + 2.0) / (16.0 * f * f - 14.0 * f + 7.0)


def f_e2e(p_depo: float) -> float:
    """One swap of two depolarized links, expanded."""
    fl = p_depo ** 2 / 3.0 + (1.0 - p_depo) ** 2
    return fl ** 2 + (1.0 - fl) ** 2 / 3.0


def f_ssdp_e2e(p_depo: float) -> float:
    """Purify each link once, then swap."""
    fp = f_ssdp(f_link(p_depo))
    return f_swap(fp, fp)


def _ssdp_branch(e_res: tuple[int, int], e_aux1: tuple[int, int], e_aux2: tuple[int, int]):
    """Push one error assignment through the purification circuit.

    Errors sit on one half of each pair (equivalent for Bell pairs).  Returns
    (accepted, resource error after the round).
    """
    xr, zr = e_res
    x1, z1 = e_aux1
    x2, z2 = e_aux2
    # CNOT(resource -> aux1): X copies forward, Z copies back
    x1 ^= xr
    zr ^= z1
    # CNOT(aux2 -> resource)
    xr ^= x2
    z2 ^= zr
    accepted = x1 == 0 and z2 == 0
    return accepted, (xr, zr)


def ssdp_branch_table():
    """All 64 branches as (pauli indices, accepted, output error)."""
    table = []
    for idx in itertools.product(range(4), repeat=3):
        acc, out = _ssdp_branch(*(_PAULIS[i] for i in idx))
        table.append((idx, acc, out))
    return table


def enumerate_ssdp(f: float) -> tuple[float, float]:
    """Exact (output fidelity, acceptance probability) for Werner inputs of fidelity ``f``."""
    weights = (f, (1.0 - f) / 3.0, (1.0 - f) / 3.0, (1.0 - f) / 3.0)
    accepted = good = 0.0
    for idx, acc, out in ssdp_branch_table():
        if not acc:
            continue
        w = weights[idx[0]] * weights[idx[1]] * weights[idx[2]]
        accepted += w
        if out == (0, 0):
            good += w
    return good / accepted, accepted


def enumerate_ssdp_distribution(probs: tuple[float, float, float, float]) -> tuple[tuple[float, ...], float]:
    """Bell-diagonal version: input error weights (I, X, Y, Z) -> output weights, acceptance."""
    out = [0.0, 0.0, 0.0, 0.0]
    accepted = 0.0
    for idx, acc, err in ssdp_branch_table():
        if not acc:
            continue
        w = probs[idx[0]] * probs[idx[1]] * probs[idx[2]]
        accepted += w
        out[_PAULIS.index(err)] += w
    return tuple(v / accepted for v in out), accepted


def swap_distribution(a: tuple[float, ...], b: tuple[float, ...]) -> tuple[float, ...]:
    """Error weights of the swapped pair: Pauli errors multiply (mod phase)."""
    out = [0.0, 0.0, 0.0, 0.0]
    for i, pa in enumerate(a):
        for j, pb in enumerate(b):
            x = _PAULIS[i][0] ^ _PAULIS[j][0]
            z = _PAULIS[i][1] ^ _PAULIS[j][1]
            out[_PAULIS.index((x, z))] += pa * pb
    return tuple(out)


def werner_distribution(f: float) -> tuple[float, float, float, float]:
    r = (1.0 - f) / 3.0
    return (f, r, r, r)
