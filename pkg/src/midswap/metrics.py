"""Fidelity, hashing bound, rates and the repeaterless bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .herald import Encoding, HeraldOutcome, LinkParams, herald
from .states import BellState, TwoQubitState, partial_trace, von_neumann_entropy


class UnsupportedCaseError(ValueError):
    pass


@dataclass(frozen=True)
class LinkMetrics:
    fidelity: float
    hashing: float  # raw coherent information, may be negative
    p_succ: float
    rate: float
    d2_bound: float

    @property
    def hashing_clamped(self) -> float:
        return max(self.hashing, 0.0)


def binary_entropy(x: float) -> float:
    if not (0 <= x <= 1):
        raise ValueError(f"binary entropy is defined on [0, 1], got {x!r}")
    if x == 0 or x == 1:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def _xlog2x(x: float) -> float:
    return x * math.log2(x) if x > 0 else 0.0


def fidelity_bell(state: TwoQubitState, target: BellState = BellState.PSI_PLUS) -> float:
    v = target.vector
    return float(np.real(v.conj() @ state.matrix @ v))


def parity_target(parity: int) -> BellState:
    return BellState.PSI_PLUS if parity == 0 else BellState.PSI_MINUS


def coherent_information(state: TwoQubitState, keep: str) -> float:
    """S(rho_keep) - S(rho_AB)."""
    return von_neumann_entropy(partial_trace(state, keep)) - von_neumann_entropy(state)


def hashing_bound(state: TwoQubitState) -> float:
    return max(coherent_information(state, "A"), coherent_information(state, "B"))


def rate(hashing_or_state, p_succ: float) -> float:
    if isinstance(hashing_or_state, TwoQubitState):
        hashing_or_state = hashing_bound(hashing_or_state)
    return max(hashing_or_state, 0.0) * p_succ


def repeaterless_bound(eta: float) -> float:
    """-log2(1 - sqrt(eta)); returns ``math.inf`` for a lossless channel."""
    if not (0 <= eta <= 1):
        raise ValueError(f"eta={eta!r} outside [0, 1]")
    if eta == 1:
        return math.inf
    return -math.log1p(-math.sqrt(eta)) / math.log(2)


def xstate_eigenvalues(state: TwoQubitState) -> np.ndarray:
    """Closed-form spectrum of a state with only the |1,0>/|0,1> coherence."""
    m = state.matrix
    a, b, d, e = (m[i, i].real for i in range(4))
    c = abs(m[1, 2])
    root = math.sqrt((b - d) ** 2 + 4 * c * c)
    return np.array([a, e, (b + d + root) / 2, (b + d - root) / 2])


def evaluate(outcome: HeraldOutcome, eta_total: float, parity: int = 0) -> LinkMetrics:
    i_raw = hashing_bound(outcome.state)
    return LinkMetrics(
        fidelity=fidelity_bell(outcome.state, parity_target(parity)),
        hashing=i_raw,
        p_succ=outcome.p_succ,
        rate=rate(i_raw, outcome.p_succ),
        d2_bound=repeaterless_bound(eta_total),
    )


def link_metrics(params: LinkParams) -> LinkMetrics:
    return evaluate(herald(params), params.eta_total, params.parity)


def _is_close(x, y, tol=1e-12):
    return abs(x - y) <= tol


def special_case_tables(params: LinkParams) -> LinkMetrics:
    """Closed-form fidelity and hashing bound for noiseless links.

    Covers the symmetric and asymmetric perfectly mode-matched cases and the
    symmetric case with imperfect visibility, for both encodings.  Carrier
    phase noise enters through the averaged visibility ``|V| exp(-eps)``
    (single rail only).
    """
    if params.p_d != 0 or params.eta_d != 1:
        raise UnsupportedCaseError("closed forms need P_d = 0 and eta_d = 1")
    ea, eb = params.eta_a, params.eta_b
    eta = ea * eb
    symmetric = _is_close(ea, eb)

    if params.encoding is Encoding.DUAL_RAIL:
        if eta == 0:
            raise UnsupportedCaseError("dead channel")
        v2 = params.vis**2
        if v2 == 1:
            fid, hashing = 1.0, 1.0
        elif symmetric:
            fid = (1 + v2) / 2
            hashing = 1 - binary_entropy((1 - v2) / 2)
        else:
            raise UnsupportedCaseError("dual rail with |V| < 1 is tabulated for symmetric links only")
        return LinkMetrics(fid, hashing, eta / 2, max(hashing, 0) * eta / 2, repeaterless_bound(eta))

    ga, gb = params.gamma_a, params.gamma_b
    vis = params.vis * math.exp(-params.eps)
    if symmetric and _is_close(ga, gb):
        g, se = ga, ea
        s = g / (1 - (1 - g) * se)
        p = 2 * se * (1 - g) * (1 - (1 - g) * se)
        fid = (1 + vis) * s / 2
        if vis == 1:
            hashing = binary_entropy(s / 2) - binary_entropy(s)
        else:
            hashing = (
                binary_entropy(s / 2)
                + _xlog2x(s * (1 + vis) / 2)
                + _xlog2x(s * (1 - vis) / 2)
                + _xlog2x(1 - s)
            )
    elif vis == 1:
        # asymmetric, perfectly matched: the one-photon block is pure
        denom = (1 - gb) * eb + (1 - ga) * ea - 2 * ea * eb * (1 - ga) * (1 - gb)
        pop_10 = eb * (1 - gb) * ga / denom
        pop_01 = ea * (1 - ga) * gb / denom
        fid = (
            gb * (1 - ga) * ea + ga * (1 - gb) * eb
            + 2 * math.sqrt(ea * eb * ga * gb * (1 - ga) * (1 - gb))
        ) / (2 * denom)
        h_pair = binary_entropy(pop_10 + pop_01)
        hashing = max(binary_entropy(pop_10), binary_entropy(pop_01)) - h_pair
        p = denom
    else:
        raise UnsupportedCaseError("single rail with |V| < 1 is tabulated for symmetric links only")
    return LinkMetrics(fid, hashing, p, max(hashing, 0) * p, repeaterless_bound(eta))
