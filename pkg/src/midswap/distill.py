"""Two-copy recurrence distillation: exact Deutsch circuit, Bell-diagonal maps
and repeated pumping on identical copies."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .herald import HeraldOutcome, LinkParams, NoHeraldError, herald
from .metrics import fidelity_bell, hashing_bound
from .optimize import (
    RangeResult,
    _single_rail_gamma,
    _threshold_root,
    db_to_eta,
    default_distillation_gamma,
    eta_lim,
)
from .states import BellDiagonalVec, TwoQubitState, bell_diagonal_projection

log = logging.getLogger(__name__)

P_ROUND_MIN = 1e-15
RATE_CONVENTION = "R_k = max(I(rho_k), 0) * P_herald^(2^k) * prod_j p_j^(2^(k-j)) / 2^k"


class DegenerateDistillationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class DistillRound:
    input_state: TwoQubitState
    output_state: TwoQubitState
    p_round: float
    round_index: int = 1

    def __post_init__(self):
        if not (0 < self.p_round <= 1 + 1e-12):
            raise ValueError(f"p_round={self.p_round!r} outside (0, 1]")
        if self.round_index < 1:
            raise ValueError("round_index starts at 1")


@dataclass(frozen=True)
class PumpingSchedule:
    rounds: int
    initial: HeraldOutcome
    per_round: list = field(default_factory=list)
    cumulative_rate: float = 0.0
    approximate: bool = False
    convention: str = RATE_CONVENTION

    @property
    def copies_consumed(self) -> int:
        return 2**self.rounds

    @property
    def final_state(self) -> TwoQubitState:
        return self.per_round[-1].output_state if self.per_round else self.initial.state

    @property
    def fidelities(self) -> list:
        return [fidelity_bell(self.initial.state)] + [fidelity_bell(r.output_state) for r in self.per_round]


# qubit order inside one copy is |1>, |0>
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_I2 = np.eye(2, dtype=complex)
_P1 = np.diag([1, 0]).astype(complex)
_P0 = np.diag([0, 1]).astype(complex)
Z_A = np.kron(np.diag([1, -1]), _I2).astype(complex)


def _rx(theta):
    return math.cos(theta / 2) * _I2 - 1j * math.sin(theta / 2) * _X


def _kron(*ops):
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


@lru_cache(maxsize=1)
def _deutsch_unitary() -> np.ndarray:
    # qubits (A1, B1, A2, B2): copy 1 is the source, copy 2 the target
    rot = _kron(_rx(math.pi / 2), _rx(-math.pi / 2), _rx(math.pi / 2), _rx(-math.pi / 2))

    def cnot(ctrl, tgt):
        on = [_I2] * 4
        on[ctrl], on[tgt] = _P1, _X
        off = [_I2] * 4
        off[ctrl] = _P0
        return _kron(*on) + _kron(*off)

    return cnot(1, 3) @ cnot(0, 2) @ rot


def _deutsch_blocks(rho: np.ndarray) -> np.ndarray:
    """Post-circuit 16x16 state reshaped to (source, target, source', target')."""
    u = _deutsch_unitary()
    return (u @ np.kron(rho, rho) @ u.conj().T).reshape(4, 4, 4, 4)


def deutsch_outcome_probabilities(rho) -> dict:
    """Probabilities of the target outcomes 00, 01, 10, 11 (in |1>,|0> labels)."""
    m = rho.matrix if isinstance(rho, TwoQubitState) else np.asarray(rho)
    t = _deutsch_blocks(m)
    labels = ("11", "10", "01", "00")
    return {labels[i]: float(np.trace(t[:, i, :, i]).real) for i in range(4)}


def deutsch_round_exact(rho: TwoQubitState, round_index: int = 1) -> DistillRound:
    """One round on two identical copies; success when both targets agree."""
    t = _deutsch_blocks(rho.matrix)
    out = t[:, 0, :, 0] + t[:, 3, :, 3]
    p = float(np.trace(out).real)
    if p < P_ROUND_MIN:
        raise DegenerateDistillationError(f"round {round_index}: success probability {p:.3g}")
    return DistillRound(rho, TwoQubitState.from_unnormalized(out), min(p, 1.0), round_index)


def deutsch_round_map(v: BellDiagonalVec):
    a, b, c, d = v.as_array()
    n = (a + d) ** 2 + (b + c) ** 2
    out = BellDiagonalVec.from_array(np.array([a * a + d * d, 2 * a * d, b * b + c * c, 2 * b * c]) / n)
    return out, float(n)


def bennett_round_map(v: BellDiagonalVec):
    """Bennett update rules, renormalized; the normalization is returned as p."""
    a, b, c, d = v.as_array()
    raw = np.array([(a * a + b * b) / 2, a * b, (c * c + d * d) / 2, c * d])
    s = float(raw.sum())
    return BellDiagonalVec.from_array(raw / s), s


def correct_parity(state: TwoQubitState, parity: int) -> TwoQubitState:
    """Local Z on memory A maps the odd-parity state back to the Psi+ frame."""
    if parity == 0:
        return state
    return TwoQubitState(Z_A @ state.matrix @ Z_A)


def _map_round(state: TwoQubitState, round_index: int) -> DistillRound:
    v, p = deutsch_round_map(bell_diagonal_projection(state))
    if p < P_ROUND_MIN:
        raise DegenerateDistillationError(f"round {round_index}: success probability {p:.3g}")
    return DistillRound(state, v.to_state(), min(p, 1.0), round_index)


def pumped_rate(hashing: float, p_herald: float, p_rounds) -> float:
    k = len(p_rounds)
    r = max(hashing, 0.0) * p_herald ** (2**k) / 2**k
    for j, p in enumerate(p_rounds, start=1):
        r *= p ** (2 ** (k - j))
    return r


def pump(initial: HeraldOutcome, k: int, engine: str = "exact", parity: int = 0) -> PumpingSchedule:
    """``k`` rounds of Deutsch distillation on identical copies.

    ``engine='map'`` projects onto the Bell-diagonal part first, which drops
    the ``a != e`` structure of heralded states; the result is flagged
    approximate.
    """
    if k < 0:
        raise ValueError("rounds must be >= 0")
    if engine not in ("exact", "map"):
        raise ValueError(f"unknown engine {engine!r}")
    step = deutsch_round_exact if engine == "exact" else _map_round
    state = correct_parity(initial.state, parity)
    if engine == "map":
        state = bell_diagonal_projection(state).to_state()
    rounds = []
    for j in range(1, k + 1):
        r = step(state, j)
        rounds.append(r)
        state = r.output_state
    rate = pumped_rate(hashing_bound(state), initial.p_succ, [r.p_round for r in rounds])
    return PumpingSchedule(k, initial, rounds, rate, approximate=engine == "map")


def _pumped_hashing(params: LinkParams, rounds: int, engine: str):
    try:
        outcome = herald(params)
        return hashing_bound(pump(outcome, rounds, engine, params.parity).final_state)
    except (NoHeraldError, DegenerateDistillationError):
        return -math.inf


def pumped_max_range(
    params: LinkParams, rounds: int, gamma=None, engine: str = "exact", db_range=(0.0, 150.0), tol_db: float = 0.01
) -> RangeResult:
    """Loss at which the hashing bound after ``rounds`` of pumping reaches zero.

    Single rail uses a fixed ``gamma`` (default: the high-loss rate optimum).
    """
    choose = _single_rail_gamma(params, gamma, default_distillation_gamma())

    def f_db(db):
        p = params.with_eta(db_to_eta(db))
        return _pumped_hashing(p.with_gamma(choose(p)), rounds, engine)

    return _threshold_root(f_db, db_range, tol_db, "hashing_zero", rounds=rounds)


@dataclass(frozen=True)
class DistillationLimit:
    eta_lim: RangeResult
    saturated: RangeResult

    @property
    def gap_db(self) -> float:
        return self.eta_lim.loss_db - self.saturated.loss_db


def distillation_limit(params: LinkParams, rounds: int = 15, gamma=None, engine: str = "exact") -> DistillationLimit:
    """``eta_lim`` (fidelity 1/2) next to the range reached after ``rounds`` of pumping."""
    lim = eta_lim(params, gamma)
    hi = lim.loss_db + 2.0
    sat = pumped_max_range(params, rounds, gamma, engine, db_range=(0.0, hi))
    if sat.loss_db > lim.loss_db + 1e-6:
        log.warning("pumped range %.4f dB beyond eta_lim %.4f dB", sat.loss_db, lim.loss_db)
    return DistillationLimit(lim, sat)
