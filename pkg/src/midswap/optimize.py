"""One-dimensional searches: optimal gamma, maximum range, eta_lim, crossover."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .herald import Encoding, LinkParams, NoHeraldError, herald
from .metrics import LinkMetrics, binary_entropy, evaluate, fidelity_bell, hashing_bound, parity_target

log = logging.getLogger(__name__)

GAMMA_MIN = 1e-6
GAMMA_MAX = 1 - 1e-6
INV_PHI = (math.sqrt(5) - 1) / 2


class InfeasibleError(ValueError):
    pass


class NoRootError(ValueError):
    pass


def db_to_eta(db: float) -> float:
    return 10 ** (-db / 10)


def eta_to_db(eta: float) -> float:
    # + 0.0 turns -0.0 into 0.0
    return -10 * math.log10(eta) + 0.0 if eta > 0 else math.inf


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-9):
    """Maximize a unimodal ``f`` on [a, b]; returns ``(x, f(x))``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = c if fc >= fd else d
    return x, max(fc, fd)


def grid_then_golden(f: Callable[[float], float], a: float, b: float, tol: float = 1e-9, points: int = 41):
    """Coarse scan to find the basin of the global maximum, then golden section."""
    grid = np.linspace(a, b, points)
    vals = [f(x) for x in grid]
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    x, fx = golden_section_max(f, lo, hi, tol)
    if vals[i] > fx:
        return float(grid[i]), vals[i]
    return x, fx


def bisect_bracket(f: Callable[[float], float], lo: float, hi: float, tol: float):
    """Shrink [lo, hi] around a sign change of ``f`` until narrower than ``tol``.

    ``f(lo) > 0 >= f(hi)`` is required.  Returns the final bracket.
    """
    flo, fhi = f(lo), f(hi)
    if not (flo > 0 >= fhi):
        raise NoRootError(f"f does not change sign on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


@dataclass(frozen=True)
class GammaPolicy:
    """How the single-rail initialization parameter is chosen.

    ``rate`` maximizes the rate, ``target_fidelity`` maximizes the rate subject
    to ``F >= f_target``.  ``hashing`` and ``fidelity`` maximize the raw hashing
    bound or the fidelity; the range searches use them.
    """

    mode: str = "rate"
    f_target: float | None = None
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.mode not in ("rate", "target_fidelity", "hashing", "fidelity"):
            raise ValueError(f"unknown gamma policy {self.mode!r}")
        if self.mode == "target_fidelity":
            if self.f_target is None or not (0.5 < self.f_target < 1):
                raise ValueError(f"target fidelity must lie in (0.5, 1), got {self.f_target!r}")

    @classmethod
    def maximize_rate(cls, tolerance: float = 1e-9) -> "GammaPolicy":
        return cls("rate", tolerance=tolerance)

    @classmethod
    def target_fidelity(cls, f_target: float, tolerance: float = 1e-9) -> "GammaPolicy":
        return cls("target_fidelity", f_target, tolerance)


def _metrics_at(params: LinkParams, gamma: float) -> LinkMetrics:
    p = params.with_gamma(gamma)
    try:
        return evaluate(herald(p), p.eta_total, p.parity)
    except NoHeraldError:
        return LinkMetrics(0.0, -math.inf, 0.0, 0.0, math.nan)


def _fidelity_at(params: LinkParams, gamma: float) -> float:
    p = params.with_gamma(gamma)
    try:
        return fidelity_bell(herald(p).state, parity_target(p.parity))
    except NoHeraldError:
        return 0.0


def optimize_gamma(params: LinkParams, policy: GammaPolicy = GammaPolicy()) -> tuple[float, LinkMetrics]:
    """Choose ``gamma_a = gamma_b`` for a single-rail link according to ``policy``."""
    if params.encoding is not Encoding.SINGLE_RAIL:
        raise ValueError("gamma is only optimized for single rail; dual rail uses 1/2")
    tol = policy.tolerance
    if policy.mode == "hashing":
        g, _ = grid_then_golden(lambda g: _metrics_at(params, g).hashing, GAMMA_MIN, GAMMA_MAX, tol)
        return g, _metrics_at(params, g)
    if policy.mode == "fidelity":
        g, _ = grid_then_golden(lambda g: _fidelity_at(params, g), GAMMA_MIN, GAMMA_MAX, tol)
        return g, _metrics_at(params, g)

    # the unclamped I * p has the same maximizer wherever the rate is positive
    # and no flat zero region to stall on
    def signed_rate(g):
        m = _metrics_at(params, g)
        return m.hashing * m.p_succ if m.p_succ > 0 else -math.inf

    g_rate, _ = grid_then_golden(signed_rate, GAMMA_MIN, GAMMA_MAX, tol)
    if policy.mode == "rate":
        return g_rate, _metrics_at(params, g_rate)

    # feasible set {F >= target} is an interval around the fidelity maximum;
    # the rate is unimodal, so the constrained optimum is g_rate clipped to it
    target = policy.f_target
    g_f, f_max = grid_then_golden(lambda g: _fidelity_at(params, g), GAMMA_MIN, GAMMA_MAX, tol)
    if f_max < target:
        raise InfeasibleError(f"max fidelity {f_max:.6g} < target {target} at eta={params.eta_total:.3g}")
    excess = lambda g: _fidelity_at(params, g) - target
    if excess(g_rate) >= 0:
        return g_rate, _metrics_at(params, g_rate)
    if g_rate < g_f:
        # infeasible on the left: walk up to the lower edge of the feasible set
        g = GAMMA_MIN if excess(GAMMA_MIN) >= 0 else bisect_bracket(lambda g: -excess(g), GAMMA_MIN, g_f, tol)[1]
    else:
        g = GAMMA_MAX if excess(GAMMA_MAX) >= 0 else bisect_bracket(excess, g_f, GAMMA_MAX, tol)[0]
    return g, _metrics_at(params, g)


def high_loss_objective(gamma: float) -> float:
    """``(1 - gamma)(h2(gamma/2) - h2(gamma))``: the rate per 2 sqrt(eta) as eta -> 0."""
    return (1 - gamma) * (binary_entropy(gamma / 2) - binary_entropy(gamma))


def high_loss_derivative(gamma: float) -> float:
    dh = lambda x: math.log2((1 - x) / x)
    return -(binary_entropy(gamma / 2) - binary_entropy(gamma)) + (1 - gamma) * (0.5 * dh(gamma / 2) - dh(gamma))


@lru_cache(maxsize=None)
def solve_high_loss_transcendental() -> float:
    """Rate-optimal single-rail gamma in the eta -> 0 limit."""
    return brentq(high_loss_derivative, 0.5, 1 - 1e-12, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class RangeResult:
    eta_max: float
    metric: str  # 'hashing_zero' or 'fidelity_half'
    bracket: tuple[float, float]  # total transmissivity, (far end, near end)
    rounds: int = 0
    gamma: float | None = None

    @property
    def loss_db(self) -> float:
        return eta_to_db(self.eta_max)

    @property
    def bracket_db(self) -> tuple[float, float]:
        return eta_to_db(self.bracket[1]), eta_to_db(self.bracket[0])


def _scan_for_crossing(f_db: Callable[[float], float], db_min: float, db_max: float, points: int):
    grid = np.linspace(db_min, db_max, points)
    vals = [f_db(x) for x in grid]
    first = None
    for i in range(len(grid) - 1):
        if vals[i] > 0 >= vals[i + 1]:
            first = i
            break
    if first is None:
        raise NoRootError(f"no sign change between {db_min} and {db_max} dB")
    if any(v > 0 for v in vals[first + 1:]):
        log.warning("threshold metric becomes positive again beyond %.3g dB", grid[first + 1])
    return grid[first], grid[first + 1]


def _threshold_root(f_db, db_range, tol_db, metric, scan_points=241, **extra) -> RangeResult:
    lo, hi = _scan_for_crossing(f_db, db_range[0], db_range[1], scan_points)
    lo, hi = bisect_bracket(f_db, lo, hi, tol_db)
    mid = 0.5 * (lo + hi)
    return RangeResult(db_to_eta(mid), metric, (db_to_eta(hi), db_to_eta(lo)), **extra)


def _single_rail_gamma(params: LinkParams, gamma, default: GammaPolicy):
    """Resolve ``gamma`` (None, a float or a policy) into a function of params."""
    if params.encoding is Encoding.DUAL_RAIL:
        return lambda p: 0.5
    if gamma is None:
        gamma = default
    if isinstance(gamma, GammaPolicy):
        return lambda p: optimize_gamma(p, gamma)[0]
    g = float(gamma)
    return lambda p: g


def default_distillation_gamma() -> float:
    return solve_high_loss_transcendental()


def max_range(params: LinkParams, gamma=None, db_range=(0.0, 150.0), tol_db: float = 0.01) -> RangeResult:
    """Total loss at which the raw hashing bound of the heralded state hits zero.

    The link is taken symmetric.  For single rail, ``gamma`` defaults to the
    value maximizing the hashing bound at each loss, which is where the
    rate-optimal choice ends up as the rate goes to zero.
    """
    if params.p_d == 0 and params.vis == 1 and params.eps == 0:
        raise NoRootError("with P_d = 0 and perfect visibility the hashing bound never reaches zero")
    choose = _single_rail_gamma(params, gamma, GammaPolicy("hashing", tolerance=1e-7))

    def f_db(db):
        p = params.with_eta(db_to_eta(db))
        p = p.with_gamma(choose(p))
        try:
            return hashing_bound(herald(p).state)
        except NoHeraldError:
            return -math.inf

    return _threshold_root(f_db, db_range, tol_db, "hashing_zero")


def fidelity_vs_loss(params: LinkParams, gamma=None):
    choose = _single_rail_gamma(params, gamma, default_distillation_gamma())

    def f_db(db):
        p = params.with_eta(db_to_eta(db))
        p = p.with_gamma(choose(p))
        return fidelity_bell(herald(p).state, parity_target(p.parity))

    return f_db


def eta_lim(params: LinkParams, gamma=None, db_range=(0.0, 150.0), tol_db: float = 1e-9) -> RangeResult:
    """Total loss where the heralded fidelity drops to 1/2.

    Single rail uses a fixed ``gamma`` (default: the high-loss rate-optimal
    value) so that the same family of states can be pumped and compared.
    """
    f = fidelity_vs_loss(params, gamma)
    recorded = None
    if params.encoding is Encoding.SINGLE_RAIL and not isinstance(gamma, GammaPolicy):
        recorded = default_distillation_gamma() if gamma is None else float(gamma)
    return _threshold_root(lambda db: f(db) - 0.5, db_range, tol_db, "fidelity_half", gamma=recorded)


def crossover_loss(
    policy: GammaPolicy = GammaPolicy(),
    params: LinkParams | None = None,
    half_db_range=(0.0, 20.0),
    tol_db: float = 1e-6,
) -> float:
    """Half-channel loss (dB) below which dual rail out-rates single rail."""
    base = params or LinkParams.symmetric(1.0)

    def diff(half_db):
        eta = db_to_eta(2 * half_db)
        dual = evaluate(herald(base.replace(encoding=Encoding.DUAL_RAIL).with_eta(eta)), eta).rate
        single = base.replace(encoding=Encoding.SINGLE_RAIL).with_eta(eta)
        try:
            _, m = optimize_gamma(single, policy)
            r_single = m.rate
        except InfeasibleError:
            r_single = 0.0
        return dual - r_single

    lo, hi = _scan_for_crossing(diff, half_db_range[0], half_db_range[1], 81)
    lo, hi = bisect_bracket(diff, lo, hi, tol_db)
    return 0.5 * (lo + hi)
