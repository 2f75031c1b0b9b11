"""Analytic heralded memory-memory states for single-rail and dual-rail swaps.

Both constructors return the state heralded by the click patterns of one
parity ``m`` and the total success probability summed over *all* heralding
patterns (two for single rail, four for dual rail).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .states import TwoQubitState


class Encoding(str, enum.Enum):
    SINGLE_RAIL = "single"
    DUAL_RAIL = "dual"


class ParameterError(ValueError):
    pass


class NoHeraldError(ValueError):
    """The heralding probability is zero, so there is no conditional state."""


def _check_unit(name, value, *, upper_open=False):
    if not isinstance(value, (int, float)) or math.isnan(value):
        raise ParameterError(f"{name} must be a real number, got {value!r}")
    hi_ok = value < 1 if upper_open else value <= 1
    if not (0 <= value and hi_ok):
        bound = "[0, 1)" if upper_open else "[0, 1]"
        raise ParameterError(f"{name}={value!r} outside {bound}")


@dataclass(frozen=True)
class LinkParams:
    """Physical and protocol parameters of one elementary link.

    ``gamma_a``/``gamma_b`` only matter for single rail; dual rail always
    prepares the balanced memory-photon state.
    """

    eta_a: float
    eta_b: float
    eta_d: float = 1.0
    p_d: float = 0.0
    vis: float = 1.0
    eps: float = 0.0
    gamma_a: float = 0.5
    gamma_b: float = 0.5
    encoding: Encoding = Encoding.SINGLE_RAIL
    parity: int = 0

    def __post_init__(self):
        object.__setattr__(self, "encoding", Encoding(self.encoding))
        for name in ("eta_a", "eta_b", "eta_d", "vis", "gamma_a", "gamma_b"):
            object.__setattr__(self, name, float(getattr(self, name)))
            _check_unit(name, getattr(self, name))
        object.__setattr__(self, "p_d", float(self.p_d))
        _check_unit("p_d", self.p_d, upper_open=True)
        object.__setattr__(self, "eps", float(self.eps))
        if not (self.eps >= 0 and math.isfinite(self.eps)):
            raise ParameterError(f"eps={self.eps!r} must be finite and >= 0")
        if self.parity not in (0, 1):
            raise ParameterError(f"parity must be 0 or 1, got {self.parity!r}")

    @classmethod
    def symmetric(cls, eta: float, gamma: float = 0.5, **kw) -> "LinkParams":
        """Equal half-channels, ``eta_a = eta_b = sqrt(eta)`` for total ``eta``."""
        _check_unit("eta", eta)
        half = math.sqrt(eta)
        return cls(eta_a=half, eta_b=half, gamma_a=gamma, gamma_b=gamma, **kw)

    @property
    def eta_total(self) -> float:
        return self.eta_a * self.eta_b

    def with_eta(self, eta: float) -> "LinkParams":
        half = math.sqrt(eta)
        return replace(self, eta_a=half, eta_b=half)

    def with_gamma(self, gamma: float) -> "LinkParams":
        return replace(self, gamma_a=gamma, gamma_b=gamma)

    def replace(self, **kw) -> "LinkParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class HeraldOutcome:
    state: TwoQubitState
    p_succ: float

    def __post_init__(self):
        if not (0 <= self.p_succ <= 1 + 1e-12):
            raise ParameterError(f"p_succ={self.p_succ!r} outside [0, 1]")


def ensemble_average_visibility(vis: float, eps: float) -> float:
    """Coherence factor after averaging a Gaussian carrier-phase difference.

    Each side's phase has variance ``eps``, so the difference has variance
    ``2 eps`` and ``E[exp(i theta)] = exp(-eps)``.
    """
    _check_unit("vis", vis)
    if eps < 0:
        raise ParameterError(f"eps={eps!r} must be >= 0")
    return vis * math.exp(-eps)


def single_rail_weights(params: LinkParams) -> dict:
    """Unnormalized matrix entries a, b, c, d, e for one click pattern.

    The dark-count weights ``(1-P_d)^2`` and ``P_d(1-P_d)`` are already
    applied, so ``a + b + d + e`` is the probability of that pattern.
    """
    ga, gb, ea, eb, ed = params.gamma_a, params.gamma_b, params.eta_a, params.eta_b, params.eta_d
    clean = (1 - params.p_d) ** 2
    dark = params.p_d * (1 - params.p_d)

    # one photon reached the detectors
    c1 = 0.5 * ga * (1 - gb) * eb * ed
    c2 = 0.5 * (1 - ga) * gb * ea * ed
    c3 = (
        0.5 * (-1) ** params.parity * ed
        * math.sqrt(ga * (1 - ga) * gb * (1 - gb) * ea * eb)
        * ensemble_average_visibility(params.vis, params.eps)
    )
    c4 = 0.5 * ed * (1 - ga) * (1 - gb) * (ea + eb - 2 * ea * eb * ed)
    # nothing reached the detectors, the click is a dark count
    v1 = ga * (1 - gb) * (1 - eb * ed)
    v2 = (1 - ga) * gb * (1 - ea * ed)
    v4 = (1 - ga) * (1 - gb) * (1 - ea * ed) * (1 - eb * ed)
    v5 = ga * gb

    return dict(
        a=dark * v5,
        b=clean * c1 + dark * v1,
        c=clean * c3,
        d=clean * c2 + dark * v2,
        e=clean * c4 + dark * v4,
    )


def dual_rail_weights(params: LinkParams) -> dict:
    """Unnormalized two-photon block and white-noise weight, summed over the
    four heralding patterns (so ``2*pair + 4*noise`` is the success probability)."""
    ea, eb, ed, pd = params.eta_a, params.eta_b, params.eta_d, params.p_d
    c1 = 0.25 * ea * eb * ed**2
    c3 = (-1) ** params.parity * c1 * params.vis**2
    noise = 0.5 * (1 - pd) * ed * (ea + eb - 2 * ea * eb * ed) + pd * (1 - ea * ed) * (1 - eb * ed)
    return dict(
        pair=(1 - pd) ** 4 * c1,
        coherence=(1 - pd) ** 4 * c3,
        noise=pd * (1 - pd) ** 2 * noise,
    )


def _xstate(a, b, c, d, e) -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = a
    m[1, 1] = b
    m[2, 2] = d
    m[3, 3] = e
    m[1, 2] = c
    m[2, 1] = np.conj(c)
    return m


def herald_single_rail(params: LinkParams) -> HeraldOutcome:
    if params.encoding is not Encoding.SINGLE_RAIL:
        raise ParameterError("herald_single_rail needs encoding=single")
    w = single_rail_weights(params)
    n = w["a"] + w["b"] + w["d"] + w["e"]
    if n <= 0:
        raise NoHeraldError(f"single-rail swap never heralds for {params}")
    m = _xstate(w["a"], w["b"], w["c"], w["d"], w["e"]) / n
    # both patterns are equally likely
    return HeraldOutcome(TwoQubitState(m), min(2 * n, 1.0))


def herald_dual_rail(params: LinkParams) -> HeraldOutcome:
    if params.encoding is not Encoding.DUAL_RAIL:
        raise ParameterError("herald_dual_rail needs encoding=dual")
    w = dual_rail_weights(params)
    n = 2 * w["pair"] + 4 * w["noise"]
    if n <= 0:
        raise NoHeraldError(f"dual-rail swap never heralds for {params}")
    m = np.eye(4, dtype=complex) * w["noise"]
    m += _xstate(0, w["pair"], w["coherence"], w["pair"], 0)
    return HeraldOutcome(TwoQubitState(m / n), min(n, 1.0))


def herald(params: LinkParams) -> HeraldOutcome:
    if params.encoding is Encoding.SINGLE_RAIL:
        return herald_single_rail(params)
    return herald_dual_rail(params)


def ideal_single_rail_closed_form(eta: float, gamma: float, parity: int = 0) -> HeraldOutcome:
    """Lossy but otherwise ideal symmetric single-rail link.

    Uses the success probability ``2 sqrt(eta)(1-gamma)(1-(1-gamma)sqrt(eta))``
    and the populations ``alpha1``, ``alpha2``.  Those are normalized by the
    two-pattern probability, so the conditional state is twice the
    ``alpha``-weighted operator.
    """
    if not (0 < eta <= 1):
        raise NoHeraldError(f"eta={eta!r}: a dead channel never heralds")
    if not (0 < gamma < 1):
        raise ParameterError(f"gamma={gamma!r} must lie in (0, 1)")
    se = math.sqrt(eta)
    p = 2 * se * (1 - gamma) * (1 - (1 - gamma) * se)
    alpha1 = gamma * (1 - gamma) * se / p
    alpha2 = se * (1 - gamma) ** 2 * (1 - se) / p
    sign = (-1) ** parity
    m = _xstate(0, alpha1 / 2, sign * alpha1 / 2, alpha1 / 2, alpha2)
    return HeraldOutcome(TwoQubitState(2 * m), p)
