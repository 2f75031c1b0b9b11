"""Brute-force Fock-space model of the swap, used to check the analytic states.

The register is a sparse pure state over memory qubits and photonic modes.
Emission, phase, loss, mode mismatch and the balanced beamsplitters act on
creation operators; detection groups the photonic configurations by detector
counts and traces the rest.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .herald import Encoding, HeraldOutcome, LinkParams, NoHeraldError
from .states import TwoQubitState

MAX_OCCUPATION = 2
_S = 1 / math.sqrt(2)


class TruncationError(RuntimeError):
    pass


class PatternError(ValueError):
    pass


@dataclass(frozen=True)
class FockRegister:
    """Sparse amplitudes keyed by ``(memory bits, mode occupations)``.

    Memory bit 1 is the level that did not emit a photon.
    """

    modes: tuple
    amps: dict = field(default_factory=dict)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amps.values()))

    def index(self, name: str) -> int:
        try:
            return self.modes.index(name)
        except ValueError:
            raise KeyError(f"no mode {name!r} in {self.modes}") from None

    def photon_number(self, key) -> int:
        return sum(key[1])


def emit(encoding, gamma: float, theta: float = 0.0, side: str = "A") -> FockRegister:
    """Memory-photon state of one node; modes are named ``{side}0`` (and ``{side}1``)."""
    encoding = Encoding(encoding)
    if encoding is Encoding.SINGLE_RAIL:
        if not 0 <= gamma <= 1:
            raise ValueError(f"gamma={gamma!r} outside [0, 1]")
        amps = {
            ((1,), (0,)): complex(math.sqrt(gamma)),
            ((0,), (1,)): math.sqrt(1 - gamma) * np.exp(1j * theta),
        }
        return FockRegister((f"{side}0",), _prune(amps))
    g = np.exp(1j * theta) * _S
    amps = {((1,), (1, 0)): g, ((0,), (0, 1)): g}
    return FockRegister((f"{side}0", f"{side}1"), amps)


def _prune(amps, tol=0.0):
    return {k: v for k, v in amps.items() if abs(v) > tol}


def tensor(left: FockRegister, right: FockRegister) -> FockRegister:
    if set(left.modes) & set(right.modes):
        raise ValueError("registers share mode names")
    amps = {}
    for (ml, ol), al in left.amps.items():
        for (mr, orr), ar in right.amps.items():
            amps[(ml + mr, ol + orr)] = al * ar
    return FockRegister(left.modes + right.modes, amps)


def add_vacuum_mode(reg: FockRegister, name: str) -> FockRegister:
    if name in reg.modes:
        raise ValueError(f"mode {name!r} already exists")
    amps = {(m, o + (0,)): a for (m, o), a in reg.amps.items()}
    return FockRegister(reg.modes + (name,), amps)


def apply_phase(reg: FockRegister, mode: str, theta: float) -> FockRegister:
    """``exp(i theta n)`` on one mode."""
    i = reg.index(mode)
    amps = {k: a * np.exp(1j * theta * k[1][i]) for k, a in reg.amps.items()}
    return FockRegister(reg.modes, amps)


def _linear_map(reg: FockRegister, mapping: dict) -> FockRegister:
    """Substitute creation operators ``a_k^dag -> sum_t c_t a_t^dag`` for the
    modes in ``mapping`` (targets must already exist)."""
    idx = {name: reg.index(name) for name in mapping}
    targets = {name: [(reg.index(t), c) for t, c in terms] for name, terms in mapping.items()}
    out = {}
    for (mem, occ), amp in reg.amps.items():
        base = list(occ)
        # each creation operator of a mapped mode becomes a sum over targets
        ops = []
        norm = 1.0
        for name, i in idx.items():
            n = occ[i]
            base[i] = 0
            ops.extend([targets[name]] * n)
            norm /= math.sqrt(math.factorial(n))
        for choice in itertools.product(*ops):
            counts = list(base)
            coeff = amp * norm
            for j, c in choice:
                # a^dag |n> = sqrt(n + 1) |n + 1>
                counts[j] += 1
                coeff *= c * math.sqrt(counts[j])
            if max(counts) > MAX_OCCUPATION:
                raise TruncationError(f"more than {MAX_OCCUPATION} photons in one mode")
            key = (mem, tuple(counts))
            out[key] = out.get(key, 0) + coeff
    return FockRegister(reg.modes, _prune(out, 1e-300))


def apply_loss(reg: FockRegister, mode: str, transmissivity: float, env: str | None = None) -> FockRegister:
    """Couple ``mode`` to a fresh vacuum environment mode at the given transmissivity."""
    if not 0 <= transmissivity <= 1:
        raise ValueError(f"transmissivity={transmissivity!r} outside [0, 1]")
    env = env or f"E_{mode}_{len(reg.modes)}"
    reg = add_vacuum_mode(reg, env)
    t, r = math.sqrt(transmissivity), math.sqrt(1 - transmissivity)
    return _linear_map(reg, {mode: [(mode, t), (env, r)]})


def apply_beamsplitter(reg: FockRegister, mode_i: str, mode_j: str) -> FockRegister:
    """Balanced beamsplitter: ``a_i^dag -> (a_i^dag + a_j^dag)/sqrt2``,
    ``a_j^dag -> (-a_i^dag + a_j^dag)/sqrt2``."""
    return _linear_map(reg, {mode_i: [(mode_i, _S), (mode_j, _S)], mode_j: [(mode_i, -_S), (mode_j, _S)]})


def distinguishability_embed(reg: FockRegister, mode: str, overlap: float, ancilla: str | None = None) -> FockRegister:
    """Split ``mode`` into ``|V|`` matched and ``sqrt(1-|V|^2)`` orthogonal parts."""
    if not 0 <= overlap <= 1:
        raise ValueError(f"overlap={overlap!r} outside [0, 1]")
    ancilla = ancilla or f"{mode}~"
    reg = add_vacuum_mode(reg, ancilla)
    return _linear_map(reg, {mode: [(mode, overlap), (ancilla, math.sqrt(1 - overlap**2))]})


@dataclass(frozen=True)
class DetectionModel:
    """PNR detectors; ``eta_d`` is applied upstream as extra loss, dark counts
    add at most one click per detector."""

    eta_d: float = 1.0
    p_d: float = 0.0
    resolving: bool = True

    def __post_init__(self):
        if not (0 <= self.eta_d <= 1 and 0 <= self.p_d < 1):
            raise ValueError(f"bad detection model {self}")
        if not self.resolving:
            raise ValueError("only number-resolving detectors are modeled")


def _memory_index(mem) -> int:
    return 2 * (1 - mem[0]) + (1 - mem[1])


def count_blocks(reg: FockRegister, detectors) -> dict:
    """Unnormalized memory operators for each vector of arrived photon counts.

    ``detectors`` lists, per detector, the modes it integrates over; every
    other photonic mode is traced out.
    """
    det_idx = [[reg.index(m) for m in group] for group in detectors]
    vecs = {}
    for (mem, occ), amp in reg.amps.items():
        v = vecs.setdefault(occ, np.zeros(4, dtype=complex))
        v[_memory_index(mem)] += amp
    blocks = {}
    for occ, v in vecs.items():
        counts = tuple(sum(occ[i] for i in group) for group in det_idx)
        blocks[counts] = blocks.get(counts, 0) + np.outer(v, v.conj())
    return blocks


def _dark_weight(pattern, arrived, p_d) -> float:
    w = 1.0
    for reg_count, n in zip(pattern, arrived):
        extra = reg_count - n
        if extra == 0:
            w *= 1 - p_d
        elif extra == 1:
            w *= p_d
        else:
            return 0.0
    return w


def measure_and_herald(reg: FockRegister, detectors, detection: DetectionModel, pattern, blocks=None):
    """Unnormalized memory operator for registered ``pattern`` and its probability."""
    blocks = count_blocks(reg, detectors) if blocks is None else blocks
    if len(pattern) != len(detectors):
        raise PatternError(f"pattern {pattern} does not match {len(detectors)} detectors")
    m = np.zeros((4, 4), dtype=complex)
    for arrived, block in blocks.items():
        w = _dark_weight(pattern, arrived, detection.p_d)
        if w:
            m += w * block
    return m, float(np.trace(m).real)


def outcome_distribution(reg: FockRegister, detectors, detection: DetectionModel) -> dict:
    """Probability of every registered pattern, failures included."""
    blocks = count_blocks(reg, detectors)
    top = max(max(k) for k in blocks) + 1
    out = {}
    for pattern in itertools.product(range(top + 1), repeat=len(detectors)):
        _, p = measure_and_herald(reg, detectors, detection, pattern, blocks)
        if p > 0:
            out[pattern] = p
    return out


SUCCESS_PATTERNS = {
    (Encoding.SINGLE_RAIL, 0): [(0, 1)],
    (Encoding.SINGLE_RAIL, 1): [(1, 0)],
    # detectors: rail 0 port 0, rail 1 port 0, rail 0 port 1, rail 1 port 1
    (Encoding.DUAL_RAIL, 0): [(1, 1, 0, 0), (0, 0, 1, 1)],
    (Encoding.DUAL_RAIL, 1): [(0, 1, 1, 0), (1, 0, 0, 1)],
}


def swap_register(params: LinkParams, theta_a: float = 0.0, theta_b: float = 0.0):
    """Register just before detection and the detector mode groups."""
    enc = params.encoding
    ga = params.gamma_a if enc is Encoding.SINGLE_RAIL else 0.5
    gb = params.gamma_b if enc is Encoding.SINGLE_RAIL else 0.5
    reg = tensor(emit(enc, ga, side="A"), emit(enc, gb, side="B"))
    rails = range(1 if enc is Encoding.SINGLE_RAIL else 2)
    for r in rails:
        reg = apply_phase(reg, f"A{r}", theta_a)
        reg = apply_phase(reg, f"B{r}", theta_b)
        reg = apply_loss(reg, f"A{r}", params.eta_a * params.eta_d)
        reg = apply_loss(reg, f"B{r}", params.eta_b * params.eta_d)
    mismatch = params.vis < 1
    for r in rails:
        if mismatch:
            reg = distinguishability_embed(reg, f"B{r}", params.vis, ancilla=f"B{r}~")
            reg = add_vacuum_mode(reg, f"A{r}~")
            reg = apply_beamsplitter(reg, f"A{r}~", f"B{r}~")
        reg = apply_beamsplitter(reg, f"A{r}", f"B{r}")

    def group(port, r):
        g = [f"{port}{r}"]
        return g + [f"{port}{r}~"] if mismatch else g

    # output port 0 is labelled by the A modes, port 1 by the B modes
    detectors = [group(port, r) for port in "AB" for r in rails]
    return reg, detectors


def herald_pattern(params: LinkParams, pattern, theta_a: float = 0.0):
    """Normalized memory state and probability for one heralding pattern."""
    pattern = tuple(pattern)
    valid = SUCCESS_PATTERNS[(params.encoding, 0)] + SUCCESS_PATTERNS[(params.encoding, 1)]
    if pattern not in valid:
        raise PatternError(f"{pattern} is not a heralding pattern for {params.encoding.value} rail; expected one of {valid}")
    reg, detectors = swap_register(params, theta_a=theta_a)
    m, p = measure_and_herald(reg, detectors, DetectionModel(params.eta_d, params.p_d), pattern)
    if p <= 0:
        raise NoHeraldError(f"pattern {pattern} never occurs")
    return TwoQubitState.from_unnormalized(m), p


def _herald_at(params: LinkParams, theta: float):
    reg, detectors = swap_register(params, theta_a=theta)
    det = DetectionModel(params.eta_d, params.p_d)
    blocks = count_blocks(reg, detectors)
    m = np.zeros((4, 4), dtype=complex)
    total = 0.0
    for parity in (0, 1):
        for pattern in SUCCESS_PATTERNS[(params.encoding, parity)]:
            mp, p = measure_and_herald(reg, detectors, det, pattern, blocks)
            total += p
            if parity == params.parity:
                m += mp
    return m, total


def phase_average(fn, eps: float, order: int = 20):
    """Average ``fn(theta)`` over a Gaussian phase difference of variance ``2 eps``."""
    if order < 8:
        raise ValueError("quadrature order must be at least 8")
    if eps == 0:
        return fn(0.0)
    x, w = np.polynomial.hermite_e.hermegauss(order)
    w = w / math.sqrt(2 * math.pi)
    sigma = math.sqrt(2 * eps)
    acc = None
    for xi, wi in zip(x, w):
        val = fn(sigma * xi)
        acc = tuple(wi * v for v in val) if acc is None else tuple(a + wi * v for a, v in zip(acc, val))
    return acc


def oracle_herald(params: LinkParams, order: int = 20) -> HeraldOutcome:
    """Heralded memory state for parity ``params.parity`` and the success
    probability summed over all heralding patterns."""
    m, p = phase_average(lambda th: _herald_at(params, th), params.eps, order)
    tr = np.trace(m).real
    if tr <= 0:
        raise NoHeraldError(f"oracle: pattern never occurs for {params}")
    return HeraldOutcome(TwoQubitState.from_unnormalized(m), min(float(p), 1.0))
