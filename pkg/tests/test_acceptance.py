"""Acceptance criteria AC1..AC11, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import math
import time

import numpy as np
import pytest

from midswap.cli import verify_grid
from midswap.distill import (
    bennett_round_map,
    deutsch_round_exact,
    deutsch_round_map,
    distillation_limit,
    pump,
)
from midswap.fock_oracle import oracle_herald
from midswap.herald import Encoding, LinkParams, herald, ideal_single_rail_closed_form
from midswap.metrics import binary_entropy, evaluate, fidelity_bell, hashing_bound
from midswap.optimize import (
    GammaPolicy,
    crossover_loss,
    db_to_eta,
    default_distillation_gamma,
    max_range,
    optimize_gamma,
)
from midswap.states import BellDiagonalVec, TwoQubitState, check_density_matrix

acceptance = pytest.mark.acceptance


def _slope(etas, rates):
    return float(np.polyfit(np.log(etas), np.log(rates), 1)[0])


def _optimized_rate(eta, encoding):
    p = LinkParams.symmetric(eta, encoding=encoding)
    if p.encoding is Encoding.SINGLE_RAIL:
        return optimize_gamma(p, GammaPolicy.maximize_rate())[1].rate
    return evaluate(herald(p), eta).rate


@acceptance("AC1", "oracle equivalence on a 200-point grid, <= 1e-10, < 1 min")
def test_ac1_oracle_equivalence(report):
    t0 = time.perf_counter()
    worst = {}
    for point in verify_grid(200, seed=2024):
        for enc in Encoding:
            p = LinkParams(encoding=enc, **point)
            a, o = herald(p), oracle_herald(p)
            dev = max(np.abs(a.state.matrix - o.state.matrix).max(), abs(a.p_succ - o.p_succ))
            worst[enc.value] = max(worst.get(enc.value, 0.0), dev)
    elapsed = time.perf_counter() - t0
    report.update({k: f"{v:.1e}" for k, v in worst.items()}, seconds=f"{elapsed:.1f}")
    assert max(worst.values()) <= 1e-10
    assert elapsed < 60


@acceptance("AC2", "ideal closed forms at machine precision")
def test_ac2_ideal_closed_forms(report):
    worst = 0.0
    for eta in np.geomspace(1e-8, 1, 25):
        d = herald(LinkParams.symmetric(eta, encoding="dual"))
        worst = max(worst, abs(d.p_succ - eta / 2) / (eta / 2), abs(fidelity_bell(d.state) - 1))
        for gamma in (0.05, 0.3, 0.5, 0.858, 0.99):
            s = herald(LinkParams.symmetric(eta, gamma))
            c = ideal_single_rail_closed_form(eta, gamma)
            p_ref = 2 * math.sqrt(eta) * (1 - gamma) * (1 - (1 - gamma) * math.sqrt(eta))
            worst = max(worst, abs(s.p_succ - p_ref) / p_ref, np.abs(s.state.matrix - c.state.matrix).max())
    report["max_rel_dev"] = f"{worst:.1e}"
    assert worst <= 1e-13


@acceptance("AC3", "rate slopes over eta in [1e-6, 1e-4]: 0.5 and 1.0 +- 0.02")
def test_ac3_rate_scaling(report):
    etas = np.geomspace(1e-6, 1e-4, 7)
    s_single = _slope(etas, [_optimized_rate(e, "single") for e in etas])
    s_dual = _slope(etas, [_optimized_rate(e, "dual") for e in etas])
    report.update(single=f"{s_single:.4f}", dual=f"{s_dual:.4f}")
    assert abs(s_single - 0.5) <= 0.02
    assert abs(s_dual - 1.0) <= 0.02


@acceptance("AC4", "rate-optimal single-rail fidelity 0.858 +- 0.001 at eta <= 1e-6")
def test_ac4_high_loss_fidelity(report):
    fids = []
    for eta in (1e-6, 1e-8, 1e-10):
        _, m = optimize_gamma(LinkParams.symmetric(eta), GammaPolicy.maximize_rate())
        fids.append(m.fidelity)
    report["F"] = "/".join(f"{f:.5f}" for f in fids)
    assert all(abs(f - 0.858) <= 0.001 for f in fids)


@acceptance("AC5", "dual/single crossover inside [5, 9] dB half-channel loss")
def test_ac5_crossover(report):
    x = crossover_loss()
    report["half_db"] = f"{x:.3f}"
    assert 5 <= x <= 9
    for half_db, dual_wins in ((x - 1, True), (x - 4, True), (x + 1, False), (x + 8, False)):
        eta = db_to_eta(2 * half_db)
        dual = _optimized_rate(eta, "dual")
        single = _optimized_rate(eta, "single")
        assert (dual > single) == dual_wins


FIG2_VARIANTS = [
    dict(encoding="single", vis=1.0, eps=0.0),
    dict(encoding="single", vis=0.95, eps=0.0),
    dict(encoding="single", vis=0.95, eps=0.1),
    dict(encoding="dual", vis=1.0),
    dict(encoding="dual", vis=0.95),
]


@acceptance("AC6", "R < D2 at every point of the rate-vs-loss sweep")
def test_ac6_repeaterless_bound(report):
    n = 0
    worst = 0.0
    for variant in FIG2_VARIANTS:
        for pd in (0.0, 1e-4, 1e-2):
            for db in np.linspace(0, 60, 31):
                eta = db_to_eta(db)
                p = LinkParams.symmetric(eta, p_d=pd, **variant)
                if p.encoding is Encoding.SINGLE_RAIL:
                    _, m = optimize_gamma(p, GammaPolicy.maximize_rate())
                else:
                    m = evaluate(herald(p), eta)
                n += 1
                worst = max(worst, m.rate / m.d2_bound)
                assert m.rate < m.d2_bound
    report.update(points=n, max_ratio=f"{worst:.3f}")


@acceptance("AC7", "dual-rail visibility: hashing = 1 - h2((1 - v^2)/2), p_succ independent of V")
def test_ac7_visibility(report):
    rng = np.random.default_rng(7)
    worst_i = worst_p = 0.0
    for _ in range(100):
        eta = float(10 ** rng.uniform(-6, 0))
        vis = float(rng.uniform(0, 1))
        p = LinkParams.symmetric(eta, encoding="dual", vis=vis)
        out = herald(p)
        v = math.sqrt(2 * abs(out.state[1, 2]))
        worst_i = max(worst_i, abs(hashing_bound(out.state) - (1 - binary_entropy((1 - v * v) / 2))), abs(v - vis))
        ref = herald(p.replace(vis=1.0)).p_succ
        worst_p = max(worst_p, abs(out.p_succ - ref))
        s = LinkParams.symmetric(eta, float(rng.uniform(0.05, 0.95)), vis=vis, p_d=1e-3)
        worst_p = max(worst_p, abs(herald(s).p_succ - herald(s.replace(vis=1.0)).p_succ))
    report.update(hashing_dev=f"{worst_i:.1e}", p_dev=f"{worst_p:.1e}")
    assert worst_i <= 1e-10
    assert worst_p <= 1e-12


@acceptance("AC8", "phase averaging: coherence factor exp(-eps) <= 1e-8, dual invariant <= 1e-12")
def test_ac8_phase_averaging(report):
    base = LinkParams(0.3, 0.5, eta_d=0.9, p_d=1e-3, vis=0.9, gamma_a=0.4, gamma_b=0.6)
    c0 = oracle_herald(base).state[1, 2]
    n0 = herald(base).state[1, 2] / 0.9
    worst_s = worst_d = 0.0
    for eps in (0.01, 0.1, 0.5):
        p = base.replace(eps=eps)
        c = oracle_herald(p).state[1, 2]
        worst_s = max(worst_s, abs(c / c0 - math.exp(-eps)), abs(c / n0 - 0.9 * math.exp(-eps)))
        d0 = oracle_herald(base.replace(encoding="dual"))
        d = oracle_herald(p.replace(encoding="dual"))
        worst_d = max(worst_d, np.abs(d.state.matrix - d0.state.matrix).max(), abs(d.p_succ - d0.p_succ))
        worst_d = max(worst_d, np.abs(herald(p.replace(encoding="dual")).state.matrix - d0.state.matrix).max())
    report.update(single=f"{worst_s:.1e}", dual=f"{worst_d:.1e}")
    assert worst_s <= 1e-8
    assert worst_d <= 1e-12


@acceptance("AC9", "distillation: exact = map, closed forms, Bennett decay, distilled slopes")
def test_ac9_distillation(report):
    rng = np.random.default_rng(9)
    # (a)
    dev = 0.0
    for _ in range(200):
        v = BellDiagonalVec.from_array(rng.dirichlet(np.ones(4)))
        r = deutsch_round_exact(v.to_state())
        vm, pm = deutsch_round_map(v)
        dev = max(dev, np.abs(r.output_state.matrix - vm.to_state().matrix).max(), abs(r.p_round - pm))
    assert dev <= 1e-12
    # (b)
    for vis in (0.3, 0.7, 0.95):
        a, b = (1 + vis) / 2, (1 - vis) / 2
        v = BellDiagonalVec(a, b, 0, 0)
        for k in range(1, 7):
            v, _ = deutsch_round_map(v)
            K = 2**k
            assert abs(v.a - a**K / (a**K + b**K)) <= 1e-12
    # (c)
    for vis in (0.3, 0.7, 0.95):
        v = BellDiagonalVec((1 + vis**2) / 2, (1 - vis**2) / 2, 0, 0)
        prev = v.a
        for k in range(1, 7):
            v, _ = bennett_round_map(v)
            assert abs(v.a - (1 + vis ** (2 ** (k + 1))) / 2) <= 1e-12
            # once V^(2^k) drops below double resolution F is exactly 1/2
            if vis ** (2**k) > 1e-12:
                assert v.a < prev
            else:
                assert v.a <= prev
            prev = v.a
    # (d)
    etas = np.geomspace(1e-6, 1e-4, 5)
    g = default_distillation_gamma()
    slopes = {}
    for enc, gamma, expect in (("single", g, lambda k: 2 ** (k - 1)), ("dual", 0.5, lambda k: 2**k)):
        for k in (1, 2):
            rates = [pump(herald(LinkParams.symmetric(e, gamma, encoding=enc)), k).cumulative_rate for e in etas]
            s = _slope(etas, rates)
            slopes[f"{enc}{k}"] = f"{s:.3f}"
            assert abs(s - expect(k)) <= 0.05 * expect(k)
    report.update(map_dev=f"{dev:.1e}", **slopes)


@acceptance("AC10", "range: finite, dual > single, 15-round saturation within 0.1 dB of eta_lim")
def test_ac10_range(report):
    for pd in (1e-4, 1e-3, 1e-2):
        single = max_range(LinkParams.symmetric(1.0, p_d=pd))
        dual = max_range(LinkParams.symmetric(1.0, p_d=pd, encoding="dual"))
        assert math.isfinite(single.loss_db) and math.isfinite(dual.loss_db)
        assert dual.loss_db > single.loss_db
        gaps = []
        for enc in Encoding:
            lim = distillation_limit(LinkParams.symmetric(1.0, p_d=pd, encoding=enc), rounds=15)
            gaps.append(lim.gap_db)
            assert abs(lim.gap_db) <= 0.1
        report[f"pd={pd:g}"] = f"{single.loss_db:.2f}/{dual.loss_db:.2f}dB gap {max(gaps):.3f}"


@acceptance("AC11", "every produced state is Hermitian, unit trace and PSD")
def test_ac11_state_validity(report):
    rng = np.random.default_rng(11)
    states = []
    for point in verify_grid(40, seed=11):
        for enc in Encoding:
            p = LinkParams(encoding=enc, **point)
            states.append(herald(p).state)
            states.append(oracle_herald(p).state)
            sched = pump(herald(p), 4, parity=p.parity)
            states.extend(r.output_state for r in sched.per_round)
            states.extend(r.output_state for r in pump(herald(p), 2, engine="map", parity=p.parity).per_round)
    for _ in range(20):
        v = BellDiagonalVec.from_array(rng.dirichlet(np.ones(4)))
        states.append(v.to_state())
    for s in states:
        assert isinstance(s, TwoQubitState)
        check_density_matrix(s.matrix)
    report["states"] = len(states)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
