import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from midswap.herald import LinkParams, herald
from midswap.metrics import (
    UnsupportedCaseError,
    binary_entropy,
    coherent_information,
    fidelity_bell,
    hashing_bound,
    link_metrics,
    rate,
    repeaterless_bound,
    special_case_tables,
    xstate_eigenvalues,
)
from midswap.states import BellDiagonalVec, BellState, TwoQubitState, partial_transpose_min_eig


def test_binary_entropy():
    assert binary_entropy(0) == 0
    assert binary_entropy(1) == 0
    assert binary_entropy(0.5) == pytest.approx(1)
    with pytest.raises(ValueError):
        binary_entropy(1.5)


def test_hashing_extremes():
    assert hashing_bound(TwoQubitState.bell(BellState.PHI_PLUS)) == pytest.approx(1)
    assert hashing_bound(TwoQubitState.maximally_mixed()) == pytest.approx(-1)


def test_rate_clamps_negative_hashing():
    assert rate(-0.3, 0.5) == 0
    assert rate(TwoQubitState.bell(BellState.PSI_PLUS), 0.25) == pytest.approx(0.25)


def test_repeaterless_bound():
    assert repeaterless_bound(1.0) == math.inf
    assert repeaterless_bound(0.0) == 0
    eta = 0.01
    assert repeaterless_bound(eta) == pytest.approx(-math.log2(1 - math.sqrt(eta)))
    with pytest.raises(ValueError):
        repeaterless_bound(1.2)


def test_xstate_eigenvalues_match_numerics():
    for m in (0, 1):
        s = herald(LinkParams(0.3, 0.7, 0.9, 1e-2, 0.8, 0.1, 0.4, 0.7, parity=m)).state
        assert np.allclose(np.sort(xstate_eigenvalues(s)), np.linalg.eigvalsh(s.matrix), atol=1e-14)


def test_fidelity_half_is_separability_edge_for_werner():
    s = BellDiagonalVec(0.5, 1 / 6, 1 / 6, 1 / 6).to_state()
    assert fidelity_bell(s) == pytest.approx(0.5)
    assert abs(partial_transpose_min_eig(s)) < 1e-14


TABLE_CASES = [
    LinkParams.symmetric(0.1, 0.6),
    LinkParams.symmetric(0.1, 0.6, vis=0.8),
    LinkParams.symmetric(0.1, 0.6, vis=0.8, eps=0.2),
    LinkParams.symmetric(1e-6, 0.858),
    LinkParams(0.3, 0.8, gamma_a=0.4, gamma_b=0.7),
    LinkParams(0.8, 0.3, gamma_a=0.7, gamma_b=0.2),
    LinkParams(0.05, 0.9, gamma_a=0.5, gamma_b=0.5),
    LinkParams.symmetric(0.2, encoding="dual"),
    LinkParams.symmetric(0.2, encoding="dual", vis=0.9),
    LinkParams(0.2, 0.7, encoding="dual"),
]


@pytest.mark.parametrize("params", TABLE_CASES)
def test_special_case_tables_match_general_path(params):
    closed = special_case_tables(params)
    general = link_metrics(params)
    assert closed.fidelity == pytest.approx(general.fidelity, abs=1e-12)
    assert closed.hashing == pytest.approx(general.hashing, abs=1e-10)
    assert closed.p_succ == pytest.approx(general.p_succ, rel=1e-12)


@pytest.mark.parametrize(
    "params",
    [
        LinkParams.symmetric(0.1, p_d=1e-3),
        LinkParams(0.2, 0.7, encoding="dual", vis=0.9),
        LinkParams(0.2, 0.7, vis=0.9),
        LinkParams.symmetric(0.1, eta_d=0.9),
    ],
)
def test_special_case_tables_refuse_other_cases(params):
    with pytest.raises(UnsupportedCaseError):
        special_case_tables(params)


@settings(max_examples=80, deadline=None)
@given(
    ea=st.floats(1e-3, 1), eb=st.floats(1e-3, 1), pd=st.floats(0, 0.3), vis=st.floats(0, 1),
    ga=st.floats(0.01, 0.99), gb=st.floats(0.01, 0.99),
)
def test_hashing_bounds(ea, eb, pd, vis, ga, gb):
    s = herald(LinkParams(ea, eb, p_d=pd, vis=vis, gamma_a=ga, gamma_b=gb)).state
    i = hashing_bound(s)
    assert -2 - 1e-12 <= i <= 1 + 1e-12
    assert i == max(coherent_information(s, "A"), coherent_information(s, "B"))
    assert 0 <= fidelity_bell(s) <= 1
