"""Exact small-instance baselines: CTMC hitting times, crossing enumeration."""
import math

import numpy as np
import pytest

from cpdilute.graphs import Graph, dilute_bonds, dilute_sites, gen_path
from cpdilute.oracle import (CTMCSpec, OracleError, exact_crossing_prob,
                             exact_mean_extinction, oriented_next_row_dist)


def _full(g):
    return dilute_bonds(g, 1.0, 0)


def test_ctmc_spec_validation():
    with pytest.raises(OracleError):
        CTMCSpec(_full(gen_path(13)), 1.0)
    with pytest.raises(OracleError):
        CTMCSpec(_full(gen_path(3)), -0.5)


def test_ctmc_transition_rates():
    spec = CTMCSpec(_full(gen_path(2)), 2.0)
    # state {0}: death of 0, birth 0 -> 1
    trans = dict(spec.transitions(0b01))
    assert trans == {0b00: 1.0, 0b11: 2.0}
    assert spec.exit_rate(0b01) == 3.0
    assert spec.exit_rate(0b11) == 2.0  # two deaths, no vacancies
    for s in range(1, 4):
        assert spec.exit_rate(s) > 0


def test_ctmc_inert_site_gives_no_births():
    g = gen_path(2)
    dg = type(dilute_sites(g, 0.5, 0))(
        g, "site", 0.5, np.array([False, True]), 0)
    spec = CTMCSpec(dg, 2.0)
    # vertex 0 is inert: occupied state {0} can only die
    assert dict(spec.transitions(0b01)) == {0b00: 1.0}
    # vertex 1 can give birth onto the inert-but-occupiable vertex 0
    assert dict(spec.transitions(0b10)) == {0b00: 1.0, 0b11: 2.0}


def test_mean_extinction_closed_forms():
    assert abs(exact_mean_extinction(_full(gen_path(1)), 1.0) - 1.0) < 1e-12
    # two vertices, one edge: m = (3 + 2 lam) / 2 / (1 + ... ) -> 2.5 at lam=2
    assert abs(exact_mean_extinction(_full(gen_path(2)), 2.0) - 2.5) < 1e-12
    # lam = 0: independent deaths, E max(E1, E2) = 3/2
    assert abs(exact_mean_extinction(_full(gen_path(2)), 0.0) - 1.5) < 1e-12


def test_mean_extinction_monotone_in_size_and_lambda():
    prev = 0.0
    for n in range(1, 9):
        m = exact_mean_extinction(_full(gen_path(n)), 2.0)
        assert m > prev
        prev = m
    prev = 0.0
    for lam in (0.5, 1.0, 2.0, 4.0):
        m = exact_mean_extinction(_full(gen_path(5)), lam)
        assert m > prev
        prev = m


def test_mean_extinction_bond_dilution_reduces_time():
    g = gen_path(6)
    full = exact_mean_extinction(dilute_bonds(g, 1.0, 0), 2.0)
    cut = exact_mean_extinction(dilute_bonds(g, 0.0, 0), 2.0)
    assert cut < full
    # all bonds removed: max of 6 unit exponentials = H_6
    assert abs(cut - sum(1.0 / k for k in range(1, 7))) < 1e-10


def test_crossing_prob_closed_forms():
    for p in (0.0, 0.3, 0.5, 1.0):
        assert abs(exact_crossing_prob(2, 1, p, "LR") - p) < 1e-12
        assert abs(exact_crossing_prob(1, 2, p, "TB") - p) < 1e-12
    # 2x2 box LR crosses iff either horizontal edge is open
    for p in (0.2, 0.5, 0.9):
        got = exact_crossing_prob(2, 2, p, "LR")
        assert abs(got - (1 - (1 - p) ** 2)) < 1e-12


def test_crossing_prob_validation():
    with pytest.raises(OracleError):
        exact_crossing_prob(1, 3, 0.5, "LR")
    with pytest.raises(OracleError):
        exact_crossing_prob(3, 1, 0.5, "TB")
    with pytest.raises(OracleError):
        exact_crossing_prob(2, 2, 1.5)
    with pytest.raises(OracleError):
        exact_crossing_prob(2, 2, 0.5, "XY")
    with pytest.raises(OracleError):
        exact_crossing_prob(6, 6, 0.5)  # 60 edges > enumeration cap


def test_crossing_duality_sum_identity():
    # LR crossing of (n+1) x n at p plus TB crossing of the n x (n+1) dual
    # at 1 - p is exactly 1
    for n in (1, 2):
        for p in (0.2, 0.5, 0.8):
            lr = exact_crossing_prob(n + 1, n, p, "LR")
            tb = exact_crossing_prob(n, n + 1, 1.0 - p, "TB")
            assert abs(lr + tb - 1.0) < 1e-10


def test_crossing_self_dual_point():
    for n in (1, 2):
        assert abs(exact_crossing_prob(n + 1, n, 0.5, "LR") - 0.5) < 1e-10


def test_oriented_next_row_dist():
    # single occupied site, full activity: neighbors 0 and 2 eligible
    pmf = oriented_next_row_dist([False, True, False], 0.3)
    assert abs(pmf.sum() - 1.0) < 1e-12
    assert abs(pmf[0b000] - 0.49) < 1e-12  # both coins fail
    assert abs(pmf[0b101] - 0.09) < 1e-12  # both succeed
    assert pmf[0b010] == 0.0  # column 1 not eligible
    # inert column 2 forces bit 2 vacant
    pmf2 = oriented_next_row_dist([False, True, False], 0.3,
                                  mask=[True, True, False])
    assert abs(pmf2[0b001] - 0.3) < 1e-12
    assert pmf2[0b100] == 0.0
    # empty row: next row surely empty
    pmf3 = oriented_next_row_dist([False, False], 0.9)
    assert pmf3[0] == 1.0


def test_oriented_next_row_dist_validation():
    with pytest.raises(OracleError):
        oriented_next_row_dist([True] * 17, 0.5)
    with pytest.raises(OracleError):
        oriented_next_row_dist([True, False], 1.5)
