from __future__ import annotations

from dataclasses import replace
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings

from sdsc_nis.conditions import (
    TAU,
    attention_weights,
    audit,
    check_niac,
    check_nias,
    check_nis,
    cycle_gain,
    full_information_value,
    has_negative_cycle,
    improvability_difference_index,
    improvability_efficiency_index,
    nis_matrices,
    shortest_negative_cycle,
    switch_value,
)
from sdsc_nis.core import make_dataset, make_problem

from conftest import matching
from strategies import datasets, random_dataset


def brute_force_negative_cycle(weights: np.ndarray, tau: float) -> tuple[bool, int | None]:
    """Enumerate every simple cycle; return (any negative?, fewest edges among negative ones)."""
    n = weights.shape[0]
    shortest = None
    for k in range(2, n + 1):
        for cyc in permutations(range(n), k):
            if cyc[0] != min(cyc):
                continue
            total = sum(weights[cyc[m], cyc[(m + 1) % k]] for m in range(k))
            if total + k * tau < 0:
                shortest = k if shortest is None else min(shortest, k)
    return shortest is not None, shortest


def test_dn23_switch_values_by_hand(dn23):
    lhs, rhs = nis_matrices(dn23)
    np.testing.assert_allclose(lhs, [3.35, 28.4, 50.4, 71.25])
    # problem 5 switching to problem 95's data: 0.39*5 + 0.36*5
    np.testing.assert_allclose(rhs[0, 1:], [3.55, 3.6, 3.75])
    np.testing.assert_allclose([rhs[1, 2], rhs[1, 3], rhs[2, 3]], [28.8, 30.0, 52.5])


def test_switch_value_reoptimizes_actions():
    # source chooses a1 always; the target pays only for a2, so the switch re-labels
    src = make_problem("s", [[0.5, 0.5], [0.0, 0.0]], matching(1))
    tgt = make_problem("t", [[0.25, 0.25], [0.25, 0.25]], [[0, 0], [3, 3]])
    value, best = switch_value(tgt, src)
    # the empty source row has no scores to compare, so its tie goes to the first action
    assert value == 3.0 and best.tolist() == [1, 0]


def test_dn23_verdicts(dn23):
    rep = audit(dn23)
    assert rep.nias_pass and rep.niac_pass and not rep.nis_pass
    increasing = [rep.nis_row(a, b) for a, b in [("5", "40"), ("5", "70"), ("5", "95"),
                                                  ("40", "70"), ("40", "95"), ("70", "95")]]
    assert all(not r.passed for r in increasing)
    assert rep.worst_violation.problems == ("70", "95")
    assert len(rep.nis) == 16 and len(rep.nias) == 8


def test_nis_rows_include_within_problem():
    ds = make_dataset([make_problem("a", [[0.4, 0.1], [0.1, 0.4]], matching(1))])
    rows = check_nis(ds)
    assert [r.kind for r in rows] == ["NIS-within"]
    assert rows[0].passed


def test_worked_cycle_gain(dn23):
    assert cycle_gain(dn23, ["5", "40"]) == pytest.approx(-1.4, abs=1e-12)
    assert check_niac(dn23.subset(["5", "40"])).passed
    assert not audit(dn23.subset(["5", "40"])).nis_pass


def test_swapped_attention_fails_niac_with_witness(dn23):
    p1, p4 = dn23.problem("5"), dn23.problem("95")
    swapped = replace(dn23, problems=(replace(p1, joint=p4.joint), dn23.problem("40"),
                                      dn23.problem("70"), replace(p4, joint=p1.joint)))
    res = check_niac(swapped)
    assert not res.passed
    assert set(res.witness) == {"5", "95"} and len(res.witness) == 2
    assert res.witness_weight < 0
    assert cycle_gain(swapped, res.witness) == pytest.approx(-res.witness_weight)


def test_niac_single_problem_passes():
    ds = make_dataset([make_problem("a", [[0.4, 0.1], [0.1, 0.4]], matching(1))])
    assert check_niac(ds).passed


def test_nias_failure_detected():
    # choosing a1 when it reveals state w2 is likely
    ds = make_dataset([make_problem("bad", [[0.1, 0.4], [0.4, 0.1]], matching(10))])
    rows = check_nias(ds)
    assert not any(r.passed for r in rows)
    rep = audit(ds)
    assert not rep.nias_pass and not rep.nis_pass


def test_three_cycle_found_when_no_two_cycle():
    w = np.array([[0.0, -1.0, 5.0], [5.0, 0.0, -1.0], [-1.0, 5.0, 0.0]])
    assert has_negative_cycle(w)
    cyc = shortest_negative_cycle(w)
    assert len(cyc) == 3
    assert sum(w[cyc[k], cyc[(k + 1) % 3]] for k in range(3)) == -3.0


def test_tau_shifts_each_edge():
    w = np.array([[0.0, -1e-10], [0.0, 0.0]])
    assert not has_negative_cycle(w, tau=1e-9)
    assert has_negative_cycle(w, tau=0.0)


@pytest.mark.parametrize("seed", range(200))
def test_negative_cycle_detection_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    ds = random_dataset(rng, n, int(rng.integers(2, 4)), int(rng.integers(2, 4)))
    _, rhs = nis_matrices(ds)
    w = attention_weights(rhs)
    expected, fewest = brute_force_negative_cycle(w, TAU)
    assert check_niac(ds).passed == (not expected)
    if expected:
        assert len(check_niac(ds).witness) == fewest


@settings(max_examples=200, deadline=None)
@given(datasets(max_problems=5))
def test_nis_implies_nias_and_niac(ds):
    rep = audit(ds)  # audit itself asserts the implication
    if rep.nis_pass:
        assert rep.nias_pass and rep.niac_pass


@settings(max_examples=200, deadline=None)
@given(datasets())
def test_within_problem_nis_is_aggregate_nias(ds):
    """Own-switch inequality holds exactly when no action-level deviation pays."""
    lhs, rhs = nis_matrices(ds)
    for i, p in enumerate(ds.problems):
        one = make_dataset([p], prior=ds.prior, marginal_tolerance=1)
        nias_ok = all(r.slack >= 0 for r in check_nias(one, 0.0))
        assert (lhs[i] >= rhs[i, i] - 1e-12) == nias_ok or abs(lhs[i] - rhs[i, i]) < 1e-12


def test_dn23_indices(dn23):
    assert improvability_difference_index(dn23, "full_info") == pytest.approx(0.08, abs=1e-9)
    assert improvability_difference_index(dn23, "no_info") == pytest.approx(0.16, abs=1e-9)
    assert improvability_efficiency_index(dn23) == pytest.approx(3.35 / 3.75)


@settings(max_examples=100, deadline=None)
@given(datasets(max_problems=4))
def test_index_semantics(ds):
    lhs, rhs = nis_matrices(ds)
    iei = improvability_efficiency_index(ds)
    idi = improvability_difference_index(ds)
    assert 0 <= iei <= 1 and idi >= 0
    assert np.all(lhs[:, None] >= iei * rhs - 1e-9)
    if audit(ds).nis_pass:
        den = min(full_information_value(p, ds.prior) for p in ds.problems)
        assert idi <= TAU / den


def test_indices_reject_negative_utilities():
    ds = make_dataset([make_problem("n", [[0.5, 0], [0, 0.5]], [[1, -1], [0, 1]])])
    with pytest.raises(ValueError):
        improvability_efficiency_index(ds)
    assert audit(ds).iei is None


def test_report_json_shape(dn23):
    d = audit(dn23).to_dict()
    assert set(d) >= {"nias", "nis", "niac", "idi", "iei", "worst_violation"}
    assert set(d["idi"]) == {"full_info", "no_info"}
    assert d["niac"]["witness_cycle"] is None
    assert {"lhs", "rhs", "slack", "pass", "problems"} <= set(d["nis"]["rows"][0])
