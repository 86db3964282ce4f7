import dataclasses
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fusionqldpc import gf2
from fusionqldpc.gf2 import Gf2Matrix
from fusionqldpc.noise import sample_rus
from fusionqldpc.oracle import (
    Pauli,
    RusEvent,
    StabilizerTableau,
    apply_measurement_pattern,
    build_resource_union,
    check_commuting,
    events_from_log,
    layer_meta_checks,
    pauli_product,
    verify_event_semantics,
    verify_incidence,
)

from conftest import lattice_and_problem
from test_gf2 import naive_rank


def test_pauli_algebra():
    x, z = Pauli.from_string("X"), Pauli.from_string("Z")
    y = Pauli.from_string("Y")
    # phases count powers of i in front of X^xs Z^zs, so Y = iXZ and ZX = -XZ
    assert x * z == Pauli(frozenset({0}), frozenset({0}), 0)
    assert (z * x).phase == 2 and y.phase == 1
    assert not x.commutes(z) and x.commutes(x)
    assert Pauli.from_string("XX").commutes(Pauli.from_string("ZZ"))
    assert Pauli.from_string("-XZ").phase == 2
    assert y.hermitian and not (x * z).hermitian
    assert pauli_product([Pauli.x(0), Pauli.x(0)]) == Pauli(frozenset(), frozenset(), 0)
    with pytest.raises(ValueError):
        Pauli.from_string("XQ")


def test_star_generator():
    tab = StabilizerTableau.graph_state(4, [(0, 1), (0, 2), (0, 3)])
    assert tab.expectation(Pauli.from_string("XZZZ")) == 1
    assert tab.expectation(Pauli.from_string("ZXII")) == 1
    assert tab.expectation(Pauli.from_string("XIII")) == 0


def test_two_node_chain_with_leaves():
    # chain 0-1, leaf 2 on 0, leaf 3 on 1
    edges = [(0, 1), (0, 2), (1, 3)]
    tab = StabilizerTableau.graph_state(4, edges)
    for v in range(4):
        nbrs = {u for e in edges for u in e if v in e and u != v}
        assert tab.expectation(Pauli(frozenset({v}), frozenset(nbrs))) == 1
    assert tab.commutation_ok()


def test_bell_correlations():
    tab = StabilizerTableau.graph_state(2, [(0, 1)])
    rec = apply_measurement_pattern(tab, [Pauli.from_string("XX"), Pauli.from_string("ZZ")], 0)
    assert rec.deterministic == [False, True]
    # XX * YY = -ZZ and YY = +1 on this state
    assert rec.bits[1] == rec.bits[0] ^ 1


def test_ghz_parities():
    tab = StabilizerTableau.graph_state(4, [(0, 1), (0, 2), (0, 3)])
    tab.measure(Pauli.x(0), np.random.default_rng(0))
    if tab.expectation(Pauli.x(0)) == -1:
        tab.apply_pauli(Pauli.z(0))
    rec = apply_measurement_pattern(tab, [Pauli.from_string("IXXI"), Pauli.from_string("IIXX")], 1)
    assert rec.deterministic == [True, True] and rec.bits == [0, 0]


def test_noncommuting_pattern_rejected():
    with pytest.raises(ValueError, match="do not commute"):
        check_commuting([Pauli.from_string("XI"), Pauli.from_string("ZI")])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_order_independence(seed):
    rng = np.random.default_rng(seed)
    n = 7
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < 0.4]
    pattern = [Pauli.x(*rng.choice(n, size=rng.integers(1, 4), replace=False).tolist()) for _ in range(5)]
    products = [pauli_product(c) for r in (1, 2, 3) for c in itertools.combinations(pattern, r)]
    verdicts = []
    for order in (list(range(5)), rng.permutation(5).tolist()):
        tab = StabilizerTableau.graph_state(n, edges)
        rec = apply_measurement_pattern(tab, [pattern[i] for i in order], rng)
        assert tab.commutation_ok()
        verdicts.append([tab.expectation(p) != 0 for p in products])
        for p in pattern:
            assert tab.expectation(p) != 0
    assert verdicts[0] == verdicts[1]


def test_resource_union_bb72(bb72_t2):
    lattice, _ = bb72_t2
    tab = build_resource_union(lattice)
    assert tab.commutation_ok()


def test_incidence_toric2():
    lattice, problem = lattice_and_problem("toric2", 2)
    rep = verify_incidence(lattice, problem)
    assert rep.passed, rep.summary()
    assert rep.summary().startswith("incidence: PASS")


def test_incidence_detects_corruption():
    lattice, problem = lattice_and_problem("toric2", 2)
    rows = list(problem.h_det.rows)
    rows[0] ^= 1 << 1  # move a fusion bit into a cell it does not belong to
    bad = dataclasses.replace(problem, h_det=Gf2Matrix(tuple(rows), problem.h_det.ncols))
    rep = verify_incidence(lattice, bad, completeness=False)
    assert not rep.passed and rep.mismatches > 0


@pytest.mark.parametrize("name,T", [("toric3", 2), ("bb72", 2)])
def test_layer_meta_checks(name, T):
    lattice, problem = lattice_and_problem(name, T)
    hx = lattice.code.h_x
    relations = hx.nrows - naive_rank(hx.to_dense())
    meta = layer_meta_checks(lattice, problem)
    assert len(meta) == relations * T
    # zero syndrome errors cannot flip them: they lie outside the detector span
    basis = gf2.EchelonBasis()
    for r in problem.h_det.rows:
        basis.add(r)
    assert all(not basis.contains(v) for v in meta)


@pytest.mark.parametrize("result,endpoint", [
    ("loss", "ancilla"), ("failure", "ancilla"), ("failure", "data"),
])
def test_single_event_semantics(result, endpoint):
    lattice, problem = lattice_and_problem("toric2", 2)
    for f in range(0, problem.n_fusions, 5):
        rep = verify_event_semantics(lattice, problem, [RusEvent(f, result, endpoint)])
        assert rep.passed, (f, rep.summary())


def test_skips_after_loss():
    lattice, problem = lattice_and_problem("toric2", 2)
    for f in range(0, problem.n_fusions, 7):
        chain, _ = lattice.fusion_endpoints(f)
        events = [RusEvent(f, "loss")]
        events += [RusEvent(g, "skipped") for g in lattice.fusions_at[chain] if g > f]
        rep = verify_event_semantics(lattice, problem, events)
        assert rep.passed, (f, rep.summary())


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["standard", "modified"]))
def test_sampled_event_semantics(seed, strategy):
    lattice, problem = lattice_and_problem("toric3", 3)
    tn = sample_rus(lattice, problem, 0.9, 2, strategy, np.random.default_rng(seed))
    events = events_from_log(tn.rus_result, tn.rus_endpoint)
    rep = verify_event_semantics(lattice, problem, events)
    assert rep.passed, rep.summary()
    assert rep.erased_columns == tn.erasures.size
