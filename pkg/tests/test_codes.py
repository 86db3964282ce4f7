import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fusionqldpc import gf2
from fusionqldpc.codes import (
    NAMED_BB_CODES,
    BBCodeSpec,
    CodeError,
    CssCode,
    build_bb_code,
    build_toric_code,
    distance_upper_bound,
    load_bb_spec,
    load_code,
    logical_operators,
    named_code,
    save_code,
    validate,
)
from fusionqldpc.gf2 import Gf2Matrix

from test_gf2 import naive_rank


@pytest.mark.parametrize("name,n,k", [("bb72", 72, 12), ("bb90", 90, 8), ("bb108", 108, 8), ("bb144", 144, 12)])
def test_bb_parameters(name, n, k):
    code = named_code(name)
    report = validate(code)
    assert (code.n, code.k) == (n, k)
    assert report.commutes
    assert code.qubit_degree == 6
    assert report.x_col_weights == {3: n} and report.z_col_weights == {3: n}
    assert report.x_row_weights == {6: n // 2}


def test_bb72_ranks_against_dense_oracle():
    code = named_code("bb72")
    hx = code.h_x.to_dense()
    assert naive_rank(hx) == 30
    assert gf2.rank(code.h_x) == 30
    assert len(gf2.nullspace_basis(code.h_z)) == 42


def test_bb72_from_polynomials():
    spec = BBCodeSpec(6, 6, ((3, 0), (0, 1), (0, 2)), ((0, 3), (1, 0), (2, 0)))
    code = build_bb_code(spec)
    assert (code.n, code.k) == (72, 12)
    # H_X = [A|B], H_Z = [B^T|A^T]
    hx, hz = code.h_x.to_dense(), code.h_z.to_dense()
    A, B = hx[:, :36], hx[:, 36:]
    assert np.array_equal(hz[:, :36], B.T) and np.array_equal(hz[:, 36:], A.T)


def test_exponents_reduced():
    spec = BBCodeSpec(6, 6, ((9, 0), (0, 7), (0, -4)), ((0, 3), (1, 0), (2, 0)))
    assert spec.a_terms == ((3, 0), (0, 1), (0, 2))


@pytest.mark.parametrize("L", [2, 3, 5, 8])
def test_toric(L):
    code = build_toric_code(L)
    report = validate(code)
    assert (code.n, code.k) == (2 * L * L, 2)
    assert report.commutes
    assert set(report.x_row_weights) == {4} and set(report.z_row_weights) == {4}


def test_mutation_breaks_commutation():
    code = named_code("bb72")
    rows = list(code.h_x.rows)
    rows[0] ^= 1
    bad = CssCode(Gf2Matrix(tuple(rows), 72), code.h_z)
    report = validate(bad)
    assert not report.commutes
    for i, j in report.violations:
        assert i == 0 and (bad.h_z.rows[j] & 1)
    assert "FAIL" in report.summary()


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 5), st.integers(0, 5))
def test_shift_invariance(dx, dy):
    spec, _ = NAMED_BB_CODES["bb72"]
    base, moved = build_bb_code(spec), build_bb_code(spec.shifted(dx, dy))
    assert (moved.n, moved.k) == (base.n, base.k)
    assert validate(moved).x_row_weights == validate(base).x_row_weights
    assert validate(moved).commutes


@pytest.mark.parametrize("name", ["toric2", "toric3", "bb72"])
def test_logical_operators(name):
    code = named_code(name)
    logs = logical_operators(code)
    assert logs == logical_operators(code)
    for v in logs.x_logicals.rows:
        assert code.h_z.matvec(v) == 0
        assert not gf2.in_rowspace(code.h_x, v)
    stacked = code.h_x.vstack(logs.x_logicals)
    assert gf2.rank(stacked) == gf2.rank(code.h_x) + code.k
    # symplectic pairing has full rank
    pairing = Gf2Matrix.from_dense(
        [[gf2.parity(x & z) for z in logs.z_logicals.rows] for x in logs.x_logicals.rows]
    )
    assert gf2.rank(pairing) == code.k


def test_toric_distance():
    assert distance_upper_bound(build_toric_code(3), effort=50, rng=0) == 3
    assert distance_upper_bound(build_toric_code(2), effort=20, rng=0) == 2


def test_distance_bound_never_below_true_distance():
    assert distance_upper_bound(named_code("bb72"), effort=30, rng=1) >= 6


def test_named_code_errors():
    with pytest.raises(CodeError):
        named_code("bb73")
    with pytest.raises(CodeError):
        named_code("toricx")


def test_file_roundtrip(tmp_path):
    code = named_code("toric3")
    path = tmp_path / "t3.txt"
    save_code(code, path)
    again = load_code(path)
    assert again.h_x == code.h_x and again.h_z == code.h_z


def test_load_rejects_noncommuting(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1 2\n10\n\n1 2\n10\n")
    with pytest.raises(CodeError, match="anticommutes"):
        load_code(path)


def test_bb_spec_file(tmp_path):
    spec, _ = NAMED_BB_CODES["bb90"]
    path = tmp_path / "bb90.json"
    import json

    path.write_text(json.dumps(spec.to_dict()))
    assert load_bb_spec(path) == spec
    path.write_text('{"l": 3}')
    with pytest.raises(CodeError, match="malformed"):
        load_bb_spec(path)
