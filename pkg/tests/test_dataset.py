import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from satcause.dataset import (
    SAT_SCHEMA,
    ColumnSchema,
    Dataset,
    Predicate,
    design_columns,
    encode_categoricals,
    filter_rows,
    kfold_split,
    load_csv,
    normalize_standard_score,
    parse_predicate,
    schema_from_json,
    schema_to_json,
    write_csv,
)
from satcause.errors import (
    BadFoldCount,
    DataError,
    EmptyFile,
    EmptyResult,
    MissingColumn,
    NonNumericCell,
    UnknownCategory,
    UnknownColumn,
    ZeroVariance,
)

HEADER = "Branching,Restart,Size,LBD,Activity,UIP,Propagation,LastTouch,Time,Utility"
ROWS = [
    "VSIDS,Luby,30,4,1.5,7,20,100,0,55.25",
    "Maple,Geometric,41,9,0.25,3,12,2300,10000,12",
    "VSIDS,LBD-based,22,2,3,9,31,0,20000,80.5",
]


def write(tmp_path, lines, name="d.csv"):
    p = tmp_path / name
    p.write_text("\n".join(lines) + "\n")
    return p


def small(cols: dict, cats: dict | None = None) -> Dataset:
    cats = cats or {}
    schema = tuple(
        ColumnSchema(k, "categorical", cats[k]) if k in cats else ColumnSchema(k) for k in cols
    )
    return Dataset(schema, cols)


def test_default_schema_has_ten_columns():
    assert [c.name for c in SAT_SCHEMA] == HEADER.split(",")
    kinds = {c.name: c.kind for c in SAT_SCHEMA}
    assert kinds["Branching"] == kinds["Restart"] == "categorical"
    assert sum(k == "continuous" for k in kinds.values()) == 8


def test_load_three_rows(tmp_path):
    d = load_csv(write(tmp_path, [HEADER, *ROWS]))
    assert d.n == 3
    assert list(d.labels("Restart")) == ["Luby", "Geometric", "LBD-based"]
    assert d["Utility"].tolist() == [55.25, 12.0, 80.5]


def test_column_order_in_file_is_free(tmp_path):
    cols = HEADER.split(",")
    perm = cols[::-1]
    lines = [",".join(perm)] + [",".join(r.split(",")[::-1]) for r in ROWS]
    a = load_csv(write(tmp_path, [HEADER, *ROWS], "a.csv"))
    b = load_csv(write(tmp_path, lines, "b.csv"))
    for c in cols:
        assert np.array_equal(a[c], b[c])


def test_unknown_category(tmp_path):
    bad = ROWS[1].replace("Maple", "CHB")
    with pytest.raises(UnknownCategory) as ei:
        load_csv(write(tmp_path, [HEADER, ROWS[0], bad]))
    assert (ei.value.row, ei.value.column, ei.value.value) == (2, "Branching", "CHB")


def test_missing_column(tmp_path):
    header = HEADER.replace(",Utility", "")
    rows = [r.rsplit(",", 1)[0] for r in ROWS]
    with pytest.raises(MissingColumn) as ei:
        load_csv(write(tmp_path, [header, *rows]))
    assert ei.value.column == "Utility"


def test_non_numeric_cell(tmp_path):
    bad = ROWS[0].replace(",4,", ",four,")
    with pytest.raises(NonNumericCell) as ei:
        load_csv(write(tmp_path, [HEADER, bad]))
    assert (ei.value.row, ei.value.column) == (1, "LBD")


@pytest.mark.parametrize("cell", ["nan", "inf", "-inf"])
def test_non_finite_cells_rejected(tmp_path, cell):
    bad = ROWS[0].replace(",55.25", f",{cell}")
    with pytest.raises(NonNumericCell):
        load_csv(write(tmp_path, [HEADER, bad]))


def test_empty_file(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("")
    with pytest.raises(EmptyFile):
        load_csv(p)
    with pytest.raises(EmptyFile):
        load_csv(write(tmp_path, [HEADER]))


def test_extra_column(tmp_path):
    with pytest.raises(UnknownColumn):
        load_csv(write(tmp_path, [HEADER + ",Extra", *(r + ",1" for r in ROWS)]))


def test_ragged_row(tmp_path):
    with pytest.raises(DataError):
        load_csv(write(tmp_path, [HEADER, ROWS[0] + ",1"]))


def test_csv_round_trip(tmp_path, trace_small):
    d, _ = trace_small
    d = d.take(np.arange(500))
    p = tmp_path / "rt.csv"
    write_csv(d, p)
    back = load_csv(p)
    write_csv(back, tmp_path / "rt2.csv")
    assert p.read_bytes() == (tmp_path / "rt2.csv").read_bytes()
    for c in d.names:
        assert np.array_equal(back.columns[c], d.columns[c])


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=30))
def test_csv_round_trip_exact_floats(tmp_path_factory, xs):
    d = small({"X": np.array(xs)})
    p = tmp_path_factory.mktemp("f") / "x.csv"
    write_csv(d, p)
    back = load_csv(p, d.schema)
    assert np.array_equal(back["X"], d["X"])


def test_dataset_is_read_only():
    d = small({"X": np.array([1.0, 2.0])})
    with pytest.raises(ValueError):
        d["X"][0] = 5.0
    with pytest.raises(TypeError):
        d.columns["X"] = np.zeros(2)


def test_dataset_validation():
    with pytest.raises(DataError):
        small({"X": np.array([])})
    with pytest.raises(DataError):
        small({"X": np.array([1.0, 2.0]), "Y": np.array([1.0])})
    with pytest.raises(DataError):
        small({"X": np.array([1.0, np.nan])})
    with pytest.raises(DataError):
        small({"C": np.array([0, 2])}, {"C": ("a", "b")})


def test_schema_rules():
    with pytest.raises(ValueError):
        ColumnSchema("C", "categorical", ("only",))
    with pytest.raises(ValueError):
        ColumnSchema("X", "continuous", ("a", "b"))
    with pytest.raises(ValueError):
        ColumnSchema("X", "ordinal")
    assert schema_from_json(schema_to_json(SAT_SCHEMA)) == SAT_SCHEMA


# -- normalization -----------------------------------------------------------


def test_normalize_hand_values():
    d = small({"X": np.array([1.0, 2.0, 3.0])})
    z, params = normalize_standard_score(d)
    s = math.sqrt(2 / 3)
    assert params["X"] == (2.0, pytest.approx(s, abs=1e-15))
    assert np.allclose(z["X"], [-1 / s, 0, 1 / s], atol=1e-12)
    assert z["X"][0] == pytest.approx(-1.224744871391589, abs=1e-12)
    assert params["X"][1] == pytest.approx(0.816496580927726, abs=1e-12)


def test_normalize_leaves_categoricals():
    d = small({"C": np.array([0, 1, 1]), "X": np.array([1.0, 5.0, 9.0])}, {"C": ("a", "b")})
    z, params = normalize_standard_score(d)
    assert np.array_equal(z["C"], d["C"])
    assert set(params) == {"X"}


def test_normalize_zero_variance():
    with pytest.raises(ZeroVariance) as ei:
        normalize_standard_score(small({"X": np.array([5.0, 5.0, 5.0])}))
    assert ei.value.column == "X"


@given(
    st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=2, max_size=60).filter(
        lambda xs: np.std(xs) > 1e-3 * max(1.0, np.max(np.abs(xs)))
    )
)
def test_normalize_moments_and_idempotence(xs):
    d = small({"X": np.array(xs)})
    z, _ = normalize_standard_score(d)
    assert abs(z["X"].mean()) < 1e-9
    assert abs(z["X"].std() - 1) < 1e-9
    z2, _ = normalize_standard_score(z)
    assert np.max(np.abs(z2["X"] - z["X"])) < 1e-12


# -- categorical encoding ----------------------------------------------------


def test_encode_restart_and_branching(tmp_path):
    d = load_csv(write(tmp_path, [HEADER, *ROWS]))
    e = encode_categoricals(d)
    assert "Restart=Geometric" in e and "Restart=Luby" in e and "Branching=Maple" in e
    assert "Restart=LBD-based" not in e and "Branching=VSIDS" not in e
    # row 0 is VSIDS / Luby
    assert (e["Restart=Geometric"][0], e["Restart=Luby"][0], e["Branching=Maple"][0]) == (0, 1, 0)
    assert e.n == d.n
    for c in ("Size", "Utility"):
        assert e[c].tobytes() == d[c].tobytes()


def test_encode_without_categoricals_is_identity():
    d = small({"X": np.array([1.0, 2.0])})
    assert encode_categoricals(d) is d


def test_design_columns_match_encoding(trace_small):
    d, _ = trace_small
    names, X = design_columns(d, ["Restart", "LBD"])
    e = encode_categoricals(d)
    assert names == ["Restart=Geometric", "Restart=Luby", "LBD"]
    for j, n in enumerate(names):
        assert np.array_equal(X[:, j], e[n])


# -- folds -------------------------------------------------------------------


def test_kfold_leave_one_out_shape():
    assert kfold_split(10, 10, 3).sizes() == [1] * 10


def test_kfold_balance():
    assert sorted(kfold_split(7, 3, 0).sizes(), reverse=True) == [3, 2, 2]


def test_kfold_errors():
    with pytest.raises(BadFoldCount):
        kfold_split(5, 1, 0)
    with pytest.raises(BadFoldCount):
        kfold_split(5, 6, 0)


@given(st.integers(2, 300), st.integers(2, 12), st.integers(0, 2**31))
def test_kfold_properties(n, k, seed):
    if k > n:
        return
    a = kfold_split(n, k, seed)
    b = kfold_split(n, k, seed)
    assert np.array_equal(a.assignment, b.assignment)
    sizes = a.sizes()
    assert max(sizes) - min(sizes) <= 1
    assert sum(sizes) == n
    seen = np.zeros(n, dtype=int)
    for i in range(k):
        train, test = a.split(i)
        seen[test] += 1
        assert len(np.intersect1d(train, test)) == 0
        assert len(train) + len(test) == n
    assert np.all(seen == 1)


# -- filtering ---------------------------------------------------------------


def test_filter_lbd_le_6():
    d = small({"LBD": np.array([2.0, 5.0, 9.0])})
    assert filter_rows(d, "LBD <= 6").n == 2
    assert filter_rows(d, "LBD ≤ 6").n == 2
    assert filter_rows(d, Predicate("LBD", ">", 6)).n == 1


def test_filter_categorical():
    d = small({"Branching": np.array([0, 1, 1, 0]), "X": np.arange(4.0)}, {"Branching": ("VSIDS", "Maple")})
    f = filter_rows(d, "Branching = Maple")
    assert list(f.labels("Branching")) == ["Maple", "Maple"]
    assert f["X"].tolist() == [1.0, 2.0]
    assert filter_rows(d, "Branching != Maple").n == 2
    with pytest.raises(DataError):
        filter_rows(d, "Branching < Maple")
    with pytest.raises(UnknownCategory):
        filter_rows(d, "Branching = CHB")


def test_filter_empty_and_unknown(trace_small):
    d, _ = trace_small
    assert d["LBD"].max() <= 50
    with pytest.raises(EmptyResult):
        filter_rows(d, "LBD > 1000")
    with pytest.raises(UnknownColumn):
        filter_rows(d, "Glue <= 3")


@pytest.mark.parametrize(
    "text, expected",
    [
        ("LBD <= 6", Predicate("LBD", "<=", 6.0)),
        ("LBD≥6", Predicate("LBD", ">=", 6.0)),
        ("Restart == Luby", Predicate("Restart", "=", "Luby")),
        ("Restart ≠ LBD-based", Predicate("Restart", "!=", "LBD-based")),
        ("Time > -3.5", Predicate("Time", ">", -3.5)),
    ],
)
def test_parse_predicate(text, expected):
    assert parse_predicate(text) == expected
    assert parse_predicate(str(expected)) == expected


def test_parse_predicate_garbage():
    with pytest.raises(ValueError):
        parse_predicate("LBD is small")
