import numpy as np
import pytest

from conftest import random_matrix
from cyclecancel.kernels import INF
from cyclecancel.matrix import (
    CostMatrix,
    MatrixFormatError,
    diff_vector,
    dumps,
    load,
    loads,
    min_index,
    reduce,
    save,
    shift_rows,
    value,
)
from cyclecancel.perm import Permutation, compose, is_derangement, parse_cycles, random_n_cycle

SHIFT8 = Permutation.from_cycles([range(1, 9)], 8)
D3 = parse_cycles("(1 4 2 3)(5 7 8 6)", 8)


def test_fixture_entries(m34):
    assert m34.n == 8
    assert m34.entry(1, 2) == 23
    assert m34.entry(8, 7) == 92


def test_one_by_one():
    m = loads("1\ninf\n")
    assert m.n == 1 and m.entry(1, 1) == INF


@pytest.mark.parametrize(
    "text, row, col",
    [
        ("2\ninf 1\n2 3\n", 2, 2),  # finite diagonal
        ("2\ninf x\n2 inf\n", 1, 2),  # bad token
        ("2\ninf 1 4\n2 inf\n", 1, None),  # ragged row
    ],
)
def test_malformed_reports_location(text, row, col):
    with pytest.raises(MatrixFormatError) as exc:
        loads(text)
    assert exc.value.row == row and exc.value.col == col
    assert f"row {row}" in str(exc.value)


def test_rejects_row_count_and_empty():
    with pytest.raises(MatrixFormatError):
        loads("3\ninf 1 2\n1 inf 2\n")
    with pytest.raises(MatrixFormatError):
        loads("# nothing\n")


def test_comments_and_case_insensitive_inf():
    m = loads("# header\n2  # size\nINF 4\n7 Inf\n")
    assert m.entry(1, 2) == 4 and m.entry(2, 1) == 7


def test_save_load_byte_identical(tmp_path, rng):
    for k in range(100):
        m = random_matrix(rng, int(rng.integers(1, 12)), low=-50, high=50, missing=0.1)
        p = tmp_path / f"m{k}.mat"
        save(m, p)
        first = p.read_bytes()
        again = load(p)
        assert again == m
        save(again, p)
        assert p.read_bytes() == first


def test_headroom_check():
    with pytest.raises(MatrixFormatError):
        CostMatrix([[INF, 1 << 58], [1, INF]])


def test_min_index_row1(m34):
    mi = min_index(m34)
    assert mi.row(1) == [5, 4, 7, 2, 8, 3, 6, 1]
    assert mi.ordinal(1, 5) == 1 and mi.ordinal(1, 1) == 8


def test_min_index_ties_by_column():
    m = CostMatrix([[INF, 3, 3, 3], [1, INF, 1, 1], [2, 2, INF, 2], [0, 0, 0, INF]])
    mi = min_index(m)
    assert mi.row(1) == [2, 3, 4, 1]
    assert mi.row(4) == [1, 2, 3, 4]


def test_min_index_sorted(rng):
    for _ in range(100):
        m = random_matrix(rng, int(rng.integers(2, 12)), missing=0.2)
        mi = min_index(m)
        for i in range(1, m.n + 1):
            w = [m.entry(i, j) for j in mi.row(i)]
            assert w == sorted(w)
            assert sorted(mi.row(i)) == list(range(1, m.n + 1))


def test_reduce_d3_row1(m34):
    r = reduce(m34, D3)
    assert r.array[0].tolist() == [0, 82, INF, 6, 1, -5, 7, 82]


def test_reduce_invariants(m34):
    r = reduce(m34, D3)
    assert (np.diagonal(r.array) == 0).all()
    for u in range(1, 9):
        assert r.entry(u, D3.image.index(u) + 1) == INF


def test_reduce_two_points():
    m = CostMatrix([[INF, 4], [9, INF]])
    r = reduce(m, Permutation([2, 1]))
    assert r.array.tolist() == [[0, INF], [INF, 0]]


def test_reduce_rejects_missing_arc():
    m = CostMatrix([[INF, INF, 1], [1, INF, 1], [1, 1, INF]])
    with pytest.raises(ValueError):
        reduce(m, Permutation([2, 3, 1]))


def test_reduced_order_is_sorted(m34):
    r = reduce(m34, D3)
    for u in range(8):
        w = r.array[u, r.order[u]]
        assert (np.diff(w) >= 0).all()


def test_cost_correspondence(rng):
    for _ in range(1000):
        n = int(rng.integers(2, 11))
        m = random_matrix(rng, n, low=-30, high=60)
        d = random_n_cycle(n, int(rng.integers(1 << 30)))
        s = Permutation.from_zero_based(rng.permutation(n))
        r = reduce(m, d)
        arcs = [r.entry(u, s(u)) for u in range(1, n + 1) if s(u) != u]
        total = INF if any(w >= INF for w in arcs) else sum(arcs)
        ds = compose(d, s)
        if total >= INF:
            # an inadmissible arc in s means D*s is not a finite derangement
            assert value(m, ds) >= INF
        else:
            assert is_derangement(ds)
            assert total == value(m, ds) - value(m, d)


def test_value_examples(m34):
    assert value(m34, D3) == 155
    assert value(m34, parse_cycles("(1 4 8 6 5 7 2 3)", 8)) == 161
    assert value(m34, Permutation.identity(8)) == INF


def test_diff_initial(m34):
    assert diff_vector(m34, SHIFT8) == [-11, 0, -18, 0, -30, -23, -4, 0]


def test_diff_after_first_cycle(m34):
    d1 = compose(SHIFT8, parse_cycles("(5 6 4)", 8))
    assert diff_vector(m34, d1)[3] == -31


def test_diff_zero_when_rows_minimal():
    m = CostMatrix([[INF, 1, 5], [5, INF, 1], [1, 5, INF]])
    assert diff_vector(m, Permutation([2, 3, 1])) == [0, 0, 0]


def test_shift_zero_and_fixture(m34):
    assert shift_rows(m34, 0) == m34
    assert min_index(shift_rows(m34, 7)) == min_index(m34)


def test_shift_preserves_order(rng):
    for _ in range(100):
        m = random_matrix(rng, int(rng.integers(2, 10)), low=-40, high=40, missing=0.15)
        c = int(rng.integers(-1000, 1000))
        assert min_index(shift_rows(m, c)) == min_index(m)
        per_row = rng.integers(-100, 100, m.n)
        assert min_index(shift_rows(m, per_row)) == min_index(m)


def test_shift_overflow():
    with pytest.raises(OverflowError):
        shift_rows(CostMatrix([[INF, 1], [1, INF]]), 1 << 58)


def test_dumps_format():
    assert dumps(CostMatrix([[INF, -3], [4, INF]])) == "2\ninf -3\n4 inf\n"
