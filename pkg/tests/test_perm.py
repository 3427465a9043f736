import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cyclecancel.perm import (
    Permutation,
    compose,
    decompose,
    format_cycles,
    format_row_form,
    inverse,
    is_derangement,
    is_n_cycle,
    parse_cycles,
    random_n_cycle,
)

perms = st.integers(1, 12).flatmap(lambda n: st.permutations(range(1, n + 1))).map(Permutation)


def shift8():
    return Permutation.from_cycles([range(1, 9)], 8)


def test_compose_shift_with_s():
    d = shift8()
    s = parse_cycles("(5 6 4)", 8)
    assert compose(d, s).image == (2, 3, 4, 6, 7, 5, 8, 1)


def test_compose_identity_is_neutral():
    p = Permutation([3, 1, 2, 5, 4])
    assert compose(p, Permutation.identity(5)) == p
    assert compose(Permutation.identity(5), p) == p


def test_compose_pointwise_against_naive(rng):
    for _ in range(500):
        a = Permutation.from_zero_based(rng.permutation(9))
        b = Permutation.from_zero_based(rng.permutation(9))
        c = compose(a, b)
        assert all(c(x) == a.image[b.image[x - 1] - 1] for x in range(1, 10))


def test_compose_size_mismatch():
    with pytest.raises(ValueError):
        compose(Permutation.identity(3), Permutation.identity(4))


def test_inverse_of_shift():
    assert inverse(shift8()).image == (8, 1, 2, 3, 4, 5, 6, 7)


def test_inverse_identity_and_involution(rng):
    assert inverse(Permutation.identity(6)) == Permutation.identity(6)
    for _ in range(500):
        p = Permutation.from_zero_based(rng.permutation(12))
        assert inverse(inverse(p)) == p
        assert compose(p, inverse(p)) == Permutation.identity(12)


def test_decompose_d3():
    d3 = Permutation([4, 3, 1, 2, 7, 5, 8, 6])
    dec = decompose(d3)
    assert dec.cycles == ((1, 4, 2, 3), (5, 7, 8, 6))
    assert dec.fixed_points == ()


def test_decompose_identity():
    dec = decompose(Permutation.identity(5))
    assert dec.cycles == ()
    assert dec.fixed_points == (1, 2, 3, 4, 5)


def test_decompose_round_trip(rng):
    for _ in range(500):
        n = int(rng.integers(1, 13))
        p = Permutation.from_zero_based(rng.permutation(n))
        dec = decompose(p)
        assert dec.recompose(n) == p
        covered = sorted([v for c in dec.cycles for v in c] + list(dec.fixed_points))
        assert covered == list(range(1, n + 1))
        assert all(len(c) >= 2 and c[0] == min(c) for c in dec.cycles)


def test_predicates_on_worked_permutations():
    d3 = parse_cycles("(1 4 2 3)(5 7 8 6)", 8)
    assert is_derangement(d3) and not is_n_cycle(d3)
    assert is_n_cycle(parse_cycles("(1 4 8 6 5 7 2 3)", 8))
    ident = Permutation.identity(4)
    assert not is_derangement(ident) and not is_n_cycle(ident)


def test_random_n_cycle_small_and_deterministic():
    assert random_n_cycle(2, 123) == Permutation([2, 1])
    assert random_n_cycle(11, 5) == random_n_cycle(11, 5)
    with pytest.raises(ValueError):
        random_n_cycle(1, 0)


def test_random_n_cycle_uniform_over_120_cycles():
    draws = 60_000
    counts = Counter(random_n_cycle(6, s).image for s in range(draws))
    all_cycles = {
        Permutation.from_cycles([(1, *rest)], 6).image for rest in itertools.permutations(range(2, 7))
    }
    assert set(counts) == all_cycles
    expected = draws / 120
    sigma = np.sqrt(expected * (1 - 1 / 120))
    assert all(abs(c - expected) < 5 * sigma for c in counts.values())


def test_parse_and_format_round_trip():
    text = "(1 4 2 3)(5 7 8 6)"
    assert format_cycles(parse_cycles(text, 8)) == text
    assert parse_cycles("(1,2)(3, 4)", 4) == Permutation([2, 1, 4, 3])
    assert parse_cycles("()", 3) == Permutation.identity(3)
    with pytest.raises(ValueError):
        parse_cycles("1 2 3", 3)
    with pytest.raises(ValueError):
        parse_cycles("(1 2)(2 3)", 3)


def test_row_form_layout():
    out = format_row_form(Permutation([2, 3, 1]), values=[-11, 0, 5])
    assert out.splitlines() == ["-11   0   5", "  1   2   3", "  2   3   1"]


def test_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation([1, 1, 2])
    with pytest.raises(AttributeError):
        Permutation([2, 1]).foo = 1


@given(perms)
def test_n_cycle_implies_derangement(p):
    if p.n >= 2 and is_n_cycle(p):
        assert is_derangement(p)


@given(perms, perms)
def test_composition_is_bijection(p, q):
    if p.n == q.n:
        assert sorted(compose(p, q).image) == list(range(1, p.n + 1))
