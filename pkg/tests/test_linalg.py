"""Unit tests for the exact sparse linear algebra layer."""

from __future__ import annotations

import random
from fractions import Fraction

from dgtangent.linalg import (
    Echelon,
    Matrix,
    Subquotient,
    preimage_in_span,
    span_contains,
    span_dim,
    spans_equal,
    vec_add,
    vec_from_list,
    vec_scale,
)


def random_matrix(rng: random.Random, nrows: int, ncols: int, density: float = 0.5) -> Matrix:
    m = Matrix(nrows, ncols)
    for i in range(nrows):
        for j in range(ncols):
            if rng.random() < density:
                m.set(i, j, Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
    return m


def test_vector_helpers() -> None:
    a = vec_from_list([1, 0, 2])
    b = vec_from_list([0, 3, -2])
    assert vec_add(a, b) == {0: Fraction(1), 1: Fraction(3)}
    assert vec_add(a, a, Fraction(-1)) == {}
    assert vec_scale(a, Fraction(0)) == {}
    assert vec_scale(a, Fraction(2)) == {0: Fraction(2), 2: Fraction(4)}


def test_echelon_combination_tracking() -> None:
    ech = Echelon(track=True)
    v0 = vec_from_list([1, 1, 0])
    v1 = vec_from_list([0, 1, 1])
    assert ech.insert(v0)
    assert ech.insert(v1)
    # v0 + 2*v1 must reduce to zero with combo {0: 1, 1: 2}.
    probe = vec_add(v0, v1, Fraction(2))
    assert not ech.insert(probe)
    combo = ech.last_zero_combo
    recon = vec_add(vec_scale(v0, combo.get(0, Fraction(0))), v1, combo.get(1, Fraction(0)))
    assert recon == probe


def test_rank_nullity_randomized() -> None:
    rng = random.Random(20260814)
    for _ in range(40):
        nrows = rng.randint(1, 8)
        ncols = rng.randint(1, 8)
        m = random_matrix(rng, nrows, ncols)
        rank = m.rank()
        kernel = m.kernel_basis()
        assert rank + len(kernel) == nrows
        for k in kernel:
            assert m.apply(k) == {}
        assert span_dim(kernel) == len(kernel)
        assert len(m.image_basis()) == rank


def test_rref_idempotent_and_pivots() -> None:
    m = Matrix.from_dense([[2, 4, 0], [1, 2, 1], [3, 6, 1]])
    r, pivots = m.rref()
    assert pivots == [0, 2]
    r2, pivots2 = r.rref()
    assert pivots2 == pivots
    assert [dict(row) for row in r2.rows] == [dict(row) for row in r.rows]


def test_solve_consistency() -> None:
    rng = random.Random(99)
    for _ in range(30):
        m = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
        x = {i: Fraction(rng.randint(-3, 3)) for i in range(m.nrows) if rng.random() < 0.6}
        x = {i: v for i, v in x.items() if v != 0}
        target = m.apply(x)
        sol = m.solve(target)
        assert sol is not None
        assert m.apply(sol) == target
    # An unsolvable system returns None.
    m = Matrix.from_dense([[1, 0], [2, 0]])
    assert m.solve(vec_from_list([0, 1])) is None


def test_compose_matches_apply() -> None:
    rng = random.Random(7)
    a = random_matrix(rng, 4, 5)
    b = random_matrix(rng, 5, 3)
    ab = a.compose(b)
    for i in range(4):
        x = {i: Fraction(1)}
        assert ab.apply(x) == b.apply(a.apply(x))


def test_span_utilities() -> None:
    v0 = vec_from_list([1, 0, 0])
    v1 = vec_from_list([0, 1, 0])
    v2 = vec_from_list([1, 1, 0])
    assert span_dim([v0, v1, v2]) == 2
    assert span_contains([v0, v1], v2)
    assert not span_contains([v0, v2], vec_from_list([0, 0, 1]))
    assert spans_equal([v0, v1], [v2, v1])
    assert not spans_equal([v0], [v1])


def test_subquotient_basic() -> None:
    # Ambient Q^3; numerators span {e0, e1, e0+e1}; denominators span {e0 - e1}.
    e0 = vec_from_list([1, 0, 0])
    e1 = vec_from_list([0, 1, 0])
    sq = Subquotient([e0, e1, vec_add(e0, e1)], [vec_add(e0, e1, Fraction(-1))])
    assert sq.dim == 1
    # e1 = e0 - (e0 - e1): equals basis class (e0 reduces to the single slot).
    coords = sq.reduce(e1)
    assert coords == {0: Fraction(1)}
    assert sq.is_zero_class(vec_add(e0, e1, Fraction(-1)))
    assert not sq.is_zero_class(e0)


def test_subquotient_skipped_numerator_indexing() -> None:
    # A dependent numerator in the middle must not disturb slot bookkeeping.
    e0 = vec_from_list([1, 0, 0])
    e1 = vec_from_list([0, 1, 0])
    e2 = vec_from_list([0, 0, 1])
    sq = Subquotient([e0, vec_scale(e0, Fraction(3)), e1, e2], [])
    assert sq.dim == 3
    assert sq.reduce(e1) == {1: Fraction(1)}
    assert sq.reduce(e2) == {2: Fraction(1)}
    assert sq.reduce(vec_add(e1, e2, Fraction(5))) == {1: Fraction(1), 2: Fraction(5)}


def test_subquotient_rejects_outside_vector() -> None:
    e0 = vec_from_list([1, 0])
    sq = Subquotient([e0], [])
    try:
        sq.reduce(vec_from_list([0, 1]))
    except ValueError:
        pass
    else:  # pragma: no cover
        raise AssertionError("expected ValueError")


def test_preimage_in_span() -> None:
    # M: Q^3 -> Q^2 with rows e0->f0, e1->f0, e2->f1.
    m = Matrix.from_dense([[1, 0], [1, 0], [0, 1]])
    vectors = [vec_from_list([1, 0, 0]), vec_from_list([0, 1, 0]), vec_from_list([0, 0, 1])]
    # Preimage of 0: x0 + x1 = 0 and x2 = 0 inside span(e0,e1,e2).
    pre = preimage_in_span(vectors, m, [])
    assert span_dim(pre) == 1
    assert spans_equal(pre, [vec_from_list([1, -1, 0])])
    # Preimage of span(f1): x0 + x1 = 0, x2 free.
    pre2 = preimage_in_span(vectors, m, [vec_from_list([0, 1])])
    assert span_dim(pre2) == 2
    assert spans_equal(pre2, [vec_from_list([1, -1, 0]), vec_from_list([0, 0, 1])])


def test_preimage_restricted_to_subspan() -> None:
    m = Matrix.from_dense([[1, 0], [1, 0], [0, 1]])
    # Only e0 available: preimage of 0 inside span(e0) is 0.
    pre = preimage_in_span([vec_from_list([1, 0, 0])], m, [])
    assert pre == []


def test_determinism_of_bases() -> None:
    rng = random.Random(5)
    m = random_matrix(rng, 6, 6)
    first = [dict(v) for v in m.kernel_basis()]
    second = [dict(v) for v in m.kernel_basis()]
    assert first == second
    assert [dict(v) for v in m.image_basis()] == [dict(v) for v in m.image_basis()]
