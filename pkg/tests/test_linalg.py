import itertools
import random

from suspvdp.linalg import (ExactMatrix, exact_rank, express_in_span,
                            nullspace, rref, solve_columns)
from suspvdp.scalars import GaussianRational, gr, I, ONE, ZERO


def det_laplace(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = gr(0)
    sign = ONE
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        total = total + sign * rows[0][j] * det_laplace(minor)
        sign = -sign
    return total


def rank_by_minors(m: ExactMatrix) -> int:
    """Independent oracle: largest k with some nonzero k x k minor."""
    best = 0
    rows, cols = m.nrows, m.ncols
    for k in range(1, min(rows, cols) + 1):
        for ri in itertools.combinations(range(rows), k):
            for ci in itertools.combinations(range(cols), k):
                sub = [[m.entries[i][j] for j in ci] for i in ri]
                if not det_laplace(sub).is_zero:
                    best = k
                    break
            else:
                continue
            break
    return best


def rand_matrix(rng, rows, cols, pool):
    return ExactMatrix([[rng.choice(pool) for _ in range(cols)] for _ in range(rows)])


def test_rank_matches_minor_oracle_small():
    pool = [ZERO, ONE, -ONE, I, -I]
    rng = random.Random(23)
    for _ in range(120):
        rows = rng.randint(1, 4)
        cols = rng.randint(1, 4)
        m = rand_matrix(rng, rows, cols, pool)
        assert exact_rank(m) == rank_by_minors(m)


def test_rank_invariant_under_row_permutation_and_scaling():
    pool = [ZERO, ONE, -ONE, I, gr(2), gr(0, -3)]
    rng = random.Random(31)
    for _ in range(60):
        m = rand_matrix(rng, rng.randint(2, 5), rng.randint(2, 5), pool)
        r = exact_rank(m)
        rows = list(m.entries)
        rng.shuffle(rows)
        scale = rng.choice([gr(3), gr(0, 1), gr(-2, 5)])
        rows[0] = [scale * x for x in rows[0]]
        assert exact_rank(ExactMatrix(rows)) == r


def test_rref_pivots_are_leftmost():
    m = ExactMatrix.from_rows([
        [ZERO, ONE, gr(2)],
        [ZERO, gr(2), gr(4)],
        [ONE, ZERO, ONE],
    ])
    reduced, pivots = rref(m)
    assert pivots == [0, 1]
    # pivot entries normalized to one, columns cleared
    assert reduced.entries[0][0] == ONE
    assert reduced.entries[1][1] == ONE
    assert reduced.entries[2] == [ZERO, ZERO, ZERO]


def test_nullspace_spans_kernel():
    rng = random.Random(5)
    pool = [ZERO, ONE, -ONE, I, gr(2)]
    for _ in range(40):
        m = rand_matrix(rng, rng.randint(1, 4), rng.randint(1, 5), pool)
        basis = nullspace(m)
        assert len(basis) == m.ncols - exact_rank(m)
        for vec in basis:
            for row in m.entries:
                s = gr(0)
                for a, x in zip(row, vec):
                    s = s + a * x
                assert s.is_zero


def test_solve_columns_consistency():
    a = ExactMatrix.from_rows([[ONE, gr(2)], [gr(3), gr(6)]])
    sol, bad = solve_columns(a, [[gr(5), gr(15)], [ONE, ZERO]])
    assert sol is not None
    x, y = sol
    assert x + gr(2) * y == gr(5)
    assert gr(3) * x + gr(6) * y == gr(15)
    assert bad is None


def test_solve_columns_fuzz_against_construction():
    rng = random.Random(13)
    pool = [ZERO, ONE, -ONE, I, gr(2), gr(1, 1)]
    for _ in range(50):
        rows = rng.randint(1, 5)
        cols = rng.randint(1, 5)
        a = rand_matrix(rng, rows, cols, pool)
        coeffs = [rng.choice(pool) for _ in range(cols)]
        target = [sum((row[j] * coeffs[j] for j in range(cols)), gr(0))
                  for row in a.entries]
        sol = solve_columns(a, [target])[0]
        assert sol is not None
        rebuilt = [sum((row[j] * sol[j] for j in range(cols)), gr(0))
                   for row in a.entries]
        assert rebuilt == target


def test_express_in_span():
    basis = [[ONE, ZERO, ONE], [ZERO, ONE, ONE]]
    assert express_in_span(basis, [gr(2), gr(3), gr(5)]) == [gr(2), gr(3)]
    assert express_in_span(basis, [ONE, ZERO, ZERO]) is None
    assert express_in_span([], [ZERO, ZERO]) == []
    assert express_in_span([], [ONE]) is None
