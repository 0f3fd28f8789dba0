"""Integer linear algebra: Smith normal form with unimodular transforms."""

from __future__ import annotations

from dataclasses import dataclass


Matrix = list[list[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)] for i in range(len(a))]


def matvec(a: Matrix, v: list) -> list:
    return [sum(row[j] * v[j] for j in range(len(v))) for row in a]


@dataclass
class SmithForm:
    """``left @ matrix @ right == diag``; ``left`` and ``right`` are unimodular."""

    matrix: Matrix
    left: Matrix
    diag: Matrix
    right: Matrix
    rank: int

    @property
    def invariant_factors(self) -> list[int]:
        return [self.diag[i][i] for i in range(self.rank)]


def smith_normal_form(matrix: Matrix, nrows: int | None = None, ncols: int | None = None) -> SmithForm:
    """Smith normal form of an integer matrix, with transforms.

    ``nrows``/``ncols`` give the shape explicitly for empty matrices.
    """
    m = nrows if nrows is not None else len(matrix)
    n = ncols if ncols is not None else (len(matrix[0]) if matrix else 0)
    a = [list(map(int, row)) for row in matrix] if m and n else [[0] * n for _ in range(m)]
    left = identity(m)
    right = identity(n)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        left[i], left[j] = left[j], left[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in right:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, k):  # row_dst += k * row_src
        if k:
            a[dst] = [x + k * y for x, y in zip(a[dst], a[src])]
            left[dst] = [x + k * y for x, y in zip(left[dst], left[src])]

    def add_col(src, dst, k):
        if k:
            for row in a:
                row[dst] += k * row[src]
            for row in right:
                row[dst] += k * row[src]

    t = 0
    while t < min(m, n):
        # pivot: nonzero entry of least absolute value in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            done = True
            for i in range(t + 1, m):
                if a[i][t]:
                    add_row(t, i, -(a[i][t] // a[t][t]))
                    if a[i][t]:
                        done = False
            for j in range(t + 1, n):
                if a[t][j]:
                    add_col(t, j, -(a[t][j] // a[t][t]))
                    if a[t][j]:
                        done = False
            if done:
                # divisibility of the remaining block by the pivot
                bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                            if a[i][j] % a[t][t]), None)
                if bad is None:
                    break
                add_row(bad[0], t, 1)
                continue
            # move the smallest entry of row/col t to the pivot position
            best = (t, t)
            for i in range(t, m):
                if a[i][t] and abs(a[i][t]) < abs(a[best[0]][best[1]]):
                    best = (i, t)
            for j in range(t, n):
                if a[t][j] and abs(a[t][j]) < abs(a[best[0]][best[1]]):
                    best = (t, j)
            swap_rows(t, best[0])
            swap_cols(t, best[1])
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            left[t] = [-x for x in left[t]]
        t += 1
    return SmithForm(matrix=[list(r) for r in matrix], left=left, diag=a, right=right, rank=t)
