"""Exact integer and rational linear algebra.

Dense Smith normal form on Python integers (for nerves and other small
complexes) and a sparse Gaussian eliminator over Q or GF(p) for the large
boundary matrices of subdivided meshes.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

LARGE_PRIME = 2_147_483_647


def _to_rows(A) -> list[list[int]]:
    if sp.issparse(A):
        A = A.toarray()
    A = np.asarray(A, dtype=object)
    if A.ndim != 2:
        raise ValueError("expected a matrix")
    return [[int(x) for x in row] for row in A]


def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


@dataclass
class SmithForm:
    """``P @ A @ Q == D`` with P, Q unimodular; ``diagonal`` holds the nonzero d_i."""

    D: list[list[int]]
    P: list[list[int]]
    Pinv: list[list[int]]
    Q: list[list[int]]
    Qinv: list[list[int]]
    diagonal: list[int]

    @property
    def rank(self) -> int:
        return len(self.diagonal)


def smith_normal_form(A) -> SmithForm:
    """Smith normal form with transforms, exact over the integers.

    Returns P, Q and their inverses such that P A Q = D, D diagonal with
    d_1 | d_2 | ... and every d_i > 0.
    """
    D = _to_rows(A)
    m = len(D)
    n = len(D[0]) if m else (np.shape(A)[1] if np.ndim(A) == 2 else 0)
    P, Pinv = _identity(m), _identity(m)
    Q, Qinv = _identity(n), _identity(n)

    def swap_rows(i, j):
        if i != j:
            D[i], D[j] = D[j], D[i]
            P[i], P[j] = P[j], P[i]
            for row in Pinv:
                row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        if i != j:
            for row in D:
                row[i], row[j] = row[j], row[i]
            for row in Q:
                row[i], row[j] = row[j], row[i]
            Qinv[i], Qinv[j] = Qinv[j], Qinv[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        if q == 0:
            return
        rs, rd = D[src], D[dst]
        for k in range(n):
            if rs[k]:
                rd[k] += q * rs[k]
        ps, pd = P[src], P[dst]
        for k in range(m):
            if ps[k]:
                pd[k] += q * ps[k]
        for row in Pinv:
            if row[dst]:
                row[src] -= q * row[dst]

    def add_col(dst, src, q):
        # col_dst += q * col_src
        if q == 0:
            return
        for row in D:
            if row[src]:
                row[dst] += q * row[src]
        for row in Q:
            if row[src]:
                row[dst] += q * row[src]
        qs, qd = Qinv[src], Qinv[dst]
        for k in range(n):
            if qd[k]:
                qs[k] -= q * qd[k]

    def negate_row(i):
        D[i] = [-x for x in D[i]]
        P[i] = [-x for x in P[i]]
        for row in Pinv:
            row[i] = -row[i]

    diagonal = []
    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            row = D[i]
            for j in range(t, n):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        swap_rows(t, best[1])
        swap_cols(t, best[2])
        while True:
            changed = False
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(i, t, -(D[i][t] // D[t][t]))
                    if D[i][t]:
                        swap_rows(t, i)
                        changed = True
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(j, t, -(D[t][j] // D[t][t]))
                    if D[t][j]:
                        swap_cols(t, j)
                        changed = True
            if changed:
                continue
            pivot = D[t][t]
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if D[i][j] % pivot:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if D[t][t] < 0:
            negate_row(t)
        diagonal.append(D[t][t])
        t += 1
    return SmithForm(D, P, Pinv, Q, Qinv, diagonal)


def matmul(A: list[list[int]], B: list[list[int]]) -> list[list[int]]:
    if not A:
        return []
    nb = len(B[0]) if B else 0
    out = [[0] * nb for _ in A]
    for i, row in enumerate(A):
        orow = out[i]
        for k, a in enumerate(row):
            if a:
                brow = B[k]
                for j in range(nb):
                    if brow[j]:
                        orow[j] += a * brow[j]
    return out


def solve_integer(A, b) -> list[int] | None:
    """An integer solution of ``A x = b`` or None when none exists."""
    rows = _to_rows(A)
    m = len(rows)
    n = np.shape(A)[1]
    b = [int(x) for x in b]
    if m == 0:
        return [0] * n
    snf = smith_normal_form(rows)
    Pb = [sum(p * x for p, x in zip(prow, b)) for prow in snf.P]
    y = [0] * n
    for i, d in enumerate(snf.diagonal):
        if Pb[i] % d:
            return None
        y[i] = Pb[i] // d
    if any(Pb[i] for i in range(snf.rank, m)):
        return None
    return [sum(q * yj for q, yj in zip(qrow, y)) for qrow in snf.Q]


class SparseEliminator:
    """Gaussian elimination on a sparse matrix with a Markowitz-style pivot rule.

    Works over Q (``modulus=None``, Fraction arithmetic) or over GF(p).
    Rows with the fewest entries are pivoted first; within a row the column
    touching the fewest rows is chosen. On boundary matrices of manifolds this
    keeps fill-in small.
    """

    def __init__(self, A, rhs=None, modulus: int | None = None):
        A = sp.csr_matrix(A)
        self.shape = A.shape
        self.modulus = modulus
        m, n = A.shape
        self._rows: list[dict[int, object]] = []
        for i in range(m):
            start, end = A.indptr[i], A.indptr[i + 1]
            self._rows.append({int(c): self._num(v) for c, v in zip(A.indices[start:end], A.data[start:end]) if v})
        if rhs is None:
            self._rhs = [self._num(0)] * m
        else:
            self._rhs = [self._num(x) for x in rhs]
        self.pivots: list[tuple[int, dict, object]] = []
        self.inconsistent = False
        self._eliminate()

    def _num(self, x):
        if self.modulus is None:
            return Fraction(x)
        if isinstance(x, Fraction):
            return (x.numerator * pow(x.denominator, -1, self.modulus)) % self.modulus
        return int(x) % self.modulus

    def _div(self, a, b):
        if self.modulus is None:
            return a / b
        return (a * pow(b, -1, self.modulus)) % self.modulus

    def _reduce(self, x):
        return x if self.modulus is None else x % self.modulus

    def _eliminate(self) -> None:
        rows, rhs = self._rows, self._rhs
        col_rows: dict[int, set[int]] = {}
        for i, row in enumerate(rows):
            for c in row:
                col_rows.setdefault(c, set()).add(i)
        active = [True] * len(rows)
        heap = [(len(row), i) for i, row in enumerate(rows)]
        heapq.heapify(heap)
        while heap:
            length, r = heapq.heappop(heap)
            if not active[r]:
                continue
            row = rows[r]
            if length != len(row):
                heapq.heappush(heap, (len(row), r))
                continue
            active[r] = False
            if not row:
                if rhs[r] != 0:
                    self.inconsistent = True
                continue
            c = min(row, key=lambda col: (len(col_rows[col]), col))
            a = row[c]
            for r2 in list(col_rows[c]):
                if r2 == r:
                    continue
                row2 = rows[r2]
                factor = self._div(row2[c], a)
                for cc, v in row.items():
                    new = self._reduce(row2.get(cc, 0) - factor * v)
                    if new == 0:
                        if cc in row2:
                            del row2[cc]
                            col_rows[cc].discard(r2)
                    else:
                        if cc not in row2:
                            col_rows[cc].add(r2)
                        row2[cc] = new
                rhs[r2] = self._reduce(rhs[r2] - factor * rhs[r])
                heapq.heappush(heap, (len(row2), r2))
            for cc in row:
                col_rows[cc].discard(r)
            self.pivots.append((c, dict(row), rhs[r]))

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _back_substitute(self, free_values: dict[int, object], use_rhs: bool) -> list:
        x = dict(free_values)
        zero = self._num(0)
        for c, row, b in reversed(self.pivots):
            acc = b if use_rhs else zero
            for cc, v in row.items():
                if cc != c:
                    acc = acc - v * x.get(cc, zero)
            x[c] = self._div(self._reduce(acc), row[c])
        return [x.get(j, zero) for j in range(self.shape[1])]

    def solution(self) -> list | None:
        if self.inconsistent:
            return None
        return self._back_substitute({}, use_rhs=True)

    def kernel(self) -> list[list]:
        pivot_cols = {c for c, _, _ in self.pivots}
        basis = []
        for j in range(self.shape[1]):
            if j not in pivot_cols:
                basis.append(self._back_substitute({j: self._num(1)}, use_rhs=False))
        return basis


def sparse_rank(A, modulus: int = LARGE_PRIME) -> int:
    """Rank over GF(p); a lower bound for the rational rank, equal for generic p."""
    A = sp.csr_matrix(A)
    if A.shape[0] == 0 or A.shape[1] == 0 or A.nnz == 0:
        return 0
    return SparseEliminator(A, modulus=modulus).rank


def solve_rational(A, b) -> list[Fraction] | None:
    """A rational solution of the sparse system ``A x = b``, or None."""
    A = sp.csr_matrix(A)
    if A.shape[0] == 0:
        return [Fraction(0)] * A.shape[1]
    return SparseEliminator(A, rhs=b).solution()


def rational_kernel(A) -> list[list[Fraction]]:
    A = sp.csr_matrix(A)
    if A.shape[0] == 0:
        return [[Fraction(int(i == j)) for i in range(A.shape[1])] for j in range(A.shape[1])]
    return SparseEliminator(A).kernel()
