"""Exact linear algebra over Z and Z/qZ.

The Smith normal form kernel is a gcd-based row/column reduction with
global pivot selection by minimal nonzero absolute value.  +-1 pivots (by
far the common case on incidence-like inputs) are tracked in a lazy heap
and eliminated with plain integer row operations, so no coefficient growth
happens until the matrix is down to its genuinely non-unimodular part;
only then does the general gcd machinery with the divisibility fix-up run.
No unimodular transforms are carried; correctness is certified against a
determinantal-divisor oracle in the test suite instead.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from . import budgets
from ._primes import is_probable_prime
from .errors import BudgetError, ParameterError
from .matrix import SparseIntMatrix


@dataclass(frozen=True)
class SmithForm:
    """Invariant factors d_1 | d_2 | ... | d_r, all positive."""

    invariant_factors: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)


@dataclass(frozen=True)
class CokernelSummary:
    """coker(M) = Z^free_rank + Z/d_1 + ... over the factors d_i > 1."""

    free_rank: int
    torsion_factors: tuple[int, ...]

    @property
    def torsion_order(self) -> int:
        out = 1
        for d in self.torsion_factors:
            out *= d
        return out

    @property
    def has_torsion(self) -> bool:
        return bool(self.torsion_factors)

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion_factors


def _xgcd(a, b):
    """(g, x, y) with g = gcd(a, b) > 0 and x*a + y*b = g."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def _invariant_factors(mat: SparseIntMatrix, max_entries=None) -> list[int]:
    limit = budgets.entry_limit(max_entries)
    rows: dict[int, dict[int, int]] = {}
    colrows: dict[int, set[int]] = {}
    nnz = 0
    for j, col in enumerate(mat.cols):
        for i, v in col:
            rows.setdefault(i, {})[j] = v
            colrows.setdefault(j, set()).add(i)
            nnz += 1
    if nnz > limit:
        raise BudgetError(
            f"matrix has {nnz} entries, above the elimination limit {limit}"
        )

    # Lazy min-heap of unit pivot candidates: (degree estimate, row, col).
    # Stale priorities and dead positions are fine; every write of a +-1
    # pushes a fresh record, so any entry that is currently +-1 is in here.
    unit_heap: list[tuple[int, int, int]] = []
    for i, row in rows.items():
        for j, v in row.items():
            if v == 1 or v == -1:
                unit_heap.append((len(row) + len(colrows[j]), i, j))
    heapq.heapify(unit_heap)
    push = heapq.heappush

    def row_sub(t, s, q):
        # row_t -= q * row_s; exact cancellation at the pivot column.
        nonlocal nnz
        row_s = rows[s]
        row_t = rows[t]
        deg = len(row_t) + 1
        for j, v in row_s.items():
            w = row_t.get(j)
            if w is None:
                nv = -q * v
                row_t[j] = nv
                colrows[j].add(t)
                nnz += 1
                if nv == 1 or nv == -1:
                    push(unit_heap, (deg + len(colrows[j]), t, j))
            else:
                nv = w - q * v
                if nv:
                    row_t[j] = nv
                    if nv == 1 or nv == -1:
                        push(unit_heap, (deg + len(colrows[j]), t, j))
                else:
                    del row_t[j]
                    colrows[j].discard(t)
                    nnz -= 1

    def col_sub(t, s, q):
        # col_t -= q * col_s
        nonlocal nnz
        for i in list(colrows[s]):
            row_i = rows[i]
            v = row_i[s]
            w = row_i.get(t)
            if w is None:
                nv = -q * v
                row_i[t] = nv
                colrows[t].add(i)
                nnz += 1
                if nv == 1 or nv == -1:
                    push(unit_heap, (len(row_i) + len(colrows[t]), i, t))
            else:
                nv = w - q * v
                if nv:
                    row_i[t] = nv
                    if nv == 1 or nv == -1:
                        push(unit_heap, (len(row_i) + len(colrows[t]), i, t))
                else:
                    del row_i[t]
                    colrows[t].discard(i)
                    nnz -= 1

    def row_gcd_combine(s, t, c):
        # Unimodular 2x2 on rows s, t making entry (s, c) = gcd and (t, c) = 0.
        nonlocal nnz
        d = rows[s][c]
        w = rows[t][c]
        g, x, y = _xgcd(d, w)
        al = d // g
        be = w // g
        old_s = rows[s]
        old_t = rows[t]
        new_s: dict[int, int] = {}
        new_t: dict[int, int] = {}
        for j in set(old_s) | set(old_t):
            a = old_s.get(j, 0)
            b = old_t.get(j, 0)
            ns = x * a + y * b
            nt = al * b - be * a
            members = colrows[j]
            if ns:
                new_s[j] = ns
                if a == 0:
                    members.add(s)
                    nnz += 1
            elif a:
                members.discard(s)
                nnz -= 1
            if nt:
                new_t[j] = nt
                if b == 0:
                    members.add(t)
                    nnz += 1
            elif b:
                members.discard(t)
                nnz -= 1
        rows[s] = new_s
        rows[t] = new_t
        ds = len(new_s)
        dt = len(new_t)
        for j, v in new_s.items():
            if v == 1 or v == -1:
                push(unit_heap, (ds + len(colrows[j]), s, j))
        for j, v in new_t.items():
            if v == 1 or v == -1:
                push(unit_heap, (dt + len(colrows[j]), t, j))

    def col_gcd_combine(s, t, r):
        # Unimodular 2x2 on columns s, t making entry (r, s) = gcd, (r, t) = 0.
        nonlocal nnz
        d = rows[r][s]
        w = rows[r][t]
        g, x, y = _xgcd(d, w)
        al = d // g
        be = w // g
        for i in list(colrows[s] | colrows[t]):
            row_i = rows[i]
            a = row_i.get(s, 0)
            b = row_i.get(t, 0)
            ns = x * a + y * b
            nt = al * b - be * a
            if ns:
                row_i[s] = ns
                if a == 0:
                    colrows[s].add(i)
                    nnz += 1
                if ns == 1 or ns == -1:
                    push(unit_heap, (len(row_i) + len(colrows[s]), i, s))
            elif a:
                del row_i[s]
                colrows[s].discard(i)
                nnz -= 1
            if nt:
                row_i[t] = nt
                if b == 0:
                    colrows[t].add(i)
                    nnz += 1
                if nt == 1 or nt == -1:
                    push(unit_heap, (len(row_i) + len(colrows[t]), i, t))
            elif b:
                del row_i[t]
                colrows[t].discard(i)
                nnz -= 1

    def pop_unit():
        while unit_heap:
            _, i, j = heapq.heappop(unit_heap)
            row = rows.get(i)
            if row is None:
                continue
            v = row.get(j)
            if v == 1 or v == -1:
                return i, j
        return None

    def scan_min():
        best = None
        for i, row in rows.items():
            for j, v in row.items():
                key = (-v if v < 0 else v, i, j)
                if best is None or key < best:
                    best = key
        return best[1], best[2]

    def clear_cross(r, c):
        # Alternate row and column sweeps until row r and column c hold
        # only the pivot.  Every gcd combine strictly shrinks |pivot|, so
        # the refill loop terminates.
        while len(colrows[c]) > 1 or len(rows[r]) > 1:
            if len(colrows[c]) > 1:
                for t in [i for i in colrows[c] if i != r]:
                    w = rows[t].get(c)
                    if w is None:
                        continue
                    d = rows[r][c]
                    if w % d == 0:
                        row_sub(t, r, w // d)
                    else:
                        row_gcd_combine(r, t, c)
            if len(rows[r]) > 1:
                for t in [j for j in rows[r] if j != c]:
                    w = rows[r].get(t)
                    if w is None:
                        continue
                    d = rows[r][c]
                    if w % d == 0:
                        col_sub(t, c, w // d)
                    else:
                        col_gcd_combine(c, t, r)

    factors: list[int] = []
    while nnz:
        if nnz > limit:
            raise BudgetError(
                f"elimination fill-in reached {nnz} entries, above the limit {limit}"
            )
        pivot = pop_unit()
        if pivot is None:
            pivot = scan_min()
        r, c = pivot
        clear_cross(r, c)
        d = rows[r][c]
        if d < 0:
            d = -d
        if d > 1:
            # The recorded pivot must divide everything that remains, or
            # the factors would not form a divisibility chain.  Fold any
            # offending row into the pivot row and reduce again.
            while True:
                bad = None
                for i, row in rows.items():
                    if i == r:
                        continue
                    for j, v in row.items():
                        if v % d:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                row_sub(r, bad, -1)
                clear_cross(r, c)
                d = rows[r][c]
                if d < 0:
                    d = -d
        factors.append(d)
        del rows[r]
        del colrows[c]
        nnz -= 1
    return factors


def smith_normal_form(m: SparseIntMatrix, max_entries=None) -> SmithForm:
    """Invariant factors of m; rank is their count.

    Empty matrices (or all-zero ones) have no factors and rank 0.
    """
    factors = _invariant_factors(m, max_entries)
    for a, b in zip(factors, factors[1:]):
        if b % a:
            raise RuntimeError(
                f"invariant factors {factors} broke the divisibility chain"
            )
    return SmithForm(tuple(factors))


def cokernel(m: SparseIntMatrix, max_entries=None) -> CokernelSummary:
    """Free rank and torsion factors of Z^n_rows / Im(m)."""
    snf = smith_normal_form(m, max_entries)
    torsion = tuple(d for d in snf.invariant_factors if d > 1)
    return CokernelSummary(m.n_rows - snf.rank, torsion)


def rank_rational(m: SparseIntMatrix) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination.

    This is the fast path for the rank queries inside cocycle search; the
    test suite cross-checks it against the Smith normal form rank.
    """
    if m.n_rows == 0 or m.n_cols == 0:
        return 0
    # orient with the shorter side as rows
    a = m.to_dense()
    if m.n_rows > m.n_cols:
        a = [[a[i][j] for i in range(m.n_rows)] for j in range(m.n_cols)]
    height = len(a)
    width = len(a[0])
    rank = 0
    prev = 1
    for col in range(width):
        pivot = None
        for i in range(rank, height):
            if a[i][col]:
                pivot = i
                break
        if pivot is None:
            continue
        if pivot != rank:
            a[rank], a[pivot] = a[pivot], a[rank]
        arow = a[rank]
        pa = arow[col]
        for i in range(rank + 1, height):
            ai = a[i]
            w = ai[col]
            for j in range(col + 1, width):
                ai[j] = (pa * ai[j] - w * arow[j]) // prev
            ai[col] = 0
        prev = pa
        rank += 1
        if rank == height:
            break
    return rank


def _mod_rows(m: SparseIntMatrix, q):
    rows = [[0] * m.n_cols for _ in range(m.n_rows)]
    for i, j, v in m.entries():
        rows[i][j] = v % q
    return rows


def rank_mod_q(m: SparseIntMatrix, q) -> int:
    """Rank of the entrywise reduction of m modulo the prime q."""
    if q < 2:
        raise ParameterError(f"modulus must be >= 2, got {q}")
    assert is_probable_prime(q), f"rank_mod_q needs a prime modulus, got {q}"
    rows = _mod_rows(m, q)
    width = m.n_cols
    rank = 0
    for col in range(width):
        pivot = None
        for i in range(rank, len(rows)):
            if rows[i][col]:
                pivot = i
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        prow = rows[rank]
        inv = pow(prow[col], -1, q)
        for j in range(col, width):
            prow[j] = prow[j] * inv % q
        for i in range(rank + 1, len(rows)):
            f = rows[i][col]
            if f:
                ri = rows[i]
                for j in range(col, width):
                    ri[j] = (ri[j] - f * prow[j]) % q
        rank += 1
        if rank == len(rows):
            break
    return rank


def kernel_basis_mod_q(m: SparseIntMatrix, q) -> list[list[int]]:
    """Basis of {v : m v = 0 over Z/qZ}, as length-n_cols residue vectors."""
    if q < 2:
        raise ParameterError(f"modulus must be >= 2, got {q}")
    assert is_probable_prime(q), f"kernel_basis_mod_q needs a prime modulus, got {q}"
    rows = _mod_rows(m, q)
    width = m.n_cols
    pivots = []
    rank = 0
    for col in range(width):
        pivot = None
        for i in range(rank, len(rows)):
            if rows[i][col]:
                pivot = i
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        prow = rows[rank]
        inv = pow(prow[col], -1, q)
        for j in range(col, width):
            prow[j] = prow[j] * inv % q
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                ri = rows[i]
                for j in range(col, width):
                    ri[j] = (ri[j] - f * prow[j]) % q
        pivots.append(col)
        rank += 1
        if rank == len(rows):
            break
    pivot_set = set(pivots)
    free = [j for j in range(width) if j not in pivot_set]
    basis = []
    for f in free:
        vec = [0] * width
        vec[f] = 1
        for r, pc in enumerate(pivots):
            vec[pc] = (-rows[r][f]) % q
        basis.append(vec)
    return basis
