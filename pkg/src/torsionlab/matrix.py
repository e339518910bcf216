"""Signed incidence matrices over Z and the sparse container they live in.

Columns follow the hypergraph's edge order (the process order).  Down each
edge's sorted vertices the "alternating" pattern assigns 1, -1, 1, ...;
the "all ones" variant assigns 1 everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ParameterError
from .model import Hypergraph


class SignPattern(Enum):
    ALTERNATING = "alternating"
    ALL_ONES = "ones"

    @classmethod
    def parse(cls, name) -> "SignPattern":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        if key in ("alternating", "alt"):
            return cls.ALTERNATING
        if key in ("ones", "all_ones", "all-ones"):
            return cls.ALL_ONES
        raise ParameterError(f"unknown sign pattern {name!r}")


@dataclass(frozen=True)
class ColumnVector:
    """Sparse integer vector: (index, value) pairs with strictly increasing
    indices and nonzero values."""

    length: int
    entries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(tuple(e) for e in self.entries))
        prev = -1
        for i, v in self.entries:
            if i <= prev or i >= self.length:
                raise ParameterError(f"index {i} out of order or range")
            if v == 0:
                raise ParameterError("stored values must be nonzero")
            prev = i

    @classmethod
    def from_dense(cls, values) -> "ColumnVector":
        vals = list(values)
        return cls(len(vals), tuple((i, v) for i, v in enumerate(vals) if v))

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    def to_dense(self) -> list[int]:
        out = [0] * self.length
        for i, v in self.entries:
            out[i] = v
        return out


@dataclass(frozen=True)
class SparseIntMatrix:
    """Column-major sparse integer matrix.

    Each column is a tuple of (row, value) pairs sorted by row.  Column
    tuples are shared, never copied, by restriction / transposition /
    appends, which keeps prefix-matrix construction cheap inside the
    stochastic process.
    """

    n_rows: int
    n_cols: int
    cols: tuple[tuple[tuple[int, int], ...], ...] = ()

    def __post_init__(self):
        if self.n_rows < 0 or self.n_cols < 0:
            raise ParameterError("matrix dimensions must be non-negative")
        cols = tuple(tuple(tuple(e) for e in col) for col in self.cols)
        object.__setattr__(self, "cols", cols)
        if len(cols) != self.n_cols:
            raise ParameterError(
                f"{len(cols)} columns stored but n_cols={self.n_cols}"
            )
        for col in cols:
            prev = -1
            for i, v in col:
                if i <= prev or i >= self.n_rows:
                    raise ParameterError(f"row index {i} out of order or range")
                if v == 0:
                    raise ParameterError("stored values must be nonzero")
                prev = i

    @classmethod
    def from_entries(cls, n_rows, n_cols, entries) -> "SparseIntMatrix":
        per_col = [{} for _ in range(n_cols)]
        for i, j, v in entries:
            if not (0 <= j < n_cols):
                raise ParameterError(f"column index {j} out of range")
            if i in per_col[j]:
                raise ParameterError(f"duplicate entry at ({i}, {j})")
            if v:
                per_col[j][i] = v
        cols = tuple(tuple(sorted(d.items())) for d in per_col)
        return cls(n_rows, n_cols, cols)

    @classmethod
    def from_dense(cls, rows) -> "SparseIntMatrix":
        rows = [list(r) for r in rows]
        n_rows = len(rows)
        n_cols = len(rows[0]) if rows else 0
        if any(len(r) != n_cols for r in rows):
            raise ParameterError("ragged dense matrix")
        cols = tuple(
            tuple((i, rows[i][j]) for i in range(n_rows) if rows[i][j])
            for j in range(n_cols)
        )
        return cls(n_rows, n_cols, cols)

    @property
    def nnz(self) -> int:
        return sum(len(col) for col in self.cols)

    def entries(self):
        """Yield (row, col, value) in column-major order."""
        for j, col in enumerate(self.cols):
            for i, v in col:
                yield i, j, v

    def column(self, j) -> ColumnVector:
        return ColumnVector(self.n_rows, self.cols[j])

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.n_cols for _ in range(self.n_rows)]
        for i, j, v in self.entries():
            out[i][j] = v
        return out

    def append_column(self, pairs) -> "SparseIntMatrix":
        col = tuple(tuple(e) for e in pairs)
        return SparseIntMatrix(self.n_rows, self.n_cols + 1, self.cols + (col,))

    def prefix_columns(self, m) -> "SparseIntMatrix":
        """The first m columns; shares column storage."""
        if not 0 <= m <= self.n_cols:
            raise ParameterError(f"prefix length {m} outside [0, {self.n_cols}]")
        return SparseIntMatrix(self.n_rows, m, self.cols[:m])


def incidence_matrix(h: Hypergraph, pattern=SignPattern.ALTERNATING) -> SparseIntMatrix:
    """Rows = vertices of h, columns = edges in process order.

    Column j encodes edge j: under the alternating pattern the i-th
    smallest vertex of the edge carries (-1)^(i+1); under the all-ones
    pattern every incident vertex carries 1.
    """
    pattern = SignPattern.parse(pattern)
    if pattern is SignPattern.ALTERNATING:
        cols = tuple(
            tuple((v - 1, 1 if i % 2 == 0 else -1) for i, v in enumerate(e))
            for e in h.edges
        )
    else:
        cols = tuple(tuple((v - 1, 1) for v in e) for e in h.edges)
    return SparseIntMatrix(h.n, h.m, cols)


def restrict_columns(m: SparseIntMatrix, subset) -> SparseIntMatrix:
    """Submatrix on the given column indices, in the given order."""
    idx = list(subset)
    if len(set(idx)) != len(idx):
        raise ParameterError("column subset contains repeats")
    for j in idx:
        if not 0 <= j < m.n_cols:
            raise ParameterError(f"column index {j} outside [0, {m.n_cols})")
    return SparseIntMatrix(m.n_rows, len(idx), tuple(m.cols[j] for j in idx))


def transpose(m: SparseIntMatrix) -> SparseIntMatrix:
    rows = [[] for _ in range(m.n_rows)]
    for i, j, v in m.entries():
        rows[i].append((j, v))
    # each rows[i] is already sorted by j because entries() is column-major
    return SparseIntMatrix(m.n_cols, m.n_rows, tuple(tuple(r) for r in rows))


def to_sms(m: SparseIntMatrix) -> str:
    """SMS-like text: header 'n_rows n_cols M', 1-based 'i j v' lines in
    row-major order, '0 0 0' terminator."""
    items = sorted(((i, j, v) for i, j, v in m.entries()))
    lines = [f"{m.n_rows} {m.n_cols} M"]
    lines.extend(f"{i + 1} {j + 1} {v}" for i, j, v in items)
    lines.append("0 0 0")
    return "\n".join(lines) + "\n"


def from_sms(text: str) -> SparseIntMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParameterError("empty matrix text")
    header = lines[0].split()
    if len(header) != 3 or header[2] != "M":
        raise ParameterError(f"bad header {lines[0]!r}, expected 'n_rows n_cols M'")
    try:
        n_rows, n_cols = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ParameterError(f"bad header {lines[0]!r}") from exc
    entries = []
    terminated = False
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise ParameterError(f"bad entry line {ln!r}")
        try:
            i, j, v = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ParameterError(f"bad entry line {ln!r}") from exc
        if (i, j, v) == (0, 0, 0):
            terminated = True
            break
        entries.append((i - 1, j - 1, v))
    if not terminated:
        raise ParameterError("missing '0 0 0' terminator")
    for i, j, _ in entries:
        if not (0 <= i < n_rows):
            raise ParameterError(f"row index {i + 1} outside [1, {n_rows}]")
    return SparseIntMatrix.from_entries(n_rows, n_cols, entries)
