"""Exact integer matrix algebra: Smith normal form and cokernels.

All arithmetic uses Python ints, so there is no overflow.
"""

from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import ShapeError
from .words import content


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple  # row-major

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ShapeError(f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            if not rows:
                raise ShapeError("cannot infer the column count of a matrix with no rows")
            cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise ShapeError("ragged rows")
        return cls(len(rows), cols, tuple(int(x) for r in rows for x in r))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def to_rows(self) -> list[list[int]]:
        return [list(self.entries[i * self.cols:(i + 1) * self.cols]) for i in range(self.rows)]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        a, b = self.to_rows(), other.to_rows()
        out = [[sum(a[i][k] * b[k][j] for k in range(self.cols)) for j in range(other.cols)]
               for i in range(self.rows)]
        return IntMatrix.from_rows(out, other.cols)

    def diagonal(self) -> list[int]:
        return [self[i, i] for i in range(min(self.rows, self.cols))]


class SnfResult(NamedTuple):
    """``D == U @ M @ V`` with ``U``, ``V`` unimodular and ``D`` in Smith form."""
    U: IntMatrix
    D: IntMatrix
    V: IntMatrix


class CokernelInvariants(NamedTuple):
    free_rank: int
    torsion: tuple[int, ...]

    @property
    def torsion_free(self) -> bool:
        return not self.torsion


def smith_normal_form(m: IntMatrix) -> SnfResult:
    """Smith normal form with transforms, pivoting on the smallest nonzero entry."""
    a = m.to_rows()
    nr, nc = m.rows, m.cols
    u = IntMatrix.identity(nr).to_rows()
    v = IntMatrix.identity(nc).to_rows()

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):  # row_dst += q * row_src
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, q):  # col_dst += q * col_src
        for row in a:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]

    for s in range(min(nr, nc)):
        while True:
            pivot = None
            for i in range(s, nr):
                for j in range(s, nc):
                    if a[i][j] and (pivot is None or abs(a[i][j]) < abs(a[pivot[0]][pivot[1]])):
                        pivot = (i, j)
            if pivot is None:
                return _finish(a, u, v, nr, nc)
            swap_rows(s, pivot[0])
            swap_cols(s, pivot[1])
            p = a[s][s]
            dirty = False
            for i in range(s + 1, nr):
                if a[i][s]:
                    add_row(s, i, -(a[i][s] // p))
                    dirty |= a[i][s] != 0
            for j in range(s + 1, nc):
                if a[s][j]:
                    add_col(s, j, -(a[s][j] // p))
                    dirty |= a[s][j] != 0
            if dirty:
                continue
            # the pivot must divide the whole remaining block
            bad = next(((i, j) for i in range(s + 1, nr) for j in range(s + 1, nc)
                        if a[i][j] % p), None)
            if bad is None:
                break
            add_row(bad[0], s, 1)
        if a[s][s] < 0:
            a[s] = [-x for x in a[s]]
            u[s] = [-x for x in u[s]]
    return _finish(a, u, v, nr, nc)


def _finish(a, u, v, nr, nc) -> SnfResult:
    for i in range(min(nr, nc)):
        if a[i][i] < 0:
            a[i] = [-x for x in a[i]]
            u[i] = [-x for x in u[i]]
    return SnfResult(IntMatrix.from_rows(u, nr), IntMatrix.from_rows(a, nc), IntMatrix.from_rows(v, nc))


def cokernel_invariants(m: IntMatrix, ambient_rank: int) -> CokernelInvariants:
    """Invariants of ``Z^ambient_rank / rowspace(m)``."""
    if m.cols != ambient_rank:
        raise ShapeError(f"relation matrix has {m.cols} columns, expected {ambient_rank}")
    d = [x for x in smith_normal_form(m).D.diagonal() if x]
    return CokernelInvariants(ambient_rank - len(d), tuple(x for x in d if x > 1))


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``a*x + b*y == g >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def bezout_vector(x: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Return ``(g, y)`` with ``sum(x_i * y_i) == g == gcd(x)``."""
    g, y = 0, []
    for xi in x:
        g, s, t = extended_gcd(g, xi)
        y = [s * c for c in y] + [t]
    return g, tuple(y)


def is_primitive_vector(x: Sequence[int]) -> bool:
    """Nonzero with content 1; the zero vector is not primitive."""
    return content(x) == 1


def primitivity_certificate(x: Sequence[int]) -> tuple[int, ...] | None:
    """An integer vector ``y`` with ``x . y == 1``, or None if ``x`` is not primitive."""
    g, y = bezout_vector(x)
    return y if g == 1 else None
