"""Exact linear algebra over Q.

Rationals are `fractions.Fraction` (arbitrary precision, canonical reduced
form, positive denominator).  Matrices are immutable and dense; every
operation is pure and deterministic, so representative choices made
downstream are reproducible bit-for-bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

Rational = Fraction
Vector = tuple[Fraction, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def vec(entries: Iterable) -> Vector:
    return tuple(frac(x) for x in entries)


def zero_vec(n: int) -> Vector:
    return (ZERO,) * n


def unit_vec(n: int, i: int) -> Vector:
    return tuple(ONE if j == i else ZERO for j in range(n))


def vec_add(u: Vector, v: Vector) -> Vector:
    return tuple(a + b for a, b in zip(u, v, strict=True))


def vec_sub(u: Vector, v: Vector) -> Vector:
    return tuple(a - b for a, b in zip(u, v, strict=True))


def vec_scale(c: Fraction, u: Vector) -> Vector:
    return tuple(c * a for a in u)


def is_zero_vec(u: Vector) -> bool:
    return all(a == 0 for a in u)


class QMatrix:
    """Immutable dense matrix of Fractions with fixed shape."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, entries: Iterable[Iterable] = ()):
        data = tuple(tuple(frac(x) for x in row) for row in entries)
        if len(data) != rows or any(len(r) != cols for r in data):
            if not data and rows:
                data = tuple((ZERO,) * cols for _ in range(rows))
            else:
                raise ValueError(
                    f"shape mismatch: want {rows}x{cols}, got "
                    f"{len(data)} rows of lengths {sorted({len(r) for r in data})}"
                )
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def from_rows(cls, entries: Sequence[Sequence]) -> "QMatrix":
        rows = len(entries)
        if rows == 0:
            raise ValueError("from_rows needs at least one row; use QMatrix(0, c)")
        return cls(rows, len(entries[0]), entries)

    @classmethod
    def from_columns(cls, columns: Sequence[Vector], rows: int) -> "QMatrix":
        return cls(rows, len(columns),
                   [[col[i] for col in columns] for i in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls(n, n, [[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, rows: int, cols: int) -> "QMatrix":
        return cls(rows, cols, [[ZERO] * cols for _ in range(rows)])

    def entry(self, i: int, j: int) -> Fraction:
        return self.data[i][j]

    def row(self, i: int) -> Vector:
        return self.data[i]

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.data)

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "QMatrix":
        return QMatrix(self.cols, self.rows,
                       [[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def apply(self, v: Sequence) -> Vector:
        v = vec(v)
        if len(v) != self.cols:
            raise ValueError(f"apply: length {len(v)} vs {self.rows}x{self.cols}")
        return tuple(sum((r[j] * v[j] for j in range(self.cols)), ZERO) for r in self.data)

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.rows:
            raise ValueError(f"matmul: {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        ot = other.transpose()
        return QMatrix(self.rows, other.cols,
                       [[sum((a * b for a, b in zip(r, c)), ZERO) for c in ot.data]
                        for r in self.data])

    def scale(self, c) -> "QMatrix":
        c = frac(c)
        return QMatrix(self.rows, self.cols, [[c * x for x in r] for r in self.data])

    def add(self, other: "QMatrix") -> "QMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("add: shape mismatch")
        return QMatrix(self.rows, self.cols,
                       [[a + b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)])

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.data for x in r)

    def __eq__(self, other) -> bool:
        return (isinstance(other, QMatrix)
                and self.rows == other.rows and self.cols == other.cols
                and self.data == other.data)

    def __hash__(self):
        return hash((self.rows, self.cols, self.data))

    def __repr__(self):
        return f"QMatrix({self.rows}x{self.cols}, {[list(r) for r in self.data]})"


def hstack(mats: Sequence[QMatrix]) -> QMatrix:
    rows = mats[0].rows
    if any(m.rows != rows for m in mats):
        raise ValueError("hstack: row mismatch")
    return QMatrix(rows, sum(m.cols for m in mats),
                   [sum((list(m.data[i]) for m in mats), []) for i in range(rows)])


def vstack(mats: Sequence[QMatrix]) -> QMatrix:
    cols = mats[0].cols
    if any(m.cols != cols for m in mats):
        raise ValueError("vstack: column mismatch")
    out: list[Sequence] = []
    for m in mats:
        out.extend(m.data)
    return QMatrix(sum(m.rows for m in mats), cols, out)


@dataclass(frozen=True)
class RrefResult:
    reduced: QMatrix
    pivots: tuple[int, ...]
    rank: int


def rref(m: QMatrix) -> RrefResult:
    """Unique reduced row echelon form.

    Pivot search scans columns left to right, rows top to bottom; pivots are
    normalized to 1 and cleared above and below.
    """
    a = [list(r) for r in m.data]
    pivots: list[int] = []
    pr = 0
    for pc in range(m.cols):
        sel = None
        for i in range(pr, m.rows):
            if a[i][pc] != 0:
                sel = i
                break
        if sel is None:
            continue
        a[pr], a[sel] = a[sel], a[pr]
        inv = ONE / a[pr][pc]
        a[pr] = [x * inv for x in a[pr]]
        for i in range(m.rows):
            if i != pr and a[i][pc] != 0:
                c = a[i][pc]
                a[i] = [x - c * y for x, y in zip(a[i], a[pr])]
        pivots.append(pc)
        pr += 1
        if pr == m.rows:
            break
    return RrefResult(QMatrix(m.rows, m.cols, a), tuple(pivots), len(pivots))


def rank(m: QMatrix) -> int:
    return rref(m).rank


def solve(a: QMatrix, b: Sequence) -> Optional[Vector]:
    """Particular solution of a x = b with zeros in all free coordinates.

    Returns None when the system is inconsistent.
    """
    b = vec(b)
    if len(b) != a.rows:
        raise ValueError(f"solve: rhs length {len(b)} vs {a.rows} rows")
    aug = hstack([a, QMatrix.from_columns([b], a.rows)]) if a.rows else QMatrix(0, a.cols + 1)
    r = rref(aug)
    if a.cols in r.pivots:
        return None
    x = [ZERO] * a.cols
    for i, p in enumerate(r.pivots):
        x[p] = r.reduced.entry(i, a.cols)
    return tuple(x)


def kernel_basis(a: QMatrix) -> list[Vector]:
    """Basis of ker(a), one vector per free column of the rref, in column order."""
    r = rref(a)
    pivot_set = set(r.pivots)
    free = [j for j in range(a.cols) if j not in pivot_set]
    basis = []
    for f in free:
        v = [ZERO] * a.cols
        v[f] = ONE
        for i, p in enumerate(r.pivots):
            v[p] = -r.reduced.entry(i, f)
        basis.append(tuple(v))
    return basis


def column_space_basis(a: QMatrix) -> list[Vector]:
    """Original pivot columns of a (a basis of the image)."""
    r = rref(a)
    return [a.column(p) for p in r.pivots]


def quotient_basis(sub: Sequence[Vector], ambient_dim: int) -> list[Vector]:
    """Standard basis vectors completing span(sub) to the ambient space.

    Chosen greedily as the lexicographically-first e_j not already in the
    span, which matches taking the non-pivot part of rref([sub | I]).
    """
    for v in sub:
        if len(v) != ambient_dim:
            raise ValueError("quotient_basis: vector length mismatch")
    cols = list(sub) + [unit_vec(ambient_dim, j) for j in range(ambient_dim)]
    m = QMatrix.from_columns(cols, ambient_dim) if ambient_dim else QMatrix(0, len(cols))
    r = rref(m)
    k = len(sub)
    return [unit_vec(ambient_dim, p - k) for p in r.pivots if p >= k]


def express_in_basis(basis: Sequence[Vector], target: Sequence, dim: int) -> Optional[Vector]:
    """Coordinates of target in span(basis), or None if outside the span."""
    m = QMatrix.from_columns(list(basis), dim)
    return solve(m, target)


def invert(m: QMatrix) -> QMatrix:
    if m.rows != m.cols:
        raise ValueError("invert: not square")
    n = m.rows
    if n == 0:
        return QMatrix(0, 0)
    r = rref(hstack([m, QMatrix.identity(n)]))
    if r.rank < n:
        raise ValueError("invert: singular matrix")
    return QMatrix(n, n, [row[n:] for row in r.reduced.data])


@dataclass(frozen=True)
class AdaptedSplit:
    """Bases adapted to Coim + Ker -> Im + Coker for a fixed map psi.

    In the new bases psi becomes the block matrix [[I, 0], [0, 0]]:
    coimage vectors map bijectively onto the image vectors, kernel vectors
    map to zero, and cokernel vectors complete the image in the codomain.
    """
    coimage: tuple[Vector, ...]
    kernel: tuple[Vector, ...]
    image: tuple[Vector, ...]
    cokernel: tuple[Vector, ...]
    domain_change: QMatrix        # columns: coimage ++ kernel
    domain_change_inv: QMatrix
    codomain_change: QMatrix      # columns: image ++ cokernel
    codomain_change_inv: QMatrix

    @property
    def rank(self) -> int:
        return len(self.coimage)


def adapted_split(psi: QMatrix) -> AdaptedSplit:
    r = rref(psi)
    coim = [unit_vec(psi.cols, p) for p in r.pivots]
    ker = kernel_basis(psi)
    img = [psi.column(p) for p in r.pivots]
    coker = quotient_basis(img, psi.rows)
    dom = QMatrix.from_columns(coim + ker, psi.cols)
    cod = QMatrix.from_columns(img + coker, psi.rows)
    return AdaptedSplit(
        coimage=tuple(coim), kernel=tuple(ker),
        image=tuple(img), cokernel=tuple(coker),
        domain_change=dom, domain_change_inv=invert(dom),
        codomain_change=cod, codomain_change_inv=invert(cod),
    )
