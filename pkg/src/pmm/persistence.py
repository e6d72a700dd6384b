"""Tame persistence modules over a grid and their interval decomposition.

A grid t_0 < ... < t_n of rational timestamps discretizes the half-line;
module values are constant on [t_i, t_{i+1}) and from t_n on, so everything
is determined by the finitely many stages.  Bars are half-open intervals
reported by grid index, with INF standing for "survives past the last grid
point".

The decomposition is a genuine direct-sum splitting: each bar carries a
representative section that is propagated exactly by the structure maps and
maps to literal zero at its death index.  Downstream surgery relies on the
zero-at-death property (a class that merely merges into others cannot be
attached as a cell).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ValidationError
from .exactla import (
    QMatrix, Vector, frac, is_zero_vec, kernel_basis, quotient_basis, rank,
    rref, unit_vec, vec_add, vec_scale, zero_vec,
)

INF = float("inf")


@dataclass(frozen=True)
class Grid:
    """Strictly increasing rational timestamps; stage i lives at times[i]."""

    times: tuple[Fraction, ...]

    def __post_init__(self):
        times = tuple(frac(t) for t in self.times)
        object.__setattr__(self, "times", times)
        if not times:
            raise ValidationError("grid must be nonempty")
        if any(a >= b for a, b in zip(times, times[1:])):
            raise ValidationError("grid times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def time_of(self, index) -> Fraction | None:
        """Timestamp of a stage index; None encodes infinity."""
        if index == INF:
            return None
        return self.times[index]

    def insert(self, position: int, time) -> "Grid":
        time = frac(time)
        times = list(self.times)
        times.insert(position, time)
        return Grid(tuple(times))


@dataclass(frozen=True)
class Bar:
    """Half-open lifespan [birth, death) in grid indices; death may be INF."""

    birth: int
    death: float  # int index or INF
    degree: int = 0

    def __post_init__(self):
        if self.death != INF and self.birth >= self.death:
            raise ValidationError(f"bar needs birth < death, got [{self.birth},{self.death})")

    def alive_at(self, index: int) -> bool:
        return self.birth <= index and index < self.death

    def sort_key(self):
        return (self.degree, self.birth, self.death == INF, self.death)


class PersistenceModule:
    """Finite sequence of Q-vector spaces with structure maps between stages."""

    def __init__(self, grid: Grid, dims: tuple[int, ...], maps: tuple[QMatrix, ...]):
        if len(dims) != len(grid):
            raise ValidationError("dims must match grid length")
        if len(maps) != len(dims) - 1:
            raise ValidationError("need one map per consecutive stage pair")
        for i, m in enumerate(maps):
            if (m.rows, m.cols) != (dims[i + 1], dims[i]):
                raise ValidationError(f"map {i} has shape {m.rows}x{m.cols}, "
                                      f"want {dims[i + 1]}x{dims[i]}")
        self.grid = grid
        self.dims = tuple(dims)
        self.maps = tuple(maps)
        self.truncated_top = False  # set by pcomplex.cohomology at max degree

    def map_range(self, i: int, j: int) -> QMatrix:
        """Composite structure map from stage i to stage j (i <= j)."""
        if not 0 <= i <= j < len(self.dims):
            raise IndexError(f"stage pair ({i},{j}) out of range")
        m = QMatrix.identity(self.dims[i])
        for r in range(i, j):
            m = self.maps[r] @ m
        return m

    def direct_sum(self, other: "PersistenceModule") -> "PersistenceModule":
        if self.grid != other.grid:
            raise ValidationError("direct_sum: grid mismatch")
        dims = tuple(a + b for a, b in zip(self.dims, other.dims))
        maps = []
        for r in range(len(self.dims) - 1):
            a, b = self.maps[r], other.maps[r]
            rows = [list(a.data[i]) + [0] * b.cols for i in range(a.rows)]
            rows += [[0] * a.cols + list(b.data[i]) for i in range(b.rows)]
            maps.append(QMatrix(dims[r + 1], dims[r], rows))
        return PersistenceModule(self.grid, dims, tuple(maps))


def rank_invariant(m: PersistenceModule, i: int, j: int) -> int:
    """Rank of the composite map from stage i to stage j."""
    if i > j:
        raise IndexError("rank_invariant needs i <= j")
    return rank(m.map_range(i, j))


@dataclass
class BarRepresentative:
    """Section of one bar: a vector per supported index, propagated exactly.

    vectors[i+1] = maps[i] . vectors[i] on the support, vectors[birth] != 0,
    and at a finite death the image of the last vector is zero.
    """

    bar: Bar
    vectors: dict[int, Vector] = field(default_factory=dict)


class _Live:
    __slots__ = ("birth", "order", "vectors")

    def __init__(self, birth, order, first_vector):
        self.birth = birth
        self.order = order
        self.vectors = {birth: first_vector}


def _reverse_echelon(vectors: list[Vector]) -> list[Vector]:
    """Echelonize so each vector has a distinct last nonzero coordinate.

    Implemented as rref on coordinate-reversed rows; the resulting pivots are
    the youngest coordinates, which encodes the elder rule.
    """
    if not vectors:
        return []
    n = len(vectors[0])
    rev = QMatrix(len(vectors), n, [list(reversed(v)) for v in vectors])
    red = rref(rev).reduced
    out = []
    for row in red.data:
        if any(x != 0 for x in row):
            out.append(tuple(reversed(row)))
    return out


def _last_nonzero(v: Vector) -> int:
    for i in range(len(v) - 1, -1, -1):
        if v[i] != 0:
            return i
    raise ValueError("zero vector has no pivot")


def interval_decompose(m: PersistenceModule) -> tuple[list[Bar], list[BarRepresentative]]:
    """Split a grid-based module into interval summands with sections.

    Left-to-right sweep.  At every stage the alive sections form a basis;
    crossing a structure map, the kernel (in section coordinates) is
    echelonized against the youngest coordinate so that each dependency
    closes the latest-born bar involved (elder rule), after rewriting that
    bar's whole section so its image is exactly zero.
    """
    n = len(m.dims)
    finished: list[_Live] = []
    deaths: dict[int, float] = {}
    alive: list[_Live] = []
    counter = 0
    for b in range(m.dims[0]):
        alive.append(_Live(0, counter, unit_vec(m.dims[0], b)))
        counter += 1

    for i in range(n - 1):
        t = m.maps[i]
        if alive:
            smat = QMatrix.from_columns([lv.vectors[i] for lv in alive], m.dims[i])
            ts = t @ smat
            kern = _reverse_echelon(kernel_basis(ts))
        else:
            kern = []
        dying_positions = set()
        for kv in kern:
            pos = _last_nonzero(kv)
            dying_positions.add(pos)
            target = alive[pos]
            # Rewrite the dying bar's section as the kernel combination.
            # Every contributor is older or equal in (birth, order), so the
            # combination exists on the target's whole support.
            scale = Fraction(1) / kv[pos]
            for idx in range(target.birth, i + 1):
                acc = zero_vec(m.dims[idx])
                for c, lv in zip(kv, alive):
                    if c != 0:
                        acc = vec_add(acc, vec_scale(c * scale, lv.vectors[idx]))
                target.vectors[idx] = acc
            deaths[target.order] = i + 1
            finished.append(target)
        survivors = []
        for pos, lv in enumerate(alive):
            if pos in dying_positions:
                continue
            lv.vectors[i + 1] = t.apply(lv.vectors[i])
            survivors.append(lv)
        alive = survivors
        newborn = quotient_basis([lv.vectors[i + 1] for lv in alive], m.dims[i + 1])
        for v in newborn:
            nb = _Live(i + 1, counter, v)
            counter += 1
            alive.append(nb)

    for lv in alive:
        deaths[lv.order] = INF
        finished.append(lv)

    finished.sort(key=lambda lv: (lv.birth, deaths[lv.order] == INF, deaths[lv.order], lv.order))
    bars, reps = [], []
    for lv in finished:
        bar = Bar(lv.birth, deaths[lv.order])
        bars.append(bar)
        reps.append(BarRepresentative(bar, dict(lv.vectors)))
    return bars, reps


def from_bars(grid: Grid, bars: list[Bar]) -> PersistenceModule:
    """Direct sum of interval modules with the given lifespans."""
    n = len(grid)
    for b in bars:
        if not (0 <= b.birth < n) or (b.death != INF and not b.death <= n):
            raise ValidationError(f"bar {b} outside grid of length {n}")
    dims = tuple(sum(1 for b in bars if b.alive_at(i)) for i in range(n))
    maps = []
    for i in range(n - 1):
        src = [b for b in bars if b.alive_at(i)]
        dst = [b for b in bars if b.alive_at(i + 1)]
        pos = {id(b): j for j, b in enumerate(dst)}
        mat = [[0] * len(src) for _ in range(len(dst))]
        for jsrc, b in enumerate(src):
            if b.alive_at(i + 1):
                mat[pos[id(b)]][jsrc] = 1
        maps.append(QMatrix(len(dst), len(src), mat))
    return PersistenceModule(grid, dims, tuple(maps))


def check_representatives(m: PersistenceModule, bars: list[Bar],
                          reps: list[BarRepresentative]) -> None:
    """Raise unless the sections satisfy every BarRepresentative invariant."""
    n = len(m.dims)
    for rep in reps:
        b = rep.bar
        last = n - 1 if b.death == INF else int(b.death) - 1
        if is_zero_vec(rep.vectors[b.birth]):
            raise ValidationError("representative vanishes at birth")
        for i in range(b.birth, last):
            if m.maps[i].apply(rep.vectors[i]) != rep.vectors[i + 1]:
                raise ValidationError("representative does not commute with structure maps")
        if b.death != INF:
            img = m.maps[last].apply(rep.vectors[last])
            if not is_zero_vec(img):
                raise ValidationError("representative image at death is nonzero")
    # Alive sections are linearly independent at every index.
    for i in range(n):
        cols = [rep.vectors[i] for rep in reps if rep.bar.alive_at(i)]
        if cols and rank(QMatrix.from_columns(cols, m.dims[i])) != len(cols):
            raise ValidationError(f"alive sections dependent at stage {i}")
