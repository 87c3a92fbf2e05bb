"""Exact integer linear algebra: Hermite/Smith forms, lattice membership,
sums, intersections, quotient invariants.

Lattices are row lattices in Z^n kept as sparse {column: coeff} rows in an
incremental echelon form (pivot columns strictly increasing); ``canonicalize``
tightens that to the unique row-style Hermite normal form so equality is
literal comparison.  All arithmetic is on Python ints, so nothing can
overflow; rows are sparse because every workload here (Magnus shadows, chain
boundaries, induced functor relations) is.
"""

from __future__ import annotations

from bisect import bisect_left
from typing import Iterable, Mapping, Sequence


class LatticeError(ValueError):
    pass


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


def _sparse(vec) -> dict[int, int]:
    if isinstance(vec, Mapping):
        return {j: c for j, c in vec.items() if c}
    return {j: c for j, c in enumerate(vec) if c}


def _axpy(target: dict, src: dict, c: int) -> None:
    # target += c * src
    for j, v in src.items():
        nv = target.get(j, 0) + c * v
        if nv:
            target[j] = nv
        elif j in target:
            del target[j]


def _combine(r1: dict, r2: dict, c1: int, c2: int) -> dict:
    out: dict[int, int] = {}
    for j, v in r1.items():
        nv = c1 * v
        if nv:
            out[j] = nv
    for j, v in r2.items():
        nv = out.get(j, 0) + c2 * v
        if nv:
            out[j] = nv
        elif j in out:
            del out[j]
    return out


class IntLattice:
    """Row lattice in Z^n with incremental sparse echelonization."""

    __slots__ = ("n", "rows", "pivots", "_canonical")

    def __init__(self, ambient: int):
        if ambient < 0:
            raise LatticeError("ambient dimension must be >= 0")
        self.n = ambient
        self.rows: list[dict[int, int]] = []
        self.pivots: list[int] = []
        self._canonical = True

    @classmethod
    def from_rows(cls, ambient: int, rows: Iterable) -> "IntLattice":
        L = cls(ambient)
        for r in rows:
            L.add(r)
        return L

    def copy(self) -> "IntLattice":
        L = IntLattice.__new__(IntLattice)
        L.n = self.n
        L.rows = [dict(r) for r in self.rows]
        L.pivots = self.pivots.copy()
        L._canonical = self._canonical
        return L

    @property
    def rank(self) -> int:
        return len(self.rows)

    def _check_dim(self, vec) -> dict[int, int]:
        v = _sparse(vec)
        if v and (min(v) < 0 or max(v) >= self.n):
            raise LatticeError(f"vector index out of range for ambient {self.n}")
        if not isinstance(vec, Mapping) and len(vec) != self.n:
            raise LatticeError(f"vector has dimension {len(vec)}, ambient is {self.n}")
        return v

    def add(self, vec) -> bool:
        """Insert a vector; returns True iff the lattice grew."""
        v = self._check_dim(vec)
        grew = False
        while v:
            j = min(v)
            r = bisect_left(self.pivots, j)
            if r < len(self.pivots) and self.pivots[r] == j:
                row = self.rows[r]
                a = row[j]
                b = v[j]
                if b % a == 0:
                    _axpy(v, row, -(b // a))
                else:
                    x, y, g = xgcd(a, b)
                    new_row = _combine(row, v, x, y)
                    v = _combine(row, v, -(b // g), a // g)
                    self.rows[r] = new_row
                    grew = True
                    self._canonical = False
            else:
                self.rows.insert(r, v)
                self.pivots.insert(r, j)
                self._canonical = False
                return True
        return grew

    def contains(self, vec) -> bool:
        v = self._check_dim(vec)
        while v:
            j = min(v)
            r = bisect_left(self.pivots, j)
            if r >= len(self.pivots) or self.pivots[r] != j:
                return False
            row = self.rows[r]
            if v[j] % row[j]:
                return False
            _axpy(v, row, -(v[j] // row[j]))
        return True

    def reduce_leading(self, vec) -> tuple[int, dict[int, int]] | None:
        """Reduce as far as possible; return (stuck column, residual) or None
        when the vector is a member."""
        v = self._check_dim(vec)
        while v:
            j = min(v)
            r = bisect_left(self.pivots, j)
            if r >= len(self.pivots) or self.pivots[r] != j or v[j] % self.rows[r][j]:
                return j, v
            _axpy(v, self.rows[r], -(v[j] // self.rows[r][j]))
        return None

    def coordinates(self, vec) -> list[int] | None:
        """Coefficients of ``vec`` over the current echelon rows, or None."""
        v = self._check_dim(vec)
        coords = [0] * len(self.rows)
        while v:
            j = min(v)
            r = bisect_left(self.pivots, j)
            if r >= len(self.pivots) or self.pivots[r] != j:
                return None
            row = self.rows[r]
            if v[j] % row[j]:
                return None
            q = v[j] // row[j]
            coords[r] = q
            _axpy(v, row, -q)
        return coords

    def canonicalize(self) -> "IntLattice":
        """Unique HNF: positive pivots, entries above a pivot in [0, pivot)."""
        if self._canonical:
            return self
        for r, row in enumerate(self.rows):
            if row[self.pivots[r]] < 0:
                self.rows[r] = {j: -c for j, c in row.items()}
        for r in range(len(self.rows)):
            j = self.pivots[r]
            d = self.rows[r][j]
            row_r = self.rows[r]
            for s in range(r):
                q = self.rows[s].get(j, 0) // d
                if q:
                    _axpy(self.rows[s], row_r, -q)
        self._canonical = True
        return self

    def _canonical_key(self):
        self.canonicalize()
        return tuple((p, tuple(sorted(row.items()))) for p, row in zip(self.pivots, self.rows))

    def hnf_rows(self) -> tuple[tuple[int, ...], ...]:
        self.canonicalize()
        return tuple(tuple(row.get(j, 0) for j in range(self.n)) for row in self.rows)

    def dense_rows(self) -> list[list[int]]:
        return [[row.get(j, 0) for j in range(self.n)] for row in self.rows]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IntLattice)
            and self.n == other.n
            and self._canonical_key() == other._canonical_key()
        )

    def __hash__(self):
        return hash((self.n, self._canonical_key()))

    def __le__(self, other: "IntLattice") -> bool:
        return all(other.contains(r) for r in self.rows)

    def join(self, other: "IntLattice") -> "IntLattice":
        if self.n != other.n:
            raise LatticeError("ambient dimension mismatch")
        L = self.copy()
        for r in other.rows:
            L.add(dict(r))
        return L

    def meet(self, other: "IntLattice") -> "IntLattice":
        if self.n != other.n:
            raise LatticeError("ambient dimension mismatch")
        stacked = [dict(r) for r in self.rows] + [dict(r) for r in other.rows]
        p = len(self.rows)
        out = IntLattice(self.n)
        for k in kernel(stacked, self.n):
            v: dict[int, int] = {}
            for i, c in enumerate(k[:p]):
                if c:
                    _axpy(v, self.rows[i], c)
            out.add(v)
        return out

    def quotient_invariants(self, sub: "IntLattice") -> tuple[int, ...]:
        """Invariant factors of self/sub (1s dropped, 0 per free factor)."""
        if self.n != sub.n:
            raise LatticeError("ambient dimension mismatch")
        coeffs = []
        for r in sub.rows:
            c = self.coordinates(dict(r))
            if c is None:
                raise LatticeError("quotient_invariants: sub is not contained in sup")
            coeffs.append(c)
        m = len(self.rows)
        if m == 0:
            return ()
        inner = IntLattice.from_rows(m, coeffs)
        return ambient_quotient_invariants(inner, m)


def ambient_quotient_invariants(L: IntLattice, ambient: int) -> tuple[int, ...]:
    """Invariant factors of Z^ambient / L (1s dropped, 0 per free factor).

    Unit pivots have cleared columns after canonicalization, so they strip off
    and only a small core ever reaches the dense Smith reduction.
    """
    L = L.copy()
    L.canonicalize()
    keep = [i for i, p in enumerate(L.pivots) if L.rows[i][p] != 1]
    drop_cols = {L.pivots[i] for i in range(len(L.rows)) if L.rows[i][L.pivots[i]] == 1}
    pivot_cols = set(L.pivots)
    core_cols = sorted(
        set().union(*(set(L.rows[i]) for i in keep)) | (pivot_cols - drop_cols)
    ) if (keep or (pivot_cols - drop_cols)) else []
    col_index = {j: t for t, j in enumerate(core_cols)}
    core = []
    for i in keep:
        row = [0] * len(core_cols)
        for j, c in L.rows[i].items():
            row[col_index[j]] = c
        core.append(row)
    torsion = [d for d in snf(core, len(core_cols)) if d > 1] if core else []
    free = ambient - len(L.rows)
    return tuple(torsion) + (0,) * free


def hnf(matrix: Sequence[Sequence[int]], ncols: int | None = None) -> list[list[int]]:
    """Row-style Hermite normal form; zero rows dropped."""
    if ncols is None:
        ncols = len(matrix[0]) if matrix else 0
    L = IntLattice.from_rows(ncols, matrix)
    return [list(r) for r in L.hnf_rows()]


def snf(matrix: Sequence[Sequence[int]], ncols: int | None = None) -> tuple[int, ...]:
    """Invariant factors d1 | d2 | ... of an integer matrix (zero ones dropped)."""
    if ncols is None:
        ncols = len(matrix[0]) if matrix else 0
    D = [list(r) for r in matrix]
    for r in D:
        if len(r) != ncols:
            raise LatticeError("ragged matrix")
    m, n = len(D), ncols

    def improve_row(i1, i2, j):
        a, b = D[i1][j], D[i2][j]
        if not b:
            return
        if not a:
            D[i1], D[i2] = D[i2], D[i1]
        elif b % a == 0:
            q = b // a
            R1, R2 = D[i1], D[i2]
            for jj in range(n):
                R2[jj] -= q * R1[jj]
        else:
            x, y, g = xgcd(a, b)
            mbg, ag = -b // g, a // g
            R1, R2 = D[i1], D[i2]
            for jj in range(n):
                aa, bb = R1[jj], R2[jj]
                R1[jj] = x * aa + y * bb
                R2[jj] = mbg * aa + ag * bb

    def improve_col(j1, j2, i):
        a, b = D[i][j1], D[i][j2]
        if not b:
            return
        if not a:
            for row in D:
                row[j1], row[j2] = row[j2], row[j1]
        elif b % a == 0:
            q = b // a
            for row in D:
                row[j2] -= q * row[j1]
        else:
            x, y, g = xgcd(a, b)
            mbg, ag = -b // g, a // g
            for row in D:
                aa, bb = row[j1], row[j2]
                row[j1] = x * aa + y * bb
                row[j2] = mbg * aa + ag * bb

    for k in range(min(m, n)):
        while True:
            for i in range(k + 1, m):
                improve_row(k, i, k)
            if all(D[k][j] == 0 for j in range(k + 1, n)):
                break
            for j in range(k + 1, n):
                improve_col(k, j, k)
            if all(D[i][k] == 0 for i in range(k + 1, m)):
                break
        if D[k][k] == 0:
            found = False
            for i in range(k, m):
                for j in range(k, n):
                    if D[i][j]:
                        D[k], D[i] = D[i], D[k]
                        for row in D:
                            row[k], row[j] = row[j], row[k]
                        found = True
                        break
                if found:
                    break
            if not found:
                break

    diag = [abs(D[k][k]) for k in range(min(m, n)) if D[k][k]]
    # enforce the divisibility chain: diag(a, b) ~ diag(gcd, lcm)
    changed = True
    while changed:
        changed = False
        for i in range(len(diag)):
            for j in range(i + 1, len(diag)):
                if diag[j] % diag[i]:
                    g = _gcd(diag[i], diag[j])
                    diag[i], diag[j] = g, diag[i] * diag[j] // g
                    changed = True
    return tuple(diag)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def kernel(matrix: Sequence, ncols: int) -> list[list[int]]:
    """Basis of the left kernel {x : x.M = 0} of an integer matrix.

    Rows may be dense sequences or sparse {col: coeff} dicts."""
    m = len(matrix)
    aug = IntLattice(ncols + m)
    for i, row in enumerate(matrix):
        v = _sparse(row)
        v[ncols + i] = 1
        aug.add(v)
    out = []
    for p, row in zip(aug.pivots, aug.rows):
        if p >= ncols:
            out.append([row.get(ncols + i, 0) for i in range(m)])
    return out


def solve_left(matrix: Sequence, target) -> list[int] | None:
    """x with x.M = target, or None when no integer solution exists."""
    m = len(matrix)
    tgt = _sparse(target)
    ncols = (max(tgt) + 1) if isinstance(target, Mapping) else len(target)
    aug = IntLattice(ncols + m)
    for i, row in enumerate(matrix):
        v = _sparse(row)
        if v and max(v) >= ncols:
            raise LatticeError("matrix/target dimension mismatch")
        v[ncols + i] = 1
        aug.add(v)
    v = dict(tgt)
    while True:
        low = [j for j in v if j < ncols]
        if not low:
            break
        j = min(low)
        r = bisect_left(aug.pivots, j)
        if r >= len(aug.pivots) or aug.pivots[r] != j:
            return None
        row = aug.rows[r]
        if v[j] % row[j]:
            return None
        _axpy(v, row, -(v[j] // row[j]))
    return [-v.get(ncols + i, 0) for i in range(m)]
