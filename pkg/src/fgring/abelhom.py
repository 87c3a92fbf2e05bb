"""Integral homology of finitely generated abelian groups.

The main path assembles H_k by Kunneth from the cyclic/free atoms
(H_*(Z) = Z, Z; H_n(Z/m) = Z/m for odd n, 0 for even n > 0).  The independent
oracle computes the normalized bar complex of a small finite group by exact
boundary-matrix reduction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Sequence

from .abelfun import FgAbGroup, functor_value_group, tensor_ab, tor_ab
from .intlat import IntLattice, ambient_quotient_invariants


class HomologyError(ValueError):
    pass


@dataclass(frozen=True)
class HomologyResult:
    group: FgAbGroup
    degree: int
    value: FgAbGroup

    def describe(self) -> str:
        return f"H_{self.degree}({self.group.describe()}) = {self.value.describe()}"


def _cyclic_table(d: int, k_max: int) -> list[FgAbGroup]:
    """H_0..H_k of Z (d = 0) or Z/d."""
    table = [FgAbGroup.free(1)]
    for n in range(1, k_max + 1):
        if d == 0:
            table.append(FgAbGroup.free(1) if n == 1 else FgAbGroup.zero())
        else:
            table.append(FgAbGroup.cyclic(d) if n % 2 == 1 else FgAbGroup.zero())
    return table


def _kunneth(t1: list[FgAbGroup], t2: list[FgAbGroup], k_max: int) -> list[FgAbGroup]:
    out = []
    for n in range(k_max + 1):
        parts = []
        for i in range(n + 1):
            parts.extend(tensor_ab(t1[i], t2[n - i]).invariants)
        for i in range(n):
            parts.extend(tor_ab(t1[i], t2[n - 1 - i]).invariants)
        out.append(FgAbGroup.from_cyclics(parts))
    return out


def homology_table(a: FgAbGroup, k_max: int) -> list[FgAbGroup]:
    table = [FgAbGroup.free(1)] + [FgAbGroup.zero()] * k_max
    for d in a.invariants:
        table = _kunneth(table, _cyclic_table(d, k_max), k_max)
    return table


def homology(a: FgAbGroup, k: int) -> HomologyResult:
    if k < 0:
        raise HomologyError("degree must be >= 0")
    return HomologyResult(group=a, degree=k, value=homology_table(a, k)[k])


BAR_ORDER_CAP = 8
BAR_DEGREE_CAP = 4


def bar_oracle(a: FgAbGroup, k: int, order_cap: int = BAR_ORDER_CAP, degree_cap: int = BAR_DEGREE_CAP) -> FgAbGroup:
    """Normalized bar-complex homology of a finite abelian group, degree <= 4.

    Exact and independent of the Kunneth assembly: boundary matrices are
    reduced over Z.  Torsion of ker/im equals torsion of the full quotient by
    the image (the cokernel into the next-lower chain group is free), so no
    basis for ker is ever materialized.
    """
    order = a.order()
    if order is None or order > order_cap:
        raise HomologyError(f"bar oracle needs a finite group of order <= {order_cap}")
    if k < 0 or k > degree_cap:
        raise HomologyError(f"bar oracle supports degrees 0..{degree_cap}")
    if k == 0:
        return FgAbGroup.free(1)

    mods = a.torsion
    elements = list(itertools.product(*[range(d) for d in mods])) if mods else [()]
    identity = tuple(0 for _ in mods)
    nontrivial = [g for g in elements if g != identity]

    def add(g, h):
        return tuple((x + y) % d for x, y, d in zip(g, h, mods))

    def chains(n):
        return list(itertools.product(nontrivial, repeat=n))

    def boundary_rows(n, idx_lower):
        """Sparse rows of the boundary matrix C_n -> C_{n-1} (normalized)."""
        rows = []
        for tup in chains(n):
            row: dict[int, int] = {}
            face = tup[1:]
            if identity not in face:
                row[idx_lower[face]] = row.get(idx_lower[face], 0) + 1
            for i in range(n - 1):
                face = tup[:i] + (add(tup[i], tup[i + 1]),) + tup[i + 2 :]
                if identity not in face:
                    s = -1 if (i + 1) % 2 else 1
                    row[idx_lower[face]] = row.get(idx_lower[face], 0) + s
            face = tup[:-1]
            if identity not in face:
                s = 1 if n % 2 == 0 else -1
                row[idx_lower[face]] = row.get(idx_lower[face], 0) + s
            rows.append({j: c for j, c in row.items() if c})
        return rows

    basis_k = chains(k)
    idx_k = {t: i for i, t in enumerate(basis_k)}
    basis_km1 = chains(k - 1)
    idx_km1 = {t: i for i, t in enumerate(basis_km1)}

    dk = boundary_rows(k, idx_km1)
    rank_dk = IntLattice.from_rows(len(basis_km1), _dedupe(dk)).rank

    dk1 = boundary_rows(k + 1, idx_k)
    im = IntLattice.from_rows(len(basis_k), _dedupe(dk1))
    torsion = tuple(d for d in ambient_quotient_invariants(im, len(basis_k)) if d)
    free = (len(basis_k) - rank_dk) - im.rank
    return FgAbGroup(torsion + (0,) * free)


def _dedupe(rows):
    seen = set()
    out = []
    for r in rows:
        t = tuple(sorted(r.items()))
        if t and t not in seen:
            seen.add(t)
            out.append(r)
    return out


def example_sec4(a_rank: int = 3, b_rank: int = 2) -> FgAbGroup:
    """H_3 of a free abelian group of rank a tensored with the exterior square
    of a free abelian group of rank b."""
    h3 = homology(FgAbGroup.free(a_rank), 3).value
    lam = functor_value_group("lambda2", FgAbGroup.free(b_rank))
    return tensor_ab(h3, lam)


def free_homology_rank(n: int, k: int) -> int:
    """Expected rank of H_k(Z^n) (binomial table, used as a cross-check)."""
    return comb(n, k)
