"""Degree-truncated Magnus expansion Z[F] -> Z<X_1..X_n>/(degree > d).

Generators map to 1 + X_i, inverses to the truncated geometric series; the
expansion is multiplicative exactly because truncation is an algebra quotient.
Monomials are ordered graded, then lexicographic by variable-index sequence
(the bit-exact order for machine-readable output).

Ideal shadows: for a normal subgroup declared by normal generators Y, the
two-sided ideal (Y-1)Z[F] maps onto the two-sided ideal of the truncated
algebra generated by the expansions of y-1.  That ideal is computed here as
the span of all monomial sandwiches m0*(y1-1)*m1*...*(yk-1)*mk, which is the
same lattice a (1+X_i)-saturation to a fixed point reaches.  Completeness for
a single atom rests on the standard fact that (R-1)Z[F] is generated as a
two-sided ideal by the normal generators of R; tests check this against
brute-force spans of conjugated generator products on small cases.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable, Sequence

from .grring import RingElement
from .intlat import IntLattice
from .words import Word

DEFAULT_DEGREE = 6
MONOMIAL_CAP = 4096  # refuse ambient bases with more than this many monomials
SANDWICH_CAP = 500_000


class ShadowCapError(RuntimeError):
    pass


@lru_cache(maxsize=64)
def monomial_basis(nvars: int, d: int) -> tuple[tuple[tuple[int, ...], ...], dict]:
    """(ordered monomials of degree <= d, monomial -> index)."""
    monos: list[tuple[int, ...]] = []
    for deg in range(d + 1):
        monos.extend(itertools.product(range(nvars), repeat=deg))
    if len(monos) > MONOMIAL_CAP:
        raise ShadowCapError(
            f"{len(monos)} monomials for rank {nvars} at degree {d} "
            f"exceeds the cap {MONOMIAL_CAP}; lower the degree"
        )
    return tuple(monos), {m: i for i, m in enumerate(monos)}


def ambient_dimension(nvars: int, d: int) -> int:
    return len(monomial_basis(nvars, d)[0])


def max_feasible_degree(nvars: int, d_max: int, cap: int = MONOMIAL_CAP) -> int:
    """Largest degree <= d_max whose monomial basis fits under the cap."""
    d = 0
    total = 1
    while d < d_max:
        nxt = total + nvars ** (d + 1)
        if nxt > cap:
            break
        total = nxt
        d += 1
    return d


class TruncatedSeries:
    """Noncommutative polynomial truncated past total degree ``degree``."""

    __slots__ = ("nvars", "degree", "terms")

    def __init__(self, nvars: int, degree: int, terms: dict | None = None):
        self.nvars = nvars
        self.degree = degree
        self.terms = {m: c for m, c in (terms or {}).items() if c and len(m) <= degree}

    @classmethod
    def one(cls, nvars: int, degree: int) -> "TruncatedSeries":
        return cls(nvars, degree, {(): 1})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, TruncatedSeries)
            and self.nvars == other.nvars
            and self.degree == other.degree
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, self.degree, frozenset(self.terms.items())))

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        out = dict(self.terms)
        for m, c in other.terms.items():
            c0 = out.get(m, 0) + c
            if c0:
                out[m] = c0
            elif m in out:
                del out[m]
        return TruncatedSeries(self.nvars, self.degree, out)

    def __neg__(self):
        return TruncatedSeries(self.nvars, self.degree, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "TruncatedSeries":
        if isinstance(other, int):
            return TruncatedSeries(self.nvars, self.degree, {m: c * other for m, c in self.terms.items()})
        d = self.degree
        out: dict = {}
        for m1, c1 in self.terms.items():
            room = d - len(m1)
            for m2, c2 in other.terms.items():
                if len(m2) > room:
                    continue
                m = m1 + m2
                c0 = out.get(m, 0) + c1 * c2
                if c0:
                    out[m] = c0
                elif m in out:
                    del out[m]
        return TruncatedSeries(self.nvars, self.degree, out)

    __rmul__ = __mul__

    def min_degree(self) -> int | None:
        if not self.terms:
            return None
        return min(len(m) for m in self.terms)

    def coefficient(self, mono: tuple[int, ...]) -> int:
        return self.terms.get(mono, 0)

    def to_vector(self) -> list[int]:
        monos, index = monomial_basis(self.nvars, self.degree)
        v = [0] * len(monos)
        for m, c in self.terms.items():
            v[index[m]] = c
        return v

    def to_sparse(self, d: int | None = None) -> dict[int, int]:
        _, index = monomial_basis(self.nvars, self.degree if d is None else d)
        return {index[m]: c for m, c in self.terms.items()}

    def truncate(self, d: int) -> "TruncatedSeries":
        return TruncatedSeries(self.nvars, d, {m: c for m, c in self.terms.items() if len(m) <= d})

    def str_terms(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        monos = sorted(self.terms, key=lambda m: (len(m), m))

        def mono_str(m):
            if not m:
                return "1"
            if names:
                return "*".join(names[i].upper() for i in m)
            return "*".join(f"X{i + 1}" for i in m)

        parts = []
        for m in monos:
            c = self.terms[m]
            if c == 1 and m:
                parts.append(f"+ {mono_str(m)}")
            elif c == -1 and m:
                parts.append(f"- {mono_str(m)}")
            else:
                parts.append(f"{'+' if c > 0 else '-'} {abs(c)}" + (f"*{mono_str(m)}" if m else ""))
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    def __repr__(self):
        return f"TruncatedSeries(deg<={self.degree}, {len(self.terms)} terms)"


def _letter_series(letter: int, nvars: int, d: int) -> TruncatedSeries:
    i = abs(letter) - 1
    if letter > 0:
        return TruncatedSeries(nvars, d, {(): 1, (i,): 1})
    terms = {}
    for k in range(d + 1):
        terms[(i,) * k] = 1 if k % 2 == 0 else -1
    return TruncatedSeries(nvars, d, terms)


def expand(w: Word, d: int, nvars: int) -> TruncatedSeries:
    """Multiplicative expansion of a word at truncation degree d."""
    if d < 0:
        raise ValueError("degree must be >= 0")
    out = TruncatedSeries.one(nvars, d)
    for a in w:
        out = out * _letter_series(a, nvars, d)
    return out


def expand_ring(a: RingElement, d: int, nvars: int) -> TruncatedSeries:
    """Linear extension of expand to Z[F]."""
    out = TruncatedSeries(nvars, d)
    for w, c in a.terms.items():
        out = out + expand(w, d, nvars) * c
    return out


def min_degree(a: RingElement, d_max: int, nvars: int) -> int | None:
    """Least total degree with a nonzero coefficient, or None for >= d_max+1."""
    if not a:
        raise ValueError("min_degree of the zero element is undefined")
    return expand_ring(a, d_max, nvars).min_degree()


def product_shadow(
    factor_gens: Sequence[Sequence[TruncatedSeries]],
    d: int,
    nvars: int,
    cap: int = SANDWICH_CAP,
) -> IntLattice:
    """Lattice spanned by all monomial sandwiches m0 u1 m1 ... uk mk with the
    u_i drawn from per-factor generator expansions; equals the truncated image
    of the corresponding product of two-sided ideals."""
    monos, index = monomial_basis(nvars, d)
    dim = len(monos)
    L = IntLattice(dim)
    k = len(factor_gens)
    if k == 0:
        raise ValueError("product needs at least one factor")
    gens = [[g for g in group if g] for group in factor_gens]
    if any(not group for group in gens):
        return L  # some factor expands to zero at this degree
    budget = d - k
    if budget < 0:
        return L

    n_combos = 1
    for group in gens:
        n_combos *= len(group)
    total = 0
    for t in range(budget + 1):
        total += _ncompositions(t, k + 1) * (nvars ** t)
    if total * n_combos > cap:
        raise ShadowCapError(
            f"shadow enumeration needs {total * n_combos} sandwiches (> cap {cap})"
        )

    degree_monos: list[list[tuple[int, ...]]] = [
        list(itertools.product(range(nvars), repeat=t)) for t in range(budget + 1)
    ]
    for combo in itertools.product(*gens):
        for t in range(budget + 1):
            for comp in _compositions(t, k + 1):
                slot_choices = [degree_monos[c] for c in comp]
                for slots in itertools.product(*slot_choices):
                    terms = {slots[0]: 1}
                    ok = True
                    for u, m in zip(combo, slots[1:]):
                        nxt: dict = {}
                        for m1, c1 in terms.items():
                            room = d - len(m1) - len(m)
                            for m2, c2 in u.terms.items():
                                if len(m2) > room:
                                    continue
                                key = m1 + m2 + m
                                c0 = nxt.get(key, 0) + c1 * c2
                                if c0:
                                    nxt[key] = c0
                                elif key in nxt:
                                    del nxt[key]
                        terms = nxt
                        if not terms:
                            ok = False
                            break
                    if not ok:
                        continue
                    L.add({index[m]: c for m, c in terms.items()})
    return L


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _ncompositions(total: int, parts: int) -> int:
    # C(total + parts - 1, parts - 1)
    num = 1
    den = 1
    for i in range(parts - 1):
        num *= total + parts - 1 - i
        den *= i + 1
    return num // den


def ideal_shadow(expr, ctx, d: int, cap: int = SANDWICH_CAP) -> IntLattice:
    """Shadow of an ideal expression in a scenario context (cached there)."""
    from .idealeng import resolve_expr  # late import; idealeng depends on magnus

    cached = ctx.shadow_cache.get((expr.key(), d))
    if cached is not None:
        return cached
    nvars = ctx.group.rank
    terms = resolve_expr(expr, ctx)
    out = IntLattice(ambient_dimension(nvars, d))
    for factor_words in terms:
        factor_gens = [
            [expand_ring(ctx.delta(g), d, nvars) for g in gens] for gens in factor_words
        ]
        out = out.join(product_shadow(factor_gens, d, nvars, cap))
    out.canonicalize()
    ctx.shadow_cache[(expr.key(), d)] = out
    return out
