"""Normal subgroups declared by quotient oracles, plus Schreier machinery.

A subgroup handle pairs a list of normal generators (used to span ideals and
probe sets) with a quotient oracle that decides membership exactly.  The four
base oracle kinds admit a canonical prefix-closed (Schreier) transversal, which
is what the rewriting and free-module decompositions below rely on; the
derived/meet combinators are membership-only.
"""

from __future__ import annotations

import itertools
from typing import Hashable, Iterable, Sequence

from .words import IDENTITY, FreeGroup, Word, WordError, ball


class SubgroupError(ValueError):
    pass


class QuotientOracle:
    """Maps words to canonical right-coset ids; the subgroup is the kernel."""

    kind = "abstract"
    peelable = False

    def identity_id(self) -> Hashable:
        raise NotImplementedError

    def step(self, cid: Hashable, letter: int) -> Hashable:
        raise NotImplementedError

    def image(self, w: Word) -> Hashable:
        cid = self.identity_id()
        for a in w:
            cid = self.step(cid, a)
        return cid

    def contains(self, w: Word) -> bool:
        return self.image(w) == self.identity_id()

    def rep(self, cid: Hashable) -> Word:
        """Schreier transversal section; only for peelable kinds."""
        raise SubgroupError(f"{self.kind} oracle has no transversal section")

    def describe(self) -> str:
        raise NotImplementedError


class TrivialQuotient(QuotientOracle):
    """Quotient is the trivial group: the subgroup is all of F."""

    kind = "trivial"
    peelable = True

    def identity_id(self):
        return 0

    def step(self, cid, letter):
        return 0

    def rep(self, cid):
        return IDENTITY

    def describe(self):
        return "trivial"


class FreeQuotient(QuotientOracle):
    """Kill a subset of generators; quotient is free on the survivors."""

    kind = "free"
    peelable = True

    def __init__(self, killed: Iterable[int]):
        self.killed = frozenset(killed)

    def identity_id(self):
        return ()

    def step(self, cid, letter):
        if abs(letter) - 1 in self.killed:
            return cid
        if cid and cid[-1] == -letter:
            return cid[:-1]
        return cid + (letter,)

    def rep(self, cid):
        return Word(cid)

    def describe(self):
        return f"free killing {sorted(self.killed)}"


class FreeAbelianQuotient(QuotientOracle):
    """Generator -> integer vector; the subgroup is the map's kernel."""

    kind = "free_abelian"
    peelable = True

    def __init__(self, images: Sequence[Sequence[int]]):
        self.images = tuple(tuple(v) for v in images)
        if self.images:
            dims = {len(v) for v in self.images}
            if len(dims) != 1:
                raise SubgroupError("free-abelian images must share a dimension")
            self.dim = dims.pop()
        else:
            self.dim = 0
        # section: one designated generator per coordinate with a unit image
        self._unit_gen: list[int | None] = [None] * self.dim
        for j in range(self.dim):
            unit = tuple(1 if t == j else 0 for t in range(self.dim))
            for i, v in enumerate(self.images):
                if v == unit:
                    self._unit_gen[j] = i
                    break

    def identity_id(self):
        return (0,) * self.dim

    def step(self, cid, letter):
        v = self.images[abs(letter) - 1]
        s = 1 if letter > 0 else -1
        return tuple(c + s * x for c, x in zip(cid, v))

    def rep(self, cid):
        letters: list[int] = []
        for j, m in enumerate(cid):
            g = self._unit_gen[j]
            if m and g is None:
                raise SubgroupError(
                    "free-abelian oracle needs a designated unit-vector generator "
                    f"for coordinate {j} to build a transversal"
                )
            if m:
                letters.extend([(g + 1) if m > 0 else -(g + 1)] * abs(m))
        return Word(letters)

    def describe(self):
        return "free_abelian " + " ".join(
            "(" + ",".join(map(str, v)) + ")" for v in self.images
        )


class FinitePermQuotient(QuotientOracle):
    """Generator -> permutation of n points; the subgroup has finite index."""

    kind = "finite_perm"
    peelable = True

    def __init__(self, perms: Sequence[Sequence[int]]):
        self.perms = tuple(tuple(p) for p in perms)
        degs = {len(p) for p in self.perms}
        if len(degs) > 1:
            raise SubgroupError("permutations must share a degree")
        self.degree = degs.pop() if degs else 1
        for p in self.perms:
            if sorted(p) != list(range(self.degree)):
                raise SubgroupError(f"not a permutation of {self.degree} points: {p}")
        self._inv = tuple(self._invert(p) for p in self.perms)
        self._transversal: dict[tuple, Word] | None = None

    @staticmethod
    def _invert(p):
        q = [0] * len(p)
        for i, x in enumerate(p):
            q[x] = i
        return tuple(q)

    def identity_id(self):
        return tuple(range(self.degree))

    def step(self, cid, letter):
        p = self.perms[letter - 1] if letter > 0 else self._inv[-letter - 1]
        # right multiplication in the image group
        return tuple(p[x] for x in cid)

    def rep(self, cid):
        if self._transversal is None:
            self._build_transversal()
        try:
            return self._transversal[cid]
        except KeyError:
            raise SubgroupError("coset id not in the generated permutation group")

    def _build_transversal(self):
        # shortlex BFS gives a prefix-closed transversal
        start = self.identity_id()
        trans = {start: IDENTITY}
        frontier = [start]
        letters = [i + 1 for i in range(len(self.perms))]
        letters += [-a for a in letters]
        while frontier:
            nxt = []
            for cid in frontier:
                for a in letters:
                    c2 = self.step(cid, a)
                    if c2 not in trans:
                        trans[c2] = trans[cid] * Word((a,))
                        nxt.append(c2)
            frontier = nxt
        self._transversal = trans

    def group_order(self) -> int:
        if self._transversal is None:
            self._build_transversal()
        return len(self._transversal)

    def describe(self):
        return f"finite_perm degree {self.degree}"


class DerivedOracle(QuotientOracle):
    """Kernel is the derived subgroup of a peelable base handle's subgroup.

    Membership: the word lies in the base subgroup and its abelianized
    Reidemeister-Schreier vector vanishes.  Coset ids pair the base coset with
    the accumulated Schreier exponent vector, which is exact because the base
    subgroup's abelianization is free on its Schreier generators.
    """

    kind = "derived"
    peelable = False

    def __init__(self, base: "SubgroupHandle"):
        if not base.oracle.peelable:
            raise SubgroupError("derived() needs a base handle with a transversal")
        self.base = base

    def identity_id(self):
        return (self.base.oracle.identity_id(), ())

    def step(self, cid, letter):
        base_cid, vec = cid
        system = self.base.coset_system()
        new_cid, emitted = system.step_with_schreier(base_cid, letter)
        if emitted is not None:
            key, sign = emitted
            d = dict(vec)
            d[key] = d.get(key, 0) + sign
            if d[key] == 0:
                del d[key]
            vec = tuple(sorted(d.items()))
        return (new_cid, vec)

    def describe(self):
        return f"derived({self.base.name})"


class MeetOracle(QuotientOracle):
    """Kernel is the intersection of two handles' subgroups."""

    kind = "meet"
    peelable = False

    def __init__(self, left: "SubgroupHandle", right: "SubgroupHandle"):
        self.left = left
        self.right = right

    def identity_id(self):
        return (self.left.oracle.identity_id(), self.right.oracle.identity_id())

    def step(self, cid, letter):
        return (self.left.oracle.step(cid[0], letter), self.right.oracle.step(cid[1], letter))

    def describe(self):
        return f"meet({self.left.name},{self.right.name})"


class CosetSystem:
    """Schreier transversal bookkeeping over a peelable quotient oracle.

    Schreier generators are keyed by (coset id, 0-based generator index);
    trivial ones (rep * x equals the next rep) are skipped, so the remaining
    keys freely generate the subgroup.
    """

    def __init__(self, oracle: QuotientOracle):
        if not oracle.peelable:
            raise SubgroupError("coset system needs a peelable oracle")
        self.oracle = oracle
        self._gen_words: dict[tuple, Word] = {}

    def cid(self, w: Word) -> Hashable:
        return self.oracle.image(w)

    def contains(self, w: Word) -> bool:
        return self.oracle.contains(w)

    def rep(self, cid) -> Word:
        return self.oracle.rep(cid)

    def schreier_word(self, key: tuple) -> Word:
        w = self._gen_words.get(key)
        if w is None:
            cid, gi = key
            t = self.oracle.rep(cid)
            t2 = self.oracle.rep(self.oracle.step(cid, gi + 1))
            w = t * Word((gi + 1,)) * ~t2
            self._gen_words[key] = w
        return w

    def step_with_schreier(self, cid, letter):
        """Advance one letter; return (new coset id, emitted (key, sign) or None)."""
        gi = abs(letter) - 1
        if letter > 0:
            new_cid = self.oracle.step(cid, letter)
            key = (cid, gi)
        else:
            new_cid = self.oracle.step(cid, letter)
            key = (new_cid, gi)
        w = self.schreier_word(key)
        if w.is_identity():
            return new_cid, None
        return new_cid, (key, 1 if letter > 0 else -1)

    def rewrite(self, w: Word):
        """Walk ``w``; return (schreier letter list [(key, sign), ...], final cid).

        ``w`` equals the product of the Schreier generators (with signs, in
        order) times the representative of the final coset.
        """
        cid = self.oracle.identity_id()
        out: list[tuple[tuple, int]] = []
        for a in w:
            cid, emitted = self.step_with_schreier(cid, a)
            if emitted is not None:
                out.append(emitted)
        return out, cid

    def abelianized_vector(self, w: Word) -> dict[tuple, int]:
        """Exponent vector of a subgroup element over its Schreier generators."""
        letters, cid = self.rewrite(w)
        if cid != self.oracle.identity_id():
            raise SubgroupError("word is not in the subgroup")
        vec: dict[tuple, int] = {}
        for key, sign in letters:
            vec[key] = vec.get(key, 0) + sign
            if vec[key] == 0:
                del vec[key]
        return vec


class SubgroupHandle:
    """A named normal subgroup: declared normal generators + quotient oracle."""

    def __init__(self, name: str, generators: Sequence[Word], oracle: QuotientOracle):
        self.name = name
        self.generators = list(generators)
        self.oracle = oracle
        self._system: CosetSystem | None = None

    def contains(self, w: Word) -> bool:
        return self.oracle.contains(w)

    @property
    def peelable(self) -> bool:
        return self.oracle.peelable

    def coset_system(self) -> CosetSystem:
        if self._system is None:
            self._system = CosetSystem(self.oracle)
        return self._system

    def validate(self, group: FreeGroup, conj_radius: int = 1) -> None:
        """Generators (and short conjugates, for normality) must die in the quotient."""
        if not self.generators and not isinstance(self.oracle, TrivialQuotient):
            pass  # generator-free handles are allowed for membership-only use
        conjugators = ball(group.gens(), conj_radius)
        for g in self.generators:
            for c in conjugators:
                if not self.oracle.contains(g.conjugate(c)):
                    raise SubgroupError(
                        f"subgroup {self.name}: generator {group.str_word(g)} conjugated by "
                        f"{group.str_word(c)} survives in the declared quotient"
                    )

    def __repr__(self) -> str:
        return f"SubgroupHandle({self.name}, {len(self.generators)} gens, {self.oracle.kind})"


def full_group_handle(group: FreeGroup, name: str = "f") -> SubgroupHandle:
    return SubgroupHandle(name, group.gens(), TrivialQuotient())


def gamma_generators(
    handle: SubgroupHandle,
    weight: int,
    conj_radius: int,
    group: FreeGroup,
    cap: int = 4000,
) -> list[Word]:
    """Left-normed commutators of the given weight with entries drawn from the
    handle's normal generators conjugated by a radius-bounded ball of F."""
    if weight < 2:
        raise SubgroupError("gamma weight must be >= 2")
    if not handle.generators:
        raise SubgroupError(f"subgroup {handle.name} has no declared generators")
    conjugators = ball(group.gens(), conj_radius)
    pool_set: dict[tuple, Word] = {}
    for g in handle.generators:
        for c in conjugators:
            h = g.conjugate(c)
            if h and h.letters not in pool_set:
                pool_set[h.letters] = h
    pool = sorted(pool_set.values(), key=Word.sort_key)

    from .words import commutator  # local to keep module import light

    level: dict[tuple, Word] = dict(pool_set)
    current = pool
    for _ in range(weight - 1):
        nxt: dict[tuple, Word] = {}
        scanned = 0
        for w, h in itertools.product(current, pool):
            scanned += 1
            if scanned > cap:
                break
            c = commutator(w, h)
            if c and c.letters not in nxt:
                nxt[c.letters] = c
        current = sorted(nxt.values(), key=Word.sort_key)
        level = nxt
    return current


def derived_generators(
    handle: SubgroupHandle, conj_radius: int, group: FreeGroup, cap: int = 4000
) -> list[Word]:
    return gamma_generators(handle, 2, conj_radius, group, cap)
