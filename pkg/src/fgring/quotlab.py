"""Finite quotients, transversal 2-cocycles, abelianized Reidemeister-Schreier
checks, and the combinatorial membership suites.

The cocycle W(g,h) is the transversal defect w(gh)^-1 w(g) w(h); everything
here is exact word arithmetic in F plus exponent vectors over Schreier
generators of the kernel.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .grring import delta_element
from .idealeng import AtomRef, DecideConfig, IdealExpr, Verdict, Workbench, decide
from .subgroups import CosetSystem, QuotientOracle, SubgroupError, SubgroupHandle
from .words import IDENTITY, FreeGroup, Word, commutator


class QuotLabError(ValueError):
    pass


class CosetTable:
    """Finite quotient G = F/R with a transversal, w(1) = identity."""

    def __init__(self, group: FreeGroup, oracle: QuotientOracle, transversal: dict):
        self.group = group
        self.oracle = oracle
        ident = oracle.identity_id()
        if transversal.get(ident, None) != IDENTITY:
            raise QuotLabError("transversal must send the identity coset to the empty word")
        for cid, w in transversal.items():
            if oracle.image(w) != cid:
                raise QuotLabError("transversal word lies in the wrong coset")
        self.transversal = dict(transversal)
        self.ids = sorted(transversal, key=lambda c: (transversal[c].sort_key()))

    @classmethod
    def build(cls, group: FreeGroup, oracle: QuotientOracle) -> "CosetTable":
        """Schreier transversal by shortlex BFS over the coset graph."""
        ident = oracle.identity_id()
        trans = {ident: IDENTITY}
        frontier = [ident]
        letters = [i + 1 for i in range(group.rank)] + [-(i + 1) for i in range(group.rank)]
        while frontier:
            nxt = []
            for cid in frontier:
                for a in letters:
                    c2 = oracle.step(cid, a)
                    if c2 not in trans:
                        trans[c2] = trans[cid] * Word((a,))
                        nxt.append(c2)
            frontier = nxt
        return cls(group, oracle, trans)

    @classmethod
    def randomized(cls, group: FreeGroup, oracle: QuotientOracle, seed: int, scramble_length: int = 3) -> "CosetTable":
        """Random transversal (w(1) stays the identity): each representative is
        scrambled by a random kernel element u * rep(image(u))^-1."""
        base = cls.build(group, oracle)
        rng = random.Random(seed)
        system = CosetSystem(oracle)
        letters = [i + 1 for i in range(group.rank)] + [-(i + 1) for i in range(group.rank)]
        trans = {}
        for cid, t in base.transversal.items():
            if t.is_identity():
                trans[cid] = t
                continue
            u = Word([rng.choice(letters) for _ in range(rng.randint(1, scramble_length))])
            r = u * ~system.rep(oracle.image(u))
            trans[cid] = r * t
        return cls(group, oracle, trans)

    def mult(self, gid, hid):
        return self.oracle.image(self.transversal[gid] * self.transversal[hid])

    def inv(self, gid):
        return self.oracle.image(~self.transversal[gid])

    def rep(self, gid) -> Word:
        return self.transversal[gid]

    def size(self) -> int:
        return len(self.transversal)


class CocycleTable:
    """W : G x G -> R with w(g) w(h) = w(gh) W(g, h) exactly in F."""

    def __init__(self, table: CosetTable):
        self.coset_table = table
        self.entries: dict[tuple, Word] = {}
        for g in table.ids:
            for h in table.ids:
                gh = table.mult(g, h)
                w = ~table.rep(gh) * table.rep(g) * table.rep(h)
                if not table.oracle.contains(w):
                    raise QuotLabError("cocycle entry escaped the kernel (broken table)")
                self.entries[(g, h)] = w

    def value(self, g, h) -> Word:
        return self.entries[(g, h)]


def build_cocycle(table: CosetTable) -> CocycleTable:
    return CocycleTable(table)


@dataclass
class PairReport:
    name: str
    total: int
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures

    def describe(self) -> str:
        return f"{self.name}: {self.total - len(self.failures)}/{self.total} ok"


def cocycle_identity_check(cocycle: CocycleTable) -> PairReport:
    """W(gh,k) W(g,h)^{w(k)} = W(g,hk) W(h,k) exactly in F, for all triples."""
    ct = cocycle.coset_table
    failures = []
    total = 0
    for g in ct.ids:
        for h in ct.ids:
            for k in ct.ids:
                total += 1
                lhs = cocycle.value(ct.mult(g, h), k) * cocycle.value(g, h).conjugate(ct.rep(k))
                rhs = cocycle.value(g, ct.mult(h, k)) * cocycle.value(h, k)
                if lhs != rhs:
                    failures.append((g, h, k))
    return PairReport(name="cocycle_identity", total=total, failures=failures)


def lemma52_check(cocycle: CocycleTable) -> PairReport:
    """(W(g,h)^-1)^{w(gh)^-1} W(h^-1,g^-1) lies in [R,R]: its abelianized
    Reidemeister-Schreier vector vanishes (R_ab is free on Schreier generators)."""
    ct = cocycle.coset_table
    system = CosetSystem(ct.oracle)
    failures = []
    total = 0
    for g in ct.ids:
        for h in ct.ids:
            total += 1
            gh = ct.mult(g, h)
            elt = (~cocycle.value(g, h)).conjugate(~ct.rep(gh)) * cocycle.value(
                ct.inv(h), ct.inv(g)
            )
            try:
                vec = system.abelianized_vector(elt)
            except SubgroupError:
                failures.append((g, h, "not in kernel"))
                continue
            square_vec = system.abelianized_vector(elt * elt)
            doubled = {k: 2 * c for k, c in vec.items()}
            if vec or square_vec != doubled:
                failures.append((g, h, vec))
    return PairReport(name="lemma52_abelianized_vector", total=total, failures=failures)


# --- combinatorial membership suites -------------------------------------------------


@dataclass
class StohrReport:
    hypothesis: Verdict
    conclusion: Verdict
    hypothesis_established: bool
    label: str

    @property
    def ok(self) -> bool:
        return self.conclusion.kind == "member"

    def describe(self) -> str:
        tag = "" if self.hypothesis_established else " [hypothesis unverified]"
        return f"{self.label}: hyp={self.hypothesis.describe()} conc={self.conclusion.describe()}{tag}"


def stohr_expressions(r: str, s: str, t: str) -> tuple[IdealExpr, IdealExpr]:
    A = lambda n: AtomRef("atom", n)
    hyp = IdealExpr([(A(s), A(r), A(t)), (A(t), A(r), A(s))])
    conc = IdealExpr(
        [
            (A(r), A(r), A(s)),
            (A(s), A(r), A(r)),
            (A(t), A(r), A(r)),
            (A(r), A(r), A(t)),
        ]
    )
    return hyp, conc


def stohr_membership_suite(
    ctx: Workbench,
    r: str,
    s: str,
    t: str,
    a: Word,
    cfg: DecideConfig | None = None,
    label: str = "stohr",
) -> StohrReport:
    """Square-membership suite: a in D(F, srt+trs) implies a^2 in
    D(F, rrs+srr+trr+rrt); runs both probes and reports the verdicts."""
    cfg = cfg or DecideConfig()
    hyp_expr, conc_expr = stohr_expressions(r, s, t)
    hyp = decide(delta_element(a), hyp_expr, ctx, cfg)
    conc = decide(delta_element(a * a), conc_expr, ctx, cfg)
    return StohrReport(
        hypothesis=hyp,
        conclusion=conc,
        hypothesis_established=hyp.kind == "member",
        label=label,
    )


def prop4_w_builder(
    ctx: Workbench,
    pairs: Sequence[tuple[Word, Word]],
    d: Word,
    e: Word,
    r: str = "r",
    rs: str | None = None,
    s: str = "s",
) -> Word:
    """w = prod_i [[r_i^-1, d], [t_i, e]] after validating the inputs:
    prod [r_i, t_i] = 1 exactly in F, r_i in R, t_i in the declared R∩S, d, e in S."""
    h_r = ctx.handle(r)
    h_s = ctx.handle(s)
    h_rs = ctx.handle(rs) if rs is not None else None
    relation = IDENTITY
    for r_i, t_i in pairs:
        if not h_r.contains(r_i):
            raise QuotLabError(f"tuple entry {ctx.group.str_word(r_i)} fails the {r} oracle")
        checker = h_rs if h_rs is not None else h_r
        if not (checker.contains(t_i) and h_s.contains(t_i)):
            raise QuotLabError(f"tuple entry {ctx.group.str_word(t_i)} is not in the declared intersection")
        relation = relation * commutator(r_i, t_i)
    if relation:
        raise QuotLabError("rejected input: prod [r_i, t_i] does not reduce to 1")
    for word in (d, e):
        if not h_s.contains(word):
            raise QuotLabError(f"{ctx.group.str_word(word)} fails the {s} oracle")
    w = IDENTITY
    for r_i, t_i in pairs:
        w = w * commutator(commutator(~r_i, d), commutator(t_i, e))
    return w


def prop4_check(ctx: Workbench, w: Word, cfg: DecideConfig | None = None,
                r: str = "r", s: str = "s") -> Verdict:
    """decide(w - 1, rsf)."""
    expr = IdealExpr([(AtomRef("atom", r), AtomRef("atom", s), AtomRef("atom", "f"))])
    return decide(delta_element(w), expr, ctx, cfg or DecideConfig())
