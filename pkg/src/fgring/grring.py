"""Exact arithmetic in the integral group ring Z[F].

Elements are finite integer combinations of reduced words.  Coefficients are
plain Python ints (arbitrary precision), so lattice quotients downstream can
never overflow.  A configurable support cap turns runaway products into errors
instead of memory exhaustion.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .words import IDENTITY, FreeGroup, Word

SUPPORT_CAP = 100_000


class SupportCapError(RuntimeError):
    pass


class RingElement:
    """Finite-support map Word -> nonzero int; treat as immutable."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Word, int] | Iterable[tuple[Word, int]] = ()):
        clean: dict[Word, int] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for w, c in items:
            if c:
                c0 = clean.get(w, 0) + c
                if c0:
                    clean[w] = c0
                elif w in clean:
                    del clean[w]
        self.terms = clean

    @classmethod
    def zero(cls) -> "RingElement":
        return cls()

    @classmethod
    def one(cls) -> "RingElement":
        return cls({IDENTITY: 1})

    @classmethod
    def word(cls, w: Word, coeff: int = 1) -> "RingElement":
        return cls({w: coeff})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, RingElement) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "RingElement") -> "RingElement":
        out = dict(self.terms)
        for w, c in other.terms.items():
            c0 = out.get(w, 0) + c
            if c0:
                out[w] = c0
            elif w in out:
                del out[w]
        r = RingElement.__new__(RingElement)
        r.terms = out
        return r

    def __neg__(self) -> "RingElement":
        r = RingElement.__new__(RingElement)
        r.terms = {w: -c for w, c in self.terms.items()}
        return r

    def __sub__(self, other: "RingElement") -> "RingElement":
        return self + (-other)

    def __mul__(self, other) -> "RingElement":
        if isinstance(other, int):
            if other == 0:
                return RingElement()
            r = RingElement.__new__(RingElement)
            r.terms = {w: c * other for w, c in self.terms.items()}
            return r
        if isinstance(other, Word):
            other = RingElement.word(other)
        out: dict[Word, int] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 * w2
                c0 = out.get(w, 0) + c1 * c2
                if c0:
                    out[w] = c0
                elif w in out:
                    del out[w]
                if len(out) > SUPPORT_CAP:
                    raise SupportCapError(f"ring product support exceeds {SUPPORT_CAP}")
        r = RingElement.__new__(RingElement)
        r.terms = out
        return r

    __rmul__ = __mul__

    def support(self) -> list[Word]:
        return sorted(self.terms, key=Word.sort_key)

    def coeff(self, w: Word) -> int:
        return self.terms.get(w, 0)

    def str_in(self, group: FreeGroup) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w in self.support():
            c = self.terms[w]
            body = group.str_word(w)
            if c == 1:
                parts.append(f"+ {body}")
            elif c == -1:
                parts.append(f"- {body}")
            else:
                parts.append(f"{'+' if c > 0 else '-'} {abs(c)}*{body}")
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    def __repr__(self) -> str:
        return f"RingElement({len(self.terms)} terms)"


def augmentation(a: RingElement) -> int:
    """Coefficient sum; the ring homomorphism Z[F] -> Z."""
    return sum(a.terms.values())


def involution(a: RingElement) -> RingElement:
    """Linear extension of w -> w^-1; an anti-automorphism."""
    return RingElement({~w: c for w, c in a.terms.items()})


def delta_element(h: Word) -> RingElement:
    """h - 1, the augmentation-ideal generator attached to a word."""
    if h.is_identity():
        return RingElement()
    return RingElement({h: 1, IDENTITY: -1})


def delta_product(factors: Iterable[Word]) -> RingElement:
    """(h1 - 1)(h2 - 1)...(hk - 1)."""
    out = RingElement.one()
    for h in factors:
        out = out * delta_element(h)
    return out


# --- ring-element literals ----------------------------------------------------
#
# Integer-coefficient combinations of word literals, e.g. ``2*[x,y] - 1 + x^-1``.
# A leading integer (optionally followed by "*") scales the word literal; a bare
# integer is a multiple of the empty word.


def parse_ring_element(text: str, group: FreeGroup) -> RingElement:
    from .words import parse_word

    out = RingElement()
    for sign, chunk in _split_terms(text):
        chunk = chunk.strip()
        if not chunk:
            raise ValueError(f"empty term in ring literal {text!r}")
        coeff, body = _split_coeff(chunk)
        if body:
            w = parse_word(body, group)
        else:
            w = IDENTITY
        out = out + RingElement.word(w, sign * coeff)
    return out


def _split_terms(text: str):
    depth = 0
    sign = 1
    start = 0
    first = True
    for i, ch in enumerate(text):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif ch in "+-" and depth == 0:
            prev = text[start:i].strip()
            if not prev and not first:
                raise ValueError(f"dangling sign in ring literal {text!r}")
            # '^-1' exponents never reach here: '^' puts us after a non-space,
            # but guard against 'x^ -1' style by checking the previous token
            if prev.endswith("^"):
                continue
            if prev or not first:
                yield sign, prev
            sign = 1 if ch == "+" else -1
            start = i + 1
            first = False
    yield sign, text[start:]


def _split_coeff(chunk: str) -> tuple[int, str]:
    i = 0
    while i < len(chunk) and chunk[i].isdigit():
        i += 1
    if i == 0:
        return 1, chunk
    coeff = int(chunk[:i])
    rest = chunk[i:].lstrip()
    if rest.startswith("*"):
        rest = rest[1:]
    elif rest and rest[0] == "^":
        # a bare integer power like "2^3" is not a word literal
        raise ValueError(f"cannot exponentiate a coefficient in {chunk!r}")
    return coeff, rest.strip()
