"""Reduced words in a finitely generated free group.

A letter is a nonzero int: ``i + 1`` for generator ``i``, ``-(i + 1)`` for its
inverse.  Words are stored freely reduced with unit exponents; all operations
return new values (everything here is immutable and safe to share).
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Iterator, Sequence


class WordError(ValueError):
    pass


def _reduce_letters(raw: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for a in raw:
        if a == 0:
            raise WordError("zero is not a letter")
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


class Word:
    """A freely reduced word; the universal carrier of free-group elements."""

    __slots__ = ("letters", "_hash")

    def __init__(self, letters: Iterable[int] = ()):
        object.__setattr__(self, "letters", _reduce_letters(letters))
        object.__setattr__(self, "_hash", hash(self.letters))

    def __setattr__(self, name, value):
        raise AttributeError("Word is immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.letters == other.letters

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __invert__(self) -> "Word":
        return Word(tuple(-a for a in reversed(self.letters)))

    def __pow__(self, n: int) -> "Word":
        if n == 0:
            return IDENTITY
        base = self if n > 0 else ~self
        out = base
        for _ in range(abs(n) - 1):
            out = out * base
        return out

    def conjugate(self, by: "Word") -> "Word":
        """self^by = by^-1 * self * by."""
        return ~by * self * by

    def is_identity(self) -> bool:
        return not self.letters

    def max_generator(self) -> int:
        """Largest 0-based generator index used, or -1 for the empty word."""
        return max((abs(a) for a in self.letters), default=0) - 1

    def sort_key(self) -> tuple:
        # graded, then lexicographic on the letter sequence
        return (len(self.letters), self.letters)

    def __repr__(self) -> str:
        return f"Word({list(self.letters)})"


IDENTITY = Word()


def reduce(raw: Sequence[int], rank: int | None = None) -> Word:
    """Freely reduce a raw letter sequence; checks indices against ``rank``."""
    w = Word(raw)
    if rank is not None:
        for a in w.letters:
            if abs(a) > rank:
                raise WordError(f"generator index {abs(a) - 1} out of range for rank {rank}")
    return w


def commutator(a: Word, b: Word) -> Word:
    """[a, b] = a^-1 b^-1 a b."""
    return ~a * ~b * a * b


def left_normed(entries: Sequence[Word]) -> Word:
    """[[...[h1, h2], h3], ..., hk]."""
    if not entries:
        return IDENTITY
    w = entries[0]
    for h in entries[1:]:
        w = commutator(w, h)
    return w


BALL_CAP = 200_000


def ball(generators: Sequence[Word], radius: int, cap: int = BALL_CAP) -> list[Word]:
    """All distinct reduced products of at most ``radius`` factors drawn from
    the generators and their inverses, in graded-lex order."""
    if radius < 0:
        raise WordError("radius must be >= 0")
    seeds = []
    seen_seed = set()
    for g in generators:
        for h in (g, ~g):
            if h.letters not in seen_seed:
                seen_seed.add(h.letters)
                seeds.append(h)
    elements = {IDENTITY.letters: IDENTITY}
    frontier = [IDENTITY]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for s in seeds:
                p = w * s
                if p.letters not in elements:
                    elements[p.letters] = p
                    nxt.append(p)
                    if len(elements) > cap:
                        raise WordError(f"ball size exceeds cap {cap}")
        frontier = nxt
        if not frontier:
            break
    return sorted(elements.values(), key=Word.sort_key)


class FreeGroup:
    """Ambient free group: a rank and printable generator names."""

    __slots__ = ("rank", "names", "_name_index")

    def __init__(self, names: Sequence[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise WordError("duplicate generator names")
        self.rank = len(names)
        self.names = names
        self._name_index = {n: i for i, n in enumerate(names)}

    def gen(self, i: int) -> Word:
        if not 0 <= i < self.rank:
            raise WordError(f"generator index {i} out of range for rank {self.rank}")
        return Word((i + 1,))

    def gens(self) -> list[Word]:
        return [Word((i + 1,)) for i in range(self.rank)]

    def word(self, text: str) -> Word:
        return parse_word(text, self)

    def str_word(self, w: Word) -> str:
        if w.is_identity():
            return "1"
        parts = []
        i = 0
        letters = w.letters
        while i < len(letters):
            a = letters[i]
            j = i
            while j < len(letters) and letters[j] == a:
                j += 1
            e = (j - i) if a > 0 else -(j - i)
            name = self.names[abs(a) - 1]
            parts.append(name if e == 1 else f"{name}^{e}")
            i = j
        return "*".join(parts)

    def __repr__(self) -> str:
        return f"FreeGroup({', '.join(self.names)})"


# --- word grammar ------------------------------------------------------------
#
#   word := atom | word "*" word | word "^" INT | "[" word "," word "]"
#         | "(" word ")" | "1"
#
# Atoms are declared generator names; "^-1" is inversion; whitespace is
# insignificant.  "^" binds tighter than "*".


class _WordTokens:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str | None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        if self.pos >= len(self.text):
            return None
        return self.text[self.pos]

    def error(self, msg: str):
        raise WordError(f"word syntax error at column {self.pos + 1}: {msg} in {self.text!r}")

    def take_int(self) -> int:
        self.peek()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start or not self.text[start:self.pos].lstrip("+-"):
            self.error("expected an integer")
        return int(self.text[start:self.pos])

    def take_name(self) -> str:
        self.peek()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        if self.pos == start:
            self.error("expected a generator name")
        return self.text[start:self.pos]


def parse_word(text: str, group: FreeGroup) -> Word:
    toks = _WordTokens(text)
    w = _parse_product(toks, group)
    if toks.peek() is not None:
        toks.error("trailing input")
    return w


def _parse_product(toks: _WordTokens, group: FreeGroup) -> Word:
    w = _parse_power(toks, group)
    while True:
        c = toks.peek()
        if c == "*":
            toks.pos += 1
            w = w * _parse_power(toks, group)
        elif c is not None and (c.isalnum() or c in "[("):
            # juxtaposition also means product
            w = w * _parse_power(toks, group)
        else:
            return w


def _parse_power(toks: _WordTokens, group: FreeGroup) -> Word:
    w = _parse_atom(toks, group)
    while toks.peek() == "^":
        toks.pos += 1
        w = w ** toks.take_int()
    return w


def _parse_atom(toks: _WordTokens, group: FreeGroup) -> Word:
    c = toks.peek()
    if c is None:
        toks.error("unexpected end of input")
    if c == "(":
        toks.pos += 1
        w = _parse_product(toks, group)
        if toks.peek() != ")":
            toks.error("expected ')'")
        toks.pos += 1
        return w
    if c == "[":
        toks.pos += 1
        a = _parse_product(toks, group)
        if toks.peek() != ",":
            toks.error("expected ',' in commutator")
        toks.pos += 1
        b = _parse_product(toks, group)
        if toks.peek() != "]":
            toks.error("expected ']'")
        toks.pos += 1
        return commutator(a, b)
    if c == "1":
        toks.pos += 1
        return IDENTITY
    name = toks.take_name()
    idx = group._name_index.get(name)
    if idx is None:
        toks.error(f"unknown generator {name!r}")
    return group.gen(idx)


@lru_cache(maxsize=None)
def _hall_basis(rank: int, max_weight: int) -> tuple[tuple[tuple, int], ...]:
    """Left-normed Hall basic commutators as nested index trees with weights."""
    # trees: generator i -> ('g', i); bracket -> ('c', left, right)
    basic: list[tuple] = [("g", i) for i in range(rank)]
    weight = {t: 1 for t in basic}
    order = {t: n for n, t in enumerate(basic)}
    for w in range(2, max_weight + 1):
        new = []
        for left in list(basic):
            for right in list(basic):
                if weight[left] + weight[right] != w:
                    continue
                if order[left] <= order[right]:
                    continue
                if left[0] == "c" and order[left[2]] > order[right]:
                    continue
                new.append(("c", left, right))
        for t in new:
            weight[t] = w
            order[t] = len(order)
            basic.append(t)
    return tuple((t, weight[t]) for t in basic)


def basic_commutators(rank: int, max_weight: int) -> list[tuple[Word, int]]:
    """(word, weight) for Hall basic commutators of weight <= max_weight."""

    def build(tree) -> Word:
        if tree[0] == "g":
            return Word((tree[1] + 1,))
        return commutator(build(tree[1]), build(tree[2]))

    return [(build(t), w) for t, w in _hall_basis(rank, max_weight)]
