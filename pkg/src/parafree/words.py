"""Words in finite-rank free groups.

A word is a tuple of nonzero ints: ``+i`` is the i-th generator (1-based),
``-i`` its inverse. Generator names only exist at the parsing boundary, see
:class:`Alphabet`.
"""

import re
from dataclasses import dataclass
from math import gcd
from typing import Iterable, NamedTuple

from .errors import EmptyWordError, InvalidLetter, ValidationError, WordSyntaxError

Word = tuple

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_TOKEN_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)(?:\^([+-]?\d+))?\Z")


def free_reduce(raw: Iterable[int], rank: int | None = None) -> Word:
    """Freely reduce a sequence of signed letters.

    >>> free_reduce([1, 2, -2, 1])
    (1, 1)
    >>> free_reduce([1, -1])
    ()
    """
    out = []
    for letter in raw:
        if letter == 0 or (rank is not None and abs(letter) > rank):
            raise InvalidLetter(f"letter {letter} outside alphabet of rank {rank}")
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def invert(w: Word) -> Word:
    return tuple(-x for x in reversed(w))


def multiply(*words: Word) -> Word:
    return free_reduce(x for w in words for x in w)


def power(w: Word, k: int) -> Word:
    if k < 0:
        w, k = invert(w), -k
    return free_reduce(w * k)


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Split a reduced word as ``conjugator . core . conjugator^-1``.

    >>> cyclic_reduce((1, 2, -1))
    ((2,), (1,))
    """
    n = len(w)
    i = 0
    while i < n // 2 and w[i] == -w[n - 1 - i]:
        i += 1
    return w[i:n - i], w[:i]


def _smallest_period(s: Word) -> int:
    # prefix function (KMP failure function)
    fail = [0] * len(s)
    k = 0
    for i in range(1, len(s)):
        while k and s[i] != s[k]:
            k = fail[k - 1]
        if s[i] == s[k]:
            k += 1
        fail[i] = k
    p = len(s) - fail[-1]
    return p if len(s) % p == 0 else len(s)


class RootDecomposition(NamedTuple):
    conjugator: Word
    root: Word
    exponent: int

    def expand(self) -> Word:
        c, r, k = self
        return multiply(c, power(r, k), invert(c))


def primitive_root(w: Word) -> RootDecomposition:
    """Write ``w = c r^k c^-1`` with ``r`` cyclically reduced and not a proper power.

    ``k >= 2`` exactly when ``w`` is a proper power in the free group.

    >>> primitive_root((1, 2, 1, 2))
    RootDecomposition(conjugator=(), root=(1, 2), exponent=2)
    """
    if not w:
        raise EmptyWordError("the identity has no root decomposition")
    core, conj = cyclic_reduce(w)
    p = _smallest_period(core)
    return RootDecomposition(conj, core[:p], len(core) // p)


def is_proper_power(w: Word) -> bool:
    return primitive_root(w).exponent >= 2


def exponent_vector(w: Word, rank: int) -> tuple[int, ...]:
    vec = [0] * rank
    for x in w:
        vec[abs(x) - 1] += 1 if x > 0 else -1
    return tuple(vec)


def content(vec: Iterable[int]) -> int:
    g = 0
    for x in vec:
        g = gcd(g, x)
    return g


class Token(NamedTuple):
    name: str
    exponent: int
    position: int


def tokenize(text: str) -> list[Token]:
    """Split ``"a b^-2 a^3"`` into (name, exponent, char offset) triples."""
    tokens = []
    for m in re.finditer(r"\S+", text):
        tm = _TOKEN_RE.match(m.group())
        if tm is None:
            raise WordSyntaxError(f"bad token {m.group()!r} at offset {m.start()}", m.start())
        exp = int(tm.group(2)) if tm.group(2) is not None else 1
        if exp == 0:
            raise WordSyntaxError(f"zero exponent in {m.group()!r} at offset {m.start()}", m.start())
        tokens.append(Token(tm.group(1), exp, m.start()))
    return tokens


def format_tokens(pairs: Iterable[tuple[str, int]]) -> str:
    """Inverse of :func:`tokenize`, merging runs of the same name."""
    merged: list[list] = []
    for name, exp in pairs:
        if merged and merged[-1][0] == name:
            merged[-1][1] += exp
            if merged[-1][1] == 0:
                merged.pop()
        else:
            merged.append([name, exp])
    return " ".join(n if e == 1 else f"{n}^{e}" for n, e in merged)


@dataclass(frozen=True)
class Alphabet:
    names: tuple[str, ...]

    def __post_init__(self):
        if not self.names:
            raise ValidationError("an alphabet needs at least one generator")
        for name in self.names:
            if not isinstance(name, str) or not NAME_RE.match(name):
                raise ValidationError(f"invalid generator name {name!r}")
        if len(set(self.names)) != len(self.names):
            raise ValidationError(f"repeated generator names in {list(self.names)}")

    @property
    def rank(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name) + 1
        except ValueError:
            raise WordSyntaxError(f"unknown generator {name!r}") from None

    def parse(self, text: str) -> Word:
        letters = []
        for tok in tokenize(text):
            if tok.name not in self.names:
                raise WordSyntaxError(f"unknown generator {tok.name!r} at offset {tok.position}",
                                      tok.position)
            i = self.names.index(tok.name) + 1
            letters.extend([i if tok.exponent > 0 else -i] * abs(tok.exponent))
        return free_reduce(letters)

    def format(self, w: Word) -> str:
        return format_tokens((self.names[abs(x) - 1], 1 if x > 0 else -1) for x in w)
