"""Word problem for one-edge extensions of free groups with cyclic edge groups.

A :class:`MixedWord` is a tuple of items, each either a stable letter ``+1`` /
``-1`` or a syllable ``(tag, word)`` where ``word`` is a free-group word over
the vertex group named by ``tag``. Reduction to Britton / reduced-sequence
normal form decides triviality exactly when the pinch test (membership in a
cyclic subgroup of a free group) is available, i.e. for at most one edge.
"""

from dataclasses import dataclass

from .errors import WordSyntaxError
from .graph import GraphOfGroups
from .verdict import Determination
from .words import (Alphabet, Word, cyclic_reduce, format_tokens, free_reduce, invert, multiply,
                    power, primitive_root, tokenize)

LEFT, RIGHT, BASE = "L", "R", "B"


@dataclass(frozen=True)
class MixedWord:
    items: tuple = ()

    def inverse(self) -> "MixedWord":
        return MixedWord(tuple(-x if isinstance(x, int) else (x[0], invert(x[1]))
                               for x in reversed(self.items)))

    def __mul__(self, other: "MixedWord") -> "MixedWord":
        return MixedWord(self.items + other.items)

    def __len__(self):
        return len(self.items)

    def stable_count(self) -> int:
        return sum(isinstance(x, int) for x in self.items)


@dataclass(frozen=True)
class NormalForm:
    word: MixedWord
    trivial: bool


def cyclic_membership(alphabet: Alphabet | None, w: Word, u: Word) -> int | None:
    """Return ``k`` with ``w == u^k`` in the free group, or None."""
    if not w:
        return 0
    if not u:
        return None
    c, r, m = primitive_root(u)
    inner = multiply(invert(c), w, c)
    core, conj = cyclic_reduce(inner)
    if conj or len(core) % len(r):
        return None
    j = len(core) // len(r)
    if core == r * j:
        pass
    elif core == invert(r) * j:
        j = -j
    else:
        return None
    return j // m if j % m == 0 else None


def _check(item, tags, rank_of):
    if isinstance(item, bool) or not (isinstance(item, int) or isinstance(item, tuple)):
        raise WordSyntaxError(f"malformed token {item!r}")
    if isinstance(item, int):
        if item not in (1, -1):
            raise WordSyntaxError(f"stable letter exponent must be +1 or -1, got {item}")
        return
    if len(item) != 2 or item[0] not in tags:
        raise WordSyntaxError(f"malformed syllable {item!r}")
    rank = rank_of[item[0]]
    if any(not isinstance(x, int) or x == 0 or abs(x) > rank for x in item[1]):
        raise WordSyntaxError(f"letter outside the alphabet in {item!r}")


def britton_reduce(base: Alphabet, u: Word, v: Word, mw: MixedWord) -> NormalForm:
    """Britton-reduce ``mw`` in ``<base, t | t u t^-1 = v>``."""
    words, ts = [()], []
    for item in mw.items:
        _check(item, (BASE,), {BASE: base.rank})
        if not isinstance(item, int):
            words[-1] = multiply(words[-1], item[1])
            continue
        if ts and ts[-1] == -item:
            k = cyclic_membership(base, words[-1], u if ts[-1] == 1 else v)
            if k is not None:
                repl = power(v, k) if ts[-1] == 1 else power(u, k)
                ts.pop()
                words.pop()
                words[-1] = multiply(words[-1], repl)
                continue
        ts.append(item)
        words.append(())
    items = []
    for i, w in enumerate(words):
        if w:
            items.append((BASE, w))
        if i < len(ts):
            items.append(ts[i])
    return NormalForm(MixedWord(tuple(items)), not items)


def amalgam_reduce(left: Alphabet, right: Alphabet, u: Word, v: Word, mw: MixedWord) -> NormalForm:
    """Reduce ``mw`` to a reduced sequence in ``left *_{u=v} right``."""
    sylls = []
    for item in mw.items:
        _check(item, (LEFT, RIGHT), {LEFT: left.rank, RIGHT: right.rank})
        if isinstance(item, int):
            raise WordSyntaxError("an amalgam has no stable letter")
        sylls.append(item)
    gens = {LEFT: u, RIGHT: v}
    other = {LEFT: RIGHT, RIGHT: LEFT}
    while True:
        merged = []
        for tag, w in sylls:
            if merged and merged[-1][0] == tag:
                w = multiply(merged.pop()[1], w)
            if w:
                merged.append((tag, w))
        sylls = merged
        if len(sylls) < 2:
            break
        for i, (tag, w) in enumerate(sylls):
            k = cyclic_membership(None, w, gens[tag])
            if k is not None:
                sylls[i] = (other[tag], power(gens[other[tag]], k))
                break
        else:
            break
    return NormalForm(MixedWord(tuple(sylls)), not sylls)


def parse_mixed(g: GraphOfGroups, text: str) -> MixedWord:
    """Parse ``"e a b^-1 e^-1"``: generator names and stable letters named by edge id.

    Syllables are tagged with vertex ids.
    """
    owner = g.generator_owner
    edges = {e.id for e in g.edges}
    items = []
    for tok in tokenize(text):
        if tok.name in owner:
            vid = owner[tok.name]
            i = g.vertex(vid).alphabet.index(tok.name)
            letters = [i if tok.exponent > 0 else -i] * abs(tok.exponent)
            if items and not isinstance(items[-1], int) and items[-1][0] == vid:
                items[-1] = (vid, items[-1][1] + tuple(letters))
            else:
                items.append((vid, tuple(letters)))
        elif tok.name in edges:
            items.extend([1 if tok.exponent > 0 else -1] * abs(tok.exponent))
        else:
            raise WordSyntaxError(f"unknown token {tok.name!r} at offset {tok.position}",
                                  tok.position)
    return MixedWord(tuple((x[0], free_reduce(x[1])) if not isinstance(x, int) else x
                           for x in items))


def format_mixed(g: GraphOfGroups, mw: MixedWord, stable: str = "t") -> str:
    pairs = []
    for item in mw.items:
        if isinstance(item, int):
            pairs.append((stable, item))
        else:
            names = g.vertex(item[0]).alphabet.names
            pairs.extend((names[abs(x) - 1], 1 if x > 0 else -1) for x in item[1])
    return format_tokens(pairs)


def reduce_in(g: GraphOfGroups, mw: MixedWord) -> NormalForm | None:
    """Normal form of ``mw`` in ``pi_1(g)`` when ``g`` has at most one edge, else None."""
    if len(g.edges) > 1:
        return None
    if not g.edges:
        (vertex,) = g.vertices
        if mw.stable_count():
            raise WordSyntaxError("a single vertex group has no stable letter")
        w = free_reduce(x for item in mw.items for x in item[1])
        return NormalForm(MixedWord(((vertex.id, w),) if w else ()), not w)
    (e,) = g.edges
    u, v = (e.u, e.v) if e.cyclic else ((), ())
    if e.is_loop:
        alpha = g.vertex(e.source).alphabet
        nf = britton_reduce(alpha, u, v, MixedWord(tuple(
            x if isinstance(x, int) else (BASE, x[1]) for x in mw.items)))
        return NormalForm(MixedWord(tuple(
            x if isinstance(x, int) else (e.source, x[1]) for x in nf.word.items)), nf.trivial)
    tag = {e.source: LEFT, e.target: RIGHT}
    back = {LEFT: e.source, RIGHT: e.target}
    if mw.stable_count():
        raise WordSyntaxError(f"edge {e.id!r} is a tree edge and has no stable letter")
    nf = amalgam_reduce(g.vertex(e.source).alphabet, g.vertex(e.target).alphabet, u, v,
                        MixedWord(tuple((tag[x[0]], x[1]) for x in mw.items)))
    return NormalForm(MixedWord(tuple((back[t], w) for t, w in nf.word.items)), nf.trivial)


def is_nontrivial(g: GraphOfGroups, mw: MixedWord) -> Determination:
    """Exact for graphs with at most one edge; unknown beyond that."""
    nf = reduce_in(g, mw)
    if nf is None:
        return Determination.unknown(reason="word problem only decided for graphs with at most "
                                            "one edge")
    stable = g.edges[0].id if g.edges else "t"
    ev = {"normal_form": format_mixed(g, nf.word, stable)}
    return Determination.no(**ev) if nf.trivial else Determination.yes(**ev)
