"""Graphs of free groups with trivial or infinite cyclic edge groups.

Generator names are global across the graph, so a word in any vertex group
is also a word in the presentation of every sub-graph containing that vertex.
The presentation of the fundamental group has the vertex generators (in vertex
order) followed by one stable letter per edge outside the spanning tree, named
by the edge id.
"""

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

from . import errors
from .lattice import (CokernelInvariants, IntMatrix, SnfResult, cokernel_invariants,
                      smith_normal_form)
from .words import (NAME_RE, Alphabet, Word, exponent_vector, format_tokens, free_reduce, invert,
                    multiply, tokenize)

TRIVIAL = "trivial"
CYCLIC = "Z"


@dataclass(frozen=True)
class Vertex:
    id: str
    alphabet: Alphabet


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    target: str
    kind: str = TRIVIAL
    u: Word | None = None  # over the source alphabet
    v: Word | None = None  # over the target alphabet

    @property
    def cyclic(self) -> bool:
        return self.kind == CYCLIC

    @property
    def is_loop(self) -> bool:
        return self.source == self.target


@dataclass(frozen=True)
class GraphOfGroups:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...] = ()

    @cached_property
    def vertex_map(self) -> dict[str, Vertex]:
        return {v.id: v for v in self.vertices}

    @cached_property
    def edge_map(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    def vertex(self, vid: str) -> Vertex:
        return self.vertex_map[vid]

    def edge(self, eid: str) -> Edge:
        try:
            return self.edge_map[eid]
        except KeyError:
            raise errors.UnknownEdge(f"no edge {eid!r}") from None

    @property
    def rank_sum(self) -> int:
        return sum(v.alphabet.rank for v in self.vertices)

    @property
    def cyclic_edge_count(self) -> int:
        return sum(e.cyclic for e in self.edges)

    @cached_property
    def generator_owner(self) -> dict[str, str]:
        return {name: v.id for v in self.vertices for name in v.alphabet.names}

    def subgraph(self, vertex_ids, edge_ids) -> "GraphOfGroups":
        vs, es = set(vertex_ids), set(edge_ids)
        return GraphOfGroups(tuple(v for v in self.vertices if v.id in vs),
                             tuple(e for e in self.edges if e.id in es))

    @cached_property
    def presentation(self) -> "Presentation":
        return _build_presentation(self)

    @cached_property
    def abelianization(self) -> "Abelianization":
        return _build_abelianization(self)

    @cached_property
    def free_model(self) -> "FreeModel | None":
        return _build_free_model(self)


def validate(vertices, edges) -> GraphOfGroups:
    """Check a raw graph and return it as an immutable :class:`GraphOfGroups`.

    ``vertices`` is a sequence of ``(id, Alphabet)``; ``edges`` a sequence of
    ``(id, source, target, kind, u, v)`` with ``u``/``v`` raw letter sequences
    (``None`` for trivial edges).
    """
    if not vertices:
        raise errors.ValidationError("a graph of groups needs at least one vertex", "vertices")
    vs, seen_gens = [], {}
    for i, (vid, alphabet) in enumerate(vertices):
        if any(v.id == vid for v in vs):
            raise errors.DuplicateId(f"duplicate vertex id {vid!r}", f"vertices[{i}].id")
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        for name in alphabet.names:
            if name in seen_gens:
                raise errors.DuplicateId(
                    f"generator {name!r} appears in vertices {seen_gens[name]!r} and {vid!r}",
                    f"vertices[{i}].generators")
            seen_gens[name] = vid
        vs.append(Vertex(vid, alphabet))
    vmap = {v.id: v for v in vs}

    es = []
    for i, (eid, src, tgt, kind, u, v) in enumerate(edges):
        path = f"edges[{i}]"
        if not isinstance(eid, str) or not NAME_RE.match(eid):
            raise errors.ValidationError(f"invalid edge id {eid!r}", f"{path}.id")
        if any(e.id == eid for e in es):
            raise errors.DuplicateId(f"duplicate edge id {eid!r}", f"{path}.id")
        if eid in seen_gens:
            raise errors.DuplicateId(f"edge id {eid!r} clashes with a generator name", f"{path}.id")
        for end, name in (("from", src), ("to", tgt)):
            if name not in vmap:
                raise errors.UnknownVertexRef(f"edge {eid!r} refers to unknown vertex {name!r}",
                                              f"{path}.{end}")
        if kind == TRIVIAL:
            if u is not None or v is not None:
                raise errors.ValidationError(f"trivial edge {eid!r} must not carry words", path)
            es.append(Edge(eid, src, tgt))
            continue
        if kind != CYCLIC:
            raise errors.ValidationError(f"unknown edge group {kind!r}", f"{path}.edge_group")
        words = []
        for key, raw, vid in (("u", u, src), ("v", v, tgt)):
            if raw is None:
                raise errors.ValidationError(f"{path}.{key} missing", f"{path}.{key}")
            w = free_reduce(raw, vmap[vid].alphabet.rank)
            if not w:
                raise errors.TrivialEdgeWord(f"{path}.{key} reduces to the identity", f"{path}.{key}")
            words.append(w)
        es.append(Edge(eid, src, tgt, CYCLIC, *words))

    g = GraphOfGroups(tuple(vs), tuple(es))
    if len(_component(g, vs[0].id, ())) != len(vs):
        raise errors.DisconnectedGraph("the underlying graph is not connected", "edges")
    return g


def _component(g: GraphOfGroups, start: str, removed) -> set[str]:
    seen, todo = {start}, [start]
    while todo:
        x = todo.pop()
        for e in g.edges:
            if e.id in removed:
                continue
            for a, b in ((e.source, e.target), (e.target, e.source)):
                if a == x and b not in seen:
                    seen.add(b)
                    todo.append(b)
    return seen


def spanning_tree(g: GraphOfGroups) -> frozenset[str]:
    """BFS from the least vertex id, scanning incident edges in id order."""
    start = min(v.id for v in g.vertices)
    seen, tree, queue = {start}, set(), deque([start])
    edges = sorted(g.edges, key=lambda e: e.id)
    while queue:
        x = queue.popleft()
        for e in edges:
            if e.is_loop or x not in (e.source, e.target):
                continue
            y = e.target if e.source == x else e.source
            if y not in seen:
                seen.add(y)
                tree.add(e.id)
                queue.append(y)
    return frozenset(tree)


class Presentation(NamedTuple):
    generators: tuple[str, ...]
    relations: tuple[tuple[str, Word], ...]  # (edge id, relator)
    tree: frozenset[str]
    offsets: dict  # vertex id -> index offset of its first generator
    stable: dict  # edge id -> generator index (1-based) of its stable letter

    def lift(self, vertex_id: str, w: Word) -> Word:
        """Re-express a vertex-group word over the presentation generators."""
        off = self.offsets[vertex_id]
        return tuple(x + off if x > 0 else x - off for x in w)

    def format(self, w: Word) -> str:
        return format_tokens((self.generators[abs(x) - 1], 1 if x > 0 else -1) for x in w)

    def parse(self, text: str) -> Word:
        letters = []
        for tok in tokenize(text):
            if tok.name not in self.generators:
                raise errors.WordSyntaxError(
                    f"unknown generator {tok.name!r} at offset {tok.position}", tok.position)
            i = self.generators.index(tok.name) + 1
            letters.extend([i if tok.exponent > 0 else -i] * abs(tok.exponent))
        return free_reduce(letters)


def _build_presentation(g: GraphOfGroups) -> Presentation:
    gens, offsets = [], {}
    for v in g.vertices:
        offsets[v.id] = len(gens)
        gens.extend(v.alphabet.names)
    tree = spanning_tree(g)
    stable = {}
    for e in sorted(g.edges, key=lambda e: e.id):
        if e.id not in tree:
            gens.append(e.id)
            stable[e.id] = len(gens)
    pres = Presentation(tuple(gens), (), tree, offsets, stable)
    rels = []
    for e in sorted(g.edges, key=lambda e: e.id):
        if not e.cyclic:
            continue
        u, v = pres.lift(e.source, e.u), pres.lift(e.target, e.v)
        if e.id in tree:
            rels.append((e.id, free_reduce(u + invert(v))))
        else:
            t = stable[e.id]
            rels.append((e.id, free_reduce((t,) + u + (-t,) + invert(v))))
    return pres._replace(relations=tuple(rels))


@dataclass(frozen=True)
class Abelianization:
    """``W_ab`` as ``Z^n / rows`` over the vertex generators, plus free stable letters."""
    vertex_rank: int
    stable_letters: tuple[str, ...]
    relations: IntMatrix
    snf: SnfResult
    invariants: CokernelInvariants  # includes the stable-letter summand

    @property
    def free_rank(self) -> int:
        return self.invariants.free_rank

    @property
    def torsion(self) -> tuple[int, ...]:
        return self.invariants.torsion

    def image(self, vec) -> tuple[tuple[tuple[int, int], ...], tuple[int, ...]]:
        """Coordinates of a presentation exponent vector in ``W_ab``.

        Returns ``(torsion, free)``: ``torsion`` holds ``(residue, modulus)``
        pairs for the cyclic factors Z/d, ``free`` the coordinates in the free
        part (stable letters last).
        """
        n = self.vertex_rank
        head = vec[:n]
        v = self.snf.V
        y = [sum(head[k] * v[k, j] for k in range(n)) for j in range(n)]
        diag = self.snf.D.diagonal()
        torsion, free = [], []
        for j in range(n):
            d = diag[j] if j < len(diag) else 0
            if d == 0:
                free.append(y[j])
            elif d > 1:
                torsion.append((y[j] % d, d))
        free.extend(vec[n:])
        return tuple(torsion), tuple(free)


class FreeModel(NamedTuple):
    """An isomorphism of ``pi_1`` onto a free group found by Tietze elimination.

    ``basis`` lists the surviving presentation generators; ``images[i]`` is
    the image of presentation generator ``i + 1`` as a word in the basis.
    """
    basis: tuple[str, ...]
    images: tuple[Word, ...]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def map(self, w: Word) -> Word:
        return free_reduce(y for x in w for y in (self.images[x - 1] if x > 0
                                                  else invert(self.images[-x - 1])))


def _substitute(w: Word, gen: int, by: Word) -> Word:
    return free_reduce(y for x in w for y in ((x,) if abs(x) != gen else
                                              (by if x > 0 else invert(by))))


def _build_free_model(g: GraphOfGroups) -> FreeModel | None:
    """Eliminate a generator occurring once in some relator until none are left.

    Returns None when some relator has no such generator (the group may still
    be free, but this pass cannot tell).
    """
    pres = g.presentation
    k = len(pres.generators)
    images = [(i,) for i in range(1, k + 1)]
    rels = [r for _, r in pres.relations if r]
    eliminated = set()
    while rels:
        for ri, r in enumerate(rels):
            counts = {}
            for x in r:
                counts[abs(x)] = counts.get(abs(x), 0) + 1
            once = sorted(y for y, c in counts.items() if c == 1)
            if once:
                break
        else:
            return None
        y = once[0]
        i = next(j for j, x in enumerate(r) if abs(x) == y)
        head, tail = r[:i], r[i + 1:]
        # head y tail = 1  =>  y = head^-1 tail^-1 ;  head y^-1 tail = 1  =>  y = tail head
        by = multiply(invert(head), invert(tail)) if r[i] > 0 else multiply(tail, head)
        eliminated.add(y)
        rels = [w for w in (_substitute(x, y, by) for j, x in enumerate(rels) if j != ri) if w]
        images = [_substitute(w, y, by) for w in images]
    keep = [i for i in range(1, k + 1) if i not in eliminated]
    renumber = {old: new for new, old in enumerate(keep, 1)}
    images = [tuple(renumber[x] if x > 0 else -renumber[-x] for x in w) for w in images]
    return FreeModel(tuple(pres.generators[i - 1] for i in keep), tuple(images))


def _build_abelianization(g: GraphOfGroups) -> Abelianization:
    n = g.rank_sum
    pres = g.presentation
    rows = []
    for e in sorted(g.edges, key=lambda e: e.id):
        if e.cyclic:
            a = exponent_vector(pres.lift(e.source, e.u), n)
            b = exponent_vector(pres.lift(e.target, e.v), n)
            rows.append([x - y for x, y in zip(a, b)])
    m = IntMatrix.from_rows(rows, n)
    inv = cokernel_invariants(m, n)
    stable = tuple(sorted(pres.stable))
    return Abelianization(n, stable, m, smith_normal_form(m),
                          CokernelInvariants(inv.free_rank + len(stable), inv.torsion))


def abelianization(g: GraphOfGroups) -> Abelianization:
    return g.abelianization


def presentation_vector(g: GraphOfGroups, w: Word) -> tuple[int, ...]:
    return exponent_vector(w, len(g.presentation.generators))


def euler_characteristic(g: GraphOfGroups) -> int:
    """The offset used in the rank formula: ``|V| - |E| - 1``."""
    return len(g.vertices) - len(g.edges) - 1


def expected_rank(g: GraphOfGroups) -> int:
    return g.rank_sum - g.cyclic_edge_count - euler_characteristic(g)


@dataclass(frozen=True)
class Amalgam:
    edge: str
    left: GraphOfGroups
    right: GraphOfGroups
    u: Word  # presentation word of ``left``
    v: Word  # presentation word of ``right``
    cyclic: bool


@dataclass(frozen=True)
class Hnn:
    edge: str
    base: GraphOfGroups
    u: Word  # presentation words of ``base``
    v: Word
    cyclic: bool


def decompose(g: GraphOfGroups, edge_id: str) -> Amalgam | Hnn:
    """Remove one edge and describe ``W`` as an amalgam or HNN extension of the rest."""
    e = g.edge(edge_id)
    rest = [x.id for x in g.edges if x.id != edge_id]
    side = _component(g, e.source, {edge_id})
    if e.target in side:
        base = g.subgraph(side, rest)
        u = base.presentation.lift(e.source, e.u) if e.cyclic else ()
        v = base.presentation.lift(e.target, e.v) if e.cyclic else ()
        return Hnn(edge_id, base, u, v, e.cyclic)
    other = {v.id for v in g.vertices} - side
    left = g.subgraph(side, [x for x in rest if g.edge(x).source in side])
    right = g.subgraph(other, [x for x in rest if g.edge(x).source in other])
    u = left.presentation.lift(e.source, e.u) if e.cyclic else ()
    v = right.presentation.lift(e.target, e.v) if e.cyclic else ()
    return Amalgam(edge_id, left, right, u, v, e.cyclic)


def reassemble(d: Amalgam | Hnn, edge: Edge) -> GraphOfGroups:
    """Glue a decomposition back together along ``edge``; inverse of :func:`decompose`."""
    if isinstance(d, Hnn):
        parts = [d.base]
    else:
        parts = [d.left, d.right]
    return GraphOfGroups(tuple(v for p in parts for v in p.vertices),
                         tuple(e for p in parts for e in p.edges) + (edge,))
