"""Finite nilpotent quotients witnessing that an edge word survives.

Targets are the groups UT(n, F_p) of upper unitriangular matrices. An element
is stored by its strictly upper triangular entries in row-major order; the
same order, read as base-p digits, indexes the elements during the search, so
index order is lexicographic order of entry vectors.
"""

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import EdgeNotCyclic, IncompatibleTargets, UnknownGenerator, ValidationError
from .graph import GraphOfGroups, presentation_vector
from .verdict import Determination

ABELIAN_PRIMES = (2, 3, 5, 7, 11, 13)
TABLE_LIMIT = 1024


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, int(p ** 0.5) + 1))


def _positions(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


@dataclass(frozen=True, order=True)
class UtElement:
    n: int
    p: int
    entries: tuple

    @classmethod
    def identity(cls, n, p):
        return cls(n, p, (0,) * (n * (n - 1) // 2))

    @classmethod
    def elementary(cls, n, p, i, j, value=1):
        """The matrix with a single off-diagonal entry at (i, j), 1-based."""
        entries = [0] * (n * (n - 1) // 2)
        entries[_positions(n).index((i - 1, j - 1))] = value % p
        return cls(n, p, tuple(entries))

    @classmethod
    def from_matrix(cls, rows, p):
        n = len(rows)
        return cls(n, p, tuple(rows[i][j] % p for i, j in _positions(n)))

    def matrix(self) -> list[list[int]]:
        m = [[int(i == j) for j in range(self.n)] for i in range(self.n)]
        for (i, j), x in zip(_positions(self.n), self.entries):
            m[i][j] = x
        return m

    def _check(self, other):
        if (self.n, self.p) != (other.n, other.p):
            raise IncompatibleTargets(f"UT({self.n},{self.p}) vs UT({other.n},{other.p})")

    def __mul__(self, other: "UtElement") -> "UtElement":
        self._check(other)
        a, b, n, p = self.matrix(), other.matrix(), self.n, self.p
        return UtElement(n, p, tuple(
            (a[i][j] + b[i][j] + sum(a[i][k] * b[k][j] for k in range(i + 1, j))) % p
            for i, j in _positions(n)))

    def inverse(self) -> "UtElement":
        a, n, p = self.matrix(), self.n, self.p
        x = [[0] * n for _ in range(n)]
        for gap in range(1, n):
            for i in range(n - gap):
                j = i + gap
                x[i][j] = (-a[i][j] - sum(a[i][k] * x[k][j] for k in range(i + 1, j))) % p
        return UtElement(n, p, tuple(x[i][j] for i, j in _positions(n)))

    def is_identity(self) -> bool:
        return not any(self.entries)

    def index(self) -> int:
        out = 0
        for x in self.entries:
            out = out * self.p + x
        return out

    @classmethod
    def from_index(cls, n, p, idx):
        m = n * (n - 1) // 2
        digits = []
        for _ in range(m):
            idx, r = divmod(idx, p)
            digits.append(r)
        return cls(n, p, tuple(reversed(digits)))


def commutator(x: UtElement, y: UtElement) -> UtElement:
    return x * y * x.inverse() * y.inverse()


def eval_word(images: dict, word, generators=None) -> UtElement:
    """Evaluate a word under a generator assignment.

    ``word`` is either a sequence of ``(name, exponent)`` pairs or a signed
    index word together with the ``generators`` name list.
    """
    if generators is not None:
        word = [(generators[abs(x) - 1], 1 if x > 0 else -1) for x in word]
    targets = {(e.n, e.p) for e in images.values()}
    if len(targets) > 1:
        raise IncompatibleTargets(f"images live in several groups: {sorted(targets)}")
    if not images:
        raise UnknownGenerator("no generator images given")
    n, p = targets.pop()
    out = UtElement.identity(n, p)
    for name, k in word:
        if name not in images:
            raise UnknownGenerator(f"no image for generator {name!r}")
        g = images[name] if k > 0 else images[name].inverse()
        for _ in range(abs(k)):
            out = out * g
    return out


@dataclass(frozen=True)
class SearchBounds:
    dims: tuple = (3, 4)
    primes: tuple = (2, 3, 5)
    exhaustive_cap: int = 10 ** 7
    sample_count: int = 10 ** 5
    seed: int = 0

    def __post_init__(self):
        if not self.dims or any(not 3 <= n <= 5 for n in self.dims):
            raise ValidationError("dims must lie in 3..5")
        if not self.primes or any(not _is_prime(p) for p in self.primes):
            raise ValidationError("primes must be prime")
        if self.exhaustive_cap < 1 or self.sample_count < 0:
            raise ValidationError("cap must be positive and samples nonnegative")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")

    def to_json(self) -> dict:
        return {"dims": list(self.dims), "primes": list(self.primes),
                "exhaustive_cap": self.exhaustive_cap, "sample_count": self.sample_count,
                "seed": self.seed}


@dataclass(frozen=True)
class NilWitness:
    n: int
    p: int
    edge: str
    images: dict  # generator name -> UtElement
    surviving_word: str
    checked_relations: tuple
    phase: str = "exhaustive"

    def to_json(self) -> dict:
        return {
            "n": self.n, "p": self.p, "edge": self.edge, "phase": self.phase,
            "surviving_word": self.surviving_word,
            "checked_relations": list(self.checked_relations),
            "images": {k: v.matrix() for k, v in self.images.items()},
        }


@dataclass(frozen=True)
class NoWitnessUpToBound:
    edge: str
    bounds: SearchBounds
    explored: tuple = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {"edge": self.edge, "bounds": self.bounds.to_json(), "explored": list(self.explored)}


class _Target:
    """UT(n, p) with elements addressed by index; small groups get lookup tables."""

    def __init__(self, n, p):
        self.n, self.p = n, p
        self.size = p ** (n * (n - 1) // 2)
        self.table = self.inv = None
        if self.size <= TABLE_LIMIT:
            elems = [UtElement.from_index(n, p, i) for i in range(self.size)]
            self.table = [[(a * b).index() for b in elems] for a in elems]
            self.inv = [a.inverse().index() for a in elems]

    def mul(self, i, j):
        if self.table is not None:
            return self.table[i][j]
        return (UtElement.from_index(self.n, self.p, i) * UtElement.from_index(self.n, self.p, j)).index()

    def inverse(self, i):
        if self.inv is not None:
            return self.inv[i]
        return UtElement.from_index(self.n, self.p, i).inverse().index()

    def evaluate(self, word, assign):
        out = 0
        for x in word:
            g = assign[x - 1] if x > 0 else self.inverse(assign[-x - 1])
            out = self.mul(out, g)
        return out


@lru_cache(maxsize=16)
def _target(n, p) -> _Target:
    return _Target(n, p)


def _checks(k, relations, survivor):
    """Group relator words by the depth at which all their generators are assigned."""
    at = [[] for _ in range(k)]
    for w in relations:
        if w:
            at[max(abs(x) for x in w) - 1].append(w)
    survive_depth = max(abs(x) for x in survivor) - 1
    return at, survive_depth


def _search_range(n, p, k, relations, survivor, lo, hi):
    """First tuple (in lexicographic order) with rank in [lo, hi) that is a witness."""
    tgt = _target(n, p)
    size = tgt.size
    at, sdepth = _checks(k, relations, survivor)
    weights = [size ** (k - 1 - d) for d in range(k)]
    assign = [0] * k

    def rec(d, base):
        if d == k:
            return base
        w = weights[d]
        start = max(0, (lo - base) // w)
        stop = min(size, -((base - hi) // w))
        for x in range(start, stop):
            assign[d] = x
            if any(tgt.evaluate(r, assign) for r in at[d]):
                continue
            if d == sdepth and tgt.evaluate(survivor, assign) == 0:
                continue
            found = rec(d + 1, base + x * w)
            if found is not None:
                return found
        return None

    found = rec(0, 0)
    return None if found is None else (found, tuple(assign))


def _sample_range(n, p, k, relations, survivor, seed, lo, hi):
    """First sample index in [lo, hi) whose seeded random tuple is a witness."""
    tgt = _target(n, p)
    for i in range(lo, hi):
        rng = random.Random((seed << 32) + i)
        assign = [rng.randrange(tgt.size) for _ in range(k)]
        if tgt.evaluate(survivor, assign) == 0:
            continue
        if all(tgt.evaluate(r, assign) == 0 for r in relations):
            return i, tuple(assign)
    return None


def _chunks(lo, hi, parts):
    step = -(-(hi - lo) // parts) or 1
    return [(a, min(a + step, hi)) for a in range(lo, hi, step)]


def _first(fn, args, lo, hi, workers):
    if workers <= 1 or hi - lo < 2:
        return fn(*args, lo, hi)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args, a, b) for a, b in _chunks(lo, hi, workers)]
        results = [f.result() for f in futures]
    hits = [r for r in results if r is not None]
    return min(hits) if hits else None


def _edge_data(g: GraphOfGroups, edge_id: str):
    e = g.edge(edge_id)
    if not e.cyclic:
        raise EdgeNotCyclic(f"edge {edge_id!r} has trivial edge group")
    pres = g.presentation
    return e, pres, pres.lift(e.source, e.u)


def search_witness(g: GraphOfGroups, edge_id: str, bounds: SearchBounds = SearchBounds(),
                   workers: int = 1):
    """Search UT(n, p) images of the presentation in which the edge word survives.

    Returns a :class:`NilWitness` or :class:`NoWitnessUpToBound`. The result
    depends only on ``(g, edge_id, bounds)``, not on ``workers``.
    """
    e, pres, survivor = _edge_data(g, edge_id)
    k = len(pres.generators)
    relations = tuple(r for _, r in pres.relations)
    explored = []
    for n in bounds.dims:
        for p in bounds.primes:
            size = _target(n, p).size
            total = size ** k
            limit = min(total, bounds.exhaustive_cap)
            args = (n, p, k, relations, survivor)
            hit, phase = _first(_search_range, args, 0, limit, workers), "exhaustive"
            samples = 0
            if hit is None and total > limit:
                samples = bounds.sample_count
                hit, phase = _first(_sample_range, args + (bounds.seed,), 0, samples, workers), "sampled"
            if hit is not None:
                images = {name: UtElement.from_index(n, p, x)
                          for name, x in zip(pres.generators, hit[1])}
                w = NilWitness(n, p, edge_id, images, pres.format(survivor),
                               tuple(eid for eid, _ in pres.relations), phase)
                return w
            explored.append({"n": n, "p": p, "tuples": limit, "exhaustive": limit == total,
                             "samples": samples})
    return NoWitnessUpToBound(edge_id, bounds, tuple(explored))


def _matmul_mod(a, b, p):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) % p for j in range(n)] for i in range(n)]


def _matinv_mod(a, p):
    # unitriangular: (I + N)^-1 = I - N + N^2 - ...
    n = len(a)
    ident = [[int(i == j) for j in range(n)] for i in range(n)]
    nil = [[(a[i][j] - ident[i][j]) % p for j in range(n)] for i in range(n)]
    out, term = ident, ident
    for k in range(1, n):
        term = _matmul_mod(term, nil, p)
        sign = -1 if k % 2 else 1
        out = [[(out[i][j] + sign * term[i][j]) % p for j in range(n)] for i in range(n)]
    return out


def verify_witness(g: GraphOfGroups, w: NilWitness) -> bool:
    """Recheck a witness from scratch with plain matrix arithmetic mod p."""
    try:
        e, pres, survivor = _edge_data(g, w.edge)
    except Exception:
        return False
    if set(w.images) != set(pres.generators):
        return False
    mats = {}
    for name, x in w.images.items():
        m = x.matrix()
        if len(m) != w.n or x.p != w.p:
            return False
        if any(m[i][j] != int(i == j) for i in range(w.n) for j in range(i + 1)):
            return False
        mats[name] = m
    ident = [[int(i == j) for j in range(w.n)] for i in range(w.n)]

    def ev(word):
        out = ident
        for x in word:
            m = mats[pres.generators[abs(x) - 1]]
            out = _matmul_mod(out, m if x > 0 else _matinv_mod(m, w.p), w.p)
        return out

    if any(ev(r) != ident for _, r in pres.relations):
        return False
    return ev(survivor) != ident


def abelian_witness(g: GraphOfGroups, edge_id: str) -> Determination:
    """Does the edge word survive in ``W_ab / p W_ab`` for some prime p <= 13?"""
    e, pres, survivor = _edge_data(g, edge_id)
    ab = g.abelianization
    torsion, free = ab.image(presentation_vector(g, survivor))
    image = {"free": list(free), "torsion": [list(t) for t in torsion]}
    for p in ABELIAN_PRIMES:
        if any(x % p for x in free) or any(d % p == 0 and r % p for r, d in torsion):
            return Determination.yes(tier="abelian", prime=p, image=image)
    return Determination.unknown(tier="abelian", reason="image vanishes modulo every prime <= 13",
                                 image=image)


def all_elements(n, p):
    """Every element of UT(n, p), in lexicographic order."""
    m = n * (n - 1) // 2
    return [UtElement(n, p, t) for t in itertools.product(range(p), repeat=m)]
