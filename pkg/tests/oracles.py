"""Independent reference implementations used as test oracles."""

import itertools
from math import gcd


def naive_root(w):
    """Strip inverse end letters, then scan divisors of the core length."""
    conj = []
    while len(w) >= 2 and w[0] == -w[-1]:
        conj.append(w[0])
        w = w[1:-1]
    n = len(w)
    for d in range(1, n + 1):
        if n % d == 0 and w[:d] * (n // d) == w:
            return tuple(conj), w[:d], n // d


def det(rows):
    """Leibniz expansion; fine for the small minors used here."""
    n = len(rows)
    total = 0
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        prod = sign
        for i in range(n):
            prod *= rows[i][perm[i]]
        total += prod
    return total


def determinantal_divisor(rows, k):
    g = 0
    for r in itertools.combinations(range(len(rows)), k):
        for c in itertools.combinations(range(len(rows[0])), k):
            g = gcd(g, det([[rows[i][j] for j in c] for i in r]))
    return g


def mat_mul(a, b, p):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) % p for j in range(n)] for i in range(n)]
