"""Shared vocabulary for rooted k-ary trees.

Letters are the integers 0..k-1.  A vertex is a tuple of letters (the empty
tuple is the root); level n is the set of length-n words in lexicographic
order.  A permutation of the alphabet is a tuple of images.  All values are
immutable.
"""

from itertools import product


def check_alphabet(k):
    if not isinstance(k, int) or isinstance(k, bool) or k < 2:
        raise ValueError(f"alphabet size must be an integer >= 2, got {k!r}")
    return k


def identity_perm(k):
    return tuple(range(k))


def check_perm(p, k=None):
    p = tuple(p)
    if k is not None and len(p) != k:
        raise ValueError(f"expected a permutation of {k} letters, got {p!r}")
    if sorted(p) != list(range(len(p))):
        raise ValueError(f"not a permutation: {p!r}")
    return p


def compose_perm(p, q):
    """Product with the right factor applied first: (p*q)(x) = p(q(x))."""
    if len(p) != len(q):
        raise ValueError("permutation alphabets differ")
    return tuple(p[x] for x in q)


def invert_perm(p):
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def cycle_notation(p):
    """Cycle string for display, e.g. (0 1)(2 3); the identity is ()."""
    seen = set()
    out = []
    for i in range(len(p)):
        if i in seen or p[i] == i:
            continue
        cyc = [i]
        j = p[i]
        while j != i:
            seen.add(j)
            cyc.append(j)
            j = p[j]
        out.append("(%s)" % " ".join(map(str, cyc)))
    return "".join(out) if out else "()"


def check_vertex(v, k):
    v = tuple(v)
    for x in v:
        if not 0 <= x < k:
            raise ValueError(f"letter {x} out of range for alphabet of size {k}")
    return v


def vertex_str(v):
    return "".join(str(x) for x in v)


def parse_vertex(s, k):
    """Parse a digit-string vertex such as "" (root) or "011"."""
    if k > 10:
        raise ValueError("digit-string vertices only support alphabets up to 10 letters")
    v = tuple(int(c) for c in s)
    return check_vertex(v, k)


def level(k, n):
    """All k^n words of length n, lexicographically ordered."""
    if n < 0:
        raise ValueError("level must be nonnegative")
    return [tuple(w) for w in product(range(k), repeat=n)]


def subtree_size(k, depth):
    """Number of vertices in levels 0..depth-1, i.e. (k^depth - 1)/(k - 1)."""
    return (k**depth - 1) // (k - 1)


def vertex_rank(v, k):
    """Position of v within its level under lexicographic order."""
    r = 0
    for x in v:
        r = r * k + x
    return r
