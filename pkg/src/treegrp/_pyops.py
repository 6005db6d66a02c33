"""Pure-Python permutation kernels.

Permutations on up to 256 points are bytes objects (images by position);
larger degrees use tuples of ints.  These functions are the hot loops of the
whole package: breadth-first product closure is what every order, membership
and verification computation bottoms out in.

The bytes fast path leans on bytes.translate: with a generator padded to a
256-entry table, q.translate(table_p) computes i -> p[q[i]], i.e. the product
p*q with q applied first.
"""

from treegrp.errors import CapExceeded


def _table(p):
    return bytes(p) + bytes(range(len(p), 256))


def compose(p, q):
    """Product p*q acting as q first: result[i] = p[q[i]]."""
    if len(p) != len(q):
        raise ValueError("degree mismatch")
    if isinstance(p, bytes):
        return q.translate(_table(p))
    return tuple(p[x] for x in q)


def invert(p):
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    if isinstance(p, bytes):
        return bytes(inv)
    return tuple(inv)


def identity(degree, as_bytes=True):
    if as_bytes and degree <= 256:
        return bytes(range(degree))
    return tuple(range(degree))


def closure(gens, cap):
    """Set of all products of the given permutations (a group; contains id).

    Raises CapExceeded as soon as the closure grows past cap elements.
    """
    gens = list(dict.fromkeys(gens))
    if not gens:
        raise ValueError("need at least one generator")
    deg = len(gens[0])
    ident = identity(deg, isinstance(gens[0], bytes))
    seen = {ident}
    frontier = [ident]
    if isinstance(gens[0], bytes):
        tables = [_table(g) for g in gens]
        while frontier:
            new = []
            for tab in tables:
                for b in frontier:
                    r = b.translate(tab)
                    if r not in seen:
                        if len(seen) >= cap:
                            raise CapExceeded(f"closure exceeds cap {cap}")
                        seen.add(r)
                        new.append(r)
            frontier = new
    else:
        while frontier:
            new = []
            for g in gens:
                for b in frontier:
                    r = tuple(g[x] for x in b)
                    if r not in seen:
                        if len(seen) >= cap:
                            raise CapExceeded(f"closure exceeds cap {cap}")
                        seen.add(r)
                        new.append(r)
            frontier = new
    return seen


def closure_contains(gens, target, cap):
    """Membership test by the same breadth-first closure, with early exit."""
    gens = list(dict.fromkeys(gens))
    if not gens:
        raise ValueError("need at least one generator")
    deg = len(gens[0])
    if len(target) != deg:
        return False
    ident = identity(deg, isinstance(gens[0], bytes))
    if target == ident:
        return True
    seen = {ident}
    frontier = [ident]
    while frontier:
        new = []
        for g in gens:
            for b in frontier:
                r = compose(g, b)
                if r not in seen:
                    if r == target:
                        return True
                    if len(seen) >= cap:
                        raise CapExceeded(f"closure exceeds cap {cap}")
                    seen.add(r)
                    new.append(r)
        frontier = new
    return False
