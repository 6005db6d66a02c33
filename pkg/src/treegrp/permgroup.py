"""Finite permutation groups on tree levels.

Supports the quotient analysis: breadth-first closure gives order and
membership, the derived subgroup comes from the normal closure of generator
commutators, and abelian invariants are read off the quotient by counting
torsion.  Points are the k^n level words in lexicographic order; every
generator must preserve the prefix partition of each level, i.e. come from a
tree automorphism.
"""

from treegrp import ops
from treegrp.errors import CapExceeded
from treegrp.patterns import Pattern, pattern_at

DEFAULT_CAP = 1 << 21


def level_perm(g, n):
    """The permutation an element induces on level n."""
    return pattern_at(g, (), n).leaf_perm()


class PermGroup:
    """Generated permutation group on the k^n words of level n."""

    __slots__ = ("k", "levels", "degree", "generators", "_elements")

    def __init__(self, k, levels, generators):
        degree = k**levels
        gens = []
        for p in generators:
            if len(p) != degree:
                raise ValueError("generator degree mismatch")
            # reuses the pattern decoder purely for its validation: it rejects
            # non-bijections and non-prefix-preserving maps
            Pattern.from_leaf_perm(k, levels, p)
            gens.append(p)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "generators", tuple(dict.fromkeys(gens)))
        object.__setattr__(self, "_elements", None)

    @classmethod
    def from_elements(cls, k, levels, elements):
        return cls(k, levels, [level_perm(g, levels) for g in elements])

    def __setattr__(self, name, value):
        raise AttributeError("PermGroup is immutable")

    def elements(self, cap=DEFAULT_CAP):
        if self._elements is None:
            if self.generators:
                els = frozenset(ops.closure(self.generators, cap))
            else:
                els = frozenset({ops.identity(self.degree)})
            object.__setattr__(self, "_elements", els)
        return self._elements


def order(G, cap=DEFAULT_CAP):
    return len(G.elements(cap))


def member(G, p, cap=DEFAULT_CAP):
    """True iff p lies in G.  Maps that are not prefix-preserving level
    permutations are rejected immediately."""
    if len(p) != G.degree:
        return False
    try:
        Pattern.from_leaf_perm(G.k, G.levels, p)
    except ValueError:
        return False
    if G._elements is not None:
        return p in G._elements
    if not G.generators:
        return p == ops.identity(G.degree)
    return ops.closure_contains(G.generators, p, cap)


def commutator_subgroup(G, cap=DEFAULT_CAP):
    """Derived subgroup: normal closure of the generator commutators.

    The commutators are closed under conjugation by the generators (both
    directions); the subgroup such a conjugation-closed set generates is
    normal and equals the derived subgroup.
    """
    gens = G.generators
    as_bytes = bool(gens) and isinstance(gens[0], bytes)
    ident = ops.identity(G.degree, as_bytes)
    comms = set()
    invs = [ops.invert(g) for g in gens]
    for i, g in enumerate(gens):
        for j, h in enumerate(gens):
            c = ops.compose(
                ops.compose(invs[i], invs[j]), ops.compose(g, h)
            )
            if c != ident:
                comms.add(c)
    seed = set(comms)
    frontier = list(comms)
    while frontier:
        new = []
        for c in frontier:
            for g, gi in zip(gens, invs):
                for d in (ops.compose(gi, ops.compose(c, g)), ops.compose(g, ops.compose(c, gi))):
                    if d not in seed:
                        if len(seed) >= cap:
                            raise CapExceeded("commutator conjugation closure exceeds cap")
                        seed.add(d)
                        new.append(d)
        frontier = new
    return PermGroup(G.k, G.levels, sorted(seed))


def _coset_reps(G, D_elements, cap):
    """Canonical coset representatives of G modulo a normal subgroup given by
    its full element set; rep(x) = lexicographic minimum of x*D."""
    dsorted = sorted(D_elements)

    def rep(x):
        return min(ops.compose(x, d) for d in dsorted)

    ident = rep(ops.identity(G.degree, isinstance(dsorted[0], bytes)))
    reps = {ident}
    frontier = [ident]
    gen_reps = [rep(g) for g in G.generators]
    while frontier:
        new = []
        for r in frontier:
            for g in gen_reps:
                c = rep(ops.compose(g, r))
                if c not in reps:
                    if len(reps) >= cap:
                        raise CapExceeded("coset enumeration exceeds cap")
                    reps.add(c)
                    new.append(c)
        frontier = new
    return sorted(reps), rep, ident


def abelianization_invariants(G, cap=DEFAULT_CAP):
    """Elementary divisors of G/[G,G] as a sorted list of prime powers.

    The abelian quotient is enumerated through canonical coset
    representatives; for each prime p, counting p-power torsion gives the
    number of cyclic factors of each order.
    """
    D = commutator_subgroup(G, cap).elements(cap)
    reps, rep, ident = _coset_reps(G, D, cap)
    m = len(reps)
    if m == 1:
        return []
    orders = []
    for r in reps:
        o = 1
        x = r
        while x != ident:
            x = rep(ops.compose(x, r))
            o += 1
        orders.append(o)
    invariants = []
    for p in _prime_factors(m):
        # r_j = number of cyclic p-factors of order >= p^j
        ranks = []
        j = 1
        prev = 0
        while True:
            c = sum(1 for o in orders if _divides(o, p**j))
            n_j = _plog(p, c)
            r_j = n_j - prev
            if r_j == 0:
                break
            ranks.append(r_j)
            prev = n_j
            j += 1
        for jj in range(len(ranks)):
            count = ranks[jj] - (ranks[jj + 1] if jj + 1 < len(ranks) else 0)
            invariants.extend([p ** (jj + 1)] * count)
    invariants.sort()
    total = 1
    for d in invariants:
        total *= d
    if total != m:
        raise AssertionError("torsion counts do not multiply up to the quotient order")
    return invariants


def _divides(a, b):
    return b % a == 0


def _plog(p, n):
    out = 0
    while n > 1:
        if n % p:
            raise AssertionError("torsion subgroup size is not a prime power")
        n //= p
        out += 1
    return out


def _prime_factors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def min_generators_bounds(G, candidate_gens=None, cap=DEFAULT_CAP):
    """(lower, upper) bounds on the minimal generator count.

    Lower: the largest p-rank of the abelianization.  Upper: the candidate
    count when the candidates provably generate (order equality), else the
    stored generator count.  Exact values are only claimed when the bounds
    meet.
    """
    n = order(G, cap)
    invariants = abelianization_invariants(G, cap)
    lower = 0
    for p in {q for d in invariants for q in _prime_factors(d)}:
        lower = max(lower, sum(1 for d in invariants if d % p == 0))
    if n == 1:
        return 0, 0
    if candidate_gens is not None:
        H = PermGroup(G.k, G.levels, candidate_gens)
        if order(H, cap) == n:
            return lower, len(H.generators)
    return lower, len(G.generators)
