"""Finite decorated tree windows and their group structure.

A pattern of size s decorates every vertex of the first s levels with an
alphabet permutation; equivalently it is an automorphism of the depth-s tree,
acting on the k^s leaf words.  Decorations are stored as one bytes blob in
breadth-first vertex order (that blob is also the hash key); the leaf
permutation form is derived on demand and drives all group computations.
"""

from itertools import permutations as _sym

from treegrp import machines, ops
from treegrp.errors import CapExceeded
from treegrp.machines import Element, multiply, section, section_word
from treegrp.trees import (
    check_alphabet,
    check_perm,
    check_vertex,
    identity_perm,
    subtree_size,
    vertex_rank,
)

GROUP_CHECK_CAP = 1 << 24


class Pattern:
    """Decorations of the depth-s tree, breadth-first, one byte per image."""

    __slots__ = ("k", "size", "data")

    def __init__(self, k, size, data):
        if size < 1:
            raise ValueError("pattern size must be >= 1")
        if len(data) != k * subtree_size(k, size):
            raise ValueError("decoration blob has the wrong length")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "data", bytes(data))

    @classmethod
    def from_decorations(cls, k, size, perms):
        """Build from one permutation per vertex, breadth-first."""
        perms = list(perms)
        if len(perms) != subtree_size(k, size):
            raise ValueError("wrong number of decorations")
        blob = bytearray()
        for p in perms:
            blob += bytes(check_perm(p, k))
        return cls(k, size, bytes(blob))

    @classmethod
    def identity(cls, k, size):
        return cls(k, size, bytes(range(k)) * subtree_size(k, size))

    def __setattr__(self, name, value):
        raise AttributeError("Pattern is immutable")

    def __eq__(self, other):
        if not isinstance(other, Pattern):
            return NotImplemented
        return self.k == other.k and self.size == other.size and self.data == other.data

    def __hash__(self):
        return hash((self.k, self.size, self.data))

    def __repr__(self):
        return f"Pattern(k={self.k}, size={self.size}, {self.decorations()})"

    def decorations(self):
        k = self.k
        return [
            tuple(self.data[i * k : (i + 1) * k])
            for i in range(subtree_size(k, self.size))
        ]

    def decoration_at(self, v):
        v = check_vertex(v, self.k)
        if len(v) >= self.size:
            raise ValueError("vertex outside the pattern")
        k = self.k
        i = subtree_size(k, len(v)) + vertex_rank(v, k)
        return tuple(self.data[i * k : (i + 1) * k])

    def is_trivial(self):
        return self.data == bytes(range(self.k)) * subtree_size(self.k, self.size)

    def leaf_perm(self):
        """The permutation induced on the k^size leaf words (lex ranks).

        bytes for degree <= 256, else a tuple.
        """
        k = self.k
        data = self.data
        cur = list(data[:k])
        pos = k
        for lvl in range(1, self.size):
            width = k**lvl
            nxt = [0] * (width * k)
            for v in range(width):
                base = cur[v] * k
                row = pos + v * k
                for x in range(k):
                    nxt[v * k + x] = base + data[row + x]
            pos += width * k
            cur = nxt
        if k**self.size <= 256:
            return bytes(cur)
        return tuple(cur)

    @classmethod
    def from_leaf_perm(cls, k, size, perm):
        """Inverse of leaf_perm; rejects non-prefix-preserving permutations."""
        deg = k**size
        if len(perm) != deg:
            raise ValueError("leaf permutation has the wrong degree")
        if sorted(perm) != list(range(deg)):
            raise ValueError("not a permutation of the leaves")
        levels = [list(perm)]
        for lvl in range(size - 1, 0, -1):
            prev = levels[0]
            cur = [0] * (k**lvl)
            for v in range(k**lvl):
                base = prev[v * k] // k
                for x in range(k):
                    if prev[v * k + x] // k != base:
                        raise ValueError("permutation does not preserve prefixes")
                cur[v] = base
            levels.insert(0, cur)
        blob = bytearray()
        for j, ind in enumerate(levels):
            for r in range(k**j):
                for x in range(k):
                    blob.append(ind[r * k + x] % k)
        return cls(k, size, bytes(blob))

    def to_json(self):
        return {
            "k": self.k,
            "size": self.size,
            "decorations": [list(p) for p in self.decorations()],
        }

    @classmethod
    def from_json(cls, data):
        return cls.from_decorations(data["k"], data["size"], data["decorations"])


def pattern_at(g, u, size):
    """The size-`size` window of g at vertex u (decorations of g|_u down to
    level size-1)."""
    m = g.machine
    k = m.k
    w = section(g, u).word
    rows = [w]
    blob = bytearray()
    for lvl in range(size):
        nxt = []
        for row in rows:
            blob += bytes(machines.root_perm(Element._raw(m, row)))
            if lvl < size - 1:
                for x in range(k):
                    nxt.append(section_word(m, row, x)[0])
        rows = nxt
    return Pattern(k, size, bytes(blob))


def compose_pattern(p, q):
    """Group product in the automorphisms of the depth-s tree, q first."""
    if p.k != q.k or p.size != q.size:
        raise ValueError("pattern sizes differ")
    return Pattern.from_leaf_perm(p.k, p.size, ops.compose(p.leaf_perm(), q.leaf_perm()))


def invert_pattern(p):
    return Pattern.from_leaf_perm(p.k, p.size, ops.invert(p.leaf_perm()))


def glue(root, children):
    """Size s+1 pattern with the given root permutation and the size-s
    patterns grafted below the k letters."""
    children = list(children)
    root = check_perm(root)
    k = len(root)
    if len(children) != k:
        raise ValueError(f"need {k} child patterns")
    s = children[0].size
    for ch in children:
        if ch.k != k or ch.size != s:
            raise ValueError("child patterns must share alphabet and size")
    parts = [bytes(root)]
    pos = 0
    for lvl in range(s):
        width = k**lvl * k
        for ch in children:
            parts.append(ch.data[pos : pos + width])
        pos += width
    return Pattern(k, s + 1, b"".join(parts))


def subpattern_at(p, u, r):
    """The size-r window of p at vertex u."""
    u = check_vertex(u, p.k)
    if r < 1 or len(u) + r > p.size:
        raise ValueError("window exceeds the pattern")
    k = p.k
    rank = vertex_rank(u, k)
    parts = []
    for j in range(r):
        lvl = len(u) + j
        start = k * (subtree_size(k, lvl) + rank * k**j)
        parts.append(p.data[start : start + k * k**j])
    return Pattern(k, r, b"".join(parts))


def total_pattern_count(k, size):
    import math

    return math.factorial(k) ** subtree_size(k, size)


def all_patterns(k, size, cap=1 << 21):
    """Every pattern of the given size, lexicographically by decoration blob."""
    check_alphabet(k)
    if total_pattern_count(k, size) > cap:
        raise CapExceeded(f"{total_pattern_count(k, size)} patterns exceed cap {cap}")
    from itertools import product

    perms = sorted(_sym(range(k)))
    out = []
    for combo in product(perms, repeat=subtree_size(k, size)):
        out.append(Pattern.from_decorations(k, size, combo))
    return out


class PatternSet:
    """A finite set of same-shape patterns, optionally with witness words.

    A witness word is a tuple of indices into witness_base; the corresponding
    product element has the keyed pattern at its root.
    """

    __slots__ = ("k", "size", "members", "witness_words", "witness_base")

    def __init__(self, k, size, members, witness_words=None, witness_base=None):
        members = frozenset(members)
        for p in members:
            if p.k != k or p.size != size:
                raise ValueError("pattern shape mismatch")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "witness_words", witness_words)
        object.__setattr__(self, "witness_base", witness_base)

    def __setattr__(self, name, value):
        raise AttributeError("PatternSet is immutable")

    def __contains__(self, p):
        return p in self.members

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members, key=lambda p: p.data))

    def __eq__(self, other):
        if not isinstance(other, PatternSet):
            return NotImplemented
        return self.k == other.k and self.size == other.size and self.members == other.members

    def __hash__(self):
        return hash((self.k, self.size, self.members))

    def leaf_perms(self):
        return frozenset(p.leaf_perm() for p in self.members)

    def witness_element(self, p):
        """An element whose root window is p, rebuilt from the stored word."""
        if self.witness_words is None or p not in self.witness_words:
            raise ValueError("no witness recorded for this pattern")
        word = self.witness_words[p]
        out = None
        for i in word:
            out = self.witness_base[i] if out is None else multiply(out, self.witness_base[i])
        if out is None:
            machine = self.witness_base[0].machine
            out = machine.identity()
        return out

    def to_json(self):
        return [p.to_json() for p in self]

    @classmethod
    def from_json(cls, data):
        members = [Pattern.from_json(d) for d in data]
        if not members:
            raise ValueError("empty pattern list has no shape")
        return cls(members[0].k, members[0].size, members)


def section_closure(elements, cap=1 << 16):
    """Smallest section-closed set of words containing the given elements.

    Input elements must share one machine.  The identity is dropped; words are
    deduplicated as words, not as automorphisms.
    """
    elements = machines.to_common_machine(elements)
    if not elements:
        return []
    machine = elements[0].machine
    seen = set()
    out = []
    queue = []
    for e in elements:
        if e.word and e.word not in seen:
            seen.add(e.word)
            out.append(e)
            queue.append(e.word)
    while queue:
        w = queue.pop()
        for x in range(machine.k):
            w2, _ = section_word(machine, w, x)
            if w2 and w2 not in seen:
                if len(seen) >= cap:
                    raise CapExceeded(f"section closure exceeds cap {cap}")
                seen.add(w2)
                out.append(Element._raw(machine, w2))
                queue.append(w2)
    return out


def essential_patterns(generators, size, cap=1 << 21):
    """The patterns of the given size appearing in the self-similar group
    generated by the section closure of `generators`.

    Since the group is section-closed, these are exactly the root windows of
    its elements: the image of the group in the automorphisms of the depth-s
    tree, computed by breadth-first closure.  Each produced pattern carries a
    witness word over the section-closed generator list.
    """
    gens = section_closure(list(generators), cap)
    if not gens:
        machine = list(generators)[0].machine
        ident = Pattern.identity(machine.k, size)
        return PatternSet(
            machine.k, size, [ident], {ident: ()}, (machine.identity(),)
        )
    k = gens[0].machine.k
    lps = [pattern_at(g, (), size).leaf_perm() for g in gens]
    words = ops.closure_with_words(lps, cap)
    members = {}
    for lp, word in words.items():
        members[Pattern.from_leaf_perm(k, size, lp)] = word
    return PatternSet(k, size, members.keys(), members, tuple(gens))


def is_pattern_group(ps, work_cap=GROUP_CHECK_CAP):
    """Subgroup test: identity present, closed under composition and inverse."""
    lps = ps.leaf_perms()
    if not lps:
        return False
    deg = ps.k**ps.size
    if ops.identity(deg, isinstance(next(iter(lps)), bytes)) not in lps:
        return False
    if len(lps) ** 2 > work_cap:
        raise CapExceeded(f"pairwise closure check on {len(lps)} patterns exceeds cap")
    for p in lps:
        if ops.invert(p) not in lps:
            return False
    for p in lps:
        for q in lps:
            if ops.compose(p, q) not in lps:
                return False
    return True


def is_transitive(ps):
    """True iff the leaf actions reach every leaf from the first one."""
    lps = ps.leaf_perms()
    if not lps:
        return False
    deg = ps.k**ps.size
    orbit = {0}
    frontier = [0]
    while frontier:
        new = []
        for v in frontier:
            for p in lps:
                w = p[v]
                if w not in orbit:
                    orbit.add(w)
                    new.append(w)
        frontier = new
    return len(orbit) == deg
