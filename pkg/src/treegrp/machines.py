"""Finite-state automorphisms of the rooted k-ary tree.

A machine is a finite automaton whose states are tree automorphisms: each
state carries a root permutation of the alphabet and, per letter, a successor
state acting on that subtree.  Group elements are words over the states with
formal inverses; the product convention puts the right factor first, so
(f*g)(v) = f(g(v)).  Everything runs letter by letter through the two section
identities

    (f*g)|_u = f|_{g(u)} * g|_u        (g^-1)|_u = (g|_{g^-1(u)})^-1

which keep words as words instead of expanding product automata.  Identity
and equality testing explore the finite set of section words reachable from a
word, so they are decision procedures, not depth-limited approximations.
"""

import json
from collections import deque
from functools import lru_cache

from treegrp.errors import CapExceeded
from treegrp.trees import (
    check_alphabet,
    check_perm,
    check_vertex,
    compose_perm,
    cycle_notation,
    identity_perm,
    invert_perm,
    vertex_str,
)

DEFAULT_STATE_CAP = 1 << 20


class MachineSpec:
    """Immutable automaton: parallel tuples of root permutations and section
    state indices, with optional state names."""

    __slots__ = ("k", "perms", "sections", "names", "_inv", "_trivial", "_hash")

    def __init__(self, k, states, names=None):
        k = check_alphabet(k)
        perms = []
        sections = []
        states = list(states)
        for perm, secs in states:
            perms.append(check_perm(perm, k))
            secs = tuple(secs)
            if len(secs) != k:
                raise ValueError(f"state needs {k} sections, got {len(secs)}")
            for s in secs:
                if not 0 <= s < len(states):
                    raise ValueError(f"section index {s} out of range")
            sections.append(secs)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "perms", tuple(perms))
        object.__setattr__(self, "sections", tuple(sections))
        if names is not None:
            names = tuple(names)
            if len(names) != len(perms):
                raise ValueError("one name per state required")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "_inv", tuple(invert_perm(p) for p in perms))
        object.__setattr__(self, "_trivial", self._trivial_states())
        object.__setattr__(
            self, "_hash", hash((k, self.perms, self.sections, names))
        )

    def _trivial_states(self):
        # greatest fixpoint: a state acts trivially iff its root permutation
        # is trivial and every section does too
        ident = identity_perm(self.k)
        triv = {i for i, p in enumerate(self.perms) if p == ident}
        while True:
            keep = {i for i in triv if all(s in triv for s in self.sections[i])}
            if keep == triv:
                return frozenset(keep)
            triv = keep

    def __setattr__(self, name, value):
        raise AttributeError("MachineSpec is immutable")

    def __eq__(self, other):
        if not isinstance(other, MachineSpec):
            return NotImplemented
        return (
            self.k == other.k
            and self.perms == other.perms
            and self.sections == other.sections
            and self.names == other.names
        )

    def __hash__(self):
        return self._hash

    def __len__(self):
        return len(self.perms)

    def __repr__(self):
        return f"MachineSpec(k={self.k}, states={len(self.perms)})"

    def name_of(self, i):
        if self.names is not None:
            return self.names[i]
        return f"s{i}"

    def state_index(self, ref):
        if isinstance(ref, int):
            if not 0 <= ref < len(self.perms):
                raise ValueError(f"no state {ref}")
            return ref
        if self.names is None or ref not in self.names:
            raise ValueError(f"no state named {ref!r}")
        return self.names.index(ref)

    def state(self, ref):
        """The one-letter element for a state, by index or name."""
        return Element(self, (self.state_index(ref) + 1,))

    def identity(self):
        return Element(self, ())

    def extended(self, extra_states, extra_names=None):
        """New machine with states appended (existing indices unchanged)."""
        states = list(zip(self.perms, self.sections)) + list(extra_states)
        if self.names is None:
            names = None
        else:
            extra_names = list(extra_names or [])
            while len(extra_names) < len(extra_states):
                extra_names.append(f"s{len(self.perms) + len(extra_names)}")
            names = list(self.names) + extra_names
        return MachineSpec(self.k, states, names)

    def to_json(self, generators=None):
        data = {
            "k": self.k,
            "states": [
                {
                    "name": self.name_of(i),
                    "perm": list(self.perms[i]),
                    "sections": list(self.sections[i]),
                }
                for i in range(len(self.perms))
            ],
        }
        if generators is not None:
            data["generators"] = dict(generators)
        return data

    @classmethod
    def from_json(cls, data):
        states = [(tuple(st["perm"]), tuple(st["sections"])) for st in data["states"]]
        names = [st.get("name", f"s{i}") for i, st in enumerate(data["states"])]
        return cls(data["k"], states, names)

    def to_dot(self):
        lines = ["digraph machine {"]
        for i in range(len(self.perms)):
            label = f"{self.name_of(i)}\\n{cycle_notation(self.perms[i])}"
            lines.append(f'  n{i} [label="{label}"];')
        for i, secs in enumerate(self.sections):
            for x, s in enumerate(secs):
                lines.append(f'  n{i} -> n{s} [label="{x}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def load_machine(path):
    with open(path) as fh:
        data = json.load(fh)
    machine = MachineSpec.from_json(data)
    gens = {
        name: machine.state(idx) for name, idx in data.get("generators", {}).items()
    }
    return machine, gens


def merge_machines(a, b):
    """Common machine for words over a and b: (machine, offset_a, offset_b).

    Shared or prefix-compatible machines merge for free; otherwise the states
    are concatenated and b's word letters shift by offset_b.
    """
    if a is b or a == b:
        return a, 0, 0
    if a.k != b.k:
        raise ValueError("cannot mix machines over different alphabets")
    na, nb = len(a.perms), len(b.perms)
    if na <= nb and b.perms[:na] == a.perms and b.sections[:na] == a.sections:
        return b, 0, 0
    if nb < na and a.perms[:nb] == b.perms and a.sections[:nb] == b.sections:
        return a, 0, 0
    states = list(zip(a.perms, a.sections))
    states += [(p, tuple(s + na for s in secs)) for p, secs in zip(b.perms, b.sections)]
    if a.names is None and b.names is None:
        names = None
    else:
        names = [a.name_of(i) for i in range(na)]
        taken = set(names)
        for j in range(nb):
            nm = b.name_of(j)
            while nm in taken:
                nm += "'"
            taken.add(nm)
            names.append(nm)
    return MachineSpec(a.k, states, names), 0, na


def _shift_word(word, off):
    if off == 0:
        return word
    return tuple((abs(x) + off) * (1 if x > 0 else -1) for x in word)


def to_common_machine(elements):
    """Rebase a list of Elements onto one shared machine.

    Merging keeps earlier state indices valid (prefix extension or
    concatenation), so words are shifted at most once.
    """
    elements = list(elements)
    if not elements:
        return []
    machine = elements[0].machine
    words = [elements[0].word]
    for e in elements[1:]:
        machine, _, off = merge_machines(machine, e.machine)
        words.append(_shift_word(e.word, off))
    return [Element(machine, w) for w in words]


class Element:
    """A group word over machine states; the empty word is the identity.

    Word letters are signed indices shifted by one: +(i+1) is state i,
    -(i+1) its formal inverse.  Words are canonicalized on construction
    (trivially acting states dropped, adjacent inverse pairs cancelled).
    == and hash compare words structurally; use equals() for equality as
    tree automorphisms.
    """

    __slots__ = ("machine", "word")

    def __init__(self, machine, word):
        n = len(machine.perms)
        triv = machine._trivial
        out = []
        for x in word:
            i = abs(x) - 1
            if not 0 <= i < n:
                raise ValueError(f"word letter {x} out of range")
            if i in triv:
                continue
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        object.__setattr__(self, "machine", machine)
        object.__setattr__(self, "word", tuple(out))

    @classmethod
    def _raw(cls, machine, word):
        # internal: word already canonical for this machine
        self = object.__new__(cls)
        object.__setattr__(self, "machine", machine)
        object.__setattr__(self, "word", word)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("Element is immutable")

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.machine == other.machine and self.word == other.word

    def __hash__(self):
        return hash((self.machine, self.word))

    def __mul__(self, other):
        return multiply(self, other)

    def __invert__(self):
        return inverse(self)

    def __repr__(self):
        if not self.word:
            return "<1>"
        names = []
        for x in self.word:
            nm = self.machine.name_of(abs(x) - 1)
            names.append(nm if x > 0 else nm + "^-1")
        return "<%s>" % " ".join(names)


def multiply(f, g):
    """Word concatenation; realizes the product with g applied first."""
    machine, oa, ob = merge_machines(f.machine, g.machine)
    return Element(machine, _shift_word(f.word, oa) + _shift_word(g.word, ob))


def inverse(g):
    return Element._raw(g.machine, tuple(-x for x in reversed(g.word)))


def conjugate(h, g):
    """g^-1 * h * g."""
    return multiply(multiply(inverse(g), h), g)


def _letter_section(machine, letter, x):
    """Section and image of letter x under one signed word letter.

    Returns (signed section letter or 0 when the section acts trivially,
    image of x).
    """
    i = abs(letter) - 1
    if letter > 0:
        s = machine.sections[i][x]
        y = machine.perms[i][x]
        return (0 if s in machine._trivial else s + 1), y
    y = machine._inv[i][x]
    s = machine.sections[i][y]
    return (0 if s in machine._trivial else -(s + 1)), y


def section_word(machine, word, x):
    """Section of a word at letter x, plus the image of x.

    Works right to left: the rightmost factor acts first, then each further
    factor is sectioned at the running image.
    """
    rev = []
    c = x
    for letter in reversed(word):
        sl, c = _letter_section(machine, letter, c)
        if sl:
            if rev and rev[-1] == -sl:
                rev.pop()
            else:
                rev.append(sl)
    rev.reverse()
    return tuple(rev), c


def root_perm(g):
    """The permutation g induces on the alphabet (its decoration at the root)."""
    p = identity_perm(g.machine.k)
    for letter in g.word:
        i = abs(letter) - 1
        q = g.machine.perms[i] if letter > 0 else g.machine._inv[i]
        p = compose_perm(p, q)
    return p


def apply(g, v):
    """Image of the vertex v under g; length preserving and prefix compatible."""
    m = g.machine
    v = check_vertex(v, m.k)
    w = g.word
    out = []
    for x in v:
        w_next, y = section_word(m, w, x)
        out.append(y)
        w = w_next
    return tuple(out)


def section(g, u):
    """The automorphism induced on the subtree at u, moved to the root."""
    m = g.machine
    u = check_vertex(u, m.k)
    w = g.word
    for x in u:
        w, _ = section_word(m, w, x)
    return Element._raw(m, w)


def decoration(g, u):
    """The alphabet permutation at vertex u: root permutation of g|_u."""
    return root_perm(section(g, u))


def identity_witness(g, max_states=DEFAULT_STATE_CAP):
    """A moved vertex if g is nontrivial, else None.

    Breadth-first over section words, memoizing visited words; a section word
    of length L only ever produces section words of length <= L over a fixed
    state set, so the search space is finite.  Shortest witnesses come first.
    """
    m = g.machine
    k = m.k
    ident = identity_perm(k)
    seen = {g.word}
    queue = deque([((), g.word)])
    while queue:
        u, w = queue.popleft()
        p = root_perm(Element._raw(m, w))
        if p != ident:
            x = min(x for x in range(k) if p[x] != x)
            return u + (x,)
        for x in range(k):
            w2, _ = section_word(m, w, x)
            if w2 not in seen:
                if len(seen) >= max_states:
                    raise CapExceeded(
                        f"identity test explored {max_states} section words"
                    )
                seen.add(w2)
                queue.append((u + (x,), w2))
    return None


def is_identity(g, max_states=DEFAULT_STATE_CAP):
    """True iff g acts trivially on the whole tree (exact, not depth-limited)."""
    return identity_witness(g, max_states) is None


def equals(f, g, max_states=DEFAULT_STATE_CAP):
    """Equality as tree automorphisms, decided via f * g^-1."""
    return is_identity(multiply(f, inverse(g)), max_states)


def stabilizes_level(g, n):
    """True iff g fixes every vertex up to level n, i.e. all decorations at
    levels < n are trivial."""
    m = g.machine
    ident = identity_perm(m.k)
    seen = {g.word}
    queue = deque([(g.word, 0)])
    while queue:
        w, d = queue.popleft()
        if root_perm(Element._raw(m, w)) != ident:
            return False
        if d + 1 < n:
            for x in range(m.k):
                w2, _ = section_word(m, w, x)
                if w2 not in seen:
                    seen.add(w2)
                    queue.append((w2, d + 1))
    return True


@lru_cache(maxsize=None)
def _delta_extension(machine, depth):
    """Machine extended with path states delta_v(s) for 1 <= |v| <= depth.

    delta_v(s) fixes |v| levels, has section s at v and trivial sections at
    the other vertices of level |v|.  Extensions of increasing depth are
    prefix-compatible, so their elements mix without disjoint-union blowup.
    Returns (extended machine, {(v, state index) -> new state index}).
    """
    from treegrp.trees import level as tree_level

    k = machine.k
    nbase = len(machine.perms)
    states = []
    names = [] if machine.names is not None else None
    triv = machine._trivial
    if triv:
        e = min(triv)
    else:
        e = nbase
        states.append((identity_perm(k), (e,) * k))
        if names is not None:
            names.append("1")
    entry = {}
    ident = identity_perm(k)
    for length in range(1, depth + 1):
        for v in tree_level(k, length):
            for s in range(nbase):
                idx = nbase + len(states)
                tail = entry[(v[1:], s)] if length > 1 else s
                states.append((ident, tuple(tail if x == v[0] else e for x in range(k))))
                if names is not None:
                    names.append(f"d[{vertex_str(v)}]{machine.name_of(s)}")
                entry[(v, s)] = idx
    return machine.extended(states, names), entry


def delta(u, h):
    """The automorphism fixing level |u| whose only nontrivial level-|u|
    section is h, placed at u."""
    u = check_vertex(u, h.machine.k)
    if not u:
        return h
    ext, entry = _delta_extension(h.machine, len(u))
    word = tuple(
        (1 if x > 0 else -1) * (entry[(u, abs(x) - 1)] + 1) for x in h.word
    )
    return Element(ext, word)


def inverse_machine(machine):
    """Machine whose state i acts as the inverse of the original state i.

    Export convenience only; inverses inside words stay formal.
    """
    states = []
    for p, secs, inv in zip(machine.perms, machine.sections, machine._inv):
        states.append((inv, tuple(secs[inv[x]] for x in range(machine.k))))
    names = None
    if machine.names is not None:
        names = [f"{nm}^-1" for nm in machine.names]
    return MachineSpec(machine.k, states, names)
