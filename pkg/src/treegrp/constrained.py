"""Forbidden-pattern groups: membership, viability pruning, truncation DP.

A constraint system fixes an alphabet, a window size s, and a forbidden set
of size-s patterns; the constrained set consists of all portraits none of
whose windows is forbidden.  The two workhorses are

  * viable_patterns: fixed-point pruning down to the windows that occur in
    some full portrait (a window survives iff each of its child prefixes
    extends to a surviving window), and
  * truncation_group: the depth-n truncations, grown level by level by gluing
    surviving truncations under every viable root window.

Both run on the leaf-permutation encoding of patterns; at degree <= 256 a
truncation is a bytes object and a DP layer is slice translation plus joins.
"""

import math
from collections import deque

from treegrp import machines, ops
from treegrp.errors import CapExceeded
from treegrp.machines import Element, section_word
from treegrp.patterns import (
    Pattern,
    PatternSet,
    all_patterns,
    is_pattern_group,
    pattern_at,
    total_pattern_count,
)

DEFAULT_ELEMENT_CAP = 1 << 21
COMPLEMENT_CAP = 1 << 21

_SHIFT_TABLES = {}


def _shift_table(off):
    # bytes.translate table adding a block offset; valid inputs stay < 256
    tab = _SHIFT_TABLES.get(off)
    if tab is None:
        tab = bytes((i + off) % 256 for i in range(256))
        _SHIFT_TABLES[off] = tab
    return tab


def _induced(perm, k, levels_down):
    """Map induced on the level `levels_down` steps above the perm's own."""
    step = k**levels_down
    if isinstance(perm, bytes):
        return bytes(perm[v * step] // step for v in range(len(perm) // step))
    return tuple(perm[v * step] // step for v in range(len(perm) // step))


def _child_blocks(perm, k):
    """Root images and the k child permutations of a level-s leaf perm, s >= 2."""
    block = len(perm) // k
    roots = []
    children = []
    for x in range(k):
        r = perm[x * block] // block
        roots.append(r)
        seg = perm[x * block : (x + 1) * block]
        off = r * block
        if isinstance(perm, bytes):
            children.append(bytes(b - off for b in seg))
        else:
            children.append(tuple(b - off for b in seg))
    return roots, children


class ConstraintSystem:
    """Alphabet size, window size, and the forbidden (or allowed) windows."""

    __slots__ = ("k", "size", "_forbidden", "_allowed", "_allowed_lps")

    def __init__(self, k, size, forbidden=None, allowed=None):
        if (forbidden is None) == (allowed is None):
            raise ValueError("give exactly one of forbidden or allowed")
        if size < 1:
            raise ValueError("window size must be >= 1")
        given = forbidden if forbidden is not None else allowed
        given = frozenset(given)
        for p in given:
            if not isinstance(p, Pattern) or p.k != k or p.size != size:
                raise ValueError("constraint patterns must match k and size")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "_forbidden", given if forbidden is not None else None)
        object.__setattr__(self, "_allowed", given if allowed is not None else None)
        object.__setattr__(self, "_allowed_lps", None)

    def __setattr__(self, name, value):
        raise AttributeError("ConstraintSystem is immutable")

    def _complement(self, given):
        if total_pattern_count(self.k, self.size) > COMPLEMENT_CAP:
            raise CapExceeded(
                "complement would enumerate "
                f"{total_pattern_count(self.k, self.size)} patterns"
            )
        return frozenset(p for p in all_patterns(self.k, self.size) if p not in given)

    @property
    def forbidden(self):
        if self._forbidden is not None:
            return self._forbidden
        out = self._complement(self._allowed)
        object.__setattr__(self, "_forbidden", out)
        return out

    @property
    def allowed(self):
        if self._allowed is not None:
            return self._allowed
        out = self._complement(self._forbidden)
        object.__setattr__(self, "_allowed", out)
        return out

    def allowed_leaf_perms(self):
        if self._allowed_lps is None:
            object.__setattr__(
                self, "_allowed_lps", frozenset(p.leaf_perm() for p in self.allowed)
            )
        return self._allowed_lps

    def to_json(self):
        if self._forbidden is not None:
            key, pats = "forbidden", self._forbidden
        else:
            key, pats = "allowed", self._allowed
        return {
            "k": self.k,
            "size": self.size,
            key: [p.to_json() for p in sorted(pats, key=lambda p: p.data)],
        }

    @classmethod
    def from_json(cls, data):
        keys = [k for k in ("forbidden", "allowed") if k in data]
        if len(keys) != 1:
            raise ValueError("constraint JSON needs exactly one of forbidden/allowed")
        pats = [Pattern.from_json(d) for d in data[keys[0]]]
        return cls(data["k"], data["size"], **{keys[0]: pats})


def membership_violation(g, C, max_states=machines.DEFAULT_STATE_CAP):
    """First vertex (breadth-first) whose window is forbidden, or None.

    The window at u equals the root window of the section at u, so exploring
    the finitely many reachable section words covers every vertex.
    """
    m = g.machine
    if m.k != C.k:
        raise ValueError("alphabet mismatch")
    allowed = C.allowed_leaf_perms()
    k = m.k
    seen = {g.word}
    checked = {}
    queue = deque([((), g.word)])
    while queue:
        u, w = queue.popleft()
        ok = checked.get(w)
        if ok is None:
            lp = pattern_at(Element._raw(m, w), (), C.size).leaf_perm()
            ok = lp in allowed
            checked[w] = ok
        if not ok:
            return u
        for x in range(k):
            w2, _ = section_word(m, w, x)
            if w2 not in seen:
                if len(seen) >= max_states:
                    raise CapExceeded(
                        f"membership test explored {max_states} section words"
                    )
                seen.add(w2)
                queue.append((u + (x,), w2))
    return None


def membership(g, C, max_states=machines.DEFAULT_STATE_CAP):
    """True iff no window of g, at any vertex, is forbidden."""
    return membership_violation(g, C, max_states) is None


def _viable_leaf_perms(C):
    k = C.k
    s = C.size
    live = set(C.allowed_leaf_perms())
    if s == 1:
        # every letter permutation extends below by any allowed window
        return live
    while True:
        prefixes = {_induced(q, k, 1) for q in live}
        dead = [
            p for p in live if any(c not in prefixes for c in _child_blocks(p, k)[1])
        ]
        if not dead:
            return live
        live -= set(dead)


def viable_patterns(C):
    """Windows that occur in some full portrait: prune until every child
    prefix of every survivor extends to a survivor."""
    live = _viable_leaf_perms(C)
    return PatternSet(C.k, C.size, [Pattern.from_leaf_perm(C.k, C.size, p) for p in live])


class TruncationGroup:
    """Depth-n truncations of the constrained set, with a closure flag."""

    __slots__ = ("k", "n", "window", "leaf_perms", "group_flag", "_members")

    def __init__(self, k, n, window, leaf_perms, group_flag):
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "leaf_perms", frozenset(leaf_perms))
        object.__setattr__(self, "group_flag", group_flag)
        object.__setattr__(self, "_members", None)

    def __setattr__(self, name, value):
        raise AttributeError("TruncationGroup is immutable")

    def __len__(self):
        return len(self.leaf_perms)

    @property
    def members(self):
        if self._members is None:
            object.__setattr__(
                self,
                "_members",
                frozenset(
                    Pattern.from_leaf_perm(self.k, self.n, p) for p in self.leaf_perms
                ),
            )
        return self._members


def _next_layer(k, s, cur_level, cur, windows, cap):
    """One DP step: glue all k-tuples from the current layer under every
    viable root window, matching child prefixes of the window."""
    prefix_levels = s - 1
    buckets = {}
    if prefix_levels == 0:
        buckets[None] = sorted(cur)
    else:
        for p in cur:
            key = tuple(_induced(p, k, cur_level - prefix_levels))
            buckets.setdefault(key, []).append(p)
        for b in buckets.values():
            b.sort()
    # predict the layer size before materializing anything
    total = 0
    plans = []
    for w in sorted(windows):
        if prefix_levels == 0:
            roots = list(w)
            groups = [buckets[None]] * k
        else:
            roots, children = _child_blocks(w, k)
            groups = []
            for c in children:
                g = buckets.get(tuple(c))
                if g is None:
                    groups = None
                    break
                groups.append(g)
            if groups is None:
                continue
        n = 1
        for g in groups:
            n *= len(g)
        total += n
        plans.append((roots, groups))
    if total > cap:
        raise CapExceeded(f"truncation layer of {total} patterns exceeds cap {cap}")
    deg = k**cur_level
    out = set()
    use_bytes = deg * k <= 256
    for roots, groups in plans:
        offs = [r * deg for r in roots]
        if use_bytes:
            tabs = [_shift_table(off) for off in offs]
            stack = [b""]
            for x in range(k):
                tab = tabs[x]
                stack = [pre + p.translate(tab) for pre in stack for p in groups[x]]
            out.update(stack)
        else:
            stack = [()]
            for x in range(k):
                off = offs[x]
                stack = [
                    pre + tuple(b + off for b in p) for pre in stack for p in groups[x]
                ]
            out.update(stack)
    return out


def truncation_leaf_perms(C, n, cap=DEFAULT_ELEMENT_CAP):
    """Depth-n truncations as leaf permutations (internal fast path)."""
    if n < 1:
        raise ValueError("depth must be >= 1")
    k = C.k
    s = C.size
    live = _viable_leaf_perms(C)
    if not live:
        return frozenset()
    if n < s:
        return frozenset(_induced(p, k, s - n) for p in live)
    cur = set(live)
    windows = live
    for m in range(s, n):
        # degrees above 256 fall back to tuple encoding
        if k**s <= 256 and k ** (m + 1) > 256:
            cur = {tuple(p) for p in cur}
        cur = _next_layer(k, s, m, cur, windows, cap)
    return frozenset(cur)


def truncation_group(C, n, cap=DEFAULT_ELEMENT_CAP, group_check_cap=1 << 24):
    """Depth-n truncations with a closure-under-composition flag.

    When the viable windows form a group the constrained set is a group and
    its truncations are closed by construction; otherwise closure is checked
    pairwise (and refused loudly if that would be too much work).
    """
    lps = truncation_leaf_perms(C, n, cap)
    viable = viable_patterns(C)
    if not lps:
        flag = False
    elif is_pattern_group(viable, group_check_cap):
        flag = True
    elif len(lps) ** 2 > group_check_cap:
        raise CapExceeded(f"pairwise closure check on {len(lps)} truncations exceeds cap")
    else:
        deg = C.k**n
        ident = ops.identity(deg, isinstance(next(iter(lps)), bytes))
        flag = ident in lps and all(
            ops.compose(p, q) in lps for p in lps for q in lps
        )
    return TruncationGroup(C.k, n, C.size, lps, flag)


def is_group(C):
    """The constrained set is a group iff its viable windows form one."""
    return is_pattern_group(viable_patterns(C))
