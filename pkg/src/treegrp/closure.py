"""Branch presentations from finite self-similar generating sets.

Given generators of a self-similar group and a window size s+1, the
construction produces a countable group whose depth-n images coincide with
the truncations of the constrained set allowing exactly the windows the
group realizes:

  * cover every realized window of size s+1 with one witness element,
  * close the witnesses (plus the original generators, plus the nucleus when
    contracting) under sections,
  * generate the level-s stabilizer of that self-similar group by Schreier
    generators over its finite depth-s image,
  * spread the stabilizer generators over the tree with the one-vertex
    supports delta_u(h).

Verification compares, depth by depth, the breadth-first closure of the
presentation's level images against the truncation DP, which computes the
same sets from the window constraints alone.
"""

import random
from dataclasses import dataclass

from treegrp import machines, ops
from treegrp.errors import CapExceeded
from treegrp.machines import (
    Element,
    conjugate,
    delta,
    equals,
    inverse,
    is_identity,
    multiply,
    section_word,
    stabilizes_level,
)
from treegrp.patterns import (
    PatternSet,
    essential_patterns,
    pattern_at,
    section_closure,
)
from treegrp.permgroup import PermGroup, level_perm
from treegrp.trees import level as tree_level

DEFAULT_ELEMENT_CAP = 1 << 21
DEFAULT_STATE_CAP = machines.DEFAULT_STATE_CAP
EQUALS_DEDUP_MAX = 4096


@dataclass(frozen=True)
class BranchPresentation:
    """Countable branch-group data: section-closed base generators, level-s
    stabilizer generators (spread over vertices on demand via delta), the
    realized windows, and optionally the nucleus."""

    machine: machines.MachineSpec
    level: int
    base: tuple
    stab_gens: tuple
    allowed: PatternSet
    nucleus: tuple | None = None

    @property
    def k(self):
        return self.machine.k

    def to_json(self):
        data = {
            "k": self.k,
            "level": self.level,
            "machine": self.machine.to_json(),
            "base": [list(e.word) for e in self.base],
            "stabilizer_generators": [list(e.word) for e in self.stab_gens],
            "allowed": self.allowed.to_json(),
        }
        if self.nucleus is not None:
            data["nucleus"] = [list(e.word) for e in self.nucleus]
        return data


def _signature(g, depth=3):
    return pattern_at(g, (), depth).data


def _dedup_by_equality(elems, state_cap=DEFAULT_STATE_CAP):
    """Keep the first representative of each automorphism; a shallow window
    signature prefilters so full equality tests only run within buckets."""
    buckets = {}
    out = []
    for e in elems:
        sig = _signature(e)
        match = False
        for other in buckets.get(sig, []):
            if equals(e, other, state_cap):
                match = True
                break
        if not match:
            buckets.setdefault(sig, []).append(e)
            out.append(e)
    return out


def stabilizer_generators(gens, level, cap=DEFAULT_ELEMENT_CAP, state_cap=DEFAULT_STATE_CAP):
    """Schreier generators of the level-`level` stabilizer of the group the
    given section-closed elements generate.

    The finite image at the given level is enumerated with transversal words;
    each transversal representative r and generator g (and inverse) yields
    r*g*rep(r*g)^-1, which fixes the level.  Identities are dropped and
    duplicates (as automorphisms) removed.
    """
    gens = [g for g in gens if g.word]
    if level == 0:
        return _dedup_by_equality(gens, state_cap)
    if not gens:
        return []
    imgs = [level_perm(g, level) for g in gens]
    words = ops.closure_with_words(imgs, cap)

    def element_for(word):
        out = None
        for i in word:
            out = gens[i] if out is None else multiply(out, gens[i])
        return out if out is not None else gens[0].machine.identity()

    reps = {lp: element_for(w) for lp, w in sorted(words.items())}
    out = []
    for lp in sorted(reps):
        r = reps[lp]
        for g, img in list(zip(gens, imgs)) + [
            (inverse(g), ops.invert(img)) for g, img in zip(gens, imgs)
        ]:
            x = multiply(r, g)
            target = reps[ops.compose(lp, img)]
            cand = multiply(x, inverse(target))
            if not is_identity(cand, state_cap):
                out.append(cand)
    out = _dedup_by_equality(out, state_cap) if len(out) <= EQUALS_DEDUP_MAX else out
    return out


def nucleus(generators, max_iter=64, cap=4096, state_cap=DEFAULT_STATE_CAP):
    """Smallest section-closed set absorbing all deep sections of products.

    Grows from the section- and inverse-closed generators by adding, for each
    pair (f, g), every section of f*g that keeps occurring at arbitrarily deep
    levels; then prunes back to the elements that are themselves deep sections
    of products of the surviving set.  Failure to stabilize within the caps is
    reported as possibly non-contracting.
    """
    gens = machines.to_common_machine(list(generators))
    if not gens:
        raise ValueError("need at least one generator")
    machine = gens[0].machine
    seed = [machine.identity()]
    seed += section_closure(gens + [inverse(g) for g in gens], cap)
    items = _dedup_by_equality(seed, state_cap)

    def contains(e, buckets):
        for other in buckets.get(_signature(e), []):
            if equals(e, other, state_cap):
                return True
        return False

    buckets = {}
    pool = []
    for e in items:
        buckets.setdefault(_signature(e), []).append(e)
        pool.append(e)
    if len(pool) > cap:
        raise CapExceeded(
            f"possibly non-contracting: nucleus grew past {cap} elements"
        )

    for _ in range(max_iter):
        added = False
        snapshot = list(pool)
        for f in snapshot:
            for g in snapshot:
                h = multiply(f, g)
                for w in _attractor(machine, h.word, cap * 16):
                    e = Element._raw(machine, w)
                    if not contains(e, buckets):
                        if len(pool) >= cap:
                            raise CapExceeded(
                                "possibly non-contracting: nucleus grew past "
                                f"{cap} elements"
                            )
                        buckets.setdefault(_signature(e), []).append(e)
                        pool.append(e)
                        added = True
        if not added:
            break
    else:
        raise CapExceeded(
            f"possibly non-contracting: no fixed point within {max_iter} rounds"
        )

    # prune to elements that persist as deep sections of pairwise products
    while True:
        pbuckets = {}
        for f in pool:
            for g in pool:
                for w in _attractor(machine, multiply(f, g).word, cap * 16):
                    e = Element._raw(machine, w)
                    if not contains(e, pbuckets):
                        pbuckets.setdefault(_signature(e), []).append(e)
        keep = [e for e in pool if contains(e, pbuckets)]
        if len(keep) == len(pool):
            return keep
        pool = keep


def _attractor(machine, word, cap):
    """Section words of `word` that occur at arbitrarily deep levels: the
    nodes of the finite section graph reachable from some cycle."""
    succ = {}
    stack = [word]
    while stack:
        w = stack.pop()
        if w in succ:
            continue
        if len(succ) >= cap:
            raise CapExceeded("section graph exceeds cap")
        kids = tuple(section_word(machine, w, x)[0] for x in range(machine.k))
        succ[w] = kids
        stack.extend(kids)
    on_cycle = []
    for v in succ:
        seen = set(succ[v])
        frontier = list(succ[v])
        hit = v in seen
        while frontier and not hit:
            new = []
            for u in frontier:
                for t in succ[u]:
                    if t == v:
                        hit = True
                    if t not in seen:
                        seen.add(t)
                        new.append(t)
            frontier = new
        if hit:
            on_cycle.append(v)
    reach = set(on_cycle)
    frontier = on_cycle
    while frontier:
        new = []
        for u in frontier:
            for t in succ[u]:
                if t not in reach:
                    reach.add(t)
                    new.append(t)
        frontier = new
    return sorted(reach)


def sections_at_depth(g, depth):
    """All sections of g at the given depth (one Element per vertex)."""
    m = g.machine
    rows = [g.word]
    for _ in range(depth):
        rows = [section_word(m, w, x)[0] for w in rows for x in range(m.k)]
    return [Element._raw(m, w) for w in rows]


def pattern_closure(
    generators,
    size,
    contracting=False,
    element_cap=DEFAULT_ELEMENT_CAP,
    state_cap=DEFAULT_STATE_CAP,
    nucleus_max_iter=64,
    nucleus_cap=4096,
):
    """Branch presentation whose depth-n images realize exactly the portraits
    whose size-`size` windows appear in the group the generators generate."""
    if size < 1:
        raise ValueError("window size must be >= 1")
    gens = machines.to_common_machine(list(generators))
    if not gens:
        raise ValueError("need at least one generator")
    sgens = section_closure(gens, element_cap)
    nuc = None
    if contracting:
        nuc = nucleus(sgens, nucleus_max_iter, nucleus_cap, state_cap)
    allowed = essential_patterns(sgens, size, element_cap)
    # the section-closed generators already generate a group realizing every
    # essential pattern at the root; per-pattern witness elements are only
    # worth carrying as explicit base generators while the pattern set is
    # small, otherwise they swamp the Schreier step downstream
    pool = sgens + list(nuc or [])
    if len(allowed) <= EQUALS_DEDUP_MAX // 8:
        pool = [allowed.witness_element(p) for p in allowed] + pool
    base = section_closure(pool, element_cap)
    base = [e for e in base if e.word]
    if len(base) <= EQUALS_DEDUP_MAX:
        base = _dedup_by_equality(base, state_cap)
    s = size - 1
    stab = stabilizer_generators(base, s, element_cap, state_cap)
    machine = base[0].machine if base else gens[0].machine
    return BranchPresentation(
        machine=machine,
        level=s,
        base=tuple(base),
        stab_gens=tuple(stab),
        allowed=allowed,
        nucleus=tuple(nuc) if nuc is not None else None,
    )


def _delta_generators(pres, depth):
    """delta_u(h) for the stabilizer generators h and |u| <= depth - level - 1;
    deeper supports act trivially above the requested depth."""
    out = []
    maxlen = depth - pres.level - 1
    if maxlen < 0:
        return out
    for h in pres.stab_gens:
        for length in range(maxlen + 1):
            for u in tree_level(pres.k, length):
                out.append(delta(u, h))
    return out


def quotient_generators(pres, depth):
    """Size-`depth` patterns generating the presentation's image at that depth."""
    pats = []
    seen = set()
    for g in list(pres.base) + _delta_generators(pres, depth):
        p = pattern_at(g, (), depth)
        if p.data not in seen:
            seen.add(p.data)
            pats.append(p)
    return pats


def quotient_group(pres, depth):
    """The image of the presentation at the given depth as a PermGroup."""
    gens = [p.leaf_perm() for p in quotient_generators(pres, depth)]
    if not gens:
        gens = [ops.identity(pres.k**depth)]
    return PermGroup(pres.k, depth, gens)


def verify_closure(pres, C, depth, cap=DEFAULT_ELEMENT_CAP):
    """True iff the breadth-first closure of the depth-`depth` images equals
    the truncation DP of the constraint system (exact set equality)."""
    from treegrp.constrained import truncation_leaf_perms

    if C.k != pres.k or C.size != pres.level + 1:
        raise ValueError("constraint system does not match the presentation")
    dp = truncation_leaf_perms(C, depth, cap)
    gens = [p.leaf_perm() for p in quotient_generators(pres, depth)]
    if not gens:
        return len(dp) == 1
    bfs = ops.closure(gens, cap)
    return bfs == set(dp)


def verify_branching(pres, depth, samples=20, seed=0, cap=DEFAULT_ELEMENT_CAP):
    """Sample tuples over the stabilizer generators, assemble them below the
    root, and check the result lands in the depth image of the stabilizer."""
    k = pres.k
    dgens = [level_perm(g, depth) for g in _delta_generators(pres, depth)]
    if dgens:
        image = ops.closure(dgens, cap)
    else:
        image = {ops.identity(k**depth)}
    rng = random.Random(seed)
    stab = list(pres.stab_gens)
    machine = pres.machine
    for _ in range(samples):
        assembled = machine.identity()
        for x in range(k):
            h = machine.identity()
            for _ in range(rng.randrange(0, 3)):
                f = rng.choice(stab) if stab else machine.identity()
                if rng.random() < 0.5:
                    f = inverse(f)
                h = multiply(h, f)
            assembled = multiply(assembled, delta((x,), h))
        if level_perm(assembled, depth) not in image:
            return False
    return True
