"""Built-in machines and constraint systems, plus the word-exponent calculus.

Families:

  * odometer(k): the adding machine t, cycling the first letter and carrying
    into the last subtree; odometer towers add the elements t_m fixing m
    levels with a single deep t-section.
  * gB / gR: the two binary size-2 systems.  B forbids the windows whose two
    child decorations differ (members satisfy d(u0) = d(u1) everywhere); R
    forbids those violating d(u) + d(u0) + d(u1) = 0 mod 2.
  * trivial3: the binary size-3 system whose only portrait is the identity.
  * grigorchuk: the standard five-state binary machine a, b, c, d.

The word calculus (decompose_word, beta) works on formal generator words, not
elements: sections of words are computed by per-generator rewrite rules, and
beta reads off signed letter counts modulo the family's moduli.
"""

from dataclasses import dataclass

from treegrp.constrained import ConstraintSystem
from treegrp.machines import Element, MachineSpec, inverse, multiply
from treegrp.patterns import (
    all_patterns,
    compose_pattern,
    essential_patterns,
    pattern_at,
    subpattern_at,
)
from treegrp.trees import check_alphabet, compose_perm, identity_perm, invert_perm

MAX_TOWER_DEPTH = 8


@dataclass(frozen=True)
class FamilySpec:
    """A named machine with designated generators and optional constraints."""

    name: str
    k: int
    machine: MachineSpec
    generators: dict
    closure_size: int | None = None
    closure_gen_names: tuple = ()
    constraints: ConstraintSystem | None = None
    word_rules: dict | None = None
    tower_level: int | None = None
    depth_note: str = ""

    def element(self, ref):
        """Named generator, or a product like "t t_2^-1 a"."""
        if ref in self.generators:
            return self.generators[ref]
        out = None
        for name, sign in parse_gen_word(ref):
            if name not in self.generators:
                raise ValueError(f"unknown generator {name!r} in {self.name}")
            g = self.generators[name]
            if sign < 0:
                g = inverse(g)
            out = g if out is None else multiply(out, g)
        if out is None:
            out = self.machine.identity()
        return out

    def closure_generators(self):
        return [self.generators[n] for n in self.closure_gen_names]


def parse_gen_word(text):
    """Parse "a a_1^-1 t" into ((name, sign), ...)."""
    out = []
    for tok in text.replace("*", " ").split():
        if tok.endswith("^-1"):
            out.append((tok[:-3], -1))
        elif tok.endswith("'"):
            out.append((tok[:-1], -1))
        else:
            out.append((tok, 1))
    return tuple(out)


def _rho(k):
    """The standard cycle 0 -> 1 -> ... -> k-1 -> 0."""
    return tuple((x + 1) % k for x in range(k))


def odometer_machine(k):
    k = check_alphabet(k)
    e = identity_perm(k)
    states = [
        (e, (0,) * k),
        (_rho(k), (0,) * (k - 1) + (1,)),
    ]
    return MachineSpec(k, states, ["1", "t"])


def odometer(k):
    """The adding-machine family: a single generator t of infinite order."""
    machine = odometer_machine(k)
    return FamilySpec(
        name=f"odometer:k={k},s=0",
        k=k,
        machine=machine,
        generators={"t": machine.state("t")},
        closure_size=1,
        closure_gen_names=("t",),
        tower_level=0,
        word_rules=_odometer_rules(k, 0, MAX_TOWER_DEPTH),
    )


def odometer_tower(k, s, depth=MAX_TOWER_DEPTH):
    """Machine holding t, the power states t^(k^j) for j <= s, and the deep
    generators t_m = (1, ..., 1, t_{m-1}) for s < m < depth.

    t_s itself is the word t^(k^s); each t_m for m > s is a genuine state.
    Returns (machine, {name: Element}).
    """
    k = check_alphabet(k)
    if s < 0 or depth > MAX_TOWER_DEPTH + 1:
        raise ValueError(f"tower depth limited to {MAX_TOWER_DEPTH}")
    e = identity_perm(k)
    states = [
        (e, (0,) * k),
        (_rho(k), (0,) * (k - 1) + (1,)),
    ]
    names = ["1", "t"]
    # t^(k^j) = (t^(k^(j-1)), ..., t^(k^(j-1))): a chain of power states
    prev = 1
    for j in range(1, s + 1):
        states.append((e, (prev,) * k))
        names.append(f"t^{k**j}")
        prev = len(states) - 1
    for m in range(s + 1, depth):
        states.append((e, (0,) * (k - 1) + (prev,)))
        names.append(f"t_{m}")
        prev = len(states) - 1
    machine = MachineSpec(k, states, names)
    gens = {"t": machine.state("t")}
    gens[f"t_{s}"] = Element(machine, (2,) * (k**s))  # the word t^(k^s)
    for m in range(s + 1, depth):
        gens[f"t_{m}"] = machine.state(f"t_{m}")
    return machine, gens


def _odometer_rules(k, s, depth):
    """Section rules for words over {t, t_{s+1}, ..., t_{depth-1}}."""
    rules = {"t": (_rho(k), {k - 1: (("t", 1),)})}
    rules[f"t_{s + 1}"] = (identity_perm(k), {k - 1: (("t", 1),) * (k**s)})
    for m in range(s + 2, depth):
        rules[f"t_{m}"] = (identity_perm(k), {k - 1: ((f"t_{m - 1}", 1),)})
    return rules


def odometer_family(k, s, depth=MAX_TOWER_DEPTH):
    """Constrained family allowing the size-(s+1) windows the adding machine
    realizes; carries the tower generators for quotient analysis."""
    machine, gens = odometer_tower(k, s, depth)
    allowed = essential_patterns([gens["t"]], s + 1)
    constraints = ConstraintSystem(k, s + 1, allowed=allowed.members)
    return FamilySpec(
        name=f"odometer:k={k},s={s}",
        k=k,
        machine=machine,
        generators=gens,
        closure_size=s + 1,
        closure_gen_names=("t",),
        constraints=constraints,
        word_rules=_odometer_rules(k, s, depth),
        tower_level=s,
        depth_note=f"quotient depths documented up to {depth}",
    )


def _binary_size2_patterns():
    """The eight binary size-2 patterns keyed by their dihedral labels."""
    machine = odometer_machine(2)
    t = machine.state("t")
    a_machine = MachineSpec(
        2, [(identity_perm(2), (0, 0)), ((1, 0), (0, 0))], ["1", "a"]
    )
    labels = {}
    tt = machine.identity()
    for i, name in enumerate(["1", "t", "t^2", "t^3"]):
        labels[name] = pattern_at(tt, (), 2)
        tt = multiply(tt, t)
    a = a_machine.state("a")
    pa = pattern_at(a, (), 2)
    for i, name in enumerate(["a", "at", "at^2", "at^3"]):
        labels[name] = compose_pattern(pa, labels[["1", "t", "t^2", "t^3"][i]])
    return labels


def figure_labels():
    """Label -> size-2 binary pattern for 1, t, t^2, t^3, a, at, at^2, at^3."""
    return dict(_binary_size2_patterns())


def gb_machine(depth=MAX_TOWER_DEPTH):
    """States 1, a, a_1, ..., a_{depth-1} with a = (01)(1,1), a_1 = (a,a) and
    a_{m+1} = (1, a_m)."""
    e = identity_perm(2)
    swap = (1, 0)
    states = [(e, (0, 0)), (swap, (0, 0)), (e, (1, 1))]
    names = ["1", "a", "a_1"]
    for m in range(2, depth):
        states.append((e, (0, len(states) - 1)))
        names.append(f"a_{m}")
    return MachineSpec(2, states, names)


def _gb_rules(depth):
    swap = (1, 0)
    e = identity_perm(2)
    rules = {"a": (swap, {})}
    rules["a_1"] = (e, {0: (("a", 1),), 1: (("a", 1),)})
    for m in range(2, depth):
        rules[f"a_{m}"] = (e, {1: ((f"a_{m - 1}", 1),)})
    return rules


def gB(depth=MAX_TOWER_DEPTH):
    """The binary family whose members have equal child decorations.

    The forbidden size-2 windows are the four with differing children."""
    labels = figure_labels()
    forbidden = [labels[n] for n in ["t", "t^3", "at", "at^3"]]
    machine = gb_machine(depth)
    gens = {"a": machine.state("a")}
    for m in range(1, depth):
        gens[f"a_{m}"] = machine.state(f"a_{m}")
    return FamilySpec(
        name="gB",
        k=2,
        machine=machine,
        generators=gens,
        closure_size=2,
        closure_gen_names=("a", "a_1"),
        constraints=ConstraintSystem(2, 2, forbidden=forbidden),
        word_rules=_gb_rules(depth),
        depth_note=f"quotient depths documented up to {depth}",
    )


def gR(depth=MAX_TOWER_DEPTH):
    """The binary family with decoration parity d(u)+d(u0)+d(u1) = 0 mod 2.

    Forbidden windows are the four parity violations; the odometer tower
    provides generators and quotient candidates."""
    labels = figure_labels()
    forbidden = [labels[n] for n in ["a", "at", "at^2", "at^3"]]
    machine, gens = odometer_tower(2, 1, depth)
    return FamilySpec(
        name="gR",
        k=2,
        machine=machine,
        generators=gens,
        closure_size=2,
        closure_gen_names=("t",),
        constraints=ConstraintSystem(2, 2, forbidden=forbidden),
        word_rules=_odometer_rules(2, 1, depth),
        tower_level=1,
        depth_note=f"quotient depths documented up to {depth}",
    )


def trivial3():
    """Binary size-3 system with a transitive window group but a trivial
    constrained set: parity at the top window, equal children at the bottom
    two windows."""
    labels = figure_labels()
    rset = {labels[n] for n in ["a", "at", "at^2", "at^3"]}
    bset = {labels[n] for n in ["t", "t^3", "at", "at^3"]}
    allowed = []
    for p in all_patterns(2, 3):
        if subpattern_at(p, (), 2) in rset:
            continue
        if subpattern_at(p, (0,), 2) in bset or subpattern_at(p, (1,), 2) in bset:
            continue
        allowed.append(p)
    machine = MachineSpec(
        2,
        [
            (identity_perm(2), (0, 0)),
            (_rho(2), (0, 1)),
            ((1, 0), (0, 0)),
        ],
        ["1", "t", "a"],
    )
    gens = {"t": machine.state("t"), "a": machine.state("a")}
    return FamilySpec(
        name="trivial3",
        k=2,
        machine=machine,
        generators=gens,
        constraints=ConstraintSystem(2, 3, allowed=allowed),
    )


def grigorchuk():
    """The five-state binary machine a = (01)(1,1), b = (a,c), c = (a,d),
    d = (1,b)."""
    e = identity_perm(2)
    swap = (1, 0)
    states = [
        (e, (0, 0)),
        (swap, (0, 0)),
        (e, (1, 3)),
        (e, (1, 4)),
        (e, (0, 2)),
    ]
    machine = MachineSpec(2, states, ["1", "a", "b", "c", "d"])
    gens = {n: machine.state(n) for n in ["a", "b", "c", "d"]}
    return FamilySpec(
        name="grigorchuk",
        k=2,
        machine=machine,
        generators=gens,
        closure_size=4,
        closure_gen_names=("a", "b", "c", "d"),
    )


def family_from_name(name, depth=MAX_TOWER_DEPTH):
    """CLI family syntax: odometer:k=K,s=S | gB | gR | trivial3 | grigorchuk."""
    if name == "gB":
        return gB(depth)
    if name == "gR":
        return gR(depth)
    if name == "trivial3":
        return trivial3()
    if name == "grigorchuk":
        return grigorchuk()
    if name.startswith("odometer"):
        k, s = 2, 0
        if ":" in name:
            _, args = name.split(":", 1)
            for part in args.split(","):
                key, _, val = part.partition("=")
                if key == "k":
                    k = int(val)
                elif key == "s":
                    s = int(val)
                else:
                    raise ValueError(f"unknown odometer option {key!r}")
        return odometer_family(k, s, depth)
    raise ValueError(f"unknown family {name!r}")


def decompose_word(family, word, x):
    """Section at letter x of a formal generator word, as a generator word.

    The input must fix the first level (total root permutation trivial);
    rewriting walks right to left, tracking the image of x through each
    letter's root permutation and emitting that letter's section rule."""
    rules = family.word_rules
    if rules is None:
        raise ValueError(f"family {family.name} has no word calculus")
    k = family.k
    if not 0 <= x < k:
        raise ValueError("letter out of range")
    total = identity_perm(k)
    for name, sign in word:
        if name not in rules:
            raise ValueError(f"unknown letter {name!r}")
        root = rules[name][0]
        total = compose_perm(total, root if sign > 0 else invert_perm(root))
    if total != identity_perm(k):
        raise ValueError("word does not stabilize the first level")
    out = []
    c = x
    for name, sign in reversed(word):
        root, secs = rules[name]
        if sign > 0:
            part = secs.get(c, ())
            c = root[c]
        else:
            c = invert_perm(root)[c]
            part = tuple((n2, -s2) for n2, s2 in reversed(secs.get(c, ())))
        out.append(part)
    out.reverse()
    return tuple(item for part in out for item in part)


def beta(family, word, n):
    """Signed letter counts of a generator word, reduced by the family moduli.

    Odometer towers use (k^(s+1), k, ..., k) over (t, t_{s+1}, ..., t_{n-1});
    the gB tower uses (2, ..., 2) over (a, a_1, ..., a_{n-1})."""
    names = beta_names(family, n)
    moduli = beta_moduli(family, n)
    counts = dict.fromkeys(names, 0)
    for name, sign in word:
        if name not in counts:
            raise ValueError(f"letter {name!r} not in the depth-{n} alphabet")
        counts[name] += sign
    return tuple(counts[nm] % md for nm, md in zip(names, moduli))


def beta_names(family, n):
    if family.tower_level is not None:
        s = family.tower_level
        if n < s + 1:
            raise ValueError("depth below the branching level")
        return ("t",) + tuple(f"t_{m}" for m in range(s + 1, n))
    if family.name == "gB":
        return ("a",) + tuple(f"a_{m}" for m in range(1, n))
    raise ValueError(f"family {family.name} has no exponent map")


def beta_moduli(family, n):
    if family.tower_level is not None:
        s = family.tower_level
        return (family.k ** (s + 1),) + (family.k,) * (n - s - 1)
    if family.name == "gB":
        return (2,) * n
    raise ValueError(f"family {family.name} has no exponent map")


def word_element(family, word):
    """The Element a formal generator word denotes."""
    out = None
    for name, sign in word:
        g = family.generators[name]
        if sign < 0:
            g = inverse(g)
        out = g if out is None else multiply(out, g)
    return out if out is not None else family.machine.identity()
