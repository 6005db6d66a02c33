import random

import pytest

from treegrp import families, ops
from treegrp.constrained import membership
from treegrp.families import (
    beta,
    beta_moduli,
    beta_names,
    decompose_word,
    family_from_name,
    parse_gen_word,
    word_element,
)
from treegrp.machines import (
    apply,
    decoration,
    equals,
    inverse,
    is_identity,
    multiply,
    section,
    stabilizes_level,
)
from treegrp.patterns import essential_patterns, is_pattern_group, is_transitive, pattern_at
from treegrp.permgroup import level_perm
from treegrp.trees import identity_perm, level


def rand_word(fam, rng, names=None, maxlen=6):
    names = names or list(fam.word_rules)
    return tuple(
        (rng.choice(names), rng.choice((1, -1))) for _ in range(rng.randrange(0, maxlen))
    )


def test_odometer_definition():
    for k in (2, 3, 5):
        fam = families.odometer(k)
        t = fam.generators["t"]
        assert decoration(t, ()) == tuple((x + 1) % k for x in range(k))
        for x in range(k - 1):
            assert is_identity(section(t, (x,)))
        assert equals(section(t, (k - 1,)), t)


def test_tower_stabilizes_exactly_m_levels():
    fam = families.odometer_family(2, 1, depth=6)
    for m in (2, 3, 4, 5):
        tm = fam.generators[f"t_{m}"]
        assert stabilizes_level(tm, m)
        assert not stabilizes_level(tm, m + 1)


def test_tower_base_power_states():
    fam = families.odometer_family(3, 1)
    t = fam.generators["t"]
    t3 = multiply(t, multiply(t, t))
    assert equals(fam.generators["t_1"], t3)
    # t_2 has a single deep section equal to t^3
    t_2 = fam.generators["t_2"]
    assert is_identity(section(t_2, (0,))) and is_identity(section(t_2, (1,)))
    assert equals(section(t_2, (2,)), t3)


def test_tower_powers_have_infinite_order():
    t = families.odometer(2).generators["t"]
    g = t
    for m in (1, 2, 4, 8, 16, 32, 64):
        # t^m moves the all-zero vertex at depth 7 for every m <= 64
        while len(g.word) < m:
            g = multiply(g, t)
        v = (0,) * 7
        assert apply(g, v) != v


def test_gb_generators_are_involutions():
    fam = families.gB()
    for name, g in fam.generators.items():
        assert is_identity(multiply(g, g))


def test_gb_membership_law():
    fam = families.gB()
    rng = random.Random(71)
    for _ in range(10):
        g = word_element(fam, rand_word(fam, rng))
        # members have equal child decorations under every vertex
        for u in level(2, 2):
            assert decoration(g, u + (0,)) == decoration(g, u + (1,))
        assert membership(g, fam.constraints)


def test_gr_membership_law():
    fam = families.gR()
    rng = random.Random(73)
    for _ in range(10):
        g = word_element(fam, rand_word(fam, rng))
        for u in level(2, 2):
            d = decoration(g, u)
            d0 = decoration(g, u + (0,))
            d1 = decoration(g, u + (1,))
            parity = sum(1 for p in (d, d0, d1) if p != identity_perm(2))
            assert parity % 2 == 0
        assert membership(g, fam.constraints)


def test_trivial3_allowed_census():
    fam = families.trivial3()
    assert len(fam.constraints.allowed) == 16
    from treegrp.patterns import PatternSet

    ps = PatternSet(2, 3, fam.constraints.allowed)
    assert is_pattern_group(ps)
    assert is_transitive(ps)


def test_grigorchuk_relations():
    fam = families.grigorchuk()
    a, b, c, d = (fam.generators[n] for n in "abcd")
    for g in (a, b, c, d):
        assert is_identity(multiply(g, g))
    assert is_identity(multiply(b, multiply(c, d)))
    assert equals(section(b, (1,)), c)
    assert equals(section(b, (0,)), a)
    assert equals(section(d, (1,)), b)


def test_grigorchuk_essential_patterns_transitive():
    fam = families.grigorchuk()
    ps = essential_patterns(fam.closure_generators(), 4)
    assert is_pattern_group(ps)
    assert is_transitive(ps)


def test_decompose_word_odometer_square():
    fam = families.odometer_family(2, 1)
    W = parse_gen_word("t t")
    assert decompose_word(fam, W, 0) == (("t", 1),)
    assert decompose_word(fam, W, 1) == (("t", 1),)


def test_decompose_word_gb_tower():
    fam = families.gB()
    W = parse_gen_word("a_2")
    assert decompose_word(fam, W, 0) == ()
    assert decompose_word(fam, W, 1) == (("a_1", 1),)


def test_decompose_empty_word():
    fam = families.gB()
    assert decompose_word(fam, (), 0) == ()
    assert decompose_word(fam, (), 1) == ()


def test_decompose_rejects_unstable_words():
    fam = families.odometer_family(2, 1)
    with pytest.raises(ValueError):
        decompose_word(fam, parse_gen_word("t"), 0)
    gb = families.gB()
    with pytest.raises(ValueError):
        decompose_word(gb, parse_gen_word("a a_1 a_1"), 1)


def test_decomposition_represents_sections():
    rng = random.Random(79)
    for fam in (families.odometer_family(2, 1), families.odometer_family(3, 0), families.gB()):
        checked = 0
        while checked < 12:
            W = rand_word(fam, rng)
            try:
                parts = [decompose_word(fam, W, x) for x in range(fam.k)]
            except ValueError:
                continue
            checked += 1
            g = word_element(fam, W)
            for x, Wx in enumerate(parts):
                assert equals(section(g, (x,)), word_element(fam, Wx), 1 << 16)


def test_exponent_recursion_odometer():
    # sum_x exp_t(W_x) = exp_t(W) + k^s exp_{t_{s+1}}(W), and the deeper
    # letters shift down by one index
    rng = random.Random(83)
    for k, s in [(2, 1), (3, 1), (2, 2)]:
        fam = families.odometer_family(k, s, depth=6)
        names = ["t"] + [f"t_{m}" for m in range(s + 1, 6)]
        checked = 0
        while checked < 10:
            W = rand_word(fam, rng, names=names)
            try:
                parts = [decompose_word(fam, W, x) for x in range(k)]
            except ValueError:
                continue
            checked += 1

            def exp(word, nm):
                return sum(sg for n2, sg in word if n2 == nm)

            assert sum(exp(Wx, "t") for Wx in parts) == exp(W, "t") + k**s * exp(
                W, f"t_{s + 1}"
            )
            for m in range(s + 1, 5):
                assert sum(exp(Wx, f"t_{m}") for Wx in parts) == exp(W, f"t_{m + 1}")


def test_exponent_recursion_gb():
    rng = random.Random(89)
    fam = families.gB()
    names = ["a"] + [f"a_{m}" for m in range(1, 6)]
    checked = 0
    while checked < 10:
        W = rand_word(fam, rng, names=names)
        try:
            W0 = decompose_word(fam, W, 0)
            W1 = decompose_word(fam, W, 1)
        except ValueError:
            continue
        checked += 1

        def exp(word, nm):
            return sum(sg for n2, sg in word if n2 == nm)

        assert exp(W0, "a") == exp(W, "a_1")
        assert exp(W1, "a") == exp(W, "a_1")
        for m in range(1, 5):
            assert exp(W0, f"a_{m}") + exp(W1, f"a_{m}") == exp(W, f"a_{m + 1}")


def test_beta_examples():
    fam = families.odometer_family(2, 1)
    assert beta(fam, parse_gen_word("t t_2 t^-1"), 3) == (0, 1)
    gb = families.gB()
    assert beta(gb, parse_gen_word("a a_1 a a_1"), 2) == (0, 0)
    assert beta_names(fam, 4) == ("t", "t_2", "t_3")
    assert beta_moduli(fam, 4) == (4, 2, 2)
    assert beta_moduli(gb, 3) == (2, 2, 2)
    with pytest.raises(ValueError):
        beta(fam, parse_gen_word("t_9"), 3)


def test_beta_vanishes_on_relators():
    # breadth-first collisions in the level-n image provide relator words;
    # the exponent map must kill them
    for fam, names, n in [
        (families.odometer_family(2, 1), ["t", "t_2"], 3),
        (families.gB(), ["a", "a_1", "a_2"], 3),
    ]:
        gens = [fam.generators[nm] for nm in names]
        lps = [level_perm(g, n) for g in gens]
        words = {}
        ident = ops.identity(2**n)
        words[ident] = ()
        frontier = [ident]
        relators = []
        while frontier and len(relators) < 8:
            new = []
            for i, lp in enumerate(lps):
                for b in frontier:
                    r = ops.compose(lp, b)
                    word = ((names[i], 1),) + words[b]
                    if r in words:
                        other = words[r]
                        rel = word + tuple((nm, -sg) for nm, sg in reversed(other))
                        relators.append(rel)
                    else:
                        words[r] = word
                        new.append(r)
            frontier = new
        assert relators
        for rel in relators:
            assert multiply(
                word_element(fam, rel), fam.machine.identity()
            ) is not None
            img = level_perm(word_element(fam, rel), n)
            assert img == ident
            assert beta(fam, rel, n) == (0,) * len(beta_names(fam, n))


def test_beta_zero_on_stabilizer_words():
    # words representing elements of the depth-n stabilizer have zero vector
    rng = random.Random(97)
    fam = families.gB()
    names = ["a", "a_1", "a_2"]
    n = 3
    found = 0
    tries = 0
    while found < 5 and tries < 4000:
        tries += 1
        W = rand_word(fam, rng, names=names, maxlen=8)
        g = word_element(fam, W)
        if stabilizes_level(g, n):
            found += 1
            assert beta(fam, W, n) == (0,) * n
    assert found


def test_family_from_name():
    fam = family_from_name("odometer:k=3,s=1")
    assert fam.k == 3 and fam.closure_size == 2
    assert family_from_name("gB").name == "gB"
    assert family_from_name("gR").constraints is not None
    assert family_from_name("trivial3").constraints.size == 3
    assert family_from_name("grigorchuk").closure_size == 4
    with pytest.raises(ValueError):
        family_from_name("nope")
    with pytest.raises(ValueError):
        family_from_name("odometer:q=1")


def test_named_elements_and_words():
    fam = families.gB()
    g = fam.element("a a_1^-1")
    assert equals(g, multiply(fam.generators["a"], inverse(fam.generators["a_1"])))
    assert is_identity(fam.element(""))
