import json
import random

import pytest

from treegrp import families
from treegrp.closure import (
    BranchPresentation,
    _delta_generators,
    nucleus,
    pattern_closure,
    quotient_generators,
    quotient_group,
    sections_at_depth,
    stabilizer_generators,
    verify_branching,
    verify_closure,
)
from treegrp.constrained import ConstraintSystem, truncation_leaf_perms
from treegrp.errors import CapExceeded
from treegrp.machines import (
    conjugate,
    delta,
    equals,
    inverse,
    is_identity,
    multiply,
    stabilizes_level,
)
from treegrp.patterns import pattern_at
from treegrp.permgroup import PermGroup, level_perm, order
from treegrp import ops


@pytest.fixture(scope="module")
def odometer_pres():
    fam = families.odometer_family(2, 1)
    return fam, pattern_closure([fam.generators["t"]], 2)


@pytest.fixture(scope="module")
def gb_pres():
    fam = families.gB()
    return fam, pattern_closure(fam.closure_generators(), 2)


def test_presentation_invariants(odometer_pres, gb_pres):
    for fam, pres in (odometer_pres, gb_pres):
        assert pres.level == 1
        assert pres.base
        for h in pres.stab_gens:
            assert stabilizes_level(h, pres.level)
        # every base element is a section of some base element's ancestor set:
        # sections of base elements stay within the base up to equality
        from treegrp.machines import section

        for g in pres.base:
            for x in range(fam.k):
                s = section(g, (x,))
                assert is_identity(s) or any(
                    equals(s, other) for other in pres.base
                )


def test_odometer_presentation_matches_parity_system(odometer_pres):
    fam, pres = odometer_pres
    t = fam.generators["t"]
    assert any(equals(g, t) for g in pres.base)
    t2 = multiply(t, t)
    # the stabilizer generators generate the same level-3 image as t^2
    got = PermGroup(2, 3, [level_perm(h, 3) for h in pres.stab_gens])
    want = PermGroup(2, 3, [level_perm(t2, 3)])
    assert got.elements(1 << 12) == want.elements(1 << 12)


def test_verify_closure_odometer(odometer_pres):
    fam, pres = odometer_pres
    for n in (2, 3, 4):
        assert verify_closure(pres, fam.constraints, n)
    counts = [len(truncation_leaf_perms(fam.constraints, n)) for n in (2, 3, 4)]
    assert counts == [4, 16, 256]


def test_verify_closure_at_window_size_is_construction(odometer_pres):
    fam, pres = odometer_pres
    assert verify_closure(pres, fam.constraints, 2)


def test_verify_closure_gb(gb_pres):
    fam, pres = gb_pres
    for n in (2, 3, 4):
        assert verify_closure(pres, fam.constraints, n)
    assert len(truncation_leaf_perms(fam.constraints, 4)) == 256


def test_verify_closure_rejects_wrong_system(odometer_pres):
    fam, pres = odometer_pres
    wrong = families.gB().constraints
    assert not verify_closure(pres, wrong, 3)


def test_quotient_generators_depth_bounds(odometer_pres):
    fam, pres = odometer_pres
    shallow = quotient_generators(pres, 1)
    # at depth <= level only the base truncations remain
    assert len(shallow) <= len(pres.base) + len(pres.stab_gens)
    deep = quotient_generators(pres, 4)
    assert len(deep) > len(shallow)
    G = quotient_group(pres, 2)
    assert order(G) == 4


def test_gb_quotient_order(gb_pres):
    fam, pres = gb_pres
    assert order(quotient_group(pres, 3)) == 16


def test_stabilizer_generators_level_zero():
    fam = families.odometer(2)
    t = fam.generators["t"]
    out = stabilizer_generators([t], 0)
    assert len(out) == 1 and equals(out[0], t)


def test_stabilizer_generators_odometer():
    fam = families.odometer(2)
    t = fam.generators["t"]
    out = stabilizer_generators([t, inverse(t)], 1)
    assert out
    for h in out:
        assert stabilizes_level(h, 1)
    got = PermGroup(2, 4, [level_perm(h, 4) for h in out])
    t2 = multiply(t, t)
    want = PermGroup(2, 4, [level_perm(t2, 4)])
    assert got.elements(1 << 12) == want.elements(1 << 12)


def test_stabilizer_generators_gb_pair():
    fam = families.gB()
    a, a1 = fam.generators["a"], fam.generators["a_1"]
    out = stabilizer_generators([a, a1], 1)
    for h in out:
        assert stabilizes_level(h, 1)
    got = PermGroup(2, 4, [level_perm(h, 4) for h in out])
    want = PermGroup(
        2, 4, [level_perm(a1, 4), level_perm(conjugate(a1, a), 4)]
    )
    assert got.elements(1 << 12) == want.elements(1 << 12)


def test_branching_samples(odometer_pres, gb_pres):
    for fam, pres in (odometer_pres, gb_pres):
        assert verify_branching(pres, 4, samples=15, seed=3)


def test_branching_explicit_tuples(odometer_pres, gb_pres):
    # (h, h) assembled below the root lies in the depth-4 stabilizer image
    for fam, pres in (odometer_pres, gb_pres):
        dgens = [level_perm(g, 4) for g in _delta_generators(pres, 4)]
        image = ops.closure(dgens, 1 << 16)
        h = pres.stab_gens[0]
        assembled = multiply(delta((0,), h), delta((1,), h))
        assert level_perm(assembled, 4) in image


def test_delta_normality(odometer_pres):
    # conjugates of delta generators stay inside the stabilizer image
    fam, pres = odometer_pres
    dgens = [level_perm(g, 4) for g in _delta_generators(pres, 4)]
    image = ops.closure(dgens, 1 << 16)
    rng = random.Random(67)
    for _ in range(10):
        g = rng.choice(pres.base)
        h = rng.choice(pres.stab_gens)
        u = tuple(rng.randrange(2) for _ in range(rng.randrange(0, 3)))
        c = conjugate(delta(u, h), g)
        assert level_perm(c, 4) in image


def test_nucleus_odometer():
    fam = families.odometer(2)
    t = fam.generators["t"]
    nuc = nucleus([t])
    assert len(nuc) == 3
    expected = [fam.machine.identity(), t, inverse(t)]
    for e in expected:
        assert any(equals(e, n) for n in nuc)


def test_nucleus_is_closed_under_product_attractors():
    fam = families.odometer(2)
    nuc = nucleus([fam.generators["t"]])
    # brute force the defining property: deep sections of pairwise products
    # land back in the nucleus
    for f in nuc:
        for g in nuc:
            for s in sections_at_depth(multiply(f, g), 6):
                assert any(equals(s, n) for n in nuc)


def test_nucleus_trivial_group():
    fam = families.odometer(2)
    e = fam.machine.identity()
    nuc = nucleus([e])
    assert len(nuc) == 1 and is_identity(nuc[0])


def test_nucleus_grigorchuk():
    fam = families.grigorchuk()
    nuc = nucleus(list(fam.generators.values()))
    assert len(nuc) == 5
    for name in ["a", "b", "c", "d"]:
        assert any(equals(fam.generators[name], n) for n in nuc)
    for f in nuc:
        for g in nuc:
            for s in sections_at_depth(multiply(f, g), 4):
                assert any(equals(s, n) for n in nuc)


def test_nucleus_cap_raises():
    fam = families.odometer(2)
    with pytest.raises(CapExceeded):
        nucleus([fam.generators["t"]], cap=1)


def test_contracting_closure_sections_enter_nucleus():
    fam = families.odometer_family(2, 1)
    pres = pattern_closure([fam.generators["t"]], 2, contracting=True)
    assert pres.nucleus is not None and len(pres.nucleus) == 3
    for g in pres.base:
        for s in sections_at_depth(g, 6):
            assert any(equals(s, n) for n in pres.nucleus)


def test_grigorchuk_closure_small_window():
    fam = families.grigorchuk()
    pres = pattern_closure(fam.closure_generators(), 2, contracting=True)
    assert len(pres.nucleus) == 5
    C = ConstraintSystem(2, 2, allowed=pres.allowed.members)
    for n in (2, 3, 4):
        assert verify_closure(pres, C, n)
    for g in pres.base:
        for s in sections_at_depth(g, 6):
            assert any(equals(s, n) for n in pres.nucleus)


def test_presentation_json_dump(odometer_pres):
    fam, pres = odometer_pres
    data = pres.to_json()
    text = json.dumps(data, sort_keys=True)
    back = json.loads(text)
    assert back["level"] == 1
    assert back["base"]
    assert back["allowed"]
    from treegrp.machines import MachineSpec

    m = MachineSpec.from_json(back["machine"])
    assert m.k == 2
