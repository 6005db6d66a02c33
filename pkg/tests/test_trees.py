import pytest

from treegrp.trees import (
    check_alphabet,
    check_perm,
    compose_perm,
    cycle_notation,
    identity_perm,
    invert_perm,
    level,
    parse_vertex,
    subtree_size,
    vertex_rank,
    vertex_str,
)


def test_alphabet_rejects_small_k():
    with pytest.raises(ValueError):
        check_alphabet(1)
    with pytest.raises(ValueError):
        check_alphabet(0)
    assert check_alphabet(2) == 2


def test_compose_involution_is_identity():
    swap = (1, 0)
    assert compose_perm(swap, swap) == (0, 1)


def test_compose_identity_is_neutral():
    p = (2, 0, 1)
    assert compose_perm(identity_perm(3), p) == p
    assert compose_perm(p, identity_perm(3)) == p


def test_compose_standard_cycle_squared():
    # rho = (0 1 2) has images (1, 2, 0); rho^2 is the cycle (0 2 1)
    rho = (1, 2, 0)
    assert compose_perm(rho, rho) == (2, 0, 1)
    assert cycle_notation(compose_perm(rho, rho)) == "(0 2 1)"


def test_compose_is_right_factor_first():
    p = (1, 2, 0)
    q = (0, 2, 1)
    assert compose_perm(p, q) == tuple(p[q[x]] for x in range(3))


def test_compose_associative_and_inverse():
    import random

    rng = random.Random(1)
    for _ in range(50):
        k = rng.choice([2, 3, 5])
        ps = []
        for _ in range(3):
            img = list(range(k))
            rng.shuffle(img)
            ps.append(tuple(img))
        p, q, r = ps
        assert compose_perm(compose_perm(p, q), r) == compose_perm(p, compose_perm(q, r))
        assert compose_perm(p, invert_perm(p)) == identity_perm(k)
        assert compose_perm(invert_perm(p), p) == identity_perm(k)


def test_check_perm_rejects_non_bijections():
    with pytest.raises(ValueError):
        check_perm((0, 0))
    with pytest.raises(ValueError):
        check_perm((0, 1), k=3)


def test_level_root():
    assert level(2, 0) == [()]


def test_level_binary_two():
    assert level(2, 2) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert [vertex_str(v) for v in level(2, 2)] == ["00", "01", "10", "11"]


def test_level_counts_and_distinct():
    for k, n in [(2, 3), (3, 2), (5, 2)]:
        words = level(k, n)
        assert len(words) == k**n
        assert len(set(words)) == k**n
        assert words == sorted(words)


def test_vertex_serialization_round_trip():
    assert parse_vertex("", 2) == ()
    assert parse_vertex("011", 2) == (0, 1, 1)
    assert vertex_str((0, 1, 1)) == "011"
    with pytest.raises(ValueError):
        parse_vertex("2", 2)


def test_subtree_size_and_rank():
    assert subtree_size(2, 3) == 7
    assert subtree_size(3, 2) == 4
    assert vertex_rank((1, 0), 2) == 2
    assert vertex_rank((), 2) == 0
