import random

import pytest

from treegrp import _pyops, ops
from treegrp.errors import CapExceeded

try:
    from treegrp import _speedups
except ImportError:
    _speedups = None

needs_compiled = pytest.mark.skipif(
    _speedups is None, reason="compiled kernels not built"
)


def random_perm(rng, n, as_bytes=True):
    img = list(range(n))
    rng.shuffle(img)
    return bytes(img) if as_bytes else tuple(img)


def test_pure_compose_matches_definition():
    rng = random.Random(101)
    for _ in range(50):
        n = rng.randrange(2, 40)
        p, q = random_perm(rng, n), random_perm(rng, n)
        r = _pyops.compose(p, q)
        assert list(r) == [p[q[i]] for i in range(n)]


def test_pure_invert():
    rng = random.Random(103)
    for _ in range(20):
        n = rng.randrange(2, 40)
        p = random_perm(rng, n)
        assert _pyops.compose(p, _pyops.invert(p)) == _pyops.identity(n)


def test_pure_tuple_mode():
    p = (1, 2, 0)
    q = (0, 2, 1)
    assert _pyops.compose(p, q) == (1, 0, 2)
    els = _pyops.closure([p], 100)
    assert len(els) == 3


def test_closure_of_symmetric_group():
    swap = bytes([1, 0, 2, 3])
    cyc = bytes([1, 2, 3, 0])
    els = _pyops.closure([swap, cyc], 100)
    assert len(els) == 24


def test_closure_cap():
    cyc = bytes([1, 2, 3, 0])
    with pytest.raises(CapExceeded):
        _pyops.closure([cyc], 2)


def test_closure_contains():
    cyc = bytes([1, 2, 3, 0])
    assert _pyops.closure_contains([cyc], bytes([2, 3, 0, 1]), 100)
    assert not _pyops.closure_contains([cyc], bytes([1, 0, 2, 3]), 100)
    assert _pyops.closure_contains([cyc], bytes(range(4)), 100)


def test_closure_with_words_certifies():
    swap = bytes([1, 0, 2])
    cyc = bytes([1, 2, 0])
    words = ops.closure_with_words([swap, cyc], 100)
    assert len(words) == 6
    gens = [swap, cyc]
    for el, word in words.items():
        acc = bytes(range(3))
        for i in reversed(word):
            acc = _pyops.compose(gens[i], acc)
        assert acc == el


@needs_compiled
def test_compiled_compose_matches_pure():
    rng = random.Random(107)
    for _ in range(100):
        n = rng.randrange(2, 200)
        p, q = random_perm(rng, n), random_perm(rng, n)
        assert _speedups.compose(p, q) == _pyops.compose(p, q)
        assert _speedups.invert(p) == _pyops.invert(p)


@needs_compiled
def test_compiled_closure_matches_pure():
    rng = random.Random(109)
    for _ in range(10):
        n = rng.randrange(3, 9)
        gens = [random_perm(rng, n) for _ in range(rng.randrange(1, 3))]
        assert _speedups.closure(gens, 1 << 16) == _pyops.closure(gens, 1 << 16)


@needs_compiled
def test_compiled_closure_cap():
    cyc = bytes([1, 2, 3, 0])
    with pytest.raises(CapExceeded):
        _speedups.closure([cyc], 2)


@needs_compiled
def test_compiled_contains_matches_pure():
    rng = random.Random(113)
    for _ in range(20):
        n = rng.randrange(3, 8)
        gens = [random_perm(rng, n)]
        target = random_perm(rng, n)
        assert _speedups.closure_contains(gens, target, 1 << 16) == _pyops.closure_contains(
            gens, target, 1 << 16
        )


def test_dispatch_handles_large_degree_tuples():
    p = tuple(range(1, 300)) + (0,)
    els = ops.closure([p], 400)
    assert len(els) == 300


def test_pure_env_override(monkeypatch):
    import importlib
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "from treegrp import ops; print(ops.IMPL)"],
        env={"TREEGRP_PURE": "1", "PATH": "/usr/bin:/bin"},
        capture_output=True,
        text=True,
    )
    assert out.stdout.strip() == "pure"
