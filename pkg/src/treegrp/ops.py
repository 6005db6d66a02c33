"""Kernel dispatch: compiled permutation ops when available, else pure Python.

The compiled module only handles bytes-encoded permutations (degree <= 256);
anything larger is routed to the pure implementation.  Set TREEGRP_PURE=1 to
force the fallback (the benchmark uses this to compare the two).
"""

import os

from treegrp import _pyops

if os.environ.get("TREEGRP_PURE"):
    _fast = None
else:
    try:
        from treegrp import _speedups as _fast
    except ImportError:
        _fast = None

IMPL = "compiled" if _fast is not None else "pure"


def compose(p, q):
    if _fast is not None and isinstance(p, bytes):
        return _fast.compose(p, q)
    return _pyops.compose(p, q)


def invert(p):
    if _fast is not None and isinstance(p, bytes):
        return _fast.invert(p)
    return _pyops.invert(p)


def identity(degree, as_bytes=True):
    return _pyops.identity(degree, as_bytes)


def closure(gens, cap):
    gens = list(gens)
    if _fast is not None and gens and isinstance(gens[0], bytes):
        return _fast.closure(gens, cap)
    return _pyops.closure(gens, cap)


def closure_contains(gens, target, cap):
    gens = list(gens)
    if _fast is not None and gens and isinstance(gens[0], bytes):
        return _fast.closure_contains(gens, target, cap)
    return _pyops.closure_contains(gens, target, cap)


def closure_with_words(gens, cap):
    """Closure that also records, per element, one product word over the
    generators (tuple of generator indices, leftmost factor applied last).

    Word bookkeeping is never the bottleneck, so there is no compiled variant.
    """
    from treegrp.errors import CapExceeded

    gens = list(gens)
    if not gens:
        raise ValueError("need at least one generator")
    deg = len(gens[0])
    ident = identity(deg, isinstance(gens[0], bytes))
    words = {ident: ()}
    frontier = [ident]
    while frontier:
        new = []
        for i, g in enumerate(gens):
            for b in frontier:
                r = compose(g, b)
                if r not in words:
                    if len(words) >= cap:
                        raise CapExceeded(f"closure exceeds cap {cap}")
                    words[r] = (i,) + words[b]
                    new.append(r)
        frontier = new
    return words
