# cython: boundscheck=False, wraparound=False
"""Compiled permutation kernels (bytes-encoded permutations, degree <= 256).

Same contracts as treegrp._pyops; treegrp.ops picks whichever is available.
"""

from cpython.bytes cimport PyBytes_FromStringAndSize, PyBytes_AS_STRING

from treegrp.errors import CapExceeded


cdef bytes _compose(const unsigned char* p, const unsigned char* q, Py_ssize_t n):
    cdef bytes out = PyBytes_FromStringAndSize(NULL, n)
    cdef unsigned char* o = <unsigned char*> PyBytes_AS_STRING(out)
    cdef Py_ssize_t i
    for i in range(n):
        o[i] = p[q[i]]
    return out


def compose(bytes p, bytes q):
    """Product p*q acting as q first: result[i] = p[q[i]]."""
    cdef Py_ssize_t n = len(p)
    if len(q) != n:
        raise ValueError("degree mismatch")
    return _compose(<const unsigned char*> PyBytes_AS_STRING(p),
                    <const unsigned char*> PyBytes_AS_STRING(q), n)


def invert(bytes p):
    cdef Py_ssize_t n = len(p)
    cdef const unsigned char* s = <const unsigned char*> PyBytes_AS_STRING(p)
    cdef bytes out = PyBytes_FromStringAndSize(NULL, n)
    cdef unsigned char* o = <unsigned char*> PyBytes_AS_STRING(out)
    cdef Py_ssize_t i
    for i in range(n):
        o[s[i]] = <unsigned char> i
    return out


def identity(Py_ssize_t degree):
    return bytes(range(degree))


def closure(gens, Py_ssize_t cap):
    """Set of all products of the given permutations (a group; contains id).

    Raises CapExceeded as soon as the closure grows past cap elements.
    """
    cdef list glist = list(dict.fromkeys(gens))
    if not glist:
        raise ValueError("need at least one generator")
    cdef Py_ssize_t deg = len(glist[0])
    cdef bytes ident = bytes(range(deg))
    cdef set seen = {ident}
    cdef list frontier = [ident]
    cdef list new
    cdef bytes g, b, r
    cdef const unsigned char* gp
    while frontier:
        new = []
        for g in glist:
            gp = <const unsigned char*> PyBytes_AS_STRING(g)
            for b in frontier:
                r = _compose(gp, <const unsigned char*> PyBytes_AS_STRING(b), deg)
                if r not in seen:
                    if len(seen) >= cap:
                        raise CapExceeded(f"closure exceeds cap {cap}")
                    seen.add(r)
                    new.append(r)
        frontier = new
    return seen


def closure_contains(gens, bytes target, Py_ssize_t cap):
    """Membership test by the same breadth-first closure, with early exit."""
    cdef list glist = list(dict.fromkeys(gens))
    if not glist:
        raise ValueError("need at least one generator")
    cdef Py_ssize_t deg = len(glist[0])
    if len(target) != deg:
        return False
    cdef bytes ident = bytes(range(deg))
    if target == ident:
        return True
    cdef set seen = {ident}
    cdef list frontier = [ident]
    cdef list new
    cdef bytes g, b, r
    cdef const unsigned char* gp
    while frontier:
        new = []
        for g in glist:
            gp = <const unsigned char*> PyBytes_AS_STRING(g)
            for b in frontier:
                r = _compose(gp, <const unsigned char*> PyBytes_AS_STRING(b), deg)
                if r not in seen:
                    if r == target:
                        return True
                    if len(seen) >= cap:
                        raise CapExceeded(f"closure exceeds cap {cap}")
                    seen.add(r)
                    new.append(r)
        frontier = new
    return False
