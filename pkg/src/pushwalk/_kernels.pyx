# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.

Behaviour (including every uniform drawn) matches :mod:`pushwalk._fallback`
exactly; the test suite checks the two against each other.
"""
import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.stdint cimport int64_t
from numpy.random cimport bitgen_t

cnp.import_array()

NAME = "compiled"

cdef double FLUSH_BELOW = 1e-300


def propagate(double[::1] dist, const double[:, ::1] table, Py_ssize_t k,
              Py_ssize_t steps, Py_ssize_t lo, Py_ssize_t hi,
              Py_ssize_t tail_level=-1):
    """Advance ``dist`` (law of S over 0..n-k) in place by ``steps`` selections.

    Returns ``(lo, hi, tails)`` where ``tails[s]`` is ``P(S >= tail_level)``
    after step ``s + 1`` (empty when ``tail_level < 0``).
    """
    cdef Py_ssize_t top = dist.shape[0] - 1
    cdef Py_ssize_t c = table.shape[1] - 1
    cdef Py_ssize_t s, i, j, jmax, x
    cdef double p, acc
    tails_arr = np.zeros(steps if tail_level >= 0 else 0)
    cdef double[::1] tails = tails_arr
    with nogil:
        for s in range(steps):
            for i in range(hi, lo - 1, -1):
                p = dist[i]
                if p == 0.0:
                    continue
                jmax = c if c < top - i else top - i
                dist[i] = p * table[k + i, 0]
                for j in range(1, jmax + 1):
                    dist[i + j] += p * table[k + i, j]
            hi = hi + c if hi + c < top else top
            while hi > lo and dist[hi] < FLUSH_BELOW:
                dist[hi] = 0.0
                hi -= 1
            while lo < hi and dist[lo] < FLUSH_BELOW:
                dist[lo] = 0.0
                lo += 1
            if tail_level >= 0:
                acc = 0.0
                x = tail_level if tail_level > lo else lo
                while x <= hi:
                    acc += dist[x]
                    x += 1
                tails[s] = acc
    return lo, hi, tails_arr


def push_replication(Py_ssize_t n, Py_ssize_t k, const double[:, ::1] cdf,
                     object bit_generator,
                     const int64_t[::1] tau_levels, int64_t[::1] tau_out,
                     const int64_t[::1] nu_levels, int64_t[::1] nu_out,
                     int64_t[::1] trajectory, Py_ssize_t max_rounds):
    """Run the push walk through whole rounds for one replication.

    ``tau_levels`` (thresholds on newly infected) and ``nu_levels``
    (thresholds on total infected) must be sorted ascending; the matching
    ``*_out`` arrays must be pre-filled with -1.  ``trajectory`` receives
    ``I_0 .. I_T`` where ``T = len(trajectory) - 1 <= max_rounds``.
    Returns ``(rounds_run, selections)``.
    """
    cdef bitgen_t *rng
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid bit generator capsule")
    rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef Py_ssize_t ntau = tau_levels.shape[0]
    cdef Py_ssize_t nnu = nu_levels.shape[0]
    cdef Py_ssize_t track = trajectory.shape[0] - 1
    cdef Py_ssize_t a = k, m = 0, ti = 0, ni = 0, s, sel, j, r
    cdef int64_t l = 0
    cdef double u

    while ni < nnu and nu_levels[ni] <= k:
        nu_out[ni] = 0
        ni += 1
    trajectory[0] = k

    with bit_generator.lock:
        with nogil:
            while m < max_rounds:
                if ti == ntau and ni == nnu and m >= track:
                    break
                if a == n:
                    break
                m += 1
                sel = a
                for s in range(sel):
                    u = rng.next_double(rng.state)
                    j = 0
                    while cdf[a, j] <= u:
                        j += 1
                    a += j
                    l += 1
                    if j > 0:
                        while ti < ntau and a - k >= tau_levels[ti]:
                            tau_out[ti] = l
                            ti += 1
                        while ni < nnu and a >= nu_levels[ni]:
                            nu_out[ni] = m
                            ni += 1
                        if a == n:
                            break
                    if ti == ntau and ni == nnu and m > track:
                        break
                if m <= track:
                    trajectory[m] = a
            if a == n:
                for r in range(m + 1, track + 1):
                    trajectory[r] = n
    return m, l
