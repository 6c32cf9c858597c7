"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Same signatures, same results bit for bit, same consumption of uniforms.
"""
import numpy as np

from .model import FLUSH_BELOW

NAME = "python"


def propagate(dist, table, k, steps, lo, hi, tail_level=-1):
    top = dist.shape[0] - 1
    c = table.shape[1] - 1
    tails = np.zeros(steps if tail_level >= 0 else 0)
    for s in range(steps):
        # descending order lets the update run in place
        for i in range(hi, lo - 1, -1):
            p = dist[i]
            if p == 0.0:
                continue
            row = table[k + i]
            jmax = min(c, top - i)
            dist[i] = p * row[0]
            for j in range(1, jmax + 1):
                dist[i + j] += p * row[j]
        hi = min(hi + c, top)
        while hi > lo and dist[hi] < FLUSH_BELOW:
            dist[hi] = 0.0
            hi -= 1
        while lo < hi and dist[lo] < FLUSH_BELOW:
            dist[lo] = 0.0
            lo += 1
        if tail_level >= 0:
            acc = 0.0
            for x in range(max(tail_level, lo), hi + 1):
                acc += dist[x]
            tails[s] = acc
    return lo, hi, tails


def push_replication(n, k, cdf, bit_generator, tau_levels, tau_out,
                     nu_levels, nu_out, trajectory, max_rounds):
    gen = np.random.Generator(bit_generator)
    cdf_rows = cdf.tolist()
    tau_levels = [int(x) for x in tau_levels]
    nu_levels = [int(x) for x in nu_levels]
    ntau, nnu = len(tau_levels), len(nu_levels)
    track = trajectory.shape[0] - 1
    a, m, ti, ni, sel_count = k, 0, 0, 0, 0

    while ni < nnu and nu_levels[ni] <= k:
        nu_out[ni] = 0
        ni += 1
    trajectory[0] = k

    while m < max_rounds:
        if ti == ntau and ni == nnu and m >= track:
            break
        if a == n:
            break
        m += 1
        for _ in range(a):
            u = gen.random()
            row = cdf_rows[a]
            j = 0
            while row[j] <= u:
                j += 1
            a += j
            sel_count += 1
            if j > 0:
                while ti < ntau and a - k >= tau_levels[ti]:
                    tau_out[ti] = sel_count
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
    return m, sel_count
