"""Brute-force reference solutions, deliberately independent of the package integrators.

``expm_propagate`` freezes M(t) at the midpoint of uniform micro-steps and
applies the exact matrix exponential of each frozen step (scipy's Pade
scaling-and-squaring); occupation integrals use the trapezoidal rule on the
micro-steps.
"""

import math

import numpy as np
import scipy.linalg

from artifact.pulse import envelope_at

CHUNK = 50_000


def full_generator(system, t):
    """M(t) for an array of times, shape (len(t), n, n)."""
    m0 = system.generator()
    n = m0.shape[0]
    om = envelope_at(system.pulse, t)
    m = np.broadcast_to(m0, (t.size, n, n)).copy()
    m[:, 0, 1] += om
    m[:, 1, 0] += np.conj(om)
    return m


def expm_propagate(system, times, h=1e-4, initial=None):
    """Amplitudes and occupation integrals at ``times`` (sorted, first = start time)."""
    times = np.asarray(times, dtype=float)
    n = system.generator().shape[0]
    v = np.zeros(n, dtype=complex)
    if initial is None:
        v[0] = 1.0
    else:
        v[:] = initial
    out = np.zeros((times.size, n), dtype=complex)
    occ = np.zeros((times.size, n))
    out[0] = v

    # micro-step edges: every interval split uniformly with spacing <= h
    edges = [times[:1]]
    marks = [0]
    for a, b in zip(times[:-1], times[1:]):
        m = max(1, int(math.ceil((b - a) / h - 1e-9)))
        edges.append(np.linspace(a, b, m + 1)[1:])
        marks.append(marks[-1] + m)
    edges = np.concatenate(edges)
    mark_set = {k: i for i, k in enumerate(marks)}

    acc = np.zeros(n)
    step = 0
    total = edges.size - 1
    while step < total:
        stop = min(total, step + CHUNK)
        t0, t1 = edges[step:stop], edges[step + 1:stop + 1]
        dt = t1 - t0
        mid = 0.5 * (t0 + t1)
        props = scipy.linalg.expm(-0.5j * dt[:, None, None] * full_generator(system, mid))
        for k in range(stop - step):
            w = props[k] @ v
            acc += 0.5 * dt[k] * (np.abs(v) ** 2 + np.abs(w) ** 2)
            v = w
            idx = mark_set.get(step + k + 1)
            if idx is not None:
                out[idx] = v
                occ[idx] = acc
        step = stop
    return out, occ
