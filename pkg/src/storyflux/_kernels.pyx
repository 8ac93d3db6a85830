# cython: language_level=3
"""Compiled versions of the kernels in ``storyflux._pure``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, INFINITY
from libc.stdlib cimport qsort

cnp.import_array()

cdef double SQRT_2PI = 2.5066282746310002


cdef inline double _impulse(double delta, double mu, double tau, double dt_max) nogil:
    cdef double x, z
    if delta <= 0.0 or delta >= dt_max:
        return 0.0
    x = delta / dt_max
    z = log(x / (1.0 - x)) - mu
    return dt_max / (delta * (dt_max - delta)) * (sqrt(tau) / SQRT_2PI) * exp(-0.5 * tau * z * z)


def event_intensity(double[::1] times, long[::1] procs, long[::1] lo, long[::1] hi,
                    double[::1] lambda0, double[:, ::1] W, double[:, ::1] mu,
                    double[:, ::1] tau, double dt_max):
    cdef Py_ssize_t n = times.shape[0], i, m
    cdef long s, d
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc
    with nogil:
        for i in range(n):
            d = procs[i]
            acc = lambda0[d]
            for m in range(lo[i], hi[i]):
                s = procs[m]
                acc = acc + W[s, d] * _impulse(times[i] - times[m], mu[s, d], tau[s, d], dt_max)
            o[i] = acc
    return out


def sample_parents(double[::1] times, long[::1] procs, long[::1] lo, long[::1] hi,
                   double[::1] lambda0, double[:, ::1] W, double[:, ::1] mu,
                   double[:, ::1] tau, double dt_max, double[::1] uniforms):
    cdef Py_ssize_t n = times.shape[0], i, m, last
    cdef long s, d, pick
    cdef double total, thr, acc, w
    parents = np.empty(n, dtype=np.int64)
    intensity = np.empty(n, dtype=np.float64)
    cdef long[::1] par = parents
    cdef double[::1] lam = intensity
    with nogil:
        for i in range(n):
            d = procs[i]
            total = lambda0[d]
            for m in range(lo[i], hi[i]):
                s = procs[m]
                total = total + W[s, d] * _impulse(times[i] - times[m], mu[s, d], tau[s, d], dt_max)
            lam[i] = total
            if total <= 0.0:
                par[i] = -1
                continue
            thr = uniforms[i] * total
            acc = lambda0[d]
            pick = -2
            last = -1 if lambda0[d] > 0.0 else -2
            if acc > thr:
                pick = -1
            else:
                for m in range(lo[i], hi[i]):
                    s = procs[m]
                    w = W[s, d] * _impulse(times[i] - times[m], mu[s, d], tau[s, d], dt_max)
                    if w > 0.0:
                        last = m
                    acc = acc + w
                    if acc > thr:
                        pick = m
                        break
            if pick == -2:
                pick = last if last >= 0 else -1
            par[i] = pick
    return parents, intensity


cdef int _cmp_long(const void* a, const void* b) noexcept nogil:
    cdef long x = (<long*>a)[0]
    cdef long y = (<long*>b)[0]
    return (x > y) - (x < y)


def louvain_local(long[::1] indptr, long[::1] indices, double[::1] data,
                  double[::1] degrees, long[::1] comm, long[::1] order,
                  double two_m, double eps, long max_sweeps):
    cdef Py_ssize_t n = degrees.shape[0], i, p, t, oi
    cdef long j, cj, own, best, target, ntouch, sweep, moved, moves = 0
    cdef double ki, own_gain, best_gain, gain
    tot_arr = np.zeros(n, dtype=np.float64)
    nw_arr = np.zeros(n, dtype=np.float64)
    seen_arr = np.zeros(n, dtype=np.uint8)
    touch_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] tot = tot_arr
    cdef double[::1] nw = nw_arr
    cdef unsigned char[::1] seen = seen_arr
    cdef long[::1] touched = touch_arr
    with nogil:
        for i in range(n):
            tot[comm[i]] = tot[comm[i]] + degrees[i]
        for sweep in range(max_sweeps):
            moved = 0
            for oi in range(order.shape[0]):
                i = order[oi]
                ki = degrees[i]
                own = comm[i]
                ntouch = 0
                for p in range(indptr[i], indptr[i + 1]):
                    j = indices[p]
                    if j == i:
                        continue
                    cj = comm[j]
                    if not seen[cj]:
                        seen[cj] = 1
                        nw[cj] = 0.0
                        touched[ntouch] = cj
                        ntouch += 1
                    nw[cj] = nw[cj] + data[p]
                tot[own] = tot[own] - ki
                if seen[own]:
                    own_gain = nw[own] - tot[own] * ki / two_m
                else:
                    own_gain = 0.0 - tot[own] * ki / two_m
                qsort(&touched[0], ntouch, sizeof(long), _cmp_long)
                best = own
                best_gain = -INFINITY
                for t in range(ntouch):
                    cj = touched[t]
                    gain = nw[cj] - tot[cj] * ki / two_m
                    if gain > best_gain:
                        best_gain = gain
                        best = cj
                if best_gain > own_gain + eps:
                    target = best
                else:
                    target = own
                tot[target] = tot[target] + ki
                if target != own:
                    comm[i] = target
                    moved += 1
                for t in range(ntouch):
                    seen[touched[t]] = 0
            moves += moved
            if moved == 0:
                break
    return moves
