"""Pure numpy/Python implementations of the hot kernels.

Signatures and semantics match ``storyflux._kernels`` exactly; the compiled
module is preferred when it imports (see ``storyflux._backend``).

Conventions shared by both backends:

* events are sorted by time; the candidate parents of event ``n`` are the
  contiguous index range ``lo[n]:hi[n]`` (strictly earlier, within
  ``dt_max``).
* ``parents[n] == -1`` denotes the background process.
"""

import math

import numpy as np

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _pair_layout(lo, hi):
    counts = hi - lo
    n = counts.shape[0]
    offsets = np.cumsum(counts) - counts
    child = np.repeat(np.arange(n, dtype=np.int64), counts)
    parent = lo[child] + (np.arange(child.shape[0], dtype=np.int64) - offsets[child])
    return counts, offsets, child, parent


def _pair_weights(times, procs, child, parent, W, mu, tau, dt_max):
    delta = times[child] - times[parent]
    s = procs[parent]
    d = procs[child]
    valid = (delta > 0.0) & (delta < dt_max)
    safe = np.where(valid, delta, 0.5 * dt_max)
    x = safe / dt_max
    z = np.log(x / (1.0 - x)) - mu[s, d]
    t = tau[s, d]
    g = dt_max / (safe * (dt_max - safe)) * (np.sqrt(t) / _SQRT_2PI) * np.exp(-0.5 * t * z * z)
    return np.where(valid, W[s, d] * g, 0.0)


def event_intensity(times, procs, lo, hi, lambda0, W, mu, tau, dt_max):
    """Conditional intensity of each event's own process at its timestamp."""
    times = np.asarray(times, dtype=np.float64)
    procs = np.asarray(procs, dtype=np.int64)
    counts, offsets, child, parent = _pair_layout(np.asarray(lo), np.asarray(hi))
    w = _pair_weights(times, procs, child, parent, W, mu, tau, dt_max)
    out = np.asarray(lambda0, dtype=np.float64)[procs].copy()
    np.add.at(out, child, w)
    return out


def sample_parents(times, procs, lo, hi, lambda0, W, mu, tau, dt_max, uniforms):
    """Draw one parent per event given fixed parameters.

    Returns ``(parents, intensity)``; ``intensity[n]`` is the normaliser of
    event ``n``'s parent distribution, i.e. its conditional intensity.
    """
    times = np.asarray(times, dtype=np.float64)
    procs = np.asarray(procs, dtype=np.int64)
    lo = np.asarray(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    n = times.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    counts, offsets, child, parent = _pair_layout(lo, hi)
    w = _pair_weights(times, procs, child, parent, W, mu, tau, dt_max)

    # segment n holds [background, candidates lo[n]..hi[n]-1]
    seg_start = offsets + np.arange(n, dtype=np.int64)
    vals = np.empty(n + w.shape[0], dtype=np.float64)
    vals[seg_start] = np.asarray(lambda0, dtype=np.float64)[procs]
    mask = np.ones(vals.shape[0], dtype=bool)
    mask[seg_start] = False
    vals[mask] = w
    seg_of = np.repeat(np.arange(n, dtype=np.int64), counts + 1)

    cum = np.cumsum(vals)
    base = cum[seg_start] - vals[seg_start]
    local = cum - base[seg_of]
    total = local[seg_start + counts]
    thr = np.asarray(uniforms, dtype=np.float64) * total
    below = (local <= thr[seg_of]).astype(np.int64)
    k = np.add.reduceat(below, seg_start)

    # rounding can push the draw past the last slot; take the last positive weight
    over = k > counts
    if over.any():
        for i in np.flatnonzero(over):
            seg = vals[seg_start[i]:seg_start[i] + counts[i] + 1]
            pos = np.flatnonzero(seg > 0.0)
            k[i] = pos[-1] if pos.size else 0
    parents = np.where(k == 0, -1, lo + k - 1)
    parents[total <= 0.0] = -1
    return parents.astype(np.int64), total


def louvain_local(indptr, indices, data, degrees, comm, order, two_m, eps, max_sweeps):
    """Local-moving phase of Louvain, in place on ``comm``.

    Each node in ``order`` is removed from its community and re-inserted in
    the neighbouring community with the largest gain
    ``k_in(c) - tot(c) * k_i / 2m`` (ties to the lowest index); it only
    leaves its own community when the best gain beats staying by ``eps``.
    Returns the number of moves made.
    """
    indptr = [int(v) for v in indptr]
    indices = [int(v) for v in indices]
    data = [float(v) for v in data]
    deg = [float(v) for v in degrees]
    c = [int(v) for v in comm]
    n = len(deg)
    tot = [0.0] * n
    for i in range(n):
        tot[c[i]] += deg[i]

    moves = 0
    for _ in range(max_sweeps):
        moved = 0
        for i in order:
            i = int(i)
            ki = deg[i]
            own = c[i]
            nw = {}
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if j == i:
                    continue
                cj = c[j]
                nw[cj] = nw.get(cj, 0.0) + data[p]
            tot[own] -= ki
            own_gain = nw.get(own, 0.0) - tot[own] * ki / two_m
            best = own
            best_gain = -math.inf
            for cc in sorted(nw):
                gain = nw[cc] - tot[cc] * ki / two_m
                if gain > best_gain:
                    best_gain = gain
                    best = cc
            target = best if best_gain > own_gain + eps else own
            tot[target] += ki
            if target != own:
                c[i] = target
                moved += 1
        moves += moved
        if moved == 0:
            break
    comm[:] = c
    return moves
