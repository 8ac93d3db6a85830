"""Independent reference computations used by the tests.

Everything here is deliberately brute force and shares no code with the
package beyond plain data containers.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import networkx as nx
import numpy as np
from scipy import integrate


# -- partitions / modularity ------------------------------------------------

@lru_cache(maxsize=None)
def set_partitions(n: int) -> np.ndarray:
    """All partitions of n labelled items as restricted growth strings (rows)."""
    out = []

    def rec(prefix, top):
        if len(prefix) == n:
            out.append(prefix)
            return
        for c in range(top + 2):
            rec(prefix + (c,), max(top, c))

    rec((0,), 0)
    return np.array(out, dtype=np.int64)


def dense_modularity(A: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Q for one label vector or a stack of them, straight from the definition."""
    k = A.sum(1)
    two_m = k.sum()
    B = A - np.outer(k, k) / two_m
    labels = np.atleast_2d(labels)
    same = labels[:, :, None] == labels[:, None, :]
    return (same * B).sum(axis=(1, 2)) / two_m


def best_modularity(A: np.ndarray) -> float:
    return float(dense_modularity(A, set_partitions(A.shape[0])).max())


def connected_weighted_graphs(max_nodes: int, n_random8: int, seed: int = 0):
    """Atlas graphs (2..7 nodes, connected) with random integer weights, plus random 8-node ones."""
    rng = np.random.default_rng(seed)
    for g in nx.graph_atlas_g():
        n = g.number_of_nodes()
        if n < 2 or n > min(max_nodes, 7) or not nx.is_connected(g):
            continue
        A = np.zeros((n, n))
        for a, b in g.edges:
            A[a, b] = A[b, a] = rng.integers(1, 6)
        yield A
    if max_nodes >= 8:
        made = 0
        while made < n_random8:
            g = nx.gnp_random_graph(8, rng.uniform(0.2, 0.7), seed=int(rng.integers(1 << 30)))
            if not nx.is_connected(g):
                continue
            A = np.zeros((8, 8))
            for a, b in g.edges:
                A[a, b] = A[b, a] = rng.integers(1, 6)
            made += 1
            yield A


def brute_edges(url_events: dict[str, set]) -> dict[tuple[str, str], int]:
    out = {}
    urls = sorted(url_events)
    for i, a in enumerate(urls):
        for b in urls[i + 1:]:
            w = len(url_events[a] & url_events[b])
            if w:
                out[(a, b)] = w
    return out


# -- Hawkes -----------------------------------------------------------------

def impulse_pdf(dt, mu, tau, dt_max):
    if not 0 < dt < dt_max:
        return 0.0
    z = math.log(dt / (dt_max - dt)) - mu
    return dt_max / (dt * (dt_max - dt)) * math.sqrt(tau / (2 * math.pi)) * math.exp(-0.5 * tau * z * z)


def intensity(t, k, times, procs, lam0, W, mu, tau, dt_max):
    v = lam0[k]
    for tj, kj in zip(times, procs):
        if tj < t:
            v += W[kj, k] * impulse_pdf(t - tj, mu[kj, k], tau[kj, k], dt_max)
    return v


def loglik_quadrature(times, procs, T, lam0, W, mu, tau, dt_max):
    """Sum of log intensities minus the compensator integrated numerically."""
    K = len(lam0)
    ll = sum(math.log(intensity(t, k, times, procs, lam0, W, mu, tau, dt_max))
             for t, k in zip(times, procs))
    comp = lam0.sum() * T
    for tj, kj in zip(times, procs):
        for k in range(K):
            hi = min(T - tj, dt_max)
            if hi > 0:
                val, _ = integrate.quad(impulse_pdf, 0, hi, args=(mu[kj, k], tau[kj, k], dt_max),
                                        limit=200, epsabs=1e-13, epsrel=1e-12)
                comp += W[kj, k] * val
    return ll - comp


def parent_posterior_enumeration(times, procs, K, lam0, W, mu, tau, dt_max):
    """Exact E[C[s, d]] by enumerating every joint parent assignment."""
    n = len(times)
    choices = []
    for i in range(n):
        opts = [(-1, lam0[procs[i]])]
        for j in range(n):
            if times[j] < times[i]:
                w = W[procs[j], procs[i]] * impulse_pdf(times[i] - times[j], mu[procs[j], procs[i]],
                                                        tau[procs[j], procs[i]], dt_max)
                if w > 0:
                    opts.append((j, w))
        choices.append(opts)
    EC = np.zeros((K, K))
    EB = np.zeros(K)
    Z = 0.0
    for combo in itertools.product(*choices):
        w = math.prod(c[1] for c in combo)
        Z += w
        for i, (par, _) in enumerate(combo):
            if par < 0:
                EB[procs[i]] += w
            else:
                EC[procs[par], procs[i]] += w
    return EC / Z, EB / Z
