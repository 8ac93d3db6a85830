"""Multivariate Hawkes model with logistic-normal impulse responses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .. import _backend
from ..errors import EventOutsideWindow, InputError, SupercriticalModel

DEFAULT_DT_MAX = 24.0


def _square(value, K, name):
    arr = np.broadcast_to(np.asarray(value, dtype=np.float64), (K, K)).copy()
    if arr.shape != (K, K):
        raise InputError(f"{name} must be {K}x{K}")
    return arr


@dataclass
class HawkesModel:
    """K mutually exciting processes.

    ``W[s, d]`` is the expected number of direct children on ``d`` per event
    on ``s``; their delays follow a logistic-normal density on
    ``(0, dt_max)`` with location ``impulse_mu[s, d]`` and precision
    ``impulse_tau[s, d]``. Rates are per hour.
    """

    lambda0: np.ndarray
    W: np.ndarray
    impulse_mu: np.ndarray
    impulse_tau: np.ndarray
    dt_max: float = DEFAULT_DT_MAX

    def __post_init__(self):
        self.lambda0 = np.atleast_1d(np.asarray(self.lambda0, dtype=np.float64)).copy()
        K = self.lambda0.shape[0]
        self.W = _square(self.W, K, "W")
        self.impulse_mu = _square(self.impulse_mu, K, "impulse_mu")
        self.impulse_tau = _square(self.impulse_tau, K, "impulse_tau")
        self.dt_max = float(self.dt_max)
        if np.any(self.lambda0 < 0) or np.any(self.W < 0):
            raise InputError("rates and weights must be nonnegative")
        if np.any(self.impulse_tau <= 0) or self.dt_max <= 0:
            raise InputError("impulse precision and dt_max must be positive")

    @classmethod
    def create(cls, lambda0, W, impulse_mu=0.0, impulse_tau=1.0, dt_max=DEFAULT_DT_MAX):
        return cls(lambda0, W, impulse_mu, impulse_tau, dt_max)

    @property
    def K(self) -> int:
        return self.lambda0.shape[0]

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.W)))) if self.K else 0.0

    def perturbed(self, factor: float) -> "HawkesModel":
        return HawkesModel(self.lambda0 * factor, self.W * factor, self.impulse_mu,
                           self.impulse_tau, self.dt_max)


@dataclass
class EventSeq:
    """Events sorted by time (hours), each tagged with its process index."""

    times: np.ndarray
    procs: np.ndarray
    T: float
    K: int

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        procs = np.asarray(self.procs, dtype=np.int64)
        if times.shape != procs.shape:
            raise InputError("times and procs must have the same length")
        order = np.lexsort((procs, times))
        self.times, self.procs = times[order], procs[order]
        self.T = float(self.T)
        if times.size:
            if self.times[0] < 0 or self.times[-1] >= self.T:
                raise EventOutsideWindow(f"events must lie in [0, {self.T})")
            if self.procs.min() < 0 or self.procs.max() >= self.K:
                raise InputError(f"process index outside [0, {self.K})")

    def __len__(self) -> int:
        return self.times.shape[0]

    def counts(self) -> np.ndarray:
        return np.bincount(self.procs, minlength=self.K)

    def windows(self, dt_max: float):
        """Index ranges ``lo:hi`` of candidate parents for every event."""
        lo = np.searchsorted(self.times, self.times - dt_max, side="right")
        hi = np.searchsorted(self.times, self.times, side="left")
        return lo.astype(np.int64), hi.astype(np.int64)


def impulse_density(delta, mu, tau, dt_max):
    delta = np.asarray(delta, dtype=np.float64)
    inside = (delta > 0) & (delta < dt_max)
    d = np.where(inside, delta, 0.5 * dt_max)
    z = np.log(d / (dt_max - d)) - mu
    g = dt_max / (d * (dt_max - d)) * np.sqrt(tau / (2 * np.pi)) * np.exp(-0.5 * tau * z * z)
    return np.where(inside, g, 0.0)


def impulse_cdf(delta, mu, tau, dt_max):
    """Probability mass of the impulse on ``(0, delta]``."""
    delta = np.asarray(delta, dtype=np.float64)
    d = np.clip(delta, 0.5 * dt_max * 1e-300, dt_max)
    with np.errstate(divide="ignore"):
        z = np.log(d / (dt_max - d))
    out = ndtr(np.sqrt(tau) * (z - mu))
    return np.where(delta <= 0, 0.0, np.where(delta >= dt_max, 1.0, out))


def sample_delays(rng, mu, tau, dt_max, size):
    x = rng.normal(mu, 1.0 / np.sqrt(tau), size)
    return dt_max / (1.0 + np.exp(-x))


def simulate(model: HawkesModel, T: float, seed=None) -> EventSeq:
    """Sample events on ``[0, T)`` by the branching (cluster) construction."""
    if model.spectral_radius() >= 1.0:
        raise SupercriticalModel(f"spectral radius {model.spectral_radius():.3f} >= 1")
    rng = np.random.default_rng(seed)
    K = model.K
    times, procs = [], []
    gen_t, gen_k = [], []
    for k in range(K):
        n = rng.poisson(model.lambda0[k] * T)
        gen_t.append(rng.uniform(0.0, T, n))
        gen_k.append(np.full(n, k, dtype=np.int64))
    gen_t = np.concatenate(gen_t) if gen_t else np.zeros(0)
    gen_k = np.concatenate(gen_k) if gen_k else np.zeros(0, dtype=np.int64)
    while gen_t.size:
        times.append(gen_t)
        procs.append(gen_k)
        nxt_t, nxt_k = [], []
        for d in range(K):
            n_child = rng.poisson(model.W[gen_k, d])
            total = int(n_child.sum())
            if total == 0:
                continue
            src = np.repeat(np.arange(gen_t.size), n_child)
            s = gen_k[src]
            delays = sample_delays(rng, model.impulse_mu[s, d], model.impulse_tau[s, d],
                                   model.dt_max, total)
            t = gen_t[src] + delays
            keep = t < T
            nxt_t.append(t[keep])
            nxt_k.append(np.full(int(keep.sum()), d, dtype=np.int64))
        gen_t = np.concatenate(nxt_t) if nxt_t else np.zeros(0)
        gen_k = np.concatenate(nxt_k) if nxt_k else np.zeros(0, dtype=np.int64)
    all_t = np.concatenate(times) if times else np.zeros(0)
    all_k = np.concatenate(procs) if procs else np.zeros(0, dtype=np.int64)
    return EventSeq(all_t, all_k, T, K)


def compensator(model: HawkesModel, events: EventSeq) -> float:
    """Integral of all intensities over ``[0, T)``."""
    base = float(model.lambda0.sum() * events.T)
    if not len(events):
        return base
    s = events.procs
    rest = events.T - events.times
    mass = impulse_cdf(rest[:, None], model.impulse_mu[s], model.impulse_tau[s], model.dt_max)
    return base + float(np.sum(model.W[s] * mass))


def log_likelihood(model: HawkesModel, events: EventSeq, backend=None) -> float:
    if events.K != model.K:
        raise InputError("model and events disagree on K")
    if len(events) and (events.times[0] < 0 or events.times[-1] >= events.T):
        raise EventOutsideWindow("event outside the observation window")
    lo, hi = events.windows(model.dt_max)
    lam = _backend.event_intensity(events.times, events.procs, lo, hi, model.lambda0, model.W,
                                   model.impulse_mu, model.impulse_tau, model.dt_max, backend=backend)
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(lam))) - compensator(model, events)
