"""Gibbs sampling for the logistic-normal network Hawkes model.

Each iteration samples (1) a parent for every event, (2) background rates
and weights from their gamma conditionals, (3) impulse location/precision
from the Normal-Gamma conditional over attributed parent-child delays.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .. import _backend
from ..errors import EmptyEvents, InvalidPriors
from .model import DEFAULT_DT_MAX, EventSeq, HawkesModel, compensator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Priors:
    # lambda0 ~ Gamma(a_l, b_l); W ~ Gamma(a_w, b_w); (mu, tau) ~ NormalGamma(m0, k0, a_t, b_t)
    a_l: float = 1.0
    b_l: float = 1.0
    a_w: float = 1.0
    b_w: float = 2.0
    m0: float = 0.0
    k0: float = 1.0
    a_t: float = 2.0
    b_t: float = 2.0

    def validate(self):
        for name in ("a_l", "b_l", "a_w", "b_w", "k0", "a_t", "b_t"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise InvalidPriors(f"prior {name} must be positive, got {v}")
        if not np.isfinite(self.m0):
            raise InvalidPriors("prior m0 must be finite")
        return self


@dataclass
class PosteriorSamples:
    """Retained draws; ``C[i, s, d]`` counts events on d parented by events on s."""

    lambda0: np.ndarray
    W: np.ndarray
    mu: np.ndarray
    tau: np.ndarray
    C: np.ndarray
    B: np.ndarray
    counts: np.ndarray
    T: float
    dt_max: float
    loglik: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self) -> int:
        return self.C.shape[0]

    @property
    def K(self) -> int:
        return self.counts.shape[0]

    def conservation_ok(self) -> bool:
        return bool(np.all(self.B + self.C.sum(axis=1) == self.counts[None, :]))

    def interval(self, name: str, level: float = 0.95):
        a = getattr(self, name)
        q = (1.0 - level) / 2.0
        return np.quantile(a, q, axis=0), np.quantile(a, 1.0 - q, axis=0)


def _parent_counts(events: EventSeq, parents: np.ndarray):
    K = events.K
    bg = parents < 0
    B = np.bincount(events.procs[bg], minlength=K)
    child = np.flatnonzero(~bg)
    s = events.procs[parents[child]]
    d = events.procs[child]
    C = np.bincount(s * K + d, minlength=K * K).reshape(K, K)
    return B, C, child


def _impulse_stats(events: EventSeq, parents, child, dt_max):
    K = events.K
    s = events.procs[parents[child]]
    d = events.procs[child]
    x = events.times[child] - events.times[parents[child]]
    x = np.log(x / (dt_max - x))
    key = s * K + d
    n = np.bincount(key, minlength=K * K).reshape(K, K)
    sx = np.bincount(key, weights=x, minlength=K * K).reshape(K, K)
    sxx = np.bincount(key, weights=x * x, minlength=K * K).reshape(K, K)
    return n, sx, sxx


def normal_gamma_posterior(priors: Priors, n, sx, sxx):
    """Conjugate update; returns ``(m_n, k_n, a_n, b_n)`` arrays."""
    n = np.asarray(n, dtype=np.float64)
    safe = np.maximum(n, 1.0)
    xbar = np.where(n > 0, sx / safe, 0.0)
    ss = np.where(n > 0, np.maximum(sxx - sx * xbar, 0.0), 0.0)
    k_n = priors.k0 + n
    m_n = (priors.k0 * priors.m0 + n * xbar) / k_n
    a_n = priors.a_t + 0.5 * n
    b_n = priors.b_t + 0.5 * ss + priors.k0 * n * (xbar - priors.m0) ** 2 / (2.0 * k_n)
    return m_n, k_n, a_n, b_n


def _initial_model(events: EventSeq, priors: Priors, dt_max: float) -> HawkesModel:
    K = events.K
    N = events.counts()
    lambda0 = np.maximum(N, 1) / (2.0 * events.T)
    # subcritical start: the prior mean can have spectral radius >= 1 for larger K
    W = np.full((K, K), min(priors.a_w / priors.b_w, 0.5 / K))
    return HawkesModel(lambda0, W, np.full((K, K), priors.m0),
                       np.full((K, K), priors.a_t / priors.b_t), dt_max)


def fit(events: EventSeq, priors: Priors | None = None, n_iters: int = 500, n_burnin: int = 200,
        seed=0, dt_max: float = DEFAULT_DT_MAX, backend: str | None = None,
        init: HawkesModel | None = None) -> PosteriorSamples:
    """Run the Gibbs chain and keep the draws after ``n_burnin``.

    Identical arguments give bitwise-identical draws on a given backend.
    """
    priors = (priors or Priors()).validate()
    if len(events) == 0:
        raise EmptyEvents("cannot fit a Hawkes model without events")
    if n_iters <= n_burnin or n_burnin < 0:
        raise ValueError("need n_iters > n_burnin >= 0")
    rng = np.random.default_rng(seed)
    K, T = events.K, events.T
    N = events.counts()
    lo, hi = events.windows(dt_max)
    model = init or _initial_model(events, priors, dt_max)
    lam0, W, mu, tau = model.lambda0, model.W, model.impulse_mu, model.impulse_tau

    keep = n_iters - n_burnin
    out = {
        "lambda0": np.empty((keep, K)), "W": np.empty((keep, K, K)),
        "mu": np.empty((keep, K, K)), "tau": np.empty((keep, K, K)),
        "C": np.empty((keep, K, K), dtype=np.int64), "B": np.empty((keep, K), dtype=np.int64),
    }
    trace = np.empty(n_iters)
    for it in range(n_iters):
        u = rng.random(len(events))
        parents, lam = _backend.sample_parents(events.times, events.procs, lo, hi, lam0, W, mu, tau,
                                               dt_max, u, backend=backend)
        trace[it] = float(np.sum(np.log(lam))) - compensator(HawkesModel(lam0, W, mu, tau, dt_max), events)

        B, C, child = _parent_counts(events, parents)
        lam0 = rng.gamma(priors.a_l + B, 1.0 / (priors.b_l + T))
        W = rng.gamma(priors.a_w + C, 1.0 / (priors.b_w + N[:, None]))

        n, sx, sxx = _impulse_stats(events, parents, child, dt_max)
        m_n, k_n, a_n, b_n = normal_gamma_posterior(priors, n, sx, sxx)
        tau = rng.gamma(a_n, 1.0 / b_n)
        mu = rng.normal(m_n, 1.0 / np.sqrt(k_n * tau))

        if it >= n_burnin:
            j = it - n_burnin
            out["lambda0"][j], out["W"][j], out["mu"][j], out["tau"][j] = lam0, W, mu, tau
            out["C"][j], out["B"][j] = C, B
    logger.debug("fit done: %d events, final loglik %.3f", len(events), trace[-1])
    return PosteriorSamples(out["lambda0"], out["W"], out["mu"], out["tau"], out["C"], out["B"],
                            N, T, dt_max, trace)


def sample_parent_posterior(model: HawkesModel, events: EventSeq, n_draws: int, seed=0,
                            backend: str | None = None) -> PosteriorSamples:
    """Repeated parent draws with the parameters held at ``model``."""
    if len(events) == 0:
        raise EmptyEvents("no events")
    rng = np.random.default_rng(seed)
    K = events.K
    lo, hi = events.windows(model.dt_max)
    C = np.empty((n_draws, K, K), dtype=np.int64)
    B = np.empty((n_draws, K), dtype=np.int64)
    for i in range(n_draws):
        parents, _ = _backend.sample_parents(events.times, events.procs, lo, hi, model.lambda0,
                                             model.W, model.impulse_mu, model.impulse_tau,
                                             model.dt_max, rng.random(len(events)), backend=backend)
        B[i], C[i], _ = _parent_counts(events, parents)
    rep = lambda a: np.broadcast_to(a, (n_draws,) + a.shape).copy()  # noqa: E731
    return PosteriorSamples(rep(model.lambda0), rep(model.W), rep(model.impulse_mu),
                            rep(model.impulse_tau), C, B, events.counts(), events.T, model.dt_max)
