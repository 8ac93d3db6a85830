"""Raw and normalised influence from posterior parent attributions."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gibbs import PosteriorSamples

RAW = "raw"
NORMALIZED = "normalized"


@dataclass
class InfluenceMatrix:
    """``mean[s, d]`` with a central 90% interval; NaN marks undefined entries."""

    kind: str
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    counts: np.ndarray

    @property
    def K(self) -> int:
        return self.mean.shape[0]

    def row_sums(self, external: bool = False) -> np.ndarray:
        m = self.mean.copy()
        if external:
            np.fill_diagonal(m, np.nan)
        return np.nansum(m, axis=1)


def _divide(num, den):
    den = np.asarray(den, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)


def _summarise(kind, draws, mean, counts):
    with np.errstate(invalid="ignore"):
        lo = np.quantile(draws, 0.05, axis=0)
        hi = np.quantile(draws, 0.95, axis=0)
    undefined = np.isnan(mean)
    lo[undefined] = np.nan
    hi[undefined] = np.nan
    return InfluenceMatrix(kind, mean, lo, hi, np.asarray(counts))


def influence_raw(samples: PosteriorSamples, counts=None) -> InfluenceMatrix:
    """Percent of destination events whose sampled parent lies on the source."""
    N = samples.counts if counts is None else np.asarray(counts)
    draws = 100.0 * _divide(samples.C.astype(np.float64), N[None, None, :])
    mean = 100.0 * _divide(samples.C.mean(axis=0), N[None, :])
    return _summarise(RAW, draws, mean, N)


def _normalize_draws(raw_draws, N):
    return _divide(raw_draws, np.asarray(N)[None, :, None])


def influence_normalized(raw: InfluenceMatrix, samples: PosteriorSamples | None = None) -> InfluenceMatrix:
    """Raw influence per source event (``raw[s, d] / N_s``)."""
    N = raw.counts
    mean = _divide(raw.mean, N[:, None])
    if samples is None:
        return InfluenceMatrix(NORMALIZED, mean, _divide(raw.lo, N[:, None]),
                               _divide(raw.hi, N[:, None]), N)
    draws = 100.0 * _divide(samples.C.astype(np.float64), N[None, None, :])
    return _summarise(NORMALIZED, _normalize_draws(draws, N), mean, N)


def aggregate_influence(per_story: Sequence[PosteriorSamples], method: str = "pooled"):
    """Combine per-story fits into one raw and one normalised matrix.

    ``pooled`` sums attributed counts and event counts over stories before
    dividing; ``mean`` averages per-story matrices with equal weight.
    """
    if not per_story:
        raise ValueError("need at least one story")
    n_draws = min(len(s) for s in per_story)
    C = np.stack([s.C[-n_draws:] for s in per_story]).astype(np.float64)
    N = np.stack([s.counts for s in per_story]).astype(np.float64)
    if method == "pooled":
        Csum, Nsum = C.sum(axis=0), N.sum(axis=0)
        raw_draws = 100.0 * _divide(Csum, Nsum[None, None, :])
        raw = _summarise(RAW, raw_draws, 100.0 * _divide(Csum.mean(axis=0), Nsum[None, :]), Nsum)
        norm_draws = _normalize_draws(raw_draws, Nsum)
        norm = _summarise(NORMALIZED, norm_draws, _divide(raw.mean, Nsum[:, None]), Nsum)
        return raw, norm
    if method == "mean":
        raw_story = 100.0 * _divide(C, N[:, None, None, :])
        norm_story = _divide(raw_story, N[:, None, :, None])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            raw_draws = np.nanmean(raw_story, axis=0)
            norm_draws = np.nanmean(norm_story, axis=0)
            raw_mean = np.nanmean(raw_story.mean(axis=1), axis=0)
            norm_mean = np.nanmean(norm_story.mean(axis=1), axis=0)
        Nsum = N.sum(axis=0)
        return (_summarise(RAW, raw_draws, raw_mean, Nsum),
                _summarise(NORMALIZED, norm_draws, norm_mean, Nsum))
    raise ValueError(f"unknown aggregation {method!r}")


def external_influence(raw: InfluenceMatrix) -> np.ndarray:
    """Per-source sum of raw influence on the other communities."""
    return raw.row_sums(external=True)
