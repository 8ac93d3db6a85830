"""Trustworthiness analytics over URL occurrences."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .corpus import TRUST_CUTOFF, NewsSource, Post
from .errors import DegenerateTable, EmptyCommunity, OutOfRangeScore, StoryfluxError

TRUSTWORTHY = "trustworthy"
UNTRUSTWORTHY = "untrustworthy"


@dataclass(frozen=True)
class TrustShare:
    community: str
    n_trust: int
    n_untrust: int

    @property
    def share_untrust(self) -> float:
        return self.n_untrust / (self.n_trust + self.n_untrust)


@dataclass(frozen=True)
class ScoreCdf:
    community: str
    points: tuple[tuple[float, float], ...]
    median: float


@dataclass(frozen=True)
class Chi2Result:
    statistic: float
    dof: int
    p_value: float


def trust_label(score: float, cutoff: float = TRUST_CUTOFF) -> str:
    if not 0.0 <= score <= 100.0 or math.isnan(score):
        raise OutOfRangeScore(f"score {score} outside [0, 100]")
    return TRUSTWORTHY if score >= cutoff else UNTRUSTWORTHY


def _occurrences(posts: Iterable[Post], sources: Mapping[str, NewsSource]):
    for p in posts:
        for dom in p.domains:
            yield p.community, sources[dom]


def community_trust_shares(posts: Iterable[Post], sources: Mapping[str, NewsSource],
                           cutoff: float = TRUST_CUTOFF) -> list[TrustShare]:
    """Count trustworthy/untrustworthy URL occurrences per community."""
    counts: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    for comm, src in _occurrences(posts, sources):
        counts[comm][0 if trust_label(src.score, cutoff) == TRUSTWORTHY else 1] += 1
    return [TrustShare(c, t, u) for c, (t, u) in sorted(counts.items())]


def empirical_cdf(values: Sequence[float], label: str = "") -> ScoreCdf:
    """Step CDF over distinct values with a lower-interpolated median."""
    if not values:
        raise EmptyCommunity(f"no samples for {label!r}")
    vals = sorted(values)
    n = len(vals)
    points = []
    for i, v in enumerate(vals):
        if i + 1 < n and vals[i + 1] == v:
            continue
        points.append((float(v), (i + 1) / n))
    return ScoreCdf(label, tuple(points), float(vals[(n - 1) // 2]))


def score_cdf(posts: Iterable[Post], sources: Mapping[str, NewsSource], community: str) -> ScoreCdf:
    scores = [src.score for comm, src in _occurrences(posts, sources) if comm == community]
    return empirical_cdf(scores, community)


# -- chi-square ---------------------------------------------------------------

def _gamma_series(a: float, x: float, tol: float) -> float:
    # lower regularised P(a, x) via the power series, valid for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(10000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * tol:
            break
    else:
        raise StoryfluxError(f"incomplete gamma series did not converge (a={a}, x={x})")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float, tol: float) -> float:
    # upper regularised Q(a, x) via Lentz's continued fraction, valid for x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            break
    else:
        raise StoryfluxError(f"incomplete gamma fraction did not converge (a={a}, x={x})")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammainc_upper(a: float, x: float, tol: float = 1e-15) -> float:
    """Upper regularised incomplete gamma function Q(a, x)."""
    if a <= 0.0:
        raise ValueError("a must be positive")
    if x < 0.0:
        raise ValueError("x must be nonnegative")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x, tol)
    return _gamma_cf(a, x, tol)


def chi2_sf(statistic: float, dof: int) -> float:
    return gammainc_upper(dof / 2.0, statistic / 2.0)


def chi2_test(table: Sequence[Sequence[float]]) -> Chi2Result:
    """Pearson chi-square test of independence, no continuity correction."""
    rows = [[float(v) for v in r] for r in table]
    if len(rows) < 2 or len({len(r) for r in rows}) != 1 or len(rows[0]) < 2:
        raise DegenerateTable("table must be rectangular with at least 2 rows and 2 columns")
    if any(v < 0 for r in rows for v in r):
        raise DegenerateTable("negative count")
    row_tot = [sum(r) for r in rows]
    col_tot = [sum(col) for col in zip(*rows)]
    grand = sum(row_tot)
    if any(t == 0 for t in row_tot) or any(t == 0 for t in col_tot):
        raise DegenerateTable("zero row or column total")
    stat = 0.0
    for i, r in enumerate(rows):
        for j, obs in enumerate(r):
            exp = row_tot[i] * col_tot[j] / grand
            stat += (obs - exp) ** 2 / exp
    dof = (len(rows) - 1) * (len(rows[0]) - 1)
    return Chi2Result(stat, dof, chi2_sf(stat, dof))


def chi2_trust_tests(shares: Sequence[TrustShare], layout: str = "both") -> list[tuple[str, Chi2Result]]:
    """Run chi-square tests on trust/untrust counts.

    ``layout="pairwise"`` tests every community pair as a 2x2 table,
    ``"joint"`` tests one 2xK table over all communities, ``"both"`` does both.
    Pairs or tables with a zero margin are skipped.
    """
    if layout not in ("pairwise", "joint", "both"):
        raise ValueError(f"unknown chi2 layout {layout!r}")
    out = []
    if layout in ("joint", "both") and len(shares) >= 2:
        table = [[s.n_trust for s in shares], [s.n_untrust for s in shares]]
        try:
            out.append(("all", chi2_test(table)))
        except DegenerateTable:
            pass
    if layout in ("pairwise", "both"):
        for a, b in combinations(shares, 2):
            try:
                res = chi2_test([[a.n_trust, a.n_untrust], [b.n_trust, b.n_untrust]])
            except DegenerateTable:
                continue
            out.append((f"{a.community}|{b.community}", res))
    return out
