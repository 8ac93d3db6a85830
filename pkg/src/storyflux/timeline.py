"""Per-story, per-community event sequences and lifespans."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Post
from .errors import EmptyCommunity, EmptySeries
from .storygraph import Story
from .truststats import ScoreCdf, empirical_cdf

SECONDS_PER_DAY = 86400


@dataclass(frozen=True)
class StorySeries:
    story_id: int
    community: str
    events: tuple[int, ...]
    raw_events: tuple[int, ...]
    bin_hours: int = 1

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class Lifespan:
    story_id: int
    community: str
    span_days: float


def story_series(posts: Iterable[Post], stories: Sequence[Story], bin_hours: int = 1) -> list[StorySeries]:
    """One event per post-URL occurrence, floored to its ``bin_hours`` bin."""
    if bin_hours <= 0:
        raise ValueError("bin_hours must be positive")
    url_story = {u: s.id for s in stories for u in s.urls}
    width = bin_hours * 3600
    raw: dict[tuple[int, str], list[int]] = defaultdict(list)
    for p in posts:
        for u in p.urls:
            sid = url_story.get(u)
            if sid is not None:
                raw[(sid, p.community)].append(p.timestamp)
    out = []
    for (sid, comm), ts in sorted(raw.items()):
        ts.sort()
        out.append(StorySeries(sid, comm, tuple(t - t % width for t in ts), tuple(ts), bin_hours))
    return out


def story_totals(series: Iterable[StorySeries]) -> dict[int, int]:
    totals: dict[int, int] = defaultdict(int)
    for s in series:
        totals[s.story_id] += len(s)
    return dict(sorted(totals.items()))


def filter_popular(series: Iterable[StorySeries], min_total: int = 100) -> list[int]:
    """Story ids whose occurrences across all communities reach ``min_total``."""
    return [sid for sid, n in story_totals(series).items() if n >= min_total]


def lifespan(series: StorySeries) -> Lifespan:
    if not series.raw_events:
        raise EmptySeries(f"story {series.story_id} has no events on {series.community}")
    span = (max(series.raw_events) - min(series.raw_events)) / SECONDS_PER_DAY
    return Lifespan(series.story_id, series.community, span)


def lifespan_cdf(lifespans: Iterable[Lifespan], community: str) -> ScoreCdf:
    values = [ls.span_days for ls in lifespans if ls.community == community]
    if not values:
        raise EmptyCommunity(f"no lifespans for {community!r}")
    return empirical_cdf(values, community)
