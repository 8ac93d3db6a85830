"""Ingestion of post dumps, news-source ratings and event mentions.

URLs are canonicalised (scheme, query, fragment, ``www.`` and trailing
slashes removed) and matched to rated news domains. Malformed records are
counted and skipped; only stream-level failures raise.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import urllib.error
import urllib.request
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Protocol
from urllib.parse import urlsplit

from .errors import (
    EmptyHost,
    InputError,
    MalformedUrl,
    ResolverError,
    ResolverLoop,
    ResolverTimeout,
    UnknownCommunity,
    UnreadableInput,
)

logger = logging.getLogger(__name__)

TRUST_CUTOFF = 60.0
MAX_REDIRECTS = 10
DEFAULT_SHORTENERS = frozenset(
    {"bit.ly", "t.co", "goo.gl", "ow.ly", "tinyurl.com", "nyti.ms", "dlvr.it",
     "buff.ly", "fb.me", "trib.al", "wapo.st", "cnn.it", "reut.rs", "apne.ws"}
)


# -- domain types -----------------------------------------------------------

@dataclass(frozen=True, order=True)
class CommunityId:
    name: str
    parent: str | None = None

    def __post_init__(self):
        name = self.name.strip().lower()
        if not name:
            raise InputError("community name must be non-empty")
        object.__setattr__(self, "name", name)
        if self.parent is not None:
            parent = self.parent.strip().lower()
            if parent == name:
                raise InputError(f"community {name!r} cannot be its own parent")
            object.__setattr__(self, "parent", parent)


def parse_communities(text: str | Iterable[str]) -> list[CommunityId]:
    """Parse ``"twitter,reddit,the_donald:reddit"`` into community ids.

    Parents must be declared top-level communities (depth at most 1).
    """
    items = text.split(",") if isinstance(text, str) else list(text)
    out = []
    for item in items:
        item = item.strip()
        if not item:
            continue
        name, _, parent = item.partition(":")
        out.append(CommunityId(name, parent or None))
    names = [c.name for c in out]
    if len(set(names)) != len(names):
        raise InputError(f"duplicate community names in {names}")
    by_name = {c.name: c for c in out}
    for c in out:
        if c.parent is None:
            continue
        if c.parent not in by_name:
            raise UnknownCommunity(f"parent {c.parent!r} of {c.name!r} is not a configured community")
        if by_name[c.parent].parent is not None:
            raise InputError(f"{c.name!r}: subcommunities may only nest one level deep")
    return out


@dataclass(frozen=True)
class Post:
    id: str
    community: str
    timestamp: int
    raw_urls: tuple[str, ...]
    urls: tuple[str, ...] = ()
    domains: tuple[str, ...] = ()
    text: str | None = None


@dataclass(frozen=True)
class NewsSource:
    domain: str
    score: float
    trustworthy: bool

    @classmethod
    def from_score(cls, domain: str, score: float, cutoff: float = TRUST_CUTOFF) -> "NewsSource":
        domain = normalize_domain(domain)
        score = float(score)
        if not 0.0 <= score <= 100.0:
            raise InputError(f"score {score} for {domain} outside [0, 100]")
        return cls(domain, score, score >= cutoff)


@dataclass(frozen=True, order=True)
class CanonicalUrl:
    host: str
    path: str
    source_domain: str | None = field(default=None, compare=False)

    def render(self) -> str:
        return self.host + self.path

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class EventMention:
    url: str
    event_id: int
    confidence: int
    domain: str | None = None


# -- URL handling -----------------------------------------------------------

def _strip_www(host: str) -> str:
    return host[4:] if host.startswith("www.") else host


def normalize_domain(domain: str) -> str:
    d = domain.strip().lower()
    if "://" in d:
        d = d.split("://", 1)[1]
    d = d.split("/", 1)[0].split(":", 1)[0]
    d = _strip_www(d)
    if not d:
        raise InputError(f"empty domain in {domain!r}")
    return d


def _split(raw: str):
    if not isinstance(raw, str):
        raise MalformedUrl(f"not a string: {raw!r}")
    s = raw.strip()
    if not s or any(ch.isspace() for ch in s):
        raise MalformedUrl(f"unparseable URL {raw!r}")
    if "://" not in s:
        if s.startswith("//"):
            s = "http:" + s
        elif ":" in s.split("/", 1)[0] and not s.split("/", 1)[0].split(":", 1)[1].isdigit():
            # "mailto:x" and friends have no network location
            raise EmptyHost(f"no host in {raw!r}")
        else:
            s = "http://" + s
    try:
        parts = urlsplit(s)
        host = parts.hostname
        parts.port  # raises ValueError on a bad port
    except ValueError as exc:
        raise MalformedUrl(f"unparseable URL {raw!r}: {exc}") from exc
    if parts.scheme not in ("http", "https"):
        raise MalformedUrl(f"unsupported scheme in {raw!r}")
    if not host:
        raise EmptyHost(f"no host in {raw!r}")
    return host, parts.path


def canonicalize_url(raw: str) -> CanonicalUrl:
    """Strip scheme, query, fragment, a leading ``www.`` and trailing slashes.

    Path case and percent-encoding are preserved. A missing scheme is
    tolerated (``"cnn.com/x"``), which makes the operation idempotent over
    :meth:`CanonicalUrl.render`.
    """
    host, path = _split(raw)
    host = _strip_www(host.lower().rstrip("."))
    if not host:
        raise EmptyHost(f"no host in {raw!r}")
    return CanonicalUrl(host, path.rstrip("/"))


def url_host(raw: str) -> str:
    host, _ = _split(raw)
    return _strip_www(host.lower())


class UrlResolver(Protocol):
    def resolve_once(self, url: str) -> str | None:
        """Return the redirect target of ``url`` or ``None`` if it does not redirect."""


class FixtureResolver:
    """Resolver backed by a recorded mapping, optionally persisted as JSON."""

    def __init__(self, mapping: Mapping[str, str] | None = None, path: str | Path | None = None):
        self.mapping = dict(mapping or {})
        self.path = Path(path) if path else None
        if self.path and self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                self.mapping.update(json.load(fh))

    def resolve_once(self, url: str) -> str | None:
        return self.mapping.get(url)


class HttpResolver:
    """Single-hop HEAD resolver with a persistent JSON cache keyed by raw URL."""

    def __init__(self, cache_path: str | Path | None = None, timeout: float = 5.0):
        self.timeout = timeout
        self.cache_path = Path(cache_path) if cache_path else None
        self.cache: dict[str, str | None] = {}
        if self.cache_path and self.cache_path.exists():
            self.cache = json.loads(self.cache_path.read_text(encoding="utf-8"))

    def resolve_once(self, url: str) -> str | None:
        if url in self.cache:
            return self.cache[url]

        class _NoRedirect(urllib.request.HTTPRedirectHandler):
            def redirect_request(self, *args, **kwargs):
                return None

        target = url if "://" in url else "http://" + url
        opener = urllib.request.build_opener(_NoRedirect)
        req = urllib.request.Request(target, method="HEAD")
        try:
            with opener.open(req, timeout=self.timeout):
                loc = None
        except urllib.error.HTTPError as exc:
            loc = exc.headers.get("Location") if 300 <= exc.code < 400 else None
        except (TimeoutError, urllib.error.URLError) as exc:
            raise ResolverTimeout(f"{url}: {exc}") from exc
        self.cache[url] = loc
        return loc

    def save(self):
        if self.cache_path:
            self.cache_path.write_text(json.dumps(self.cache, sort_keys=True, indent=0), encoding="utf-8")


def resolve_short_url(raw: str, resolver: UrlResolver | None,
                      shorteners: Iterable[str] = DEFAULT_SHORTENERS) -> str:
    """Follow redirects while the host is a known shortener.

    Raises ResolverLoop when more than ten redirects are needed.
    """
    if resolver is None:
        return raw
    shorteners = frozenset(shorteners)
    current = raw
    hops = 0
    while True:
        try:
            host = url_host(current)
        except MalformedUrl:
            return current
        if host not in shorteners:
            return current
        nxt = resolver.resolve_once(current)
        if nxt is None or nxt == current:
            return current
        hops += 1
        if hops > MAX_REDIRECTS:
            raise ResolverLoop(f"more than {MAX_REDIRECTS} redirects from {raw!r}")
        current = nxt


def match_source(url: CanonicalUrl | str, sources: Mapping[str, NewsSource] | Iterable[NewsSource]):
    """Longest rated domain equal to the host or a dot-boundary suffix of it."""
    host = url.host if isinstance(url, CanonicalUrl) else str(url).split("/", 1)[0]
    if not isinstance(sources, Mapping):
        sources = {s.domain: s for s in sources}
    # scanning suffixes from the full host outward yields the longest match first
    labels = host.split(".")
    for i in range(len(labels)):
        cand = ".".join(labels[i:])
        if cand in sources:
            return sources[cand]
    return None


# -- file readers -----------------------------------------------------------

def _open_text(stream):
    if isinstance(stream, (str, Path)):
        try:
            return open(stream, encoding="utf-8", newline="")
        except OSError as exc:
            raise UnreadableInput(f"cannot read {stream}: {exc}") from exc
    return stream


def load_sources(stream, cutoff: float = TRUST_CUTOFF) -> dict[str, NewsSource]:
    """Read ``domain,score`` rows; any bad row is an input error."""
    fh = _open_text(stream)
    try:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"domain", "score"} <= set(reader.fieldnames):
            raise InputError("sources file needs a 'domain,score' header")
        out: dict[str, NewsSource] = {}
        for lineno, row in enumerate(reader, start=2):
            try:
                src = NewsSource.from_score(row["domain"], float(row["score"]), cutoff)
            except (TypeError, ValueError) as exc:
                raise InputError(f"sources line {lineno}: {exc}") from exc
            if src.domain in out:
                raise InputError(f"sources line {lineno}: duplicate domain {src.domain}")
            out[src.domain] = src
    finally:
        if fh is not stream:
            fh.close()
    return dict(sorted(out.items()))


@dataclass
class IngestReport:
    input_records: int = 0
    emitted: int = 0
    dropped: Counter = field(default_factory=Counter)
    url_issues: Counter = field(default_factory=Counter)

    def drop(self, reason: str):
        self.dropped[reason] += 1

    def to_dict(self) -> dict:
        return {
            "input_records": self.input_records,
            "emitted": self.emitted,
            "dropped": dict(sorted(self.dropped.items())),
            "url_issues": dict(sorted(self.url_issues.items())),
        }

    def balanced(self) -> bool:
        return self.input_records == self.emitted + sum(self.dropped.values())


class _UrlMatcher:
    def __init__(self, sources, resolver, shorteners, report):
        self.sources = sources
        self.resolver = resolver
        self.shorteners = shorteners
        self.report = report
        self._memo: dict[str, tuple[str, str] | str] = {}

    def __call__(self, raw: str):
        """Return ``(canonical, domain)`` or ``None`` after recording the issue."""
        hit = self._memo.get(raw)
        if hit is None:
            hit = self._compute(raw)
            self._memo[raw] = hit
        if isinstance(hit, str):
            self.report.url_issues[hit] += 1
            return None
        return hit

    def _compute(self, raw):
        try:
            expanded = resolve_short_url(raw, self.resolver, self.shorteners)
            cu = canonicalize_url(expanded)
        except ResolverError as exc:
            logger.debug("dropping %r: %s", raw, exc)
            return exc.code
        except MalformedUrl as exc:
            return exc.code
        src = match_source(cu, self.sources)
        if src is None:
            return "no_source"
        return cu.render(), src.domain


def load_posts(stream, sources: Mapping[str, NewsSource], communities=None,
               window: tuple[int | None, int | None] = (None, None),
               resolver: UrlResolver | None = None,
               shorteners: Iterable[str] = DEFAULT_SHORTENERS) -> tuple[list[Post], IngestReport]:
    """Parse line-delimited JSON posts.

    Each record needs ``id``, ``community``, ``ts`` and ``urls``. URLs are
    canonicalised and matched to ``sources``; repeated canonical URLs within
    one post count once. Records end up either emitted or under exactly one
    drop reason.
    """
    report = IngestReport()
    allowed = None if communities is None else {c.name for c in communities}
    matcher = _UrlMatcher(sources, resolver, frozenset(shorteners), report)
    lo, hi = window
    posts = []
    fh = _open_text(stream)
    try:
        try:
            lines = iter(fh)
            for line in lines:
                if not line.strip():
                    continue
                report.input_records += 1
                try:
                    rec = json.loads(line)
                    pid = rec["id"]
                    comm = rec["community"]
                    ts = rec["ts"]
                    urls = rec["urls"]
                    text = rec.get("text")
                    if (not isinstance(pid, str) or not pid or not isinstance(comm, str)
                            or isinstance(ts, bool) or not isinstance(ts, int)
                            or not isinstance(urls, list)
                            or not all(isinstance(u, str) for u in urls)
                            or (text is not None and not isinstance(text, str))):
                        raise TypeError
                except (ValueError, KeyError, TypeError, AttributeError):
                    report.drop("malformed")
                    continue
                comm = comm.strip().lower()
                if allowed is not None and comm not in allowed:
                    report.drop("unknown_community")
                    continue
                if (lo is not None and ts < lo) or (hi is not None and ts >= hi):
                    report.drop("out_of_window")
                    continue
                canon, doms = [], []
                for raw in urls:
                    hit = matcher(raw)
                    if hit is None or hit[0] in canon:
                        continue
                    canon.append(hit[0])
                    doms.append(hit[1])
                if not canon:
                    report.drop("no_source")
                    continue
                posts.append(Post(pid, comm, ts, tuple(urls), tuple(canon), tuple(doms), text))
        except (OSError, UnicodeDecodeError) as exc:
            raise UnreadableInput(f"failed reading posts: {exc}") from exc
    finally:
        if fh is not stream:
            fh.close()
    report.emitted = len(posts)
    return posts, report


def load_event_mentions(stream, sources: Mapping[str, NewsSource],
                        resolver: UrlResolver | None = None,
                        shorteners: Iterable[str] = DEFAULT_SHORTENERS):
    """Parse ``url,event_id,confidence`` rows into :class:`EventMention` records."""
    report = IngestReport()
    matcher = _UrlMatcher(sources, resolver, frozenset(shorteners), report)
    out = []
    fh = _open_text(stream)
    try:
        try:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                return out, report
            if [h.strip() for h in header] != ["url", "event_id", "confidence"]:
                raise InputError("event mentions file needs a 'url,event_id,confidence' header")
            for row in reader:
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                report.input_records += 1
                try:
                    url, ev, conf = row
                    event_id = int(ev)
                    confidence = int(conf)
                except ValueError:
                    report.drop("malformed")
                    continue
                if not 10 <= confidence <= 100 or confidence % 10:
                    report.drop("invalid_confidence")
                    continue
                hit = matcher(url)
                if hit is None:
                    report.drop("no_source")
                    continue
                out.append(EventMention(hit[0], event_id, confidence, hit[1]))
        except (OSError, UnicodeDecodeError, csv.Error) as exc:
            raise UnreadableInput(f"failed reading event mentions: {exc}") from exc
    finally:
        if fh is not stream:
            fh.close()
    report.emitted = len(out)
    return out, report


def disjoint_communities(posts: list[Post], focus: CommunityId | str,
                         communities: Iterable[CommunityId] | None = None) -> list[Post]:
    """Remove the focus subcommunity's posts from its parent community.

    A parent dump (e.g. all of Reddit) contains the subcommunity's posts
    under the same ids; those copies are dropped so that every post belongs
    to exactly one community downstream.
    """
    if isinstance(focus, str):
        known = {c.name: c for c in (communities or [])}
        if focus.lower() not in known:
            raise UnknownCommunity(f"{focus!r} is not a configured community")
        focus = known[focus.lower()]
    if focus.parent is None:
        raise UnknownCommunity(f"{focus.name!r} has no parent community")
    present = {p.community for p in posts}
    if posts and focus.parent not in present and focus.name not in present:
        raise UnknownCommunity(f"neither {focus.name!r} nor its parent appear in the data")
    focus_ids = {p.id for p in posts if p.community == focus.name}
    return [p for p in posts if not (p.community == focus.parent and p.id in focus_ids)]


def posts_to_jsonl(posts: Iterable[Post]) -> str:
    buf = io.StringIO()
    for p in posts:
        rec = {"id": p.id, "community": p.community, "ts": p.timestamp,
               "urls": list(p.urls), "domains": list(p.domains)}
        buf.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
    return buf.getvalue()


def posts_from_jsonl(path: str | Path) -> list[Post]:
    """Read the canonicalised post artifact written by the ingest stage."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                r = json.loads(line)
                urls = tuple(r["urls"])
                out.append(Post(r["id"], r["community"], r["ts"], urls, urls, tuple(r["domains"])))
    return out
