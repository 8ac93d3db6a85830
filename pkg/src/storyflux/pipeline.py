"""Stage runners: ingest -> cluster -> fit -> report.

Every stage reads its inputs from ``output_dir``, writes plain CSV/JSONL
artifacts there, and records timings, counts and sha256 checksums in
``output_dir/manifest.json``. Outputs never depend on wall-clock time or
worker count, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .corpus import (
    EventMention,
    FixtureResolver,
    NewsSource,
    disjoint_communities,
    load_event_mentions,
    load_posts,
    load_sources,
    posts_from_jsonl,
    posts_to_jsonl,
)
from .entitystats import entity_doc_shares, load_annotations
from .errors import (
    ConfigError,
    EmptyCommunity,
    InvariantViolation,
    MissingArtifact,
    MissingInput,
    NoPopularStories,
)
from .hawkes import EventSeq, aggregate_influence, external_influence, fit, influence_normalized, influence_raw
from .storygraph import Story, cluster_mentions
from .timeline import StorySeries, filter_popular, lifespan, story_series
from .truststats import chi2_trust_tests, community_trust_shares, score_cdf

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
REPORT_FILES = ("trust_shares.csv", "chi2.csv", "entity_shares.csv", "lifespans.csv", "series.csv",
                "influence_raw.csv", "influence_normalized.csv", "summary.txt")


# -- small io helpers ---------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return "NA" if math.isnan(x) else f"{float(x):.10g}"
    return str(x)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")
    return path


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _require(path: Path | None, what: str) -> Path:
    if path is None or not Path(path).exists():
        raise MissingInput(f"{what} not found: {path}")
    return Path(path)


def _artifact(out: Path, rel: str) -> Path:
    p = out / rel
    if not p.exists():
        raise MissingArtifact(f"{rel} missing; run the earlier stage first")
    return p


def _record(cfg: PipelineConfig, stage: str, started: float, counts: dict, outputs: list[Path]):
    out = Path(cfg.output_dir)
    mpath = out / MANIFEST
    manifest = json.loads(mpath.read_text(encoding="utf-8")) if mpath.exists() else {}
    manifest["config_sha256"] = cfg.digest()
    stages = manifest.setdefault("stages", {})
    stages[stage] = {
        "seconds": round(time.perf_counter() - started, 4),
        "counts": counts,
        "outputs": {str(p.relative_to(out)): sha256_file(p) for p in sorted(outputs)},
    }
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return stages[stage]


# -- artifact readers -----------------------------------------------------------

def read_sources(path: Path, cutoff: float) -> dict[str, NewsSource]:
    return load_sources(path, cutoff)


def read_mentions(path: Path) -> list[EventMention]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [EventMention(r["url"], int(r["event_id"]), int(r["confidence"]), r["domain"])
                for r in csv.DictReader(fh)]


def read_stories(path: Path) -> list[Story]:
    urls, doms = defaultdict(list), defaultdict(set)
    with open(path, encoding="utf-8", newline="") as fh:
        for r in csv.DictReader(fh):
            sid = int(r["story_id"])
            urls[sid].append(r["url"])
            doms[sid].add(r["domain"])
    return [Story(sid, tuple(urls[sid]), tuple(sorted(doms[sid])), ()) for sid in sorted(urls)]


def read_influence(path: Path) -> dict[tuple[str, str], float]:
    with open(path, encoding="utf-8", newline="") as fh:
        return {(r["source"], r["destination"]): (math.nan if r["mean"] == "NA" else float(r["mean"]))
                for r in csv.DictReader(fh)}


def _posts_for_analysis(cfg: PipelineConfig, out: Path):
    posts = posts_from_jsonl(_artifact(out, "corpus/posts.jsonl"))
    for c in cfg.communities:
        if c.parent is not None and any(p.community in (c.name, c.parent) for p in posts):
            posts = disjoint_communities(posts, c)
    return posts


# -- stages -----------------------------------------------------------------

def cmd_ingest(cfg: PipelineConfig) -> dict:
    """Validate and canonicalise posts, sources and event mentions."""
    t0 = time.perf_counter()
    posts_path = _require(cfg.posts, "posts file")
    sources_path = _require(cfg.sources, "sources file")
    mentions_path = _require(cfg.mentions, "event mentions file")
    resolver = None
    if cfg.resolver_cache is not None:
        resolver = FixtureResolver(path=_require(cfg.resolver_cache, "resolver cache"))
    out = Path(cfg.output_dir)

    sources = load_sources(sources_path, cfg.trust_cutoff)
    posts, post_report = load_posts(posts_path, sources, cfg.communities,
                                    (cfg.window_start, cfg.window_end), resolver, cfg.shorteners)
    mentions, mention_report = load_event_mentions(mentions_path, sources, resolver, cfg.shorteners)
    if not (post_report.balanced() and mention_report.balanced()):
        raise InvariantViolation("ingest record counts do not balance")

    posts.sort(key=lambda p: (p.timestamp, p.community, p.id))
    outputs = [
        _write(out / "corpus/posts.jsonl", posts_to_jsonl(posts)),
        _write(out / "corpus/sources.csv", _csv_text(
            ["domain", "score"], [(s.domain, f"{s.score:.1f}") for s in sources.values()])),
        _write(out / "corpus/mentions.csv", _csv_text(
            ["url", "event_id", "confidence", "domain"],
            sorted((m.url, m.event_id, m.confidence, m.domain) for m in mentions))),
    ]
    report = {"posts": post_report.to_dict(), "mentions": mention_report.to_dict(),
              "sources": len(sources)}
    outputs.append(_write(out / "corpus/ingest_report.json",
                          json.dumps(report, indent=2, sort_keys=True) + "\n"))
    logger.info("ingest: %d posts, %d mentions kept", len(posts), len(mentions))
    counts = {"posts_in": post_report.input_records, "posts_out": len(posts),
              "posts_dropped": report["posts"]["dropped"],
              "mentions_in": mention_report.input_records, "mentions_out": len(mentions),
              "mentions_dropped": report["mentions"]["dropped"], "sources": len(sources)}
    return _record(cfg, "ingest", t0, counts, outputs)


def cmd_cluster(cfg: PipelineConfig) -> dict:
    t0 = time.perf_counter()
    out = Path(cfg.output_dir)
    mentions = read_mentions(_artifact(out, "corpus/mentions.csv"))
    stories, graph, _ = cluster_mentions(mentions, cfg.min_confidence, cfg.max_unique_events,
                                         cfg.edge_weight_d)
    dom = {m.url: m.domain for m in mentions}
    rows = []
    for s in stories:
        rows.extend((s.id, u, dom[u]) for u in s.urls)
    path = _write(out / "cluster/stories.csv", _csv_text(["story_id", "url", "domain"], rows))
    if not stories:
        logger.warning("clustering produced no stories")
    counts = {"mentions": len(mentions), "graph_nodes": len(graph.nodes),
              "graph_edges": graph.n_edges, "stories": len(stories)}
    return _record(cfg, "cluster", t0, counts, [path])


def story_events(series: list[StorySeries], communities: list[str], bin_hours: int) -> EventSeq:
    """Hours since the story's first bin, one process per community."""
    index = {c: i for i, c in enumerate(communities)}
    ts, ks = [], []
    for s in series:
        ts.extend(s.events)
        ks.extend([index[s.community]] * len(s.events))
    ts = np.asarray(ts, dtype=np.int64)
    t0 = ts.min()
    hours = (ts - t0) / 3600.0
    return EventSeq(hours, np.asarray(ks, dtype=np.int64), hours.max() + bin_hours, len(communities))


def _fit_one(job):
    sid, events, priors, iters, burnin, seed, dt_max = job
    ss = np.random.SeedSequence([seed, sid])
    samples = fit(events, priors, n_iters=iters, n_burnin=burnin, seed=ss, dt_max=dt_max)
    if not samples.conservation_ok():
        raise InvariantViolation(f"story {sid}: parent counts do not sum to event counts")
    return sid, samples


def _influence_rows(matrix, communities):
    K = len(communities)
    return [(communities[s], communities[d], matrix.mean[s, d], matrix.lo[s, d], matrix.hi[s, d])
            for s in range(K) for d in range(K)]


INFLUENCE_HEADER = ["source", "destination", "mean", "lo90", "hi90"]


def cmd_fit(cfg: PipelineConfig) -> dict:
    """Fit one Hawkes model per popular story and aggregate the influence."""
    t0 = time.perf_counter()
    if cfg.seed is None:
        raise ConfigError("fit requires a seed")
    out = Path(cfg.output_dir)
    stories = read_stories(_artifact(out, "cluster/stories.csv"))
    posts = _posts_for_analysis(cfg, out)
    comms = cfg.community_names
    series = story_series(posts, stories, cfg.bin_hours)
    outputs = [_write(out / "fit/series.csv", _csv_text(
        ["story_id", "community", "ts"],
        [(s.story_id, s.community, t) for s in series for t in s.raw_events]))]
    popular = filter_popular(series, cfg.min_story_total)
    if not popular:
        raise NoPopularStories(f"no story reaches {cfg.min_story_total} occurrences")

    by_story = defaultdict(list)
    for s in series:
        by_story[s.story_id].append(s)
    priors = cfg.priors()
    jobs = [(sid, story_events(by_story[sid], comms, cfg.bin_hours), priors, cfg.gibbs_iters,
             cfg.gibbs_burnin, cfg.seed, cfg.dt_max_hours) for sid in popular]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_fit_one, jobs))
    else:
        results = [_fit_one(j) for j in jobs]

    ext_rows, samples = [], []
    for sid, smp in results:
        raw = influence_raw(smp)
        norm = influence_normalized(raw, smp)
        d = out / "fit/stories" / str(sid)
        outputs.append(_write(d / "influence_raw.csv", _csv_text(INFLUENCE_HEADER, _influence_rows(raw, comms))))
        outputs.append(_write(d / "influence_normalized.csv",
                              _csv_text(INFLUENCE_HEADER, _influence_rows(norm, comms))))
        outputs.append(_write(d / "fit_diagnostics.csv", _csv_text(
            ["iteration", "loglik"], enumerate(smp.loglik.tolist()))))
        ext = external_influence(raw)
        ext_rows.extend((sid, c, ext[i], int(smp.counts[i])) for i, c in enumerate(comms))
        samples.append(smp)

    raw, norm = aggregate_influence(samples, cfg.aggregation)
    outputs.append(_write(out / "fit/influence_raw.csv", _csv_text(INFLUENCE_HEADER, _influence_rows(raw, comms))))
    outputs.append(_write(out / "fit/influence_normalized.csv",
                          _csv_text(INFLUENCE_HEADER, _influence_rows(norm, comms))))
    outputs.append(_write(out / "fit/influence_normalized_sums.csv", _csv_text(
        ["source", "total", "external"],
        [(c, a, b) for c, a, b in zip(comms, norm.row_sums(), norm.row_sums(external=True))])))
    outputs.append(_write(out / "fit/story_external.csv", _csv_text(
        ["story_id", "community", "external_raw", "n_events"], ext_rows)))
    counts = {"stories": len(stories), "popular_stories": len(popular),
              "events": int(sum(s.counts.sum() for s in samples))}
    return _record(cfg, "fit", t0, counts, outputs)


def top_external_stories(rows, communities, n):
    """Per community, the ``n`` stories with the largest external raw influence."""
    out = {}
    for c in communities:
        mine = [(sid, v) for sid, comm, v in rows if comm == c and not math.isnan(v)]
        mine.sort(key=lambda r: (-r[1], r[0]))
        out[c] = mine[:n]
    return out


def cmd_report(cfg: PipelineConfig) -> dict:
    """Write the analysis bundle under ``output_dir/report``."""
    t0 = time.perf_counter()
    out = Path(cfg.output_dir)
    rep = out / "report"
    sources = read_sources(_artifact(out, "corpus/sources.csv"), cfg.trust_cutoff)
    stories = read_stories(_artifact(out, "cluster/stories.csv"))
    series_text = _artifact(out, "fit/series.csv").read_text(encoding="utf-8")
    inf_raw = _artifact(out, "fit/influence_raw.csv").read_text(encoding="utf-8")
    inf_norm = _artifact(out, "fit/influence_normalized.csv").read_text(encoding="utf-8")
    ext_path = _artifact(out, "fit/story_external.csv")
    posts = _posts_for_analysis(cfg, out)
    comms = cfg.community_names
    outputs = []

    shares = community_trust_shares(posts, sources, cfg.trust_cutoff)
    outputs.append(_write(rep / "trust_shares.csv", _csv_text(
        ["community", "n_trust", "n_untrust", "share_untrust"],
        [(s.community, s.n_trust, s.n_untrust, s.share_untrust) for s in shares])))
    for c in comms:
        try:
            cdf = score_cdf(posts, sources, c)
        except EmptyCommunity:
            continue
        outputs.append(_write(rep / f"score_cdf_{c}.csv", _csv_text(["score", "cum_frac"], cdf.points)))
    tests = chi2_trust_tests(shares, cfg.chi2_layout)
    outputs.append(_write(rep / "chi2.csv", _csv_text(
        ["test", "statistic", "dof", "p_value"],
        [(name, r.statistic, r.dof, r.p_value) for name, r in tests])))

    rows = []
    if cfg.annotations is not None:
        ann = load_annotations(_require(cfg.annotations, "annotations file"))
        total = cfg.annotations_total_docs or len({a.doc_id for a in ann})
        rows = [(r.entity, r.doc_share, r.n_docs) for r in entity_doc_shares(ann, total)]
    outputs.append(_write(rep / "entity_shares.csv", _csv_text(["entity", "doc_share", "n_docs"], rows)))

    series = story_series(posts, stories, cfg.bin_hours)
    outputs.append(_write(rep / "lifespans.csv", _csv_text(
        ["story_id", "community", "span_days"],
        [(ls.story_id, ls.community, ls.span_days) for ls in map(lifespan, series)])))
    outputs.append(_write(rep / "series.csv", series_text))
    outputs.append(_write(rep / "influence_raw.csv", inf_raw))
    outputs.append(_write(rep / "influence_normalized.csv", inf_norm))

    with open(ext_path, encoding="utf-8", newline="") as fh:
        ext = [(int(r["story_id"]), r["community"],
                math.nan if r["external_raw"] == "NA" else float(r["external_raw"]))
               for r in csv.DictReader(fh)]
    ranking = top_external_stories(ext, comms, cfg.top_stories)
    lines = [f"storyflux report: {len(stories)} stories, {len({r[0] for r in ext})} fitted",
             f"aggregation: {cfg.aggregation}", ""]
    for c in comms:
        lines.append(f"top externally influential stories for {c}:")
        if not ranking[c]:
            lines.append("  (none)")
        for rank, (sid, v) in enumerate(ranking[c], 1):
            lines.append(f"  {rank:2d}. story {sid}  external raw influence {v:.4f}")
        lines.append("")
    outputs.append(_write(rep / "summary.txt", "\n".join(lines)))
    counts = {"files": len(outputs), "stories": len(stories)}
    return _record(cfg, "report", t0, counts, outputs)


STAGES = {"ingest": cmd_ingest, "cluster": cmd_cluster, "fit": cmd_fit, "report": cmd_report}


def run_all(cfg: PipelineConfig) -> dict:
    return {name: fn(cfg) for name, fn in STAGES.items()}
