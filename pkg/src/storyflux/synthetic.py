"""Synthetic corpora with known story structure.

Used by the tests, the benchmarks and the end-to-end scale check. Nothing
here is needed to run the pipeline on real data.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import EventMention

COMMUNITIES = "twitter,reddit,the_donald:reddit,4chan,gab"
_ENTITIES = ["Trump", "Clinton", "Russia", "FBI", "CNN", "US", "U.S.", "Obama", "Syria",
             "Congress", "Fox News", "Twitter", "Facebook", "Comey", "Putin", "America"]


@dataclass
class StoryFixture:
    mentions: list[EventMention]
    truth: dict[str, int]  # url -> ground-truth story


def story_fixture(n_urls: int = 200, n_stories: int = 10, events_per_story: int = 8,
                  mentions_per_url: int = 5, noise: float = 0.05, n_domains: int = 20,
                  seed: int = 0) -> StoryFixture:
    """URLs grouped into stories that share events, with cross-story noise.

    Each URL mentions ``mentions_per_url`` distinct events of its own story;
    a fraction ``noise`` of mentions is redirected to a random event of a
    different story.
    """
    rng = np.random.default_rng(seed)
    mentions, truth = [], {}
    for i in range(n_urls):
        story = i % n_stories
        domain = f"site{int(rng.integers(n_domains)):02d}.com"
        url = f"{domain}/s{story}/a{i}"
        truth[url] = story
        own = rng.choice(events_per_story, size=mentions_per_url, replace=False)
        events = set()
        for e in own:
            if rng.random() < noise:
                other = (story + 1 + int(rng.integers(n_stories - 1))) % n_stories
                events.add(other * events_per_story + int(rng.integers(events_per_story)))
            else:
                events.add(story * events_per_story + int(e))
        for ev in sorted(events):
            mentions.append(EventMention(url, ev, 80, domain))
    return StoryFixture(mentions, truth)


def pairwise_scores(predicted: dict[str, int], truth: dict[str, int]) -> tuple[float, float]:
    """Pair-counting precision and recall of a URL clustering.

    Precision is over pairs placed together by ``predicted``; recall is over
    same-story pairs in ``truth`` (URLs missing from ``predicted`` count as
    unclustered).
    """
    def pairs(labels):
        groups: dict[int, list[str]] = {}
        for u, c in labels.items():
            groups.setdefault(c, []).append(u)
        return {(a, b) for g in groups.values() for a in g for b in g if a < b}

    pp, tp = pairs(predicted), pairs(truth)
    hit = len(pp & tp)
    precision = hit / len(pp) if pp else 1.0
    recall = hit / len(tp) if tp else 1.0
    return precision, recall


@dataclass
class CorpusPaths:
    root: Path
    posts: Path
    sources: Path
    mentions: Path
    annotations: Path
    resolver_cache: Path
    config: Path
    truth: dict[str, int] = field(default_factory=dict)


def write_corpus(root: str | Path, n_posts: int = 10_000, n_urls: int = 2_000,
                 n_stories: int = 100, n_domains: int = 40, seed: int = 0,
                 gibbs_iters: int = 500, gibbs_burnin: int = 200, min_story_total: int = 100,
                 extra_config: dict | None = None) -> CorpusPaths:
    """Write a complete synthetic input set plus a config file under ``root``.

    Stories have Zipf-like popularity, so a handful pass the popularity
    threshold. Posts from the_donald are also copied into reddit under the
    same id, mirroring a parent-community dump. A few records are malformed,
    off-source or behind a shortener so every ingest path is exercised.
    """
    rng = np.random.default_rng(seed)
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    domains = [f"news{i:02d}.com" for i in range(n_domains)]
    scores = np.round(rng.uniform(0, 100, n_domains), 1)
    scores[:3] = (60.0, 59.9, 100.0)

    story_of = np.arange(n_urls) % n_stories
    url_domain = rng.integers(n_domains, size=n_urls)
    urls = [f"https://www.{domains[d]}/politics/story-{s}/item{i}/"
            for i, (s, d) in enumerate(zip(story_of, url_domain))]
    truth = {f"{domains[d]}/politics/story-{s}/item{i}": int(s)
             for i, (s, d) in enumerate(zip(story_of, url_domain))}

    with open(root / "sources.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["domain", "score"])
        for d, sc in zip(domains, scores):
            w.writerow([d, f"{sc:.1f}"])

    events_per_story = 12
    with open(root / "mentions.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["url", "event_id", "confidence"])
        for i, u in enumerate(urls):
            s = int(story_of[i])
            own = rng.choice(events_per_story, size=6, replace=False)
            for e in own:
                ev = s * events_per_story + int(e)
                if rng.random() < 0.03:
                    ev = int(rng.integers(n_stories * events_per_story))
                conf = int(rng.choice([50, 60, 70, 80, 90, 100], p=[0.1, 0.1, 0.2, 0.2, 0.2, 0.2]))
                w.writerow([u, ev, conf])
        w.writerow(["https://unrated.example.org/x", 1, 80])
        w.writerow(["not a url", 2, 80])

    shortened = {}
    for i in range(0, n_urls, 97):
        shortened[i] = f"https://bit.ly/s{i:05d}"
    with open(root / "resolver.json", "w", encoding="utf-8") as fh:
        json.dump({v: urls[k] for k, v in shortened.items()}, fh, sort_keys=True, indent=0)

    # popularity over stories, then URLs uniformly within a story
    weights = 1.0 / np.arange(1, n_stories + 1) ** 1.1
    weights /= weights.sum()
    start = rng.uniform(0, 25 * 86400, n_stories).astype(np.int64) + 1_470_000_000
    comm_names = ["twitter", "reddit", "the_donald", "4chan", "gab"]
    comm_p = np.array([0.3, 0.25, 0.15, 0.1, 0.2])
    by_story = [np.flatnonzero(story_of == s) for s in range(n_stories)]
    lines, n = [], 0
    while n < n_posts:
        if n % 200 == 199:
            lines.append('{"id": "broken", "ts": ')
            n += 1
            continue
        s = int(rng.choice(n_stories, p=weights))
        ui = int(rng.choice(by_story[s]))
        comm = comm_names[int(rng.choice(5, p=comm_p))]
        ts = int(start[s] + rng.exponential(30 * 3600))
        raw = shortened.get(ui, urls[ui])
        post_urls = [raw]
        if rng.random() < 0.05:
            post_urls.append("https://unrated.example.org/page")
        if rng.random() < 0.02:
            post_urls = ["https://unrated.example.org/only"]
        pid = f"p{n:06d}"
        rec = {"id": pid, "community": comm, "ts": ts, "urls": post_urls}
        if rng.random() < 0.5:
            rec["text"] = " ".join(rng.choice(_ENTITIES, size=3))
        lines.append(json.dumps(rec, sort_keys=True))
        n += 1
        if comm == "the_donald" and n < n_posts:
            dup = dict(rec, community="reddit")
            lines.append(json.dumps(dup, sort_keys=True))
            n += 1
    (root / "posts.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")

    with open(root / "annotations.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["doc_id", "entity", "label"])
        for u in urls:
            for ent in rng.choice(_ENTITIES, size=int(rng.integers(1, 5))):
                w.writerow([u, ent, "MISC"])

    cfg = {
        "posts": "posts.jsonl", "sources": "sources.csv", "mentions": "mentions.csv",
        "annotations": "annotations.csv", "annotations_total_docs": n_urls,
        "resolver_cache": "resolver.json", "output_dir": "out",
        "communities": COMMUNITIES, "seed": seed, "gibbs_iters": gibbs_iters,
        "gibbs_burnin": gibbs_burnin, "min_story_total": min_story_total,
    }
    cfg.update(extra_config or {})
    text = "# synthetic corpus\n" + "".join(f"{k} = {v}\n" for k, v in cfg.items())
    (root / "config.ini").write_text(text, encoding="utf-8")
    return CorpusPaths(root, root / "posts.jsonl", root / "sources.csv", root / "mentions.csv",
                       root / "annotations.csv", root / "resolver.json", root / "config.ini", truth)
