"""Shared-event URL graph and Louvain story extraction."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _backend
from .corpus import EventMention
from .errors import EmptyGraph, InvariantViolation, UnassignedNode

logger = logging.getLogger(__name__)

GAIN_TOL = 1e-12


@dataclass
class StoryGraph:
    nodes: list[str]
    edges: dict[tuple[str, str], int]

    def __post_init__(self):
        self.nodes = sorted(set(self.nodes))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degree_of(self) -> dict[str, int]:
        deg: dict[str, int] = defaultdict(int)
        for (a, b), w in self.edges.items():
            deg[a] += w
            deg[b] += w
        return deg

    def to_csr(self):
        """Symmetric CSR arrays over ``self.nodes`` (index order = sorted URL)."""
        index = {u: i for i, u in enumerate(self.nodes)}
        n = len(self.nodes)
        if not self.edges:
            return (np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64),
                    np.zeros(0, dtype=np.float64))
        e = np.array([(index[a], index[b], w) for (a, b), w in self.edges.items()], dtype=np.int64)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        vals = np.concatenate([e[:, 2], e[:, 2]]).astype(np.float64)
        return _csr(n, rows, cols, vals)


def _csr(n, rows, cols, vals):
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    return np.cumsum(indptr), cols.astype(np.int64), vals


@dataclass
class Partition:
    assignment: dict[str, int]
    modularity: float
    levels: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class Story:
    id: int
    urls: tuple[str, ...]
    domains: tuple[str, ...]
    event_ids: tuple[int, ...]


# -- mention filtering ------------------------------------------------------

def filter_mentions(mentions: Iterable[EventMention], min_confidence: int = 60) -> list[EventMention]:
    return [m for m in mentions if m.confidence >= min_confidence]


def drop_hub_urls(mentions: Sequence[EventMention], max_unique_events: int = 60) -> list[EventMention]:
    """Remove every mention of URLs tied to more than ``max_unique_events`` events."""
    events: dict[str, set[int]] = defaultdict(set)
    for m in mentions:
        events[m.url].add(m.event_id)
    hubs = {u for u, ev in events.items() if len(ev) > max_unique_events}
    if hubs:
        logger.info("dropping %d hub URLs", len(hubs))
    return [m for m in mentions if m.url not in hubs]


def build_story_graph(mentions: Iterable[EventMention]) -> StoryGraph:
    """Link URLs that share events; the weight is the number of shared event ids."""
    by_event: dict[int, set[str]] = defaultdict(set)
    nodes = set()
    for m in mentions:
        by_event[m.event_id].add(m.url)
        nodes.add(m.url)
    weights: dict[tuple[str, str], int] = defaultdict(int)
    for urls in by_event.values():
        for a, b in combinations(sorted(urls), 2):
            weights[(a, b)] += 1
    return StoryGraph(sorted(nodes), dict(sorted(weights.items())))


def prune_edges(graph: StoryGraph, min_weight: int = 3) -> StoryGraph:
    """Drop edges lighter than ``min_weight``; nodes are kept."""
    return StoryGraph(list(graph.nodes), {e: w for e, w in graph.edges.items() if w >= min_weight})


# -- modularity & Louvain ---------------------------------------------------

def _modularity_arrays(indptr, indices, data, comm) -> float:
    n = indptr.shape[0] - 1
    rows = np.repeat(np.arange(n), np.diff(indptr))
    deg = np.bincount(rows, weights=data, minlength=n)
    two_m = deg.sum()
    if two_m == 0:
        return 0.0
    same = comm[rows] == comm[indices]
    internal = np.bincount(comm[rows][same], weights=data[same], minlength=comm.max() + 1)
    tot = np.bincount(comm, weights=deg, minlength=comm.max() + 1)
    return float(np.sum(internal / two_m - (tot / two_m) ** 2))


def modularity(graph: StoryGraph, assignment: Mapping[str, int]) -> float:
    """Weighted Newman modularity at resolution 1."""
    missing = [u for u in graph.nodes if u not in assignment]
    if missing:
        raise UnassignedNode(f"{len(missing)} nodes unassigned, e.g. {missing[0]!r}")
    indptr, indices, data = graph.to_csr()
    comm = np.array([assignment[u] for u in graph.nodes], dtype=np.int64)
    _, comm = np.unique(comm, return_inverse=True)
    return _modularity_arrays(indptr, indices, data, comm.astype(np.int64))


def _relabel(comm):
    # communities numbered by first appearance in node order
    mapping: dict[int, int] = {}
    out = np.empty_like(comm)
    for i, c in enumerate(comm):
        out[i] = mapping.setdefault(int(c), len(mapping))
    return out, len(mapping)


def _aggregate(indptr, indices, data, comm, n_comm):
    n = indptr.shape[0] - 1
    rows = comm[np.repeat(np.arange(n), np.diff(indptr))]
    cols = comm[indices]
    key = rows * n_comm + cols
    uniq, inv = np.unique(key, return_inverse=True)
    vals = np.bincount(inv, weights=data)
    return _csr(n_comm, uniq // n_comm, uniq % n_comm, vals)


def louvain(graph: StoryGraph, seed: int | None = None, backend: str | None = None) -> Partition:
    """Two-phase Louvain modularity maximisation.

    Nodes are swept in ascending (sorted URL) order; with an integer
    ``seed`` the sweep order is a seeded permutation instead. Phases repeat
    until modularity improves by no more than 1e-12.
    """
    if not graph.edges:
        raise EmptyGraph("graph has no edges")
    indptr, indices, data = graph.to_csr()
    n = len(graph.nodes)
    rng = np.random.default_rng(seed) if seed is not None else None
    node_comm = np.arange(n, dtype=np.int64)
    q = _modularity_arrays(indptr, indices, data, node_comm)
    levels = [q]
    while True:
        m = indptr.shape[0] - 1
        deg = np.bincount(np.repeat(np.arange(m), np.diff(indptr)), weights=data, minlength=m)
        order = rng.permutation(m) if rng is not None else np.arange(m)
        comm, moves = _backend.louvain_local(indptr, indices, data, deg, np.arange(m), order,
                                             deg.sum(), GAIN_TOL, backend=backend)
        comm, n_comm = _relabel(comm)
        q_new = _modularity_arrays(indptr, indices, data, comm)
        if q_new < levels[-1] - 1e-9:
            raise InvariantViolation(f"modularity decreased from {levels[-1]} to {q_new}")
        if moves == 0 or q_new - levels[-1] <= GAIN_TOL:
            break
        node_comm = comm[node_comm]
        levels.append(q_new)
        indptr, indices, data = _aggregate(indptr, indices, data, comm, n_comm)
    node_comm, _ = _relabel(node_comm)
    assignment = {u: int(c) for u, c in zip(graph.nodes, node_comm)}
    return Partition(assignment, levels[-1], levels)


# -- stories ----------------------------------------------------------------

def extract_stories(graph: StoryGraph, partition: Partition, url_domain: Mapping[str, str],
                    url_events: Mapping[str, Iterable[int]] | None = None) -> list[Story]:
    """Turn graph communities spanning at least two domains into stories.

    Isolated nodes never form stories. Ids follow descending size, then the
    lexicographically smallest URL.
    """
    connected = set()
    for a, b in graph.edges:
        connected.add(a)
        connected.add(b)
    groups: dict[int, list[str]] = defaultdict(list)
    for url in graph.nodes:
        if url in connected:
            groups[partition.assignment[url]].append(url)
    candidates = []
    for urls in groups.values():
        domains = {url_domain[u] for u in urls}
        if len(domains) < 2:
            continue
        candidates.append((sorted(urls), sorted(domains)))
    candidates.sort(key=lambda c: (-len(c[0]), c[0][0]))
    stories = []
    for sid, (urls, domains) in enumerate(candidates):
        events = set()
        if url_events is not None:
            for u in urls:
                events.update(url_events.get(u, ()))
        stories.append(Story(sid, tuple(urls), tuple(domains), tuple(sorted(events))))
    return stories


def cluster_mentions(mentions: Sequence[EventMention], min_confidence: int = 60,
                     max_unique_events: int = 60, edge_weight_d: int = 3,
                     seed: int | None = None) -> tuple[list[Story], StoryGraph, Partition | None]:
    """Confidence filter, hub filter, graph, edge prune, Louvain, story extraction."""
    kept = drop_hub_urls(filter_mentions(mentions, min_confidence), max_unique_events)
    graph = prune_edges(build_story_graph(kept), edge_weight_d)
    if not graph.edges:
        logger.warning("no edges survive pruning; no stories")
        return [], graph, None
    part = louvain(graph, seed=seed)
    url_domain = {m.url: m.domain for m in kept}
    url_events: dict[str, set[int]] = defaultdict(set)
    for m in kept:
        url_events[m.url].add(m.event_id)
    return extract_stories(graph, part, url_domain, url_events), graph, part
