"""Document-share tables for pre-extracted named-entity annotations."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import InconsistentTotal, InputError, UnreadableInput


@dataclass(frozen=True)
class EntityAnnotation:
    doc_id: str
    entity: str
    label: str = ""


@dataclass(frozen=True)
class EntityShareRow:
    entity: str
    doc_share: float
    n_docs: int


def load_annotations(path: str | Path) -> list[EntityAnnotation]:
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise UnreadableInput(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return []
        if not {"doc_id", "entity"} <= set(reader.fieldnames):
            raise InputError("annotations file needs a 'doc_id,entity,label' header")
        return [EntityAnnotation(r["doc_id"], r["entity"], r.get("label") or "")
                for r in reader if r.get("entity")]


def entity_doc_shares(annotations: Iterable[EntityAnnotation], total_docs: int) -> list[EntityShareRow]:
    """Fraction of documents mentioning each entity.

    Entities are exact, case-sensitive strings; each (doc, entity) pair
    counts once.
    """
    pairs = {(a.doc_id, a.entity) for a in annotations if a.entity}
    docs = {d for d, _ in pairs}
    if total_docs < len(docs):
        raise InconsistentTotal(f"total_docs={total_docs} < {len(docs)} annotated documents")
    counts = Counter(e for _, e in pairs)
    rows = [EntityShareRow(e, n / total_docs, n) for e, n in counts.items()]
    rows.sort(key=lambda r: (-r.n_docs, r.entity))
    return rows


def top_entities(rows: list[EntityShareRow], n: int) -> list[EntityShareRow]:
    return rows[:max(n, 0)]
