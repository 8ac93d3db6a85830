"""Pipeline configuration: a flat ``key = value`` text file.

Lines starting with ``#`` or ``;`` are comments. Relative paths resolve
against the config file's directory. See README for the key list.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import DEFAULT_SHORTENERS, CommunityId, parse_communities
from .errors import ConfigError
from .hawkes.gibbs import Priors

_SECTION = "storyflux"

PATH_KEYS = ("posts", "sources", "mentions", "annotations", "output_dir", "resolver_cache")


@dataclass
class PipelineConfig:
    posts: Path | None = None
    sources: Path | None = None
    mentions: Path | None = None
    annotations: Path | None = None
    output_dir: Path = Path("out")
    resolver_cache: Path | None = None
    annotations_total_docs: int | None = None

    min_confidence: int = 60
    max_unique_events: int = 60
    edge_weight_d: int = 3
    min_story_total: int = 100
    trust_cutoff: float = 60.0

    bin_hours: int = 1
    dt_max_hours: float = 24.0
    gibbs_iters: int = 500
    gibbs_burnin: int = 200
    seed: int | None = None
    workers: int = 1
    aggregation: str = "pooled"
    chi2_layout: str = "both"
    top_stories: int = 20

    window_start: int | None = None
    window_end: int | None = None
    communities: list[CommunityId] = field(default_factory=lambda: parse_communities(
        "twitter,reddit,the_donald:reddit,4chan,gab"))
    shorteners: frozenset[str] = DEFAULT_SHORTENERS

    prior_a_l: float = 1.0
    prior_b_l: float = 1.0
    prior_a_w: float = 1.0
    prior_b_w: float = 2.0
    prior_m0: float = 0.0
    prior_k0: float = 1.0
    prior_a_t: float = 2.0
    prior_b_t: float = 2.0

    def validate(self) -> "PipelineConfig":
        for name in ("min_confidence", "max_unique_events", "edge_weight_d", "min_story_total",
                     "trust_cutoff", "bin_hours", "dt_max_hours", "gibbs_iters", "workers"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 <= self.gibbs_burnin < self.gibbs_iters:
            raise ConfigError("need 0 <= gibbs_burnin < gibbs_iters")
        if self.aggregation not in ("pooled", "mean"):
            raise ConfigError(f"aggregation must be 'pooled' or 'mean', got {self.aggregation!r}")
        if self.chi2_layout not in ("pairwise", "joint", "both"):
            raise ConfigError(f"bad chi2_layout {self.chi2_layout!r}")
        if not self.communities:
            raise ConfigError("at least one community is required")
        self.priors().validate()
        return self

    def priors(self) -> Priors:
        return Priors(self.prior_a_l, self.prior_b_l, self.prior_a_w, self.prior_b_w,
                      self.prior_m0, self.prior_k0, self.prior_a_t, self.prior_b_t)

    @property
    def community_names(self) -> list[str]:
        return [c.name for c in self.communities]

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Path):
                v = str(v)
            elif f.name == "communities":
                v = ",".join(c.name + (f":{c.parent}" if c.parent else "") for c in v)
            elif isinstance(v, frozenset):
                v = sorted(v)
            out[f.name] = v
        return out

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


def _convert(name: str, raw: str, base: Path):
    f = {fld.name: fld for fld in dataclasses.fields(PipelineConfig)}.get(name)
    if f is None:
        raise ConfigError(f"unknown config key {name!r}")
    raw = raw.strip()
    if name in PATH_KEYS:
        p = Path(raw).expanduser()
        return p if p.is_absolute() else (base / p)
    if name == "communities":
        return parse_communities(raw)
    if name == "shorteners":
        return frozenset(s.strip().lower() for s in raw.split(",") if s.strip())
    kind = str(f.type)
    try:
        if raw.lower() in ("", "none") and "None" in kind:
            return None
        if kind.startswith("int"):
            return int(raw)
        if kind.startswith("float"):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from exc
    return raw


def load_config(path: str | Path, overrides: dict | None = None) -> PipelineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"bad config syntax: {exc}") from exc
    base = path.parent.resolve()
    values = {k: _convert(k, v, base) for k, v in parser[_SECTION].items()}
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = _convert(k, str(v), Path.cwd()) if isinstance(v, str) else v
    try:
        cfg = PipelineConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()
