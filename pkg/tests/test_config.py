from pathlib import Path

import pytest

from storyflux.config import PipelineConfig, load_config
from storyflux.errors import ConfigError, InputError


def write(tmp_path, text):
    p = tmp_path / "run.ini"
    p.write_text(text)
    return p


def test_defaults():
    cfg = PipelineConfig().validate()
    assert (cfg.min_confidence, cfg.max_unique_events, cfg.edge_weight_d, cfg.min_story_total) == (60, 60, 3, 100)
    assert cfg.trust_cutoff == 60 and cfg.bin_hours == 1 and cfg.dt_max_hours == 24
    assert (cfg.gibbs_iters, cfg.gibbs_burnin) == (500, 200)
    assert cfg.community_names == ["twitter", "reddit", "the_donald", "4chan", "gab"]
    assert cfg.communities[2].parent == "reddit"


def test_load_relative_paths_and_comments(tmp_path):
    p = write(tmp_path, "# comment\nposts = data/posts.jsonl\nseed = 7\nedge_weight_d = 4  # inline\n"
                        "communities = gab,twitter\nprior_k0 = 0.5\nannotations_total_docs = none\n")
    cfg = load_config(p)
    assert cfg.posts == tmp_path.resolve() / "data/posts.jsonl"
    assert cfg.seed == 7 and cfg.edge_weight_d == 4 and cfg.community_names == ["gab", "twitter"]
    assert cfg.priors().k0 == 0.5 and cfg.annotations_total_docs is None


def test_overrides_win(tmp_path):
    cfg = load_config(write(tmp_path, "edge_weight_d = 4\n"), {"edge_weight_d": 2, "seed": None})
    assert cfg.edge_weight_d == 2 and cfg.seed is None


@pytest.mark.parametrize("text", ["edge_weight_d = 0\n", "nonsense = 1\n", "seed = x\n",
                                  "gibbs_burnin = 600\n", "aggregation = median\n", "prior_b_w = -1\n",
                                  "this is not a key value line\n"])
def test_invalid(tmp_path, text):
    with pytest.raises(InputError):
        load_config(write(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


def test_digest_tracks_values():
    a, b = PipelineConfig(), PipelineConfig(edge_weight_d=4)
    assert a.digest() == PipelineConfig().digest() != b.digest()
    assert a.to_dict()["output_dir"] == str(Path("out"))
