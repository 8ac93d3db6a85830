import numpy as np
import pytest

from storyflux.hawkes import (
    EventSeq,
    HawkesModel,
    PosteriorSamples,
    aggregate_influence,
    external_influence,
    influence_normalized,
    influence_raw,
    sample_parent_posterior,
)

from .oracles import parent_posterior_enumeration


def samples_from(C, counts):
    C = np.asarray(C, dtype=np.int64)
    n, K = C.shape[0], C.shape[1]
    counts = np.asarray(counts)
    B = counts[None, :] - C.sum(axis=1)
    z = np.zeros((n, K, K))
    return PosteriorSamples(np.zeros((n, K)), z, z, z + 1, C, B, counts, 10.0, 24.0)


def test_raw_is_percent_of_destination_events():
    s = samples_from([[[1, 2], [0, 1]], [[3, 0], [0, 1]]], [4, 5])
    raw = influence_raw(s)
    assert raw.mean.tolist() == [[50.0, 20.0], [0.0, 20.0]]
    assert raw.lo[0, 0] == pytest.approx(np.quantile([25, 75], 0.05))


def test_zero_destination_events_undefined():
    s = samples_from([[[1, 0], [0, 0]]], [2, 0])
    raw = influence_raw(s)
    assert np.isnan(raw.mean[:, 1]).all() and np.isnan(raw.hi[:, 1]).all()
    norm = influence_normalized(raw, s)
    assert norm.mean[0, 0] == pytest.approx(25.0)
    assert np.isnan(norm.mean[1]).all()  # source with no events


def test_normalized_divides_by_source_count():
    s = samples_from([[[2, 3], [1, 1]]] * 3, [4, 6])
    raw = influence_raw(s)
    norm = influence_normalized(raw, s)
    assert np.allclose(norm.mean, raw.mean / np.array([4, 6])[:, None])


def test_external_excludes_self():
    s = samples_from([[[2, 3], [1, 1]]], [4, 6])
    raw = influence_raw(s)
    assert external_influence(raw).tolist() == [50.0, 25.0]
    assert raw.row_sums() == pytest.approx([50 + 50, 25 + 100 / 6])


def test_aggregate_single_story_equals_story():
    s = samples_from([[[1, 2], [0, 1]], [[3, 0], [1, 1]]], [4, 5])
    for method in ("pooled", "mean"):
        raw, norm = aggregate_influence([s], method)
        assert np.allclose(raw.mean, influence_raw(s).mean)
        assert np.allclose(norm.mean, influence_normalized(influence_raw(s), s).mean)


def test_aggregate_pooled_vs_mean():
    a = samples_from([[[1, 0], [0, 0]]], [2, 1])
    b = samples_from([[[9, 0], [0, 0]]], [10, 1])
    pooled, _ = aggregate_influence([a, b], "pooled")
    mean, _ = aggregate_influence([a, b], "mean")
    assert pooled.mean[0, 0] == pytest.approx(100 * 10 / 12)
    assert mean.mean[0, 0] == pytest.approx((50 + 90) / 2)
    with pytest.raises(ValueError):
        aggregate_influence([a], "median")


def test_three_event_enumeration():
    m = HawkesModel.create([0.2, 0.1], [[0.5, 0.4], [0.3, 0.2]], [[-1.0, 0.0], [0.5, -0.5]],
                           [[1.0, 2.0], [0.5, 1.5]], dt_max=24.0)
    ev = EventSeq([1.0, 2.5, 6.0], [0, 1, 0], T=10.0, K=2)
    EC, EB = parent_posterior_enumeration(ev.times, ev.procs, 2, m.lambda0, m.W, m.impulse_mu,
                                          m.impulse_tau, m.dt_max)
    exact = 100 * EC / ev.counts()[None, :]
    s = sample_parent_posterior(m, ev, 40_000, seed=0)
    assert np.abs(influence_raw(s).mean - exact).max() <= 1.0
    assert np.allclose(EB + EC.sum(0), ev.counts())
