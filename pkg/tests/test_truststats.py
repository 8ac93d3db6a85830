import math

import numpy as np
import pytest
from scipy import integrate

from storyflux.corpus import NewsSource, Post
from storyflux.errors import DegenerateTable, EmptyCommunity, OutOfRangeScore
from storyflux.truststats import (
    chi2_sf,
    chi2_test,
    chi2_trust_tests,
    community_trust_shares,
    empirical_cdf,
    gammainc_upper,
    score_cdf,
    trust_label,
)

# Ten hand-built tables. The statistics were evaluated by hand from
# sum (obs - exp)^2 / exp; the p-values come from quadrature below.
TABLES = [
    ([[10, 20], [20, 10]], 20 / 3, 1),
    ([[10, 10], [10, 10]], 0.0, 1),
    ([[50, 0], [0, 50]], 100.0, 1),
    ([[5, 15], [10, 10]], 8 / 3, 1),
    ([[30, 10], [10, 30]], 20.0, 1),
    ([[12, 8, 10], [8, 12, 10]], 1.6, 2),
    ([[1, 2], [3, 4]], 0.07936507936507936, 1),
    ([[20, 5, 5], [5, 20, 5], [5, 5, 20]], 45.0, 4),
    ([[100, 200], [150, 150]], 17.142857142857142, 1),
    ([[7, 3, 9, 1], [2, 8, 4, 6]], 10.545010545010545, 3),
]


def _chi2_pdf(x, k):
    return math.exp((k / 2 - 1) * math.log(x) - x / 2 - (k / 2) * math.log(2) - math.lgamma(k / 2))


def quad_sf(stat, k):
    """Upper tail by numerical integration of the chi-square density."""
    if stat == 0:
        return 1.0
    lower, _ = integrate.quad(_chi2_pdf, 0, stat, args=(k,), limit=200, epsabs=1e-14)
    upper, _ = integrate.quad(_chi2_pdf, stat, np.inf, args=(k,), limit=200, epsabs=1e-14)
    # use whichever side is better conditioned
    return upper if upper < 0.5 else 1.0 - lower


def test_hand_statistics_match_brute_formula():
    for table, stat, dof in TABLES:
        t = np.asarray(table, float)
        exp = t.sum(1, keepdims=True) * t.sum(0, keepdims=True) / t.sum()
        assert abs(((t - exp) ** 2 / exp).sum() - stat) < 1e-9
        assert (t.shape[0] - 1) * (t.shape[1] - 1) == dof


@pytest.mark.parametrize("table,stat,dof", TABLES)
def test_chi2_against_quadrature(table, stat, dof):
    r = chi2_test(table)
    assert abs(r.statistic - stat) <= 1e-6
    assert r.dof == dof
    assert abs(r.p_value - quad_sf(stat, dof)) <= 1e-4


def test_chi2_headline_example():
    r = chi2_test([[10, 20], [20, 10]])
    assert r.statistic == pytest.approx(6.6667, abs=1e-4)
    assert r.p_value == pytest.approx(0.0098, abs=5e-5)


def test_chi2_independent_and_extreme():
    assert chi2_test([[10, 10], [10, 10]]).p_value == 1.0
    assert chi2_test([[50, 0], [0, 50]]).p_value < 1e-20


@pytest.mark.parametrize("table", [[[0, 0], [1, 2]], [[0, 3], [0, 4]], [[1, 2], [3]], [[1, 2]]])
def test_degenerate(table):
    with pytest.raises(DegenerateTable):
        chi2_test(table)


def test_gammainc_tail_relative_accuracy():
    from scipy.special import gammaincc
    for a in (0.5, 1.0, 2.5, 10.0, 50.0):
        for x in (0.01, 0.5, 3.0, 20.0, 80.0):
            ref = gammaincc(a, x)
            if ref > 1e-300:
                assert gammainc_upper(a, x) == pytest.approx(ref, rel=1e-10)


def test_sf_strictly_decreasing():
    p = [chi2_sf(s, 3) for s in np.linspace(0.1, 40, 60)]
    assert all(a > b for a, b in zip(p, p[1:]))


def test_statistic_permutation_and_scaling():
    t = [[7, 3, 9, 1], [2, 8, 4, 6]]
    base = chi2_test(t).statistic
    perm = [[r[j] for j in (2, 0, 3, 1)] for r in t[::-1]]
    assert chi2_test(perm).statistic == pytest.approx(base, rel=1e-12)
    assert chi2_test([[3 * v for v in r] for r in t]).statistic == pytest.approx(3 * base, rel=1e-12)


# -- labels / shares / cdf --------------------------------------------------

def test_trust_label_boundaries():
    assert trust_label(60.0) == "trustworthy"
    assert trust_label(59.9) == "untrustworthy"
    assert trust_label(100) == "trustworthy"
    for bad in (-0.1, 100.1, float("nan")):
        with pytest.raises(OutOfRangeScore):
            trust_label(bad)


SRC = {d: NewsSource.from_score(d, s) for d, s in [("a.com", 60), ("b.com", 70), ("c.com", 80),
                                                   ("d.com", 90), ("u.com", 20)]}


def _p(comm, *domains):
    urls = tuple(f"{d}/x" for d in domains)
    return Post("id", comm, 0, urls, urls, tuple(domains))


def test_shares_count_occurrences():
    posts = [_p("gab", "a.com", "u.com"), _p("gab", "b.com", "c.com"), _p("twitter", "a.com")]
    shares = {s.community: s for s in community_trust_shares(posts, SRC)}
    assert (shares["gab"].n_trust, shares["gab"].n_untrust) == (3, 1)
    assert shares["gab"].share_untrust == 0.25
    assert shares["twitter"].share_untrust == 0.0


def test_score_cdf_median_lower():
    posts = [_p("gab", "a.com", "b.com"), _p("gab", "c.com", "d.com")]
    cdf = score_cdf(posts, SRC, "gab")
    assert cdf.median == 70.0
    assert cdf.points[-1][1] == 1.0
    assert [x for x, _ in cdf.points] == [60.0, 70.0, 80.0, 90.0]
    single = score_cdf([_p("reddit", "c.com")], SRC, "reddit")
    assert single.median == 80.0 and list(single.points) == [(80.0, 1.0)]
    with pytest.raises(EmptyCommunity):
        score_cdf(posts, SRC, "4chan")


def test_concatenated_cdf_inside_envelope():
    rng = np.random.default_rng(3)
    a, b = rng.integers(0, 101, 40).tolist(), rng.integers(30, 101, 25).tolist()

    def F(vals, x):
        return sum(v <= x for v in vals) / len(vals)

    both = empirical_cdf(a + b)
    for x, f in both.points:
        assert min(F(a, x), F(b, x)) - 1e-12 <= f <= max(F(a, x), F(b, x)) + 1e-12


def test_trust_test_layouts():
    posts = ([_p("gab", "u.com")] * 5 + [_p("gab", "a.com")] * 5
             + [_p("twitter", "a.com")] * 9 + [_p("twitter", "u.com")]
             + [_p("reddit", "b.com")] * 4)
    shares = community_trust_shares(posts, SRC)
    joint = chi2_trust_tests(shares, "joint")
    pair = chi2_trust_tests(shares, "pairwise")
    assert [n for n, _ in joint] == ["all"] and joint[0][1].dof == 2
    assert len(pair) == 3
    assert len(chi2_trust_tests(shares, "both")) == 4
    with pytest.raises(ValueError):
        chi2_trust_tests(shares, "other")
