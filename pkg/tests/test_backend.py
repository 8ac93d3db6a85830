import os
import subprocess
import sys

import numpy as np
import pytest

from storyflux import _backend
from storyflux.storygraph import build_story_graph, louvain, prune_edges
from storyflux.synthetic import story_fixture


def test_env_forces_pure_fallback():
    env = dict(os.environ, STORYFLUX_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import storyflux; print(storyflux.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "pure"


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.get_impl("fortran")


@pytest.mark.skipif(_backend.BACKEND != "cython", reason="compiled backend not built")
def test_louvain_backends_identical():
    g = prune_edges(build_story_graph(story_fixture(n_urls=400, n_stories=12, seed=2).mentions), 2)
    a, b = louvain(g, backend="pure"), louvain(g, backend="cython")
    assert a.assignment == b.assignment and a.levels == b.levels
    s1, s2 = louvain(g, seed=5, backend="pure"), louvain(g, seed=5, backend="cython")
    assert s1.assignment == s2.assignment


@pytest.mark.skipif(_backend.BACKEND != "cython", reason="compiled backend not built")
def test_louvain_local_move_counts_agree():
    rng = np.random.default_rng(0)
    n = 40
    A = np.triu(rng.integers(0, 3, (n, n)) * (rng.random((n, n)) < 0.15), 1)
    A = A + A.T
    rows, cols = np.nonzero(A)
    indptr = np.r_[0, np.cumsum(np.bincount(rows, minlength=n))]
    data = A[rows, cols].astype(float)
    deg = A.sum(1).astype(float)
    order = rng.permutation(n)
    ra = _backend.louvain_local(indptr, cols, data, deg, np.arange(n), order, deg.sum(), backend="pure")
    rb = _backend.louvain_local(indptr, cols, data, deg, np.arange(n), order, deg.sum(), backend="cython")
    assert np.array_equal(ra[0], rb[0]) and ra[1] == rb[1]
