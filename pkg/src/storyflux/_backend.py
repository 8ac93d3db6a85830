"""Select the kernel implementation at import time.

The compiled ``storyflux._kernels`` extension is used when it imports;
setting ``STORYFLUX_PURE=1`` forces the numpy fallback.
"""

import os

import numpy as np

from . import _pure

BACKEND = "pure"
_impl = _pure
if not os.environ.get("STORYFLUX_PURE"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pure


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def get_impl(name=None):
    """Return the kernel module for ``name`` ("cython", "pure") or the active one."""
    if name is None:
        return _impl
    if name == "pure":
        return _pure
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def event_intensity(times, procs, lo, hi, lambda0, W, mu, tau, dt_max, backend=None):
    return get_impl(backend).event_intensity(
        _f64(times), _i64(procs), _i64(lo), _i64(hi),
        _f64(lambda0), _f64(W), _f64(mu), _f64(tau), float(dt_max),
    )


def sample_parents(times, procs, lo, hi, lambda0, W, mu, tau, dt_max, uniforms, backend=None):
    return get_impl(backend).sample_parents(
        _f64(times), _i64(procs), _i64(lo), _i64(hi),
        _f64(lambda0), _f64(W), _f64(mu), _f64(tau), float(dt_max), _f64(uniforms),
    )


def louvain_local(indptr, indices, data, degrees, comm, order, two_m,
                  eps=1e-12, max_sweeps=1000, backend=None):
    """Run the local-moving phase; returns ``(comm, n_moves)`` with a fresh array."""
    comm = _i64(comm).copy()
    moves = get_impl(backend).louvain_local(
        _i64(indptr), _i64(indices), _f64(data), _f64(degrees), comm,
        _i64(order), float(two_m), float(eps), int(max_sweeps),
    )
    return comm, int(moves)
