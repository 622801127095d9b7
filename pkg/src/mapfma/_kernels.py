"""Array kernels for schedule scans.

Each kernel has a numba version (in ``_numba_kernels``) and a pure-numpy
version with identical results. By default numba is used only for large
inputs. Set ``MAPFMA_DISABLE_NUMBA=1`` to force the numpy path (numba is
also skipped automatically when it is not installed).
"""

import importlib.util
import os

import numpy as np

OK = 0
BAD_SOURCE = 1
BAD_MOVE = 2
COLLISION = 3
SWAP = 4
BAD_TARGET = 5

NUMBA_AVAILABLE = importlib.util.find_spec("numba") is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("MAPFMA_DISABLE_NUMBA", "0") not in ("1", "true", "yes")

# Importing numba and loading its cached machine code costs ~0.5 s per
# process; a numpy scan only gets that slow around a million schedule cells
# (benchmarks/bench_kernels.py). Smaller inputs stay on numpy by default.
NUMBA_MIN_CELLS = int(os.environ.get("MAPFMA_NUMBA_MIN_CELLS", "1000000"))


def _pick(use_numba, cells):
    if use_numba is None:
        return USE_NUMBA and cells >= NUMBA_MIN_CELLS
    if use_numba and not NUMBA_AVAILABLE:
        raise RuntimeError("numba requested but not installed")
    return use_numba


def _numba():
    from . import _numba_kernels

    return _numba_kernels


def _scan_numpy(pos, sources, targets, indptr, indices, n_vertices):
    n_agents, width = pos.shape
    if n_agents == 0:
        return OK, 0, -1, -1
    bad = np.nonzero(pos[:, 0] != sources)[0]
    if bad.size:
        return BAD_SOURCE, 0, int(bad[0]), -1
    edge_codes = np.repeat(np.arange(n_vertices, dtype=np.int64), np.diff(indptr)) * n_vertices + indices
    agents = np.arange(n_agents)
    for t in range(width):
        col = pos[:, t]
        if t > 0:
            prev = pos[:, t - 1]
            moving = prev != col
            if moving.any():
                codes = prev[moving].astype(np.int64) * n_vertices + col[moving]
                ok = np.isin(codes, edge_codes)
                if not ok.all():
                    return BAD_MOVE, t, int(agents[moving][np.argmin(ok)]), -1
        _, first = np.unique(col, return_index=True)
        if first.size < n_agents:
            is_first = np.zeros(n_agents, dtype=bool)
            is_first[first] = True
            a = int(np.argmin(is_first))
            b = int(np.argmax(col == col[a]))
            return COLLISION, t, b, a
        if t > 0:
            occ_prev = np.full(n_vertices, -1, dtype=np.int64)
            occ_prev[prev] = agents
            movers = np.nonzero(moving)[0]
            other = occ_prev[col[movers]]
            hit = other >= 0
            if hit.any():
                cand = movers[hit]
                other = other[hit]
                swapped = pos[other, t] == prev[cand]
                if swapped.any():
                    k = int(np.argmax(swapped))
                    a, b = sorted((int(cand[k]), int(other[k])))
                    return SWAP, t, a, b
    bad = np.nonzero(pos[:, width - 1] != targets)[0]
    if bad.size:
        return BAD_TARGET, width - 1, int(bad[0]), -1
    return OK, 0, -1, -1


def _spells_numpy(pos, n_vertices):
    n_agents, width = pos.shape
    counts = np.zeros(n_vertices, dtype=np.int64)
    expected = np.zeros((n_agents, width), dtype=np.int64)
    history = np.zeros((width, n_vertices), dtype=np.int64)
    for t in range(width):
        if t == 0:
            entering = pos[:, 0]
        else:
            entering = pos[pos[:, t] != pos[:, t - 1], t]
        np.add.at(counts, entering, 1)
        expected[:, t] = counts[pos[:, t]]
        history[t] = counts
    return expected, history


def feasibility_scan(pos, sources, targets, indptr, indices, n_vertices, use_numba=None):
    """First rule violation of a position array, as ``(code, turn, a, b)``.

    Turns are scanned in order; within a turn the order is move validity,
    vertex collision, swap. Target mismatch is only reported once every
    turn is clean.
    """
    use_numba = _pick(use_numba, np.size(pos))
    args = (
        np.ascontiguousarray(pos, dtype=np.int64),
        np.ascontiguousarray(sources, dtype=np.int64),
        np.ascontiguousarray(targets, dtype=np.int64),
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        int(n_vertices),
    )
    if use_numba:
        return tuple(int(x) for x in _numba()._scan_numba(*args))
    return _scan_numpy(*args)


def spell_counts(pos, n_vertices, use_numba=None):
    """Replay occupation spells.

    Returns ``(expected, history)``: ``expected[a, t]`` is the spell count of
    the vertex agent ``a`` holds at turn ``t`` (its own spell included) and
    ``history[t]`` the per-vertex counters after turn ``t``.
    """
    use_numba = _pick(use_numba, np.size(pos))
    pos = np.ascontiguousarray(pos, dtype=np.int64)
    if use_numba:
        return _numba()._spells_numba(pos, int(n_vertices))
    return _spells_numpy(pos, int(n_vertices))
