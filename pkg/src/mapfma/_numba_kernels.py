"""Numba versions of the schedule kernels; imported on first use only."""

import numpy as np
from numba import njit

from ._kernels import BAD_MOVE, BAD_SOURCE, BAD_TARGET, COLLISION, OK, SWAP


@njit(cache=True)
def _scan_numba(pos, sources, targets, indptr, indices, n_vertices):
    n_agents, width = pos.shape
    if n_agents == 0:
        return OK, 0, -1, -1
    for a in range(n_agents):
        if pos[a, 0] != sources[a]:
            return BAD_SOURCE, 0, a, -1
    occ = np.full(n_vertices, -1, dtype=np.int64)
    occ_prev = np.full(n_vertices, -1, dtype=np.int64)
    for t in range(width):
        if t > 0:
            for a in range(n_agents):
                u = pos[a, t - 1]
                v = pos[a, t]
                if u != v:
                    found = False
                    for k in range(indptr[u], indptr[u + 1]):
                        if indices[k] == v:
                            found = True
                            break
                    if not found:
                        return BAD_MOVE, t, a, -1
        for a in range(n_agents):
            v = pos[a, t]
            if occ[v] >= 0:
                b = occ[v]
                return COLLISION, t, min(a, b), max(a, b)
            occ[v] = a
        if t > 0:
            for a in range(n_agents):
                u = pos[a, t - 1]
                v = pos[a, t]
                if u != v:
                    b = occ_prev[v]
                    if b >= 0 and b != a and pos[b, t] == u:
                        return SWAP, t, min(a, b), max(a, b)
            for a in range(n_agents):
                occ_prev[pos[a, t - 1]] = -1
        for a in range(n_agents):
            occ_prev[pos[a, t]] = a
            occ[pos[a, t]] = -1
    for a in range(n_agents):
        if pos[a, width - 1] != targets[a]:
            return BAD_TARGET, width - 1, a, -1
    return OK, 0, -1, -1

@njit(cache=True)
def _spells_numba(pos, n_vertices):
    n_agents, width = pos.shape
    counts = np.zeros(n_vertices, dtype=np.int64)
    expected = np.zeros((n_agents, width), dtype=np.int64)
    history = np.zeros((width, n_vertices), dtype=np.int64)
    for t in range(width):
        for a in range(n_agents):
            if t == 0 or pos[a, t] != pos[a, t - 1]:
                counts[pos[a, t]] += 1
        for a in range(n_agents):
            expected[a, t] = counts[pos[a, t]]
        for v in range(n_vertices):
            history[t, v] = counts[v]
    return expected, history
