"""Exact brute-force baselines on small instances.

Mean extinction time by solving the CTMC hitting-time system over all 2^n
occupancy states, crossing probabilities by full configuration enumeration,
and the exact next-row distribution of the oriented model.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import _kernels
from .graphs import DilutedGraph


class OracleError(ValueError):
    pass


MAX_CTMC_VERTICES = 12
MAX_CROSSING_EDGES = 24


@dataclass(frozen=True)
class CTMCSpec:
    """Implicit continuous-time chain over occupancy bitmasks of a diluted graph.

    State s has bit v set iff vertex v is occupied; the all-empty state 0 is
    absorbing. Transitions are generated on the fly (no stored matrix): each
    occupied vertex dies at rate 1 and each kept edge from an occupied
    birth-capable vertex to a vacant one fires at rate lam.
    """

    dg: DilutedGraph
    lam: float

    def __post_init__(self):
        if self.n > MAX_CTMC_VERTICES:
            raise OracleError(f"CTMC oracle capped at {MAX_CTMC_VERTICES} vertices")
        if self.lam < 0:
            raise OracleError("lambda must be nonnegative")

    @property
    def n(self) -> int:
        return self.dg.base.n

    def transitions(self, s: int):
        """Yield (next_state, rate) pairs out of state s."""
        for v in range(self.n):
            if s & (1 << v):
                yield s & ~(1 << v), 1.0
        if self.lam == 0:
            return
        bc = self.dg.birth_capable
        for u, v in self.dg.kept_edges:
            u, v = int(u), int(v)
            for x, y in ((u, v), (v, u)):
                if (s >> x) & 1 and not (s >> y) & 1 and bc[x]:
                    yield s | (1 << y), self.lam

    def exit_rate(self, s: int) -> float:
        return sum(rate for _, rate in self.transitions(s))


def exact_mean_extinction(dg: DilutedGraph, lam: float) -> float:
    """Mean absorption time from all-occupied, by sparse elimination.

    For each transient state S: m(S) = 1/r(S) + sum_S' (rate(S->S')/r(S)) m(S');
    the all-empty state is absorbing.
    """
    spec = CTMCSpec(dg, float(lam))
    n_states = 1 << spec.n
    rows, cols, vals = [], [], []
    rhs = np.ones(n_states - 1)
    for s in range(1, n_states):
        i = s - 1
        rate_out = 0.0
        for s2, rate in spec.transitions(s):
            rate_out += rate
            if s2:
                rows.append(i)
                cols.append(s2 - 1)
                vals.append(-rate)
        rows.append(i)
        cols.append(i)
        vals.append(rate_out)
    A = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n_states - 1, n_states - 1))
    m = scipy.sparse.linalg.spsolve(A, rhs)
    return float(m[n_states - 2])  # all-occupied state


def exact_crossing_prob(width: int, height: int, p: float,
                        orientation: str = "LR") -> float:
    """Exact crossing probability of a width x height vertex box at bond density p.

    Sums p^open (1-p)^closed over every one of the 2^E edge configurations;
    capped at 24 edges.
    """
    if not 0 <= p <= 1:
        raise OracleError("p must lie in [0, 1]")
    if orientation == "LR":
        if width < 2 or height < 1:
            raise OracleError("degenerate rectangle")
    elif orientation == "TB":
        if height < 2 or width < 1:
            raise OracleError("degenerate rectangle")
    else:
        raise OracleError("orientation must be 'LR' or 'TB'")
    n_edges = (width - 1) * height + width * (height - 1)
    if n_edges > MAX_CROSSING_EDGES:
        raise OracleError(f"enumeration capped at {MAX_CROSSING_EDGES} edges")
    if orientation == "TB":
        width, height = height, width
    idx = lambda x, y: x + width * y
    eu, ev = [], []
    for y in range(height):
        for x in range(width - 1):
            eu.append(idx(x, y))
            ev.append(idx(x + 1, y))
    for y in range(height - 1):
        for x in range(width):
            eu.append(idx(x, y))
            ev.append(idx(x, y + 1))
    left = np.uint64(0)
    right = np.uint64(0)
    for y in range(height):
        left |= np.uint64(1) << np.uint64(idx(0, y))
        right |= np.uint64(1) << np.uint64(idx(width - 1, y))
    total = _kernels.crossing_sum_kernel(
        np.array(eu, dtype=np.int64), np.array(ev, dtype=np.int64),
        left, right, width * height, float(p))
    return float(total)


def oriented_next_row_dist(row, theta: float, mask=None) -> np.ndarray:
    """Exact PMF over next rows of the oriented model, indexed by bitmask.

    Bit x of the index corresponds to column x. Each eligible site (a neighbor
    occupied in ``row`` and an active column) is occupied independently with
    probability theta; every other site is forced vacant.
    """
    row = np.asarray(row, dtype=bool)
    width = len(row)
    if width > 16:
        raise OracleError("exact next-row distribution capped at width 16")
    if not 0 <= theta <= 1:
        raise OracleError("theta must lie in [0, 1]")
    active = np.ones(width, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    eligible = np.zeros(width, dtype=bool)
    eligible[1:] |= row[:-1]
    eligible[:-1] |= row[1:]
    eligible &= active
    elig_bits = int(sum(1 << x for x in np.flatnonzero(eligible)))
    n_elig = int(eligible.sum())
    pmf = np.zeros(1 << width)
    configs = np.arange(1 << width, dtype=np.uint32)
    allowed = (configs & np.uint32(~elig_bits & ((1 << width) - 1))) == 0
    pops = np.array([bin(int(c)).count("1") for c in configs[allowed]])
    pmf[allowed] = theta ** pops * (1.0 - theta) ** (n_elig - pops)
    return pmf
