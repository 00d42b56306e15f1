"""Contact-process dynamics on diluted graphs.

Continuous-time simulation (exact in law, event-driven) plus the discrete-time
oriented site model on a strip. Inert vertices in site mode can be occupied
and die but never give birth.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graphs import DilutedGraph, _build_csr


class SimError(ValueError):
    pass


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered (time, occupied count) samples plus the extinction time.

    ``extinction_time`` is the absorption time when ``censored`` is False and
    the t_max cutoff when it is True; censoring is never silently treated as
    extinction.
    """

    times: np.ndarray
    counts: np.ndarray
    extinction_time: float
    censored: bool
    seed: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if len(times) != len(counts):
            raise SimError("times/counts length mismatch")
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise SimError("sample times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "counts", counts)

    def to_csv(self, fobj) -> None:
        lam = self.params.get("lambda", "")
        ghash = self.params.get("graph", "")
        fobj.write(f"# seed={self.seed} lambda={lam} graph={ghash}\n")
        fobj.write("time,count\n")
        for t, c in zip(self.times, self.counts):
            fobj.write(f"{float(t)!r},{c}\n")


def graph_hash(dg: DilutedGraph) -> str:
    h = hashlib.sha256()
    h.update(dg.base.edges.tobytes())
    h.update(dg.mask.tobytes())
    h.update(dg.mode.encode())
    return h.hexdigest()[:12]


def _sim_arrays(dg: DilutedGraph):
    """Kept adjacency CSR, birth-capability flags, degrees, max birth degree."""
    indptr, indices = _build_csr(dg.base.n, dg.kept_edges)
    birth_cap = np.ascontiguousarray(dg.birth_capable, dtype=np.uint8)
    deg = (indptr[1:] - indptr[:-1]).astype(np.int64)
    bc_deg = deg[birth_cap.astype(bool)]
    deg_max = int(bc_deg.max()) if bc_deg.size else 0
    return indptr, indices, birth_cap, deg, deg_max


def run_contact(dg: DilutedGraph, lam: float, t_max: float, schedule=None,
                seed: int = 0, audit_every: int = 0) -> Trajectory:
    """Simulate from all vertices occupied until extinction or t_max.

    Samples record the occupied count just before each schedule time; the
    extinction event itself is appended when it happens before t_max.
    ``audit_every`` > 0 recomputes the cached rates from scratch every that
    many events and raises on any mismatch (debug mode).
    """
    if lam <= 0:
        raise SimError("lambda must be positive")
    schedule = np.asarray([] if schedule is None else schedule, dtype=np.float64)
    if len(schedule) > 1 and not np.all(np.diff(schedule) > 0):
        raise SimError("schedule must be strictly increasing")
    indptr, indices, birth_cap, deg, deg_max = _sim_arrays(dg)
    counts, ext, censored, _, audit_ok = _kernels.contact_kernel(
        indptr, indices, birth_cap, deg, deg_max, float(lam), float(t_max),
        schedule, _fold_seed(seed), int(audit_every))
    if not audit_ok:
        raise SimError("rate audit failed: cached rates diverged from recomputation")
    keep = schedule <= t_max
    times, counts = schedule[keep], counts[keep]
    if not censored:
        inside = times < ext
        times, counts = times[inside], counts[inside]
        times = np.append(times, ext)
        counts = np.append(counts, 0)
    params = {"lambda": float(lam), "graph": graph_hash(dg), "t_max": float(t_max)}
    return Trajectory(times, counts, float(ext), bool(censored), seed, params)


def _fold_seed(seed: int) -> int:
    # numba's legacy RNG seed is 32-bit
    return int(np.uint64(seed) % np.uint64(2 ** 31 - 1))


def survival_times(dg: DilutedGraph, lam: float, reps: int, t_max: float,
                   seed: int = 0):
    """Extinction times of independent replicates (derived seeds seed + i).

    Returns (times, censored) arrays; censored entries hold t_max.
    """
    if reps < 1:
        raise SimError("need at least one replicate")
    if lam <= 0:
        raise SimError("lambda must be positive")
    indptr, indices, birth_cap, deg, deg_max = _sim_arrays(dg)
    times, censored = _kernels.survival_kernel(
        indptr, indices, birth_cap, deg, deg_max, float(lam), float(t_max),
        _fold_seed(seed), int(reps))
    return times, censored.astype(bool)


def density(traj: Trajectory, n_vertices: int):
    """Normalized trajectory: list of (time, occupied fraction)."""
    if n_vertices <= 0:
        raise SimError("n_vertices must be positive")
    return [(float(t), float(c) / n_vertices) for t, c in zip(traj.times, traj.counts)]


# --- pure-Python reference engine --------------------------------------------

class ContactState:
    """Reference implementation of the simulation state with audited rates.

    Mirrors the kernel's semantics one event at a time; used by tests as the
    slow cross-check and by the coupled runner below.
    """

    def __init__(self, dg: DilutedGraph, lam: float, occupied=None):
        self.dg = dg
        self.lam = float(lam)
        indptr, indices, birth_cap, deg, deg_max = _sim_arrays(dg)
        self.indptr, self.indices = indptr, indices
        self.birth_cap = birth_cap.astype(bool)
        self.time = 0.0
        n = dg.base.n
        self.occupied = np.ones(n, dtype=bool) if occupied is None \
            else np.asarray(occupied, dtype=bool).copy()
        self._links = self._recompute_links()

    def _neighbors(self, v):
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def _recompute_links(self) -> int:
        links = 0
        for v in np.flatnonzero(self.occupied & self.birth_cap):
            links += int(np.count_nonzero(~self.occupied[self._neighbors(v)]))
        return links

    @property
    def total_death_rate(self) -> float:
        return float(np.count_nonzero(self.occupied))

    @property
    def total_birth_rate(self) -> float:
        return self.lam * self._links

    def audit(self) -> bool:
        return self._links == self._recompute_links()

    def flip(self, v: int, to_occupied: bool) -> None:
        if self.occupied[v] == to_occupied:
            return
        sign = 1 if to_occupied else -1
        self.occupied[v] = to_occupied
        for u in self._neighbors(v):
            if self.occupied[u]:
                if self.birth_cap[u]:
                    self._links -= sign
            else:
                if self.birth_cap[v]:
                    self._links += sign

    def step(self, rng: np.random.Generator) -> bool:
        """One event; returns False once absorbed (or rate zero)."""
        death = self.total_death_rate
        birth = self.total_birth_rate
        total = death + birth
        if total == 0:
            return False
        self.time += rng.exponential(1.0 / total)
        if rng.random() * total < death:
            occ = np.flatnonzero(self.occupied)
            self.flip(int(occ[rng.integers(len(occ))]), False)
        else:
            targets = []
            for x in np.flatnonzero(self.occupied & self.birth_cap):
                for y in self._neighbors(x):
                    if not self.occupied[y]:
                        targets.append(int(y))
            self.flip(targets[rng.integers(len(targets))], True)
        return self.total_death_rate > 0


def run_contact_reference(dg: DilutedGraph, lam: float, t_max: float,
                          seed: int = 0) -> float:
    """Extinction time from the reference engine (small graphs only)."""
    state = ContactState(dg, lam)
    rng = np.random.default_rng(seed)
    while state.time < t_max:
        if not state.step(rng):
            return state.time
    return float(t_max)


def run_contact_coupled(dg: DilutedGraph, lam: float, t_max: float,
                        sample_times, seed: int = 0, subset=None):
    """Graphical-representation run of two coupled copies sharing one event stream.

    One copy starts all-occupied, the other from ``subset``. Uniformized event
    stream: death marks at each vertex (rate 1) and birth arrows along each
    directed kept edge from a birth-capable source (rate lam). Returns
    (sets_full, sets_sub): occupied index sets at each sample time.
    """
    rng = np.random.default_rng(seed)
    n = dg.base.n
    arrows = []
    bc = dg.birth_capable
    for u, v in dg.kept_edges:
        if bc[u]:
            arrows.append((int(u), int(v)))
        if bc[v]:
            arrows.append((int(v), int(u)))
    rate = n + lam * len(arrows)
    full = np.ones(n, dtype=bool)
    sub = np.zeros(n, dtype=bool)
    if subset is not None:
        sub[np.asarray(subset, dtype=np.int64)] = True
    sample_times = sorted(float(t) for t in sample_times)
    out_full, out_sub = [], []
    t, si = 0.0, 0
    while si < len(sample_times):
        t += rng.exponential(1.0 / rate)
        while si < len(sample_times) and sample_times[si] < t:
            out_full.append(set(np.flatnonzero(full)))
            out_sub.append(set(np.flatnonzero(sub)))
            si += 1
        if t > t_max:
            break
        u = rng.random() * rate
        if u < n:
            v = rng.integers(n)
            full[v] = sub[v] = False
        elif arrows:
            x, y = arrows[rng.integers(len(arrows))]
            if full[x]:
                full[y] = True
            if sub[x]:
                sub[y] = True
    while si < len(sample_times):
        out_full.append(set(np.flatnonzero(full)))
        out_sub.append(set(np.flatnonzero(sub)))
        si += 1
    return out_full, out_sub


# --- oriented site percolation on a strip ------------------------------------

@dataclass(frozen=True)
class OrientedConfig:
    """One generation of the oriented strip model.

    Columns m with m + generation even are the only ones that may be occupied
    (parity convention of the oriented lattice); inert columns (site_mask
    False) are never occupiable.
    """

    width: int
    generation: int
    occupied: np.ndarray
    theta: float
    site_mask: np.ndarray

    def __post_init__(self):
        if self.width < 2 or self.width % 2:
            raise SimError("width must be even and at least 2")
        if not 0 <= self.theta <= 1:
            raise SimError("theta must lie in [0, 1]")
        occ = np.asarray(self.occupied, dtype=bool)
        mask = np.asarray(self.site_mask, dtype=bool)
        if len(occ) != self.width or len(mask) != self.width:
            raise SimError("occupied/site_mask must have one entry per column")
        cols = np.arange(self.width)
        if np.any(occ & ((cols + self.generation) % 2 == 1)):
            raise SimError("occupied site off the parity sublattice")
        if np.any(occ & ~mask):
            raise SimError("occupied site on an inert column")
        object.__setattr__(self, "occupied", occ)
        object.__setattr__(self, "site_mask", mask)

    def advance(self, rng: np.random.Generator) -> "OrientedConfig":
        nxt = oriented_next_row(self.occupied, self.site_mask, self.theta, rng)
        return OrientedConfig(self.width, self.generation + 1, nxt,
                              self.theta, self.site_mask)


def oriented_next_row(occ: np.ndarray, active: np.ndarray, theta: float,
                      rng: np.random.Generator) -> np.ndarray:
    """One generation of the oriented update: per-site theta coins on eligible sites."""
    width = len(occ)
    eligible = np.zeros(width, dtype=bool)
    eligible[1:] |= occ[:-1]
    eligible[:-1] |= occ[1:]
    return eligible & active & (rng.random(width) < theta)


def run_oriented(width: int, theta: float, site_keep_p: float,
                 t_max_generations: int, seed: int = 0) -> Trajectory:
    """Discrete-time oriented site model on a width-W strip.

    Closed boundaries; parity convention: generation n occupies columns m with
    m + n even. Site dilution makes a column permanently inert (never
    occupiable). Each eligible site (at least one occupied neighbor in the
    previous generation, active column) is occupied with an independent
    probability-theta coin.
    """
    if not 0 <= theta <= 1:
        raise SimError("theta must lie in [0, 1]")
    if width < 2 or width % 2:
        raise SimError("width must be even and at least 2")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    active = rng.random(width) < site_keep_p
    occ = np.zeros(width, dtype=bool)
    occ[0::2] = active[0::2]  # all (active, parity-0) sites start occupied
    config = OrientedConfig(width, 0, occ, theta, active)
    counts = [int(config.occupied.sum())]
    extinction = None
    for gen in range(1, t_max_generations + 1):
        if not config.occupied.any():
            extinction = float(gen - 1)
            break
        config = config.advance(rng)
        counts.append(int(config.occupied.sum()))
    else:
        if not config.occupied.any():
            extinction = float(t_max_generations)
    counts = np.array(counts, dtype=np.int64)
    times = np.arange(len(counts), dtype=np.float64)
    censored = extinction is None
    ext = float(t_max_generations) if censored else extinction
    params = {"theta": float(theta), "site_keep_p": float(site_keep_p),
              "width": int(width)}
    return Trajectory(times, counts, ext, censored, seed, params)
