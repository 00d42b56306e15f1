"""Graph families (1D interval, 2D lattice box, Erdos-Renyi) and random dilution.

Vertex indexing for the 2D box is row-major: vertex (x, y) has index x + width*y,
with x the column and y the row. Edges are stored in a fixed canonical order so
that dilution masks are reproducible and coupled across keep probabilities.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class GraphError(ValueError):
    """Invalid graph construction or dilution parameters."""


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph: ``n`` vertices, edge array of shape (E, 2)."""

    n: int
    edges: np.ndarray
    kind: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.n:
                raise GraphError("edge endpoint out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise GraphError("self-loop")
            canon = np.sort(edges, axis=1)
            if len(np.unique(canon[:, 0] * self.n + canon[:, 1])) != len(canon):
                raise GraphError("duplicate edge")
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, self.edges[:, 0], 1)
        np.add.at(deg, self.edges[:, 1], 1)
        return deg

    @cached_property
    def csr(self):
        """(indptr, indices) adjacency over all edges."""
        return _build_csr(self.n, self.edges)

    def neighbors(self, v: int) -> np.ndarray:
        indptr, indices = self.csr
        return indices[indptr[v]:indptr[v + 1]]


def _build_csr(n, edges, which=None):
    """CSR adjacency from an (E,2) edge array, optionally restricted by a bool mask."""
    if which is not None:
        edges = edges[which]
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.argsort(src, kind="stable")
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst.astype(np.int64)


def gen_path(n: int) -> Graph:
    """Path graph on vertices 0..n-1 with edges {i, i+1}."""
    if n < 1:
        raise GraphError("path needs at least one vertex")
    i = np.arange(n - 1, dtype=np.int64)
    return Graph(n, np.column_stack([i, i + 1]), "path1d", {"n": n})


def gen_grid(width: int, height: int) -> Graph:
    """Rectangular box of width x height vertices with nearest-neighbor edges.

    Edge order: all horizontal edges by (row, column), then all vertical edges
    by (row, column). This order is relied on by the planar-duality code.
    """
    if width < 1 or height < 1:
        raise GraphError("grid needs positive dimensions")
    idx = lambda x, y: x + width * y
    edges = []
    for y in range(height):
        for x in range(width - 1):
            edges.append((idx(x, y), idx(x + 1, y)))
    for y in range(height - 1):
        for x in range(width):
            edges.append((idx(x, y), idx(x, y + 1)))
    edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
    return Graph(width * height, edges, "lattice2d", {"width": width, "height": height})


def gen_lattice2d(L: int) -> Graph:
    """Square L x L box; 2L(L-1) edges."""
    return gen_lattice_rect(L, L)


def gen_lattice_rect(width: int, height: int) -> Graph:
    return gen_grid(width, height)


def grid_edge_index(width: int, height: int, x: int, y: int, horizontal: bool) -> int:
    """Index of a grid edge in the canonical order of :func:`gen_grid`."""
    if horizontal:
        return y * (width - 1) + x
    return (width - 1) * height + y * width + x


def gen_erdos_renyi(n: int, mu: float, seed: int) -> Graph:
    """G(n, mu/n): each pair is an edge independently with probability mu/n.

    Uses the standard geometric-skip sampler over the n(n-1)/2 linearized
    pairs, so generation is O(edges) and deterministic in (n, mu, seed).
    """
    if n < 1:
        raise GraphError("need at least one vertex")
    if mu < 0 or mu > n:
        raise GraphError("edge probability mu/n must lie in [0, 1]")
    p = mu / n
    total = n * (n - 1) // 2
    meta = {"n": n, "mu": float(mu)}
    if p <= 0 or total == 0:
        return Graph(n, np.empty((0, 2), dtype=np.int64), "erdos_renyi", meta)
    if p >= 1:
        u, v = np.triu_indices(n, k=1)
        return Graph(n, np.column_stack([u, v]).astype(np.int64), "erdos_renyi", meta)
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    pos = -1
    picks = []
    log1mp = np.log1p(-p)
    while True:
        # draw a batch of geometric gaps; expected edges left ~ (total-pos)*p
        want = max(64, int((total - pos) * p * 1.2) + 16)
        gaps = np.floor(np.log(rng.random(want)) / log1mp).astype(np.int64) + 1
        steps = np.cumsum(gaps) + pos
        inside = steps < total
        picks.append(steps[inside])
        if not inside.all():
            break
        pos = steps[-1]
    lin = np.concatenate(picks)
    # invert linear index over the upper triangle: pair (u, v), u < v
    v = np.ceil((np.sqrt(8.0 * lin.astype(np.float64) + 9.0) - 1.0) / 2.0).astype(np.int64)
    # correct float rounding at triangle boundaries
    base = v * (v - 1) // 2
    too_big = lin < base
    v[too_big] -= 1
    base = v * (v - 1) // 2
    too_small = lin >= base + v
    v[too_small] += 1
    base = v * (v - 1) // 2
    u = lin - base
    return Graph(n, np.column_stack([u, v]), "erdos_renyi", meta)


@dataclass(frozen=True)
class DilutedGraph:
    """A graph plus an independent-coin dilution mask.

    In bond mode ``mask[j]`` flags edge j as kept; in site mode ``mask[v]``
    flags vertex v as active. Masks are deterministic in (base, mode, p, seed)
    and coupled across p: the uniform for entity i depends only on (seed, i).
    """

    base: Graph
    mode: str  # "bond" | "site"
    p: float
    mask: np.ndarray
    seed: int

    def __post_init__(self):
        if self.mode not in ("bond", "site"):
            raise GraphError("mode must be 'bond' or 'site'")
        want = self.base.n_edges if self.mode == "bond" else self.base.n
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != (want,):
            raise GraphError("mask length does not match mode")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @property
    def bond_mask(self) -> np.ndarray:
        if self.mode != "bond":
            raise GraphError("not a bond dilution")
        return self.mask

    @property
    def active_mask(self) -> np.ndarray:
        if self.mode != "site":
            raise GraphError("not a site dilution")
        return self.mask

    @cached_property
    def kept_edges(self) -> np.ndarray:
        """Edges usable for connectivity: kept bonds, or all edges in site mode."""
        if self.mode == "bond":
            return self.base.edges[self.mask]
        return self.base.edges

    @cached_property
    def kept_csr(self):
        return _build_csr(self.base.n, self.kept_edges)

    @property
    def birth_capable(self) -> np.ndarray:
        """Vertices that can give birth: all in bond mode, active ones in site mode."""
        if self.mode == "bond":
            return np.ones(self.base.n, dtype=bool)
        return self.mask


def entity_uniforms(seed: int, count: int) -> np.ndarray:
    """Counter-based uniforms: draw i depends only on (seed, i)."""
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    return rng.random(count)


def dilute_bonds(g: Graph, p: float, seed: int) -> DilutedGraph:
    """Keep each edge independently with probability p."""
    _check_prob(p)
    mask = entity_uniforms(seed, g.n_edges) < p
    return DilutedGraph(g, "bond", p, mask, seed)


def dilute_sites(g: Graph, p: float, seed: int) -> DilutedGraph:
    """Mark each vertex active independently with probability p.

    Inert vertices stay in the graph: they can be occupied and die but never
    give birth. Use :func:`active_subgraph` for the vertex-deletion reading.
    """
    _check_prob(p)
    mask = entity_uniforms(seed, g.n) < p
    return DilutedGraph(g, "site", p, mask, seed)


def active_subgraph(dg: DilutedGraph):
    """Restriction of a site-diluted graph to its active vertices.

    Returns (graph, old_index_of_new_vertex).
    """
    if dg.mode != "site":
        raise GraphError("active_subgraph needs a site dilution")
    keep = np.flatnonzero(dg.mask)
    relabel = -np.ones(dg.base.n, dtype=np.int64)
    relabel[keep] = np.arange(len(keep))
    e = dg.base.edges
    both = dg.mask[e[:, 0]] & dg.mask[e[:, 1]]
    edges = relabel[e[both]]
    sub = Graph(len(keep), edges, dg.base.kind + "_active", dict(dg.base.meta))
    return sub, keep


def _check_prob(p):
    if not (0.0 <= p <= 1.0):
        raise GraphError("probability must lie in [0, 1]")


# --- plain-text serialization -------------------------------------------------

def write_graph(fobj, g: Graph) -> None:
    """Edge-list format: header ``n <count> kind <tag>``, then ``u v`` lines."""
    close = False
    if isinstance(fobj, (str, bytes)):
        fobj, close = open(fobj, "w"), True
    try:
        fobj.write(f"n {g.n} kind {g.kind}\n")
        for u, v in g.edges:
            fobj.write(f"{u} {v}\n")
    finally:
        if close:
            fobj.close()


def read_graph(fobj) -> Graph:
    close = False
    if isinstance(fobj, (str, bytes)):
        fobj, close = open(fobj), True
    try:
        header = fobj.readline().split()
        if len(header) != 4 or header[0] != "n" or header[2] != "kind":
            raise GraphError("bad graph header")
        n, kind = int(header[1]), header[3]
        pairs = [line.split() for line in fobj if line.strip()]
        edges = np.array([[int(a), int(b)] for a, b in pairs], dtype=np.int64).reshape(-1, 2)
        return Graph(n, edges, kind)
    finally:
        if close:
            fobj.close()


def write_mask(fobj, dg: DilutedGraph) -> None:
    """Header ``mode <bond|site> p <p> seed <seed>`` then one 0/1 flag per line."""
    close = False
    if isinstance(fobj, (str, bytes)):
        fobj, close = open(fobj, "w"), True
    try:
        fobj.write(f"mode {dg.mode} p {dg.p!r} seed {dg.seed}\n")
        for bit in dg.mask:
            fobj.write(f"{int(bit)}\n")
    finally:
        if close:
            fobj.close()


def read_mask(fobj, base: Graph) -> DilutedGraph:
    close = False
    if isinstance(fobj, (str, bytes)):
        fobj, close = open(fobj), True
    try:
        header = fobj.readline().split()
        if len(header) != 6 or header[0] != "mode":
            raise GraphError("bad mask header")
        mode, p, seed = header[1], float(header[3]), int(header[5])
        mask = np.array([bool(int(line)) for line in fobj if line.strip()])
        return DilutedGraph(base, mode, p, mask, seed)
    finally:
        if close:
            fobj.close()


def graph_to_text(g: Graph) -> str:
    buf = io.StringIO()
    write_graph(buf, g)
    return buf.getvalue()
