"""Structural analysis of diluted graphs.

Components and cluster statistics, longest self-avoiding paths (an exact
brute-force version for tiny graphs and a randomized-DFS lower bound for big
ones), the longest contiguous active run on a diluted interval, rectangle
crossings, planar duality on the 2D box, and the strip construction that
stitches crossings into one long path.
"""
from __future__ import annotations

import collections
from dataclasses import dataclass

import numpy as np

from .graphs import DilutedGraph, Graph, GraphError, _build_csr, grid_edge_index


class PercolateError(ValueError):
    pass


# --- union-find ---------------------------------------------------------------

class UnionFind:
    """Array-based union-find with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


@dataclass(frozen=True)
class ClusterReport:
    """Component sizes of one diluted graph (effective vertices only)."""

    component_sizes: tuple
    largest: int
    n_components: int

    @classmethod
    def from_sizes(cls, sizes) -> "ClusterReport":
        sizes = tuple(sorted(int(s) for s in sizes))
        return cls(sizes, max(sizes) if sizes else 0, len(sizes))

    def to_csv(self, fobj) -> None:
        """One ``size,count`` row per distinct component size."""
        fobj.write("size,count\n")
        for size, count in sorted(collections.Counter(self.component_sizes).items()):
            fobj.write(f"{size},{count}\n")


@dataclass(frozen=True)
class Path:
    """Self-avoiding path; length is the edge count."""

    vertices: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    def is_valid(self, dg: DilutedGraph) -> bool:
        verts = self.vertices
        if len(set(verts)) != len(verts) or not verts:
            return False
        kept = {frozenset(e) for e in map(tuple, dg.kept_edges)}
        return all(frozenset((a, b)) in kept for a, b in zip(verts, verts[1:]))

    def to_csv(self, fobj) -> None:
        fobj.write("order,vertex\n")
        for i, v in enumerate(self.vertices):
            fobj.write(f"{i},{v}\n")


def _effective(dg: DilutedGraph):
    """(vertex mask, kept edges restricted to effective vertices)."""
    edges = dg.kept_edges
    if dg.mode == "site":
        active = dg.active_mask
        edges = edges[active[edges[:, 0]] & active[edges[:, 1]]]
        return active, edges
    return np.ones(dg.base.n, dtype=bool), edges


def components(dg: DilutedGraph) -> ClusterReport:
    """Connected components by kept-edge connectivity.

    Bond mode partitions all vertices; site mode partitions the active
    vertices with edges between inert vertices ignored.
    """
    vmask, edges = _effective(dg)
    uf = UnionFind(dg.base.n)
    for u, v in edges:
        uf.union(u, v)
    roots = np.array([uf.find(v) for v in np.flatnonzero(vmask)], dtype=np.int64)
    if roots.size == 0:
        return ClusterReport((), 0, 0)
    _, counts = np.unique(roots, return_counts=True)
    return ClusterReport.from_sizes(counts)


def component_members(dg: DilutedGraph):
    """List of vertex arrays, one per component, largest first."""
    vmask, edges = _effective(dg)
    uf = UnionFind(dg.base.n)
    for u, v in edges:
        uf.union(u, v)
    groups = collections.defaultdict(list)
    for v in np.flatnonzero(vmask):
        groups[uf.find(v)].append(v)
    out = [np.array(g, dtype=np.int64) for g in groups.values()]
    out.sort(key=len, reverse=True)
    return out


def cluster_size_histogram(reports) -> dict:
    """Empirical PMF of component sizes pooled across reports."""
    reports = list(reports)
    if not reports:
        raise PercolateError("no reports")
    counter = collections.Counter()
    for rep in reports:
        counter.update(rep.component_sizes)
    total = sum(counter.values())
    return {size: cnt / total for size, cnt in sorted(counter.items())}


def max_active_run(dg: DilutedGraph) -> int:
    """Longest contiguous block of active vertices on a site-diluted path."""
    if dg.base.kind != "path1d" or dg.mode != "site":
        raise PercolateError("max_active_run needs a site-diluted path1d graph")
    a = dg.active_mask
    if not a.any():
        return 0
    # run lengths via boundaries of the padded 0/1 sequence
    padded = np.concatenate([[0], a.view(np.int8), [0]])
    d = np.diff(padded)
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1)
    return int((ends - starts).max())


# --- longest paths ------------------------------------------------------------

MAX_EXACT_VERTICES = 20


def longest_path_exact(dg: DilutedGraph) -> int:
    """Exact longest self-avoiding path length (edges) by subset DP.

    States are (visited bitmask, endpoint); pruned to reachable states only.
    Hard-capped at 20 effective vertices.
    """
    vmask, edges = _effective(dg)
    verts = np.flatnonzero(vmask)
    if len(verts) > MAX_EXACT_VERTICES:
        raise PercolateError(f"exact search capped at {MAX_EXACT_VERTICES} vertices")
    if len(verts) == 0:
        raise PercolateError("no effective vertices")
    local = {int(v): i for i, v in enumerate(verts)}
    adj = [[] for _ in verts]
    for u, v in edges:
        adj[local[int(u)]].append(local[int(v)])
        adj[local[int(v)]].append(local[int(u)])
    frontier = {(1 << i, i) for i in range(len(verts))}
    seen = set(frontier)
    best = 0
    while frontier:
        nxt = set()
        for mask, end in frontier:
            for w in adj[end]:
                bit = 1 << w
                if mask & bit:
                    continue
                state = (mask | bit, w)
                if state not in seen:
                    seen.add(state)
                    nxt.add(state)
        if nxt:
            best += 1
        frontier = nxt
    return best


def longest_path_dfs(dg: DilutedGraph, restarts: int = 10, seed: int = 0) -> Path:
    """Randomized-DFS lower bound for the longest path.

    Components are tried largest first and skipped once they are too small to
    beat the best path found so far. Within a component, each restart runs an
    iterative DFS from a random vertex with uniformly shuffled neighbor order;
    the deepest leaf of the DFS tree defines the reported path.
    """
    vmask, edges = _effective(dg)
    verts = np.flatnonzero(vmask)
    if verts.size == 0:
        raise PercolateError("no effective vertices")
    n = dg.base.n
    indptr, indices = _build_csr(n, edges)
    rng = np.random.default_rng(seed)
    parent = np.empty(n, dtype=np.int64)
    depth = np.empty(n, dtype=np.int64)
    visited = np.zeros(n, dtype=bool)
    best_path = (int(verts[rng.integers(len(verts))]),)

    def _roots():
        # vertex count bounds path length, so stop at components too small to win
        for members in component_members(dg):
            if len(members) <= len(best_path):
                return
            for i in rng.integers(len(members), size=max(1, restarts)):
                yield int(members[i])

    for root in _roots():
        visited[:] = False
        visited[root] = True
        parent[root] = -1
        depth[root] = 0
        # stack of (vertex, shuffled neighbor list, cursor)
        stack = [(root, rng.permutation(indices[indptr[root]:indptr[root + 1]]), 0)]
        deepest, deepest_depth = root, 0
        while stack:
            v, nbrs, cur = stack[-1]
            advanced = False
            while cur < len(nbrs):
                w = int(nbrs[cur])
                cur += 1
                if not visited[w]:
                    visited[w] = True
                    parent[w] = v
                    depth[w] = depth[v] + 1
                    if depth[w] > deepest_depth:
                        deepest, deepest_depth = w, depth[w]
                    stack[-1] = (v, nbrs, cur)
                    stack.append((w, rng.permutation(indices[indptr[w]:indptr[w + 1]]), 0))
                    advanced = True
                    break
            if not advanced:
                stack.pop()
        if deepest_depth > len(best_path) - 1:
            chain = []
            v = deepest
            while v != -1:
                chain.append(v)
                v = int(parent[v])
            best_path = tuple(reversed(chain))
    return Path(best_path)


def expected_path_count(n: int, k: int, nu: float) -> float:
    """Expected number of self-avoiding k-vertex paths in G(n, nu/n).

    n(n-1)...(n-k+1) * (nu/n)^(k-1), evaluated in log space.
    """
    lg = log_expected_path_count(n, k, nu)
    return float(np.exp(lg)) if lg < 700 else float("inf")


def log_expected_path_count(n: int, k: int, nu: float) -> float:
    import math

    if not 1 <= k <= n:
        raise PercolateError("need 1 <= k <= n")
    if nu < 0:
        raise PercolateError("nu must be nonnegative")
    falling = math.lgamma(n + 1) - math.lgamma(n - k + 1)
    if k == 1:
        return falling
    if nu == 0:
        return float("-inf")
    return falling + (k - 1) * (math.log(nu) - math.log(n))


def unit_path_count_length(n: int, nu: float) -> float:
    """Continuous k solving expected_path_count(n, k, nu) = 1, found numerically."""
    from scipy.optimize import brentq

    if not 0 < nu < 1:
        raise PercolateError("nu must lie in (0, 1)")
    return float(brentq(lambda k: _log_pi_continuous(n, k, nu), 1.0 + 1e-9, n - 1e-9))


def _log_pi_continuous(n, k, nu):
    import math

    falling = math.lgamma(n + 1) - math.lgamma(n - k + 1)
    return falling + (k - 1) * (math.log(nu) - math.log(n))


# --- 2D crossings and duality -------------------------------------------------

def _grid_shape(dg: DilutedGraph):
    if dg.base.kind != "lattice2d" or dg.mode != "bond":
        raise PercolateError("needs a bond-diluted lattice2d graph")
    return dg.base.meta["width"], dg.base.meta["height"]


def open_bond_grids(dg: DilutedGraph):
    """Kept-edge lookup grids: h[x, y] for (x,y)-(x+1,y), v[x, y] for (x,y)-(x,y+1)."""
    W, H = _grid_shape(dg)
    mask = dg.bond_mask
    h = mask[: (W - 1) * H].reshape(H, W - 1).T.copy()
    v = mask[(W - 1) * H:].reshape(H - 1, W).T.copy()
    return h, v


def has_crossing(dg: DilutedGraph, rect=None, orientation: str = "LR") -> bool:
    """True iff kept edges connect the two opposite sides of the rectangle.

    ``rect`` is (x0, x1, y0, y1) in inclusive vertex coordinates; default is
    the whole box. Search is a frontier sweep from the whole starting side.
    """
    W, H = _grid_shape(dg)
    if rect is None:
        rect = (0, W - 1, 0, H - 1)
    x0, x1, y0, y1 = rect
    if not (0 <= x0 < x1 <= W - 1 and 0 <= y0 < y1 <= H - 1):
        if orientation == "LR" and x0 == x1:
            raise PercolateError("degenerate rectangle")
        if orientation == "TB" and y0 == y1:
            raise PercolateError("degenerate rectangle")
        if not (0 <= x0 <= x1 <= W - 1 and 0 <= y0 <= y1 <= H - 1):
            raise PercolateError("rectangle outside the lattice box")
    if orientation not in ("LR", "TB"):
        raise PercolateError("orientation must be 'LR' or 'TB'")
    return crossing_path(dg, rect, orientation) is not None


def crossing_path(dg: DilutedGraph, rect=None, orientation: str = "LR"):
    """A kept-edge crossing path of the rectangle, or None.

    The path is found breadth-first from the whole starting side, so it is a
    shortest crossing; vertices run start-side to far-side.
    """
    W, H = _grid_shape(dg)
    if rect is None:
        rect = (0, W - 1, 0, H - 1)
    x0, x1, y0, y1 = rect
    if x1 < x0 or y1 < y0 or (orientation == "LR" and x0 == x1) or (
            orientation == "TB" and y0 == y1):
        raise PercolateError("degenerate rectangle")
    h, v = open_bond_grids(dg)
    w, ht = x1 - x0 + 1, y1 - y0 + 1
    prev = -np.ones((w, ht), dtype=np.int64)  # packed predecessor + 1, 0 = source
    seen = np.zeros((w, ht), dtype=bool)
    if orientation == "LR":
        frontier = [(0, y) for y in range(ht)]
    else:
        frontier = [(x, 0) for x in range(w)]
    for x, y in frontier:
        seen[x, y] = True
        prev[x, y] = 0
    queue = collections.deque(frontier)
    goal = None
    while queue:
        x, y = queue.popleft()
        gx, gy = x + x0, y + y0
        if (orientation == "LR" and x == w - 1) or (orientation == "TB" and y == ht - 1):
            goal = (x, y)
            break
        steps = []
        if x + 1 < w and h[gx, gy]:
            steps.append((x + 1, y))
        if x > 0 and h[gx - 1, gy]:
            steps.append((x - 1, y))
        if y + 1 < ht and v[gx, gy]:
            steps.append((x, y + 1))
        if y > 0 and v[gx, gy - 1]:
            steps.append((x, y - 1))
        for nx, ny in steps:
            if not seen[nx, ny]:
                seen[nx, ny] = True
                prev[nx, ny] = (x * ht + y) + 1
                queue.append((nx, ny))
    if goal is None:
        return None
    chain = []
    x, y = goal
    while True:
        chain.append((x + x0) + W * (y + y0))
        code = prev[x, y]
        if code == 0:
            break
        code -= 1
        x, y = divmod(int(code), ht)
    return Path(tuple(reversed(chain)))


def _dual_edge_map(W: int, H: int) -> np.ndarray:
    """Permutation taking dual edge index -> primal edge index, for W = H + 1.

    The dual of the W x H box (left-right orientation) lives on the
    (W-1) x (H+1) box (top-bottom orientation). Geometric pairs: a primal
    horizontal edge crosses a dual vertical edge and an interior primal
    vertical edge crosses an interior dual horizontal edge. The crossing-
    irrelevant leftovers (primal boundary-column verticals, dual top/bottom-row
    horizontals) are paired left<->bottom and right<->top so the whole map is
    a bijection and double dualization is exact.
    """
    if W != H + 1:
        raise PercolateError("duality implemented for the (n+1) x n geometry only")
    DW, DH = W - 1, H + 1
    n_dual = (DW - 1) * DH + DW * (DH - 1)
    perm = -np.ones(n_dual, dtype=np.int64)
    # dual vertical (x, j)-(x, j+1)  <->  primal horizontal (x, y=j)-(x+1, y=j)
    for x in range(DW):
        for j in range(DH - 1):
            perm[grid_edge_index(DW, DH, x, j, False)] = grid_edge_index(W, H, x, j, True)
    # dual horizontal interior rows  <->  primal vertical interior columns
    for xp in range(DW - 1):
        for j in range(1, DH - 1):
            perm[grid_edge_index(DW, DH, xp, j, True)] = \
                grid_edge_index(W, H, xp + 1, j - 1, False)
    # leftovers: primal column 0 <-> dual bottom row, primal column W-1 <-> dual top row
    for y in range(H - 1):
        perm[grid_edge_index(DW, DH, y, 0, True)] = grid_edge_index(W, H, 0, y, False)
        perm[grid_edge_index(DW, DH, y, DH - 1, True)] = \
            grid_edge_index(W, H, W - 1, y, False)
    assert (perm >= 0).all()
    return perm


def dual_config(dg: DilutedGraph) -> DilutedGraph:
    """Dual bond configuration: each dual edge open iff its primal partner is closed.

    A W x H box with W = H + 1 maps to the (W-1) x (H+1) dual box; a box with
    H = W + 1 is treated as a dual and maps back through the inverse pairing,
    so dual_config(dual_config(x)) reproduces x exactly.
    """
    from .graphs import gen_grid

    W, H = _grid_shape(dg)
    if W == H + 1:
        perm = _dual_edge_map(W, H)
        dual = gen_grid(W - 1, H + 1)
        mask = ~dg.bond_mask[perm]
        return DilutedGraph(dual, "bond", 1.0 - dg.p, mask, dg.seed)
    if H == W + 1:
        perm = _dual_edge_map(W + 1, H - 1)
        primal = gen_grid(W + 1, H - 1)
        mask = np.empty(primal.n_edges, dtype=bool)
        mask[perm] = ~dg.bond_mask
        return DilutedGraph(primal, "bond", 1.0 - dg.p, mask, dg.seed)
    raise PercolateError("duality implemented for the (n+1) x n geometry only")


# --- strip construction -------------------------------------------------------

def stitch_paths(crossings) -> Path:
    """Combine intersecting crossing paths into one self-avoiding path.

    Walks each path to its first vertex shared with the next path and jumps
    there. If the greedy trimming ever self-intersects, falls back to a
    breadth-first walk inside the union of the crossing edges, which is always
    simple and still traverses every strip.
    """
    crossings = [p if isinstance(p, Path) else Path(p) for p in crossings]
    if not crossings:
        raise PercolateError("no paths to stitch")
    if len(crossings) == 1:
        return crossings[0]
    for a, b in zip(crossings, crossings[1:]):
        if not set(a.vertices) & set(b.vertices):
            raise PercolateError("consecutive crossings do not intersect")
    stitched = _stitch_greedy(crossings)
    if stitched is not None:
        return stitched
    return _stitch_union_walk(crossings)


def _stitch_greedy(crossings):
    out = []
    used = set()
    cur = list(crossings[0].vertices)
    for nxt in crossings[1:]:
        nxt_set = set(nxt.vertices)
        cut = next((i for i, v in enumerate(cur) if v in nxt_set), None)
        if cut is None:
            return None
        segment = cur[: cut + 1]
        if used & set(segment):
            return None
        out.extend(segment)
        used.update(segment)
        junction = segment[-1]
        jpos = nxt.vertices.index(junction)
        cur = list(nxt.vertices[jpos + 1:])
        if not cur:  # junction at the tail: walk the other way
            cur = list(reversed(nxt.vertices[:jpos]))
        if not cur:
            return None
    if used & set(cur):
        return None
    out.extend(cur)
    if len(set(out)) != len(out):
        return None
    return Path(tuple(out))


def _stitch_union_walk(crossings):
    adj = collections.defaultdict(set)
    for p in crossings:
        for a, b in zip(p.vertices, p.vertices[1:]):
            adj[a].add(b)
            adj[b].add(a)
    start = crossings[0].vertices[0]
    goal = crossings[-1].vertices[-1]
    prev = {start: None}
    queue = collections.deque([start])
    while queue:
        v = queue.popleft()
        if v == goal:
            break
        for w in adj[v]:
            if w not in prev:
                prev[w] = v
                queue.append(w)
    if goal not in prev:
        raise PercolateError("crossings do not form a connected union")
    chain = []
    v = goal
    while v is not None:
        chain.append(v)
        v = prev[v]
    return Path(tuple(reversed(chain)))


def staircase_long_path(dg: DilutedGraph, C: float):
    """Strip-construction long path on a bond-diluted L x L box.

    Splits the box into horizontal strips of height ~C*log(L), finds a
    left-right crossing of each, links consecutive strips through top-bottom
    crossings of end boxes on alternating sides, and stitches everything into
    one self-avoiding path. Returns None when any required crossing is absent.
    """
    W, H = _grid_shape(dg)
    if W != H:
        raise PercolateError("staircase construction needs a square box")
    L = W
    height = max(2, int(round(C * np.log(L))))
    if height > L:
        raise PercolateError("strip height exceeds the box")
    n_strips = L // height
    if n_strips < 1:
        return None
    pieces = []
    for k in range(n_strips):
        y0, y1 = k * height, (k + 1) * height - 1
        strip = crossing_path(dg, (0, L - 1, y0, y1), "LR")
        if strip is None:
            return None
        if k % 2 == 1:  # alternate direction so end boxes alternate sides
            strip = Path(tuple(reversed(strip.vertices)))
        pieces.append(strip)
        if k + 1 < n_strips:
            by1 = min((k + 2) * height - 1, L - 1)
            if k % 2 == 0:  # path ended at the right edge
                box = (L - height, L - 1, y0, by1)
            else:
                box = (0, height - 1, y0, by1)
            link = crossing_path(dg, box, "TB")
            if link is None:
                return None
            pieces.append(link)
    # interleave correctly: strip0, link0, strip1, link1, ...
    return stitch_paths(pieces)


def strip_crossing_rate(L: int, height: int, p: float, seeds) -> float:
    """Monte Carlo failure-rate calibrator for the strip height constant C."""
    from .graphs import dilute_bonds, gen_grid

    g = gen_grid(L, height)
    hits = 0
    seeds = list(seeds)
    for s in seeds:
        dg = dilute_bonds(g, p, s)
        if has_crossing(dg, (0, L - 1, 0, height - 1), "LR"):
            hits += 1
    return hits / len(seeds)
