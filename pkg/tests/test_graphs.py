"""Graph families, dilution masks, and serialization."""
import io

import numpy as np
import pytest

from cpdilute.graphs import (Graph, GraphError, active_subgraph, dilute_bonds,
                             dilute_sites, entity_uniforms, gen_erdos_renyi,
                             gen_grid, gen_lattice2d, gen_path, read_graph,
                             read_mask, write_graph, write_mask)


def test_path_basics():
    assert gen_path(1).n_edges == 0
    g2 = gen_path(2)
    assert g2.n_edges == 1 and tuple(g2.edges[0]) == (0, 1)
    g = gen_path(100)
    assert g.n_edges == 99
    assert all(g.degrees[v] == 2 for v in range(1, 99))
    assert g.degrees[0] == g.degrees[99] == 1


def test_path_invalid_size():
    with pytest.raises(GraphError):
        gen_path(0)


def test_lattice_sizes():
    assert gen_lattice2d(1).n_edges == 0
    g = gen_lattice2d(2)
    assert g.n == 4 and g.n_edges == 4
    assert gen_lattice2d(10).n_edges == 180  # 2 * 10 * 9
    with pytest.raises(GraphError):
        gen_lattice2d(0)


def test_grid_vertex_indexing_row_major():
    g = gen_grid(3, 2)
    # vertex (x, y) = x + 3*y; edge (0,0)-(1,0) must exist
    pairs = {frozenset(map(int, e)) for e in g.edges}
    assert frozenset((0, 1)) in pairs
    assert frozenset((0, 3)) in pairs  # (0,0)-(0,1) vertical


def test_graph_rejects_self_loops_and_duplicates():
    with pytest.raises(GraphError):
        Graph(3, np.array([[0, 0]]), "custom")
    with pytest.raises(GraphError):
        Graph(3, np.array([[0, 1], [1, 0]]), "custom")
    with pytest.raises(GraphError):
        Graph(2, np.array([[0, 5]]), "custom")


def test_erdos_renyi_edge_cases():
    assert gen_erdos_renyi(5, 0.0, 1).n_edges == 0
    k4 = gen_erdos_renyi(4, 4.0, 1)
    assert k4.n_edges == 6  # complete graph
    with pytest.raises(GraphError):
        gen_erdos_renyi(4, 5.0, 1)


def test_erdos_renyi_mean_degree():
    degs = []
    for seed in range(20):
        g = gen_erdos_renyi(10 ** 4, 3.0, seed)
        degs.append(2 * g.n_edges / g.n)
    assert abs(np.mean(degs) - 3.0) < 0.1


def test_erdos_renyi_edge_count_concentration():
    n, mu, reps = 2000, 2.5, 30
    counts = [gen_erdos_renyi(n, mu, s).n_edges for s in range(reps)]
    p = mu / n
    expected = n * (n - 1) / 2 * p
    se = np.sqrt(n * (n - 1) / 2 * p * (1 - p) / reps)
    assert abs(np.mean(counts) - expected) < 4 * se


def test_erdos_renyi_no_degenerate_edges():
    g = gen_erdos_renyi(500, 4.0, 7)
    assert np.all(g.edges[:, 0] != g.edges[:, 1])
    canon = np.sort(g.edges, axis=1)
    keys = canon[:, 0] * g.n + canon[:, 1]
    assert len(np.unique(keys)) == len(keys)


def test_dilute_bonds_extremes_and_determinism():
    g = gen_path(50)
    assert dilute_bonds(g, 1.0, 3).mask.all()
    assert not dilute_bonds(g, 0.0, 3).mask.any()
    a = dilute_bonds(g, 0.42, 9)
    b = dilute_bonds(g, 0.42, 9)
    assert np.array_equal(a.mask, b.mask)
    c = dilute_bonds(g, 0.42, 10)
    assert not np.array_equal(a.mask, c.mask)


def test_dilute_bonds_nested_masks_across_p():
    g = gen_erdos_renyi(300, 3.0, 0)
    for seed in range(10):
        lo = dilute_bonds(g, 0.3, seed)
        hi = dilute_bonds(g, 0.7, seed)
        # every edge kept at the lower p is kept at the higher p
        assert not np.any(lo.mask & ~hi.mask)


def test_dilute_sites_extremes_and_fraction():
    g = gen_path(10 ** 6)
    assert dilute_sites(g, 1.0, 0).mask.all()
    assert not dilute_sites(g, 0.0, 0).mask.any()
    frac = dilute_sites(g, 0.5, 5).mask.mean()
    assert abs(frac - 0.5) < 0.002


def test_dilution_probability_range():
    g = gen_path(5)
    for bad in (-0.1, 1.1):
        with pytest.raises(GraphError):
            dilute_bonds(g, bad, 0)
        with pytest.raises(GraphError):
            dilute_sites(g, bad, 0)


def test_er_bond_dilution_thinning():
    # deleting edges of G(N, mu/N) at keep rate p leaves mean degree p*mu
    degs = []
    for seed in range(20):
        g = gen_erdos_renyi(10 ** 4, 3.0, seed)
        dg = dilute_bonds(g, 1.0 / 3.0, seed + 1000)
        degs.append(2 * len(dg.kept_edges) / g.n)
    assert abs(np.mean(degs) - 1.0) < 0.05


def test_entity_uniforms_counter_based():
    # draw i depends only on (seed, i), not on how many draws were requested
    u5 = entity_uniforms(12, 5)
    u9 = entity_uniforms(12, 9)
    assert np.array_equal(u5, u9[:5])


def test_diluted_graph_mode_accessors():
    g = gen_path(6)
    b = dilute_bonds(g, 0.5, 0)
    s = dilute_sites(g, 0.5, 0)
    assert b.bond_mask.shape == (5,)
    assert s.active_mask.shape == (6,)
    with pytest.raises(GraphError):
        _ = b.active_mask
    with pytest.raises(GraphError):
        _ = s.bond_mask
    assert b.birth_capable.all()
    assert np.array_equal(s.birth_capable, s.active_mask)


def test_site_mode_keeps_all_edges_for_connectivity():
    g = gen_path(6)
    s = dilute_sites(g, 0.5, 0)
    assert len(s.kept_edges) == g.n_edges


def test_active_subgraph_restriction():
    g = gen_path(6)
    mask = np.array([1, 1, 0, 1, 1, 1], dtype=bool)
    dg = type(dilute_sites(g, 0.5, 0))(g, "site", 0.5, mask, 0)
    sub, old = active_subgraph(dg)
    assert sub.n == 5
    assert np.array_equal(old, [0, 1, 3, 4, 5])
    # edges: 0-1, 3-4, 4-5 survive (2 is inert)
    assert sub.n_edges == 3
    with pytest.raises(GraphError):
        active_subgraph(dilute_bonds(g, 0.5, 0))


def test_graph_serialization_round_trip():
    g = gen_erdos_renyi(40, 2.0, 3)
    buf = io.StringIO()
    write_graph(buf, g)
    back = read_graph(io.StringIO(buf.getvalue()))
    assert back.n == g.n and back.kind == g.kind
    assert np.array_equal(back.edges, g.edges)


def test_mask_serialization_round_trip():
    g = gen_path(30)
    for dg in (dilute_bonds(g, 0.6, 4), dilute_sites(g, 0.6, 4)):
        buf = io.StringIO()
        write_mask(buf, dg)
        back = read_mask(io.StringIO(buf.getvalue()), g)
        assert back.mode == dg.mode and back.seed == dg.seed
        assert back.p == dg.p
        assert np.array_equal(back.mask, dg.mask)


def test_read_graph_bad_header():
    with pytest.raises(GraphError):
        read_graph(io.StringIO("oops\n"))
    with pytest.raises(GraphError):
        read_mask(io.StringIO("oops\n"), gen_path(3))
