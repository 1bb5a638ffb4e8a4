import json

import numpy as np
import pytest

from vicseklab.errors import InvalidVertexError, LevelMismatchError, LevelTooLargeError, SchemaError
from vicseklab.exponents import D_H
from vicseklab.graph import (
    CellAddress,
    ball_measure,
    build_level_graph,
    cell_vertex_ids,
    embed_coarse_vertices,
    geodesic_distance,
    geodesic_path,
    graph_from_json,
    graph_to_json,
    hop_distances_from,
)


def vertex_at(g, x, y):
    return int(np.flatnonzero((g.coords[:, 0] == x) & (g.coords[:, 1] == y))[0])


def brute_force_adjacency(g):
    adj = {v: [] for v in range(g.n_vertices)}
    for t, h in g.edges:
        adj[int(t)].append(int(h))
        adj[int(h)].append(int(t))
    return adj


def brute_force_hops(g, start):
    """Plain-python BFS oracle, independent of the package's traversals."""
    adj = brute_force_adjacency(g)
    hops = {start: 0}
    queue = [start]
    while queue:
        nxt = []
        for v in queue:
            for u in adj[v]:
                if u not in hops:
                    hops[u] = hops[v] + 1
                    nxt.append(u)
        queue = nxt
    return hops


@pytest.mark.parametrize("m,nv", [(0, 5), (1, 21), (2, 101), (3, 501), (4, 2501)])
def test_vertex_and_edge_counts(graphs, m, nv):
    g = graphs(m)
    assert g.n_vertices == nv == 4 * 5 ** m + 1
    assert g.n_edges == nv - 1


def test_counts_at_level_five():
    g = build_level_graph(5)
    assert g.n_vertices == 4 * 5 ** 5 + 1
    assert g.n_edges == g.n_vertices - 1


def test_diameter_is_two(graphs):
    """Max pairwise geodesic distance at m=2 equals 2 (corner to corner)."""
    g = graphs(2)
    assert max(max(brute_force_hops(g, u).values()) for u in range(g.n_vertices)) \
        * g.edge_length == pytest.approx(2.0)


def test_graph_arrays_are_immutable(graphs):
    g = graphs(1)
    with pytest.raises(ValueError):
        g.coords[0, 0] = 99
    with pytest.raises(ValueError):
        g.vertex_measure[0] = 0.5


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_tree_connectivity_and_acyclicity(graphs, m):
    g = graphs(m)
    hops = brute_force_hops(g, g.root)
    assert len(hops) == g.n_vertices  # connected
    # edges = vertices - 1 and connected => acyclic
    assert g.n_edges == g.n_vertices - 1


def test_level_zero_shape(graphs):
    g = graphs(0)
    assert sorted(map(tuple, g.coords.tolist())) == [(-1, -1), (-1, 1), (0, 0), (1, -1), (1, 1)]
    assert tuple(g.coords[g.root]) == (0, 0)
    assert all(int(t) == g.root for t, _ in g.edges)  # star out of the center


def test_level_too_large():
    with pytest.raises(LevelTooLargeError):
        build_level_graph(7)
    with pytest.raises(ValueError):
        build_level_graph(-1)


@pytest.mark.parametrize("m", [0, 1, 2, 3, 4])
def test_lattice_invariants(graphs, m):
    g = graphs(m)
    span = 3 ** m
    assert np.all(np.abs(g.coords) <= span)
    # vertices lie on the diagonal lattice: x == y (mod 2)
    assert np.all((g.coords[:, 0] - g.coords[:, 1]) % 2 == 0)


@pytest.mark.parametrize("m", [0, 1, 2, 3, 4])
def test_measure_is_probability(graphs, m):
    g = graphs(m)
    assert abs(float(g.vertex_measure.sum()) - 1.0) < 1e-12
    # masses are 1 or 2 cell-shares of 5**-(m+1)
    shares = g.vertex_measure * 5 ** (m + 1)
    assert set(np.round(shares).astype(int)) <= {1, 2}
    assert g.edge_measure == pytest.approx(3.0 ** -m)


def test_orientation_and_depth(graphs):
    for m in (1, 2, 3):
        g = graphs(m)
        assert np.all(g.depth[g.heads] == g.depth[g.tails] + 1)
        hops = brute_force_hops(g, g.root)
        for t, h in g.edges:
            assert hops[int(t)] < hops[int(h)]  # tail strictly nearer the root


@pytest.mark.parametrize("m", [0, 1, 2])
def test_geodesic_distance_against_bfs_oracle(graphs, m):
    g = graphs(m)
    for u in range(g.n_vertices):
        hops = brute_force_hops(g, u)
        for v in range(g.n_vertices):
            assert geodesic_distance(g, u, v) == pytest.approx(hops[v] * 3.0 ** -m)


def test_geodesic_examples(graphs):
    g = graphs(1)
    q2 = vertex_at(g, -3, 3)
    q3 = vertex_at(g, 3, 3)
    assert geodesic_distance(g, q2, q2) == 0.0
    assert geodesic_distance(g, q2, g.root) == pytest.approx(1.0)
    assert geodesic_distance(g, q2, q3) == pytest.approx(2.0)


def test_geodesic_path_telescopes(graphs, rng):
    g = graphs(2)
    f = rng.standard_normal(g.n_vertices)
    inc = 3.0 ** g.level * (f[g.heads] - f[g.tails]) * g.edge_measure
    for _ in range(50):
        u, v = rng.integers(g.n_vertices, size=2)
        path = geodesic_path(g, int(u), int(v))
        total = sum(s * inc[e] for e, s in path)
        assert total == pytest.approx(f[v] - f[u], abs=1e-12)
        rev = [(e, -s) for e, s in reversed(path)]
        assert rev == geodesic_path(g, int(v), int(u))


def test_geodesic_path_trivial_and_orientation(graphs):
    g0 = build_level_graph(0)
    assert geodesic_path(g0, g0.root, g0.root) == []
    q2 = vertex_at(g0, -1, 1)
    path = geodesic_path(g0, g0.root, q2)
    assert len(path) == 1 and path[0][1] == 1  # root is the tail


def test_invalid_ids(graphs):
    g = graphs(1)
    with pytest.raises(InvalidVertexError):
        geodesic_distance(g, 0, g.n_vertices)
    with pytest.raises(InvalidVertexError):
        geodesic_path(g, -1, 0)


def test_ball_measure(graphs):
    g = graphs(2)
    assert ball_measure(g, g.root, 0.0) == pytest.approx(float(g.vertex_measure[g.root]))
    assert ball_measure(g, g.root, 2.0) == pytest.approx(1.0)
    # brute-force oracle at r = 1/3
    hops = brute_force_hops(g, g.root)
    expect = sum(float(g.vertex_measure[v]) for v, h in hops.items() if h * 3.0 ** -2 <= 1 / 3 + 1e-12)
    assert ball_measure(g, g.root, 1 / 3) == pytest.approx(expect)
    with pytest.raises(ValueError):
        ball_measure(g, g.root, -0.1)


def test_ahlfors_regularity_window(graphs):
    """Ratio mu(B(x,r)) / r^{d_h} inside a bounded interval (reported check)."""
    g = graphs(4)
    rng = np.random.default_rng(7)
    ratios = []
    while len(ratios) < 50:
        x = int(rng.integers(g.n_vertices))
        r = float(rng.uniform(3.0 ** (-g.level + 1), 1.0))
        # exclude boundary-dominated balls: keep centers away from the corners
        if np.max(np.abs(g.coords[x])) > 0.75 * 3 ** g.level:
            continue
        ratios.append(ball_measure(g, x, r) / r ** D_H)
    ratios = np.array(ratios)
    assert float(ratios.max() / ratios.min()) <= 30.0


def test_embed_coarse_vertices(graphs):
    g2 = graphs(2)
    g1 = graphs(1)
    g0 = graphs(0)
    # identity at equal levels
    assert np.array_equal(embed_coarse_vertices(g1, 1, g1), np.arange(g1.n_vertices))
    e01 = embed_coarse_vertices(g1, 0, g0)
    assert np.array_equal(g1.coords[e01], g0.coords * 3)
    # functoriality
    e12 = embed_coarse_vertices(g2, 1, g1)
    e02 = embed_coarse_vertices(g2, 0, g0)
    assert np.array_equal(e12[e01], e02)
    with pytest.raises(LevelMismatchError):
        embed_coarse_vertices(g1, 2)


def test_cells(graphs):
    g = graphs(2)
    for word in [(1,), (3,), (2, 5)]:
        addr = CellAddress(word)
        ids = cell_vertex_ids(g, addr)
        mass = float(g.vertex_measure[ids].sum())
        # closed cell: own mass 5**-n plus half-shares of boundary vertices
        assert mass >= addr.measure - 1e-12
        assert addr.measure == pytest.approx(5.0 ** -len(word))
    with pytest.raises(ValueError):
        CellAddress((0, 1))
    with pytest.raises(LevelMismatchError):
        cell_vertex_ids(g, CellAddress((1, 1, 1)))


def test_serialization_round_trip(graphs):
    g = graphs(1)
    doc = graph_to_json(g)
    g2 = graph_from_json(doc)
    assert np.array_equal(g2.coords, g.coords)
    assert np.array_equal(g2.edges, g.edges)
    assert g2.root == g.root
    bad = json.loads(doc)
    bad["version"] = 99
    with pytest.raises(SchemaError):
        graph_from_json(json.dumps(bad))


def test_hop_distances_match_path_lengths(graphs):
    g = graphs(3)
    hops = hop_distances_from(g, 17)
    for v in (0, 5, 100, 400):
        assert len(geodesic_path(g, 17, v)) == hops[v]
