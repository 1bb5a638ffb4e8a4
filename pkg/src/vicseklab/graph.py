"""Exact level-m graph approximations of the compact Vicsek set.

The Vicsek set is generated by five ratio-1/3 contractions of the square
(center plus four corners).  Working at level m we place every vertex on
the integer lattice: the point with integer coordinates (x, y) sits at
(x * 3**-m, y * 3**-m) in a frame where the center is (0, 0), the corners
are (+-1, +-1), and every level-0 edge has metric length 1.  Integer
coordinates make vertex deduplication exact and vertex ids reproducible.

The level-m graph is a tree with 4 * 5**m + 1 vertices and 4 * 5**m edges.
Each edge is oriented away from the root (the center): the tail is the
endpoint nearer the root.  The vertex measure mu_m gives every level-m
cell mass 5**-m, split equally over its five marked points; the edge
measure nu_m is the uniform length 3**-m.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .errors import (
    InvalidVertexError,
    LevelMismatchError,
    LevelTooLargeError,
    SchemaError,
)

#: Default cap on the construction level (4 * 5**6 + 1 = 62501 vertices).
MAX_LEVEL = 6

#: JSON document version for serialized graphs.
GRAPH_FORMAT_VERSION = 1

# Fixed points of the five contractions, in corner coordinates (+-1, +-1).
FIXED_POINTS = np.array([(0, 0), (-1, 1), (1, 1), (1, -1), (-1, -1)], dtype=np.int64)


@dataclass
class LevelGraph:
    """Immutable level-m Vicsek graph with tree structure and both measures.

    Vertices are indexed 0..N-1 in lexicographic order of their integer
    coordinates; edges 0..E-1 in lexicographic order of (tail, head).
    All arrays are locked read-only after construction.
    """

    level: int
    coords: np.ndarray          # (N, 2) int64 lattice coordinates
    edges: np.ndarray           # (E, 2) int64 (tail, head), tail nearer root
    root: int
    vertex_measure: np.ndarray  # (N,) float64, sums to 1
    depth: np.ndarray           # (N,) int64 hop count to root
    parent_vertex: np.ndarray   # (N,) int64, -1 at root
    parent_edge: np.ndarray     # (N,) int64, -1 at root
    # CSR adjacency: neighbors of v are nbr_vertex[nbr_ptr[v]:nbr_ptr[v+1]]
    nbr_ptr: np.ndarray = field(repr=False)
    nbr_vertex: np.ndarray = field(repr=False)
    nbr_edge: np.ndarray = field(repr=False)
    bfs_order: np.ndarray = field(repr=False)  # root-first traversal order

    def __post_init__(self) -> None:
        for arr in (self.coords, self.edges, self.vertex_measure, self.depth,
                    self.parent_vertex, self.parent_edge, self.nbr_ptr,
                    self.nbr_vertex, self.nbr_edge, self.bfs_order):
            arr.setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return self.coords.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def edge_length(self) -> float:
        """Metric length 3**-m of every level-m edge."""
        return 3.0 ** (-self.level)

    @property
    def edge_measure(self) -> float:
        """Uniform nu_m weight of an edge (equal to the edge length)."""
        return self.edge_length

    @property
    def tails(self) -> np.ndarray:
        return self.edges[:, 0]

    @property
    def heads(self) -> np.ndarray:
        return self.edges[:, 1]

    def check_vertex(self, v: int) -> int:
        v = int(v)
        if not 0 <= v < self.n_vertices:
            raise InvalidVertexError(f"vertex id {v} outside 0..{self.n_vertices - 1}")
        return v


@dataclass(frozen=True)
class CellAddress:
    """Address word over {1..5} selecting a level-n sub-cell; mu-mass 5**-n."""

    word: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(i not in (1, 2, 3, 4, 5) for i in self.word):
            raise ValueError(f"cell word must use letters 1..5, got {self.word}")

    @property
    def depth(self) -> int:
        return len(self.word)

    @property
    def measure(self) -> float:
        return 5.0 ** (-len(self.word))


def _pack(coords: np.ndarray, span: int) -> np.ndarray:
    """Injective int64 key for lattice points with |x|,|y| <= span."""
    side = 2 * span + 1
    return (coords[:, 0] + span) * side + (coords[:, 1] + span)


def _cell_centers(m: int) -> np.ndarray:
    """Centers of the 5**m unit cells of the level-m graph, integer coords."""
    centers = np.zeros((1, 2), dtype=np.int64)
    half = 3 ** m
    for _ in range(m):
        half //= 3
        offsets = 2 * half * FIXED_POINTS
        centers = (centers[:, None, :] + offsets[None, :, :]).reshape(-1, 2)
    return centers


def build_level_graph(m: int, max_level: int = MAX_LEVEL) -> LevelGraph:
    """Construct the level-m Vicsek graph.

    Vertices are deduplicated by exact integer coordinates and ordered
    lexicographically on (x, y), so ids are deterministic across runs.
    """
    if m < 0:
        raise ValueError(f"level must be non-negative, got {m}")
    if m > max_level:
        raise LevelTooLargeError(f"level {m} exceeds the configured maximum {max_level}")

    centers = _cell_centers(m)
    corners = (centers[:, None, :] + FIXED_POINTS[None, 1:, :]).reshape(-1, 2)
    points = np.concatenate([centers, corners], axis=0)

    span = 3 ** m
    keys = _pack(points, span)
    unique_keys = np.unique(keys)  # sorted == lexicographic on (x, y)
    coords = np.stack([unique_keys // (2 * span + 1) - span,
                       unique_keys % (2 * span + 1) - span], axis=1)
    n = coords.shape[0]

    point_ids = np.searchsorted(unique_keys, keys)
    n_cells = centers.shape[0]
    center_ids = point_ids[:n_cells]
    corner_ids = point_ids[n_cells:].reshape(n_cells, 4)

    # Four center-corner edges per cell; endpoints ordered later by depth.
    raw = np.stack([np.repeat(center_ids, 4), corner_ids.reshape(-1)], axis=1)

    # Vertex measure: each cell spreads mass 5**-m over its 5 marked points.
    multiplicity = np.zeros(n, dtype=np.int64)
    np.add.at(multiplicity, center_ids, 1)
    np.add.at(multiplicity, corner_ids.reshape(-1), 1)
    vertex_measure = multiplicity / float(5 ** (m + 1))

    root = int(np.searchsorted(unique_keys, _pack(np.zeros((1, 2), dtype=np.int64), span)[0]))

    depth, parent_vertex, order, nbr = _bfs_tree(n, raw, root)

    # Orient: tail is the endpoint with strictly smaller depth (nearer root).
    flip = depth[raw[:, 0]] > depth[raw[:, 1]]
    tails = np.where(flip, raw[:, 1], raw[:, 0])
    heads = np.where(flip, raw[:, 0], raw[:, 1])
    edge_order = np.lexsort((heads, tails))
    edges = np.stack([tails[edge_order], heads[edge_order]], axis=1)

    # The connecting edge of a non-root vertex v is (parent(v), v).
    edge_keys = edges[:, 0] * np.int64(n) + edges[:, 1]
    parent_edge = np.full(n, -1, dtype=np.int64)
    non_root = np.flatnonzero(parent_vertex >= 0)
    lookup = parent_vertex[non_root] * np.int64(n) + non_root
    parent_edge[non_root] = np.searchsorted(edge_keys, lookup)

    nbr_ptr, nbr_vertex, nbr_edge = _adjacency(n, edges)

    return LevelGraph(
        level=m,
        coords=coords,
        edges=edges,
        root=root,
        vertex_measure=vertex_measure,
        depth=depth,
        parent_vertex=parent_vertex,
        parent_edge=parent_edge,
        nbr_ptr=nbr_ptr,
        nbr_vertex=nbr_vertex,
        nbr_edge=nbr_edge,
        bfs_order=order,
    )


def _adjacency(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    e = edges.shape[0]
    ends = np.concatenate([edges[:, 0], edges[:, 1]])
    other = np.concatenate([edges[:, 1], edges[:, 0]])
    eid = np.concatenate([np.arange(e), np.arange(e)])
    srt = np.argsort(ends, kind="stable")
    nbr_ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(nbr_ptr, ends + 1, 1)
    np.cumsum(nbr_ptr, out=nbr_ptr)
    return nbr_ptr, other[srt], eid[srt]


def _bfs_tree(n: int, raw_edges: np.ndarray, root: int):
    """Depths, parents, root-first order, and adjacency from unoriented edges."""
    nbr_ptr, nbr_vertex, _ = _adjacency(n, raw_edges)
    depth = np.full(n, -1, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    depth[root] = 0
    order[0] = root
    head, tail = 0, 1
    while head < tail:
        v = order[head]
        head += 1
        for u in nbr_vertex[nbr_ptr[v]:nbr_ptr[v + 1]]:
            if depth[u] < 0:
                depth[u] = depth[v] + 1
                parent[u] = v
                order[tail] = u
                tail += 1
    if tail != n:
        raise RuntimeError("level graph is not connected")  # construction bug guard
    return depth, parent, order, nbr_ptr


def geodesic_distance(g: LevelGraph, u: int, v: int) -> float:
    """Tree metric: (hops on the unique u-v path) * 3**-m."""
    return hop_distance(g, u, v) * g.edge_length


def hop_distance(g: LevelGraph, u: int, v: int) -> int:
    u, v = g.check_vertex(u), g.check_vertex(v)
    a = lowest_common_ancestor(g, u, v)
    return int(g.depth[u] + g.depth[v] - 2 * g.depth[a])


def lowest_common_ancestor(g: LevelGraph, u: int, v: int) -> int:
    u, v = g.check_vertex(u), g.check_vertex(v)
    du, dv = int(g.depth[u]), int(g.depth[v])
    while du > dv:
        u = int(g.parent_vertex[u]); du -= 1
    while dv > du:
        v = int(g.parent_vertex[v]); dv -= 1
    while u != v:
        u = int(g.parent_vertex[u])
        v = int(g.parent_vertex[v])
    return u


def geodesic_path(g: LevelGraph, u: int, v: int) -> list[tuple[int, int]]:
    """Ordered signed edge list along the unique u -> v path.

    Sign +1 means the edge is traversed tail -> head.  Summing the signed
    gradient increments of any vertex function along the path reproduces
    f(v) - f(u) exactly.
    """
    u, v = g.check_vertex(u), g.check_vertex(v)
    a = lowest_common_ancestor(g, u, v)
    up = []
    x = u
    while x != a:  # parent edges have tail = parent, so upward steps go head -> tail
        up.append((int(g.parent_edge[x]), -1))
        x = int(g.parent_vertex[x])
    down = []
    x = v
    while x != a:
        down.append((int(g.parent_edge[x]), +1))
        x = int(g.parent_vertex[x])
    down.reverse()
    return up + down


def hop_distances_from(g: LevelGraph, x: int) -> np.ndarray:
    """Hop counts from x to every vertex (linear-time tree BFS)."""
    x = g.check_vertex(x)
    hops = np.full(g.n_vertices, -1, dtype=np.int64)
    hops[x] = 0
    frontier = [x]
    while frontier:
        nxt = []
        for v in frontier:
            for u in g.nbr_vertex[g.nbr_ptr[v]:g.nbr_ptr[v + 1]]:
                if hops[u] < 0:
                    hops[u] = hops[v] + 1
                    nxt.append(int(u))
        frontier = nxt
    return hops


def ball_measure(g: LevelGraph, x: int, r: float) -> float:
    """mu_m mass of the closed geodesic ball B(x, r)."""
    if r < 0:
        raise ValueError(f"radius must be non-negative, got {r}")
    hops = hop_distances_from(g, x)
    # d(x,y) <= r  <=>  hops <= r * 3**m; guard the comparison against the
    # representation error of r itself (e.g. r = 1/3 at m = 2).
    max_hops = int(np.floor(r * 3 ** g.level + 1e-9))
    return float(np.sum(g.vertex_measure[hops <= max_hops]))


def embed_coarse_vertices(g_fine: LevelGraph, n: int,
                          g_coarse: LevelGraph | None = None) -> np.ndarray:
    """Map level-n vertex ids into g_fine by exact coordinate rescaling.

    Returns an array indexed by coarse vertex id.  The coarse graph is
    rebuilt when not supplied; construction is deterministic so the id
    spaces always agree.
    """
    if n > g_fine.level:
        raise LevelMismatchError(f"coarse level {n} exceeds fine level {g_fine.level}")
    if g_coarse is None:
        g_coarse = build_level_graph(n, max_level=max(n, MAX_LEVEL))
    elif g_coarse.level != n:
        raise LevelMismatchError(f"supplied coarse graph has level {g_coarse.level}, expected {n}")
    scale = 3 ** (g_fine.level - n)
    span = 3 ** g_fine.level
    fine_keys = _pack(g_fine.coords, span)
    want = _pack(g_coarse.coords * scale, span)
    idx = np.searchsorted(fine_keys, want)
    if not np.array_equal(fine_keys[idx], want):
        raise RuntimeError("coarse vertex missing from fine graph")  # cannot happen for nested levels
    return idx


def cell_center_and_halfwidth(g: LevelGraph, address: CellAddress) -> tuple[np.ndarray, int]:
    """Integer center and half-side of the square spanned by a sub-cell."""
    if address.depth > g.level:
        raise LevelMismatchError(
            f"cell word of length {address.depth} too deep for level {g.level}")
    center = np.zeros(2, dtype=np.int64)
    half = 3 ** g.level
    for letter in address.word:
        half //= 3
        center = center + 2 * half * FIXED_POINTS[letter - 1]
    return center, half


def cell_vertex_ids(g: LevelGraph, address: CellAddress) -> np.ndarray:
    """Ids of all level-m vertices inside the closed sub-cell.

    Cells are axis-aligned squares in integer coordinates, and the graph
    intersected with that square is exactly the sub-cell, so a Chebyshev
    box test is exact.
    """
    center, half = cell_center_and_halfwidth(g, address)
    inside = np.max(np.abs(g.coords - center[None, :]), axis=1) <= half
    return np.flatnonzero(inside)


def graph_to_dict(g: LevelGraph) -> dict:
    return {
        "version": GRAPH_FORMAT_VERSION,
        "level": g.level,
        "root": g.root,
        "vertices": [
            {"id": i, "x": int(x), "y": int(y), "measure": float(w)}
            for i, ((x, y), w) in enumerate(zip(g.coords, g.vertex_measure))
        ],
        "edges": [
            {"id": i, "tail": int(t), "head": int(h)}
            for i, (t, h) in enumerate(g.edges)
        ],
    }


def graph_to_json(g: LevelGraph, fp: IO[str] | None = None) -> str:
    doc = json.dumps(graph_to_dict(g), indent=1)
    if fp is not None:
        fp.write(doc)
    return doc


def graph_from_dict(doc: dict) -> LevelGraph:
    if doc.get("version") != GRAPH_FORMAT_VERSION:
        raise SchemaError(f"unsupported graph document version {doc.get('version')!r}")
    level = int(doc["level"])
    g = build_level_graph(level)
    coords = np.array([[v["x"], v["y"]] for v in sorted(doc["vertices"], key=lambda v: v["id"])],
                      dtype=np.int64)
    if not np.array_equal(coords, g.coords):
        raise SchemaError("vertex table does not match the canonical construction")
    edges = np.array([[e["tail"], e["head"]] for e in sorted(doc["edges"], key=lambda e: e["id"])],
                     dtype=np.int64)
    if not np.array_equal(edges, g.edges):
        raise SchemaError("edge table does not match the canonical construction")
    return g


def graph_from_json(text: str) -> LevelGraph:
    return graph_from_dict(json.loads(text))
