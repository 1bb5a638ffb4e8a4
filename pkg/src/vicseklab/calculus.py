"""Weak gradient, co-differential, Laplacian, energy, and norms on a level graph.

The gradient of a vertex function is the constant edge density realizing
the fundamental theorem of calculus on the tree:

    df(e) * nu_m(e) = f(head) - f(tail)        i.e.  df(e) = 3**m * (f(head) - f(tail)).

With this discretization the fundamental theorem, the adjointness of the
co-differential, and the energy identity <-Lap f, f>_mu = E(f) all hold
exactly (up to roundoff), not merely in the fine-level limit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .errors import GraphMismatchError, LevelMismatchError
from .graph import LevelGraph, build_level_graph, embed_coarse_vertices, geodesic_path


@dataclass
class VertexFunction:
    """Real-valued function on the vertices of a level graph."""

    graph: LevelGraph
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.graph.n_vertices,):
            raise GraphMismatchError(
                f"expected {self.graph.n_vertices} vertex values, got {self.values.shape}")

    def copy(self) -> "VertexFunction":
        return VertexFunction(self.graph, self.values.copy())


@dataclass
class EdgeFunction:
    """Real-valued 1-form on the oriented edges of a level graph."""

    graph: LevelGraph
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.graph.n_edges,):
            raise GraphMismatchError(
                f"expected {self.graph.n_edges} edge values, got {self.values.shape}")

    def copy(self) -> "EdgeFunction":
        return EdgeFunction(self.graph, self.values.copy())


def same_graph(a, b) -> LevelGraph:
    if a.graph is not b.graph and (a.graph.level != b.graph.level):
        raise GraphMismatchError("functions live on different graphs")
    return a.graph


def gradient(f: VertexFunction) -> EdgeFunction:
    g = f.graph
    return EdgeFunction(g, 3.0 ** g.level * (f.values[g.heads] - f.values[g.tails]))


def codifferential(eta: EdgeFunction) -> VertexFunction:
    """L^2 adjoint of the gradient: <eta, df>_nu = <d* eta, f>_mu for all f."""
    g = eta.graph
    out = np.zeros(g.n_vertices)
    np.add.at(out, g.heads, eta.values)
    np.subtract.at(out, g.tails, eta.values)
    out /= g.vertex_measure
    return VertexFunction(g, out)


def laplacian(f: VertexFunction) -> VertexFunction:
    """Generator Lap f = -d* d f; annihilates constants, <=0 definite in mu."""
    out = codifferential(gradient(f))
    out.values = -out.values
    return out


def energy(f: VertexFunction) -> float:
    """Dirichlet energy 3**m * sum over edges of (f(head) - f(tail))**2."""
    g = f.graph
    diff = f.values[g.heads] - f.values[g.tails]
    return float(3.0 ** g.level * np.dot(diff, diff))


def mu_inner(f: VertexFunction, h: VertexFunction) -> float:
    g = same_graph(f, h)
    return float(np.dot(f.values * g.vertex_measure, h.values))


def nu_inner(eta: EdgeFunction, xi: EdgeFunction) -> float:
    g = same_graph(eta, xi)
    return float(g.edge_measure * np.dot(eta.values, xi.values))


def _weighted_lp(values: np.ndarray, weights, p: float) -> float:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if math.isinf(p):
        return float(np.max(np.abs(values))) if values.size else 0.0
    return float(np.sum(np.abs(values) ** p * weights) ** (1.0 / p))


def lp_vertex_norm(f: VertexFunction, p: float) -> float:
    """L^p(mu_m) norm; max |f| at p = inf."""
    return _weighted_lp(f.values, f.graph.vertex_measure, p)


def lp_edge_norm(eta: EdgeFunction, p: float) -> float:
    """L^p(nu_m) norm; max |eta| at p = inf."""
    return _weighted_lp(eta.values, eta.graph.edge_measure, p)


def antiderivative(eta: EdgeFunction, basepoint: int) -> VertexFunction:
    """Tree integral f(v) = integral of eta along the path basepoint -> v.

    The result satisfies gradient(f) = eta exactly and f(basepoint) = 0.
    """
    g = eta.graph
    basepoint = g.check_vertex(basepoint)
    # Integrate from the root in one sweep (parent edges point away from the
    # root), then shift; the gradient is basepoint-independent.
    increments = eta.values * g.edge_measure
    values = np.zeros(g.n_vertices)
    order = g.bfs_order[1:]
    values[order] = increments[g.parent_edge[order]]
    for v in order:  # parents precede children in BFS order
        values[v] += values[g.parent_vertex[v]]
    values -= values[basepoint]
    return VertexFunction(g, values)


def midpoint_average(f: VertexFunction) -> EdgeFunction:
    """Edge-midpoint average (f(tail) + f(head)) / 2, used by the product rule."""
    g = f.graph
    return EdgeFunction(g, 0.5 * (f.values[g.tails] + f.values[g.heads]))


def piecewise_affine_extend(f_coarse: VertexFunction,
                            fine: LevelGraph | int) -> VertexFunction:
    """Extend a level-n function to level m >= n, affinely along coarse edges.

    Values interpolate linearly (by arc length) along the fine path of
    every coarse edge; vertices on branches hanging off that path copy the
    value at their attachment point.  The Dirichlet energy is invariant
    under extension.
    """
    g_coarse = f_coarse.graph
    g_fine = build_level_graph(fine) if isinstance(fine, int) else fine
    if g_fine.level < g_coarse.level:
        raise LevelMismatchError(
            f"target level {g_fine.level} below source level {g_coarse.level}")
    if g_fine.level == g_coarse.level:
        return VertexFunction(g_fine, f_coarse.values.copy())

    emb = embed_coarse_vertices(g_fine, g_coarse.level, g_coarse)
    density = gradient(f_coarse).values  # per-unit-length slope, scale free
    eta = np.zeros(g_fine.n_edges)
    for eid, (t, h) in enumerate(g_coarse.edges):
        for fine_eid, sign in geodesic_path(g_fine, int(emb[t]), int(emb[h])):
            eta[fine_eid] = sign * density[eid]
    out = antiderivative(EdgeFunction(g_fine, eta), int(emb[g_coarse.root]))
    out.values += f_coarse.values[g_coarse.root]
    return out


def cutoff_function(g: LevelGraph, n: int) -> VertexFunction:
    """Scale-n cutoff: 1 on the central level-(n+1) cell, 0 beyond the
    central level-n cell, affine on the four connecting spines.

    The gradient is supported on the annular edge set between the two
    central cells and has magnitude 3**(n+1) there.
    """
    if n < 0 or n + 1 > g.level:
        raise LevelMismatchError(
            f"cutoff scale {n} infeasible at level {g.level} (need 0 <= n <= level-1)")
    coarse = build_level_graph(n + 1)
    values = (np.max(np.abs(coarse.coords), axis=1) <= 1).astype(np.float64)
    out = piecewise_affine_extend(VertexFunction(coarse, values), g)
    # Values are integer multiples of 3**-(m-n-1); snap away path-sum roundoff
    # so the range is exactly [0, 1].
    steps = 3 ** (g.level - n - 1)
    out.values = np.round(out.values * steps) / steps
    return out


def vertex_function_to_csv(f: VertexFunction, fp: IO[str]) -> None:
    _function_to_csv(f.values, fp)


def edge_function_to_csv(eta: EdgeFunction, fp: IO[str]) -> None:
    _function_to_csv(eta.values, fp)


def _function_to_csv(values: np.ndarray, fp: IO[str]) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["id", "value"])
    for i, v in enumerate(values):
        writer.writerow([i, repr(float(v))])


def _function_from_csv(fp: IO[str], count: int) -> np.ndarray:
    reader = csv.reader(fp)
    header = next(reader)
    if header != ["id", "value"]:
        raise ValueError(f"expected header id,value, got {header}")
    values = np.full(count, np.nan)
    for row in reader:
        values[int(row[0])] = float(row[1])
    if np.any(np.isnan(values)):
        raise ValueError("CSV does not cover every id")
    return values


def vertex_function_from_csv(g: LevelGraph, fp: IO[str]) -> VertexFunction:
    return VertexFunction(g, _function_from_csv(fp, g.n_vertices))


def edge_function_from_csv(g: LevelGraph, fp: IO[str]) -> EdgeFunction:
    return EdgeFunction(g, _function_from_csv(fp, g.n_edges))
