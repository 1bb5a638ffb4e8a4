"""Reproducible test-function families for the inequality sweeps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import (
    EdgeFunction,
    VertexFunction,
    antiderivative,
    lp_vertex_norm,
    mu_inner,
    piecewise_affine_extend,
)
from .graph import CellAddress, LevelGraph, build_level_graph, cell_vertex_ids

KINDS = (
    "random-piecewise-affine",
    "eigenmode-combination",
    "cell-indicator-smoothed",
    "random-edge-antiderivative",
)


@dataclass(frozen=True)
class FunctionFamily:
    """Generator recipe; (kind, seed) fully determines every function."""

    kind: str
    seed: int
    count: int
    param: int = 1  # coarse level n or eigenmode count k, per kind

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}; expected one of {KINDS}")


def generate_family(family: FunctionFamily, g: LevelGraph, sd=None) -> list[VertexFunction]:
    """Materialize the family on g; eigenmode/smoothed kinds need sd."""
    rng = np.random.default_rng(family.seed)
    if family.kind == "random-piecewise-affine":
        n = min(family.param, g.level)
        coarse = build_level_graph(n)
        return [
            piecewise_affine_extend(
                VertexFunction(coarse, rng.uniform(-1.0, 1.0, coarse.n_vertices)), g)
            for _ in range(family.count)
        ]
    if family.kind == "random-edge-antiderivative":
        return [
            antiderivative(EdgeFunction(g, rng.standard_normal(g.n_edges)), g.root)
            for _ in range(family.count)
        ]
    if sd is None:
        raise ValueError(f"family kind {family.kind!r} requires a spectral decomposition")
    if family.kind == "eigenmode-combination":
        k = min(family.param, sd.n_modes - 1)
        out = []
        for _ in range(family.count):
            coef = rng.standard_normal(k)
            out.append(VertexFunction(g, sd.eigenfunctions[:, 1:k + 1] @ coef))
        return out
    # cell-indicator-smoothed: P_{t0} applied to sub-cell indicators with
    # depths cycling 1..param, so the family spans concentration scales
    # down to single cells of the finest level.
    from .spectral import heat_apply
    t0 = 15.0 ** (-g.level)
    max_depth = max(1, min(family.param, g.level))
    out = []
    for i in range(family.count):
        depth = 1 + (i % max_depth)
        word = tuple(int(x) for x in rng.integers(1, 6, size=depth))
        indicator = np.zeros(g.n_vertices)
        indicator[cell_vertex_ids(g, CellAddress(word))] = 1.0
        out.append(heat_apply(sd, t0, VertexFunction(g, indicator)))
    return out


def center_mean_zero(functions: list[VertexFunction]) -> list[VertexFunction]:
    """Subtract the mu-mean from every function (compact-space surrogate)."""
    out = []
    for f in functions:
        ones = VertexFunction(f.graph, np.ones(f.graph.n_vertices))
        out.append(VertexFunction(f.graph, f.values - mu_inner(f, ones)))
    return out


def reject_constants(functions: list[VertexFunction], tol: float = 1e-14) -> None:
    for i, f in enumerate(functions):
        if np.ptp(f.values) <= tol * max(1.0, lp_vertex_norm(f, np.inf)):
            raise ValueError(f"family member {i} is constant (zero gradient denominator)")
