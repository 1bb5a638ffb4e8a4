"""Numerical laboratory for discrete calculus and heat kernels on Vicsek graphs."""

from .calculus import (
    EdgeFunction,
    VertexFunction,
    antiderivative,
    codifferential,
    cutoff_function,
    energy,
    gradient,
    laplacian,
    lp_edge_norm,
    lp_vertex_norm,
    piecewise_affine_extend,
)
from .exponents import D_H, D_S, D_W, alpha, nash_theta
from .graph import (
    CellAddress,
    LevelGraph,
    ball_measure,
    build_level_graph,
    embed_coarse_vertices,
    geodesic_distance,
    geodesic_path,
)
from .spectral import (
    SpectralDecomposition,
    eigendecompose,
    fractional_apply,
    heat_apply,
    heat_kernel,
    hodge_apply,
    hodge_kernel,
)

__version__ = "0.1.0"
