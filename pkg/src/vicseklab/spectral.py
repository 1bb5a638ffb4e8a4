"""Eigendecomposition of the graph Laplacian and spectral semigroups.

The generator is -Lap = M**-1 L with L the energy (stiffness) matrix
(off-diagonal -3**m on edges) and M = diag(mu_m).  Because M is diagonal
positive, the generalized symmetric problem L u = lambda M u is solved
exactly through the whitening A = M**-1/2 L M**-1/2, which is symmetric
positive semidefinite.

All semigroup objects are spectral sums: the heat kernel

    p_t(x, y) = sum_j exp(-lambda_j t) Phi_j(x) Phi_j(y)

acts on functions through the mu_m-weighted product, so stochastic
completeness (rows mu-integrate to 1) is exact by mode orthogonality.
On a tree the edge modes dPhi_j / sqrt(lambda_j), j >= 1, form a complete
nu_m-orthonormal basis of edge space (edge count = vertex count - 1), so
the Hodge semigroup exp(t HodgeLap), HodgeLap = -d d*, has the exact kernel

    hodge_p_t(e, e') = sum_{j>=1} lambda_j**-1 exp(-lambda_j t) dPhi_j(e) dPhi_j(e').
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .calculus import EdgeFunction, VertexFunction
from .errors import GraphMismatchError, SizeCapError, SolverError
from .graph import LevelGraph

SOLVER_VERSION = "dense-eigh-1"
DENSE_CAP = 3000
EXPM_CAP = 600
CACHE_FORMAT_VERSION = 1

#: Residual gate: ||(-Lap) Phi_j - lambda_j Phi_j||_mu / lambda_j for j >= 1.
RESIDUAL_TOL = 1e-8


@dataclass
class SpectralDecomposition:
    """Eigenvalues 0 = lambda_0 < lambda_1 <= ... and mu-orthonormal eigenfunctions."""

    graph: LevelGraph
    eigenvalues: np.ndarray     # (N,) ascending, eigenvalues of -Lap
    eigenfunctions: np.ndarray  # (N, N), column j is Phi_j on vertices
    residuals: np.ndarray       # (N,) whitened eigen-residual 2-norms
    solver_version: str = SOLVER_VERSION
    _edge_modes: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def spectral_gap(self) -> float:
        return float(self.eigenvalues[1])

    def eigenfunction(self, j: int) -> VertexFunction:
        return VertexFunction(self.graph, self.eigenfunctions[:, j].copy())

    def edge_modes(self) -> np.ndarray:
        """Gradients dPhi_j of all eigenfunctions, shape (E, N); cached."""
        if self._edge_modes is None:
            g = self.graph
            scale = 3.0 ** g.level
            self._edge_modes = scale * (self.eigenfunctions[g.heads, :]
                                        - self.eigenfunctions[g.tails, :])
        return self._edge_modes

    @property
    def residual_max(self) -> float:
        lam = np.maximum(self.eigenvalues[1:], 1e-300)
        return float(np.max(self.residuals[1:] / lam)) if self.n_modes > 1 else 0.0

    def orthonormality_defect(self) -> float:
        """max |<Phi_i, Phi_j>_mu - delta_ij| (exact identity check)."""
        v = self.eigenfunctions * self.graph.vertex_measure[:, None]
        gram = self.eigenfunctions.T @ v
        return float(np.max(np.abs(gram - np.eye(self.n_modes))))


@dataclass
class HeatKernelMatrix:
    """Dense heat kernel p_t(x, y) with respect to mu_m."""

    graph: LevelGraph
    time: float
    values: np.ndarray  # (N, N)

    def row_integrals(self) -> np.ndarray:
        """sum_y p_t(x, y) mu(y); equals 1 for every x (stochastic completeness)."""
        return self.values @ self.graph.vertex_measure


@dataclass
class HodgeKernelMatrix:
    """Dense Hodge kernel on oriented edges with respect to nu_m."""

    graph: LevelGraph
    time: float
    values: np.ndarray  # (E, E)

    def row_abs_integrals(self) -> np.ndarray:
        """sum_e' |hodge_p_t(e, e')| nu(e')."""
        return self.graph.edge_measure * np.sum(np.abs(self.values), axis=1)


def whitened_matrix(g: LevelGraph) -> np.ndarray:
    """Dense symmetric M**-1/2 L M**-1/2."""
    n = g.n_vertices
    w = 3.0 ** g.level
    inv_sqrt = 1.0 / np.sqrt(g.vertex_measure)
    a = np.zeros((n, n))
    off = -w * inv_sqrt[g.tails] * inv_sqrt[g.heads]
    a[g.tails, g.heads] = off
    a[g.heads, g.tails] = off
    diag = np.zeros(n)
    np.add.at(diag, g.tails, w)
    np.add.at(diag, g.heads, w)
    a[np.arange(n), np.arange(n)] = diag / g.vertex_measure
    return a


def laplacian_matrix(g: LevelGraph) -> np.ndarray:
    """Dense matrix of -Lap = M**-1 L acting on vertex values."""
    mu = g.vertex_measure
    inv_sqrt = 1.0 / np.sqrt(mu)
    return whitened_matrix(g) * inv_sqrt[:, None] * np.sqrt(mu)[None, :]


def edge_laplacian_matrix(g: LevelGraph) -> np.ndarray:
    """Dense matrix of -HodgeLap = d d* acting on edge values."""
    n, e = g.n_vertices, g.n_edges
    b = np.zeros((e, n))
    b[np.arange(e), g.heads] = 1.0
    b[np.arange(e), g.tails] = -1.0
    return 3.0 ** g.level * (b / g.vertex_measure[None, :]) @ b.T


def eigendecompose(g: LevelGraph, dense_cap: int = DENSE_CAP) -> SpectralDecomposition:
    """Full dense decomposition of the generalized problem L Phi = lambda M Phi."""
    n = g.n_vertices
    if n > dense_cap:
        raise SizeCapError(
            f"{n} vertices exceed the dense-solver cap {dense_cap}; "
            f"precompute at a lower level or raise the cap")
    a = whitened_matrix(g)
    try:
        lam, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"dense eigensolver failed: {exc}") from exc

    residuals = np.linalg.norm(a @ v - v * lam[None, :], axis=0)

    if abs(lam[0]) > 1e-8 * max(lam[-1], 1.0):
        raise SolverError(f"ground eigenvalue {lam[0]} not numerically zero")
    lam = lam.copy()
    lam[0] = 0.0
    # The constant is the exact ground mode (mu is a probability measure).
    v = v.copy()
    v[:, 0] = np.sqrt(g.vertex_measure)
    # Deterministic sign: largest-magnitude component positive.
    picks = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[picks, np.arange(n)])
    signs[signs == 0] = 1.0
    v *= signs[None, :]

    phi = v / np.sqrt(g.vertex_measure)[:, None]
    sd = SpectralDecomposition(graph=g, eigenvalues=lam, eigenfunctions=phi,
                               residuals=residuals)
    if sd.residual_max > RESIDUAL_TOL:
        raise SolverError(f"eigen-residual {sd.residual_max:.3e} above {RESIDUAL_TOL}")
    return sd


def _check_time(t: float, *, positive: bool) -> float:
    t = float(t)
    if positive and t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    if not positive and t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    return t


def heat_kernel(sd: SpectralDecomposition, t: float) -> HeatKernelMatrix:
    t = _check_time(t, positive=True)
    phi = sd.eigenfunctions
    values = (phi * np.exp(-sd.eigenvalues * t)[None, :]) @ phi.T
    values = 0.5 * (values + values.T)  # enforce exact symmetry of the assembly
    return HeatKernelMatrix(sd.graph, t, values)


def heat_kernel_columns(sd: SpectralDecomposition, t: float, xs) -> np.ndarray:
    """Columns p_t(., x) for the listed source vertices, shape (N, len(xs))."""
    t = _check_time(t, positive=True)
    xs = np.atleast_1d(np.asarray(xs, dtype=np.int64))
    phi = sd.eigenfunctions
    return phi @ (np.exp(-sd.eigenvalues * t)[:, None] * phi[xs, :].T)


def heat_diagonal(sd: SpectralDecomposition, x: int, t_grid: np.ndarray) -> np.ndarray:
    """p_t(x, x) over a time grid."""
    weights = sd.eigenfunctions[sd.graph.check_vertex(x), :] ** 2
    return np.exp(-np.outer(np.asarray(t_grid), sd.eigenvalues)) @ weights


def heat_apply(sd: SpectralDecomposition, t: float, f: VertexFunction) -> VertexFunction:
    t = _check_time(t, positive=False)
    if t == 0.0:
        return f.copy()
    coef = sd.eigenfunctions.T @ (sd.graph.vertex_measure * f.values)
    out = sd.eigenfunctions @ (np.exp(-sd.eigenvalues * t) * coef)
    return VertexFunction(sd.graph, out)


def heat_time_derivative(sd: SpectralDecomposition, t: float) -> np.ndarray:
    """Matrix of d/dt p_t(x, y) = -sum_j lambda_j exp(-lambda_j t) Phi_j(x) Phi_j(y)."""
    t = _check_time(t, positive=True)
    phi = sd.eigenfunctions
    coef = -sd.eigenvalues * np.exp(-sd.eigenvalues * t)
    return (phi * coef[None, :]) @ phi.T


def hodge_kernel(sd: SpectralDecomposition, g: LevelGraph, t: float) -> HodgeKernelMatrix:
    _check_same_graph(sd, g)
    t = _check_time(t, positive=True)
    w = sd.edge_modes()[:, 1:]
    coef = np.exp(-sd.eigenvalues[1:] * t) / sd.eigenvalues[1:]
    values = (w * coef[None, :]) @ w.T
    values = 0.5 * (values + values.T)
    return HodgeKernelMatrix(g, t, values)


def hodge_kernel_rows(sd: SpectralDecomposition, t: float, edge_ids) -> np.ndarray:
    """Rows hodge_p_t(e, .) for the listed edges, shape (len(edge_ids), E)."""
    t = _check_time(t, positive=True)
    edge_ids = np.atleast_1d(np.asarray(edge_ids, dtype=np.int64))
    w = sd.edge_modes()[:, 1:]
    coef = np.exp(-sd.eigenvalues[1:] * t) / sd.eigenvalues[1:]
    return (w[edge_ids, :] * coef[None, :]) @ w.T


def hodge_apply(sd: SpectralDecomposition, g: LevelGraph, t: float,
                eta: EdgeFunction) -> EdgeFunction:
    _check_same_graph(sd, g)
    t = _check_time(t, positive=False)
    if t == 0.0:
        return eta.copy()
    w = sd.edge_modes()[:, 1:]
    # <eta, psi_j>_nu psi_j with psi_j = dPhi_j / sqrt(lambda_j).
    coef = g.edge_measure * (w.T @ eta.values) / sd.eigenvalues[1:]
    out = w @ (np.exp(-sd.eigenvalues[1:] * t) * coef)
    return EdgeFunction(g, out)


def fractional_apply(sd: SpectralDecomposition, s: float, f: VertexFunction) -> VertexFunction:
    """(-Lap)**s f, zero mode dropped (s = 0 returns f minus its mu-mean)."""
    s = float(s)
    if s < 0:
        raise ValueError(f"fractional power must be non-negative, got {s}")
    phi = sd.eigenfunctions[:, 1:]
    coef = phi.T @ (sd.graph.vertex_measure * f.values)
    out = phi @ (sd.eigenvalues[1:] ** s * coef)
    return VertexFunction(sd.graph, out)


def validity_window(sd: SpectralDecomposition) -> tuple[float, float]:
    """Spectral time window [10 / lambda_max, 0.1 / lambda_1] for regressions."""
    return 10.0 / float(sd.eigenvalues[-1]), 0.1 / sd.spectral_gap


def eigenfunction_sup_check(sd: SpectralDecomposition):
    """max_j ||Phi_j||_inf / lambda_j^{d_h/(2 d_w)} over j >= 1.

    Finiteness is the single-level statement; stability (<= 2x) across
    levels is asserted by the harness.
    """
    from .exponents import D_H, D_W
    from .reports import KIND_STATISTICAL, EstimateReport

    exponent = D_H / (2.0 * D_W)
    sup_norms = np.max(np.abs(sd.eigenfunctions[:, 1:]), axis=0)
    ratios = sup_norms / sd.eigenvalues[1:] ** exponent
    j = int(np.argmax(ratios)) + 1
    return EstimateReport(
        name="eigenfunction_sup_bound", level=sd.graph.level, kind=KIND_STATISTICAL,
        parameters={"exponent": exponent, "argmax_mode": j,
                    "lambda_argmax": float(sd.eigenvalues[j])},
        sup_ratio=float(np.max(ratios)), passed=bool(np.isfinite(np.max(ratios))),
        tolerance=2.0)


def matrix_exponential_oracle(a: np.ndarray, t: float, cap: int = EXPM_CAP) -> np.ndarray:
    """Scaling-and-squaring expm(t a); independent oracle for semigroup tests."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] > cap:
        raise SizeCapError(f"matrix size {a.shape[0]} exceeds the oracle cap {cap}")
    return scipy.linalg.expm(float(t) * a)


def _check_same_graph(sd: SpectralDecomposition, g: LevelGraph) -> None:
    if g is not sd.graph and g.level != sd.graph.level:
        raise GraphMismatchError(
            f"graph level {g.level} does not match decomposition level {sd.graph.level}")


# ---------------------------------------------------------------------------
# Disk cache
# ---------------------------------------------------------------------------

def _cache_path(cache_dir: Path, level: int) -> Path:
    return Path(cache_dir) / f"eig-m{level}-{SOLVER_VERSION}.npz"


def save_decomposition(sd: SpectralDecomposition, cache_dir) -> Path:
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "cache_format": CACHE_FORMAT_VERSION,
        "level": sd.graph.level,
        "n_vertices": sd.graph.n_vertices,
        "solver_version": sd.solver_version,
        "residual_max": sd.residual_max,
        "ortho_defect": sd.orthonormality_defect(),
    }
    path = _cache_path(cache_dir, sd.graph.level)
    np.savez(path, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
             eigenvalues=sd.eigenvalues, eigenfunctions=sd.eigenfunctions,
             residuals=sd.residuals)
    return path


def load_decomposition(g: LevelGraph, cache_dir) -> SpectralDecomposition | None:
    """Load a cached decomposition; None on any version/shape mismatch."""
    path = _cache_path(Path(cache_dir), g.level)
    if not path.exists():
        return None
    try:
        with np.load(path) as data:
            meta = json.loads(bytes(data["meta"]).decode())
            if (meta.get("cache_format") != CACHE_FORMAT_VERSION
                    or meta.get("level") != g.level
                    or meta.get("n_vertices") != g.n_vertices
                    or meta.get("solver_version") != SOLVER_VERSION):
                return None
            return SpectralDecomposition(
                graph=g,
                eigenvalues=data["eigenvalues"],
                eigenfunctions=data["eigenfunctions"],
                residuals=data["residuals"],
                solver_version=meta["solver_version"],
            )
    except (OSError, KeyError, ValueError, json.JSONDecodeError):
        return None


def eigenvalues_to_json(sd: SpectralDecomposition) -> str:
    doc = {
        "schema": 1,
        "level": sd.graph.level,
        "solver_version": sd.solver_version,
        "residual_max": sd.residual_max,
        "eigenvalues": [float(x) for x in sd.eigenvalues],
    }
    return json.dumps(doc, indent=1)
