"""Command-line entry point: build, eig, kernel, verify, report.

Exit-status policy: exact identity checks gate the status; statistical
fits emit warnings with their recorded tolerances; exploratory checks
never affect the status.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from . import harness
from . import spectral
from .errors import ConfigError, SolverError, VicsekError
from .families import FunctionFamily, generate_family
from .fitting import make_t_grid
from .graph import MAX_LEVEL, build_level_graph, geodesic_distance, graph_to_json
from .reports import (
    KIND_EXACT,
    consolidated_report,
    load_report,
    report_to_json,
    summary_table,
    write_check_csv,
)

SUITES = ("all", "kernel", "gradient", "sobolev", "hodge", "riesz")


@dataclass
class RunConfig:
    level: int = 4
    suites: tuple[str, ...] = ("all",)
    seed: int = 0
    t_grid: tuple[float, float, str, int] | None = None  # (min, max, spacing, count)
    c_sweep: tuple[float, ...] = (1.5, 2.0, 4.0)
    p_list: tuple[float, ...] = (1.0, 2.0, 4.0)
    cache_dir: str | None = None
    out_dir: str = "."

    def validate(self) -> "RunConfig":
        if not 0 <= self.level <= MAX_LEVEL:
            raise ConfigError(f"level must be in 0..{MAX_LEVEL}, got {self.level}")
        for s in self.suites:
            if s not in SUITES:
                raise ConfigError(f"unknown suite {s!r}; expected one of {SUITES}")
        if self.t_grid is not None and self.t_grid[0] <= 0:
            raise ConfigError(f"t-grid minimum must be positive, got {self.t_grid[0]}")
        if any(c <= 1 for c in self.c_sweep):
            raise ConfigError(f"c sweep values must exceed 1, got {self.c_sweep}")
        return self

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "suites": list(self.suites),
            "seed": self.seed,
            "t_grid": list(self.t_grid) if self.t_grid else None,
            "c_sweep": list(self.c_sweep),
            "p_list": list(self.p_list),
            "cache_dir": self.cache_dir,
            "out_dir": self.out_dir,
        }


def parse_t_grid(text: str) -> tuple[float, float, str, int]:
    """Parse 'A:B:log:N' (or :linear:) into (min, max, spacing, count)."""
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError(f"t-grid must be MIN:MAX:SPACING:COUNT, got {text!r}")
    try:
        lo, hi, spacing, count = float(parts[0]), float(parts[1]), parts[2], int(parts[3])
    except ValueError as exc:
        raise ConfigError(f"cannot parse t-grid {text!r}: {exc}") from exc
    if spacing not in ("log", "linear"):
        raise ConfigError(f"t-grid spacing must be log or linear, got {spacing!r}")
    if not (0 < lo < hi) or count < 2:
        raise ConfigError(f"t-grid needs 0 < MIN < MAX and COUNT >= 2, got {text!r}")
    return lo, hi, spacing, count


def parse_config_file(path: Path) -> dict:
    """Plain-text key = value configuration; '#' starts a comment."""
    values: dict[str, str] = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def config_from_sources(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        raw = parse_config_file(Path(args.config))
        if "level" in raw:
            cfg.level = int(raw["level"])
        if "suite" in raw:
            cfg.suites = tuple(raw["suite"].split(","))
        if "seed" in raw:
            cfg.seed = int(raw["seed"])
        if "t_grid" in raw:
            cfg.t_grid = parse_t_grid(raw["t_grid"])
        if "c_sweep" in raw:
            cfg.c_sweep = tuple(float(x) for x in raw["c_sweep"].split(","))
        if "p_list" in raw:
            cfg.p_list = tuple(float(x) for x in raw["p_list"].split(","))
        if "cache_dir" in raw:
            cfg.cache_dir = raw["cache_dir"]
        if "out_dir" in raw:
            cfg.out_dir = raw["out_dir"]
    # Flags override the file.
    if getattr(args, "level", None) is not None:
        cfg.level = args.level
    if getattr(args, "suite", None):
        cfg.suites = tuple(args.suite)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "t_grid", None):
        cfg.t_grid = parse_t_grid(args.t_grid)
    if getattr(args, "cache", None):
        cfg.cache_dir = args.cache
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    return cfg.validate()


def get_decomposition(g, cache_dir, quiet=False):
    """Load from cache when valid, else recompute (and store when caching)."""
    if cache_dir:
        sd = spectral.load_decomposition(g, cache_dir)
        if sd is not None:
            return sd
        if not quiet:
            print(f"cache miss for level {g.level}; recomputing", file=sys.stderr)
    sd = spectral.eigendecompose(g)
    if cache_dir:
        spectral.save_decomposition(sd, cache_dir)
    return sd


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------

def run_verification(cfg: RunConfig) -> tuple[list, dict]:
    """Execute the selected suites; returns (reports, solver metadata)."""
    g = build_level_graph(cfg.level)
    sd = get_decomposition(g, cfg.cache_dir)
    solver = {
        "solver_version": sd.solver_version,
        "residual_max": sd.residual_max,
        "ortho_defect": sd.orthonormality_defect(),
        "lambda_1": sd.spectral_gap,
        "lambda_max": float(sd.eigenvalues[-1]),
    }
    t_grid = None
    if cfg.t_grid is not None:
        lo, hi, spacing, count = cfg.t_grid
        t_grid = make_t_grid(lo, hi, count, spacing)

    suites = set(cfg.suites)
    if "all" in suites:
        suites = set(SUITES) - {"all"}

    family = generate_family(
        FunctionFamily("random-piecewise-affine", cfg.seed, 6, param=min(2, cfg.level)), g)
    family += generate_family(
        FunctionFamily("eigenmode-combination", cfg.seed + 1, 4, param=8), g, sd)
    # Smoothed deep-cell indicators concentrate at the lattice scale; the
    # L^q -> W^{1,p} bounds with q < p are saturated only by such functions.
    family_full = family + generate_family(
        FunctionFamily("cell-indicator-smoothed", cfg.seed + 2, 8, param=cfg.level), g, sd)
    family_full += generate_family(
        FunctionFamily("random-edge-antiderivative", cfg.seed + 3, 3), g)

    reports = list(_exact_suite(g, sd, family, cfg))

    if "kernel" in suites:
        reports.append(harness.check_ondiagonal(sd, t_grid=t_grid))
        reports.append(harness.check_offdiagonal(sd, t_grid=t_grid, seed=cfg.seed))
        reports.append(harness.check_weyl(sd))
        reports.append(spectral.eigenfunction_sup_check(sd))
    if "gradient" in suites:
        for c in cfg.c_sweep:
            reports.append(harness.check_gradient_bound(sd, g, t_grid=t_grid, c=c,
                                                        seed=cfg.seed))
        reports.append(harness.check_lipschitz(sd, t_grid=t_grid, seed=cfg.seed))
        for p in cfg.p_list:
            if p in (1, 2, 4):
                reports.append(harness.check_lp_gradient_integral(sd, g, g.root, p,
                                                                  t_grid=t_grid))
        reports.append(harness.check_weak_bakry_emery_median(sd, family[:4],
                                                             t_grid=t_grid, seed=cfg.seed))
    if "sobolev" in suites:
        for p in cfg.p_list:
            q_pairs = [(p, p)] + ([(p, 1.0)] if p > 1 else [])
            for pp, qq in q_pairs:
                reports.append(harness.check_semigroup_lq_lp(sd, family_full, pp, qq,
                                                             t_grid=t_grid))
            reports.append(harness.check_pseudo_poincare(sd, family_full, p, t_grid=t_grid))
        reports.append(harness.check_gradient_contraction(sd, family, t_grid=t_grid))
        reports.append(harness.check_heat_measure_poincare(sd, g, family, 2.0,
                                                           t_grid=t_grid, seed=cfg.seed))
        for p in cfg.p_list:
            if p > 1:
                reports.append(harness.check_nash(g, family, p))
        reports.append(harness.check_fractional(sd, family))
    if "hodge" in suites:
        off = next((r for r in reports if r.name == "offdiagonal_subgaussian"), None)
        c_exp = 0.5 * off.fits[0].slope if off else None
        reports.append(harness.check_hodge_kernel_bounds(sd, g, t_grid=t_grid,
                                                         c=c_exp, seed=cfg.seed))
    if "riesz" in suites:
        reports.append(harness.riesz_ratio_experiment(sd, family,
                                                      [p for p in cfg.p_list if p > 1]))
    return reports, solver


def _exact_suite(g, sd, family, cfg):
    """Hard-gate identities; always run regardless of the selected suites."""
    graphs = {cfg.level: g}
    yield harness.exact_laplacian_identity(g)
    yield harness.exact_intertwining(sd, n_functions=25, seed=cfg.seed)
    yield harness.exact_codifferential_poincare(g, n_functions=200, seed=cfg.seed)
    if cfg.level >= 2:
        yield harness.exact_energy_invariance(
            coarse_level=1, targets=tuple(range(2, cfg.level + 1)), seed=cfg.seed,
            graphs=graphs)
    yield harness.exact_kernel_identities(sd, seed=cfg.seed)
    yield harness.exact_riesz_p2(sd, family)


def write_outputs(cfg: RunConfig, reports, solver) -> Path:
    out_dir = Path(cfg.out_dir)
    if not out_dir.is_dir():
        raise ConfigError(f"output directory {out_dir} does not exist")
    doc = consolidated_report(cfg.to_dict(), __version__, solver, reports)
    report_path = out_dir / "report.json"
    report_path.write_text(report_to_json(doc), encoding="utf-8")
    for rep in reports:
        if rep.series:
            write_check_csv(out_dir / f"{rep.name}.csv", rep.series)
    (out_dir / "summary.txt").write_text(summary_table(reports) + "\n", encoding="utf-8")
    return report_path


def exit_status(reports) -> int:
    hard_failures = [r for r in reports if r.kind == KIND_EXACT and not r.passed]
    return 1 if hard_failures else 0


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_build(args) -> int:
    g = build_level_graph(args.level)
    out = Path(args.out)
    with open(out, "w", encoding="utf-8") as fp:
        graph_to_json(g, fp)
    print(f"level {g.level}: {g.n_vertices} vertices, {g.n_edges} edges -> {out}")
    return 0


def cmd_eig(args) -> int:
    g = build_level_graph(args.level)
    sd = get_decomposition(g, args.cache)
    print(f"level {g.level}: {sd.n_modes} modes, lambda_1 = {sd.spectral_gap:.6f}, "
          f"lambda_max = {sd.eigenvalues[-1]:.3f}, residual_max = {sd.residual_max:.2e}")
    if args.out:
        Path(args.out).write_text(spectral.eigenvalues_to_json(sd), encoding="utf-8")
        print(f"eigenvalues -> {args.out}")
    return 0


def cmd_kernel(args) -> int:
    g = build_level_graph(args.level)
    source = g.check_vertex(args.source)
    sd = get_decomposition(g, args.cache)
    col = spectral.heat_kernel_columns(sd, args.t, [source])[:, 0]
    dcol = spectral.heat_time_derivative(sd, args.t)[:, source]
    import csv as _csv
    with open(args.out, "w", encoding="utf-8", newline="") as fp:
        writer = _csv.writer(fp, lineterminator="\n")
        writer.writerow(["target_id", "distance", "p_t", "dpdt"])
        for v in range(g.n_vertices):
            writer.writerow([v, repr(geodesic_distance(g, source, v)),
                             repr(float(col[v])), repr(float(dcol[v]))])
    print(f"p_t(., {source}) at t = {args.t} -> {args.out}")
    return 0


def cmd_verify(args) -> int:
    cfg = config_from_sources(args)
    reports, solver = run_verification(cfg)
    report_path = write_outputs(cfg, reports, solver)
    print(summary_table(reports))
    print(f"report -> {report_path}")
    status = exit_status(reports)
    soft = [r for r in reports if r.kind == "statistical" and not r.passed]
    for r in soft:
        print(f"warning: statistical check {r.name} outside tolerance "
              f"{r.tolerance}", file=sys.stderr)
    return status


def cmd_report(args) -> int:
    doc = load_report(Path(args.dir) / "report.json")
    print(f"schema {doc['schema']}, code {doc['code_version']}, "
          f"level {doc['config']['level']}")
    for c in doc["checks"]:
        status = "PASS" if c["pass"] else ("info" if c["kind"] == "exploratory" else "FAIL")
        line = f"{status:<5} [{c['kind']:<11}] {c['check_name']}"
        if c["fits"]:
            line += f"  slope={c['fits'][0]['slope']:+.4f} r2={c['fits'][0]['r2']:.4f}"
        print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vicseklab",
        description="Vicsek-graph calculus, spectral heat kernels, and estimate verification")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a level graph and write JSON")
    b.add_argument("--level", type=int, required=True)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("eig", help="eigendecomposition (optionally cached)")
    e.add_argument("--level", type=int, required=True)
    e.add_argument("--cache", default=None)
    e.add_argument("--out", default=None, help="write eigenvalues JSON here")
    e.set_defaults(func=cmd_eig)

    k = sub.add_parser("kernel", help="heat kernel column from one source vertex")
    k.add_argument("--level", type=int, required=True)
    k.add_argument("--t", type=float, required=True)
    k.add_argument("--source", type=int, required=True)
    k.add_argument("--out", required=True)
    k.add_argument("--cache", default=None)
    k.set_defaults(func=cmd_kernel)

    v = sub.add_parser("verify", help="run verification suites and write reports")
    v.add_argument("--level", type=int, default=None)
    v.add_argument("--suite", action="append", choices=SUITES, default=None)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--t-grid", dest="t_grid", default=None, metavar="A:B:log:N")
    v.add_argument("--cache", default=None)
    v.add_argument("--out", default=None)
    v.add_argument("--config", default=None, help="key = value config file")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", help="print the summary of a written report")
    r.add_argument("--dir", required=True)
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    except VicsekError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
