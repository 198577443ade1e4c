"""Command line driver: config parsing, presets and the batch subcommands.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
import tomli

from . import __version__
from .analysis import (
    Problem,
    error_norms,
    evaluate_points,
    space_convergence,
    superconvergence_study,
    time_convergence,
)
from .assembly import DofClass, MeshSpec
from .geometry import PRESETS as PARTITION_PRESETS
from .geometry import GeometryError, build_partition
from .mortar import MultiplierSpace, TraceSpace, mortar_project
from .report import ReportRow, fit_slope, loglog_svg, write_csv, write_json
from .solvers import TimeStepper, backward_euler_run, initial_data

log = logging.getLogger("mortarfem")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProjectDemo:
    breakpoints: tuple[float, ...] = (0.0, 0.5, 1.0)
    degree: int = 1
    function: str = "x*(1 - x)"


@dataclass(frozen=True)
class RunConfig:
    partition: Union[str, tuple] = "lshape"
    degrees: tuple[int, ...] = (1, 1, 1)
    alphas: tuple[float, ...] = (1.0, 10.0, 10.0)
    cell_offsets: tuple[int, ...] = (0, 2, 0)
    meshes: Optional[tuple[MeshSpec, ...]] = None
    mortar: dict = field(default_factory=dict)
    solution: str = "lshape-poly"
    T: float = 1.0
    r: Optional[float] = None
    r_rule: Optional[str] = "h^2"
    initial_data: str = "interpolant"
    consistency_flux: bool = True
    n: int = 6
    n_list: tuple[int, ...] = (6, 8, 10, 12, 14)
    s: int = 1
    time_n: int = 16
    time_r: tuple[float, ...] = (1 / 10, 1 / 20, 1 / 40, 1 / 80, 1 / 160)
    project: ProjectDemo = ProjectDemo()
    preset: Optional[str] = None
    source: str = "defaults"

    @property
    def n_subdomains(self) -> int:
        if isinstance(self.partition, str):
            return len(PARTITION_PRESETS[self.partition])
        return len(self.partition)

    def problem(self) -> Problem:
        return Problem(
            partition=self.partition,
            degree=self.degrees,
            alphas=self.alphas,
            solution=self.solution,
            cell_offsets=self.cell_offsets,
            consistency_flux=self.consistency_flux,
            mortar_rule=dict(self.mortar) or None,
            meshes=self.meshes,
        )

    def time_step(self, h: float) -> float:
        if self.r is not None:
            return self.r
        if self.r_rule in ("h^2", "h2"):
            return h * h
        if self.r_rule in ("h", "h^1"):
            return h
        raise ConfigError(f"r_rule: unknown rule {self.r_rule!r}; use 'h^2' or 'h'")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["mortar"] = {str(k): v for k, v in self.mortar.items()}
        return d

    def digest(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


PRESETS: dict[str, dict[str, Any]] = {
    # L-shape, 3 nonmatching subdomains, Q1, alpha jump, r = h^2
    "table1": dict(
        partition="lshape",
        degree=1,
        alpha=[1.0, 10.0, 10.0],
        cell_offsets=[0, 2, 0],
        solution="lshape-poly",
        consistency_flux=True,
        r="h^2",
        T=1.0,
        n=6,
        n_list=[6, 8, 10, 12, 14],
    ),
    "smooth-k2": dict(
        partition="unit-square-2x1",
        degree=2,
        alpha=[1.0, 1.0],
        cell_offsets=[0, 2],
        solution="smooth",
        consistency_flux=False,
        r="h^2",
        T=1.0,
        n=8,
        n_list=[4, 8, 12, 16, 24],
        s=1,
        time_n=16,
        time_r=[1 / 10, 1 / 20, 1 / 40, 1 / 80, 1 / 160],
    ),
    # identical meshes on both sides of the interface
    "matching": dict(
        partition="unit-square-2x1",
        degree=2,
        alpha=[1.0, 1.0],
        cell_offsets=[0, 0],
        solution="smooth",
        consistency_flux=False,
        r=0.05,
        T=0.5,
        n=8,
        n_list=[4, 8],
    ),
    "patch": dict(
        partition="unit-square-2x1",
        degree=2,
        alpha=[1.0, 1.0],
        cell_offsets=[0, 1],
        solution="patch",
        consistency_flux=False,
        r=0.1,
        T=1.0,
        n=4,
        n_list=[4, 6],
    ),
    "zero": dict(
        partition="lshape",
        degree=1,
        alpha=[1.0, 10.0, 10.0],
        cell_offsets=[0, 2, 0],
        solution="zero",
        consistency_flux=False,
        r=0.1,
        T=1.0,
        n=4,
        n_list=[4, 6],
    ),
}

_TOP_KEYS = {
    "preset", "partition", "degree", "alpha", "cell_offsets", "solution", "T", "r", "initial_data",
    "consistency_flux", "n", "n_list", "s", "time_n", "time_r", "mortar", "subdomain", "project",
}
_SUB_KEYS = {"rect", "nx", "ny", "degree", "alpha", "offset"}


def _num(d: dict, key: str, kind=float, positive=True):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {v!r}")
    v = kind(v)
    if kind is int and v != d[key]:
        raise ConfigError(f"{key}: expected an integer, got {d[key]!r}")
    if positive and not v > 0:
        raise ConfigError(f"{key}: must be positive, got {v!r}")
    return v


def _list(d: dict, key: str, kind=float) -> tuple:
    v = d[key]
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{key}: expected a non-empty list, got {v!r}")
    return tuple(_num({key: x}, key, kind) for x in v)


def config_from_dict(raw: dict, source: str = "dict") -> RunConfig:
    """Validate a parsed config table; unknown keys and bad values raise ConfigError."""
    raw = dict(raw)
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(sorted(unknown))}")
    preset = raw.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"preset: unknown preset {preset!r}; known: {sorted(PRESETS)}")
        merged = dict(PRESETS[preset])
        merged.update(raw)
        raw = merged

    part = raw.get("partition", "lshape")
    subs = raw.get("subdomain", [])
    if not isinstance(subs, list):
        raise ConfigError("subdomain: expected an array of tables ([[subdomain]])")
    for j, sd in enumerate(subs):
        bad = set(sd) - _SUB_KEYS
        if bad:
            raise ConfigError(f"subdomain[{j}]: unknown key(s) {', '.join(sorted(bad))}")
    if subs and all("rect" in sd for sd in subs):
        rects = []
        for j, sd in enumerate(subs):
            rc = sd["rect"]
            if not (isinstance(rc, list) and len(rc) == 4):
                raise ConfigError(f"subdomain[{j}].rect: expected [x0, x1, y0, y1]")
            rects.append(tuple(float(v) for v in rc))
        part = tuple(rects)
    elif any("rect" in sd for sd in subs):
        raise ConfigError("subdomain: either every block or no block gives rect")
    if isinstance(part, str):
        if part not in PARTITION_PRESETS:
            raise ConfigError(f"partition: unknown preset {part!r}; known: {sorted(PARTITION_PRESETS)}")
        n_sub = len(PARTITION_PRESETS[part])
    else:
        n_sub = len(part)
    try:
        build_partition(part) if isinstance(part, str) else build_partition(rectangles=part)
    except GeometryError as exc:
        raise ConfigError(f"partition: {exc}") from exc
    if subs and len(subs) != n_sub:
        raise ConfigError(f"subdomain: {len(subs)} blocks given for {n_sub} subdomains")

    def per_sub(key, sub_key, kind, default):
        if key in raw:
            v = raw[key]
            vals = list(_list(raw, key, kind)) if isinstance(v, list) else [_num(raw, key, kind)] * n_sub
        else:
            vals = [default] * n_sub
        for j, sd in enumerate(subs):
            if sub_key in sd:
                vals[j] = _num(sd, sub_key, kind, positive=(sub_key != "offset"))
        return vals

    degrees = per_sub("degree", "degree", int, 1)
    alphas = per_sub("alpha", "alpha", float, 1.0)
    if len(alphas) != n_sub:
        raise ConfigError(f"alpha: {len(alphas)} values given for {n_sub} subdomains")
    if len(degrees) != n_sub:
        raise ConfigError(f"degree: {len(degrees)} values given for {n_sub} subdomains")
    if "cell_offsets" in raw:
        offs = raw["cell_offsets"]
        if not isinstance(offs, list) or any(isinstance(o, bool) or not isinstance(o, int) or o < 0 for o in offs):
            raise ConfigError(f"cell_offsets: expected a list of non-negative integers, got {offs!r}")
        offsets = list(offs) + [0] * max(0, n_sub - len(offs))
    else:
        offsets = [0] * n_sub
    for j, sd in enumerate(subs):
        if "offset" in sd:
            offsets[j] = int(sd["offset"])

    meshes = None
    has_n = ["nx" in sd or "ny" in sd for sd in subs]
    if any(has_n):
        if not all("nx" in sd and "ny" in sd for sd in subs):
            raise ConfigError("subdomain: nx and ny must be given for every subdomain or none")
        meshes = tuple(
            MeshSpec(_num(sd, "nx", int), _num(sd, "ny", int), degrees[j]) for j, sd in enumerate(subs)
        )

    mortar = {}
    for k, v in raw.get("mortar", {}).items():
        try:
            g = int(k)
        except ValueError:
            raise ConfigError(f"mortar: interface ids must be integers, got {k!r}") from None
        if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < n_sub:
            raise ConfigError(f"mortar.{k}: expected a subdomain index in [0, {n_sub}), got {v!r}")
        mortar[g] = v

    kw: dict[str, Any] = dict(
        partition=part,
        degrees=tuple(degrees),
        alphas=tuple(alphas),
        cell_offsets=tuple(offsets),
        meshes=meshes,
        mortar=mortar,
        preset=preset,
        source=source,
    )
    if "solution" in raw:
        from .analysis import SOLUTION_PRESETS

        if raw["solution"] not in SOLUTION_PRESETS:
            raise ConfigError(f"solution: unknown {raw['solution']!r}; known: {sorted(SOLUTION_PRESETS)}")
        kw["solution"] = raw["solution"]
    if "T" in raw:
        kw["T"] = _num(raw, "T")
    if "r" in raw:
        if isinstance(raw["r"], str):
            if raw["r"] not in ("h^2", "h2", "h", "h^1"):
                raise ConfigError(f"r: expected a positive number or 'h^2', got {raw['r']!r}")
            kw["r"], kw["r_rule"] = None, raw["r"]
        else:
            kw["r"], kw["r_rule"] = _num(raw, "r"), None
    if "initial_data" in raw:
        if raw["initial_data"] not in ("interpolant", "elliptic_projection"):
            raise ConfigError(f"initial_data: expected 'interpolant' or 'elliptic_projection', got {raw['initial_data']!r}")
        kw["initial_data"] = raw["initial_data"]
    if "consistency_flux" in raw:
        if not isinstance(raw["consistency_flux"], bool):
            raise ConfigError("consistency_flux: expected true or false")
        kw["consistency_flux"] = raw["consistency_flux"]
    if "n" in raw:
        kw["n"] = _num(raw, "n", int)
    if "n_list" in raw:
        kw["n_list"] = _list(raw, "n_list", int)
    if "s" in raw:
        s = raw["s"]
        if s not in (0, 1, 2) or isinstance(s, bool):
            raise ConfigError(f"s: expected 0, 1 or 2, got {s!r}")
        kw["s"] = int(s)
    if "time_n" in raw:
        kw["time_n"] = _num(raw, "time_n", int)
    if "time_r" in raw:
        kw["time_r"] = _list(raw, "time_r", float)
    if "project" in raw:
        pj = raw["project"]
        bad = set(pj) - {"breakpoints", "intervals", "degree", "function"}
        if bad:
            raise ConfigError(f"project: unknown key(s) {', '.join(sorted(bad))}")
        demo = ProjectDemo()
        if "intervals" in pj:
            m = _num(pj, "intervals", int)
            demo = replace(demo, breakpoints=tuple(np.linspace(0.0, 1.0, m + 1).tolist()))
        if "breakpoints" in pj:
            bp = tuple(float(b) for b in pj["breakpoints"])
            if len(bp) < 2 or any(b1 <= b0 for b0, b1 in zip(bp, bp[1:])):
                raise ConfigError("project.breakpoints: expected a strictly increasing list")
            demo = replace(demo, breakpoints=bp)
        if "degree" in pj:
            demo = replace(demo, degree=_num(pj, "degree", int))
        if "function" in pj:
            demo = replace(demo, function=str(pj["function"]))
        kw["project"] = demo
    return RunConfig(**kw)


def parse_config(path: Union[str, Path]) -> RunConfig:
    """Read a TOML run configuration (grammar in the README)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from exc
    return config_from_dict(raw, source=str(path))


def load_config(config: Optional[str], preset: Optional[str]) -> RunConfig:
    if config is None and preset is None:
        raise ConfigError("give --config or --preset")
    if config is None:
        return config_from_dict({"preset": preset}, source=f"preset:{preset}")
    cfg = parse_config(config)
    if preset is not None and cfg.preset is None:
        raw = tomli.loads(Path(config).read_text(encoding="utf-8"))
        raw["preset"] = preset
        cfg = config_from_dict(raw, source=str(config))
    return cfg


# -- subcommands ---------------------------------------------------------------


def _metadata(cfg: RunConfig, command: str, extra: Optional[dict] = None) -> dict:
    meta = {
        "command": command,
        "version": __version__,
        "config_sha256": cfg.digest(),
        "config": cfg.as_dict(),
        "preset": cfg.preset,
        "source": cfg.source,
        "final_time": cfg.T,
    }
    if extra:
        meta.update(extra)
    return meta


def cmd_solve(cfg: RunConfig, out: Path, sample: int = 41) -> dict:
    """Backward Euler run at h = 1/n; writes solution.csv, summary.json, metadata.json."""
    problem = cfg.problem()
    system = problem.system(cfg.n)
    exact = problem.exact()
    r = cfg.time_step(1.0 / cfg.n)
    N = int(round(cfg.T / r))
    if N < 1 or abs(N * r - cfg.T) > 1e-9 * cfg.T:
        raise ConfigError(f"T={cfg.T} is not an integer multiple of r={r}")
    flux = exact.flux() if cfg.consistency_flux else None
    sources = exact.sources()
    u0 = initial_data(system, exact.u0, cfg.initial_data, grad_u0=exact.grad)
    stepper = TimeStepper.for_system(system, r)
    uN = backward_euler_run(stepper, lambda t: system.load(sources, t, flux), u0, N, keep="ends")[-1]
    l2, hx = error_norms(system, uN, exact, N * r)

    part = system.partition
    x0 = min(s.x0 for s in part.subdomains)
    x1 = max(s.x1 for s in part.subdomains)
    y0 = min(s.y0 for s in part.subdomains)
    y1 = max(s.y1 for s in part.subdomains)
    X, Y = np.meshgrid(np.linspace(x0, x1, sample), np.linspace(y0, y1, sample))
    vals = evaluate_points(system, uN, X.ravel(), Y.ravel())
    inside = ~np.isnan(vals)
    lines = ["x,y,value"]
    for a, b, v in zip(X.ravel()[inside], Y.ravel()[inside], vals[inside]):
        lines.append(f"{a:.17g},{b:.17g},{v:.17g}")
    out.mkdir(parents=True, exist_ok=True)
    (out / "solution.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    dm = system.dofmap
    summary = {
        "h": 1.0 / cfg.n,
        "r": r,
        "steps": N,
        "final_time": N * r,
        "dofs_full": dm.n_total,
        "dofs_constrained": dm.n_reduced,
        "dofs_by_class": {c.name.lower(): int(np.count_nonzero(dm.classes == c)) for c in DofClass},
        "error_l2": l2,
        "error_x": hx,
        "max_abs_solution": float(np.max(np.abs(system.prolong(uN)))) if dm.n_total else 0.0,
        "interfaces": [
            {
                "gamma_id": g.gamma_id,
                "mortar": g.mortar_side,
                "nonmortar": g.nonmortar_side,
                "mortar_intervals": len(g.mortar_trace_mesh) - 1,
                "nonmortar_intervals": len(g.nonmortar_trace_mesh) - 1,
            }
            for g in system.interfaces
        ],
    }
    write_json(out / "summary.json", summary)
    write_json(out / "metadata.json", _metadata(cfg, "solve"))
    return summary


def _emit_table(out: Path, stem: str, records, cfg: RunConfig, command: str, xkey: str, series_keys, title: str):
    out.mkdir(parents=True, exist_ok=True)
    rows = [ReportRow.from_record(r) for r in records]
    write_csv(out / f"{stem}.csv", rows)
    series = {}
    for label, key in series_keys:
        ys = [getattr(r, key) for r in records]
        if all(np.isfinite(ys)) and all(y > 0 for y in ys):
            series[label] = ([getattr(r, xkey) for r in records], ys)
    (out / f"{stem}.svg").write_text(loglog_svg(series, xkey, title), encoding="utf-8")
    slopes = {label: fit_slope(*xy) for label, xy in series.items()}
    write_json(out / "metadata.json", _metadata(cfg, command, {"fitted_slopes": slopes}))
    return rows


def cmd_convergence(cfg: RunConfig, out: Path, threads: int = 1):
    if len(set(cfg.n_list)) < 2:
        raise ConfigError("need >= 2 resolutions in n_list")
    recs = space_convergence(cfg.problem(), cfg.n_list, cfg.time_step, cfg.T, cfg.initial_data, threads)
    return _emit_table(
        out, "convergence", recs, cfg, "convergence", "h",
        [("L2", "error_l2"), ("broken H1", "error_x")], "Error vs mesh size",
    )


def cmd_time_convergence(cfg: RunConfig, out: Path, threads: int = 1):
    if len(set(cfg.time_r)) < 2:
        raise ConfigError("need >= 2 resolutions in time_r")
    recs = time_convergence(cfg.problem(), cfg.time_n, cfg.time_r, cfg.T, cfg.initial_data, threads)
    return _emit_table(
        out, "time_convergence", recs, cfg, "time-convergence", "r", [("L2", "error_l2")], "Error vs time step"
    )


def cmd_negative_norm(cfg: RunConfig, out: Path, threads: int = 1):
    if len(set(cfg.n_list)) < 2:
        raise ConfigError("need >= 2 resolutions in n_list")
    recs = superconvergence_study(cfg.problem(), cfg.n_list, s=cfg.s, threads=threads)
    return _emit_table(
        out, "negative_norm", recs, cfg, "negative-norm", "h",
        [("L2", "error_l2"), (f"|e|_-{cfg.s},hk", "error_neg")], "Discrete negative seminorm of the error",
    )


def cmd_project(cfg: RunConfig, out: Path, seed: int = 0) -> dict:
    """Mortar projection of one function on a single interface [0, 1]."""
    from .analysis import _lambdify
    import sympy

    demo = cfg.project
    trace = TraceSpace(np.asarray(demo.breakpoints), demo.degree)
    mult = MultiplierSpace(trace)
    expr = sympy.sympify(demo.function, locals={"x": sympy.Symbol("x", real=True)})
    fn = sympy.lambdify(sympy.Symbol("x", real=True), expr, "numpy")

    def v(s):
        return np.asarray(fn(s), dtype=float) * np.ones_like(s)

    coeffs = mortar_project(trace, v, order=demo.degree + 6)
    # idempotence probe on a random element of the interior trace space
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(trace.dim - 2)
    full = np.concatenate(([0.0], w, [0.0]))
    again = mortar_project(trace, lambda s: full @ trace.eval(s), order=demo.degree + 4)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["node,coefficient"]
    for x, c in zip(trace.nodes[1:-1], coeffs):
        lines.append(f"{x:.17g},{c:.17g}")
    (out / "projection.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    result = {
        "breakpoints": list(demo.breakpoints),
        "degree": demo.degree,
        "function": demo.function,
        "multiplier_dim": mult.dim,
        "coefficients": coeffs.tolist(),
        "idempotence_error": float(np.max(np.abs(again - w))),
        "seed": seed,
    }
    write_json(out / "projection.json", result)
    write_json(out / "metadata.json", _metadata(cfg, "project"))
    return result


COMMANDS = {
    "solve": "backward Euler run on one mesh, writes solution samples and a summary",
    "convergence": "space convergence table (h sweep with r tied to h)",
    "time-convergence": "time-step convergence on a fixed mesh",
    "negative-norm": "discrete negative seminorm superconvergence study",
    "project": "mortar projection demo on a single interface",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mortarfem", description="Mortar FEM for parabolic problems on nonmatching grids.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="TOML run configuration")
        p.add_argument("--preset", choices=sorted(PRESETS), help="named experiment preset")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--threads", type=int, default=1, help="parallel resolutions in sweeps")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized probes")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        cfg = load_config(args.config, args.preset)
        if args.command == "solve":
            summary = cmd_solve(cfg, out)
            print(f"h={summary['h']:.6g} r={summary['r']:.6g} dofs={summary['dofs_constrained']} "
                  f"L2 error={summary['error_l2']:.6e} broken H1 error={summary['error_x']:.6e}")
        elif args.command == "convergence":
            _print_rows(cmd_convergence(cfg, out, args.threads))
        elif args.command == "time-convergence":
            _print_rows(cmd_time_convergence(cfg, out, args.threads))
        elif args.command == "negative-norm":
            _print_rows(cmd_negative_norm(cfg, out, args.threads))
        elif args.command == "project":
            res = cmd_project(cfg, out, args.seed)
            print("coefficients:", " ".join(f"{c:.12g}" for c in res["coefficients"]))
    except (ConfigError, GeometryError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"outputs written to {out}/")
    return EXIT_OK


def _print_rows(rows):
    print(f"{'h':>10} {'r':>10} {'L2 error':>12} {'p':>8} {'q':>8} {'neg':>12} {'p_neg':>8}")
    for r in rows:
        print(f"{r.h:10.5f} {r.r:10.5f} {r.error_l2:12.5e} {r.p:8.4f} {r.q:8.4f} {r.error_neg:12.5e} {r.p_neg:8.4f}")


if __name__ == "__main__":
    sys.exit(main())
