"""Command-line entry point.

Every subcommand reads its parameters from flags, optionally layered over a
JSON config file (``--config``).  Runs that write results also write
``manifest.json`` next to them; passing that manifest back as ``--config``
repeats the run exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import experiments as ex
from .codes import CodeError, CssCode, build_bb_code, build_toric_code, load_bb_spec, load_code, named_code, validate
from .foliation import build_decoding_problem, foliate, resource_inventory

OUTPUT_ENV = "FUSIONQLDPC_OUTPUT"
COMMANDS = (
    "validate-code", "inventory", "sample-one", "sweep", "pseudo-threshold", "rus-curve", "grid", "verify-oracle",
)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    code: str | None = None
    L: int | None = None
    bb_spec: str | None = None
    code_file: str | None = None
    codes: list[str] = field(default_factory=list)
    T: int | None = None
    p_e: float = 0.0
    p_l: float = 0.0
    eta: float | None = None
    N: int | None = None
    strategy: str = "modified"
    criterion: str | None = None
    theta: list[float] = field(default_factory=lambda: [0.0])
    x_grid: list[float] = field(default_factory=lambda: [i / 10 for i in range(11)])
    p_e_grid: list[float] = field(default_factory=list)
    p_l_grid: list[float] = field(default_factory=list)
    axis: str = "error-only"
    N_range: list[int] = field(default_factory=lambda: [8])
    loss_range: list[float] = field(default_factory=lambda: [0.005, 0.08])
    resolution: float = 0.05
    trials: int = ex.DESK_TRIALS
    seed: int = 0
    output: str | None = None
    plot: bool = False

    def check(self, command: str) -> None:
        sources = [s for s in (self.code, self.bb_spec, self.code_file) if s is not None]
        if len(sources) > 1:
            raise ConfigError("give exactly one of code, bb_spec, code_file")
        if command == "rus-curve":
            if not sources and not self.codes:
                raise ConfigError("rus-curve needs a code or a list of codes")
        elif not sources:
            raise ConfigError("no code given (code, bb_spec or code_file)")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.T is not None and self.T < 1:
            raise ConfigError("T must be at least 1")
        for name in ("p_e", "p_l"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.eta is not None and not 0.0 <= self.eta <= 1.0:
            raise ConfigError("eta must lie in [0, 1]")
        if self.N is not None and self.N < 1:
            raise ConfigError("N must be at least 1")
        if any(n < 1 for n in self.N_range):
            raise ConfigError("N_range entries must be at least 1")
        if self.strategy not in ("standard", "modified"):
            raise ConfigError("strategy must be standard or modified")
        if self.criterion is not None and self.criterion not in ex.FAILURE_CRITERIA:
            raise ConfigError(f"criterion must be one of {ex.FAILURE_CRITERIA}")
        if any(not 0.0 <= t <= math.pi / 2 + 1e-12 for t in self.theta):
            raise ConfigError("theta must lie in [0, pi/2]")
        if any(not 0.0 <= x <= 1.0 for x in self.x_grid):
            raise ConfigError("x_grid must lie in [0, 1]")
        if any(not 0.0 <= p <= 1.0 for p in self.p_e_grid + self.p_l_grid + self.loss_range):
            raise ConfigError("probabilities must lie in [0, 1]")
        if len(self.loss_range) != 2 or self.loss_range[0] >= self.loss_range[1]:
            raise ConfigError("loss_range must be [low, high] with low < high")
        if not 0.0 < self.resolution < 1.0:
            raise ConfigError("resolution must lie in (0, 1)")
        if command == "grid" and (not self.p_e_grid or not self.p_l_grid):
            raise ConfigError("grid needs p_e_grid and p_l_grid")
        try:
            ex.parse_axis(self.axis)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def resolve_code(name: str | None, L: int | None = None, bb_spec: str | None = None,
                 code_file: str | None = None) -> CssCode:
    if bb_spec is not None:
        return build_bb_code(load_bb_spec(bb_spec), name=Path(bb_spec).stem)
    if code_file is not None:
        return load_code(code_file)
    if name == "toric":
        if L is None:
            raise ConfigError("--code toric needs --L")
        return build_toric_code(L)
    return named_code(name)


def config_code(cfg: ExperimentConfig) -> CssCode:
    return resolve_code(cfg.code, cfg.L, cfg.bb_spec, cfg.code_file)


# --- argument parsing ----------------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(eval_number(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def eval_number(text: str) -> float:
    """A float, or ``pi`` optionally scaled as ``pi/2``, ``pi/4``..."""
    text = text.strip()
    if text.startswith("pi"):
        rest = text[2:]
        return math.pi / float(rest[1:]) if rest.startswith("/") else math.pi * (float(rest) if rest else 1.0)
    return float(text)


def _code_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("code")
    g.add_argument("--code", help="bb72, bb90, bb108, bb144, toric (with --L) or toric<L>")
    g.add_argument("--L", type=int, help="toric code size")
    g.add_argument("--bb-spec", help="JSON file with l, m, a_terms, b_terms")
    g.add_argument("--code-file", help="text file holding H_X and H_Z")
    g.add_argument("--T", type=int, help="measurement rounds (default: code distance)")


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=int)
    p.add_argument("--preset", choices=("desk", "full"), help="trials per point: 10^4 or 10^5")
    p.add_argument("--seed", type=int)
    p.add_argument("--criterion", choices=ex.FAILURE_CRITERIA)
    p.add_argument("--output", help=f"output directory (default ${OUTPUT_ENV} or ./results)")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--plot", action="store_true", default=None, help="also write SVG plots")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fusionqldpc", description="Fusion-based qLDPC simulations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-code", help="check commutation and print n, k, degrees")
    _code_flags(p)
    p.add_argument("--distance-effort", type=int, default=0, help="iterations of distance search")
    p.add_argument("--seed", type=int)

    p = sub.add_parser("inventory", help="count chains, GHZ states and fusions")
    _code_flags(p)

    p = sub.add_parser("sample-one", help="sample and decode one trial, print its record")
    _code_flags(p)
    p.add_argument("--p-e", type=float)
    p.add_argument("--p-l", type=float)
    p.add_argument("--eta", type=float, help="photon survival; switches to RUS noise")
    p.add_argument("--N", type=int)
    p.add_argument("--strategy", choices=("standard", "modified"))
    p.add_argument("--seed", type=int)
    p.add_argument("--log", action="store_true", help="include the per-fusion RUS log")
    p.add_argument("--debug", action="store_true", help="include decoder clusters and growth rounds")

    p = sub.add_parser("sweep", help="logical error rate along noise lines")
    _code_flags(p)
    _run_flags(p)
    p.add_argument("--theta", type=_floats, help="angles, e.g. 0,pi/4,pi/2")
    p.add_argument("--x-grid", type=_floats)

    p = sub.add_parser("pseudo-threshold", help="bisect for the break-even crossing")
    _code_flags(p)
    _run_flags(p)
    p.add_argument("--axis", help="error-only, erasure-only or an angle in radians")
    p.add_argument("--resolution", type=float)

    p = sub.add_parser("rus-curve", help="photon-loss (pseudo-)threshold versus N")
    _code_flags(p)
    _run_flags(p)
    p.add_argument("--codes", type=lambda s: [c for c in s.split(",") if c],
                   help="code family for a curve-crossing threshold, e.g. toric3,toric5,toric8")
    p.add_argument("--N-range", type=_ints)
    p.add_argument("--strategy", choices=("standard", "modified"))
    p.add_argument("--loss-range", type=_floats)
    p.add_argument("--resolution", type=float)

    p = sub.add_parser("grid", help="logical error rate on a (p_e, p_l) grid")
    _code_flags(p)
    _run_flags(p)
    p.add_argument("--p-e-grid", type=_floats)
    p.add_argument("--p-l-grid", type=_floats)

    p = sub.add_parser("verify-oracle", help="check the lattice against a stabilizer simulation")
    _code_flags(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--quick", action="store_true", help="skip the completeness check")

    for p in sub.choices.values():
        p.add_argument("--config", help="JSON config (or a manifest from an earlier run)")
    return parser


_FLAG_TO_FIELD = {
    "code": "code", "L": "L", "bb_spec": "bb_spec", "code_file": "code_file", "codes": "codes", "T": "T",
    "p_e": "p_e", "p_l": "p_l", "eta": "eta", "N": "N", "strategy": "strategy", "criterion": "criterion",
    "theta": "theta", "x_grid": "x_grid", "p_e_grid": "p_e_grid", "p_l_grid": "p_l_grid", "axis": "axis",
    "N_range": "N_range", "loss_range": "loss_range", "resolution": "resolution", "trials": "trials",
    "seed": "seed", "output": "output", "plot": "plot",
}


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    if "config" in data and "version" in data:
        data = data["config"]
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}")
    return data


def make_config(args: argparse.Namespace) -> ExperimentConfig:
    values = load_config(args.config)
    for flag, name in _FLAG_TO_FIELD.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    if getattr(args, "preset", None):
        values["trials"] = ex.DESK_TRIALS if args.preset == "desk" else ex.FULL_TRIALS
    try:
        cfg = ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    cfg.check(args.command)
    return cfg


# --- outputs -----------------------------------------------------------------------------


def output_dir(cfg: ExperimentConfig) -> Path:
    return Path(cfg.output or os.environ.get(OUTPUT_ENV) or "results")


def write_manifest(out: Path, command: str, cfg: ExperimentConfig, files: list[str]) -> None:
    record = {
        "command": command,
        "config": asdict(cfg),
        "seed": cfg.seed,
        "version": __version__,
        "outputs": files,
    }
    ex.write_json(record, out / "manifest.json")


def plot_csv(csv_path: Path, svg_path: Path, x_field: str, k: int | None) -> None:
    """p̄ against one noise column, with the break-even curve if k is known."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = ex.read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(5, 4))
    series: dict[str, list[dict]] = {}
    for r in rows:
        series.setdefault(f"{r['code']} {r['noise']}", []).append(r)
    for label, rs in series.items():
        xs = np.array([float(r[x_field]) for r in rs])
        ys = np.array([float(r["p_bar"]) for r in rs])
        lo = np.array([float(r["ci_low"]) for r in rs])
        hi = np.array([float(r["ci_high"]) for r in rs])
        ax.errorbar(xs, ys, yerr=[ys - lo, hi - ys], marker="o", ms=3, label=label)
        if k:
            pe = np.array([float(r["p_e"]) for r in rs])
            pl = np.array([float(r["p_l"]) for r in rs])
            ref = [ex.break_even(ex.combined_error_rate(a, b), k) for a, b in zip(pe, pl)]
            ax.plot(xs, ref, color="grey", lw=1)
    ax.set_xlabel(x_field)
    ax.set_ylabel("logical error rate")
    ax.set_yscale("log")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)


# --- commands --------------------------------------------------------------------------------


def cmd_validate(cfg: ExperimentConfig, args) -> int:
    code = config_code(cfg)
    report = validate(code)
    print(report.summary())
    print(f"qubit degree={code.qubit_degree} check degree={code.check_degree}")
    if args.distance_effort:
        from .codes import distance_upper_bound

        d = distance_upper_bound(code, args.distance_effort, cfg.seed, target=code.distance)
        print(f"distance <= {d}")
    return 0 if report.commutes else 1


def cmd_inventory(cfg: ExperimentConfig, args) -> int:
    code = config_code(cfg)
    lattice = foliate(code, cfg.T or code.distance or 1)
    print(resource_inventory(lattice).summary())
    return 0


def cmd_sample_one(cfg: ExperimentConfig, args) -> int:
    from .decoder import logical_flip, lost_logicals
    from .noise import sample_iid, sample_rus

    ctx = ex.context(config_code(cfg), cfg.T)
    rng = ex.trial_rng(cfg.seed, 0, 0)
    if cfg.eta is not None:
        tn = sample_rus(ctx.lattice, ctx.problem, cfg.eta, cfg.N or 1, cfg.strategy, rng)
    else:
        tn = sample_iid(ctx.problem, cfg.p_e, cfg.p_l, rng)
    syndrome = ctx.problem.syndrome(tn.error)
    corr = ctx.decoder.decode(syndrome, tn.erasures)
    record = {
        "code": ctx.name,
        "T": ctx.T,
        "seed": cfg.seed,
        "n_errors": int(tn.error.sum()),
        "n_erasures": int(tn.erasures.size),
        "syndrome_weight": int(syndrome.sum()),
        "correction_weight": int(corr.sum()),
        "flipped": np.flatnonzero(logical_flip(ctx.problem, corr, tn.error)).tolist(),
        "lost": sorted(lost_logicals(ctx.problem, tn.erasures)),
    }
    if args.debug:
        record["growth_rounds"] = ctx.decoder.last_rounds
        record["clusters"] = [
            {"detectors": sorted(cl.checks), "classes": sorted(cl.variables), "valid": bool(cl.valid)}
            for cl in ctx.decoder.last_clusters
        ]
    if args.log and tn.rus_log is not None:
        record["rus"] = [asdict(o) for o in tn.rus_log]
    print(json.dumps(record, indent=2))
    return 0


def _finish_points(cfg, points, out: Path, stem: str, x_field: str, k: int | None) -> list[str]:
    csv_path = out / f"{stem}.csv"
    ex.write_csv(points, csv_path)
    files = [csv_path.name]
    if cfg.plot:
        svg = out / f"{stem}.svg"
        plot_csv(csv_path, svg, x_field, k)
        files.append(svg.name)
    return files


def cmd_sweep(cfg: ExperimentConfig, args) -> int:
    code = config_code(cfg)
    out = output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    points = []
    try:
        for i, theta in enumerate(cfg.theta):
            points += ex.sweep_line(code, cfg.T, theta, cfg.x_grid, cfg.trials, cfg.seed + i,
                                    cfg.criterion or "flip_or_lost", args.workers)
    except KeyboardInterrupt:
        ex.write_csv(points, out / "sweep.partial.csv")
        print(f"interrupted; {len(points)} points in {out / 'sweep.partial.csv'}", file=sys.stderr)
        return 130
    x_field = "p_l" if cfg.theta == [ex.AXES["erasure-only"]] else "p_e"
    files = _finish_points(cfg, points, out, "sweep", x_field, ex.context(code, cfg.T).k)
    write_manifest(out, "sweep", cfg, files)
    for p in points:
        print(f"p_e={p.p_e:.5g} p_l={p.p_l:.5g} p_bar={p.p_bar:.5g} ({p.failures}/{p.trials})")
    return 0


def cmd_grid(cfg: ExperimentConfig, args) -> int:
    code = config_code(cfg)
    out = output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    table = ex.grid_sweep(code, cfg.T, cfg.p_e_grid, cfg.p_l_grid, cfg.trials, cfg.seed,
                          cfg.criterion or "flip_or_lost", args.workers)
    points = [p for row in table for p in row]
    files = _finish_points(cfg, points, out, "grid", "p_l", None)
    write_manifest(out, "grid", cfg, files)
    for row in table:
        print(" ".join(f"{p.p_bar:.4f}" for p in row))
    return 0


def cmd_pseudo_threshold(cfg: ExperimentConfig, args) -> int:
    code = config_code(cfg)
    out = output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    try:
        res = ex.pseudo_threshold(code, cfg.T, cfg.axis, cfg.trials, cfg.seed, cfg.resolution,
                                  criterion=cfg.criterion or "flip_or_lost", workers=args.workers)
    except ex.NoCrossingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    ex.write_json(res.record(), out / "pseudo_threshold.json")
    ex.write_csv(res.points, out / "pseudo_threshold_points.csv")
    write_manifest(out, "pseudo-threshold", cfg, ["pseudo_threshold.json", "pseudo_threshold_points.csv"])
    print(json.dumps(res.record()))
    return 0


def cmd_rus_curve(cfg: ExperimentConfig, args) -> int:
    if cfg.codes:
        code = [resolve_code(c) for c in cfg.codes]
    else:
        code = config_code(cfg)
    out = output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    try:
        results = ex.rus_threshold_curve(
            code, cfg.T, cfg.N_range, cfg.trials, cfg.seed, strategy=cfg.strategy,
            criterion=cfg.criterion or "lost", workers=args.workers,
            loss_range=tuple(cfg.loss_range), resolution=cfg.resolution,
        )
    except ex.NoCrossingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    records = [r.record() for r in results]
    ex.write_json(records, out / "rus_curve.json")
    ex.write_csv([p for r in results for p in r.points], out / "rus_curve_points.csv")
    write_manifest(out, "rus-curve", cfg, ["rus_curve.json", "rus_curve_points.csv"])
    for r in records:
        print(json.dumps(r))
    return 0


def cmd_verify_oracle(cfg: ExperimentConfig, args) -> int:
    from .oracle import verify_incidence

    code = config_code(cfg)
    lattice = foliate(code, cfg.T or code.distance or 2)
    problem = build_decoding_problem(lattice)
    report = verify_incidence(lattice, problem, seeds=(cfg.seed, cfg.seed + 1), completeness=not args.quick)
    print(report.summary())
    return 0 if report.passed else 1


HANDLERS = {
    "validate-code": cmd_validate,
    "inventory": cmd_inventory,
    "sample-one": cmd_sample_one,
    "sweep": cmd_sweep,
    "pseudo-threshold": cmd_pseudo_threshold,
    "rus-curve": cmd_rus_curve,
    "grid": cmd_grid,
    "verify-oracle": cmd_verify_oracle,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        return HANDLERS[args.command](cfg, args)
    except (ConfigError, CodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
