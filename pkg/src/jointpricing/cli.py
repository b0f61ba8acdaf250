"""Command-line front end: ``jointpricing <command> [options]``.

Commands write delimited reports (and PNG figures unless ``--no-plots``) to
``--out`` and print a short summary on stdout. Settings can also come from a
``key = value`` file passed with ``--config``; command-line flags win.

Exit status: 0 on success, 1 for invalid input, 2 when a computation fails
on valid input (no convergence, degenerate data).
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path
from typing import Optional

import numpy as np

from . import empirical_screen as es
from . import market_model as mm
from . import mortality_sim as ms
from . import plotting
from .errors import ComputationError, JointPricingError, NoConvergence, ValidationError
from .pricing_core import (
    BusinessLine,
    LinePair,
    RiskSpec,
    competitiveness_region,
    joint_loading,
    monitoring_interval,
    reference_pair,
)

logger = logging.getLogger(__name__)

DATA_FILES = {
    "common": ("mortality_common_a.csv", "mortality_common_b.csv"),
    "lowvol": ("mortality_lowvol_a.csv", "mortality_lowvol_b.csv"),
    "losses3": ("losses_3lines.csv",),
    "losses10": ("losses_10lines.csv",),
}


class UsageError(ValidationError):
    """Bad command-line usage."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def data_path(name: str) -> Path:
    """Path of a bundled data file."""
    return Path(str(files("jointpricing") / "data" / name))


def fmt_float(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header, rows) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt_float(v) for v in row])
    return path


def write_kv(path: Path, items: dict) -> Path:
    return write_csv(path, ["key", "value"], items.items())


def emit(items: dict, fmt: str, stream=None) -> None:
    stream = stream or sys.stdout
    if fmt == "csv":
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in items.items():
            w.writerow([k, fmt_float(v)])
    else:
        width = max(len(k) for k in items)
        for k, v in items.items():
            shown = f"{v:.10g}" if isinstance(v, float) else fmt_float(v)
            stream.write(f"{k:<{width}}  {shown}\n")


def read_kv_file(path) -> dict[str, str]:
    """Read ``key = value`` lines (or a two-column ``key,value`` CSV)."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ","
        if sep not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split(sep, 1))
        if (key, value) == ("key", "value"):
            continue
        out[key.replace("-", "_")] = value
    return out


# -- configuration -----------------------------------------------------------


@dataclass
class RunConfig:
    """Validated settings shared by every command."""

    command: str
    out: Path
    risk: RiskSpec
    seed: int
    grid: Optional[int]
    fmt: str
    plots: bool
    options: argparse.Namespace = field(repr=False)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        for name in ("stats", "data_a", "data_b", "input"):
            path = getattr(args, name, None)
            if path is not None and not Path(path).is_file():
                raise ValidationError(f"--{name.replace('_', '-')}: no such file: {path}")
        if args.grid is not None and args.grid < 1:
            raise ValidationError(f"--grid must be positive, got {args.grid}")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return cls(args.command, out, RiskSpec(args.zeta, args.gamma), args.seed, args.grid, args.format, args.plots, args)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags given on the command line override it")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--zeta", type=float, default=0.5, help="risk reduction factor in (0, 1)")
    p.add_argument("--gamma", type=float, default=1.686, help="weight of the standard deviation")
    p.add_argument("--grid", type=int, default=None, help="number of grid points")
    p.add_argument("--format", choices=("text", "csv"), default="text", help="stdout and report format")
    p.add_argument("--plots", action=argparse.BooleanOptionalAction, default=True, help="write PNG figures")


def _add_pair(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("line pair")
    g.add_argument("--preset", choices=("reference",), help="built-in annuity/assurance pair")
    g.add_argument("--benefit-ratio", type=float, default=1.0, help="death benefit relative to the annuity payment")
    g.add_argument("--stats", help="file with pi_a, sigma_a, pi_b, sigma_b, rho")
    for name in ("pi-a", "sigma-a", "pi-b", "sigma-b", "rho"):
        g.add_argument(f"--{name}", type=float)


def _add_market(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("market")
    g.add_argument("--insurers-a", type=int, default=10)
    g.add_argument("--insurers-b", type=int, default=10)
    g.add_argument("--q-a", type=float, help="reaction factor of line A")
    g.add_argument("--q-b", type=float, help="reaction factor of line B")
    g.add_argument("--total-demand", type=float, default=1e6)
    g.add_argument("--wd", type=float, help="demand share of line B")
    g.add_argument("--demand-a", type=float)
    g.add_argument("--demand-b", type=float)
    g.add_argument("--demand-model", type=mm.DemandModel.parse, default=mm.DemandModel.LINEARIZED, help="logistic or linear")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jointpricing", description="Joint versus stand-alone pricing of two insurance lines.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("region", help="joint loading curve and competitiveness region")
    _add_common(p)
    _add_pair(p)
    p.add_argument("--psi-star", type=float, help="loading whose monitoring interval is reported")

    p = sub.add_parser("decide", help="joint or separate pricing under demand reactions")
    _add_common(p)
    _add_pair(p)
    _add_market(p)

    p = sub.add_parser("sweep", help="premium difference across demand shares")
    _add_common(p)
    _add_pair(p)
    _add_market(p)
    p.add_argument("--scenario", action="append", type=_reaction_pair, help="q_a,q_b (repeatable; default: four presets)")

    p = sub.add_parser("simulate", help="fit, simulate and summarize two mortality populations")
    _add_common(p)
    p.add_argument("--data-a", help="age-by-year death rates backing the annuity")
    p.add_argument("--data-b", help="age-by-year death rates backing the assurance")
    p.add_argument("--fixture", choices=("common", "lowvol"), help="use bundled synthetic data")
    p.add_argument("--n-sims", type=int, default=10_000)
    p.add_argument("--age-a", type=int, default=60)
    p.add_argument("--term-a", type=int, default=30)
    p.add_argument("--benefit-a", type=float, default=1.0)
    p.add_argument("--age-b", type=int, default=30)
    p.add_argument("--term-b", type=int, default=30)
    p.add_argument("--benefit-b", type=float, default=1.0)
    p.add_argument("--discount-rate", type=float, default=0.02)
    p.add_argument("--specific-drift", choices=("auto", "keep", "zero"), default="auto")
    p.add_argument("--calibrate-var", type=float, metavar="LEVEL", help="calibrate gamma to value-at-risk at LEVEL")
    p.add_argument("--dump-scenarios", action="store_true", help="write per-scenario present values")

    p = sub.add_parser("screen", help="stationarity and b*rho screening of loss series")
    _add_common(p)
    p.add_argument("--input", help="long CSV: period,line_id,line_name,loss")
    p.add_argument("--fixture", choices=("losses3", "losses10"), help="use bundled synthetic data")
    p.add_argument("--pi-source", choices=("mean", "trend-end"), default="mean")
    p.add_argument("--bandwidth", type=int, help="KPSS lag truncation (default floor(4 (T/100)^0.25))")
    p.add_argument("--pair", action="append", type=_id_pair, help="ID_A,ID_B: also write its loading curve (repeatable)")
    return parser


def _reaction_pair(text: str) -> tuple[float, float]:
    try:
        qa, qb = (float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected q_a,q_b, got {text!r}") from None
    return qa, qb


def _id_pair(text: str) -> tuple[str, str]:
    parts = [s.strip() for s in text.split(",")]
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError(f"expected ID_A,ID_B, got {text!r}")
    return parts[0], parts[1]


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise AssertionError("no subcommands")


def _apply_config(sub: argparse.ArgumentParser, path: str) -> None:
    """Turn a config file into parser defaults, so explicit flags still win."""
    values = read_kv_file(path)
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, text in values.items():
        action = actions.get(key)
        if action is None or key in ("help", "config"):
            raise ValidationError(f"{path}: unknown setting {key!r}")
        if isinstance(action, argparse.BooleanOptionalAction) or action.nargs == 0:
            if text.lower() not in ("true", "false", "yes", "no", "1", "0"):
                raise ValidationError(f"{path}: {key} must be true or false, got {text!r}")
            defaults[key] = text.lower() in ("true", "yes", "1")
        elif isinstance(action, argparse._AppendAction):
            try:
                defaults[key] = [action.type(s.strip()) for s in text.split(";") if s.strip()]
            except argparse.ArgumentTypeError as exc:
                raise ValidationError(f"{path}: {key}: {exc}") from None
        else:
            defaults[key] = text  # argparse converts string defaults with the action's type
    sub.set_defaults(**defaults)


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        if not Path(args.config).is_file():
            raise ValidationError(f"--config: no such file: {args.config}")
        sub = _subparser(parser, args.command)
        _apply_config(sub, args.config)
        args = parser.parse_args(argv)
    return args


# -- shared builders ---------------------------------------------------------


def build_pair(args) -> LinePair:
    values = {}
    if args.preset == "reference":
        ref = reference_pair(args.benefit_ratio)
        a, b = (ref.line_b, ref.line_a) if ref.swapped else (ref.line_a, ref.line_b)
        values = {"pi_a": a.pi, "sigma_a": a.sigma, "pi_b": b.pi, "sigma_b": b.sigma, "rho": ref.rho}
    if args.stats:
        stats = read_kv_file(args.stats)
        for key in ("pi_a", "sigma_a", "pi_b", "sigma_b", "rho"):
            if key in stats:
                try:
                    values[key] = float(stats[key])
                except ValueError:
                    raise ValidationError(f"{args.stats}: {key} is not a number: {stats[key]!r}") from None
    for key in ("pi_a", "sigma_a", "pi_b", "sigma_b", "rho"):
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)
    missing = [k for k in ("pi_a", "sigma_a", "pi_b", "sigma_b", "rho") if k not in values]
    if missing:
        raise ValidationError("missing pair statistics: " + ", ".join("--" + k.replace("_", "-") for k in missing))
    return LinePair(
        BusinessLine("A", values["pi_a"], values["sigma_a"]),
        BusinessLine("B", values["pi_b"], values["sigma_b"]),
        values["rho"],
    )


def build_market(args, require_share: bool = True) -> mm.MarketSpec:
    qa = 1.0 if args.q_a is None else args.q_a
    qb = 1.0 if args.q_b is None else args.q_b
    if args.demand_a is not None or args.demand_b is not None:
        if args.demand_a is None or args.demand_b is None:
            raise ValidationError("--demand-a and --demand-b must be given together")
        return mm.MarketSpec(args.demand_a, args.demand_b, args.insurers_a, args.insurers_b, qa, qb)
    if args.wd is None:
        if require_share:
            raise ValidationError("give --wd (with --total-demand) or --demand-a and --demand-b")
        wd = 0.5
    else:
        wd = args.wd
    if not 0.0 < wd < 1.0:
        raise ValidationError(f"--wd must lie in (0, 1), got {wd}")
    if not args.total_demand > 0:
        raise ValidationError(f"--total-demand must be positive, got {args.total_demand}")
    return mm.MarketSpec((1 - wd) * args.total_demand, wd * args.total_demand, args.insurers_a, args.insurers_b, qa, qb)


def region_outputs(cfg: RunConfig, pair: LinePair, psi_star: Optional[float], grid: int, stem: str = "region") -> dict:
    """Write the loading curve and its summary; return the summary."""
    risk = cfg.risk
    report = competitiveness_region(pair, risk)
    interval = None if psi_star is None else monitoring_interval(pair, risk, psi_star)
    n = np.linspace(0.0, 1.0, grid) if grid > 1 else np.array([0.0])
    psi = joint_loading(pair, risk, n)
    write_csv(
        cfg.out / f"{stem}_curve.csv",
        ["n", "psi_joint", "psi_a_ref", "psi_b_ref"],
        ((x, y, report.psi_a, report.psi_b) for x, y in zip(n, psi)),
    )
    summary = {
        "lines_swapped": pair.swapped,
        "psi_a": report.psi_a,
        "psi_b": report.psi_b,
        "b": pair.b,
        "b_rho": pair.b_rho,
        "exists": report.exists,
        "n_min": report.n_min,
        "psi_min": report.psi_min,
        "n_ct": report.n_ct,
    }
    if interval is not None:
        summary.update(psi_star=psi_star, n_lower=interval[0], n_upper=interval[1])
    write_kv(cfg.out / f"{stem}_summary.csv", summary)
    if cfg.plots:
        plotting.plot_region(
            n, psi, report.psi_a, report.psi_b, cfg.out / f"{stem}.png",
            n_min=report.n_min if report.exists else None, n_ct=report.n_ct,
        )
    return summary


# -- commands ----------------------------------------------------------------


def cmd_region(cfg: RunConfig) -> int:
    args = cfg.options
    summary = region_outputs(cfg, build_pair(args), args.psi_star, cfg.grid or 1001)
    emit(summary, cfg.fmt)
    return 0


def _decision_rows(decisions):
    for d in decisions:
        eq = d.equilibrium
        yield [
            d.rule, d.verdict.value, d.branch, d.eta, d.w_ct,
            None if eq is None else eq.psi_star, None if eq is None else eq.n_star, d.d_ptf,
            "; ".join(f"{name}={'yes' if ok else 'no'}" for name, ok in d.conditions_checked),
        ]


def cmd_decide(cfg: RunConfig) -> int:
    args = cfg.options
    pair = build_pair(args)
    market = build_market(args)
    model = args.demand_model
    try:
        eq = mm.solve_equilibrium(pair, cfg.risk, market, model)
    except NoConvergence as exc:
        sys.stderr.write(f"equilibrium solver did not converge: {exc} (last residual {exc.residual:.3g})\n")
        raise
    decisions = [
        mm.decide_by_demand_threshold(pair, cfg.risk, market, model),
        mm.decide_by_reaction_bands(pair, cfg.risk, market, model),
    ]
    write_csv(
        cfg.out / "decision.csv",
        ["rule", "verdict", "branch", "eta", "w_ct", "psi_star", "n_star", "d_ptf", "conditions"],
        _decision_rows(decisions),
    )
    summary = {
        "demand_model": model.value,
        "w_d": market.demand_share,
        "w_ct": decisions[0].w_ct,
        "eta": decisions[0].eta,
        "branch": decisions[0].branch,
        "psi_star": eq.psi_star,
        "n_star": eq.n_star,
        "count_a": eq.count_a,
        "count_b": eq.count_b,
        "solver": eq.method,
        "multiple_equilibria": eq.multiple_roots,
        "d_ptf": decisions[0].d_ptf,
        "verdict_demand_threshold": decisions[0].verdict.value,
        "verdict_reaction_bands": decisions[1].verdict.value,
    }
    if not all(d.decisive for d in decisions) and decisions[0].d_ptf is not None:
        # sign of the premium difference at the solved equilibrium
        summary["advisory"] = "joint" if decisions[0].d_ptf > 0 else "separate"
    write_kv(cfg.out / "decision_summary.csv", summary)
    emit(summary, cfg.fmt)
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    args = cfg.options
    pair = build_pair(args)
    template = build_market(args, require_share=False)
    grid = mm.default_share_grid(cfg.grid or 19)
    scenarios = args.scenario or list(mm.PRESET_REACTION_SCENARIOS)
    rows, curves, summary = [], [], {}
    for qa, qb in scenarios:
        market = template.with_reactions(qa, qb)
        points = mm.sweep_demand_share(pair, cfg.risk, market, args.demand_model, grid, args.total_demand)
        rows.extend((qa, qb, p.w_d, p.psi_star, p.rel_d_ptf, p.status) for p in points)
        curves.append((f"q_a={qa:g}, q_b={qb:g}", np.array([p.w_d for p in points]), np.array([p.rel_d_ptf for p in points])))
        signs = "".join("+" if p.rel_d_ptf > 0 else "-" if p.rel_d_ptf < 0 else "?" if math.isnan(p.rel_d_ptf) else "0" for p in points)
        summary[f"signs_{qa:g}_{qb:g}"] = signs
        if pair.b_rho < 1.0:
            summary[f"w_ct_{qa:g}_{qb:g}"] = mm.demand_critical_threshold(pair, cfg.risk, market)
    write_csv(cfg.out / "sweep.csv", ["q_a", "q_b", "w_d", "psi_star", "rel_d_ptf", "status"], rows)
    write_kv(cfg.out / "sweep_summary.csv", summary)
    if cfg.plots:
        plotting.plot_sweep(curves, cfg.out / "sweep.png")
    emit(summary, cfg.fmt)
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    args = cfg.options
    if args.fixture:
        path_a, path_b = (data_path(f) for f in DATA_FILES[args.fixture])
    elif args.data_a and args.data_b:
        path_a, path_b = Path(args.data_a), Path(args.data_b)
    else:
        raise ValidationError("give --data-a and --data-b, or --fixture")
    if args.n_sims < 2:
        raise ValidationError(f"--n-sims must be at least 2, got {args.n_sims}")
    if not args.discount_rate > -1.0:
        raise ValidationError(f"--discount-rate must exceed -1, got {args.discount_rate}")
    v = 1.0 / (1.0 + args.discount_rate)
    spec_a = ms.ProductSpec(ms.ProductKind.TERM_ANNUITY, args.age_a, args.term_a, args.benefit_a, v)
    spec_b = ms.ProductSpec(ms.ProductKind.TERM_ASSURANCE, args.age_b, args.term_b, args.benefit_b, v)

    params = ms.fit_li_lee(
        ms.read_mortality_csv(path_a, "A"), ms.read_mortality_csv(path_b, "B"), specific_drift=args.specific_drift
    )
    scenarios = ms.simulate_scenarios(params, max(spec_a.term, spec_b.term), args.n_sims, cfg.seed)
    va = ms.product_values(scenarios, spec_a, "A")
    vb = ms.product_values(scenarios, spec_b, "B")
    stats = ms.summarize(va, vb, seed=cfg.seed)

    risk = cfg.risk
    summary = {
        "pi_a": stats.pi_a,
        "sigma_a": stats.sigma_a,
        "pi_b": stats.pi_b,
        "sigma_b": stats.sigma_b,
        "rho": stats.rho,
        "sample_count": stats.sample_count,
        "seed": cfg.seed,
        "drift_a": params.drift[0],
        "drift_b": params.drift[1],
        "drift_common": params.drift[2],
        "drift_a_zeroed": params.drift_zeroed[0],
        "drift_b_zeroed": params.drift_zeroed[1],
    }
    if args.calibrate_var is not None:
        grid = cfg.grid or 21
        gamma = ms.calibrate_gamma(va, vb, risk.zeta, args.calibrate_var, grid)
        summary.update(var_level=args.calibrate_var, gamma_calibrated=gamma)
        risk = RiskSpec(risk.zeta, gamma)
        var_curve = ms.var_loading_curve(va, vb, risk.zeta, args.calibrate_var, grid)
        msd_curve = ms.msd_loading_curve(va, vb, risk.zeta, gamma, grid)
        write_csv(
            cfg.out / "var_curve.csv",
            ["n", "psi_var", "psi_msd"],
            ((n, pv, pm) for (n, pv), (_, pm) in zip(var_curve, msd_curve)),
        )
        if cfg.plots:
            plotting.plot_var_fit(
                [n for n, _ in var_curve], [p for _, p in var_curve], [p for _, p in msd_curve],
                cfg.out / "var_curve.png", gamma,
            )
    write_kv(cfg.out / "simulation_summary.csv", summary)
    if args.dump_scenarios:
        ms.export_scenarios_csv(cfg.out / "scenarios.csv", va, vb)

    region_cfg = RunConfig(cfg.command, cfg.out, risk, cfg.seed, cfg.grid, cfg.fmt, cfg.plots, args)
    region = region_outputs(region_cfg, stats.to_pair(), None, 1001)
    summary.update({f"region_{k}": v for k, v in region.items()})
    emit(summary, cfg.fmt)
    return 0


def cmd_screen(cfg: RunConfig) -> int:
    args = cfg.options
    if args.fixture:
        path = data_path(DATA_FILES[args.fixture][0])
    elif args.input:
        path = Path(args.input)
    else:
        raise ValidationError("give --input or --fixture")
    series, rejected = es.read_losses(path)
    for line_id, reason in rejected.items():
        sys.stderr.write(f"line {line_id} rejected: {reason}\n")
    if not series:
        logger.warning("%s: no usable loss series", path)
    report = es.pairwise_screen(series, pi_source=args.pi_source, bandwidth=args.bandwidth)
    ext = "csv" if cfg.fmt == "csv" else "txt"
    text = es.render_report(report, cfg.fmt)
    (cfg.out / f"screen_report.{ext}").write_text(text, encoding="utf-8")
    if cfg.fmt == "text":
        # the CSV form is always written so the figures have a data contract
        (cfg.out / "screen_report.csv").write_text(es.render_report(report, "csv"), encoding="utf-8")
    for id_a, id_b in args.pair or ():
        curve = es.region_curve(report, id_a, id_b, cfg.risk, cfg.grid or 101)
        stem = f"region_{curve.line_a}_{curve.line_b}"
        write_csv(
            cfg.out / f"{stem}.csv",
            ["n", "loaded_premium", "level_a", "level_b"],
            ((n, y, curve.level_a, curve.level_b) for n, y in zip(curve.n, curve.loaded)),
        )
        if cfg.plots:
            plotting.plot_region(
                curve.n, curve.loaded, curve.level_a, curve.level_b, cfg.out / f"{stem}.png",
                n_ct=curve.n_ct, title=f"{curve.line_a} / {curve.line_b}",
            )
    if cfg.plots:
        plotting.plot_losses(series, cfg.out / "losses.png")
        ordered = report.ordered_lines()
        plotting.plot_psi_bars([s.line_id for s in ordered], [s.psi for s in ordered], cfg.out / "psi.png")
    sys.stdout.write(text)
    return 0


HANDLERS = {
    "region": cmd_region,
    "decide": cmd_decide,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "screen": cmd_screen,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        cfg = RunConfig.from_args(args)
        return HANDLERS[cfg.command](cfg)
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except ComputationError as exc:
        sys.stderr.write(f"computation failed: {exc}\n")
        return 2
    except JointPricingError as exc:  # pragma: no cover - every subclass is one of the above
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
