from __future__ import annotations

import argparse
import csv
import functools
import io
import json
import logging
import os
import sys
from importlib import resources
from pathlib import Path
from typing import IO, Any, Literal, Sequence

from marshmallow import ValidationError

from .exceptions import (
    AllPathsFailedError,
    ClearnetError,
    ConfigError,
    OutsideHypothesesError,
    SamplingError,
    SolverError,
)
from .fields import GridField
from .finmodel import BalanceSheets, FinanceParams, classify_regime, solve_limit, theory_single_group
from .fpcore import FPConfig
from .mcharness import (
    GraphKind,
    MCConfig,
    MCReport,
    PathAverage,
    estimate,
    format_number,
    path_averages,
    path_seed,
    write_csv,
)
from .netgraph import ModelParams, regularity_diagnostic, sample_graph, sample_regular_graph
from .record import Record, attr

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

SweepVar = Literal["yc", "dc", "kappa", "w"]

SWEEP_FIELDS = [
    "sweep_var",
    "value",
    "x1_inf",
    "x2_inf",
    "pd1",
    "pd2",
    "es1",
    "es2",
    "sau2",
    "case_g1",
    "case_g2",
    "status",
]

DIAG_FIELDS = [
    "n",
    "max_dev_g1",
    "max_dev_g2",
    "set_e_sum_g1",
    "set_e_sum_g2",
    "isolated_borrowers",
]

BAR_FIELDS = ["n", "paths", "pd", "shock_frac", "theory_pd"]

# Names the experiment write-ups use for the embedded presets.
PRESET_ALIASES = {
    "table1-theory": "single-theory",
    "table1": "single-er",
    "table2-regular": "regular-pd",
    "table2-er": "er-pd",
    "table2-regular-p03": "regular-pd-p03",
    "table2-er-p03": "er-pd-p03",
    "table4-regular-small": "regular-small-surplus",
}


class ExperimentSettings(Record):
    n: list[int] = attr(default_factory=lambda: [1000])
    graph: GraphKind = attr(default_factory=GraphKind)
    n_paths: int = attr(200)
    master_seed: int = attr(0)
    workers: int | None = attr(None)
    output: str | None = attr(None)
    preset: str | None = attr(None)
    sweep_var: SweepVar | None = attr(None)
    grid: list[float] | None = attr(None, field=functools.partial(GridField, allow_none=True))
    fp: FPConfig = attr(default_factory=FPConfig.standard)
    balance_sheets: BalanceSheets = attr("realized")
    path_counts: list[int] = attr(default_factory=lambda: [1, 2, 5, 10, 50])


class ExperimentConfig(Record):
    """
    One JSON document with ``model``, ``finance`` and ``experiment`` sections.
    """

    model: ModelParams | None = attr(None)
    finance: FinanceParams | None = attr(None)
    experiment: ExperimentSettings = attr(default_factory=ExperimentSettings)

    def require_finance(self) -> FinanceParams:
        if self.finance is None:
            raise ConfigError("this command needs a 'finance' section")
        return self.finance

    def require_model(self) -> ModelParams:
        if self.model is None:
            raise ConfigError("this command needs a 'model' section")
        return self.model


def load_presets() -> dict[str, dict[str, Any]]:
    text = resources.files("clearnet").joinpath("presets.json").read_text("utf-8")
    return json.loads(text)


def load_config(
    path: str | None = None, preset: str | None = None
) -> ExperimentConfig:
    if path is not None:
        try:
            document = json.loads(Path(path).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    elif preset is not None:
        presets = load_presets()
        preset = PRESET_ALIASES.get(preset, preset)
        if preset not in presets:
            raise ConfigError(f"unknown preset {preset!r}, see 'clearnet presets'")
        document = dict(presets[preset])
        document["experiment"] = {**document.get("experiment", {}), "preset": preset}
    else:
        raise ConfigError("give --config PATH or --preset NAME")
    if not isinstance(document, dict):
        raise ConfigError("config must be a JSON object")
    return ExperimentConfig.load(document)


def apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    experiment = config.experiment
    changes: dict[str, Any] = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.paths is not None:
        changes["n_paths"] = args.paths
    if args.workers is not None:
        changes["workers"] = args.workers
    elif experiment.workers is None and os.environ.get("CLEARNET_WORKERS"):
        try:
            changes["workers"] = int(os.environ["CLEARNET_WORKERS"])
        except ValueError:
            raise ConfigError("CLEARNET_WORKERS must be an integer")
    if args.out is not None:
        changes["output"] = args.out
    if args.sweep is not None:
        changes["sweep_var"] = args.sweep
    if args.grid is not None:
        changes["grid"] = GridField().deserialize(args.grid)
    if args.n is not None:
        changes["n"] = args.n
    if changes:
        config = config.replace(experiment=experiment.replace(**changes))
    return config


def _emit(
    config: ExperimentConfig, name: str, text: str, stream: IO[str] | None
) -> None:
    (stream or sys.stdout).write(text)
    if config.experiment.output:
        directory = Path(config.experiment.output)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / name).write_text(text, encoding="utf-8")


def cmd_limit(config: ExperimentConfig, stream: IO[str] | None = None) -> dict[str, Any]:
    finance = config.require_finance()
    solution = solve_limit(finance)
    result: dict[str, Any] = {
        "limit": solution.dump(),
        "regime": classify_regime(finance, solution).dump(),
    }
    if finance.single_group:
        try:
            x_th, es_th = theory_single_group(finance)
            result["theory"] = {"x_th": x_th, "es_th": es_th}
        except OutsideHypothesesError as exc:
            logger.info("single-group theory not applicable: %s", exc)
    _emit(config, "limit.json", json.dumps(result, indent=2) + "\n", stream)
    return result


def _sweep_row(finance: FinanceParams, var: str, value: float) -> dict[str, str]:
    row = {"sweep_var": var, "value": format_number(value)}
    try:
        solution = solve_limit(finance.replace(**{var: value}))
    except (ClearnetError, ValidationError) as exc:
        return {**row, "status": f"error: {exc}"}
    return {
        **row,
        "x1_inf": format_number(solution.x1_inf),
        "x2_inf": format_number(solution.x2_inf),
        "pd1": format_number(solution.pd1),
        "pd2": format_number(solution.pd2),
        "es1": format_number(solution.es1),
        "es2": format_number(solution.es2),
        "sau2": format_number(solution.sau2),
        "case_g1": solution.case_tag_g1.value if solution.case_tag_g1 else "",
        "case_g2": solution.case_tag_g2.value,
        "status": "ok",
    }


def cmd_sweep(
    config: ExperimentConfig,
    sweep_var: SweepVar | None = None,
    grid: Sequence[float] | None = None,
    stream: IO[str] | None = None,
) -> list[dict[str, str]]:
    finance = config.require_finance()
    sweep_var = sweep_var or config.experiment.sweep_var
    grid = grid if grid is not None else config.experiment.grid
    if sweep_var is None or not grid:
        raise ConfigError("a sweep needs --sweep VAR and a non-empty --grid")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ConfigError("sweep grid must be ascending")

    rows = [_sweep_row(finance, sweep_var, value) for value in grid]
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=SWEEP_FIELDS, restval="", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _emit(config, "sweep.csv", buffer.getvalue(), stream)
    return rows


def _mc_config(config: ExperimentConfig, n: int) -> MCConfig:
    experiment = config.experiment
    return MCConfig(
        model=config.require_model(),
        finance=config.require_finance(),
        n=n,
        graph=experiment.graph,
        master_seed=experiment.master_seed,
        fp=experiment.fp,
        balance_sheets=experiment.balance_sheets,
    )


def cmd_mc(config: ExperimentConfig, stream: IO[str] | None = None) -> list[MCReport]:
    experiment = config.experiment
    reports = []
    for n in experiment.n:
        logger.info("n=%d: running %d paths", n, experiment.n_paths)
        reports.append(
            estimate(_mc_config(config, n), experiment.n_paths, experiment.workers or 1)
        )

    buffer = io.StringIO()
    write_csv(reports, buffer)
    _emit(config, "mc.csv", buffer.getvalue(), stream)
    if experiment.output:
        document = [report.dump() for report in reports]
        (Path(experiment.output) / "mc.json").write_text(
            json.dumps(document, indent=2) + "\n", encoding="utf-8"
        )
    return reports


def cmd_bars(config: ExperimentConfig, stream: IO[str] | None = None) -> list[PathAverage]:
    """
    Default and shocked fractions averaged over a few paths, one row per
    path count.
    """
    experiment = config.experiment
    n_paths = max(experiment.path_counts)
    rows = []
    for n in experiment.n:
        logger.info("n=%d: running %d paths for path averages", n, n_paths)
        report = estimate(_mc_config(config, n), n_paths, experiment.workers or 1)
        rows.extend(path_averages(report, experiment.path_counts))
        logger.info("n=%d: correlation of defaults and shocks %s", n, report.correlation)

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=BAR_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(
            {
                "n": str(row.n),
                "paths": str(row.paths),
                "pd": format_number(row.pd),
                "shock_frac": format_number(row.shock_frac),
                "theory_pd": format_number(row.theory_pd),
            }
        )
    _emit(config, "bars.csv", buffer.getvalue(), stream)
    return rows


def cmd_graph_diag(config: ExperimentConfig, stream: IO[str] | None = None) -> list[dict[str, Any]]:
    model = config.require_model()
    experiment = config.experiment
    rows = []
    for n in experiment.n:
        seed = path_seed(experiment.master_seed, n, 0)
        if experiment.graph.kind == "regular":
            lender, borrower = experiment.graph.windows(n * model.gamma_p(2))
            sample = sample_regular_graph(model, n, lender, borrower, seed)
        else:
            sample = sample_graph(model, n, seed, reject_isolated=False)
        rows.append({"n": n, **regularity_diagnostic(sample).dump()})

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=DIAG_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(
            {
                key: format_number(value) if isinstance(value, float) else value
                for key, value in row.items()
            }
        )
    _emit(config, "graph_diag.csv", buffer.getvalue(), stream)
    return rows


def cmd_presets(stream: IO[str] | None = None) -> list[str]:
    stream = stream or sys.stdout
    presets = load_presets()
    for name, document in presets.items():
        stream.write(f"{name}\t{document.get('description', '')}\n")
    for alias, name in PRESET_ALIASES.items():
        stream.write(f"{alias}\talias of {name}\n")
    return list(presets)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config with model/finance/experiment")
    common.add_argument("--preset", help="embedded preset name")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help="directory for CSV/JSON output")
    common.add_argument("--paths", type=int, help="Monte-Carlo paths per n")
    common.add_argument("--workers", type=int, help="worker processes")
    common.add_argument("--n", type=int, nargs="+", help="network sizes")
    common.add_argument("--sweep", choices=["yc", "dc", "kappa", "w"], help="swept parameter")
    common.add_argument("--grid", help="grid 'start:stop:step'")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="clearnet",
        description="Clearing vectors and systemic risk of large random financial networks",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("limit", parents=[common], help="solve the limit system")
    commands.add_parser("sweep", parents=[common], help="limit system over a grid")
    commands.add_parser("mc", parents=[common], help="Monte-Carlo estimates")
    commands.add_parser("bars", parents=[common], help="default and shock fractions over few paths")
    commands.add_parser("graph-diag", parents=[common], help="graph regularity statistics")
    commands.add_parser("presets", help="list embedded presets")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        cmd_presets()
        return EXIT_OK

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        config = apply_overrides(load_config(args.config, args.preset), args)
        if args.command == "limit":
            cmd_limit(config)
        elif args.command == "sweep":
            cmd_sweep(config)
        elif args.command == "mc":
            cmd_mc(config)
        elif args.command == "bars":
            cmd_bars(config)
        elif args.command == "graph-diag":
            cmd_graph_diag(config)
    except (ConfigError, ValidationError) as exc:
        print(f"clearnet: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, AllPathsFailedError, SamplingError, OutsideHypothesesError) as exc:
        print(f"clearnet: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK
