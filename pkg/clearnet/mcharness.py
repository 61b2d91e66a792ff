from __future__ import annotations

import csv
import dataclasses
import functools
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import IO, Iterable, Literal, Sequence

import numpy as np
from typing_extensions import Self

from .exceptions import AllPathsFailedError, ClearnetError, ConfigError, ZeroVarianceError
from .finmodel import (
    BalanceSheets,
    FinanceParams,
    clearing_statistics,
    draw_shocks,
    finite_clearing_map,
    solve_limit,
)
from .fpcore import FPConfig, iterate_fp
from .netgraph import (
    GraphSample,
    ModelParams,
    Seed,
    WeightModel,
    degree_window,
    sample_graph,
    sample_regular_graph,
)
from .record import Record, attr

logger = logging.getLogger(__name__)

Z_VALUE = 1.96

CSV_FIELDS = [
    "n",
    "measure",
    "estimate",
    "half_width",
    "theory",
    "error_pct",
    "n_paths",
    "failures",
]


class GraphKind(Record):
    """
    Erdos-Renyi graphs, or regular graphs whose degree windows are either
    given outright or as ``mean +/- spread * mean``.
    """

    kind: Literal["er", "regular"] = attr("er")
    lender_bounds: tuple[int, int] | None = attr(None)
    borrower_bounds: tuple[int, int] | None = attr(None)
    lender_spread: float = attr(0.08)
    borrower_spread: float | None = attr(None)

    @classmethod
    def er(cls) -> Self:
        return cls(kind="er")

    @classmethod
    def regular(
        cls, lender_spread: float = 0.08, borrower_spread: float | None = None
    ) -> Self:
        return cls(
            kind="regular", lender_spread=lender_spread, borrower_spread=borrower_spread
        )

    def windows(
        self, mean: float
    ) -> tuple[tuple[int, int], tuple[int, int] | None]:
        lender = self.lender_bounds or degree_window(mean, self.lender_spread)
        borrower = self.borrower_bounds
        if borrower is None and self.borrower_spread is not None:
            borrower = degree_window(mean, self.borrower_spread)
        return lender, borrower


class PathStats(Record):
    x_hat: float
    pd_hat: float
    es_hat: float
    sau_hat: float
    shock_frac: float
    iterations: int
    converged: bool
    x_hat_g1: float | None = attr(None)
    pd_hat_g1: float | None = attr(None)
    es_hat_g1: float | None = attr(None)


class MCConfig(Record):
    model: ModelParams
    finance: FinanceParams
    n: int
    graph: GraphKind = attr(default_factory=GraphKind)
    master_seed: int = attr(0)
    fp: FPConfig = attr(default_factory=FPConfig.standard)
    balance_sheets: BalanceSheets = attr("realized")


class MeasureSummary(Record):
    measure: str
    estimate: float
    half_width: float | None
    n_paths: int
    theory: float | None
    error_pct: float | None


class MCReport(Record):
    n: int
    graph: GraphKind
    requested_paths: int
    failures: int
    measures: list[MeasureSummary]
    paths: list[PathStats]
    correlation: float | None = attr(None)

    def summary(self, measure: str) -> MeasureSummary:
        for item in self.measures:
            if item.measure == measure:
                return item
        raise KeyError(measure)

    def csv_rows(self) -> list[dict[str, str]]:
        return [
            {
                "n": str(self.n),
                "measure": item.measure,
                "estimate": format_number(item.estimate),
                "half_width": format_number(item.half_width),
                "theory": format_number(item.theory),
                "error_pct": format_number(item.error_pct),
                "n_paths": str(item.n_paths),
                "failures": str(self.failures),
            }
            for item in self.measures
        ]


def format_number(value: float | None) -> str:
    return "" if value is None else f"{value:.10g}"


def write_csv(reports: Iterable[MCReport], stream: IO[str]) -> None:
    writer = csv.DictWriter(stream, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for report in reports:
        writer.writerows(report.csv_rows())


def path_seed(master_seed: int, n: int, index: int) -> np.random.SeedSequence:
    """
    Seed of path ``index``; it depends on nothing but its arguments.
    """
    return np.random.SeedSequence(master_seed, spawn_key=(n, index))


def _sample(
    model: ModelParams, n: int, graph_kind: GraphKind, seed: Seed
) -> GraphSample:
    if graph_kind.kind == "regular":
        lender, borrower = graph_kind.windows(n * model.gamma_p(2))
        return sample_regular_graph(model, n, lender, borrower, seed)
    return sample_graph(model, n, seed)


# Fields the balance sheets pin down; the rest of ModelParams is connectivity.
FINANCE_FIELDS = ("gamma", "p_sb1", "p_sb2", "lambda1", "lambda2")


def resolve_graph_params(model: ModelParams, finance: FinanceParams) -> ModelParams:
    """
    Graph parameters for one path: connectivity, weight model and eta mode
    come from ``model``, group shares, big-node probabilities and lambdas
    from ``finance``. Weights are group split unless ``model`` asks for
    fixed denominators.

    :raises ConfigError: ``model`` sets one of the finance-owned fields to a
        non-default value that differs from the finance one, or the two
        disagree on single-group mode.
    """
    if model.single_group != finance.single_group:
        raise ConfigError("graph and finance parameters disagree on single-group mode")
    derived = finance.model_params(model.p2, model.p1, model.pc2)
    defaults = {field.name: field.default for field in dataclasses.fields(ModelParams)}
    for name in FINANCE_FIELDS:
        given, wanted = getattr(model, name), getattr(derived, name)
        if given != defaults[name] and abs(given - wanted) > 1e-12:
            raise ConfigError(
                f"model {name}={given} conflicts with {wanted} from the finance parameters"
            )
    weight_model = model.weight_model
    if weight_model is WeightModel.SHARED_ALL:
        weight_model = WeightModel.GROUP_SPLIT
    return model.replace(
        **{name: getattr(derived, name) for name in FINANCE_FIELDS},
        weight_model=weight_model,
    )


def run_path(
    model_params: ModelParams,
    finance_params: FinanceParams,
    n: int,
    graph_kind: GraphKind,
    seed: Seed,
    fp_config: FPConfig | None = None,
    balance_sheets: BalanceSheets = "realized",
) -> PathStats:
    """
    One sample path: draw the graph and the shocks, clear the network with
    the damped iteration and average the outcomes over the banks.
    """
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    graph_seed, shock_seed = seed.spawn(2)
    graph_params = resolve_graph_params(model_params, finance_params)
    sample = _sample(graph_params, n, graph_kind, graph_seed)
    shocks = draw_shocks(sample, finance_params, shock_seed, balance_sheets=balance_sheets)
    clearing, upper = finite_clearing_map(sample, shocks.values, finance_params)
    result = iterate_fp(clearing, upper, fp_config or FPConfig.standard())
    stats = clearing_statistics(
        sample, shocks.values, result.solution, finance_params, shocks.down
    )

    g2, g1 = stats[2], stats.get(1)
    return PathStats(
        x_hat=g2.claims_mean,
        pd_hat=g2.default_frac,
        es_hat=g2.surplus_mean,
        sau_hat=g2.sau_mean,
        shock_frac=g2.shock_frac,
        iterations=result.iterations,
        converged=result.converged,
        x_hat_g1=g1.claims_mean if g1 else None,
        pd_hat_g1=g1.default_frac if g1 else None,
        es_hat_g1=g1.surplus_mean if g1 else None,
    )


def _run_indexed(config: MCConfig, index: int) -> PathStats | None:
    try:
        stats = run_path(
            config.model,
            config.finance,
            config.n,
            config.graph,
            path_seed(config.master_seed, config.n, index),
            config.fp,
            config.balance_sheets,
        )
    except ClearnetError as exc:
        logger.warning("path %d failed: %s", index, exc)
        return None
    if not stats.converged:
        logger.warning("path %d did not converge, excluded", index)
        return None
    return stats


def half_width(values: Sequence[float]) -> float | None:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return None
    return float(Z_VALUE * np.sqrt(np.var(values, ddof=1) / values.size))


def error_pct(theory: float | None, estimate: float) -> float | None:
    if theory is None or theory == 0.0:
        return None
    return abs(theory - estimate) / abs(theory) * 100.0


def theory_values(finance: FinanceParams) -> dict[str, float | None]:
    solution = solve_limit(finance)
    values: dict[str, float | None] = {
        "x": solution.x2_inf,
        "pd": solution.pd2,
        "es": solution.es2,
        "sau": solution.sau2,
        "shock_frac": finance.w,
    }
    if solution.x1_inf is not None:
        values.update(
            x_g1=solution.x1_inf + solution.mu1 * solution.x2_inf,
            pd_g1=solution.pd1,
            es_g1=solution.es1,
        )
    return values


MEASURE_FIELDS = {
    "x": "x_hat",
    "pd": "pd_hat",
    "es": "es_hat",
    "sau": "sau_hat",
    "shock_frac": "shock_frac",
    "x_g1": "x_hat_g1",
    "pd_g1": "pd_hat_g1",
    "es_g1": "es_hat_g1",
}


def estimate(config: MCConfig, n_paths: int, workers: int = 1) -> MCReport:
    """
    Run ``n_paths`` independent paths and compare their averages with the
    limit theory. The report does not depend on ``workers``.
    """
    if n_paths < 1:
        raise ConfigError("n_paths must be positive")
    run = functools.partial(_run_indexed, config)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run, range(n_paths)))
    else:
        results = [run(index) for index in range(n_paths)]

    paths = [stats for stats in results if stats is not None]
    failures = n_paths - len(paths)
    if not paths:
        raise AllPathsFailedError(f"all {n_paths} paths failed for n={config.n}")

    theory = theory_values(config.finance)
    summaries = []
    for measure, theory_value in theory.items():
        values = [getattr(stats, MEASURE_FIELDS[measure]) for stats in paths]
        mean = float(np.mean(values))
        summaries.append(
            MeasureSummary(
                measure=measure,
                estimate=mean,
                half_width=half_width(values),
                n_paths=len(values),
                theory=theory_value,
                error_pct=error_pct(theory_value, mean),
            )
        )

    try:
        correlation = correlation_defaults_vs_shocks(paths)
    except (ConfigError, ZeroVarianceError):
        correlation = None

    return MCReport(
        n=config.n,
        graph=config.graph,
        requested_paths=n_paths,
        failures=failures,
        measures=summaries,
        paths=paths,
        correlation=correlation,
    )


def correlation_defaults_vs_shocks(paths: Sequence[PathStats]) -> float:
    """
    Sample correlation between the default fraction and the shocked fraction
    across paths.
    """
    if len(paths) < 2:
        raise ConfigError("correlation needs at least two paths")
    defaults = np.array([stats.pd_hat for stats in paths])
    shocked = np.array([stats.shock_frac for stats in paths])
    if np.ptp(defaults) == 0.0 or np.ptp(shocked) == 0.0:
        raise ZeroVarianceError("defaults or shocks do not vary across paths")
    return float(np.corrcoef(defaults, shocked)[0, 1])


class PathAverage(Record):
    n: int
    paths: int
    pd: float
    shock_frac: float
    theory_pd: float | None


def path_averages(report: MCReport, counts: Sequence[int]) -> list[PathAverage]:
    """
    Default and shocked fractions averaged over the first ``k`` paths of a
    report, for every ``k`` in ``counts``.
    """
    if not counts or any(k < 1 for k in counts):
        raise ConfigError("path counts must be positive")
    if max(counts) > len(report.paths):
        raise ConfigError(
            f"report holds {len(report.paths)} paths, cannot average {max(counts)}"
        )
    theory = report.summary("pd").theory
    rows = []
    for k in counts:
        head = report.paths[:k]
        rows.append(
            PathAverage(
                n=report.n,
                paths=k,
                pd=float(np.mean([stats.pd_hat for stats in head])),
                shock_frac=float(np.mean([stats.shock_frac for stats in head])),
                theory_pd=theory,
            )
        )
    return rows
