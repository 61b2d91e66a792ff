from __future__ import annotations

import logging
from typing import Callable, Sequence

import numpy as np
from scipy import optimize
from typing_extensions import Self

from .exceptions import ConfigError, ContractViolation, SolverError
from .fields import POSITIVE, POSITIVE_REAL, UNIT_INTERVAL
from .netgraph import ModelParams, Seed, make_rng, sample_graph
from .record import Record, attr

logger = logging.getLogger(__name__)

Map = Callable[[np.ndarray], np.ndarray]

LIMIT_TOLERANCE = 1e-12
BOX_SLACK = 1e-9


class FPConfig(Record):
    """
    Damped iteration settings: step ``step_eps``, per-node tolerance
    ``tol_delta``, ``window_k`` consecutive small steps to stop.
    """

    step_eps: float = attr(0.5, validate=UNIT_INTERVAL)
    tol_delta: float = attr(1e-4, validate=POSITIVE_REAL)
    window_k: int = attr(100, validate=POSITIVE)
    max_iters: int = attr(100_000, validate=POSITIVE)

    def __post_init__(self) -> None:
        if not 0.0 < self.step_eps <= 1.0:
            raise ConfigError("step_eps must lie in (0, 1]")
        if self.tol_delta <= 0.0:
            raise ConfigError("tol_delta must be positive")
        if self.window_k < 1 or self.max_iters < self.window_k:
            raise ConfigError("need 1 <= window_k <= max_iters")

    @classmethod
    def standard(cls) -> Self:
        return cls(step_eps=0.5, tol_delta=1e-4, window_k=100)


class FPResult(Record, eq=False):
    solution: np.ndarray
    iterations: int
    residual: float
    converged: bool


class ContractionReport(Record):
    rho: float
    sigma_eta: float
    satisfied_b4: bool
    unique_fp_condition: bool


class LLNRow(Record):
    n: int
    zeta: float
    limit: float
    deviation: float


def _check_box(value: np.ndarray, upper: np.ndarray) -> None:
    slack = BOX_SLACK * np.maximum(1.0, upper)
    if np.any(value < -slack) or np.any(value > upper + slack):
        raise ContractViolation("map sent a point outside [0, box_upper]")


def _check_decreasing(fx: np.ndarray, x: np.ndarray) -> None:
    if np.any(fx > x + 1e-12 * np.maximum(1.0, np.abs(x))):
        raise ContractViolation("Picard iterates from the upper corner must not increase")


def iterate_fp(map: Map, box_upper: Sequence[float] | np.ndarray, cfg: FPConfig | None = None) -> FPResult:
    """
    Damped iteration x <- x + eps * (f(x) - x) started at the upper corner.

    Stops once the summed change stayed below ``n * tol_delta`` for
    ``window_k`` consecutive steps and ``max|f(x) - x| <= tol_delta``.
    """
    cfg = cfg or FPConfig.standard()
    upper = np.asarray(box_upper, dtype=float)
    if np.any(upper < 0):
        raise ConfigError("box_upper must be nonnegative")
    x = upper.copy()
    threshold = x.size * cfg.tol_delta
    small_steps = 0

    for iteration in range(1, cfg.max_iters + 1):
        fx = np.asarray(map(x), dtype=float)
        _check_box(fx, upper)
        updated = np.clip(x + cfg.step_eps * (fx - x), 0.0, upper)
        change = float(np.abs(updated - x).sum())
        x = updated
        small_steps = small_steps + 1 if change < threshold else 0
        if small_steps >= cfg.window_k:
            residual = float(np.max(np.abs(map(x) - x), initial=0.0))
            if residual <= cfg.tol_delta:
                return FPResult(
                    solution=x, iterations=iteration, residual=residual, converged=True
                )
            small_steps = 0

    residual = float(np.max(np.abs(map(x) - x), initial=0.0))
    logger.warning(
        "damped iteration stopped after %d steps, residual %.3g", cfg.max_iters, residual
    )
    return FPResult(
        solution=x, iterations=cfg.max_iters, residual=residual, converged=False
    )


def picard(
    map: Map,
    start: Sequence[float] | np.ndarray,
    tol: float = LIMIT_TOLERANCE,
    max_iters: int = 1_000_000,
) -> np.ndarray:
    """
    Undamped iteration x <- f(x) until the largest step is below ``tol``.
    """
    x = np.asarray(start, dtype=float).copy()
    monotone = logger.isEnabledFor(logging.DEBUG)
    for _ in range(max_iters):
        fx = np.asarray(map(x), dtype=float)
        if monotone:
            _check_decreasing(fx, x)
        step = float(np.max(np.abs(fx - x), initial=0.0))
        x = fx
        if step < tol:
            return x
    raise SolverError(f"Picard iteration did not reach {tol} in {max_iters} steps")


def _coordinate_sweeps(
    map: Map, x: np.ndarray, upper: np.ndarray, tol: float, sweeps: int
) -> np.ndarray:
    x = x.copy()
    for _ in range(sweeps):
        for i in range(x.size):

            def excess(t: float, i: int = i) -> float:
                trial = x.copy()
                trial[i] = t
                return float(map(trial)[i]) - t

            low, high = excess(0.0), excess(float(upper[i]))
            if low <= 0.0:
                x[i] = 0.0
            elif high >= 0.0:
                x[i] = upper[i]
            else:
                x[i] = optimize.brentq(
                    excess, 0.0, float(upper[i]), xtol=tol / 4, maxiter=500
                )
        if np.max(np.abs(np.asarray(map(x)) - x), initial=0.0) < tol:
            return x
    raise SolverError(f"coordinate bisection did not reach {tol} in {sweeps} sweeps")


def solve_limit_system(
    map: Map,
    box_upper: Sequence[float] | np.ndarray,
    tol: float = LIMIT_TOLERANCE,
    *,
    picard_iters: int = 20_000,
    sweeps: int = 200,
) -> np.ndarray:
    """
    Largest fixed point of a monotone map on a small box.

    Picard iteration from the upper corner; when it stalls the solver
    switches to Gauss-Seidel sweeps that solve each coordinate equation by
    Brent's method.
    """
    upper = np.asarray(box_upper, dtype=float)
    if upper.ndim != 1 or upper.size == 0:
        raise ConfigError("box_upper must be a non-empty vector")
    x = upper.copy()
    monotone = logger.isEnabledFor(logging.DEBUG)
    previous = np.inf
    slow_steps = 0

    for _ in range(picard_iters):
        fx = np.clip(np.asarray(map(x), dtype=float), 0.0, upper)
        if monotone:
            _check_decreasing(fx, x)
        step = float(np.max(np.abs(fx - x), initial=0.0))
        x = fx
        if step < tol:
            break
        slow_steps = slow_steps + 1 if step > 0.9999 * previous else 0
        previous = step
        if slow_steps >= 50:
            break

    residual = float(np.max(np.abs(np.asarray(map(x)) - x), initial=0.0))
    if residual < tol:
        return x
    logger.info("Picard stalled at residual %.3g, switching to bisection", residual)
    return _coordinate_sweeps(map, x, upper, tol, sweeps)


def _sigma_eta(sigma: float, varsigma: float, eta_lower: float) -> float:
    for name, value in (("sigma", sigma), ("varsigma", varsigma), ("eta_lower", eta_lower)):
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"{name} must lie in [0, 1]")
    return sigma * (1.0 - eta_lower + varsigma * eta_lower)


def _report(rho: float, sigma_eta: float) -> ContractionReport:
    return ContractionReport(
        rho=rho,
        sigma_eta=sigma_eta,
        satisfied_b4=rho <= 1.0 + 1e-12,
        unique_fp_condition=sigma_eta < 1.0,
    )


def contraction_model_a(
    params: ModelParams,
    sigma: float = 1.0,
    varsigma: float = 0.0,
    eta_lower: float = 0.0,
) -> ContractionReport:
    g, s1, s2 = params.gamma, params.p_sb1, params.p_sb2
    gp1 = g * params.p1 + (1 - g) * params.pc1
    gp2 = g * params.pc2 + (1 - g) * params.p2
    if gp1 <= 0.0 or gp2 <= 0.0:
        raise ConfigError("contraction factor needs gamma_p1 > 0 and gamma_p2 > 0")
    into_g1 = g * params.p1 * (1 - s1) / gp1 + (1 - g) * params.pc2 * (1 - s2) / gp2
    into_g2 = g * params.pc1 * (1 - s1) / gp1 + (1 - g) * params.p2 * (1 - s2) / gp2
    rho = max(into_g1, into_g2) + g * s1 + (1 - g) * s2
    return _report(rho, _sigma_eta(sigma, varsigma, eta_lower))


def contraction_model_b(
    params: ModelParams,
    sigma: float = 1.0,
    varsigma: float = 0.0,
    eta_lower: float = 0.0,
) -> ContractionReport:
    g = params.gamma
    if not params.single_group and not 0.0 < g < 1.0:
        raise ConfigError("gamma must lie in (0, 1) for two-group contraction")
    l1, l2 = params.lambda1, params.lambda2
    s1, s2 = params.p_sb1, params.p_sb2
    from_g2 = (1 - g) / g * (1 - l2) if params.pc(2) > 0 else 0.0
    from_g1 = g / (1 - g) * (1 - l1) if params.pc(1) > 0 else 0.0
    rho = max(l1 * (1 - s1) + from_g2, from_g1 + l2 * (1 - s2))
    rho += g * l1 * s1 + (1 - g) * l2 * s2
    return _report(rho, _sigma_eta(sigma, varsigma, eta_lower))


def lln_diagnostic(
    params: ModelParams,
    n_values: Sequence[int],
    seed: Seed,
    *,
    group: int = 2,
    draw: Callable[[np.random.Generator, int], np.ndarray] | None = None,
    mean: float = 1.0,
) -> list[LLNRow]:
    """
    Compare sum_{j in G_m} M_j (1 - eta_j) / A_j on sampled graphs with its
    limit E[M] * gamma_m * (1 - p_sb_m) / gamma_p_m.

    :param draw: ``draw(rng, size)`` returns i.i.d. bounded M_j; M_j = 1 when
        omitted, in which case ``mean`` should stay 1.
    """
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    limit = mean * params.share(group) * (1 - params.p_sb(group)) / params.gamma_p(group)
    rows = []
    for n in n_values:
        graph_seed, m_seed = np.random.SeedSequence(
            root.entropy, spawn_key=(*root.spawn_key, int(n))
        ).spawn(2)
        sample = sample_graph(params, n, graph_seed)
        in_group = sample.groups == group
        size = int(in_group.sum())
        m = np.ones(size) if draw is None else np.asarray(draw(make_rng(m_seed), size))
        counts = sample.lender_counts()[in_group]
        zeta = float(np.sum(m * (1 - sample.eta_sb[in_group]) / counts))
        rows.append(LLNRow(n=int(n), zeta=zeta, limit=limit, deviation=abs(zeta - limit)))
    return rows
