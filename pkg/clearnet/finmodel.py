from __future__ import annotations

import enum
import logging
import warnings
from typing import Callable, Literal, NamedTuple

import numpy as np
from scipy import sparse
from typing_extensions import Self

from .exceptions import (
    ConfigError,
    ContractViolation,
    OutsideHypothesesError,
    OverLendingWarning,
    SolverError,
)
from .fields import NONNEGATIVE, UNIT_INTERVAL
from .fpcore import solve_limit_system
from .netgraph import EtaMode, GraphSample, ModelParams, Seed, WeightModel, make_rng
from .record import Record, attr

logger = logging.getLogger(__name__)

SELF_CHECK = 1e-9
DEFAULT_SLACK = 1e-9

Sign = Literal["-", "0", "+"]


class FinanceParams(Record):
    """
    Balance sheets, rates and shocks of the two-group banking network.

    Taxes are either proportional (``kappa``, v_m = kappa * Omega_m) or
    explicit (``v1`` and ``v2``).
    """

    k0: float = attr(validate=NONNEGATIVE)
    y1: float = attr(0.0, validate=NONNEGATIVE)
    y2: float
    yc: float = attr(0.0, validate=NONNEGATIVE)
    r1: float | None = attr(None)
    r2: float
    u: float
    d: float
    w: float = attr(validate=UNIT_INTERVAL)
    dc: float = attr(0.0)
    kappa: float | None = attr(None, validate=NONNEGATIVE)
    v1: float | None = attr(None, validate=NONNEGATIVE)
    v2: float | None = attr(None, validate=NONNEGATIVE)
    p_sb1: float = attr(0.0, validate=UNIT_INTERVAL)
    p_sb2: float = attr(0.0, validate=UNIT_INTERVAL)
    gamma: float = attr(0.5, validate=UNIT_INTERVAL)
    single_group: bool = attr(False)
    # Big-bank wealth; kept with the parameters, no measure reads it.
    k_b: float = attr(0.0)

    def __post_init__(self) -> None:
        if self.y2 <= 0.0:
            raise ConfigError("y2 must be positive")
        if self.k0 < 0.0 or self.y1 < 0.0 or self.yc < 0.0:
            raise ConfigError("k0, y1 and yc must be nonnegative")
        if not 0.0 <= self.w <= 1.0:
            raise ConfigError("w must lie in [0, 1]")
        for name in ("p_sb1", "p_sb2"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")

        rates = [self.d] + ([self.r1] if self.r1 is not None else []) + [self.r2, self.u]
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ConfigError("rates must satisfy d < r1 < r2 < u")

        if self.single_group:
            if self.yc != 0.0:
                raise ConfigError("a single-group network has no inter-group lending")
        else:
            if not 0.0 < self.gamma < 1.0:
                raise ConfigError("gamma must lie in (0, 1)")
            if self.r1 is None:
                raise ConfigError("r1 is required for two-group networks")

        explicit = [self.v2] if self.single_group else [self.v1, self.v2]
        if self.kappa is not None:
            if self.v1 is not None or self.v2 is not None:
                raise ConfigError("kappa and explicit taxes v1, v2 are mutually exclusive")
            if self.kappa < 0.0:
                raise ConfigError("kappa must be nonnegative")
        elif any(v is None for v in explicit):
            raise ConfigError("give either kappa or explicit taxes for every group")

    @classmethod
    def two_group_common(
        cls,
        *,
        u: float,
        d: float,
        kappa: float,
        yc: float = 0.0,
        w: float = 0.1,
        dc: float = 0.1,
        r1: float = 0.1,
        r2: float = 0.12,
        p_sb1: float = 0.01,
        p_sb2: float = 0.2,
    ) -> Self:
        return cls(
            k0=40.0 / (1.0 + u - dc),
            y1=50.0 / (1.0 + r1),
            y2=50.0 / (1.0 + r2),
            yc=yc,
            r1=r1,
            r2=r2,
            u=u,
            d=d,
            w=w,
            dc=dc,
            kappa=kappa,
            p_sb1=p_sb1,
            p_sb2=p_sb2,
            gamma=0.5,
        )

    @classmethod
    def single_group_reference(
        cls, *, w: float = 0.2, p_sb2: float = 0.001, kappa: float = 0.56
    ) -> Self:
        """
        Homogeneous network with Omega_2 = 12.5, ybar_2 = 35 and v_2 = 7.
        """
        y2 = 31.25
        return cls(
            k0=12.5 - y2 * p_sb2,
            y2=y2,
            r2=0.12,
            u=0.2,
            d=-0.6,
            w=w,
            kappa=kappa,
            p_sb2=p_sb2,
            single_group=True,
        )

    @property
    def proportional_taxes(self) -> bool:
        return self.kappa is not None

    @property
    def ybar1(self) -> float:
        return self.y1 * (1.0 + (self.r1 or 0.0))

    @property
    def ybar2(self) -> float:
        return (self.y2 + self.yc) * (1.0 + self.r2)

    @property
    def lambda2(self) -> float:
        return self.y2 / (self.y2 + self.yc)

    @property
    def mu1(self) -> float:
        if self.single_group or self.yc == 0.0:
            return 0.0
        if self.p_sb2 >= 1.0:
            raise ConfigError("inter-group coupling is undefined for p_sb2 = 1")
        return (1.0 - self.gamma) / self.gamma * self.yc / self.y2 / (1.0 - self.p_sb2)

    def model_params(
        self,
        p2: float,
        p1: float = 0.0,
        pc: float = 0.0,
        *,
        eta_mode: EtaMode = EtaMode.BERNOULLI,
        self_loops: bool = False,
    ) -> ModelParams:
        """
        Graph parameters matching these liabilities: group-2 banks keep the
        y2-share inside their group and owe the yc-share to group 1.
        """
        if self.single_group:
            return ModelParams.single(
                p2,
                self.p_sb2,
                weight_model=WeightModel.GROUP_SPLIT,
                eta_mode=eta_mode,
                self_loops=self_loops,
            )
        return ModelParams(
            gamma=self.gamma,
            p1=p1,
            p2=p2,
            pc1=0.0,
            pc2=pc,
            p_sb1=self.p_sb1,
            p_sb2=self.p_sb2,
            lambda1=1.0,
            lambda2=self.lambda2,
            eta_mode=eta_mode,
            weight_model=WeightModel.GROUP_SPLIT,
            self_loops=self_loops,
        )


class ShockReturns(Record):
    omega1: float
    omega2: float
    kd1: float
    ku1: float
    kd2: float
    ku2: float
    lbar1: float
    lbar2: float
    v1: float
    v2: float

    def __post_init__(self) -> None:
        for m in (1, 2):
            kd, lbar, ku = (getattr(self, f"{name}{m}") for name in ("kd", "lbar", "ku"))
            if not (kd <= lbar + 1e-12 and lbar <= ku + 1e-12):
                raise ContractViolation(f"group {m} returns must satisfy kd <= lbar <= ku")


class CaseTag(enum.Enum):
    RESILIENT = "resilient"
    PARTIAL = "partial"
    SYSTEMIC = "systemic"
    DOWN_WIPED = "down-wiped"
    DOWN_WIPED_SYSTEMIC = "down-wiped-systemic"
    NUMERIC = "numeric"


class BranchSolution(NamedTuple):
    x: float
    pd: float
    case_tag: CaseTag


class Measures(NamedTuple):
    es1: float | None
    es2: float
    sau2: float
    pd1: float | None
    pd2: float


class LimitSolution(Record):
    x1_inf: float | None
    x2_inf: float
    pd1: float | None
    pd2: float
    es1: float | None
    es2: float
    sau2: float
    case_tag_g1: CaseTag | None
    case_tag_g2: CaseTag
    mu1: float


class RegimeReport(Record):
    resilient_g1: bool | None
    resilient_g2: bool
    systemic_g2: bool
    delta_r: float
    delta_u: float
    burden: float
    slope_es1_sign: Sign
    slope_sau_sign: Sign
    g1_robust_applicable: bool


class GroupStats(Record):
    claims_mean: float
    default_frac: float
    surplus_mean: float
    sau_mean: float
    shock_frac: float


def portfolio(params: FinanceParams) -> ShockReturns:
    raw = params.k0 + params.y1 * params.p_sb1
    if not params.single_group:
        raw -= (1.0 - params.gamma) / params.gamma * params.yc
    if raw < 0.0:
        warnings.warn(
            f"group-1 risky investment {raw:.6g} clipped to 0, "
            "lending to group 2 exceeds the available wealth",
            OverLendingWarning,
            stacklevel=2,
        )
    omega1 = max(raw, 0.0)
    omega2 = params.k0 + params.y2 * params.p_sb2 + params.yc

    down = 1.0 + params.d - params.dc
    up = 1.0 + params.u - params.dc
    w = params.w
    if params.proportional_taxes:
        v1, v2 = params.kappa * omega1, params.kappa * omega2
    else:
        v1, v2 = params.v1 or 0.0, params.v2

    return ShockReturns(
        omega1=omega1,
        omega2=omega2,
        kd1=omega1 * down,
        ku1=omega1 * up,
        kd2=omega2 * down,
        ku2=omega2 * up,
        lbar1=omega1 * (w * down + (1.0 - w) * up),
        lbar2=omega2 * (w * down + (1.0 - w) * up),
        v1=v1,
        v2=v2,
    )


def _node_values(
    sample: GraphSample, params: FinanceParams, returns: ShockReturns
) -> dict[str, np.ndarray]:
    first = sample.groups == 1
    pick = lambda g1, g2: np.where(first, g1, g2).astype(float)
    return {
        "ybar": pick(params.ybar1, params.ybar2),
        "v": pick(returns.v1, returns.v2),
        "kd": pick(returns.kd1, returns.kd2),
        "ku": pick(returns.ku1, returns.ku2),
    }


class ShockDraw(NamedTuple):
    values: np.ndarray
    down: np.ndarray


BalanceSheets = Literal["realized", "limit"]


def bank_portfolios(sample: GraphSample, params: FinanceParams) -> np.ndarray:
    """
    Risky investment of every bank on this graph: wealth k0 plus the face
    value it borrowed minus the face value it lent, clipped at zero.

    Group-1 banks owe y1, group-2 banks owe y2 + yc. In the large-network
    limit the group means converge to ``portfolio(params)``.
    """
    first = sample.groups == 1
    owed2 = params.y2 if params.single_group else params.y2 + params.yc
    principal = np.where(first, params.y1, owed2).astype(float)
    borrowed = principal * sample.row_sums()
    lent = sample.weights.T @ principal
    raw = params.k0 + borrowed - np.asarray(lent, dtype=float).ravel()
    short = int(np.count_nonzero(raw < 0.0))
    if short:
        logger.debug("%d banks lent more than they hold, risky investment clipped to 0", short)
    return np.maximum(raw, 0.0)


def draw_shocks(
    sample: GraphSample,
    params: FinanceParams,
    seed: Seed,
    *,
    balance_sheets: BalanceSheets = "realized",
) -> ShockDraw:
    """
    Each bank independently gets the down return with probability w and the
    up return otherwise.

    :param balance_sheets: ``"realized"`` scales the returns by the bank's
        own risky investment on this graph, ``"limit"`` by its group value.
    """
    down = make_rng(seed).random(sample.n) < params.w
    if balance_sheets == "realized":
        omega = bank_portfolios(sample, params)
    elif balance_sheets == "limit":
        r = portfolio(params)
        omega = np.where(sample.groups == 1, r.omega1, r.omega2).astype(float)
    else:
        raise ConfigError(f"unknown balance sheets {balance_sheets!r}")
    factor = np.where(down, 1.0 + params.d - params.dc, 1.0 + params.u - params.dc)
    return ShockDraw(values=omega * factor, down=down)


def sample_shocks(
    sample: GraphSample,
    params: FinanceParams,
    seed: Seed,
    *,
    balance_sheets: BalanceSheets = "realized",
) -> np.ndarray:
    return draw_shocks(sample, params, seed, balance_sheets=balance_sheets).values


def finite_clearing_map(
    sample: GraphSample, shocks: np.ndarray, params: FinanceParams
) -> tuple[Callable[[np.ndarray], np.ndarray], np.ndarray]:
    """
    Clearing map X -> min{(K + W^T X - v)^+, ybar} and its box upper corner.
    """
    shocks = np.asarray(shocks, dtype=float)
    if shocks.shape != (sample.n,):
        raise ConfigError(f"expected {sample.n} shocks, got shape {shocks.shape}")
    if params.single_group != sample.params.single_group:
        raise ConfigError("graph and finance parameters disagree on single-group mode")
    if (
        sample.params.split_groups
        and not params.single_group
        and abs(sample.params.lambda2 - params.lambda2) > 1e-12
    ):
        raise ConfigError(
            f"graph lambda2={sample.params.lambda2} does not match "
            f"y2 / (y2 + yc) = {params.lambda2}"
        )

    values = _node_values(sample, params, portfolio(params))
    ybar = values["ybar"]
    base = shocks - values["v"]
    incoming = sparse.csr_matrix(sample.weights.T)

    def clearing(x: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(base + incoming @ x, 0.0), ybar)

    return clearing, ybar.copy()


def clearing_statistics(
    sample: GraphSample,
    shocks: np.ndarray,
    x: np.ndarray,
    params: FinanceParams,
    down: np.ndarray | None = None,
) -> dict[int, GroupStats]:
    """
    Per-group averages of incoming claims, defaults and surplus for a
    clearing vector.

    :param down: Mask of banks hit by the down return. Without it a bank
        counts as shocked when its return equals the group down value.
    """
    values = _node_values(sample, params, portfolio(params))
    shocks = np.asarray(shocks, dtype=float)
    claims = sample.weights.T @ np.asarray(x, dtype=float)
    surplus = np.maximum(shocks + claims - values["v"] - values["ybar"], 0.0)
    defaulted = x < values["ybar"] - DEFAULT_SLACK
    if down is None:
        down = (shocks == values["kd"]) & (values["kd"] != values["ku"])
    else:
        down = np.asarray(down, dtype=bool)
        if down.shape != (sample.n,):
            raise ConfigError(f"expected {sample.n} shock flags, got shape {down.shape}")

    stats = {}
    for m in (1, 2):
        in_group = sample.groups == m
        if not in_group.any():
            continue
        up = in_group & ~down
        stats[m] = GroupStats(
            claims_mean=float(claims[in_group].mean()),
            default_frac=float(defaulted[in_group].mean()),
            surplus_mean=float(surplus[in_group].mean()),
            sau_mean=float(surplus[up].mean()) if up.any() else 0.0,
            shock_frac=float(down[in_group].mean()),
        )
    return stats


def _expected_payment(
    x: float, kd: float, ku: float, v: float, ybar: float, w: float
) -> float:
    down = min(max(kd + x - v, 0.0), ybar)
    up = min(max(ku + x - v, 0.0), ybar)
    return w * down + (1.0 - w) * up


def _default_probability(
    inflow: float, kd: float, ku: float, v: float, ybar: float, w: float
) -> float:
    down = kd + inflow - v < ybar - DEFAULT_SLACK
    up = ku + inflow - v < ybar - DEFAULT_SLACK
    return w * down + (1.0 - w) * up


def limit_map(params: FinanceParams) -> tuple[Callable[[np.ndarray], np.ndarray], np.ndarray]:
    """
    Limit fixed-point map on (x1, x2), or on (x2,) for a single group.
    """
    r = portfolio(params)
    w, mu1 = params.w, (params.mu1 if not params.single_group else 0.0)
    c2 = (1.0 - params.p_sb2) * params.lambda2
    c1 = 1.0 - params.p_sb1
    ybar1, ybar2 = params.ybar1, params.ybar2

    def g2(x2: float) -> float:
        return c2 * _expected_payment(x2, r.kd2, r.ku2, r.v2, ybar2, w)

    if params.single_group:
        return (lambda x: np.array([g2(x[0])])), np.array([ybar2 * c2])

    def coupled(x: np.ndarray) -> np.ndarray:
        x1, x2 = x
        inflow = x1 + mu1 * x2
        return np.array([c1 * _expected_payment(inflow, r.kd1, r.ku1, r.v1, ybar1, w), g2(x2)])

    return coupled, np.array([ybar1 * c1, ybar2 * c2])


def limit_aggregates_numeric(params: FinanceParams) -> tuple[float | None, float]:
    fmap, upper = limit_map(params)
    solution = solve_limit_system(fmap, upper)
    if params.single_group:
        return None, float(solution[0])
    return float(solution[0]), float(solution[1])


def _select(
    candidates: dict[CaseTag, tuple[float, float]],
    primary: CaseTag | None,
    equation: Callable[[float], float],
    direct_pd: Callable[[float], float],
    cap: float,
    fallback: Callable[[], float],
) -> BranchSolution:
    """
    Keep the candidates that solve ``x = equation(x)`` and prefer, in order,
    a nominal default probability matching the direct one, the branch chosen
    by the thresholds, then the lower default probability.
    """
    valid = []
    for tag, (x, nominal_pd) in candidates.items():
        if not np.isfinite(x) or x < -SELF_CHECK or x > cap + SELF_CHECK:
            continue
        x = min(max(x, 0.0), cap)
        if abs(equation(x) - x) <= SELF_CHECK:
            pd = direct_pd(x)
            valid.append(((nominal_pd != pd, tag is not primary, nominal_pd), x, pd, tag))
    if valid:
        _, x, pd, tag = min(valid, key=lambda item: item[0])
        if primary is not None and tag is not primary:
            logger.debug("threshold branch %s rejected, using %s", primary, tag)
        return BranchSolution(x, pd, tag)

    logger.debug("no closed form applies, solving numerically")
    x = fallback()
    return BranchSolution(x, direct_pd(x), CaseTag.NUMERIC)


def _divide(numerator: float, denominator: float) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(np.float64(numerator) / np.float64(denominator))


def closed_form_g2(params: FinanceParams) -> BranchSolution:
    """
    Group-2 limit aggregate and default probability from the piecewise
    solution, following the small-shock (kd2 >= v2) or large-shock thresholds
    in lambda2.
    """
    r = portfolio(params)
    ybar, v, kd, ku, lbar = params.ybar2, r.v2, r.kd2, r.ku2, r.lbar2
    w, s, lam = params.w, params.p_sb2, params.lambda2
    c = (1.0 - s) * lam
    cap = ybar * c

    candidates: dict[CaseTag, tuple[float, float]] = {
        CaseTag.RESILIENT: (c * ybar, 0.0),
        CaseTag.PARTIAL: (_divide(c * (w * (kd - v) + (1 - w) * ybar), 1 - c * w), w),
        CaseTag.SYSTEMIC: (_divide(c * max(lbar - v, 0.0), 1 - c), 1.0),
    }
    primary: CaseTag | None = None
    if kd >= v:
        resilient_at = _divide(ybar + v - kd, ybar * (1 - s))
        beta0 = (
            _divide(ybar + v - ku, (ybar - w * (ku - kd)) * (1 - s))
            if ybar > w * (ku - kd)
            else 0.0
        )
        if lam >= resilient_at:
            primary = CaseTag.RESILIENT
        elif lam > beta0:
            primary = CaseTag.PARTIAL
        else:
            primary = CaseTag.SYSTEMIC
        logger.debug("small shock: resilient above %.6g, beta0 %.6g", resilient_at, beta0)
    elif ybar > w * (ku - kd):
        candidates[CaseTag.DOWN_WIPED] = (c * (1 - w) * ybar, w)
        candidates[CaseTag.DOWN_WIPED_SYSTEMIC] = (
            _divide(c * (1 - w) * max(ku - v, 0.0), 1 - c * (1 - w)),
            1.0,
        )
        beta1 = _divide(v - kd, ybar * (1 - w) * (1 - s))
        beta2 = _divide(ybar + v - ku, (ybar - w * (ku - kd)) * (1 - s))
        beta3 = _divide(v - kd, (1 - w) * (ku - kd) * (1 - s))
        beta4 = _divide(ybar - ku + v, ybar * (1 - w) * (1 - s))
        if beta4 < lam <= beta1:
            primary = CaseTag.DOWN_WIPED
        elif lam < min(beta3, beta4):
            primary = CaseTag.DOWN_WIPED_SYSTEMIC
        elif lam > max(beta1, beta2):
            primary = CaseTag.PARTIAL
        elif beta3 < lam < beta2:
            primary = CaseTag.SYSTEMIC
        logger.debug(
            "large shock: beta1..4 = %.6g %.6g %.6g %.6g", beta1, beta2, beta3, beta4
        )
    else:
        candidates = {}

    return _select(
        candidates,
        primary,
        lambda x: c * _expected_payment(x, kd, ku, v, ybar, w),
        lambda x: _default_probability(x, kd, ku, v, ybar, w),
        cap,
        lambda: limit_aggregates_numeric(params)[1],
    )


def closed_form_g1(params: FinanceParams, x2_inf: float) -> BranchSolution:
    """
    Group-1 limit aggregate given the group-2 one, coupled through
    beta = mu1 * x2_inf.
    """
    if params.single_group:
        raise ConfigError("a single-group network has no group 1")
    r = portfolio(params)
    ybar, v, kd, ku, lbar = params.ybar1, r.v1, r.kd1, r.ku1, r.lbar1
    w, s = params.w, params.p_sb1
    c = 1.0 - s
    beta = params.mu1 * x2_inf
    cap = ybar * c

    def equation(x: float) -> float:
        return c * _expected_payment(x + beta, kd, ku, v, ybar, w)

    def direct_pd(x: float) -> float:
        return _default_probability(x + beta, kd, ku, v, ybar, w)

    def numeric() -> float:
        return float(solve_limit_system(lambda x: np.array([equation(x[0])]), [cap])[0])

    if kd - v + beta < 0.0:
        return _select({}, None, equation, direct_pd, cap, numeric)

    e1 = v - kd + ybar * s
    e2 = v - lbar + s * (ybar + w * (kd - ku))
    if beta >= e1:
        primary = CaseTag.RESILIENT
    elif beta >= e2:
        primary = CaseTag.PARTIAL
    else:
        primary = CaseTag.SYSTEMIC
        if s == 0.0:
            raise OutsideHypothesesError("all-default group-1 branch needs p_sb1 > 0")

    candidates = {
        CaseTag.RESILIENT: (cap, 0.0),
        CaseTag.PARTIAL: (_divide((ybar * (1 - w) + w * (kd - v + beta)) * c, 1 - w * c), w),
    }
    if s > 0.0:
        candidates[CaseTag.SYSTEMIC] = ((lbar - v + beta) * c / s, 1.0)
    return _select(candidates, primary, equation, direct_pd, cap, numeric)


def measures(params: FinanceParams, x1_inf: float | None, x2_inf: float) -> Measures:
    r = portfolio(params)
    w = params.w

    def surplus(k: float, inflow: float, v: float, ybar: float) -> float:
        return max(k + inflow - v - ybar, 0.0)

    es2 = w * surplus(r.kd2, x2_inf, r.v2, params.ybar2) + (1 - w) * surplus(
        r.ku2, x2_inf, r.v2, params.ybar2
    )
    sau2 = surplus(r.ku2, x2_inf, r.v2, params.ybar2)
    pd2 = _default_probability(x2_inf, r.kd2, r.ku2, r.v2, params.ybar2, w)
    if x1_inf is None:
        return Measures(None, es2, sau2, None, pd2)

    inflow = x1_inf + params.mu1 * x2_inf
    es1 = w * surplus(r.kd1, inflow, r.v1, params.ybar1) + (1 - w) * surplus(
        r.ku1, inflow, r.v1, params.ybar1
    )
    pd1 = _default_probability(inflow, r.kd1, r.ku1, r.v1, params.ybar1, w)
    return Measures(es1, es2, sau2, pd1, pd2)


def solve_limit(params: FinanceParams) -> LimitSolution:
    """
    Closed-form limit aggregates (numeric where no closed form applies) with
    their performance measures.
    """
    g2 = closed_form_g2(params)
    g1: BranchSolution | None = None
    if not params.single_group:
        try:
            g1 = closed_form_g1(params, g2.x)
        except OutsideHypothesesError as exc:
            logger.info("%s; solving group 1 numerically", exc)
            fmap, upper = limit_map(params)
            x1 = float(solve_limit_system(lambda x: fmap(np.array([x[0], g2.x]))[:1], upper[:1])[0])
            g1 = BranchSolution(x1, 0.0, CaseTag.NUMERIC)

    result = measures(params, g1.x if g1 else None, g2.x)
    return LimitSolution(
        x1_inf=g1.x if g1 else None,
        x2_inf=g2.x,
        pd1=result.pd1,
        pd2=result.pd2,
        es1=result.es1,
        es2=result.es2,
        sau2=result.sau2,
        case_tag_g1=g1.case_tag if g1 else None,
        case_tag_g2=g2.case_tag,
        mu1=params.mu1,
    )


def _sign(value: float, tolerance: float = 1e-12) -> Sign:
    if abs(value) <= tolerance:
        return "0"
    return "+" if value > 0 else "-"


def classify_regime(
    params: FinanceParams, solution: LimitSolution | None = None
) -> RegimeReport:
    solution = solution or solve_limit(params)
    w = params.w
    delta_r = params.u * (1 - w) + params.d * w - params.r2
    delta_u = params.u - params.r2
    burden = params.dc + (params.kappa or 0.0)
    return RegimeReport(
        resilient_g1=None if solution.pd1 is None else solution.pd1 == 0.0,
        resilient_g2=solution.pd2 == 0.0,
        systemic_g2=solution.pd2 == 1.0,
        delta_r=delta_r,
        delta_u=delta_u,
        burden=burden,
        slope_es1_sign=_sign(burden - delta_r),
        slope_sau_sign=_sign(delta_u - burden),
        g1_robust_applicable=(
            params.proportional_taxes
            and not params.single_group
            and params.y1 * params.p_sb1 < params.y2 * params.p_sb2
        ),
    )


def theory_single_group(params: FinanceParams) -> tuple[float, float]:
    """
    Limit claim and expected surplus of a homogeneous network in which only
    the down-shocked banks default.
    """
    r = portfolio(params)
    ybar, v, kd, ku = params.ybar2, r.v2, r.kd2, r.ku2
    w, s = params.w, params.p_sb2
    if not v > kd:
        raise OutsideHypothesesError(f"needs v2 > kd2, got v2={v}, kd2={kd}")
    x = (ybar * (1 - w) + (kd - v) * w) / (1 - w * (1 - s)) * (1 - s)
    if w > 0 and not 0.0 < kd + x - v < ybar:
        raise OutsideHypothesesError("down-shocked banks do not default partially")
    if ku + x - v < ybar:
        raise OutsideHypothesesError("up-shocked banks do not pay in full")
    return x, (ku - v + x - ybar) * (1 - w)
