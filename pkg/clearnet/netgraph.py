from __future__ import annotations

import dataclasses
import enum
import logging
from typing import Any, Iterable, Mapping

import numpy as np
from scipy import sparse
from typing_extensions import Self

from .exceptions import ConfigError, ContractViolation, SamplingError, WeightError
from .fields import UNIT_INTERVAL
from .record import Record, attr

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 100
DENSE_LIMIT = 20_000
ROW_CHUNK = 512
ROW_SUM_TOLERANCE = 1e-12

Seed = int | np.random.SeedSequence


def make_rng(seed: Seed) -> np.random.Generator:
    """
    Counter-based generator for a seed or a spawned ``SeedSequence``.
    """
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


class EtaMode(enum.Enum):
    BERNOULLI = "bernoulli"
    CONSTANT = "constant"


class WeightModel(enum.Enum):
    SHARED_ALL = "shared_all"
    GROUP_SPLIT = "group_split"
    FIXED_DENOMINATOR = "fixed_denominator"


class ModelParams(Record):
    """
    Connectivity and weight parameters of the two-group liability graph.

    Group 1 holds the first ``n * gamma`` nodes. In single-group mode every
    node belongs to group 2 and the group-2 parameters apply.
    """

    gamma: float = attr(0.5, validate=UNIT_INTERVAL)
    p1: float = attr(validate=UNIT_INTERVAL)
    p2: float = attr(validate=UNIT_INTERVAL)
    pc1: float = attr(0.0, validate=UNIT_INTERVAL)
    pc2: float = attr(0.0, validate=UNIT_INTERVAL)
    p_sb1: float = attr(0.0, validate=UNIT_INTERVAL)
    p_sb2: float = attr(0.0, validate=UNIT_INTERVAL)
    lambda1: float = attr(1.0, validate=UNIT_INTERVAL)
    lambda2: float = attr(1.0, validate=UNIT_INTERVAL)
    eta_mode: EtaMode = attr(EtaMode.BERNOULLI)
    weight_model: WeightModel = attr(WeightModel.SHARED_ALL)
    # FixedDenominator only: use the group-split numerators and n*p_m, n*p_cm.
    fixed_split: bool = attr(False)
    single_group: bool = attr(False)
    self_loops: bool = attr(False)
    # Big-node to small-node fraction; carried but never randomized.
    eta_bs: float = attr(0.0, validate=UNIT_INTERVAL)

    def __post_init__(self) -> None:
        for name in ("gamma", "p1", "p2", "pc1", "pc2", "p_sb1", "p_sb2",
                     "lambda1", "lambda2", "eta_bs"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if not self.single_group and not 0.0 < self.gamma < 1.0:
            raise ConfigError("gamma must lie in (0, 1) for two-group networks")

        if self.split_groups:
            for m in self.groups:
                if self.p(m) <= 0.0:
                    raise ConfigError(f"p{m} must be positive for group-split weights")
                if self.pc(m) == 0.0 and self.lam(m) < 1.0:
                    raise ConfigError(
                        f"lambda{m} < 1 needs pc{m} > 0, otherwise rows lose mass"
                    )
        else:
            for m in self.groups:
                if self.gamma_p(m) <= 0.0:
                    raise ConfigError(f"derived connectivity gamma_p{m} must be positive")

    @classmethod
    def single(cls, p: float, p_sb: float = 0.0, **kwargs: Any) -> Self:
        """
        One homogeneous group: gamma = 1/2 with mirrored parameters and no
        cross-group lending.
        """
        return cls(
            gamma=0.5,
            p1=p,
            p2=p,
            pc1=0.0,
            pc2=0.0,
            p_sb1=p_sb,
            p_sb2=p_sb,
            single_group=True,
            **kwargs,
        )

    @property
    def groups(self) -> tuple[int, ...]:
        return (2,) if self.single_group else (1, 2)

    @property
    def split_groups(self) -> bool:
        return self.weight_model is WeightModel.GROUP_SPLIT or (
            self.weight_model is WeightModel.FIXED_DENOMINATOR and self.fixed_split
        )

    def p(self, m: int) -> float:
        return self.p1 if m == 1 else self.p2

    def pc(self, m: int) -> float:
        if self.single_group:
            return 0.0
        return self.pc1 if m == 1 else self.pc2

    def p_sb(self, m: int) -> float:
        return self.p_sb1 if m == 1 else self.p_sb2

    def lam(self, m: int) -> float:
        return self.lambda1 if m == 1 else self.lambda2

    def share(self, m: int) -> float:
        """
        Fraction of the nodes that belong to group ``m``.
        """
        if self.single_group:
            return 1.0 if m == 2 else 0.0
        return self.gamma if m == 1 else 1.0 - self.gamma

    def gamma_p(self, m: int) -> float:
        """
        Expected lender count of a group-``m`` borrower divided by n.
        """
        if self.single_group:
            return self.p2
        if m == 1:
            return self.gamma * self.p1 + (1.0 - self.gamma) * self.pc1
        return self.gamma * self.pc2 + (1.0 - self.gamma) * self.p2


def group_sizes(params: ModelParams, n: int) -> tuple[int, int]:
    if n < 1:
        raise ConfigError(f"n must be positive, got {n}")
    if params.single_group:
        return 0, n
    n1 = round(n * params.gamma)
    if abs(n * params.gamma - n1) > 1e-9:
        raise ConfigError(f"n * gamma = {n * params.gamma} is not an integer")
    return n1, n - n1


def group_labels(n1: int, n2: int) -> np.ndarray:
    return np.concatenate([np.full(n1, 1, dtype=np.int8), np.full(n2, 2, dtype=np.int8)])


@dataclasses.dataclass(frozen=True, eq=False)
class GraphSample:
    """
    One realization of the liability graph. Rows are borrowers and columns
    creditors; ``weights`` holds the small-node columns and ``weights_big``
    the big-node column.
    """

    params: ModelParams
    n1: int
    n2: int
    indicators: sparse.csr_matrix
    eta_sb: np.ndarray
    weights: sparse.csr_matrix
    weights_big: np.ndarray

    def __post_init__(self) -> None:
        self.eta_sb.setflags(write=False)
        self.weights_big.setflags(write=False)

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def groups(self) -> np.ndarray:
        return group_labels(self.n1, self.n2)

    def lender_counts(self) -> np.ndarray:
        return np.asarray(self.indicators.sum(axis=1)).ravel().astype(np.int64)

    def borrower_counts(self) -> np.ndarray:
        return np.asarray(self.indicators.sum(axis=0)).ravel().astype(np.int64)

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=1)).ravel() + self.weights_big

    def weight_matrix(self) -> sparse.csr_matrix:
        """
        The n x (n+1) weight matrix, big-node column last.
        """
        big = sparse.csr_matrix(self.weights_big.reshape(-1, 1))
        return sparse.hstack([self.weights, big], format="csr")

    def dense_indicators(self) -> np.ndarray:
        if self.n > DENSE_LIMIT:
            raise SamplingError(
                f"refusing a dense {self.n}x{self.n} matrix, limit is {DENSE_LIMIT}"
            )
        return self.indicators.toarray()

    def dump(self) -> dict[str, Any]:
        creditors = np.split(self.indicators.indices, self.indicators.indptr[1:-1])
        return {
            "params": self.params.dump(),
            "n1": self.n1,
            "n2": self.n2,
            "creditors": [row.tolist() for row in creditors],
            "eta_sb": self.eta_sb.tolist(),
        }

    @classmethod
    def load(cls, data: Mapping[str, Any]) -> Self:
        params = ModelParams.load(data["params"])
        n1, n2 = int(data["n1"]), int(data["n2"])
        n = n1 + n2
        creditors = data["creditors"]
        if len(creditors) != n or len(data["eta_sb"]) != n:
            raise ConfigError("graph sample rows do not match its group sizes")
        rows = np.repeat(np.arange(n), [len(row) for row in creditors])
        cols = np.fromiter(
            (col for row in creditors for col in row), dtype=np.int64, count=len(rows)
        )
        indicators = _indicator_matrix(rows, cols, n)
        eta_sb = np.asarray(data["eta_sb"], dtype=float)
        weights, weights_big = build_weights(indicators, eta_sb, params, n1=n1)
        return cls(params, n1, n2, indicators, eta_sb, weights, weights_big)


class RegularityReport(Record):
    max_dev_g1: float
    max_dev_g2: float
    set_e_sum_g1: float
    set_e_sum_g2: float
    isolated_borrowers: int


def _indicator_matrix(rows: np.ndarray, cols: np.ndarray, n: int) -> sparse.csr_matrix:
    data = np.ones(len(rows), dtype=np.int8)
    matrix = sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
    matrix.sum_duplicates()
    matrix.sort_indices()
    return matrix


def _sample_block(
    rng: np.random.Generator,
    row_start: int,
    row_stop: int,
    col_start: int,
    col_stop: int,
    p: float,
    self_loops: bool,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Independent Bernoulli(p) edges between a row range and a column range,
    drawn in row chunks.
    """
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    width = col_stop - col_start
    if p <= 0.0 or width == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)

    for start in range(row_start, row_stop, ROW_CHUNK):
        stop = min(start + ROW_CHUNK, row_stop)
        mask = rng.random((stop - start, width)) < p
        if not self_loops:
            own = np.arange(start, stop)
            inside = (own >= col_start) & (own < col_stop)
            mask[np.nonzero(inside)[0], own[inside] - col_start] = False
        r, c = np.nonzero(mask)
        rows.append(r + start)
        cols.append(c + col_start)
    return np.concatenate(rows), np.concatenate(cols)


def _sample_indicators(
    rng: np.random.Generator, params: ModelParams, n1: int, n2: int
) -> sparse.csr_matrix:
    n = n1 + n2
    blocks = [
        # (rows, cols, probability)
        ((0, n1), (0, n1), params.p1),
        ((0, n1), (n1, n), params.pc1),
        ((n1, n), (0, n1), params.pc2),
        ((n1, n), (n1, n), params.p2),
    ]
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    for (r0, r1), (c0, c1), p in blocks:
        if r0 == r1:
            continue
        r, c = _sample_block(rng, r0, r1, c0, c1, p, params.self_loops)
        rows.append(r)
        cols.append(c)
    return _indicator_matrix(np.concatenate(rows), np.concatenate(cols), n)


def _sample_eta(
    rng: np.random.Generator, params: ModelParams, n1: int, n2: int
) -> np.ndarray:
    p_sb = np.concatenate([np.full(n1, params.p_sb1), np.full(n2, params.p_sb2)])
    if params.eta_mode is EtaMode.CONSTANT:
        return p_sb
    return (rng.random(n1 + n2) < p_sb).astype(float)


def _split_counts(
    indicators: sparse.csr_matrix, labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    coo = indicators.tocoo()
    same = labels[coo.row] == labels[coo.col]
    n = indicators.shape[0]
    own = np.bincount(coo.row[same], minlength=n)
    cross = np.bincount(coo.row[~same], minlength=n)
    return coo.row, coo.col, own, cross


def build_weights(
    indicators: sparse.csr_matrix,
    eta_sb: np.ndarray,
    params: ModelParams,
    *,
    n1: int | None = None,
    strict: bool = True,
) -> tuple[sparse.csr_matrix, np.ndarray]:
    """
    Weights for each borrower row: the small-node block and the big-node column.

    :param n1: Size of group 1, inferred from ``params`` when omitted.
    :param strict: Raise ``WeightError`` for rows whose nonzero numerator has
        no creditor to go to. Otherwise those rows keep the missing mass
        unassigned.
    """
    n = indicators.shape[0]
    eta_sb = np.asarray(eta_sb, dtype=float)
    if eta_sb.shape != (n,):
        raise ConfigError(f"eta_sb must have length {n}")
    if np.any((eta_sb < 0.0) | (eta_sb > 1.0)):
        raise ConfigError("eta_sb must lie in [0, 1]")
    if n1 is None:
        n1 = group_sizes(params, n)[0]
    labels = group_labels(n1, n - n1)

    rows, cols, own, cross = _split_counts(indicators, labels)
    lam = np.where(labels == 1, params.lambda1, params.lambda2)
    pc_open = np.where(
        labels == 1, params.pc(1) > 0.0, params.pc(2) > 0.0
    ).astype(float)

    if params.split_groups:
        own_num = lam * (1.0 - eta_sb)
        cross_num = (1.0 - lam) * pc_open
        big = eta_sb * lam
    else:
        own_num = 1.0 - eta_sb
        cross_num = own_num
        big = eta_sb.copy()

    if params.weight_model is WeightModel.FIXED_DENOMINATOR:
        if params.split_groups:
            own_den = n * np.where(labels == 1, params.p(1), params.p(2))
            cross_den = n * np.where(labels == 1, params.pc(1), params.pc(2))
        else:
            own_den = n * np.where(labels == 1, params.gamma_p(1), params.gamma_p(2))
            cross_den = own_den
    elif params.split_groups:
        own_den, cross_den = own.astype(float), cross.astype(float)
    else:
        own_den = cross_den = (own + cross).astype(float)

    orphaned = ((own_den == 0) & (own_num > 0)) | ((cross_den == 0) & (cross_num > 0))
    if np.any(orphaned):
        bad = np.nonzero(orphaned)[0].tolist()
        if strict:
            raise WeightError(f"{len(bad)} borrower rows have no eligible creditor", bad)
        logger.warning("%d borrower rows keep unassigned liability mass", len(bad))

    with np.errstate(divide="ignore", invalid="ignore"):
        own_scale = np.where(own_den > 0, own_num / own_den, 0.0)
        cross_scale = np.where(cross_den > 0, cross_num / cross_den, 0.0)
    same = labels[rows] == labels[cols]
    data = np.where(same, own_scale[rows], cross_scale[rows])
    weights = sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
    weights.eliminate_zeros()
    weights.sort_indices()

    if strict and params.weight_model is not WeightModel.FIXED_DENOMINATOR:
        sums = np.asarray(weights.sum(axis=1)).ravel() + big
        if np.any(np.abs(sums - 1.0) > ROW_SUM_TOLERANCE):
            raise ContractViolation("weight rows do not sum to one")
    return weights, big


def _isolated_rows(
    indicators: sparse.csr_matrix, params: ModelParams, n1: int
) -> np.ndarray:
    """
    Rows that lack creditors for a share of their liabilities.
    """
    labels = group_labels(n1, indicators.shape[0] - n1)
    _, _, own, cross = _split_counts(indicators, labels)
    if not params.split_groups:
        return np.nonzero(own + cross == 0)[0]
    lam = np.where(labels == 1, params.lambda1, params.lambda2)
    pc_open = np.where(labels == 1, params.pc(1) > 0.0, params.pc(2) > 0.0)
    missing = (own == 0) | ((cross == 0) & pc_open & (lam < 1.0))
    return np.nonzero(missing)[0]


def sample_graph(
    params: ModelParams,
    n: int,
    seed: Seed,
    *,
    max_attempts: int = MAX_ATTEMPTS,
    reject_isolated: bool = True,
) -> GraphSample:
    """
    Draw an Erdos-Renyi two-group liability graph.

    Graphs with a borrower that has no eligible creditor are redrawn up to
    ``max_attempts`` times.
    """
    n1, n2 = group_sizes(params, n)
    rng = make_rng(seed)

    for attempt in range(1, max_attempts + 1):
        indicators = _sample_indicators(rng, params, n1, n2)
        eta_sb = _sample_eta(rng, params, n1, n2)
        isolated = _isolated_rows(indicators, params, n1)
        if len(isolated) and reject_isolated:
            logger.debug(
                "attempt %d: %d isolated borrowers, resampling", attempt, len(isolated)
            )
            continue
        weights, big = build_weights(
            indicators, eta_sb, params, n1=n1, strict=reject_isolated
        )
        return GraphSample(params, n1, n2, indicators, eta_sb, weights, big)

    raise SamplingError(
        f"every one of {max_attempts} graphs had an isolated borrower; "
        f"connectivity is too sparse for n={n}",
        attempts=max_attempts,
    )


def degree_window(mean: float, spread: float) -> tuple[int, int]:
    """
    Integer window ``mean +/- max(1, round(spread * mean))``.
    """
    half = max(1, round(spread * mean))
    centre = round(mean)
    return max(0, centre - half), centre + half


def _window_counts(
    rng: np.random.Generator, size: int, trials: int, p: float, bounds: tuple[int, int]
) -> np.ndarray:
    low, high = bounds
    counts = rng.binomial(trials, p, size)
    for _ in range(1000):
        outside = (counts < low) | (counts > high)
        if not outside.any():
            return counts
        counts[outside] = rng.binomial(trials, p, int(outside.sum()))
    raise SamplingError(f"degree window {bounds} is too unlikely for Binomial({trials}, {p})")


def _match_total(
    rng: np.random.Generator, counts: np.ndarray, total: int, bounds: tuple[int, int]
) -> np.ndarray | None:
    """
    Move ``counts`` one unit at a time, inside the window, until they add up
    to ``total``. None when the window cannot hold that many edges.
    """
    counts = counts.copy()
    low, high = bounds
    diff = total - int(counts.sum())
    while diff:
        room = np.nonzero(counts < high if diff > 0 else counts > low)[0]
        if room.size == 0:
            return None
        chosen = rng.choice(room, size=min(abs(diff), room.size), replace=False)
        counts[chosen] += 1 if diff > 0 else -1
        diff -= int(np.sign(diff)) * chosen.size
    return counts


def _uniform_lenders(
    rng: np.random.Generator, counts: np.ndarray, self_loops: bool
) -> tuple[np.ndarray, np.ndarray]:
    n = counts.size
    rows = np.repeat(np.arange(n), counts)
    cols = np.empty(rows.size, dtype=np.int64)
    start = 0
    for j, k in enumerate(counts.tolist()):
        if self_loops:
            chosen = rng.choice(n, size=k, replace=False)
        else:
            chosen = rng.choice(n - 1, size=k, replace=False)
            chosen[chosen >= j] += 1
        cols[start : start + k] = chosen
        start += k
    return rows, cols


def _pair_stubs(
    rng: np.random.Generator,
    row_counts: np.ndarray,
    col_counts: np.ndarray,
    self_loops: bool,
    tries: int = 200,
) -> tuple[np.ndarray, np.ndarray] | None:
    """
    Random bipartite pairing of borrower stubs with creditor stubs. Repeated
    pairs and self loops are repaired by swapping creditors with a random
    valid edge, which keeps every row and column count.
    """
    n = row_counts.size
    heads = np.repeat(np.arange(n), row_counts)
    tails = rng.permutation(np.repeat(np.arange(n), col_counts))
    keys = heads * n + tails
    order = np.argsort(keys, kind="stable")
    bad = np.zeros(keys.size, dtype=bool)
    bad[order[1:]] = keys[order[1:]] == keys[order[:-1]]
    if not self_loops:
        bad |= heads == tails
    present = set(keys[~bad].tolist())

    for e in np.nonzero(bad)[0].tolist():
        h_e, t_e = int(heads[e]), int(tails[e])
        for f in rng.integers(0, keys.size, tries).tolist():
            if bad[f]:
                continue
            h_f, t_f = int(heads[f]), int(tails[f])
            first, second = h_e * n + t_f, h_f * n + t_e
            if first == second or first in present or second in present:
                continue
            if not self_loops and (h_e == t_f or h_f == t_e):
                continue
            present.discard(h_f * n + t_f)
            present.update((first, second))
            tails[e], tails[f] = t_f, t_e
            bad[e] = False
            break
        else:
            return None
    return heads, tails


def _draw_regular(
    rng: np.random.Generator,
    n: int,
    p: float,
    lender_bounds: tuple[int, int],
    borrower_bounds: tuple[int, int] | None,
    self_loops: bool,
) -> tuple[np.ndarray, np.ndarray] | None:
    trials = n if self_loops else n - 1
    row_counts = _window_counts(rng, n, trials, p, lender_bounds)
    if borrower_bounds is None:
        return _uniform_lenders(rng, row_counts, self_loops)
    col_counts = _window_counts(rng, n, trials, p, borrower_bounds)
    col_counts = _match_total(rng, col_counts, int(row_counts.sum()), borrower_bounds)
    if col_counts is None:
        return None
    return _pair_stubs(rng, row_counts, col_counts, self_loops)


def sample_regular_graph(
    params: ModelParams,
    n: int,
    lender_bounds: tuple[int, int],
    borrower_bounds: tuple[int, int] | None,
    seed: Seed,
    *,
    max_attempts: int = MAX_ATTEMPTS,
) -> GraphSample:
    """
    Single-group graph whose lender counts (and optionally borrower counts)
    stay inside the given windows.

    Degrees follow the binomial law restricted to each window. Without a
    borrower window every row picks its creditors uniformly; with one the
    rows and columns are joined by a random stub pairing.
    """
    if not params.single_group:
        raise ConfigError("regular graphs are sampled for single-group networks only")
    n1, n2 = group_sizes(params, n)
    trials = n if params.self_loops else n - 1
    for bounds in (lender_bounds, borrower_bounds):
        if bounds is not None and not 0 <= bounds[0] <= bounds[1]:
            raise ConfigError(f"invalid degree window {bounds}")
        if bounds is not None and bounds[0] > trials:
            raise ConfigError(f"degree window {bounds} exceeds the {trials} possible partners")
    rng = make_rng(seed)

    for attempt in range(1, max_attempts + 1):
        edges = _draw_regular(
            rng, n, params.p2, lender_bounds, borrower_bounds, params.self_loops
        )
        if edges is None:
            logger.debug("attempt %d: degree windows not met, resampling", attempt)
            continue
        indicators = _indicator_matrix(*edges, n)
        if len(_isolated_rows(indicators, params, n1)):
            logger.debug("attempt %d: isolated borrower, resampling", attempt)
            continue
        eta_sb = _sample_eta(rng, params, n1, n2)
        weights, big = build_weights(indicators, eta_sb, params, n1=n1)
        return GraphSample(params, n1, n2, indicators, eta_sb, weights, big)

    raise SamplingError(
        f"no graph met lender window {lender_bounds} and borrower window "
        f"{borrower_bounds} in {max_attempts} attempts",
        attempts=max_attempts,
    )


def regularity_diagnostic(
    sample: GraphSample, params: ModelParams | None = None
) -> RegularityReport:
    """
    How far the lender counts sit from their asymptotic value n * gamma_p.
    Rows without lenders are counted as isolated and left out of the sums.
    """
    params = params or sample.params
    counts = sample.lender_counts().astype(float)
    labels = sample.groups
    stats: dict[str, float] = {}
    for m in (1, 2):
        in_group = labels == m
        reference = sample.n * params.gamma_p(m)
        values = counts[in_group & (counts > 0)]
        if values.size == 0 or reference <= 0:
            stats[f"max_dev_g{m}"] = 0.0
            stats[f"set_e_sum_g{m}"] = 0.0
            continue
        stats[f"max_dev_g{m}"] = float(np.max(np.abs(values / reference - 1.0)))
        stats[f"set_e_sum_g{m}"] = float(np.sum(np.abs(1.0 / values - 1.0 / reference)))
    return RegularityReport(
        isolated_borrowers=int(np.count_nonzero(counts == 0)), **stats
    )


def edge_frequencies(samples: Iterable[GraphSample]) -> dict[tuple[int, int], float]:
    """
    Empirical edge frequency per (borrower group, creditor group) block,
    pooled over samples. Diagonal entries are excluded unless self loops are
    allowed.
    """
    edges: dict[tuple[int, int], int] = {}
    slots: dict[tuple[int, int], int] = {}
    for sample in samples:
        labels = sample.groups
        coo = sample.indicators.tocoo()
        size = {1: sample.n1, 2: sample.n2}
        for a in (1, 2):
            for b in (1, 2):
                total = size[a] * size[b]
                if a == b and not sample.params.self_loops:
                    total -= size[a]
                if total <= 0:
                    continue
                hits = int(np.count_nonzero((labels[coo.row] == a) & (labels[coo.col] == b)))
                edges[(a, b)] = edges.get((a, b), 0) + hits
                slots[(a, b)] = slots.get((a, b), 0) + total
    return {block: edges[block] / slots[block] for block in slots}
