"""Goodness-of-fit protocols, book summary statistics and report assembly.

The RMSE protocol mirrors 5-fold cross-validation: for each fold, fit on
the other four folds' pooled rows, record the RMSE on those same rows
(in-sample) and on the held-out fold (out-of-sample), then average both
across folds. Folds are contiguous time-ordered blocks. All RMSEs are in
ticks because the regression response is in ticks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .book import BookState, EventKind, Side, level_snapshot, mid_and_spread
from .errors import OneSidedBook, RankDeficient, TooFewRows
from .imbalance import compute_day_samples
from .inference import (
    CollinearityDiagnostics,
    LambdaSearch,
    RegressionFit,
    SignificanceSummary,
    contiguous_folds,
    diagnose_collinearity,
    fit_ols,
    fit_ridge,
    ridge_coefficients,
    select_lambda,
    significance_summary,
)
from .lobster import DaySlice, SessionConfig
from .sampling import (
    AssemblyStats,
    GridSpec,
    RegressionProblem,
    assemble_problems,
    build_grid,
)

OLS = "ols"
RIDGE = "ridge"


def pool_rows(
    problems: list[RegressionProblem], levels: int
) -> tuple[np.ndarray, np.ndarray]:
    """Stack problem rows in (date, window) order at the given depth."""
    ordered = sorted(problems, key=lambda p: (p.date, p.window_index))
    X = np.vstack([p.truncated(levels).X for p in ordered])
    y = np.concatenate([p.y for p in ordered])
    return X, y


def _ols_coefficients(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    # Minimum-norm least squares; the protocol tolerates ill-conditioning
    # because blown-up out-of-sample error is exactly the effect under study.
    coeffs, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    return coeffs


@dataclass
class RmsePoint:
    """Mean in/out-of-sample RMSE (ticks) at one depth."""

    method: str
    levels: int
    in_sample: float
    out_sample: float


def rmse_protocol(
    problems: list[RegressionProblem],
    method: str,
    levels: int,
    folds: int = 5,
    lam: float = 0.0,
    penalize_intercept: bool = True,
) -> RmsePoint:
    """One point of the in/out-of-sample RMSE curve."""
    X, y = pool_rows(problems, levels)
    n = X.shape[0]
    fold_idx = contiguous_folds(n, folds)
    if min(len(i) for i in fold_idx) < 1:
        raise TooFewRows(f"{n} rows cannot fill {folds} folds")
    in_total = 0.0
    out_total = 0.0
    for idx in fold_idx:
        mask = np.zeros(n, dtype=bool)
        mask[idx] = True
        Xtr, ytr = X[~mask], y[~mask]
        if method == OLS:
            coeffs = _ols_coefficients(Xtr, ytr)
        elif method == RIDGE:
            coeffs = ridge_coefficients(Xtr, ytr, lam, penalize_intercept)
        else:
            raise ValueError(f"unknown method {method!r}")
        in_resid = ytr - Xtr @ coeffs
        out_resid = y[mask] - X[mask] @ coeffs
        in_total += float(np.sqrt(np.mean(in_resid**2)))
        out_total += float(np.sqrt(np.mean(out_resid**2)))
    return RmsePoint(
        method=method,
        levels=levels,
        in_sample=in_total / folds,
        out_sample=out_total / folds,
    )


def rmse_curve(
    problems: list[RegressionProblem],
    method: str,
    max_levels: int,
    folds: int = 5,
    lam: float = 0.0,
    penalize_intercept: bool = True,
) -> list[RmsePoint]:
    return [
        rmse_protocol(problems, method, m, folds, lam, penalize_intercept)
        for m in range(1, max_levels + 1)
    ]


def fit_problem(
    problem: RegressionProblem,
    method: str,
    lam: float = 0.0,
    penalize_intercept: bool = True,
) -> RegressionFit:
    if method == OLS:
        return fit_ols(problem)
    if method == RIDGE:
        return fit_ridge(problem, lam, penalize_intercept)
    raise ValueError(f"unknown method {method!r}")


def fit_all_windows(
    problems: list[RegressionProblem],
    method: str,
    levels: int,
    lam: float = 0.0,
    penalize_intercept: bool = True,
) -> tuple[list[RegressionFit], int]:
    """Per-window fits at one depth; rank-deficient windows are skipped.

    Returns (fits, n_skipped).
    """
    fits: list[RegressionFit] = []
    skipped = 0
    for p in problems:
        try:
            fits.append(fit_problem(p.truncated(levels), method, lam, penalize_intercept))
        except RankDeficient:
            skipped += 1
    return fits, skipped


def adjusted_r2_curve(
    problems: list[RegressionProblem],
    method: str,
    max_levels: int,
    lam: float = 0.0,
    penalize_intercept: bool = True,
) -> list[float]:
    """Mean adjusted R^2 across window fits for each depth 1..max_levels."""
    curve = []
    for m in range(1, max_levels + 1):
        fits, _ = fit_all_windows(problems, method, m, lam, penalize_intercept)
        if not fits:
            raise TooFewRows(f"no usable windows at {m} levels")
        curve.append(float(np.mean([f.adj_r2 for f in fits])))
    return curve


@dataclass
class ImprovementTable:
    """Out-of-sample RMSE of the deep fits relative to the level-1 baseline."""

    ofi_rmse: float
    mlofi_ols_rmse: float | None
    mlofi_ridge_rmse: float | None
    improvement_ols: float | None  # 1 - mlofi/ofi
    improvement_ridge: float | None


def improvement_table(
    ols_points: list[RmsePoint] | None,
    ridge_points: list[RmsePoint] | None,
) -> ImprovementTable:
    """Build the improvement summary from the RMSE curves.

    The baseline is the level-1 OLS out-of-sample RMSE (ridge level-1 when
    OLS was not run).
    """
    base_points = ols_points if ols_points else ridge_points
    if not base_points:
        raise ValueError("need at least one RMSE curve")
    ofi = base_points[0].out_sample
    ols_deep = ols_points[-1].out_sample if ols_points else None
    ridge_deep = ridge_points[-1].out_sample if ridge_points else None
    return ImprovementTable(
        ofi_rmse=ofi,
        mlofi_ols_rmse=ols_deep,
        mlofi_ridge_rmse=ridge_deep,
        improvement_ols=None if ols_deep is None else 1.0 - ols_deep / ofi,
        improvement_ridge=None if ridge_deep is None else 1.0 - ridge_deep / ofi,
    )


def seasonality_profile(
    problems: list[RegressionProblem],
    method: str,
    levels: int,
    n_windows: int,
    lam: float = 0.0,
    penalize_intercept: bool = True,
) -> np.ndarray:
    """Mean fitted coefficients per intra-day window index.

    Returns an (n_windows, levels + 1) array; window indices with no
    usable fits hold NaN.
    """
    sums = np.zeros((n_windows, levels + 1))
    counts = np.zeros(n_windows, dtype=int)
    for p in problems:
        try:
            f = fit_problem(p.truncated(levels), method, lam, penalize_intercept)
        except RankDeficient:
            continue
        sums[p.window_index] += f.coeffs
        counts[p.window_index] += 1
    out = np.full((n_windows, levels + 1), np.nan)
    for i in range(n_windows):
        if counts[i] > 0:
            out[i] = sums[i] / counts[i]
    return out


# -- book summary statistics --------------------------------------------------


@dataclass
class BookSummary:
    """Mean mid, spread and per-level depths across the sample days."""

    mean_mid_dollars: float
    mean_spread_dollars: float
    mean_bid_depth: tuple[float, ...]  # levels 1..5
    mean_ask_depth: tuple[float, ...]
    weighting: str  # "duration" or "event"


@dataclass
class FlowConcentration:
    """Share of order-flow activity by distance from the best quotes."""

    count_pct: tuple[float, float, float]  # within spread, at best, deeper
    volume_pct: tuple[float, float, float]
    n_events: int


_FLOW_KINDS = frozenset(
    {
        EventKind.LIMIT_ARRIVAL,
        EventKind.CANCEL_PARTIAL,
        EventKind.CANCEL_FULL,
        EventKind.EXECUTION_VISIBLE,
    }
)


def _classify_flow(ev, state: BookState) -> int:
    """0 = within spread, 1 = at best, 2 = deeper; judged pre-event."""
    if ev.kind is EventKind.EXECUTION_VISIBLE:
        return 1  # executions always hit the front of the queue
    own_best = state.best_bid if ev.side is Side.BUY else state.best_ask
    if own_best is None:
        return 0  # improving an empty side
    if ev.price == own_best:
        return 1
    better = ev.price > own_best if ev.side is Side.BUY else ev.price < own_best
    return 0 if better else 2


def summarize_book(
    days: list[DaySlice],
    session: SessionConfig,
    depth_levels: int = 5,
    weighting: str = "duration",
) -> tuple[BookSummary, FlowConcentration]:
    """Replay the days to get depth/mid means and flow concentration.

    ``duration`` weighting holds each post-event state for the time until
    the next event (last event until session end); ``event`` weighting
    counts each event once. Instants with a one-sided book are skipped.
    Absent levels contribute zero depth.
    """
    if weighting not in ("duration", "event"):
        raise ValueError(f"unknown weighting {weighting!r}")
    w_total = 0.0
    mid_acc = 0.0
    spread_acc = 0.0
    bid_acc = np.zeros(depth_levels)
    ask_acc = np.zeros(depth_levels)
    counts = np.zeros(3, dtype=np.int64)
    volumes = np.zeros(3, dtype=np.int64)
    for day in days:
        state = day.seed.build_book() if day.seed else BookState()
        events = day.events
        n = len(events)
        for i, ev in enumerate(events):
            if ev.kind in _FLOW_KINDS:
                bucket = _classify_flow(ev, state)
                counts[bucket] += 1
                volumes[bucket] += ev.size
            state.apply(ev)
            try:
                mq = mid_and_spread(state)
            except OneSidedBook:
                continue
            if weighting == "duration":
                nxt = events[i + 1].timestamp_ns if i + 1 < n else session.end_ns
                w = (nxt - ev.timestamp_ns) / 1e9
                if w <= 0.0:
                    continue
            else:
                w = 1.0
            snap = level_snapshot(state, depth_levels)
            w_total += w
            mid_acc += w * mq.mid_x2 / 2e4
            spread_acc += w * mq.spread / 1e4
            for m in range(depth_levels):
                if snap.bids[m] is not None:
                    bid_acc[m] += w * snap.bids[m].depth
                if snap.asks[m] is not None:
                    ask_acc[m] += w * snap.asks[m].depth
    if w_total == 0.0:
        raise TooFewRows("no two-sided book states observed")
    n_flow = int(counts.sum())
    v_flow = int(volumes.sum())
    summary = BookSummary(
        mean_mid_dollars=mid_acc / w_total,
        mean_spread_dollars=spread_acc / w_total,
        mean_bid_depth=tuple(bid_acc / w_total),
        mean_ask_depth=tuple(ask_acc / w_total),
        weighting=weighting,
    )
    concentration = FlowConcentration(
        count_pct=tuple(100.0 * counts / n_flow) if n_flow else (0.0, 0.0, 0.0),
        volume_pct=tuple(100.0 * volumes / v_flow) if v_flow else (0.0, 0.0, 0.0),
        n_events=n_flow,
    )
    return summary, concentration


# -- full report ---------------------------------------------------------------


@dataclass
class EvaluationReport:
    """Everything the evaluate command writes out."""

    levels: int
    methods: list[str]
    folds: int
    n_days: int
    n_problems: int
    discarded_intervals: int
    dropped_windows: int
    rank_deficient_windows: int
    lambda_search: LambdaSearch | None
    significance: dict[str, SignificanceSummary]
    ofi_significance: SignificanceSummary | None
    diagnostics: CollinearityDiagnostics | None
    r2_curves: dict[str, list[float]]
    rmse_curves: dict[str, list[RmsePoint]]
    improvement: ImprovementTable
    seasonality: dict[str, np.ndarray]
    book_summary: BookSummary
    book_summary_event_weighted: BookSummary
    flow_concentration: FlowConcentration


def run_evaluation(
    days: list[DaySlice],
    session: SessionConfig,
    grid_spec: GridSpec,
    levels: int,
    methods: list[str],
    folds: int = 5,
    lambda_grid: np.ndarray | None = None,
    penalize_intercept: bool = True,
    lambda_mode: str = "pooled",
) -> EvaluationReport:
    """Ingest -> imbalance -> fits -> report, for one instrument.

    ``lambda_mode`` 'pooled' selects one penalty from all pooled rows;
    'per-window' re-selects per window for the significance tables (the
    RMSE protocol always uses the pooled penalty since it pools rows).
    """
    grid = build_grid(session, grid_spec)
    stats = AssemblyStats()
    problems: list[RegressionProblem] = []
    for day in sorted(days, key=lambda d: d.trading_date):
        comp = compute_day_samples(day, grid.boundaries_ns, grid.n_sub, levels)
        problems.extend(
            assemble_problems(
                comp.samples,
                grid,
                levels,
                session.tick_size,
                day.trading_date,
                on_underdetermined="drop",
                stats=stats,
            )
        )
    if not problems:
        raise TooFewRows("no usable regression windows in the input")
    problems.sort(key=lambda p: (p.date, p.window_index))

    search: LambdaSearch | None = None
    lam = 0.0
    if RIDGE in methods:
        X, y = pool_rows(problems, levels)
        search = select_lambda(X, y, folds, lambda_grid, penalize_intercept)
        lam = search.lambda_hat

    significance: dict[str, SignificanceSummary] = {}
    rank_skipped = 0
    for method in methods:
        if method == RIDGE and lambda_mode == "per-window":
            fits = []
            for p in problems:
                w_search = select_lambda(
                    p.X, p.y, folds, lambda_grid, penalize_intercept
                )
                fits.append(fit_ridge(p, w_search.lambda_hat, penalize_intercept))
        else:
            fits, skipped = fit_all_windows(
                problems, method, levels, lam, penalize_intercept
            )
            rank_skipped = max(rank_skipped, skipped)
        if not fits:
            raise TooFewRows(f"no usable {method} window fits")
        significance[method] = significance_summary(fits)

    ofi_sig: SignificanceSummary | None = None
    ofi_fits, _ = fit_all_windows(problems, OLS, 1)
    if ofi_fits:
        ofi_sig = significance_summary(ofi_fits)

    X_full, _ = pool_rows(problems, levels)
    diagnostics = diagnose_collinearity(X_full[:, 1:]) if levels >= 2 else None

    r2_curves = {
        method: adjusted_r2_curve(
            problems, method, levels, lam if method == RIDGE else 0.0, penalize_intercept
        )
        for method in methods
    }
    rmse_curves = {
        method: rmse_curve(
            problems,
            method,
            levels,
            folds,
            lam if method == RIDGE else 0.0,
            penalize_intercept,
        )
        for method in methods
    }
    improvement = improvement_table(rmse_curves.get(OLS), rmse_curves.get(RIDGE))
    seasonality = {
        method: seasonality_profile(
            problems,
            method,
            levels,
            grid.n_windows,
            lam if method == RIDGE else 0.0,
            penalize_intercept,
        )
        for method in methods
    }
    book_dur, concentration = summarize_book(days, session, weighting="duration")
    book_evt, _ = summarize_book(days, session, weighting="event")
    return EvaluationReport(
        levels=levels,
        methods=list(methods),
        folds=folds,
        n_days=len(days),
        n_problems=len(problems),
        discarded_intervals=stats.discarded_intervals,
        dropped_windows=stats.dropped_windows,
        rank_deficient_windows=rank_skipped,
        lambda_search=search,
        significance=significance,
        ofi_significance=ofi_sig,
        diagnostics=diagnostics,
        r2_curves=r2_curves,
        rmse_curves=rmse_curves,
        improvement=improvement,
        seasonality=seasonality,
        book_summary=book_dur,
        book_summary_event_weighted=book_evt,
        flow_concentration=concentration,
    )
