"""Two-level time grid and regression-problem assembly.

A session splits into I non-overlapping windows of ``window_seconds``;
each window splits into K sub-windows of ``subwindow_seconds``. Every
(date, window) pair becomes one regression problem whose rows are the
window's usable sub-intervals: the design matrix holds an intercept
column of ones followed by the M imbalance components, and the response
is the contemporaneous mid-price change in ticks.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from .errors import IndivisibleGrid, TooFewRows
from .imbalance import MlofiSample
from .lobster import NS, SessionConfig


@dataclass(frozen=True)
class GridSpec:
    """Window and sub-window lengths in whole seconds."""

    window_seconds: int = 1800
    subwindow_seconds: int = 10

    def __post_init__(self):
        if self.window_seconds <= 0 or self.subwindow_seconds <= 0:
            raise IndivisibleGrid("window lengths must be positive")


@dataclass(frozen=True)
class Grid:
    """Exact integer-nanosecond boundaries for one trading session."""

    start_ns: int
    n_windows: int  # I
    n_sub: int  # K per window
    subwindow_ns: int

    @property
    def boundaries_ns(self) -> list[int]:
        """Flat list t_0..t_{I*K}; interval j is (t_{j-1}, t_j]."""
        total = self.n_windows * self.n_sub
        return [self.start_ns + j * self.subwindow_ns for j in range(total + 1)]

    def window_boundaries_ns(self, i: int) -> list[int]:
        """Boundaries t_{i,0}..t_{i,K} of window i (0-based)."""
        base = self.start_ns + i * self.n_sub * self.subwindow_ns
        return [base + k * self.subwindow_ns for k in range(self.n_sub + 1)]


def build_grid(config: SessionConfig, spec: GridSpec) -> Grid:
    """Validate divisibility and lay out the session grid."""
    session_len = config.length_seconds
    if session_len % spec.window_seconds != 0:
        raise IndivisibleGrid(
            f"session length {session_len}s is not divisible by "
            f"window length {spec.window_seconds}s"
        )
    if spec.window_seconds % spec.subwindow_seconds != 0:
        raise IndivisibleGrid(
            f"window length {spec.window_seconds}s is not divisible by "
            f"sub-window length {spec.subwindow_seconds}s"
        )
    return Grid(
        start_ns=config.start_ns,
        n_windows=session_len // spec.window_seconds,
        n_sub=spec.window_seconds // spec.subwindow_seconds,
        subwindow_ns=spec.subwindow_seconds * NS,
    )


@dataclass
class RegressionProblem:
    """Design matrix and response for one (date, window) fit."""

    date: dt.date
    window_index: int
    X: np.ndarray  # rows x (levels + 1); column 0 is the intercept
    y: np.ndarray  # mid-price change in ticks
    levels: int

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    def truncated(self, levels: int) -> "RegressionProblem":
        """Nested sub-design using only the first ``levels`` components."""
        if levels > self.levels:
            raise ValueError(f"problem holds {self.levels} levels, asked for {levels}")
        if levels == self.levels:
            return self
        return RegressionProblem(
            date=self.date,
            window_index=self.window_index,
            X=self.X[:, : levels + 1],
            y=self.y,
            levels=levels,
        )


@dataclass
class AssemblyStats:
    """Bookkeeping for dropped data during problem assembly."""

    discarded_intervals: int = 0
    dropped_windows: int = 0


def assemble_problems(
    samples: Iterable[MlofiSample | None],
    grid: Grid,
    levels: int,
    tick_size: int,
    date: dt.date,
    on_underdetermined: Literal["raise", "drop"] = "raise",
    stats: AssemblyStats | None = None,
) -> list[RegressionProblem]:
    """Group one day's interval samples into per-window problems.

    Discarded intervals (None entries) shrink the window's row count; a
    window with fewer than levels + 2 usable rows is underdetermined and
    either raises TooFewRows or is dropped and counted, per
    ``on_underdetermined``.
    """
    if stats is None:
        stats = AssemblyStats()
    by_window: list[list[MlofiSample]] = [[] for _ in range(grid.n_windows)]
    for sample in samples:
        if sample is None:
            stats.discarded_intervals += 1
            continue
        by_window[sample.window_index].append(sample)

    problems: list[RegressionProblem] = []
    y_scale = 2.0 * tick_size  # delta_p is twice the mid change in price units
    for i, rows in enumerate(by_window):
        if len(rows) < levels + 2:
            if on_underdetermined == "raise":
                raise TooFewRows(
                    f"{date} window {i}: {len(rows)} usable rows < {levels + 2}"
                )
            stats.dropped_windows += 1
            continue
        X = np.ones((len(rows), levels + 1), dtype=float)
        y = np.empty(len(rows), dtype=float)
        for r, s in enumerate(rows):
            X[r, 1:] = s.mlofi[:levels]
            y[r] = s.delta_p / y_scale
        problems.append(
            RegressionProblem(date=date, window_index=i, X=X, y=y, levels=levels)
        )
    return problems
