"""Shared fixtures: a valid-event-stream fuzzer and independent oracles.

The fuzzer keeps its own tiny mirror of the book so every cancellation or
execution it emits references a live resting order; streams cover all
event kinds, including book-neutral ones and same-timestamp bursts.
"""

from __future__ import annotations

import numpy as np

from mlofi.book import BookState, DepthSnapshot, EventKind, LobEvent, Side

TICK = 100
NS = 1_000_000_000


class FuzzMirror:
    """Order-level mirror used only to keep generated streams consistent."""

    def __init__(self):
        self.orders: dict[int, list] = {}  # id -> [side(+1/-1), price, size]
        self.levels: dict[tuple[int, int], int] = {}  # (side, price) -> depth

    def best(self, side: int) -> int | None:
        prices = [p for (s, p) in self.levels if s == side]
        if not prices:
            return None
        return max(prices) if side == 1 else min(prices)

    def add(self, oid: int, side: int, price: int, size: int):
        self.orders[oid] = [side, price, size]
        self.levels[(side, price)] = self.levels.get((side, price), 0) + size

    def reduce(self, oid: int, qty: int):
        side, price, size = self.orders[oid]
        if qty >= size:
            del self.orders[oid]
        else:
            self.orders[oid][2] = size - qty
        left = self.levels[(side, price)] - qty
        if left:
            self.levels[(side, price)] = left
        else:
            del self.levels[(side, price)]

    def orders_at(self, side: int, price: int) -> list[int]:
        return [oid for oid, (s, p, _) in self.orders.items() if s == side and p == price]


def fuzz_stream(
    rng: np.random.Generator,
    n_events: int,
    start_ts: int = 36_000 * NS,
    mid0: int = 500 * TICK,
    band: int = 6,
) -> list[LobEvent]:
    """A consistent random stream exercising every event kind."""
    mirror = FuzzMirror()
    events: list[LobEvent] = []
    next_id = 1
    ts = start_ts
    last_best = {1: mid0 - TICK, -1: mid0 + TICK}

    def emit(kind, oid, size, price, side):
        events.append(
            LobEvent(ts, kind, oid, size, price, Side.BUY if side == 1 else Side.SELL)
        )

    while len(events) < n_events:
        # Occasional same-timestamp bursts; otherwise strictly advancing.
        if rng.random() > 0.15:
            ts += int(rng.integers(1, 2 * NS))
        for s in (1, -1):
            b = mirror.best(s)
            if b is not None:
                last_best[s] = b
        choice = rng.random()
        side = 1 if rng.random() < 0.5 else -1
        if mirror.best(side) is None or choice < 0.45:
            # Limit arrival, anywhere from inside the spread to band ticks deep.
            opp = mirror.best(-side)
            anchor = opp if opp is not None else last_best[-side]
            price = anchor - side * int(rng.integers(1, band + 1)) * TICK
            if price < TICK:
                continue
            size = int(rng.integers(1, 21))
            emit(EventKind.LIMIT_ARRIVAL, next_id, size, price, side)
            mirror.add(next_id, side, price, size)
            next_id += 1
        elif choice < 0.60 and mirror.orders:
            oid = int(rng.choice(list(mirror.orders)))
            s, p, sz = mirror.orders[oid]
            if sz >= 2 and rng.random() < 0.5:
                take = int(rng.integers(1, sz))
                emit(EventKind.CANCEL_PARTIAL, oid, take, p, s)
                mirror.reduce(oid, take)
            else:
                emit(EventKind.CANCEL_FULL, oid, sz, p, s)
                mirror.reduce(oid, sz)
        elif choice < 0.85:
            best = mirror.best(side)
            if best is None:
                continue
            oid = int(rng.choice(mirror.orders_at(side, best)))
            sz = mirror.orders[oid][2]
            take = int(rng.integers(1, sz + 1))
            emit(EventKind.EXECUTION_VISIBLE, oid, take, best, side)
            mirror.reduce(oid, take)
        elif choice < 0.92:
            emit(EventKind.EXECUTION_HIDDEN, next_id, int(rng.integers(1, 21)),
                 last_best[side] or mid0, side)
            next_id += 1
        elif choice < 0.96:
            emit(EventKind.CROSS_TRADE, 0, int(rng.integers(1, 101)), mid0, side)
        else:
            emit(EventKind.HALT, 0, 1, 1, side)
    return events


def replay(events, levels: int, seed: BookState | None = None):
    """Replay a stream, yielding (event, before_snapshot, after_snapshot)."""
    from mlofi.book import level_snapshot

    state = seed if seed is not None else BookState()
    for ev in events:
        before = level_snapshot(state, levels)
        state.apply(ev)
        after = level_snapshot(state, levels)
        yield ev, before, after


# -- independent oracles ----------------------------------------------------


def oracle_flow_net(before: DepthSnapshot, after: DepthSnapshot, levels: int):
    """Sentinel re-implementation of the per-level case table.

    Absent bid levels price at -inf and absent ask levels at +inf, which
    collapses all absence cases into the ordinary three-way comparison.
    """
    inf = float("inf")
    net = []
    for m in range(levels):
        bp0, bd0 = (-inf, 0) if before.bids[m] is None else (
            before.bids[m].price, before.bids[m].depth)
        bp1, bd1 = (-inf, 0) if after.bids[m] is None else (
            after.bids[m].price, after.bids[m].depth)
        if bp1 > bp0:
            w = bd1
        elif bp1 == bp0:
            w = bd1 - bd0
        else:
            w = -bd0
        ap0, ad0 = (inf, 0) if before.asks[m] is None else (
            before.asks[m].price, before.asks[m].depth)
        ap1, ad1 = (inf, 0) if after.asks[m] is None else (
            after.asks[m].price, after.asks[m].depth)
        if ap1 > ap0:
            v = -ad0
        elif ap1 == ap0:
            v = ad1 - ad0
        else:
            v = ad1
        net.append(w - v)
    return tuple(net)


def mp_regression_oracle(X, y, lam=0.0, penalize_intercept=True):
    """High-precision normal-equations solve, coefficients and SEs.

    Uses 50-digit arithmetic so it is an independent check on the float64
    production path, not a reimplementation of it.
    """
    import mpmath as mp

    mp.mp.dps = 50
    n, p = X.shape
    Xm = mp.matrix(X.tolist())
    ym = mp.matrix([float(v) for v in y])
    A = Xm.T * Xm
    if lam:
        for j in range(p):
            if j == 0 and not penalize_intercept:
                continue
            A[j, j] += mp.mpf(lam)
    coeffs = mp.lu_solve(A, Xm.T * ym)
    resid = ym - Xm * coeffs
    sse = sum(resid[i] ** 2 for i in range(n))
    sigma2 = sse / (n - p)
    a_inv = A**-1
    xtx = Xm.T * Xm
    cov = a_inv * xtx * a_inv if lam else a_inv
    ses = [mp.sqrt(sigma2 * cov[j, j]) for j in range(p)]
    return (
        np.array([float(c) for c in coeffs]),
        np.array([float(s) for s in ses]),
    )
