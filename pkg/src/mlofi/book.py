"""Price-level limit order book engine.

Maintains bid and ask sides as price -> total depth maps plus an order
registry, replaying one event at a time. All prices are integers in units
of 1e-4 dollars (so one cent = 100 units); all state measured *after* an
event reflects that event's effect.

Depth can come from two pools: live orders seen arriving in the stream,
and anonymous depth seeded from a start-of-session snapshot. Cancellations
and executions that reference an order id we never saw are charged against
the anonymous pool at that price, provided it suffices.
"""

from __future__ import annotations

from bisect import bisect_left, insort
from dataclasses import dataclass
from enum import Enum

from .errors import InconsistentEvent, OneSidedBook


class EventKind(Enum):
    LIMIT_ARRIVAL = 1
    CANCEL_PARTIAL = 2
    CANCEL_FULL = 3
    EXECUTION_VISIBLE = 4
    EXECUTION_HIDDEN = 5
    CROSS_TRADE = 6
    HALT = 7


#: Kinds that carry a real resting-order reference.
ORDER_BEARING = frozenset(
    {
        EventKind.LIMIT_ARRIVAL,
        EventKind.CANCEL_PARTIAL,
        EventKind.CANCEL_FULL,
        EventKind.EXECUTION_VISIBLE,
        EventKind.EXECUTION_HIDDEN,
    }
)


class Side(Enum):
    BUY = 1
    SELL = -1


@dataclass(frozen=True)
class LobEvent:
    """One order-flow event.

    ``timestamp_ns`` is nanoseconds after midnight. For executions, ``side``
    is the side of the *resting* order that got hit (LOBSTER convention):
    a buy market order shows up as an execution of a resting sell.
    """

    timestamp_ns: int
    kind: EventKind
    order_id: int
    size: int
    price: int
    side: Side

    def __post_init__(self):
        if self.kind in ORDER_BEARING and self.size < 1:
            raise ValueError(f"size must be >= 1 for {self.kind.name}, got {self.size}")


@dataclass(frozen=True)
class LevelQuote:
    """Price and total resting size of one populated level."""

    price: int
    depth: int


@dataclass(frozen=True)
class DepthSnapshot:
    """Top-M view of both sides; absent levels are None, never zeros."""

    bids: tuple[LevelQuote | None, ...]
    asks: tuple[LevelQuote | None, ...]


@dataclass(frozen=True)
class MidQuote:
    """Mid-price and spread at an instant.

    ``mid_x2`` is best_ask + best_bid, i.e. twice the mid-price, kept as an
    exact integer so mid arithmetic never touches floating point. One tick
    ($0.01 = 100 price units) equals 200 mid_x2 units.
    """

    mid_x2: int
    spread: int

    @property
    def mid_dollars(self) -> float:
        return self.mid_x2 / 2e4

    @property
    def spread_dollars(self) -> float:
        return self.spread / 1e4


class BookState:
    """Mutable book; ``apply_event`` advances it one event at a time."""

    __slots__ = (
        "_bid_depth",
        "_ask_depth",
        "_bid_prices",
        "_ask_prices",
        "_anon_bid",
        "_anon_ask",
        "_orders",
        "event_seq",
        "seeded_executions",
    )

    def __init__(self):
        self._bid_depth: dict[int, int] = {}
        self._ask_depth: dict[int, int] = {}
        self._bid_prices: list[int] = []  # ascending; best bid = last
        self._ask_prices: list[int] = []  # ascending; best ask = first
        self._anon_bid: dict[int, int] = {}
        self._anon_ask: dict[int, int] = {}
        self._orders: dict[int, tuple[Side, int, int]] = {}
        self.event_seq = 0
        self.seeded_executions = 0

    @classmethod
    def from_snapshot(
        cls,
        bids: list[tuple[int, int]],
        asks: list[tuple[int, int]],
    ) -> "BookState":
        """Seed anonymous depth from a start-of-session snapshot."""
        state = cls()
        for price, depth in bids:
            if price <= 0 or depth <= 0:
                raise ValueError(f"bad seed bid level ({price}, {depth})")
            state._add(Side.BUY, price, depth)
            state._anon_bid[price] = state._anon_bid.get(price, 0) + depth
        for price, depth in asks:
            if price <= 0 or depth <= 0:
                raise ValueError(f"bad seed ask level ({price}, {depth})")
            state._add(Side.SELL, price, depth)
            state._anon_ask[price] = state._anon_ask.get(price, 0) + depth
        if state._bid_prices and state._ask_prices:
            if state._bid_prices[-1] >= state._ask_prices[0]:
                raise ValueError("seed snapshot is crossed")
        return state

    # -- depth bookkeeping -------------------------------------------------

    def _books(self, side: Side):
        if side is Side.BUY:
            return self._bid_depth, self._bid_prices, self._anon_bid
        return self._ask_depth, self._ask_prices, self._anon_ask

    def _add(self, side: Side, price: int, qty: int) -> None:
        depth, prices, _ = self._books(side)
        if price in depth:
            depth[price] += qty
        else:
            depth[price] = qty
            insort(prices, price)

    def _remove(self, side: Side, price: int, qty: int) -> None:
        depth, prices, _ = self._books(side)
        left = depth[price] - qty
        if left > 0:
            depth[price] = left
        else:
            del depth[price]
            prices.pop(bisect_left(prices, price))

    # -- queries -----------------------------------------------------------

    @property
    def best_bid(self) -> int | None:
        return self._bid_prices[-1] if self._bid_prices else None

    @property
    def best_ask(self) -> int | None:
        return self._ask_prices[0] if self._ask_prices else None

    def depth_at(self, side: Side, price: int) -> int:
        depth, _, _ = self._books(side)
        return depth.get(price, 0)

    def bid_levels(self) -> list[LevelQuote]:
        """All populated bid levels, best first."""
        return [LevelQuote(p, self._bid_depth[p]) for p in reversed(self._bid_prices)]

    def ask_levels(self) -> list[LevelQuote]:
        """All populated ask levels, best first."""
        return [LevelQuote(p, self._ask_depth[p]) for p in self._ask_prices]

    def live_order(self, order_id: int) -> tuple[Side, int, int] | None:
        return self._orders.get(order_id)

    # -- event application -------------------------------------------------

    def apply(self, ev: LobEvent) -> "BookState":
        """Apply one event in stream order; returns self (mutated).

        Hidden executions, cross trades and halts leave the visible book
        unchanged but still advance ``event_seq``.
        """
        idx = self.event_seq
        kind = ev.kind

        if kind is EventKind.LIMIT_ARRIVAL:
            if ev.order_id in self._orders:
                raise InconsistentEvent(idx, f"order id {ev.order_id} already live")
            if ev.side is Side.BUY:
                opp = self.best_ask
                if opp is not None and ev.price >= opp:
                    raise InconsistentEvent(idx, "buy limit crosses the ask")
            else:
                opp = self.best_bid
                if opp is not None and ev.price <= opp:
                    raise InconsistentEvent(idx, "sell limit crosses the bid")
            self._orders[ev.order_id] = (ev.side, ev.price, ev.size)
            self._add(ev.side, ev.price, ev.size)

        elif kind is EventKind.CANCEL_PARTIAL:
            self._reduce(ev, idx, full=False)

        elif kind is EventKind.CANCEL_FULL:
            self._reduce(ev, idx, full=True)

        elif kind is EventKind.EXECUTION_VISIBLE:
            # Executions must hit the front of the resting queue.
            front = self.best_bid if ev.side is Side.BUY else self.best_ask
            if front != ev.price:
                raise InconsistentEvent(
                    idx, f"execution at {ev.price} but best {ev.side.name} is {front}"
                )
            self._reduce(ev, idx, full=False, execution=True)

        elif kind in (EventKind.EXECUTION_HIDDEN, EventKind.CROSS_TRADE, EventKind.HALT):
            pass  # book-neutral by construction

        else:  # pragma: no cover - enum is closed
            raise InconsistentEvent(idx, f"unknown event kind {kind}")

        self.event_seq += 1
        return self

    def _reduce(self, ev: LobEvent, idx: int, full: bool, execution: bool = False) -> None:
        """Take ``ev.size`` shares off a resting order or the seeded pool."""
        rec = self._orders.get(ev.order_id)
        if rec is not None:
            side, price, size = rec
            if side is not ev.side or price != ev.price:
                raise InconsistentEvent(
                    idx,
                    f"order {ev.order_id} rests at {side.name}/{price}, "
                    f"event says {ev.side.name}/{ev.price}",
                )
            if full and ev.size != size:
                raise InconsistentEvent(
                    idx, f"full cancel of {ev.size} but order holds {size}"
                )
            if ev.size > size:
                raise InconsistentEvent(
                    idx, f"removal of {ev.size} exceeds resting size {size}"
                )
            if ev.size == size:
                del self._orders[ev.order_id]
            else:
                self._orders[ev.order_id] = (side, price, size - ev.size)
            self._remove(ev.side, ev.price, ev.size)
            return

        # Unseen order id: charge the anonymous (seeded) pool at that price.
        _, _, anon = self._books(ev.side)
        pool = anon.get(ev.price, 0)
        if ev.size > pool:
            what = "execution" if execution else "cancellation"
            raise InconsistentEvent(
                idx,
                f"{what} of unseen order {ev.order_id} needs {ev.size} "
                f"at {ev.price} but seeded depth is {pool}",
            )
        if ev.size == pool:
            del anon[ev.price]
        else:
            anon[ev.price] = pool - ev.size
        if execution:
            self.seeded_executions += 1
        self._remove(ev.side, ev.price, ev.size)


def apply_event(state: BookState, ev: LobEvent) -> BookState:
    """Apply one event and return the post-event book (same object)."""
    return state.apply(ev)


def level_snapshot(state: BookState, levels: int) -> DepthSnapshot:
    """Top-``levels`` quotes per side, padded with None beyond populated depth."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    bid_prices = state._bid_prices
    ask_prices = state._ask_prices
    nb, na = len(bid_prices), len(ask_prices)
    bids = tuple(
        LevelQuote(bid_prices[nb - 1 - m], state._bid_depth[bid_prices[nb - 1 - m]])
        if m < nb
        else None
        for m in range(levels)
    )
    asks = tuple(
        LevelQuote(ask_prices[m], state._ask_depth[ask_prices[m]]) if m < na else None
        for m in range(levels)
    )
    return DepthSnapshot(bids=bids, asks=asks)


def mid_and_spread(state: BookState) -> MidQuote:
    """Exact mid and spread; raises OneSidedBook if either side is empty."""
    bb, ba = state.best_bid, state.best_ask
    if bb is None or ba is None:
        raise OneSidedBook("book has an empty side; mid-price undefined")
    return MidQuote(mid_x2=ba + bb, spread=ba - bb)
