"""Per-port time-interval accounting of bandwidth and VLAN allocations.

The calendar is the ground truth a resource manager adjudicates deltas
against, and the substrate every scheduling query reads. Four invariants
hold after every operation:

* guaranteed bound — at every instant, the sum of guaranteedCapped
  bandwidth (held and committed alike) never exceeds ``reservable``;
* soft bound — at every instant, the sum of softCapped bandwidth never
  exceeds ``overbook_factor * max(0, reservable - guaranteed_load)``;
* VLAN exclusivity — overlapping allocations never share a vlan id;
* label membership — every allocation's vlan belongs to the port's range.

``available_bandwidth`` is the per-class query primitive (guaranteed
headroom ignores soft load by design; admission via ``try_hold`` checks
every invariant, so it can be stricter than the query when overbooked
softCapped traffic is present). bestEffort is never debited.

Intervals are half-open ``[start, end)`` at one-second granularity; hold
expiry is inclusive at the expiry instant.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

from .errors import HoldExpired, InsufficientBandwidth, InvariantViolation, VlanConflict
from .model import (
    QOS_BEST_EFFORT,
    QOS_GUARANTEED,
    QOS_SOFT,
    LabelRange,
    ReservationSegment,
    TimeInterval,
    Urn,
)

HELD = "held"
COMMITTED = "committed"


@dataclass
class Allocation:
    """One admitted segment; ``held`` carries an expiry, ``committed`` does not."""

    segment: ReservationSegment
    state: str
    hold_expires_at: int | None = None

    def __post_init__(self):
        if self.state not in (HELD, COMMITTED):
            raise InvariantViolation(f"bad allocation state {self.state!r}")
        if self.state == HELD and self.hold_expires_at is None:
            raise InvariantViolation("held allocation requires hold_expires_at")
        if self.state == COMMITTED and self.hold_expires_at is not None:
            raise InvariantViolation("committed allocation must not carry an expiry")


class ReservationCalendar:
    """Single-writer ledger for one port; reads are pure."""

    def __init__(
        self,
        port_urn: Urn,
        reservable: int,
        labels: LabelRange,
        overbook_factor: float = 2.0,
    ):
        if reservable < 0:
            raise InvariantViolation("reservable must be non-negative")
        if overbook_factor <= 0:
            raise InvariantViolation("overbook_factor must be positive")
        self.port_urn = port_urn
        self.reservable = reservable
        self.labels = labels
        self.overbook_factor = overbook_factor
        # kept sorted by interval start; scans are O(n) worst case but the
        # bisect narrows the usual window-local queries to the few
        # overlapping entries.
        self._allocs: list[Allocation] = []
        self._starts: list[int] = []

    # -- internals ---------------------------------------------------------

    def _insert(self, alloc: Allocation) -> None:
        idx = bisect.bisect_right(self._starts, alloc.segment.interval.start)
        self._allocs.insert(idx, alloc)
        self._starts.insert(idx, alloc.segment.interval.start)

    def _remove_where(self, pred) -> list[Allocation]:
        removed = [a for a in self._allocs if pred(a)]
        if removed:
            self._allocs = [a for a in self._allocs if not pred(a)]
            self._starts = [a.segment.interval.start for a in self._allocs]
        return removed

    def overlapping(self, interval: TimeInterval) -> list[Allocation]:
        hi = bisect.bisect_left(self._starts, interval.end)
        return [a for a in self._allocs[:hi] if a.segment.interval.end > interval.start]

    def _loads(self, interval: TimeInterval) -> list[tuple[int, int, int]]:
        """Piecewise-constant (instant, guaranteed, soft) loads over the interval."""
        active = self.overlapping(interval)
        points = {interval.start}
        for a in active:
            iv = a.segment.interval
            if interval.start < iv.start < interval.end:
                points.add(iv.start)
            if interval.start < iv.end < interval.end:
                points.add(iv.end)
        out = []
        for t in sorted(points):
            g = s = 0
            for a in active:
                if a.segment.interval.covers_instant(t):
                    if a.segment.qos_class == QOS_GUARANTEED:
                        g += a.segment.bandwidth
                    elif a.segment.qos_class == QOS_SOFT:
                        s += a.segment.bandwidth
            out.append((t, g, s))
        return out

    # -- queries -----------------------------------------------------------

    def available_bandwidth(self, interval: TimeInterval, qos: str) -> int:
        """Largest constant bandwidth of the class admissible throughout the interval."""
        if qos == QOS_BEST_EFFORT:
            return self.reservable
        worst: float = self.reservable if qos == QOS_GUARANTEED else self.reservable * self.overbook_factor
        for _, g, s in self._loads(interval):
            if qos == QOS_GUARANTEED:
                head: float = self.reservable - g
            else:
                head = self.overbook_factor * max(0, self.reservable - g) - s
            worst = min(worst, head)
        return max(0, math.floor(worst))

    # Alias: the per-resource "maximum constant bandwidth over a time block"
    # primitive that path computation composes edge-wise.
    max_constant_bandwidth = available_bandwidth

    def _max_admissible(self, interval: TimeInterval, qos: str) -> int:
        """Largest bandwidth whose admission keeps *all* invariants."""
        if qos == QOS_BEST_EFFORT:
            return self.reservable
        worst: float = float(self.reservable)
        for _, g, s in self._loads(interval):
            if qos == QOS_GUARANTEED:
                # both the guaranteed bound and the soft bound (which shrinks
                # as guaranteed load grows) must survive the insertion
                head: float = self.reservable - g
                if s > 0:
                    head = min(head, self.reservable - g - s / self.overbook_factor)
            else:
                head = self.overbook_factor * max(0, self.reservable - g) - s
            worst = min(worst, head)
        return max(0, math.floor(worst))

    def available_labels(self, interval: TimeInterval) -> set[int]:
        used = {a.segment.vlan for a in self.overlapping(interval)}
        return set(self.labels.as_set()) - used

    # -- mutations ---------------------------------------------------------

    def try_hold(self, segment: ReservationSegment, hold_duration: int, now: int) -> Allocation:
        """Admit a segment as a hold, or raise with negotiation material.

        insufficient-bandwidth carries the maximum admissible rate;
        vlan-conflict carries the alternative vlans free over the interval.
        """
        if segment.port_urn != self.port_urn:
            raise InvariantViolation(f"segment for {segment.port_urn} offered to {self.port_urn}")
        if hold_duration <= 0:
            raise InvariantViolation("hold_duration must be positive")
        admissible = self._max_admissible(segment.interval, segment.qos_class)
        if segment.qos_class != QOS_BEST_EFFORT and segment.bandwidth > admissible:
            raise InsufficientBandwidth(
                f"{self.port_urn}: {segment.bandwidth} mbps requested, {admissible} admissible",
                max_mbps=admissible,
                port=self.port_urn,
            )
        free = self.available_labels(segment.interval)
        if segment.vlan not in free:
            raise VlanConflict(
                f"{self.port_urn}: vlan {segment.vlan} unavailable",
                alternatives=free,
                port=self.port_urn,
                vlan=segment.vlan,
            )
        alloc = Allocation(segment, HELD, now + hold_duration)
        self._insert(alloc)
        return alloc

    def insert_committed(self, segment: ReservationSegment, validate: bool = True) -> Allocation:
        """Insert an already-committed segment (model import / scratch debit)."""
        if validate:
            admissible = self._max_admissible(segment.interval, segment.qos_class)
            if segment.qos_class != QOS_BEST_EFFORT and segment.bandwidth > admissible:
                raise InvariantViolation(
                    f"{self.port_urn}: committed import oversubscribes ({segment.bandwidth} > {admissible})"
                )
            if segment.vlan not in self.available_labels(segment.interval):
                raise InvariantViolation(f"{self.port_urn}: committed import vlan clash ({segment.vlan})")
        alloc = Allocation(segment, COMMITTED)
        self._insert(alloc)
        return alloc

    def commit_allocation(self, alloc: Allocation) -> None:
        """held -> committed; committing an already-committed allocation is a no-op."""
        if alloc.state == COMMITTED:
            return
        if alloc not in self._allocs:
            raise HoldExpired(
                f"{self.port_urn}: hold for {alloc.segment.connection_id} no longer present",
                connection_id=alloc.segment.connection_id,
            )
        alloc.state = COMMITTED
        alloc.hold_expires_at = None

    def release(self, connection_id: str) -> int:
        """Drop every allocation of a connection; absent ids are a no-op."""
        return len(self._remove_where(lambda a: a.segment.connection_id == connection_id))

    def expire_holds(self, now: int) -> list[str]:
        """Drop holds with expiry at or before now; returns their connection ids."""
        gone = self._remove_where(
            lambda a: a.state == HELD and a.hold_expires_at is not None and a.hold_expires_at <= now
        )
        return [a.segment.connection_id for a in gone]

    # -- inspection --------------------------------------------------------

    @property
    def allocations(self) -> tuple[Allocation, ...]:
        return tuple(self._allocs)

    def committed_segments(self) -> list[ReservationSegment]:
        return sorted(
            (a.segment for a in self._allocs if a.state == COMMITTED),
            key=lambda s: s.sort_key(),
        )

    def clone(self) -> "ReservationCalendar":
        other = ReservationCalendar(self.port_urn, self.reservable, self.labels, self.overbook_factor)
        other._allocs = [
            Allocation(a.segment, a.state, a.hold_expires_at) for a in self._allocs
        ]
        other._starts = list(self._starts)
        return other

    def check_invariants(self) -> list[str]:
        """Exact boundary sweep of all four invariants; returns violations."""
        problems: list[str] = []
        label_set = self.labels.as_set()
        points = sorted(
            {a.segment.interval.start for a in self._allocs}
            | {a.segment.interval.end for a in self._allocs}
        )
        for t in points:
            g = sum(
                a.segment.bandwidth
                for a in self._allocs
                if a.segment.qos_class == QOS_GUARANTEED and a.segment.interval.covers_instant(t)
            )
            s = sum(
                a.segment.bandwidth
                for a in self._allocs
                if a.segment.qos_class == QOS_SOFT and a.segment.interval.covers_instant(t)
            )
            if g > self.reservable:
                problems.append(f"{self.port_urn}@{t}: guaranteed load {g} > reservable {self.reservable}")
            if s > self.overbook_factor * max(0, self.reservable - g):
                problems.append(f"{self.port_urn}@{t}: soft load {s} over bound")
        for i, a in enumerate(self._allocs):
            if a.segment.vlan not in label_set:
                problems.append(f"{self.port_urn}: vlan {a.segment.vlan} outside labels")
            for b in self._allocs[i + 1 :]:
                if (
                    a.segment.vlan == b.segment.vlan
                    and a.segment.interval.overlaps(b.segment.interval)
                ):
                    problems.append(
                        f"{self.port_urn}: vlan {a.segment.vlan} double-booked "
                        f"({a.segment.connection_id} vs {b.segment.connection_id})"
                    )
        return problems
