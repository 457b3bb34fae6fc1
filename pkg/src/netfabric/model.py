"""Reduced multi-resource topology schema and delta semantics.

A domain's infrastructure is a typed property graph: nodes (switches and
data-transfer hosts) expose ports with bandwidth capacity, VLAN label
ranges, and optional aliases naming peer ports in other domains.
Inter-domain connectivity is declared through those aliases; intra-domain
connectivity through explicit port-pair links.

Every type is an immutable value with construction-time invariants, and the
document encoding is canonical: content determines bytes exactly (sorted
keys, sorted collections), so If-Modified-Since caching and golden-file
comparisons are byte-stable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping

from .errors import (
    InvariantViolation,
    MalformedDocument,
    UnknownConnection,
    UnknownPort,
)

Urn = str

QOS_GUARANTEED = "guaranteedCapped"
QOS_SOFT = "softCapped"
QOS_BEST_EFFORT = "bestEffort"
QOS_CLASSES = frozenset({QOS_GUARANTEED, QOS_SOFT, QOS_BEST_EFFORT})

NODE_KINDS = frozenset({"switch", "dtn"})
VERBOSITIES = frozenset({"static", "summary", "full"})

VLAN_MIN = 1
VLAN_MAX = 4094

_URN_RE = re.compile(r"^urn:ogf:network:([A-Za-z0-9.\-_]+):(\d+):([^:\s]+)$")


def check_urn(urn: str) -> str:
    """Validate the hierarchical resource name grammar; returns the urn."""
    m = _URN_RE.match(urn)
    if not m:
        raise InvariantViolation(f"bad urn: {urn!r}")
    local = m.group(3)
    if any(not part for part in local.split("+")):
        raise InvariantViolation(f"bad urn (empty sub-id): {urn!r}")
    return urn


def urn_domain(urn: str) -> str:
    """The administrative domain a urn belongs to."""
    m = _URN_RE.match(urn)
    if not m:
        raise InvariantViolation(f"bad urn: {urn!r}")
    return m.group(1)


def canonical_json_bytes(obj: Any) -> bytes:
    """Canonical document encoding: sorted keys, 2-space indent, LF-terminated."""
    return (json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _require_keys(obj: Mapping[str, Any], what: str, required: set[str], optional: set[str] = frozenset()) -> None:
    if not isinstance(obj, Mapping):
        raise MalformedDocument(f"{what}: expected object, got {type(obj).__name__}")
    missing = required - obj.keys()
    if missing:
        raise MalformedDocument(f"{what}: missing fields {sorted(missing)}")
    unknown = obj.keys() - required - optional
    if unknown:
        raise MalformedDocument(f"{what}: unknown fields {sorted(unknown)}")


def _int_field(obj: Mapping[str, Any], what: str, key: str) -> int:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise MalformedDocument(f"{what}.{key}: expected integer, got {v!r}")
    return v


@dataclass(frozen=True, order=True)
class TimeInterval:
    """Half-open [start, end) at whole-second granularity."""

    start: int
    end: int

    def __post_init__(self):
        if not isinstance(self.start, int) or not isinstance(self.end, int):
            raise InvariantViolation("interval bounds must be integers")
        if self.start >= self.end:
            raise InvariantViolation(f"empty interval [{self.start}, {self.end})")

    @property
    def duration(self) -> int:
        return self.end - self.start

    def overlaps(self, other: "TimeInterval") -> bool:
        return self.start < other.end and other.start < self.end

    def covers_instant(self, t: int) -> bool:
        return self.start <= t < self.end


@dataclass(frozen=True)
class LabelRange:
    """Coalesced set of VLAN ids as sorted inclusive [lo, hi] intervals."""

    kind: str = "vlan"
    ranges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.kind != "vlan":
            raise InvariantViolation(f"unsupported label kind: {self.kind!r}")
        object.__setattr__(self, "ranges", tuple(tuple(r) for r in self.ranges))
        prev_hi = None
        for lo, hi in self.ranges:
            if not (VLAN_MIN <= lo <= hi <= VLAN_MAX):
                raise InvariantViolation(f"vlan range out of bounds: [{lo}, {hi}]")
            if prev_hi is not None and lo <= prev_hi + 1:
                raise InvariantViolation("label ranges must be sorted, disjoint, non-adjacent")
            prev_hi = hi

    @classmethod
    def coalesce(cls, intervals: Iterable[tuple[int, int]]) -> "LabelRange":
        """Build from arbitrary inclusive intervals, merging overlap/adjacency."""
        items = sorted((int(lo), int(hi)) for lo, hi in intervals)
        merged: list[list[int]] = []
        for lo, hi in items:
            if merged and lo <= merged[-1][1] + 1:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return cls("vlan", tuple((lo, hi) for lo, hi in merged))

    @classmethod
    def single(cls, lo: int, hi: int) -> "LabelRange":
        return cls("vlan", ((lo, hi),))

    def __contains__(self, vlan: int) -> bool:
        return any(lo <= vlan <= hi for lo, hi in self.ranges)

    def as_set(self) -> frozenset[int]:
        out: set[int] = set()
        for lo, hi in self.ranges:
            out.update(range(lo, hi + 1))
        return frozenset(out)

    def to_obj(self) -> dict[str, Any]:
        return {"kind": self.kind, "ranges": [list(r) for r in self.ranges]}

    @classmethod
    def from_obj(cls, obj: Any) -> "LabelRange":
        _require_keys(obj, "labels", {"kind", "ranges"})
        if not isinstance(obj["ranges"], list):
            raise MalformedDocument("labels.ranges: expected array")
        try:
            ranges = tuple((int(lo), int(hi)) for lo, hi in obj["ranges"])
        except (TypeError, ValueError):
            raise MalformedDocument(f"labels.ranges: bad interval list {obj['ranges']!r}") from None
        return cls(obj["kind"], ranges)


@dataclass(frozen=True)
class Port:
    urn: Urn
    capacity: int
    reservable: int
    labels: LabelRange
    swap_capable: bool = False
    alias: Urn | None = None

    def __post_init__(self):
        check_urn(self.urn)
        if not (0 <= self.reservable <= self.capacity):
            raise InvariantViolation(
                f"{self.urn}: reservable {self.reservable} outside [0, capacity {self.capacity}]"
            )
        if self.alias is not None:
            check_urn(self.alias)
            if urn_domain(self.alias) == urn_domain(self.urn):
                raise InvariantViolation(f"{self.urn}: alias {self.alias} is not in a different domain")

    def to_obj(self) -> dict[str, Any]:
        obj: dict[str, Any] = {
            "urn": self.urn,
            "capacity": self.capacity,
            "reservable": self.reservable,
            "labels": self.labels.to_obj(),
            "swap_capable": self.swap_capable,
        }
        if self.alias is not None:
            obj["alias"] = self.alias
        return obj

    @classmethod
    def from_obj(cls, obj: Any) -> "Port":
        _require_keys(obj, "port", {"urn", "capacity", "reservable", "labels", "swap_capable"}, {"alias"})
        if not isinstance(obj["swap_capable"], bool):
            raise MalformedDocument(f"port.swap_capable: expected boolean, got {obj['swap_capable']!r}")
        return cls(
            urn=obj["urn"],
            capacity=_int_field(obj, "port", "capacity"),
            reservable=_int_field(obj, "port", "reservable"),
            labels=LabelRange.from_obj(obj["labels"]),
            swap_capable=obj["swap_capable"],
            alias=obj.get("alias"),
        )


@dataclass(frozen=True)
class NodeDesc:
    urn: Urn
    kind: str
    ports: tuple[Port, ...]

    def __post_init__(self):
        check_urn(self.urn)
        if self.kind not in NODE_KINDS:
            raise InvariantViolation(f"{self.urn}: unknown node kind {self.kind!r}")
        ports = tuple(sorted(self.ports, key=lambda p: p.urn))
        object.__setattr__(self, "ports", ports)
        domain = urn_domain(self.urn)
        seen: set[str] = set()
        for p in ports:
            if urn_domain(p.urn) != domain:
                raise InvariantViolation(f"port {p.urn} not in node domain {domain}")
            if p.urn in seen:
                raise InvariantViolation(f"duplicate port urn {p.urn}")
            seen.add(p.urn)

    def to_obj(self) -> dict[str, Any]:
        return {"urn": self.urn, "kind": self.kind, "ports": [p.to_obj() for p in self.ports]}

    @classmethod
    def from_obj(cls, obj: Any) -> "NodeDesc":
        _require_keys(obj, "node", {"urn", "kind", "ports"})
        if not isinstance(obj["ports"], list):
            raise MalformedDocument("node.ports: expected array")
        return cls(obj["urn"], obj["kind"], tuple(Port.from_obj(p) for p in obj["ports"]))


@dataclass(frozen=True)
class ReservationSegment:
    connection_id: str
    port_urn: Urn
    vlan: int
    bandwidth: int
    qos_class: str
    interval: TimeInterval

    def __post_init__(self):
        if not self.connection_id or not isinstance(self.connection_id, str):
            raise InvariantViolation("segment connection_id must be a non-empty string")
        check_urn(self.port_urn)
        if not (VLAN_MIN <= self.vlan <= VLAN_MAX):
            raise InvariantViolation(f"vlan {self.vlan} outside {VLAN_MIN}..{VLAN_MAX}")
        if self.bandwidth <= 0:
            raise InvariantViolation(f"bandwidth must be positive, got {self.bandwidth}")
        if self.qos_class not in QOS_CLASSES:
            raise InvariantViolation(f"unknown qos_class {self.qos_class!r}")

    def sort_key(self):
        return (self.connection_id, self.port_urn, self.vlan, self.interval.start, self.interval.end)

    def to_obj(self) -> dict[str, Any]:
        return {
            "connection_id": self.connection_id,
            "port_urn": self.port_urn,
            "vlan": self.vlan,
            "bandwidth": self.bandwidth,
            "qos_class": self.qos_class,
            "interval": [self.interval.start, self.interval.end],
        }

    @classmethod
    def from_obj(cls, obj: Any) -> "ReservationSegment":
        _require_keys(
            obj, "segment",
            {"connection_id", "port_urn", "vlan", "bandwidth", "qos_class", "interval"},
        )
        iv = obj["interval"]
        if not (isinstance(iv, list) and len(iv) == 2):
            raise MalformedDocument(f"segment.interval: expected [start, end], got {iv!r}")
        if any(isinstance(x, bool) or not isinstance(x, int) for x in iv):
            raise MalformedDocument(f"segment.interval: expected integer bounds, got {iv!r}")
        try:
            interval = TimeInterval(iv[0], iv[1])
        except InvariantViolation as exc:
            raise MalformedDocument(f"segment.interval: {exc}") from None
        return cls(
            connection_id=obj["connection_id"],
            port_urn=obj["port_urn"],
            vlan=_int_field(obj, "segment", "vlan"),
            bandwidth=_int_field(obj, "segment", "bandwidth"),
            qos_class=obj["qos_class"],
            interval=interval,
        )


@dataclass(frozen=True)
class DomainModel:
    domain_id: str
    version: int
    generated_at: int
    verbosity: str
    nodes: tuple[NodeDesc, ...]
    links: tuple[tuple[Urn, Urn], ...] = ()
    active_reservations: tuple[ReservationSegment, ...] = ()
    port_usage: tuple[tuple[Urn, int], ...] = ()

    def __post_init__(self):
        if not self.domain_id:
            raise InvariantViolation("domain_id must be non-empty")
        if self.verbosity not in VERBOSITIES:
            raise InvariantViolation(f"unknown verbosity {self.verbosity!r}")
        if self.version < 0:
            raise InvariantViolation("version must be non-negative")
        nodes = tuple(sorted(self.nodes, key=lambda n: n.urn))
        object.__setattr__(self, "nodes", nodes)

        urns: set[str] = set()
        ports: set[str] = set()
        for node in nodes:
            if urn_domain(node.urn) != self.domain_id:
                raise InvariantViolation(f"node {node.urn} not in domain {self.domain_id}")
            if node.urn in urns:
                raise InvariantViolation(f"duplicate node urn {node.urn}")
            urns.add(node.urn)
            for p in node.ports:
                if p.urn in urns or p.urn in ports:
                    raise InvariantViolation(f"duplicate urn {p.urn}")
                ports.add(p.urn)
        urns |= ports

        links = tuple(sorted(tuple(sorted(pair)) for pair in self.links))
        object.__setattr__(self, "links", links)
        seen_links: set[tuple[str, str]] = set()
        for a, b in links:
            if a == b:
                raise InvariantViolation(f"link endpoints must differ: {a}")
            if a not in ports or b not in ports:
                raise InvariantViolation(f"link references unknown port: {a} -- {b}")
            if (a, b) in seen_links:
                raise InvariantViolation(f"duplicate link {a} -- {b}")
            seen_links.add((a, b))

        if self.verbosity == "full":
            segs = tuple(sorted(self.active_reservations, key=lambda s: s.sort_key()))
            object.__setattr__(self, "active_reservations", segs)
            for seg in segs:
                if seg.port_urn not in ports:
                    raise InvariantViolation(f"reservation on unknown port {seg.port_urn}")
        elif self.active_reservations:
            raise InvariantViolation("active_reservations only allowed at verbosity=full")

        if self.verbosity == "summary":
            usage = tuple(sorted((u, int(v)) for u, v in dict(self.port_usage).items()))
            object.__setattr__(self, "port_usage", usage)
            for u, v in usage:
                if u not in ports:
                    raise InvariantViolation(f"usage for unknown port {u}")
                if v < 0:
                    raise InvariantViolation(f"negative usage on {u}")
        elif self.port_usage:
            raise InvariantViolation("port_usage only allowed at verbosity=summary")

    def iter_ports(self):
        for node in self.nodes:
            for port in node.ports:
                yield node, port

    def port(self, urn: Urn) -> Port:
        for _, p in self.iter_ports():
            if p.urn == urn:
                return p
        raise UnknownPort(f"{self.domain_id}: no port {urn}")

    def has_port(self, urn: Urn) -> bool:
        return any(p.urn == urn for _, p in self.iter_ports())

    def to_obj(self) -> dict[str, Any]:
        obj: dict[str, Any] = {
            "domain_id": self.domain_id,
            "version": self.version,
            "generated_at": self.generated_at,
            "verbosity": self.verbosity,
            "nodes": [n.to_obj() for n in self.nodes],
            "links": [list(pair) for pair in self.links],
        }
        if self.verbosity == "full":
            obj["active_reservations"] = [s.to_obj() for s in self.active_reservations]
        if self.verbosity == "summary":
            obj["port_usage"] = {u: v for u, v in self.port_usage}
        return obj

    @classmethod
    def from_obj(cls, obj: Any) -> "DomainModel":
        _require_keys(
            obj, "model",
            {"domain_id", "version", "generated_at", "verbosity", "nodes", "links"},
            {"active_reservations", "port_usage"},
        )
        verbosity = obj["verbosity"]
        if verbosity == "full" and "active_reservations" not in obj:
            raise MalformedDocument("model: verbosity=full requires active_reservations")
        if verbosity == "summary" and "port_usage" not in obj:
            raise MalformedDocument("model: verbosity=summary requires port_usage")
        if not isinstance(obj["nodes"], list) or not isinstance(obj["links"], list):
            raise MalformedDocument("model: nodes and links must be arrays")
        usage = obj.get("port_usage", {})
        if not isinstance(usage, Mapping):
            raise MalformedDocument("model.port_usage: expected object")
        return cls(
            domain_id=obj["domain_id"],
            version=_int_field(obj, "model", "version"),
            generated_at=_int_field(obj, "model", "generated_at"),
            verbosity=verbosity,
            nodes=tuple(NodeDesc.from_obj(n) for n in obj["nodes"]),
            links=tuple((a, b) for a, b in obj["links"]),
            active_reservations=tuple(
                ReservationSegment.from_obj(s) for s in obj.get("active_reservations", [])
            ),
            port_usage=tuple((u, v) for u, v in usage.items()),
        )


@dataclass(frozen=True)
class ModelDelta:
    """Addition/reduction change-set, the unit of the propagate/commit push."""

    delta_id: str
    target_domain: str
    base_model_version: int
    addition: tuple[ReservationSegment, ...] = ()
    reduction: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.delta_id:
            raise InvariantViolation("delta_id must be non-empty")
        if self.base_model_version < 0:
            raise InvariantViolation("base_model_version must be non-negative")
        addition = tuple(sorted(self.addition, key=lambda s: s.sort_key()))
        object.__setattr__(self, "addition", addition)
        reduction = tuple(sorted(set(self.reduction)))
        object.__setattr__(self, "reduction", reduction)
        added_ids = set()
        for seg in addition:
            if urn_domain(seg.port_urn) != self.target_domain:
                raise InvariantViolation(
                    f"addition segment {seg.port_urn} outside target domain {self.target_domain}"
                )
            added_ids.add(seg.connection_id)
        clash = added_ids & set(reduction)
        if clash:
            raise InvariantViolation(f"addition and reduction share connection ids {sorted(clash)}")

    def to_obj(self) -> dict[str, Any]:
        return {
            "delta_id": self.delta_id,
            "target_domain": self.target_domain,
            "base_model_version": self.base_model_version,
            "addition": [s.to_obj() for s in self.addition],
            "reduction": list(self.reduction),
        }

    @classmethod
    def from_obj(cls, obj: Any) -> "ModelDelta":
        _require_keys(
            obj, "delta",
            {"delta_id", "target_domain", "base_model_version", "addition", "reduction"},
        )
        if not isinstance(obj["addition"], list) or not isinstance(obj["reduction"], list):
            raise MalformedDocument("delta: addition and reduction must be arrays")
        for r in obj["reduction"]:
            if not isinstance(r, str):
                raise MalformedDocument(f"delta.reduction: expected string ids, got {r!r}")
        return cls(
            delta_id=obj["delta_id"],
            target_domain=obj["target_domain"],
            base_model_version=_int_field(obj, "delta", "base_model_version"),
            addition=tuple(ReservationSegment.from_obj(s) for s in obj["addition"]),
            reduction=tuple(obj["reduction"]),
        )


def serialize_model(model: DomainModel) -> bytes:
    return canonical_json_bytes(model.to_obj())


def parse_model(data: bytes | str) -> DomainModel:
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedDocument(f"model document does not parse: {exc}") from None
    return DomainModel.from_obj(obj)


def serialize_delta(delta: ModelDelta) -> bytes:
    return canonical_json_bytes(delta.to_obj())


def parse_delta(data: bytes | str) -> ModelDelta:
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedDocument(f"delta document does not parse: {exc}") from None
    return ModelDelta.from_obj(obj)


def apply_delta(model: DomainModel, delta: ModelDelta) -> DomainModel:
    """Apply a delta to a model: version bumps, reservations change at verbosity=full.

    Additions must name ports of this model; reductions must name known
    connections (checkable only at verbosity=full, where reservation content
    is carried).
    """
    if delta.target_domain != model.domain_id:
        raise InvariantViolation(
            f"delta targets {delta.target_domain}, model is {model.domain_id}"
        )
    for seg in delta.addition:
        if not model.has_port(seg.port_urn):
            raise UnknownPort(f"{model.domain_id}: no port {seg.port_urn}")

    if model.verbosity != "full":
        return replace(model, version=model.version + 1)

    present = {s.connection_id for s in model.active_reservations}
    for cid in delta.reduction:
        if cid not in present:
            raise UnknownConnection(f"{model.domain_id}: no connection {cid}")
    kept = tuple(s for s in model.active_reservations if s.connection_id not in set(delta.reduction))
    return replace(
        model,
        version=model.version + 1,
        active_reservations=kept + delta.addition,
    )
