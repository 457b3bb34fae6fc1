"""Error taxonomy shared by every layer.

Two families:

* ``FabricError`` — failures that may cross an external interface. Each one
  carries a wire ``code`` drawn from the closed enumeration below and a
  structured ``detail`` payload; HTTP layers render them verbatim as error
  envelopes.
* ``ModelError`` — construction/parse-time failures of model documents.
  These never cross the wire as-is; servers that hit them while decoding a
  request surface ``malformed-intent`` instead.
"""

from __future__ import annotations

from typing import Any

# The closed set of wire error codes. Every error envelope on an external
# interface uses exactly one of these.
WIRE_CODES = frozenset(
    {
        "malformed-intent",
        "unknown-urn",
        "no-path",
        "no-label",
        "insufficient-bandwidth",
        "vlan-conflict",
        "hold-expired",
        "unknown-delta",
        "bad-state",
        "too-many-rounds",
        "no-feasible-window",
        "no-feasible-schedule",
    }
)


class FabricError(Exception):
    """Base for errors with a wire representation."""

    code = "bad-state"

    def __init__(self, message: str = "", **detail: Any):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.detail = detail

    def envelope(self) -> dict[str, Any]:
        detail = {k: v for k, v in self.detail.items() if v is not None}
        detail["message"] = self.message
        return {"code": self.code, "detail": detail}

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        if self.detail:
            return f"{self.message} {self.detail}"
        return self.message


class MalformedIntent(FabricError):
    code = "malformed-intent"


class InconsistentSchedule(MalformedIntent):
    """Schedule fields contradict each other; wire code stays malformed-intent."""


class UnknownUrn(FabricError):
    code = "unknown-urn"


class NoPath(FabricError):
    code = "no-path"


class NoLabel(FabricError):
    code = "no-label"


class InsufficientBandwidth(FabricError):
    code = "insufficient-bandwidth"

    def __init__(self, message: str = "", max_mbps: int = 0, **detail: Any):
        super().__init__(message, max_mbps=max_mbps, **detail)
        self.max_mbps = max_mbps


class VlanConflict(FabricError):
    code = "vlan-conflict"

    def __init__(self, message: str = "", alternatives: set[int] | None = None, **detail: Any):
        alts = sorted(alternatives or ())
        super().__init__(message, alternatives=alts, **detail)
        self.alternatives = set(alts)


class HoldExpired(FabricError):
    code = "hold-expired"


class UnknownDelta(FabricError):
    code = "unknown-delta"


class BadState(FabricError):
    code = "bad-state"


class TooManyRounds(FabricError):
    code = "too-many-rounds"


class NoFeasibleWindow(FabricError):
    code = "no-feasible-window"


class NoFeasibleSchedule(FabricError):
    code = "no-feasible-schedule"


_BY_CODE = {
    cls.code: cls
    for cls in (
        MalformedIntent,
        UnknownUrn,
        NoPath,
        NoLabel,
        InsufficientBandwidth,
        VlanConflict,
        HoldExpired,
        UnknownDelta,
        BadState,
        TooManyRounds,
        NoFeasibleWindow,
        NoFeasibleSchedule,
    )
}


def from_envelope(payload: dict[str, Any]) -> FabricError:
    """Rehydrate a FabricError from a wire envelope."""
    code = payload.get("code")
    detail = dict(payload.get("detail") or {})
    message = detail.pop("message", "")
    cls = _BY_CODE.get(code)
    if cls is None:
        raise ModelError(f"unknown error code in envelope: {code!r}")
    if cls is InsufficientBandwidth:
        return cls(message, max_mbps=detail.pop("max_mbps", 0), **detail)
    if cls is VlanConflict:
        return cls(message, alternatives=set(detail.pop("alternatives", ())), **detail)
    return cls(message, **detail)


class ModelError(ValueError):
    """Base for model document construction and parse failures."""


class MalformedDocument(ModelError):
    pass


class InvariantViolation(ModelError):
    pass


class UnknownPort(ModelError):
    pass


class UnknownConnection(ModelError):
    pass


class DuplicateDomain(ModelError):
    pass


class InvalidPath(ModelError):
    pass


class CorruptJournal(RuntimeError):
    """Persistence journal failed to parse; carries the failing byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset
