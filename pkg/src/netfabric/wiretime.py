"""Wire timestamp handling.

Time values cross the northbound interface in three shapes:

* relative tokens — ``now``, ``+<n>d``, ``+<n>h``
* ISO-8601 with a UTC offset, tolerating unpadded date fields and compact
  offsets (``2018-9-01T10:00:00.000-0400``)
* raw epoch seconds (JSON number)

Internally everything is integer epoch seconds. Emission is always the
padded millisecond form with a colon offset, e.g.
``2018-09-01T10:00:00.000-04:00``.
"""

from __future__ import annotations

import re
from datetime import datetime, timedelta, timezone

from .errors import MalformedIntent

_RELATIVE_RE = re.compile(r"^\+(\d+)([dh])$")
_ISO_RE = re.compile(
    r"^(\d{4})-(\d{1,2})-(\d{1,2})"
    r"[Tt ](\d{1,2}):(\d{2}):(\d{2})(?:\.(\d{1,6}))?"
    r"(Z|z|[+-]\d{2}:?\d{2})?$"
)

_UNIT_SECONDS = {"d": 86400, "h": 3600}


def parse_iso(text: str) -> tuple[int, int]:
    """Parse an ISO-8601 timestamp, returning (epoch seconds, offset minutes).

    A missing offset is treated as UTC. Sub-second digits are truncated:
    the fabric works at whole-second granularity.
    """
    m = _ISO_RE.match(text.strip())
    if not m:
        raise MalformedIntent(f"unparseable timestamp: {text!r}")
    year, month, day, hour, minute, second = (int(m.group(i)) for i in range(1, 7))
    offs = m.group(8)
    if offs is None or offs in ("Z", "z"):
        offset_min = 0
    else:
        sign = 1 if offs[0] == "+" else -1
        digits = offs[1:].replace(":", "")
        offset_min = sign * (int(digits[:2]) * 60 + int(digits[2:]))
    try:
        dt = datetime(
            year, month, day, hour, minute, second,
            tzinfo=timezone(timedelta(minutes=offset_min)),
        )
    except ValueError as exc:
        raise MalformedIntent(f"invalid timestamp {text!r}: {exc}") from None
    return int(dt.timestamp()), offset_min


def resolve(value: object, now: int) -> int:
    """Resolve a wire time value (token, ISO string, or number) to epoch seconds."""
    if isinstance(value, bool):
        raise MalformedIntent(f"not a timestamp: {value!r}")
    if isinstance(value, (int, float)):
        return int(value)
    if isinstance(value, str):
        text = value.strip()
        if text == "now":
            return now
        rel = _RELATIVE_RE.match(text)
        if rel:
            return now + int(rel.group(1)) * _UNIT_SECONDS[rel.group(2)]
        return parse_iso(text)[0]
    raise MalformedIntent(f"not a timestamp: {value!r}")


def is_wire_time(value: object) -> bool:
    """True if the value is acceptable wherever a wire time is expected."""
    if isinstance(value, bool):
        return False
    if isinstance(value, (int, float)):
        return True
    if not isinstance(value, str):
        return False
    text = value.strip()
    return text == "now" or bool(_RELATIVE_RE.match(text)) or bool(_ISO_RE.match(text))


def format_iso(epoch: int, offset_min: int = 0) -> str:
    """Format epoch seconds as padded ISO-8601 with milliseconds and offset."""
    tz = timezone(timedelta(minutes=offset_min))
    dt = datetime.fromtimestamp(int(epoch), tz)
    sign = "+" if offset_min >= 0 else "-"
    mins = abs(offset_min)
    return (
        f"{dt.year:04d}-{dt.month:02d}-{dt.day:02d}"
        f"T{dt.hour:02d}:{dt.minute:02d}:{dt.second:02d}.000"
        f"{sign}{mins // 60:02d}:{mins % 60:02d}"
    )
