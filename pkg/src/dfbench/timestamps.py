"""Timestamp canonicalisation: UTC, one-second resolution, ISO-8601 text."""

from __future__ import annotations

import re
from datetime import datetime, timezone

# Fractional seconds are dropped before parsing; offsets like +0100 gain a colon.
_FRACTION = re.compile(r"(\d{2}:\d{2}:\d{2})[.,]\d+")
_OFFSET = re.compile(r"([+-]\d{2})(\d{2})$")


def parse_timestamp(value) -> datetime | None:
    """Parse ISO-8601 text, a ``datetime`` or POSIX seconds into aware UTC.

    Naive inputs are taken to be UTC. Fractional seconds are truncated.
    Returns ``None`` for ``None`` and blank strings; raises ``ValueError``
    on anything else it cannot read.
    """
    if value is None:
        return None
    if isinstance(value, datetime):
        dt = value
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        dt = datetime.fromtimestamp(int(value), tz=timezone.utc)
    else:
        text = str(value).strip()
        if not text:
            return None
        if text.lstrip("-").isdigit():
            dt = datetime.fromtimestamp(int(text), tz=timezone.utc)
        else:
            if text.endswith(("Z", "z")):
                text = text[:-1] + "+00:00"
            text = _OFFSET.sub(r"\1:\2", _FRACTION.sub(r"\1", text))
            dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def canonical_timestamp(value) -> str | None:
    dt = parse_timestamp(value)
    if dt is None:
        return None
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")
