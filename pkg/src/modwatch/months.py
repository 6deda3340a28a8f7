"""Calendar-month arithmetic on "YYYY-MM" strings.

Months are passed around as strings because they sort correctly, read well
in JSON/CSV artifacts, and round-trip losslessly. Arithmetic goes through a
flat month index (year*12 + month-1).
"""

from __future__ import annotations

import re
from datetime import datetime, timezone

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


def parse_month(text: str) -> str:
    """Validate a "YYYY-MM" string and return it normalized."""
    m = _MONTH_RE.match(text.strip())
    if not m or not (1 <= int(m.group(2)) <= 12):
        raise ValueError(f"not a YYYY-MM month: {text!r}")
    return m.group(0)


def month_index(month: str) -> int:
    m = _MONTH_RE.match(month)
    if not m:
        raise ValueError(f"not a YYYY-MM month: {month!r}")
    return int(m.group(1)) * 12 + int(m.group(2)) - 1


def index_month(idx: int) -> str:
    return f"{idx // 12:04d}-{idx % 12 + 1:02d}"


def add_months(month: str, k: int) -> str:
    return index_month(month_index(month) + k)


def months_between(earlier: str, later: str) -> int:
    """Whole months from `earlier` to `later` (negative if later < earlier)."""
    return month_index(later) - month_index(earlier)


def month_range(start: str, end: str) -> list[str]:
    """Inclusive list of months from start to end."""
    lo, hi = month_index(start), month_index(end)
    if hi < lo:
        return []
    return [index_month(i) for i in range(lo, hi + 1)]


def month_of_timestamp(epoch_seconds: int) -> str:
    dt = datetime.fromtimestamp(epoch_seconds, tz=timezone.utc)
    return f"{dt.year:04d}-{dt.month:02d}"


def timestamp_of_month(month: str, day: int = 1) -> int:
    """Epoch seconds at 00:00 UTC on `day` of the month (fixture helper)."""
    idx = month_index(month)
    return int(datetime(idx // 12, idx % 12 + 1, day, tzinfo=timezone.utc).timestamp())
