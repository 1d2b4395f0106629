"""Run-time configuration read from the environment."""

import os

DEFAULT_DEGREE_CAP = 3


def degree_cap() -> int:
    """Highest form degree the library will build (``NCFLAT_DEGREE_CAP``)."""
    raw = os.environ.get("NCFLAT_DEGREE_CAP")
    if raw is None or raw == "":
        return DEFAULT_DEGREE_CAP
    cap = int(raw)
    if cap < 1:
        raise ValueError("NCFLAT_DEGREE_CAP must be at least 1")
    return cap
