"""Frozen constants of the R-matrix layer, computed once by exact multiplication."""

from __future__ import annotations

import json
from importlib import resources

_FILE = "superspace_constants.json"


def load_all() -> list[dict]:
    text = resources.files(__package__).joinpath(_FILE).read_text()
    return json.loads(text)


def load_constants(N: int, m: int) -> dict | None:
    for rec in load_all():
        if rec["N"] == N and rec["m"] == m:
            return rec
    return None
