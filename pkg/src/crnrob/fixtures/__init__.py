"""Bundled example networks (``builtin:NAME`` on the command line)."""

from __future__ import annotations

from importlib import resources

from ..model import ReactionNetwork
from ..parser import NetworkSource, parse_network

NAMES = (
    "archetypal",
    "archetypal_mod",
    "envz_ompr",
    "envz_ompr_mod",
    "futile_cycle",
    "futile_cycle_mod",
)


def fixture_text(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
    return resources.files(__package__).joinpath(f"{name}.crn").read_text(encoding="utf-8")


def load_fixture(name: str) -> ReactionNetwork:
    return parse_network(NetworkSource(fixture_text(name), f"builtin:{name}"))
