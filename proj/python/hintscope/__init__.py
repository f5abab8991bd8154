"""Python bindings for the hintscope client hints toolkit."""

from ._hintscope import (
    SchemaError,
    StatsError,
    analyze,
    bonferroni,
    chi_squared,
    chi_squared_sf,
    emulate,
    format_p,
    hints,
    is_tracker,
    max_level,
    parse_accept_ch,
    profiles,
    registrable_domain,
    score_login_candidate,
    suggest_hint_name,
)

__all__ = [
    "SchemaError",
    "StatsError",
    "analyze",
    "bonferroni",
    "chi_squared",
    "chi_squared_sf",
    "emulate",
    "format_p",
    "hints",
    "is_tracker",
    "max_level",
    "parse_accept_ch",
    "profiles",
    "registrable_domain",
    "score_login_candidate",
    "suggest_hint_name",
]
