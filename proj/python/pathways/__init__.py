"""Energy transition game engine.

Actions, records, state views and score cards are plain dicts with the same
field names as the HTTP API.
"""

from ._pathways import (
    Engine,
    PathwaysError,
    Service,
    bundled_scripts,
    calibrate,
    fit_linear,
    forecast,
    replay,
    run_script,
    run_script_text,
)

__all__ = [
    "Engine",
    "PathwaysError",
    "Service",
    "bundled_scripts",
    "calibrate",
    "fit_linear",
    "forecast",
    "replay",
    "run_script",
    "run_script_text",
]
