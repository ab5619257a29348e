"""Python bindings for the hybrid projection iteration."""

import json
import pathlib

from ._core import (
    ConfigError,
    duality_map,
    inverse_duality_map,
    lyapunov,
    run_config,
    verify_config,
)

__all__ = [
    "ConfigError",
    "duality_map",
    "inverse_duality_map",
    "lyapunov",
    "run",
    "run_config",
    "verify",
    "verify_config",
]


def run(config, seed=None):
    """Run a config given as a path or a dict; the summary comes back parsed."""
    if isinstance(config, dict):
        result = run_config(json.dumps(config), "", seed)
    else:
        path = pathlib.Path(config)
        result = run_config(path.read_text(), str(path.parent), seed)
    result["summary"] = json.loads(result.pop("summary_json"))
    return result


def verify(config, samples=1000, seed=0):
    text = json.dumps(config) if isinstance(config, dict) else pathlib.Path(config).read_text()
    return [
        {"name": n, "passed": ok, "worst_slack": w, "tolerance": t}
        for n, ok, w, t in verify_config(text, samples, seed)
    ]
