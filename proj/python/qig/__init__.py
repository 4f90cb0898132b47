"""Python bindings for the qig C++ core."""

import json as _json

from ._qig import *  # noqa: F401,F403
from ._qig import _run_json


def run_experiment(config):
    """Run one CLI experiment from a config dict; returns the JSON report as a dict."""
    return _json.loads(_run_json(_json.dumps(config)))
