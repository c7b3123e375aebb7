"""Python bindings for the permsig signature-verification core."""

import json as _json

from ._permsig import *  # noqa: F401,F403
from ._permsig import PermsigError, run_protocol_json

__version__ = "0.1.0"


def run_protocol(features, n=5, seed=2016, nu=0.1, sigma_sq=10.0, jobs=1):
    """Enrollment/verification protocol over feature dicts; returns the report as a dict."""
    return _json.loads(run_protocol_json(list(features), n=n, seed=seed, nu=nu, sigma_sq=sigma_sq, jobs=jobs))
