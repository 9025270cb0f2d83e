"""Python interface to the carl simulator.

Configs are plain dicts (or JSON strings) with the same keys the ``carl``
command-line tool reads.
"""

import json

import numpy as np

from . import _carl
from ._carl import (
    InvalidParameter,
    bessel_jn,
    bunching_fraction,
    jacobi_anger_residual,
    n_max_rule,
    order_parameter,
    resonance_kernel,
    selftest,
)

__version__ = "0.1.0"

__all__ = [
    "InvalidParameter",
    "bessel_jn",
    "bunching_fraction",
    "config_digest",
    "jacobi_anger_residual",
    "n_max_rule",
    "normalize_config",
    "order_parameter",
    "resonance_kernel",
    "selftest",
    "simulate",
    "steady_polarization",
    "sweep",
]


def _text(config):
    if config is None:
        return "{}"
    if isinstance(config, str):
        return config
    return json.dumps(config)


def normalize_config(config=None):
    """Return the config as a dict with every default filled in."""
    return json.loads(_carl.normalize_config(_text(config)))


def config_digest(config=None):
    return _carl.config_digest(_text(config))


def simulate(config=None):
    """Integrate one run; returns sampled series and the final state."""
    return _carl.simulate(_text(config))


def sweep(config=None, workers=None):
    """Gain spectrum over the config's detuning grid."""
    out = _carl.sweep(_text(config), workers)
    out["diverged"] = np.asarray(out["diverged"], dtype=bool)
    return out


def steady_polarization(config=None):
    return _carl.steady_polarization(_text(config))
