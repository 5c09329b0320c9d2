"""Multi-hop underwater optical link BER simulation."""

import json as _json

from . import _core
from ._core import (
    LinkGeometry,
    WaterProperties,
    __version__,
    bit_frame_energies,
    e2e_ber_exact,
    e2e_ber_upper,
    gaussian_ber,
    ghq_rule,
    hop_ber,
    impulse_response,
    q_function,
    saddle_point_ber,
    scintillation_index,
    sigma_x_sq_from_si,
    simulate_hop,
    NumericalError,
    IoError,
)


def validate_config(config):
    """Resolve defaults and check a configuration (dict or JSON text)."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_core.validate_config(text))


def run_config(config, threads=1):
    """Run every sweep of a configuration and return the report as a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_core.run_config(text, threads))


__all__ = [
    "IoError",
    "NumericalError",
    "LinkGeometry",
    "WaterProperties",
    "__version__",
    "bit_frame_energies",
    "e2e_ber_exact",
    "e2e_ber_upper",
    "gaussian_ber",
    "ghq_rule",
    "hop_ber",
    "impulse_response",
    "q_function",
    "run_config",
    "saddle_point_ber",
    "scintillation_index",
    "sigma_x_sq_from_si",
    "simulate_hop",
    "validate_config",
]
