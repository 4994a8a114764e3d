"""PRACH preamble detection under flat Rayleigh fading with frequency offset.

Subpackages by role:

* `zadoffchu`, `correlation`: sequences and their correlation identities
* `scenario`, `channel`, `receiver`: occasion configuration and simulation
* `specfun`, `analytic`: the distribution family and every closed form
* `detect`: fixed-threshold, offset-aware, and noise-floor detectors
* `harness`: Monte Carlo driver, figure suites, CSV output
"""

from .scenario import (  # noqa: F401
    Device,
    PrachFormat,
    Scenario,
    fa_budget,
    load_scenario,
    noise_sigma_from_snr,
    parse_scenario,
    prach_format,
)

__all__ = [
    "Device",
    "PrachFormat",
    "Scenario",
    "fa_budget",
    "load_scenario",
    "noise_sigma_from_snr",
    "parse_scenario",
    "prach_format",
]

__version__ = "0.1.0"
