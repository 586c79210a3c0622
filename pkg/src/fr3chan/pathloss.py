"""Log-distance path loss, free-space loss and simple link-budget arithmetic.

All functions are pure.  Shadow fading is an explicit additive input here;
it is sampled in :mod:`fr3chan.lsp`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact

DEFAULT_EIRP_DBM = 43.0


@dataclass(frozen=True)
class LinkBudget:
    eirp_dbm: float = DEFAULT_EIRP_DBM
    rx_gain_dbi: float = 0.0
    noise_figure_db: float = 0.0
    bandwidth_hz: float = 400e6

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise DomainError("bandwidth_hz must be positive")


def fspl(d_m: float, f_hz: float) -> float:
    """Free-space path loss in dB at distance ``d_m`` and frequency ``f_hz``."""
    if not (d_m > 0 and f_hz > 0):
        raise DomainError(f"fspl needs positive distance and frequency, got {d_m}, {f_hz}")
    return 20.0 * math.log10(4.0 * math.pi * d_m * f_hz / SPEED_OF_LIGHT)


def path_loss(params, d_m: float, shadow_db: float = 0.0) -> float:
    """PL0 + 10 PLE log10(d/d0) + shadow, in dB."""
    if not d_m > 0:
        raise DomainError(f"distance must be positive, got {d_m}")
    return params.pl0_db + 10.0 * params.ple * math.log10(d_m / params.d0_m) + shadow_db


def max_range(params, max_pl_db: float, shadow_db: float = 0.0) -> float:
    """Distance at which :func:`path_loss` reaches ``max_pl_db``."""
    if params.ple == 0:
        raise DomainError("path-loss exponent is zero; range is undefined")
    return params.d0_m * 10.0 ** ((max_pl_db - params.pl0_db - shadow_db) / (10.0 * params.ple))


def received_power(budget: LinkBudget, pl_db: float) -> float:
    return budget.eirp_dbm - pl_db + budget.rx_gain_dbi
