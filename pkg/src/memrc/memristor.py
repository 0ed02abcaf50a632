"""Synthetic nonvolatile memristor: odd-cubic current-voltage law.

The device is abstracted to its programmed state, labelled by the secant
resistance read at +100 mV, plus a polynomial i(v) = g1*v + g3*v**3 whose
coefficients are calibrated so that the 100 mV secant conductance equals
1 / r_low_voltage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Designed operating window of the low-voltage resistance, ohms.
R_WINDOW = (1.0e5, 1.1e6)

# Read voltage defining the state label (secant resistance at +100 mV).
READ_VOLTAGE = 0.1

# Fraction of the 100 mV secant conductance attributed to the cubic term.
DEFAULT_RHO = 0.5


@dataclass(frozen=True)
class MemristorState:
    """Programmed nonvolatile state, labelled by resistance at 100 mV."""

    r_low_voltage: float

    def __post_init__(self):
        r = self.r_low_voltage
        if not (isinstance(r, (int, float)) and math.isfinite(r) and r > 0):
            raise ValueError(f"r_low_voltage must be a positive finite number, got {r!r}")
        lo, hi = R_WINDOW
        if not (lo <= r <= hi):
            raise ValueError(
                f"r_low_voltage = {r:g} ohm outside the operating window [{lo:g}, {hi:g}] ohm"
            )


@dataclass(frozen=True)
class MemristorIV:
    """Odd-cubic i(v) law: i = g1*v + g3*v**3, calibrated at 100 mV."""

    g1: float  # linear conductance coefficient, siemens
    g3: float  # cubic coefficient, A/V^3
    state: MemristorState

    def __post_init__(self):
        if self.g1 < 0 or self.g3 < 0:
            raise ValueError("g1 and g3 must be non-negative")
        if self.g1 == 0 and self.g3 == 0:
            raise ValueError("g1 and g3 cannot both be zero")
        g_read = self.g1 + self.g3 * READ_VOLTAGE**2
        target = 1.0 / self.state.r_low_voltage
        if abs(g_read - target) > 1e-12 * target:
            raise ValueError(
                "coefficients violate the 100 mV calibration identity: "
                f"g1 + g3*(0.1)^2 = {g_read:.6e} S, expected {target:.6e} S"
            )


def build_model(state: MemristorState, rho: float = DEFAULT_RHO) -> MemristorIV:
    """Construct the calibrated cubic model for a programmed state.

    ``rho`` is the fraction of the 100 mV secant conductance carried by the
    cubic term; rho = 0 gives a purely linear device.
    """
    if not (0.0 <= rho < 1.0):
        raise ValueError(f"rho must lie in [0, 1), got {rho!r}")
    g_read = 1.0 / state.r_low_voltage
    g3 = rho * g_read / READ_VOLTAGE**2
    g1 = (1.0 - rho) * g_read
    return MemristorIV(g1=g1, g3=g3, state=state)


def memristor_current(model: MemristorIV, v):
    """Device current i(v) = g1*v + g3*v**3.  Accepts scalars or arrays."""
    if np.isscalar(v) and not math.isfinite(v):
        raise ValueError(f"non-finite voltage {v!r}")
    return model.g1 * v + model.g3 * v * v * v


def memristor_slope(model: MemristorIV, v):
    """Differential conductance di/dv = g1 + 3*g3*v**2."""
    if np.isscalar(v) and not math.isfinite(v):
        raise ValueError(f"non-finite voltage {v!r}")
    return model.g1 + 3.0 * model.g3 * v * v
