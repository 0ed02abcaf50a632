"""Non-autonomous memristive chaotic circuit: sizing, equilibria, RK4 integration.

State equations (series R-L branch driven by u(t), shunt C in parallel with
the memristor and a negative conductance G_N):

    C dv/dt = i - G_N*v - i_mem(v)
    L di/dt = u - i*R - v

Integration is fixed-step classical RK4 with step boundaries aligned to the
drive discontinuities, so the drive is constant within every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .memristor import MemristorIV, memristor_current
from .waveform import Waveform

# Diagnostic runaway bounds, far outside physical operation.
V_RUNAWAY = 10.0  # volts
I_RUNAWAY = 1e-3  # amperes

# Default integration step: divides the 0.5 ms pulse, the 2 ms gap and the
# 1.134 ms drive half-period exactly.
DEFAULT_DT = 1e-6

_REL_TOL = 1e-9


class IntegrationError(RuntimeError):
    """Runaway state during integration; carries the offending time."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class MisalignedStepError(ValueError):
    """dt does not divide a segment duration or square half-period."""


class InitializationError(RuntimeError):
    """Initialization pulse failed to park the state at the requested sign."""


@dataclass(frozen=True)
class CircuitParams:
    """Component values. G_N is the (negative) conductance of the active element."""

    C: float  # farads
    R: float  # ohms
    L: float  # henries
    G_N: float  # siemens, < 0

    def __post_init__(self):
        for name in ("C", "R", "L"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive and finite, got {val!r}")
        if not (math.isfinite(self.G_N) and self.G_N < 0):
            raise ValueError(f"G_N must be a negative conductance, got {self.G_N!r}")

    def is_bistable_with(self, model: MemristorIV) -> bool:
        """Two nonzero rest points exist iff G_N + g1 + 1/R < 0."""
        return self.G_N + model.g1 + 1.0 / self.R < 0


@dataclass(frozen=True)
class CircuitState:
    v: float  # volts across the memristor (circuit output)
    i: float  # amperes through the inductor

    def __post_init__(self):
        if not (math.isfinite(self.v) and math.isfinite(self.i)):
            raise ValueError("state variables must be finite")

    def is_runaway(self) -> bool:
        return abs(self.v) >= V_RUNAWAY or abs(self.i) >= I_RUNAWAY


@dataclass(frozen=True)
class Trajectory:
    """Time series on a uniform grid: drive u and state (v, i)."""

    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    i: np.ndarray

    def __post_init__(self):
        n = len(self.t)
        if n < 2 or any(len(a) != n for a in (self.u, self.v, self.i)):
            raise ValueError("trajectory arrays must share a length >= 2")
        steps = np.diff(self.t)
        if np.any(steps <= 0):
            raise ValueError("time grid must be strictly increasing")
        dt = float(np.median(steps))
        # Constant step up to rounding: compare against the time span so that
        # the inherent float error of t = k*dt passes.
        tol = 1e-12 * max(abs(float(self.t[-1])), dt)
        if np.any(np.abs(steps - dt) > tol):
            raise ValueError("time grid must have a constant step")

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("t,u,v,i\n")
            for row in zip(self.t, self.u, self.v, self.i):
                fh.write(",".join(f"{x:.12g}" for x in row) + "\n")


def size_circuit(g_max: float, k: float, C: float) -> CircuitParams:
    """Size R, R_N (as G_N) and L from the maximum device conductance.

    R = 1 / (k * g_max);  R_N = R*k/(1+k);  L = C*R**2.
    """
    if not (g_max > 0 and k > 0 and C > 0):
        raise ValueError("g_max, k and C must all be positive")
    R = 1.0 / (k * g_max)
    R_N = R * k / (1.0 + k)
    L = C * R * R
    return CircuitParams(C=C, R=R, L=L, G_N=-1.0 / R_N)


def equilibria(params: CircuitParams, model: MemristorIV) -> list:
    """Rest points of the undriven circuit (v values).

    Solves v*(G_N + g1 + 1/R) + g3*v**3 = 0: the origin always, plus
    +/- sqrt(-(G_N + g1 + 1/R)/g3) when the bistability condition holds.
    """
    a = params.G_N + model.g1 + 1.0 / params.R
    if a >= 0:
        return [0.0]
    if model.g3 == 0:
        raise ValueError(
            "linear memristor (g3 = 0) with G_N + g1 + 1/R < 0: "
            "the origin is unstable with no bounding nonlinearity"
        )
    v_star = math.sqrt(-a / model.g3)
    return [-v_star, 0.0, v_star]


def derivatives(state, u, params: CircuitParams, model: MemristorIV):
    """Right-hand side of the state equations.  Vectorized over v, i, u."""
    v, i = (state.v, state.i) if isinstance(state, CircuitState) else state
    dv_dt = (i - params.G_N * v - memristor_current(model, v)) / params.C
    di_dt = (u - i * params.R - v) / params.L
    return dv_dt, di_dt


def _rk4_step(v, i, u, dt, params: CircuitParams, model: MemristorIV):
    """One classical RK4 step with the drive held constant at u."""
    k1v, k1i = derivatives((v, i), u, params, model)
    k2v, k2i = derivatives((v + 0.5 * dt * k1v, i + 0.5 * dt * k1i), u, params, model)
    k3v, k3i = derivatives((v + 0.5 * dt * k2v, i + 0.5 * dt * k2i), u, params, model)
    k4v, k4i = derivatives((v + dt * k3v, i + dt * k3i), u, params, model)
    v_next = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    i_next = i + dt / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i)
    return v_next, i_next


def step_rk4(
    state: CircuitState,
    t: float,
    dt: float,
    drive: Waveform,
    params: CircuitParams,
    model: MemristorIV,
) -> CircuitState:
    """Advance one RK4 step, sampling the drive at t, t + dt/2 and t + dt.

    The endpoint samples take the limit from inside the step (right limit at
    t, left limit at t + dt), so an aligned step sees the constant drive
    value of its interior even when jumps sit exactly on its boundaries.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    u0 = float(drive.sample(t, side="right"))
    um = float(drive.sample(t + 0.5 * dt))
    u1 = float(drive.sample(t + dt, side="left"))
    k1v, k1i = derivatives(state, u0, params, model)
    k2v, k2i = derivatives(
        (state.v + 0.5 * dt * k1v, state.i + 0.5 * dt * k1i), um, params, model
    )
    k3v, k3i = derivatives(
        (state.v + 0.5 * dt * k2v, state.i + 0.5 * dt * k2i), um, params, model
    )
    k4v, k4i = derivatives((state.v + dt * k3v, state.i + dt * k3i), u1, params, model)
    v_next = state.v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    i_next = state.i + dt / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i)
    if abs(v_next) >= V_RUNAWAY or abs(i_next) >= I_RUNAWAY:
        raise IntegrationError(f"state runaway at t = {t + dt:g} s", time=t + dt)
    return CircuitState(v=v_next, i=i_next)


def check_alignment(drive: Waveform, dt: float) -> None:
    """Require dt to divide every segment duration and square half-period."""
    if dt <= 0:
        raise MisalignedStepError("dt must be positive")
    for k, seg in enumerate(drive.segments):
        pieces = [("duration", seg.duration)]
        if seg.kind == "square":
            pieces.append(("half-period", seg.period / 2.0))
        for name, span in pieces:
            n = span / dt
            if abs(n - round(n)) > _REL_TOL * max(n, 1.0):
                raise MisalignedStepError(
                    f"dt = {dt:g} s does not divide the {name} "
                    f"({span:g} s) of segment {k}"
                )


def drive_step_values(drive: Waveform, dt: float) -> np.ndarray:
    """Per-step constant drive values (sampled at step midpoints)."""
    check_alignment(drive, dt)
    n_steps = int(round(drive.duration / dt))
    mid = (np.arange(n_steps) + 0.5) * dt
    return drive.sample(mid)


def integrate_steps(
    u_steps: np.ndarray,
    v0,
    i0,
    params: CircuitParams,
    model: MemristorIV,
    dt: float,
    record: bool = True,
):
    """Core fixed-step integrator; vectorized over a trailing batch axis.

    ``u_steps`` has shape (n_steps,) or (n_steps, n_batch): the constant
    drive value on each step.  Returns (v, i) histories of shape
    (n_steps + 1, ...) when ``record``, else just the final (v, i).
    """
    u_steps = np.asarray(u_steps, dtype=float)
    n_steps = u_steps.shape[0]
    batch_shape = u_steps.shape[1:]
    v = np.broadcast_to(np.asarray(v0, dtype=float), batch_shape).astype(float).copy()
    i = np.broadcast_to(np.asarray(i0, dtype=float), batch_shape).astype(float).copy()
    if record:
        v_hist = np.empty((n_steps + 1,) + batch_shape)
        i_hist = np.empty((n_steps + 1,) + batch_shape)
        v_hist[0], i_hist[0] = v, i
    for k in range(n_steps):
        v, i = _rk4_step(v, i, u_steps[k], dt, params, model)
        if np.any(np.abs(v) >= V_RUNAWAY) or np.any(np.abs(i) >= I_RUNAWAY):
            raise IntegrationError(f"state runaway at t = {(k + 1) * dt:g} s", time=(k + 1) * dt)
        if record:
            v_hist[k + 1], i_hist[k + 1] = v, i
    if record:
        return v_hist, i_hist
    return v, i


def simulate(
    drive: Waveform,
    params: CircuitParams,
    model: MemristorIV,
    init: CircuitState,
    dt: float = DEFAULT_DT,
) -> Trajectory:
    """Integrate the circuit over the full drive and record (t, u, v, i)."""
    u_steps = drive_step_values(drive, dt)
    v_hist, i_hist = integrate_steps(u_steps, init.v, init.i, params, model, dt)
    n_steps = len(u_steps)
    t = np.arange(n_steps + 1) * dt
    u = drive.sample(t)
    return Trajectory(t=t, u=u, v=v_hist, i=i_hist)


def initialize_state(
    polarity: int,
    params: CircuitParams,
    model: MemristorIV,
    dt: float = DEFAULT_DT,
) -> CircuitState:
    """Run the initialization protocol from rest and return the settled state.

    A 0.5 ms pulse of +/-0.2 V followed by 2 ms of zero drive parks the
    state at the equilibrium of the requested sign.
    """
    from .waveform import build_drive  # local import avoids a cycle at module load

    drive = build_drive(polarity, None)
    u_steps = drive_step_values(drive, dt)
    v, i = integrate_steps(u_steps, 0.0, 0.0, params, model, dt, record=False)
    v, i = float(v), float(i)
    if v * polarity <= 0:
        raise InitializationError(
            f"initialization pulse left v = {v:g} V, expected sign {polarity:+d}"
        )
    if not params.is_bistable_with(model):
        import warnings

        warnings.warn(
            "circuit is not bistable: initialization settles near the origin",
            RuntimeWarning,
            stacklevel=2,
        )
    return CircuitState(v=v, i=i)
