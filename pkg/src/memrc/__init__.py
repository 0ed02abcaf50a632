"""memrc: memristive chaotic-circuit simulator and reservoir-computing toolkit."""

__version__ = "0.1.0"

from .memristor import MemristorState, MemristorIV, build_model
from .circuit import CircuitParams, CircuitState, Trajectory, size_circuit, simulate
from .waveform import AmplitudeTable, Segment, Waveform, amplitude_table
from .readout import LinearReadout, MarginSVM, RidgeReadout, TrainConfig

__all__ = [
    "MemristorState",
    "MemristorIV",
    "build_model",
    "CircuitParams",
    "CircuitState",
    "Trajectory",
    "size_circuit",
    "simulate",
    "AmplitudeTable",
    "Segment",
    "Waveform",
    "amplitude_table",
    "LinearReadout",
    "MarginSVM",
    "RidgeReadout",
    "TrainConfig",
]
