"""Streaming balanced graph partitioning with path-2 classification."""
from ._kernels import BACKEND
from .core import MetricsReport, PartitionState, conductance, fraction_cut, imbalance, pair_precision
from .egypt import EgyptParams, Mode
from .ppm import GroundTruth, PlantedConfig, generate, stream
from .streams import EdgeList, IncidenceEvent, Stream

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "EdgeList", "EgyptParams", "GroundTruth", "IncidenceEvent", "MetricsReport", "Mode",
    "PartitionState", "PlantedConfig", "Stream", "conductance", "fraction_cut", "generate",
    "imbalance", "pair_precision", "stream",
]
