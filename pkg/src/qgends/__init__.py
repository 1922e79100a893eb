"""qgends: end-space classification and numerics for Laplacians on
infinite metric graphs."""

from .classify import ClassificationReport, classification_report
from .ends import EndSummary, component_counts, count_finite_volume, enumerate_ends
from .graphspec import (ChainWithAttachments, ExtendedCount, FiniteGraph,
                        FullLinePath, GraphFamilySpec, HalfLinePath, RadialTree,
                        SphereSymmetric, parse_spec, serialize_spec)
from .metric_graph import MetricGraph, subgraph_sequence, truncate, volume_family
from .radial import RadialTreeData, kernel_energy, kernel_g

__version__ = "0.1.0"

__all__ = [
    "ClassificationReport", "classification_report",
    "EndSummary", "component_counts", "count_finite_volume", "enumerate_ends",
    "ChainWithAttachments", "ExtendedCount", "FiniteGraph", "FullLinePath",
    "GraphFamilySpec", "HalfLinePath", "RadialTree", "SphereSymmetric",
    "parse_spec", "serialize_spec",
    "MetricGraph", "subgraph_sequence", "truncate", "volume_family",
    "RadialTreeData", "kernel_energy", "kernel_g",
]
