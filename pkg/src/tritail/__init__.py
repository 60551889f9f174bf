"""Triangle counts in heavy-tailed Chung-Lu random graphs: asymptotic constants,
exact conditional functionals, samplers and rare-event estimators."""

from .dist import PowerLawDist, WeightVector
from .graph import Graph, PlantSpec, count_triangles, plant_hubs, sample_graph, truncate_weights
from .kernel import KernelContext, conditional_mean_triangles, hub_excess
from .mc import Estimate
from .theory import TheoryContext, regime_exponent, triangle_constant

__all__ = [
    "PowerLawDist", "WeightVector", "Graph", "PlantSpec", "count_triangles", "plant_hubs", "sample_graph",
    "truncate_weights", "KernelContext", "conditional_mean_triangles", "hub_excess", "Estimate",
    "TheoryContext", "regime_exponent", "triangle_constant",
]
