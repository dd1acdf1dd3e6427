"""Local eigenvector centrality for weighted graphs."""

__version__ = "0.1.0"

from .compare import (ComparisonReport, community_eigenvector_centrality, difference_report,
                      distance, fit_power, mad_normalize, pagerank, rescale)
from .estimators import (EigenvectorCentrality, HadamardPowerRescaler,
                         LocalEigenvectorCentrality, PageRank)
from .exceptions import (DegenerateSpectrum, IngestWarning, InputError, ModeError,
                         NumericalError)
from .graph import (Graph, SquareMatrix, build_adjacency, induced_subgraph, laplacian,
                    normalized_laplacian, planted_partition)
from .ingest import load_contacts, load_edge_list, load_road_network, travel_time
from .spectral import (CentralityVector, EigengapAnalysis, Spectrum, VMatrix, analyze,
                       build_v, decompose, eigengaps, eigenvector_centrality,
                       local_centrality, select_k)

__all__ = [
    "CentralityVector", "ComparisonReport", "DegenerateSpectrum", "EigengapAnalysis",
    "EigenvectorCentrality", "Graph", "HadamardPowerRescaler", "IngestWarning", "InputError",
    "LocalEigenvectorCentrality", "ModeError", "NumericalError", "PageRank", "Spectrum",
    "SquareMatrix", "VMatrix", "analyze", "build_adjacency", "build_v",
    "community_eigenvector_centrality", "decompose", "difference_report", "distance",
    "eigengaps", "eigenvector_centrality", "fit_power", "induced_subgraph", "laplacian",
    "load_contacts", "load_edge_list", "load_road_network", "local_centrality",
    "mad_normalize", "normalized_laplacian", "pagerank", "planted_partition", "rescale",
    "select_k", "travel_time",
]
