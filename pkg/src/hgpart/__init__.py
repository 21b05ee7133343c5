"""Spectral partitioning of non-uniform hypergraphs under a planted partition model."""

from .errors import DataError, HypergraphError, NumericalError
from .hypergraph import Hypergraph, adjacency, clique_adjacency, degrees, laplacian, nh_cut
from .kmeans import brute_force_kmeans, misclassification, orss_kmeans
from .model import (CustomTable, PlantedClique, PlantedModelSpec, ThreeUniform, TwoParam,
                    population_summary, sample, theoretical_report)
from .pipeline import PartitionOptions, PartitionReport, experiment_trial, partition
from .spectral import leading_eigenvectors, row_normalize, separability

__version__ = "0.1.0"

__all__ = [
    "DataError", "HypergraphError", "NumericalError", "Hypergraph", "adjacency",
    "clique_adjacency", "degrees", "laplacian", "nh_cut", "brute_force_kmeans",
    "misclassification", "orss_kmeans", "CustomTable", "PlantedClique", "ThreeUniform",
    "TwoParam", "PlantedModelSpec", "population_summary", "sample",
    "theoretical_report", "PartitionOptions", "PartitionReport", "experiment_trial",
    "partition", "leading_eigenvectors", "row_normalize", "separability",
]
