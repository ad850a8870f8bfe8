"""
Model definitions: coupling graphs, product basis, symmetry labels and ModelSpec.
"""

from nlevel_factor.model.basis import (
    BasisConfig,
    SectorKind,
    SectorLabel,
    all_configs,
    basis_dim,
    config_roundtrip,
    config_to_index,
    enumerate_sectors,
    index_to_config,
    level_counts,
    num_occupation_sectors,
    parity_labels,
    parse_sector,
    sector_indices,
    sector_of,
)
from nlevel_factor.model.graph import CouplingGraph, GraphKind, make_graph, resolve_graph_kind
from nlevel_factor.model.spec import ModelSpec, validate_coupling_matrix

__all__ = [
    "BasisConfig",
    "CouplingGraph",
    "GraphKind",
    "ModelSpec",
    "SectorKind",
    "SectorLabel",
    "all_configs",
    "basis_dim",
    "config_roundtrip",
    "config_to_index",
    "enumerate_sectors",
    "index_to_config",
    "level_counts",
    "make_graph",
    "num_occupation_sectors",
    "parity_labels",
    "parse_sector",
    "resolve_graph_kind",
    "sector_indices",
    "sector_of",
    "validate_coupling_matrix",
]
