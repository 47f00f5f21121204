"""Bijective disk conformal parameterization of simply-connected open meshes.

Double cover -> spherical conformal map -> stereographic projection of one
half -> linear Beltrami solve for the remaining quasi-conformal distortion.
"""
from .double_cover import GluedMesh, double_cover
from .linalg import SolveLog, cotangent_laplacian, solve_spd, solve_with_dirichlet
from .mesh import TriMesh, boundary_loop, load_mesh, load_uv, validate_topology, write_mesh_with_uv
from .metrics import DistortionReport, angular_distortion, bijectivity_report, conformality_stats, evaluate
from .pipeline import DiskParameterization, ParameterizationError, ParamOptions, disk_conformal_parameterize
from .quasiconformal import BeltramiField, beltrami_coefficient, dilation_summary, lbs_reconstruct
from .spherical import spherical_conformal_map

__all__ = [
    "BeltramiField",
    "DiskParameterization",
    "DistortionReport",
    "GluedMesh",
    "ParamOptions",
    "ParameterizationError",
    "SolveLog",
    "TriMesh",
    "angular_distortion",
    "beltrami_coefficient",
    "bijectivity_report",
    "boundary_loop",
    "conformality_stats",
    "cotangent_laplacian",
    "dilation_summary",
    "disk_conformal_parameterize",
    "double_cover",
    "evaluate",
    "lbs_reconstruct",
    "load_mesh",
    "load_uv",
    "solve_spd",
    "solve_with_dirichlet",
    "spherical_conformal_map",
    "validate_topology",
    "write_mesh_with_uv",
]
