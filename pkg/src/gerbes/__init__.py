"""Bundle gerbes, their Dixmier-Douady classes, connections and holonomy on
simplicial complexes with good covers."""

__version__ = "0.1.0"

from .cech import CoverNerve, CxCochain, CxValue, integer_class, solve_trivialization
from .complex import Chain, Cochain, OrientedSimplicialComplex
from .connection import DeligneData, build_connection, build_from_integer_class, check_deligne, curvature_three_form
from .fibered import FiberedCochain, FiniteCovering, delta, patch_primitive
from .gerbe import CentralExtension, GerbePresentation, PrincipalBundleData, dd_cocycle, lift_exists, trivialize
from .holonomy import SurfaceInBase, surface_holonomy, wzw
from .pathgroupoid import PathGroupoid

__all__ = [
    "Chain",
    "Cochain",
    "CentralExtension",
    "CoverNerve",
    "CxCochain",
    "CxValue",
    "DeligneData",
    "FiberedCochain",
    "FiniteCovering",
    "GerbePresentation",
    "OrientedSimplicialComplex",
    "PathGroupoid",
    "PrincipalBundleData",
    "SurfaceInBase",
    "build_connection",
    "build_from_integer_class",
    "check_deligne",
    "curvature_three_form",
    "dd_cocycle",
    "delta",
    "integer_class",
    "lift_exists",
    "patch_primitive",
    "solve_trivialization",
    "surface_holonomy",
    "trivialize",
    "wzw",
]
