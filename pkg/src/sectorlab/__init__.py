"""Finite-dimensional laboratory for superselection sectors, symmetry breaking,
thermality criteria and measurement instruments."""

__version__ = "0.1.0"

from .algebra import (CPMap, FiniteCStarAlgebra, StateFunctional, center_of, commutant,  # noqa: E402
                      dual_channel, full_matrix_algebra, generated_algebra, is_completely_positive,
                      multi_matrix_algebra)
from .groups import (FiniteGroup, GroupAction, UnitaryRep, character_table, fixed_point_algebra,  # noqa: E402
                     group_average, inner_action, preset, regular_rep)
from .sectors import build_charging_channel, central_decompose_state, decompose_sectors  # noqa: E402

__all__ = [
    "__version__", "CPMap", "FiniteCStarAlgebra", "StateFunctional", "center_of", "commutant",
    "dual_channel", "full_matrix_algebra", "generated_algebra", "is_completely_positive",
    "multi_matrix_algebra", "FiniteGroup", "GroupAction", "UnitaryRep", "character_table",
    "fixed_point_algebra", "group_average", "inner_action", "preset", "regular_rep",
    "build_charging_channel", "central_decompose_state", "decompose_sectors",
]
