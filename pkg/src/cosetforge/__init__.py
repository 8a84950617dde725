"""Fourier-algebra norms, coset decompositions and coset decision trees on finite groups."""

__version__ = "0.1.0"

from .errors import CosetForgeError
from .groups import (Coset, FiniteGroup, Subgroup, coset_of, enumerate_subgroups,
                     generated_subgroup, group_by_name, left_cosets, load_group, make_boolean_cube,
                     make_cyclic, make_dihedral, make_product, make_symmetric, validate_group)
from .functions import (EXACT, FLOAT, GroupFunction, MeasureOnG, convolve_count, convolve_mean,
                        project_to_subgroup, round_almost_integer, tilde, translate)
from .spectral import algebra_norm, bg_factorize, fourier_l1_abelian, split
from .decompose import CosetDecomposition, exact_min_cost, greedy_decompose, verify
from .trees import CosetDecisionTree, compile_decomposition, evaluate, prune, to_function

__all__ = [
    "CosetForgeError", "Coset", "FiniteGroup", "Subgroup", "coset_of", "enumerate_subgroups",
    "generated_subgroup", "group_by_name", "left_cosets", "load_group", "make_boolean_cube",
    "make_cyclic", "make_dihedral", "make_product", "make_symmetric", "validate_group",
    "EXACT", "FLOAT", "GroupFunction", "MeasureOnG", "convolve_count", "convolve_mean",
    "project_to_subgroup", "round_almost_integer", "tilde", "translate", "algebra_norm",
    "bg_factorize", "fourier_l1_abelian", "split", "CosetDecomposition", "exact_min_cost",
    "greedy_decompose", "verify", "CosetDecisionTree", "compile_decomposition", "evaluate",
    "prune", "to_function",
]
