"""Numerical operator layer: secular eigensolver, layer shooting for the
radial problems, deficiency elements and the blow-up witness."""

from .profiles import EdgeSolution, basis_integrals, basis_values, sobolev_ratio
from .secular import (Eigenvalue, dirichlet_vs_neumann, eigenfunctions,
                      secular_eigenvalues)
from .shooting import (DeficiencyElement, deficiency_element,
                       find_deficiency_elements, gram_matrix, gram_smallest_eigenvalue)
from .witness import WitnessRow, witness_nonclosed

__all__ = [
    "EdgeSolution", "basis_integrals", "basis_values", "sobolev_ratio",
    "Eigenvalue", "secular_eigenvalues", "eigenfunctions", "dirichlet_vs_neumann",
    "DeficiencyElement", "deficiency_element", "find_deficiency_elements",
    "gram_matrix", "gram_smallest_eigenvalue",
    "WitnessRow", "witness_nonclosed",
]
