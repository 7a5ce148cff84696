"""Compile small molecular Hamiltonians into diagonal Ising models and solve them.

The pipeline is: Pauli-sum Hamiltonian -> replicated diagonal polynomial
(``replication``) -> 2-local Ising model (``locality``) -> iterative
ground-energy search (``solver``).
"""

from .locality import IsingModel, BoolPolynomial, reduce_to_2local, verify_reduction, z_to_bool, bool_to_z
from .molecules import (
    CoefficientTable,
    IntegralSet,
    MoleculeCoefficients,
    exchange_J_of_R,
    exchange_model,
    h2_reduced_coefficients,
    h2_spin_hamiltonian,
    he2_spin_hamiltonian,
    heh_spin_hamiltonian,
    load_coefficient_table,
)
from .pauli import FermionTerm, PauliString, PauliSum, bravyi_kitaev_4, jordan_wigner, multiply
from .replication import (
    ReplicatedState,
    ReplicationLayout,
    ZPolynomial,
    build_replicated_hamiltonian,
    count_polynomial,
    count_value,
    decode_state,
)
from .solver import AnnealSchedule, SolveReport, algorithm1, min_diagonal_anneal, min_diagonal_exhaustive, restricted_minimum_oracle

__version__ = "0.1.0"
