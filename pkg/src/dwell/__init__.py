"""Two-site Bose-Hubbard simulation and entanglement toolkit."""

__version__ = "0.1.0"

from dwell.basis import FockBasis, FockState, full_basis, sector_basis, sector_slices
from dwell.operators import (
    ModelParams,
    OperatorMatrix,
    annihilator,
    expectation,
    hamiltonian,
    hopping_op,
    interaction_op,
    number_op,
)
from dwell.spectral import (
    DensityMatrix,
    SpectralDecomposition,
    eigh,
    gibbs_state,
    ground_state,
    matrix_exp_hermitian_action,
)
from dwell.entanglement import (
    EofBoundReport,
    NegativityReport,
    bec_negativity_closed_form,
    eof_bound,
    eof_bound_F,
    eof_bound_G,
    eof_bound_s,
    gamma_row_sort,
    negativity_blocks,
    negativity_pair,
    negativity_pt_oracle,
    pure_state_eof_oracle,
)
from dwell.dynamics import (
    LindbladModel,
    QuenchSpec,
    TimeSeries,
    dephasing_model,
    lindblad_evolve_exact,
    lindblad_evolve_rk4,
    liouvillian,
    loss_model,
    quench_evolve,
    quenched_open_run,
)
