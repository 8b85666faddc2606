"""Discrete Wigner functions, negativity and coin entanglement for the coined quantum walk."""

from .observables import (
    EigenPair2,
    InconsistentFieldError,
    coin_density,
    entanglement_entropy,
    entropy_series,
    herm2_eigenvalues,
    negativity,
    negativity_series,
)
from .walk import (
    PAPER_SPINOR,
    CoinOperator,
    InitialKind,
    InitialStateSpec,
    WalkState,
    cat_state,
    coin_matrix,
    evolve,
    localized_state,
    position_distribution,
    position_sigma,
    step,
)
from .wigner import (
    HermitianMatrix2,
    PhaseSpaceGrid,
    WignerField,
    momentum_amplitudes,
    momentum_matrix,
    position_marginal,
    wigner_evolve,
    wigner_from_state,
    wigner_from_state_reference,
    wigner_step,
)

__version__ = "0.1.0"
