"""Quantum Fisher information of two-cavity fermionic states under non-uniform cavity motion."""
from .errors import CavityQfiError
from .matrix_core import DensityMatrix, EigenSystem, hermitian_eig, partial_trace, ptrace, tensor
from .qfi import (
    ParameterizedFamily,
    Povm,
    QfiBreakdown,
    classical_fisher,
    qfi_pure,
    qfi_spectral,
    qfi_support,
    qfi_trace_form,
    sld_povm,
    sld_solve,
)
from .bogoliubov import (
    BogoliubovData,
    CavityConfig,
    compose_alpha,
    make_config,
    mode_sums,
    provider_quadrature,
    provider_synthetic,
)
from .states import (
    PureStateParams,
    WernerParams,
    pure_qfi_alice,
    pure_qfi_rob,
    pure_qfi_total,
    rho_pure_reduced,
    rho_werner_reduced,
    werner_qfi_alice,
    werner_qfi_rob,
    werner_qfi_total,
)

__version__ = "0.1.0"
