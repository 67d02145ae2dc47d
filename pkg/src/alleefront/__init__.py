"""Solver and analysis toolkit for 1-D nonlocal fronts with a weak Allee effect.

Modules
-------
kernels         dispersal kernels with algebraic tails and their validation
discretization  splitting quadrature of the nonlocal operator on a grid
toeplitz        symmetric-Toeplitz Levinson solver
evolution       IMEX(1,1,1) stepping with an adaptively expanding domain
diagnostics     level lines, exponent/tail/flattening fits, regime classifier
subsolution     analytic barrier and subsolution, numeric certification
config, runner, cli   configuration, persistence and the command line
"""

__version__ = "0.1.0"

from .kernels import (  # noqa: F401
    KernelSpec,
    composite_kernel,
    fractional_kernel,
    fractional_normalization,
    tail_mass,
    truncated_algebraic_kernel,
    validate_spec,
)
from .discretization import (  # noqa: F401
    ExteriorDatum,
    OperatorMatrix,
    apply_nonlocal,
    assemble_system,
    dirichlet_rhs,
    exterior_rhs,
)
from .toeplitz import LevinsonBreakdown, dense_solve, levinson_solve  # noqa: F401
from .evolution import (  # noqa: F401
    GridState,
    ReactionSpec,
    RunSettings,
    StepConfig,
    Trajectory,
    adapt_domain,
    imex_step,
    initial_grid,
    run,
)
from .diagnostics import (  # noqa: F401
    LevelSeries,
    RegimeReport,
    TailFit,
    exponent_fit,
    flattening_series,
    level_position,
    regime_classify,
    symbol_error,
    tail_fit,
)
from .subsolution import (  # noqa: F401
    CertificationReport,
    SubsolutionParams,
    barrier_v_eval,
    certify,
    geometry,
    numeric_nonlocal,
    preset_params,
    threshold_search,
    usub_eval,
    w_eval,
)
