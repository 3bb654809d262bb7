"""Lazy incremental symmetric rank-1 / rank-k quasi-Newton methods for finite sums."""

from .linalg import DirectionSet, spd_solve, top_k_diagonal, update_inverse
from .problems import (
    generate_quadratic,
    logistic_oracle,
    parse_libsvm,
    problem_constants,
    quadratic_oracle,
    synthetic_logistic,
)
from .solvers import (
    RunRecord,
    ScalingSchedule,
    SolverConfig,
    default_schedule,
    init_bank,
    newton_reference,
    omega,
    run,
)
from .updates import (
    broyden_update,
    greedy_direction,
    greedy_directions_k,
    nu_measure,
    sr1_update,
    srk_update,
    tau_measure,
)

__version__ = "0.1.0"
