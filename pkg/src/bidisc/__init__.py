"""Certified polynomial counterexamples on the bi-disc.

The library constructs analytic polynomials on the unit bi-disc whose two
pure squared Euler derivatives stay uniformly bounded while the mixed second
Euler derivative grows, certifies the construction with exact rational
arithmetic, and reports sup-norm estimates and growth scans.

Layers, bottom to top:

``poly``          sparse bivariate polynomials, Euler-operator views,
                  exact-phase lattice evaluation
``rudin_shapiro`` the flat pair recursion, subset selection, counterexample
                  assembly, certified bound chains
``frequencies``   lacunary frequency schedules and their exact certification
``norms``         FFT lattice suprema, flatness checks, growth scans
``serialize``     certificate / bundle / schedule / report files
``pipeline``      one-call construction and independent re-verification
``cli``           the ``bidisc`` command
"""

from .errors import (
    AntiDerivativeError,
    BaseOverflow,
    BidiscError,
    ChainViolation,
    CollisionError,
    DominationError,
    EmptyInput,
    EnumTooLarge,
    FileFormatError,
    ModeError,
)
from .frequencies import (
    ConditionReport,
    ExactRatio,
    FreqSchedule,
    OrdinaryBounds,
    SchedulerConfig,
    SignedSumEntry,
    enumerate_signed_sums,
    exact_sum,
    schedule_and_verify,
    schedule_frequencies,
    strong_mode_bounds,
    verify_conditions,
)
from .norms import (
    GridSpec,
    NormEntry,
    NormReport,
    ScanRow,
    ScanTable,
    flatness_residual,
    fold_to_grid,
    grid_sup,
    grid_values,
    growth_scan,
    norm_report,
)
from .pipeline import (
    ConstructionResult,
    VerificationOutcome,
    construct_level,
    verify_bundle_file,
    verify_loaded_bundle,
)
from .poly import (
    EulerOp,
    ExpPair,
    GridPoint,
    PolyView,
    SparsePoly,
    antiderivative_view,
    coeff_l1,
    euler_apply,
    euler_view,
    eval_at_grid_point,
    linear_combine,
    reflect_shift,
    value_at_one,
)
from .rudin_shapiro import (
    BoundsRecord,
    CoeffSchedule,
    CounterexampleBundle,
    RSPair,
    ScalarBounds,
    ScalarTrace,
    SubsetSelection,
    assemble_counterexamples,
    build_rs_pair,
    certified_bounds,
    dyadic_quarter_root,
    paper_parameters,
    scalar_bounds,
    scalar_trace,
    select_subset,
    select_subset_from_trace,
    weighted_flat_sum,
)

__version__ = "0.1.0"
