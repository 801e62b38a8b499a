"""Fine-scale statistics of dilated lacunary sequences modulo one.

Certified fractional parts ``{alpha a_n}`` of lacunary sequences, gap and
k-level correlation statistics, exact counts of the admissible vectors that
control them, and seeded Monte Carlo experiments over alpha.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .counting import (
    CountResult,
    FitResult,
    MainLemmaInstance,
    QuadrupleInstance,
    RegionInstance,
    count_main_lemma,
    count_quadruples,
    count_region,
    degeneracy_pairing_holds,
    fit_exponent,
    is_degenerate,
    quadruple_to_vector,
)
from .errors import (
    BoundaryAmbiguous,
    BudgetExceeded,
    ConfigError,
    CostGuardExceeded,
    DegenerateFit,
    InsufficientDigits,
    LacunarityViolation,
    LacunaryError,
    NearIntegerAmbiguity,
    PrecisionExhausted,
    SlowDecay,
    SupportTooWide,
)
from .experiments import (
    AlphaLaw,
    ExperimentConfig,
    VarianceEstimate,
    run_correlation_experiment,
    run_gap_experiment,
    run_variance_ladder,
)
from .reals import ApproxReal, ExactReal, Real, to_real
from .sequences import (
    LacunarySpec,
    MaterializedSequence,
    PrecisionBudget,
    TorusSample,
    fractional_parts,
    interval_constant,
    interval_count,
    materialize,
)
from .statistics import (
    CorrelationEstimate,
    GapProfile,
    c_k_factor,
    correlation_direct,
    correlation_naive,
    correlation_poisson_k2,
    gap_profile,
)
from .testfn import TestFunction, box, smooth_bump, triangle

import types as _types

__all__ = sorted(
    name for name, obj in globals().items()
    if not name.startswith("_") and name != "annotations" and not isinstance(obj, _types.ModuleType)
)
