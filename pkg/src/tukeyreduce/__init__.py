"""Size reduction for flat-loss regression.

Given an overconstrained instance min_x sum_i M(a_i x - b_i) with a Tukey
bisquare or clipped power loss M, this package shrinks the instance to a
provably small weighted one, either by sampling rows proportionally to
Lewis-type importance scores or by an oblivious multi-level sketch, and
then solves the small instance with restarted IRLS.
"""

__version__ = "0.1.0"

from .exceptions import (ConvergenceError, DomainError, FlatStartError,
                         ParameterError, ShapeError, StagnationError,
                         WeightInvariantError)
from .loss import CLIPPED, TUKEY, LossSpec
from .linalg import (leverage_scores, read_instance_csv, read_weighted_csv,
                     thin_factorize, weighted_least_squares,
                     write_instance_csv, write_weighted_csv)
from .lewis import (EntryBoundReport, LewisWeights, approx_lewis_weights,
                    entry_bound_report, lewis_weights)
from .heavy import (HeavyConfig, derived_seed, heavy_rows_iterative,
                    heavy_rows_partitioned, partitioned_round_count)
from .rowsample import (PreservationReport, ReduceInfo, SampleConfig,
                        StepInfo, WeightVector, descent_step,
                        lp_preservation_report, reduce_rows, sample_step,
                        sampling_probabilities, weight_classes)
from .msketch import (SketchMatrix, SketchSpec, default_branching,
                      draw_sketch, sketch_instance, spec_for_row_budget)
from .solver import (SolveReport, approx_ratio, brute_force_solve,
                     irls_solve)
from .hardgen import (CnfFormula, assignment_to_point, count_satisfied,
                      formula_to_instance, parse_dimacs,
                      point_to_assignment, random_planted_formula)
from .bench import (BenchPlan, BenchResult, gen_gaussian, inject_outliers,
                    rows_to_csv, run_bench, summary_to_csv)

__all__ = [
    "__version__",
    "ConvergenceError", "DomainError", "FlatStartError", "ParameterError",
    "ShapeError", "StagnationError", "WeightInvariantError",
    "CLIPPED", "TUKEY", "LossSpec",
    "leverage_scores", "read_instance_csv", "read_weighted_csv",
    "thin_factorize", "weighted_least_squares", "write_instance_csv",
    "write_weighted_csv",
    "EntryBoundReport", "LewisWeights", "approx_lewis_weights",
    "entry_bound_report", "lewis_weights",
    "HeavyConfig", "derived_seed", "heavy_rows_iterative",
    "heavy_rows_partitioned", "partitioned_round_count",
    "PreservationReport", "ReduceInfo", "SampleConfig", "StepInfo",
    "WeightVector", "descent_step", "lp_preservation_report", "reduce_rows",
    "sample_step", "sampling_probabilities", "weight_classes",
    "SketchMatrix", "SketchSpec", "default_branching", "draw_sketch",
    "sketch_instance", "spec_for_row_budget",
    "SolveReport", "approx_ratio", "brute_force_solve", "irls_solve",
    "CnfFormula", "assignment_to_point", "count_satisfied",
    "formula_to_instance", "parse_dimacs", "point_to_assignment",
    "random_planted_formula",
    "BenchPlan", "BenchResult", "gen_gaussian", "inject_outliers",
    "rows_to_csv", "run_bench", "summary_to_csv",
]
