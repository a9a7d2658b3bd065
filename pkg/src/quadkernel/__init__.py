"""Basic quadrature rules with integration-by-parts error kernels and a-priori bounds."""

from .adaptive import AdaptiveResult, LocalEstimate, Partition, adaptive_integrate, local_norm
from .composite import (UniformPartition, composite_corrected_trapezoid,
                        composite_corrected_trapezoid_fd, composite_first_order_bound,
                        composite_rule, composite_rule_first_order, pairwise_sum)
from .expr import (DomainError, ExpressionError, NonDifferentiableError, ParseError,
                   differentiate, evaluate, evaluate_array, parse, unparse)
from .harness import (CorpusEntry, ConvergenceRow, builtin_corpus, convergence_table,
                      residual_check, rows_to_csv, sup_norm)
from .kernels import (KernelSpec, error_bound, kernel_for, kernel_l1_norm, kernel_s_norm,
                      optimize_monic_quadratic)
from .rules import (RULES, QuadratureEstimate, corrected_trapezoid, midpoint, simpson,
                    trapezoid)
from .sampling import DivergentNormError

__version__ = "0.1.0"
