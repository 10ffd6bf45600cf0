"""Probabilistic summability of sequences given by tail-probability models."""
from .errors import (
    DomainError,
    EnumerationCapExceeded,
    ExpressionOutOfRange,
    InsufficientData,
    InvalidLacunary,
    LacunaryWarning,
    MissingSeparationDeclaration,
    MonotonicityViolated,
    SummaError,
    UnknownCheckId,
)
from .evaluators import (
    MethodParams,
    block_tail_sum,
    cesaro_sum,
    lacunary_count,
    n_theta_mean,
    ps_count,
    ps_density,
    qualifying_prefix_bound,
    s_theta_density,
)
from .index_sets import index_contains, index_count
from .lacunary import lacunary_terms
from .models import Scenario, TailModel, scale_model, sum_bound_model, tail_eval

__version__ = "0.1.0"
