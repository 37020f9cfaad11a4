"""Bayesian sparse-PARAFAC factorization of categorical probability tensors.

The package factors the joint distribution of multivariate categorical
data as a mixture of product distributions in which, per component, most
variables are tied to a fixed baseline vector.  It provides exact tensor
operations on such models, prior simulation of the induced log-linear
shrinkage, a Gibbs sampler with a joint-distribution validation harness,
dependence diagnostics, log-linear coefficient extraction, synthetic-data
generators, and a replication harness, all behind both a library API and
the ``sparse-parafac`` command line.
"""

from .errors import ConfigError, DataError, NumericalError, SizeError
from .tensor import (
    DEFAULT_CELL_CAP,
    MISSING,
    CategoricalDataset,
    DenseProbTensor,
    cell_prob,
    check_simplex,
    full_tensor,
    l1_distance,
    marginal_tensor,
    pairwise_marginal,
)
from .priors import (
    PriorConfig,
    SpParafacParams,
    baseline_vector,
    beta_bernoulli_pmf,
    draw_prior,
    stick_breaking,
)
from .gibbs import (
    ChainState,
    GibbsConfig,
    PosteriorSampleSet,
    lambda_mixture_logweights,
    run_chain,
    update_alpha,
    update_lambda,
    update_tau,
    update_V,
    update_z,
)
from .geweke import GewekeResult, geweke_test
from .inference import (
    LogLinearCoeffs,
    SummaryReport,
    canonical_subsets,
    coefficient_samples,
    cramers_v_empirical,
    cramers_v_matrix,
    cramers_v_matrix_empirical,
    cramers_v_model,
    loglinear_from_tensor,
    posterior_functional_summary,
    replicate_aggregate,
    significance_decision,
    summarize_coefficients,
    summarize_values,
    tensor_from_loglinear,
)
from .simgen import (
    ScenarioSpec,
    gen_glm,
    gen_loglinear,
    gen_subpop,
    generate,
    true_coefficients,
    true_cramers_v,
)

__version__ = "0.1.0"

__all__ = [
    "CategoricalDataset",
    "ChainState",
    "ConfigError",
    "DataError",
    "DenseProbTensor",
    "DEFAULT_CELL_CAP",
    "GewekeResult",
    "GibbsConfig",
    "LogLinearCoeffs",
    "MISSING",
    "NumericalError",
    "PosteriorSampleSet",
    "PriorConfig",
    "ScenarioSpec",
    "SizeError",
    "SpParafacParams",
    "SummaryReport",
    "baseline_vector",
    "beta_bernoulli_pmf",
    "canonical_subsets",
    "cell_prob",
    "check_simplex",
    "coefficient_samples",
    "cramers_v_empirical",
    "cramers_v_matrix",
    "cramers_v_matrix_empirical",
    "cramers_v_model",
    "draw_prior",
    "full_tensor",
    "gen_glm",
    "gen_loglinear",
    "gen_subpop",
    "generate",
    "geweke_test",
    "l1_distance",
    "lambda_mixture_logweights",
    "loglinear_from_tensor",
    "marginal_tensor",
    "pairwise_marginal",
    "posterior_functional_summary",
    "replicate_aggregate",
    "run_chain",
    "significance_decision",
    "stick_breaking",
    "summarize_coefficients",
    "summarize_values",
    "tensor_from_loglinear",
    "true_coefficients",
    "true_cramers_v",
    "update_alpha",
    "update_lambda",
    "update_tau",
    "update_V",
    "update_z",
]
