# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""
spanbreaker: variance reduced finite-sum solvers, their worst case
instances and an experiment harness

Licensed under the MPL 2.0 license (see `LICENSE` file)
"""
from .utils import (
    get_logger, SpanbreakerError, InvalidArgument, UnsupportedFeature,
    BudgetExhausted, InsufficientData, ConfigurationError,
    ReferenceSolveError,
)
from .core import (
    FiniteSumProblem, SamplingDistribution, GradientMeter, Psi, l1,
    full_grad, effective_lipschitz, kappa_q, importance_distribution,
    prox_psi, suboptimality,
)
from .adversarial import (
    nesterov_chain, block_adversarial, sdca_adversarial, sdca_theta,
    nonconvex_quadratic_sum, span_floor,
)
from .solvers import (
    solver, SolverConfig, SvrgConfig, prox_svrg, sarah, saga,
    gradient_descent, sdca, optimal_svrg_params, theorem1_rate,
    nonconvex_svrg_params,
)
from .measure import Trace, RateEstimate, estimate_rate, complexity_to_eps
from .harness import reference_solve, speedup_experiment, RunSpec

__package__ = 'spanbreaker'
__version__ = '0.1.0'
__all__ = [
    'get_logger',
    'SpanbreakerError',
    'InvalidArgument',
    'UnsupportedFeature',
    'BudgetExhausted',
    'InsufficientData',
    'ConfigurationError',
    'ReferenceSolveError',
    'FiniteSumProblem',
    'SamplingDistribution',
    'GradientMeter',
    'Psi',
    'l1',
    'full_grad',
    'effective_lipschitz',
    'kappa_q',
    'importance_distribution',
    'prox_psi',
    'suboptimality',
    'nesterov_chain',
    'block_adversarial',
    'sdca_adversarial',
    'sdca_theta',
    'nonconvex_quadratic_sum',
    'span_floor',
    'solver',
    'SolverConfig',
    'SvrgConfig',
    'prox_svrg',
    'sarah',
    'saga',
    'gradient_descent',
    'sdca',
    'optimal_svrg_params',
    'theorem1_rate',
    'nonconvex_svrg_params',
    'Trace',
    'RateEstimate',
    'estimate_rate',
    'complexity_to_eps',
    'reference_solve',
    'speedup_experiment',
    'RunSpec',
]
