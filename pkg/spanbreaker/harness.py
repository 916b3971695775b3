# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""
Experiment harness: run specs, support tracking, independent oracles and
the speedup experiment.
"""
import math
import json
import numbers
from collections import OrderedDict

import numpy as np

from . import utils, solvers, adversarial
from .core import (
    GradientMeter, prox_psi, with_psi,
    with_optimum, l1, importance_distribution, effective_lipschitz, kappa_q,
    SamplingDistribution, dist_sq,
)
from .measure import (
    complexity_to_eps, estimate_mean_rate, estimate_rate,  # noqa
)
from .measure.storage import SPEEDUP_FIELDS
from .distribute import Job, run_batch
from .utils import (
    ConfigurationError, InvalidArgument, ReferenceSolveError,
    UnsupportedFeature,
)

log = utils.get_logger(__name__)


class SupportTracker(object):
    '''Solver callback following ``N(x_i)`` and the draw counts ``I_i`` on a
    block instance.

    Records ``(iteration, dist_sq ratio, distance floor)`` every `every`
    updates and counts updates where some block has ``N(x_i) > I_i +
    slack``. The floor is only meaningful for runs started at zero.
    '''
    def __init__(self, problem, x0=None, slack=0, every=1):
        params = problem.params
        if params.get('kind') not in ('block', 'chain'):
            raise InvalidArgument(
                "support tracking needs a block instance, got '{}'"
                .format(problem.name))
        self.problem = problem
        self.n = params['n']
        self.d_b = params['d_b']
        self.kappa = params['L'] / params['sigma']
        self.block_star = np.asarray(problem.known_minimizer[:self.d_b])
        x0 = np.zeros(problem.d) if x0 is None else x0
        self.norm0 = dist_sq(problem, x0)
        self.slack = slack
        self.every = every
        self.draws = np.zeros(self.n, dtype=np.int64)
        self.records = []
        self.violations = 0
        self.first_violation = None

    def __call__(self, step):
        if step.indices is None:
            self.draws += 1
        else:
            np.add.at(self.draws, list(step.indices), 1)
        supports = adversarial.support_profile(step.x, self.n, self.d_b)
        if np.any(supports > self.draws + self.slack):
            self.violations += 1
            if self.first_violation is None:
                self.first_violation = step.iteration
                log.debug("support bound broken at update {}"
                          .format(step.iteration))
        if step.iteration % self.every == 0:
            self.records.append((
                step.iteration,
                dist_sq(self.problem, step.x) / self.norm0,
                adversarial.distance_floor(
                    self.n, self.kappa, supports, self.block_star),
            ))

    @property
    def violated(self):
        return self.violations > 0

    def ratios(self):
        """``(iterations, ratios, floors)`` arrays of the records.
        """
        if not self.records:
            return (np.array([], dtype=np.int64), np.array([]),
                    np.array([]))
        its, ratios, floors = zip(*self.records)
        return np.array(its), np.array(ratios), np.array(floors)


# SDCA expectation oracles
def sdca_expectation_step(instance, alpha):
    """Apply ``T = (1 - 1/n) I - r (J - I) / n`` to `alpha` in O(n).
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    n = instance.n
    return ((1.0 - 1.0 / n) * alpha -
            instance.ratio * (alpha.sum() - alpha) / n)


def sdca_operator(instance):
    """Dense ``T``; for small instances only.
    """
    n = instance.n
    J = np.ones((n, n))
    eye = np.eye(n)
    return (1.0 - 1.0 / n) * eye - instance.ratio * (J - eye) / n


def exact_sdca_mean(instance, alpha0, k):
    """Mean of ``alpha^k`` over all ``n^k`` equally likely index sequences,
    computed by running `sdca_step` along each of them.
    """
    alpha0 = utils.as_vector(alpha0, instance.n, 'alpha0')
    x0 = instance.primal(alpha0)
    total = np.zeros(instance.n)
    count = 0
    for seq in adversarial.enumerate_draws(instance.n, k):
        alpha, x = alpha0.copy(), x0.copy()
        for i in seq:
            solvers.sdca_step(instance, alpha, x, i)
        total += alpha
        count += 1
    return total / count


def _optimality_estimate(problem, x, L_f):
    """Return ``(point, bound)`` where ``bound`` over-estimates
    ``F(point) - F*`` through a (proximal) gradient norm.
    """
    g = problem.gradient(x)
    if problem.psi.is_none:
        return x, float(g @ g) / (2.0 * problem.mu)
    x_plus = prox_psi(problem, 1.0 / L_f, x - g / L_f)
    G = L_f * (x - x_plus)
    return x_plus, 2.0 * float(G @ G) / problem.mu


def reference_solve(problem, target_tol, x0=None, max_epochs=200, seed=0):
    '''Run optimally tuned Prox-SVRG one epoch at a time until the
    gradient norm certificate drops to `target_tol`.

    :returns: ``(x_ref, F_ref)``
    :raises ReferenceSolveError: if `max_epochs` are spent first
    '''
    x = np.zeros(problem.d) if x0 is None else utils.as_vector(
        x0, problem.d, 'x0')
    if math.isinf(target_tol):
        return x, problem.objective(x)
    if not target_tol > 0:
        raise InvalidArgument(
            "target_tol must be positive, got {}".format(target_tol))

    # evaluate the oracle without a stored optimum
    bare = problem.replace(known_minimizer=None, known_value=None,
                           check=False)
    L_f = bare.L
    meter = GradientMeter()
    point, estimate = _optimality_estimate(bare, x, L_f)
    for k in range(max_epochs):
        if estimate <= target_tol:
            log.debug("reference solve of '{}' done after {} epochs, "
                      "estimate {:g}".format(problem.name, k, estimate))
            return point, problem.objective(point)
        config = solvers.svrg_config(bare, epochs=1, seed=seed + k)
        x = solvers.prox_svrg(bare, config, x0=x, meter=meter).x
        point, estimate = _optimality_estimate(bare, x, L_f)
    if estimate <= target_tol:
        return point, problem.objective(point)
    raise ReferenceSolveError(
        "reference solve of '{}' did not reach {:g}".format(
            problem.name, target_tol),
        epochs=max_epochs, estimate=estimate, grad_units=meter.units)


def run_solver(name, target, config, x0=None, callback=None):
    """Run registered solver `name` on `target` (a problem, or an
    `SdcaInstance` for ``'sdca'``).
    """
    func = solvers.get(name)
    if func is None:
        raise InvalidArgument("unknown solver '{}'".format(name))
    return func(target, config, x0=x0, callback=callback)


def block_length(n, kappa, eps):
    """Per block dimension keeping the truncation error of the block
    instance well below `eps`.
    """
    q = adversarial.q_n(n, kappa)
    return max(2, int(math.ceil(math.log(eps / 100.0) /
                                (2.0 * math.log(q)))) + 1)


SPEEDUP_COLUMNS = list(SPEEDUP_FIELDS)


def speedup_experiment(n_list, alpha, beta, seeds, threads=None,
                       max_epochs=60):
    '''Gradient units each method needs to reach relative accuracy
    ``eps = n^-alpha`` on the block instance with ``kappa = n^beta``.

    :returns: a `pandas.DataFrame` with columns n, kappa, eps, K_svrg,
        K_saga, ratio; K columns are seed averages rounded to whole units.
        ``frame.attrs['flagged']`` lists the n values where some run did
        not reach eps (their K and ratio entries are NaN).
    '''
    import pandas as pd

    for name, value in (('alpha', alpha), ('beta', beta)):
        if not 0 < value < 1:
            raise InvalidArgument(
                "{} must lie in (0, 1), got {}".format(name, value))
    n_list = [int(n) for n in n_list]
    if not n_list or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InvalidArgument("n_list must be non-empty and increasing")
    seeds = list(seeds)
    if not seeds:
        raise InvalidArgument("need at least one seed")

    jobs = []
    settings = OrderedDict()
    for n in n_list:
        kappa = float(n) ** beta
        eps = float(n) ** -alpha
        d_b = block_length(n, kappa, eps)
        problem = adversarial.block_adversarial(n, kappa, 1.0, d_b)
        settings[n] = (kappa, eps)
        log.info("speedup n={} kappa={:g} eps={:g} d_b={}".format(
            n, kappa, eps, d_b))
        # both methods are read at the same granularity
        every = max(1, n // 16)
        for seed in seeds:
            svrg = solvers.svrg_config(problem, epochs=max_epochs,
                                       seed=seed, tol=eps,
                                       record_every=every)
            saga = solvers.SolverConfig(epochs=max_epochs, seed=seed,
                                        tol=eps, record_every=every)
            jobs.append(Job((n, 'svrg', seed), run_solver,
                            ('svrg', problem, svrg)))
            jobs.append(Job((n, 'saga', seed), run_solver,
                            ('saga', problem, saga)))

    results = run_batch(jobs, threads=threads)
    rows, flagged = [], []
    for n, (kappa, eps) in settings.items():
        ks = {}
        for name in ('svrg', 'saga'):
            units = [complexity_to_eps(results[(n, name, s)], eps,
                                       relative=True) for s in seeds]
            if any(u is None for u in units):
                ks[name] = None
            else:
                ks[name] = int(round(np.mean(units)))
        if ks['svrg'] is None or ks['saga'] is None:
            log.warning("n={}: a run did not reach eps={:g}".format(n, eps))
            flagged.append(n)
            rows.append((n, kappa, eps, np.nan, np.nan, np.nan))
        else:
            rows.append((n, kappa, eps, ks['svrg'], ks['saga'],
                         ks['saga'] / ks['svrg']))
    frame = pd.DataFrame(rows, columns=SPEEDUP_COLUMNS)
    if not flagged:
        frame = frame.astype({'K_svrg': np.int64, 'K_saga': np.int64})
    frame.attrs['flagged'] = flagged
    return frame


# run specs
SOLVER_NAMES = ('svrg', 'sarah', 'saga', 'gd', 'sdca')
AUTO_SOLVERS = ('svrg', 'sarah')
PARAM_KEYS = ('eta', 'm', 'P', 'epoch_mode', 'table_init', 'record_every',
              'alpha0', 'preset')
PROBLEM_KEYS = {
    'chain': {'L': True, 'sigma': True, 'd': True},
    'block': {'L': True, 'sigma': True, 'n': True, 'd_b': True},
    'sdca': {'L': True, 'mu': True, 'n': True},
    'ncvx': {'n': True, 'd': True, 'mu': True, 'L': True, 'spread': True,
             'seed': False},
}


def _fail(path, msg):
    raise ConfigurationError("{}: {}".format(path, msg))


def _number(path, value, integer=False, positive=True):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        _fail(path, "expected a number, got {!r}".format(value))
    if integer and int(value) != value:
        _fail(path, "expected an integer, got {!r}".format(value))
    if positive and not value > 0:
        _fail(path, "must be positive, got {!r}".format(value))
    return int(value) if integer else float(value)


def _seed(path, value):
    value = _number(path, value, integer=True, positive=False)
    if value < 0:
        _fail(path, "must be a non-negative integer, got {!r}".format(value))
    return value


class RunSpec(object):
    """Validated run description.

    A spec is a json object::

        {"problem": {"kind": "block", "n": 64, "d_b": 8, "L": 16,
                     "sigma": 1, "l1": 0.001},
         "solver": {"name": "svrg", "params": "auto"},
         "budget": {"epochs": 10, "target_eps": 1e-6},
         "seeds": [1, 2],
         "output": "results"}

    ``"solvers"`` may hold a list of solver objects instead of ``"solver"``.
    ``params`` is ``"auto"``, ``"preset:<name>"`` or an object with any of
    eta, m, P (``"uniform"``, ``"importance"`` or a list), epoch_mode,
    table_init, record_every, alpha0.
    """
    def __init__(self, problem, solvers, budget, seeds, output=None):
        self.problem = problem
        self.solvers = solvers
        self.budget = budget
        self.seeds = seeds
        self.output = output

    def __repr__(self):
        return '<{} {}>'.format(type(self).__name__, self.canonical())

    def to_dict(self):
        spec = OrderedDict([
            ('problem', self.problem),
            ('solvers', self.solvers),
            ('budget', self.budget),
            ('seeds', self.seeds),
        ])
        if self.output is not None:
            spec['output'] = self.output
        return spec

    def canonical(self):
        return utils.canonical_json(self.to_dict())

    def replace(self, **changes):
        kwargs = dict(self.to_dict())
        kwargs.update(changes)
        return type(self).from_dict(kwargs)

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except ValueError as err:
            raise ConfigurationError(
                "spec is not valid json (line {}, column {}): {}".format(
                    getattr(err, 'lineno', '?'), getattr(err, 'colno', '?'),
                    getattr(err, 'msg', err)))
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            _fail('spec', "expected a json object")
        unknown = set(doc) - {'problem', 'solver', 'solvers', 'budget',
                              'seeds', 'output'}
        if unknown:
            _fail('spec', "unknown fields {}".format(sorted(unknown)))

        problem = cls._problem(doc.get('problem'))
        if 'solver' in doc and 'solvers' in doc:
            _fail('spec', "give either 'solver' or 'solvers', not both")
        if 'solver' in doc:
            entries = [('solver', doc['solver'])]
        elif 'solvers' in doc:
            items = doc['solvers']
            if not isinstance(items, list) or not items:
                _fail('solvers', "expected a non-empty list")
            entries = [('solvers[{}]'.format(i), item)
                       for i, item in enumerate(items)]
        else:
            _fail('spec', "missing 'solver'")
        solver_specs = [cls._solver(path, entry, problem)
                        for path, entry in entries]
        names = [s['name'] for s in solver_specs]
        if len(set(names)) != len(names):
            _fail('solvers', "duplicate solver names {}".format(names))

        budget = cls._budget(doc.get('budget'))
        seeds = doc.get('seeds')
        if not isinstance(seeds, list) or not seeds:
            _fail('seeds', "expected a non-empty list of integers")
        seeds = [_seed('seeds[{}]'.format(i), s) for i, s in enumerate(seeds)]
        if len(set(seeds)) != len(seeds):
            _fail('seeds', "duplicate seeds {}".format(seeds))
        output = doc.get('output')
        if output is not None and not isinstance(output, str):
            _fail('output', "expected a path string")
        return cls(problem, solver_specs, budget, seeds, output)

    @staticmethod
    def _problem(spec):
        if not isinstance(spec, dict):
            _fail('problem', "expected an object")
        kind = spec.get('kind')
        if kind not in PROBLEM_KEYS:
            _fail('problem.kind', "expected one of {}, got {!r}".format(
                sorted(PROBLEM_KEYS), kind))
        fields = PROBLEM_KEYS[kind]
        unknown = set(spec) - set(fields) - {'kind', 'l1'}
        if unknown:
            _fail('problem', "unknown fields {} for kind '{}'".format(
                sorted(unknown), kind))
        out = OrderedDict(kind=kind)
        for key, required in fields.items():
            path = 'problem.{}'.format(key)
            if key not in spec:
                if required:
                    _fail(path, "missing")
                continue
            if key == 'seed':
                out[key] = _seed(path, spec[key])
                continue
            integer = key in ('n', 'd', 'd_b')
            out[key] = _number(path, spec[key], integer=integer,
                               positive=key != 'spread')
        if 'l1' in spec:
            if kind == 'sdca':
                _fail('problem.l1', "not supported for kind 'sdca'")
            out['l1'] = _number('problem.l1', spec['l1'], positive=False)
            if out['l1'] < 0:
                _fail('problem.l1', "must be >= 0")
        return out

    @staticmethod
    def _solver(path, spec, problem):
        if isinstance(spec, str):
            spec = {'name': spec}
        if not isinstance(spec, dict):
            _fail(path, "expected an object or a solver name")
        name = spec.get('name')
        if name not in SOLVER_NAMES:
            _fail(path + '.name', "expected one of {}, got {!r}".format(
                list(SOLVER_NAMES), name))
        kind = problem['kind']
        if name == 'sdca' and kind != 'sdca':
            _fail(path + '.name', "sdca requires kind=sdca")
        if name == 'sarah' and problem.get('l1'):
            _fail(path + '.name', "sarah does not support l1")
        params = spec.get('params', {})
        if params == 'auto':
            if name not in AUTO_SOLVERS:
                _fail(path + '.params',
                      "'auto' is only defined for svrg and sarah")
        elif isinstance(params, str) and params.startswith('preset:'):
            preset = params.split(':', 1)[1]
            if name not in AUTO_SOLVERS:
                _fail(path + '.params', "presets apply to svrg and sarah")
            if preset not in solvers.PRESETS:
                _fail(path + '.params', "unknown preset '{}'".format(preset))
        elif isinstance(params, dict):
            unknown = set(params) - set(PARAM_KEYS)
            if unknown:
                _fail(path + '.params', "unknown fields {}".format(
                    sorted(unknown)))
            for key in ('eta', 'm'):
                if key in params:
                    _number('{}.params.{}'.format(path, key), params[key])
            if 'record_every' in params:
                _number(path + '.params.record_every',
                        params['record_every'], integer=True)
            P = params.get('P')
            if P is not None and not (
                    P in ('uniform', 'importance') or isinstance(P, list)):
                _fail(path + '.params.P',
                      "expected 'uniform', 'importance' or a list")
        else:
            _fail(path + '.params',
                  "expected 'auto', 'preset:<name>' or an object")
        return OrderedDict([('name', name), ('params', params)])

    @staticmethod
    def _budget(spec):
        if not isinstance(spec, dict):
            _fail('budget', "expected an object")
        unknown = set(spec) - {'epochs', 'grad_units', 'target_eps'}
        if unknown:
            _fail('budget', "unknown fields {}".format(sorted(unknown)))
        given = [key for key in ('epochs', 'grad_units') if key in spec]
        if len(given) != 1:
            _fail('budget', "exactly one of 'epochs' or 'grad_units' is "
                  "required")
        out = OrderedDict()
        key = given[0]
        out[key] = _number('budget.' + key, spec[key], integer=True)
        if 'target_eps' in spec:
            out['target_eps'] = _number('budget.target_eps',
                                        spec['target_eps'])
        return out

    # execution
    def build(self):
        """Return ``(target, problem)``: the object handed to the solvers
        (the `SdcaInstance` for kind sdca) and its `FiniteSumProblem`.
        """
        params = dict(self.problem)
        kind = params.pop('kind')
        weight = params.pop('l1', 0.0)
        if kind == 'ncvx':
            params.setdefault('seed', 0)
        target = adversarial.build(kind, **params)
        if kind == 'sdca':
            return target, target.problem()
        problem = target
        if weight:
            problem = with_psi(problem, l1(weight))
            scale = max(1.0, abs(problem.objective(np.zeros(problem.d))))
            tol = 1e-3 * self.budget.get('target_eps', 1e-9) * scale
            x_ref, f_ref = reference_solve(problem, tol)
            problem = with_optimum(problem, x_ref, f_ref)
        return problem, problem

    def _distribution(self, problem, P):
        if P is None or P == 'uniform':
            return None
        if P == 'importance':
            return importance_distribution(problem)
        try:
            return SamplingDistribution(P)
        except InvalidArgument as err:
            raise ConfigurationError("params.P: {}".format(err))

    def config(self, solver_spec, problem, seed):
        """`SolverConfig` for one ``(solver, seed)`` run.
        """
        name, params = solver_spec['name'], solver_spec['params']
        budget = self.budget
        units = budget.get('grad_units')
        if units is not None:
            epochs = units // problem.n + 1
        else:
            epochs = budget['epochs']
        common = dict(epochs=epochs, seed=seed, grad_units=units,
                      tol=budget.get('target_eps'))
        if params == 'auto':
            if name == 'svrg' and self.problem['kind'] == 'ncvx':
                return solvers.nonconvex_config(problem, **common)
            return solvers.svrg_config(problem, **common)
        if isinstance(params, str):
            return solvers.preset_config(params.split(':', 1)[1], problem,
                                         **common)
        params = dict(params)
        preset = params.pop('preset', None)
        P = self._distribution(problem, params.pop('P', None))
        if preset:
            base = solvers.preset_config(preset, problem, P=P, **common)
        else:
            base = solvers.SolverConfig(P=P, **common)
        return base._replace(**params)

    def jobs(self, seeds=None):
        target, problem = self.build()
        for solver_spec in self.solvers:
            name = solver_spec['name']
            run_on = target if name == 'sdca' else problem
            for seed in seeds or self.seeds:
                config = self.config(solver_spec, problem, seed)
                yield Job((name, seed), run_solver, (name, run_on, config))

    def execute(self, threads=None):
        """Run every ``(solver, seed)`` pair. Returns an ordered mapping of
        those keys to traces.
        """
        try:
            jobs = list(self.jobs())
        except (InvalidArgument, UnsupportedFeature) as err:
            raise ConfigurationError(str(err))
        return run_batch(jobs, threads=threads)

    def reached(self, trace):
        """Whether `trace` met the budget's target (True when none is set).
        """
        eps = self.budget.get('target_eps')
        if eps is None:
            return True
        return complexity_to_eps(trace, eps, relative=True) is not None


def summary_frame(spec, traces):
    """One row per run with the canonical spec embedded.
    """
    import pandas as pd
    canon = spec.canonical()
    rows = []
    for (name, seed), trace in traces.items():
        final = trace.final
        rows.append(OrderedDict([
            ('solver', name),
            ('seed', seed),
            ('complete', bool(trace.complete)),
            ('reached', bool(spec.reached(trace))),
            ('grad_units', final.grad_units),
            ('epochs', final.epoch),
            ('final_suboptimality', np.nan if final.suboptimality is None
             else max(final.suboptimality, 0.0)),
            ('spec', canon),
        ]))
    return pd.DataFrame(rows)


def rates_frame(spec, traces, window=None):
    """Measured per epoch contraction of each solver next to the rate
    guarantees of its parameters.
    """
    import pandas as pd
    _, problem = spec.build()
    rows = []
    for solver_spec in spec.solvers:
        name = solver_spec['name']
        runs = [trace for (key, _), trace in traces.items() if key == name]
        config = spec.config(solver_spec, problem, spec.seeds[0])
        rho_hat = estimate_mean_rate(runs, window).rho_hat
        theory = bound = np.nan
        P = config.distribution(problem)
        if name in AUTO_SOLVERS and config.eta is not None:
            L_Q = effective_lipschitz(problem, P)
            m = config.m
            try:
                theory = solvers.theorem1_rate(problem.mu, config.eta, m,
                                               L_Q)
            except InvalidArgument:
                pass
            bound = solvers.rate_bound(problem.n, kappa_q(problem, P))
        rows.append(OrderedDict([
            ('solver', name),
            ('rho_hat', rho_hat),
            ('theorem1_rate', theory),
            ('bound', bound),
            ('ratio', rho_hat / bound),
        ]))
    return pd.DataFrame(rows)


__all__ = [
    'SupportTracker', 'sdca_expectation_step', 'sdca_operator',
    'exact_sdca_mean', 'reference_solve', 'run_solver', 'block_length',
    'speedup_experiment', 'RunSpec', 'summary_frame', 'rates_frame',
    'estimate_rate', 'complexity_to_eps',
]
