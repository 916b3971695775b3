# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""
Finite-sum problems ``F = (1/n) sum_i f_i + psi`` and their oracles.

Each component is stored as ``f_i(x) = h_i(x) + (ridge / 2) ||x||^2`` where
the gradient of ``h_i`` lives on a slice ``block(i)`` of ``x``. Problems
whose components touch every coordinate simply use the whole vector as the
block. Keeping the shared ridge term apart lets table based methods store
only the local part of each component gradient.
"""
from collections import namedtuple

import numpy as np

from . import utils
from .utils import InvalidArgument, UnsupportedFeature, BudgetExhausted

log = utils.get_logger(__name__)

WHOLE = slice(None)


class Psi(namedtuple('Psi', 'kind weight')):
    """Regularizer descriptor. Supported kinds are ``'none'`` and ``'l1'``.
    """
    __slots__ = ()

    def value(self, x):
        if self.kind == 'none':
            return 0.0
        if self.kind == 'l1':
            return self.weight * float(np.abs(x).sum())
        raise UnsupportedFeature(
            "unsupported regularizer '{}'".format(self.kind))

    @property
    def is_none(self):
        return self.kind == 'none' or (self.kind == 'l1' and not self.weight)


NONE = Psi('none', 0.0)


def l1(weight):
    """An l1 regularizer ``weight * ||x||_1``.
    """
    weight = float(weight)
    if weight < 0:
        raise InvalidArgument("l1 weight must be >= 0, got {}".format(weight))
    return Psi('l1', weight)


class GradientMeter(object):
    """Count gradient evaluation units, optionally against a cap.

    One component gradient costs 1 unit and a full gradient costs ``n``.
    """
    def __init__(self, cap=None):
        self.units = 0
        self.cap = cap

    def __repr__(self):
        return '{}(units={}, cap={})'.format(
            type(self).__name__, self.units, self.cap)

    def charge(self, units):
        if self.cap is not None and self.units + units > self.cap:
            raise BudgetExhausted(
                "charging {} units would exceed the cap of {} (spent {})"
                .format(units, self.cap, self.units))
        self.units += units
        return self.units

    def remaining(self):
        if self.cap is None:
            return float('inf')
        return self.cap - self.units


class SamplingDistribution(object):
    """Probability vector ``P = (p_1, ..., p_n)`` used to draw components.
    """
    tol = 1e-12

    def __init__(self, p):
        p = utils.as_vector(p, name='p')
        if p.size == 0:
            raise InvalidArgument("a distribution needs at least one entry")
        if not np.all(p > 0):
            raise InvalidArgument(
                "all probabilities must be positive, got min {}"
                .format(p.min()))
        if abs(p.sum() - 1.0) > self.tol:
            raise InvalidArgument(
                "probabilities must sum to 1, got {!r}".format(p.sum()))
        self.p = utils.frozen(p)
        self.is_uniform = bool(np.all(p == p[0]))

    @classmethod
    def uniform(cls, n):
        return cls(np.full(n, 1.0 / n))

    def __repr__(self):
        if self.is_uniform:
            return '{}.uniform({})'.format(type(self).__name__, len(self))
        return '{}({})'.format(type(self).__name__, self.p.tolist())

    def __len__(self):
        return self.p.shape[0]

    def __getitem__(self, index):
        return self.p[index]

    def __array__(self, dtype=None):
        return np.asarray(self.p, dtype=dtype)

    def draw(self, rng, size):
        """Draw `size` iid component indices with ``rng``.
        """
        if self.is_uniform:
            return rng.integers(len(self), size=size)
        return rng.choice(len(self), size=size, p=self.p)

    def describe(self):
        """Json friendly description (used in trace meta data).
        """
        return 'uniform' if self.is_uniform else self.p.tolist()


class FiniteSumProblem(object):
    '''Oracle bundle for ``F(x) = (1/n) sum_i f_i(x) + psi(x)``.

    :param int n: number of components
    :param int d: ambient dimension
    :param local_grad: ``(i, x) -> grad h_i(x)`` restricted to ``block(i)``
    :param local_value: ``(i, x) -> h_i(x)``
    :param smooth_value: ``x -> f(x)`` (ridge included, psi excluded)
    :param lipschitz: per component smoothness constants ``L_i``
    :param float L: smoothness constant of ``f``
    :param float mu: strong convexity modulus of ``F``
    :param float ridge: coefficient of the ``(ridge / 2) ||x||^2`` term
        shared by every component
    :param block: ``i -> slice`` locating the support of ``grad h_i``
    :param full_grad: optional fast oracle for ``grad f`` (defaults to
        averaging the components)
    :param hessvec: optional Hessian-vector product of ``f`` for quadratic
        problems; enables cancellation free suboptimality
    '''
    def __init__(self, n, d, local_grad, local_value, smooth_value,
                 lipschitz, L, mu, ridge=0.0, block=None, psi=NONE,
                 full_grad=None, hessvec=None, known_minimizer=None,
                 known_value=None, name=None, params=None, check=True):
        self._kwargs = dict(locals())
        self._kwargs.pop('self')

        if int(n) != n or n < 1:
            raise InvalidArgument("n must be a positive integer, got {}"
                                  .format(n))
        if int(d) != d or d < 1:
            raise InvalidArgument("d must be a positive integer, got {}"
                                  .format(d))
        self.n = int(n)
        self.d = int(d)
        self.lipschitz = utils.frozen(lipschitz)
        if self.lipschitz.shape != (self.n,):
            raise InvalidArgument("need one Lipschitz constant per component")
        if not np.all(self.lipschitz > 0):
            raise InvalidArgument("Lipschitz constants must be positive")
        self.L = utils.positive('L', L)
        self.mu = utils.positive('mu', mu)
        lmax = self.lipschitz.max()
        slack = 1e-12 * lmax
        if not (self.mu <= self.L + slack and self.L <= lmax + slack):
            raise InvalidArgument(
                "need 0 < mu <= L <= max L_i, got mu={}, L={}, max L_i={}"
                .format(self.mu, self.L, lmax))
        self.ridge = float(ridge)
        self.psi = psi
        self.name = name or 'problem'
        self.params = dict(params or {})

        self._local_grad = local_grad
        self._local_value = local_value
        self._smooth_value = smooth_value
        self._block = block
        self._full_grad = full_grad
        self._hessvec = hessvec

        self.known_minimizer = None
        if known_minimizer is not None:
            self.known_minimizer = utils.frozen(
                utils.as_vector(known_minimizer, self.d, 'known_minimizer'))
        self._known_value = known_value

        if check and self.known_minimizer is not None and psi.is_none:
            self._check_minimizer()

    def __repr__(self):
        return '<{} {} n={} d={} L={:g} mu={:g}>'.format(
            type(self).__name__, self.name, self.n, self.d, self.L, self.mu)

    def replace(self, **changes):
        """Return a copy of this (immutable) problem with `changes` applied.
        """
        kwargs = dict(self._kwargs)
        kwargs.update(changes)
        return type(self)(**kwargs)

    def _check_minimizer(self):
        tol = self.tol_min()
        norm = np.linalg.norm(self.gradient(self.known_minimizer))
        if norm > tol:
            raise InvalidArgument(
                "known minimizer of '{}' is not stationary: "
                "||grad F(x*)|| = {:g} > {:g}".format(self.name, norm, tol))

    def tol_min(self):
        """Scale aware stationarity tolerance ``1e-8 max(1, ||grad f_1(0)||)``.
        """
        g0 = self.component_grad(0, np.zeros(self.d))
        return 1e-8 * max(1.0, float(np.linalg.norm(g0)))

    # oracles
    def block(self, i):
        if self._block is None:
            return WHOLE
        return self._block(i)

    def local_grad(self, i, x):
        return self._local_grad(i, x)

    def component_grad(self, i, x):
        """Dense gradient of ``f_i`` at ``x``.
        """
        g = self.ridge * x if self.ridge else np.zeros(self.d)
        g[self.block(i)] += self._local_grad(i, x)
        return g

    def component_value(self, i, x):
        value = self._local_value(i, x)
        if self.ridge:
            value += 0.5 * self.ridge * float(x @ x)
        return value

    def gradient(self, x):
        """``grad f(x)`` without touching any budget meter.
        """
        if self._full_grad is not None:
            return self._full_grad(x)
        g = np.zeros(self.d)
        for i in range(self.n):
            g[self.block(i)] += self._local_grad(i, x)
        g /= self.n
        if self.ridge:
            g += self.ridge * x
        return g

    def smooth(self, x):
        return self._smooth_value(x)

    def objective(self, x):
        """``F(x) = f(x) + psi(x)``
        """
        return self._smooth_value(x) + self.psi.value(x)

    def hessvec(self, v):
        if self._hessvec is None:
            raise UnsupportedFeature(
                "'{}' has no Hessian-vector oracle".format(self.name))
        return self._hessvec(v)

    @property
    def is_quadratic(self):
        return self._hessvec is not None

    @property
    def f_star(self):
        """``F(x*)`` when known, else None.
        """
        if self._known_value is not None:
            return float(self._known_value)
        if self.known_minimizer is not None:
            return self.objective(self.known_minimizer)
        return None

    def uniform(self):
        return SamplingDistribution.uniform(self.n)

    def describe(self):
        """Json friendly instance descriptor.
        """
        desc = {'name': self.name, 'n': self.n, 'd': self.d}
        desc.update(self.params)
        if not self.psi.is_none:
            desc['l1'] = self.psi.weight
        return desc


def _check_point(problem, x):
    return utils.as_vector(x, problem.d)


def full_grad(problem, x, meter=None):
    """Return ``(1/n) sum_i grad f_i(x)`` charging ``n`` units to `meter`.
    """
    x = _check_point(problem, x)
    if meter is not None:
        meter.charge(problem.n)
    return problem.gradient(x)


def _probabilities(problem, P):
    p = np.asarray(P, dtype=np.float64)
    if p.shape != (problem.n,):
        raise InvalidArgument(
            "distribution has {} entries for n={}".format(p.size, problem.n))
    if np.any(p <= 0):
        raise InvalidArgument("every p_i must be positive")
    return p


def effective_lipschitz(problem, P):
    """The effective Lipschitz constant ``L_Q = max_i L_i / (p_i n)``.
    """
    p = _probabilities(problem, P)
    return float(np.max(problem.lipschitz / (p * problem.n)))


def kappa_q(problem, P):
    """Effective condition number ``L_Q / mu``.
    """
    return effective_lipschitz(problem, P) / problem.mu


def importance_distribution(problem):
    """``p_i = L_i / sum_j L_j``; gives ``L_Q = mean(L_i)``.
    """
    lips = problem.lipschitz
    return SamplingDistribution(lips / lips.sum())


def nonconvex_importance_distribution(problem):
    """``p_i = L_i^2 / sum_j L_j^2``; minimizes ``lbar``.
    """
    sq = problem.lipschitz ** 2
    return SamplingDistribution(sq / sq.sum())


def lbar(problem, P):
    """``(sum_i L_i^2 / (n^2 p_i))^(1/2)``
    """
    p = _probabilities(problem, P)
    n = problem.n
    return float(np.sqrt(np.sum(problem.lipschitz ** 2 / (n * n * p))))


def prox_psi(problem, eta, v):
    """``argmin_y psi(y) + ||y - v||^2 / (2 eta)``
    """
    psi = getattr(problem, 'psi', problem)
    eta = utils.positive('eta', eta)
    if psi.kind == 'none':
        return v
    if psi.kind == 'l1':
        thresh = eta * psi.weight
        if not thresh:
            return v
        return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)
    raise UnsupportedFeature("unsupported regularizer '{}'".format(psi.kind))


def suboptimality(problem, x):
    """``F(x) - F(x*)`` or None when the optimum is unknown.

    Quadratic problems with a stored minimizer use
    ``(x - x*)' H (x - x*) / 2`` which stays accurate near the optimum.
    """
    xstar = problem.known_minimizer
    if xstar is not None and problem.is_quadratic and problem.psi.is_none:
        delta = x - xstar
        return 0.5 * float(delta @ problem.hessvec(delta))
    fstar = problem.f_star
    if fstar is None:
        return None
    return problem.objective(x) - fstar


def dist_sq(problem, x):
    """``||x - x*||^2`` or None when the minimizer is unknown.
    """
    xstar = problem.known_minimizer
    if xstar is None:
        return None
    delta = x - xstar
    return float(delta @ delta)


def with_psi(problem, psi):
    """Attach a regularizer. A nonzero l1 term invalidates the closed form
    minimizer, so it is dropped.
    """
    if psi.is_none:
        return problem.replace(psi=psi)
    return problem.replace(psi=psi, known_minimizer=None, known_value=None,
                           check=False)


def with_optimum(problem, x_star, f_star):
    """Attach a numerically obtained optimum (see `harness.reference_solve`).
    """
    return problem.replace(known_minimizer=x_star, known_value=f_star,
                           check=False)


def check_gradients(problem, points, step=1e-5):
    """Largest relative error between every ``grad f_i`` and its central
    finite difference over `points`.
    """
    worst = 0.0
    eye = np.eye(problem.d)
    for x in points:
        x = _check_point(problem, x)
        for i in range(problem.n):
            g = problem.component_grad(i, x)
            fd = np.array([
                (problem.component_value(i, x + step * e) -
                 problem.component_value(i, x - step * e)) / (2 * step)
                for e in eye
            ])
            err = np.linalg.norm(g - fd) / max(1.0, np.linalg.norm(g))
            worst = max(worst, err)
    log.debug("finite difference check on '{}': worst error {:g}"
              .format(problem.name, worst))
    return worst
