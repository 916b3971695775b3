# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
"""
Worst case instances and support tracking utilities.

The chain function is

    phi(x) = (L - sigma) / 4 * (<x, A x> / 2 - x_1)

with ``A`` the tridiagonal (-1, 2, -1) matrix. ``A`` is never materialized,
products use the stencil directly. The block instance stores its components
as ``n * (phi(x_i) + sigma / 2 ||x||^2)`` so that ``F`` equals the sum
``f = sum_i (phi(x_i) + sigma / 2 ||x||^2)`` and ``kappa_Q = L / sigma``.
"""
import itertools
from collections import namedtuple

import numpy as np
from scipy import linalg

from . import utils
from .core import FiniteSumProblem
from .utils import InvalidArgument

log = utils.get_logger(__name__)

KINDS = ('chain', 'block', 'sdca', 'ncvx')


def _check_chain_args(L, sigma, d):
    if not (L > sigma > 0):
        raise InvalidArgument(
            "need L > sigma > 0, got L={}, sigma={}".format(L, sigma))
    if int(d) != d or d < 2:
        raise InvalidArgument("chain length must be >= 2, got {}".format(d))


def _check_kappa(kappa):
    if not kappa >= 1:
        raise InvalidArgument("kappa must be >= 1, got {}".format(kappa))


def apply_a(X):
    """Multiply every row of `X` (or a single vector) by the tridiagonal
    ``A`` in O(size) time.
    """
    Y = 2.0 * X
    Y[..., 1:] -= X[..., :-1]
    Y[..., :-1] -= X[..., 1:]
    return Y


def a_eigenvalue_bounds(d):
    """Extreme eigenvalues of the ``d x d`` matrix ``A``.
    """
    c = np.cos(np.pi / (d + 1))
    return 2.0 - 2.0 * c, 2.0 + 2.0 * c


def q_one(kappa):
    """``(sqrt(kappa) - 1) / (sqrt(kappa) + 1)``
    """
    _check_kappa(kappa)
    root = np.sqrt(kappa)
    return (root - 1.0) / (root + 1.0)


def q_n(n, kappa):
    """Ratio of the geometric minimizer of each block.
    """
    _check_kappa(kappa)
    if n < 1:
        raise InvalidArgument("n must be >= 1, got {}".format(n))
    root = np.sqrt((kappa - 1.0) / n + 1.0)
    return (root - 1.0) / (root + 1.0)


def _geometric(q, d):
    return q ** np.arange(1, d + 1, dtype=np.float64)


def chain_minimizer(kappa, d):
    """``(q_1, q_1^2, ..., q_1^d)``; the infinite chain minimizer truncated
    to `d` entries.
    """
    return _geometric(q_one(kappa), d)


def block_minimizer(n, kappa, d_b):
    """``(q_n, q_n^2, ..., q_n^{d_b})``, one block of the infinite
    minimizer of the block instance.
    """
    return _geometric(q_n(n, kappa), d_b)


def block_optimal_value(n, L, sigma):
    """Closed form ``F*`` of the untruncated block instance,
    ``-n (L - sigma) q_n / 8``.
    """
    return -n * (L - sigma) * q_n(n, L / sigma) / 8.0


def tridiagonal_solve(L, sigma, n, d_b):
    """Exact minimizer of one truncated block:
    ``((L - sigma)/4 A + n sigma I) x = (L - sigma)/4 e_1``.
    """
    _check_chain_args(L, sigma, d_b)
    c = (L - sigma) / 4.0
    bands = np.empty((3, d_b))
    bands[0] = -c
    bands[1] = 2.0 * c + n * sigma
    bands[2] = -c
    rhs = np.zeros(d_b)
    rhs[0] = c
    return linalg.solve_banded((1, 1), bands, rhs)


def _block_problem(n, L, sigma, d_b, name):
    _check_chain_args(L, sigma, d_b)
    if int(n) != n or n < 1:
        raise InvalidArgument("n must be a positive integer, got {}"
                              .format(n))
    n, d_b = int(n), int(d_b)
    L, sigma = float(L), float(sigma)
    c = (L - sigma) / 4.0
    ridge = n * sigma
    d = n * d_b
    _, hi = a_eigenvalue_bounds(d_b)

    def block(i):
        return slice(i * d_b, (i + 1) * d_b)

    def local_grad(i, x):
        g = apply_a(x[i * d_b:(i + 1) * d_b])
        g[0] -= 1.0
        g *= n * c
        return g

    def local_value(i, x):
        xi = x[i * d_b:(i + 1) * d_b]
        return n * c * (0.5 * float(xi @ apply_a(xi)) - xi[0])

    def smooth_value(x):
        X = x.reshape(n, d_b)
        return (c * (0.5 * float(np.sum(X * apply_a(X))) - X[:, 0].sum()) +
                0.5 * ridge * float(x @ x))

    def full_grad(x):
        X = x.reshape(n, d_b)
        G = c * apply_a(X) + ridge * X
        G[:, 0] -= c
        return G.ravel()

    def hessvec(v):
        V = v.reshape(n, d_b)
        return (c * apply_a(V) + ridge * V).ravel()

    xb = tridiagonal_solve(L, sigma, n, d_b)
    return FiniteSumProblem(
        n, d, local_grad, local_value, smooth_value,
        lipschitz=np.full(n, n * L),
        L=c * hi + ridge,
        mu=ridge,
        ridge=ridge,
        block=block,
        full_grad=full_grad,
        hessvec=hessvec,
        known_minimizer=np.tile(xb, n),
        known_value=-0.5 * n * c * xb[0],
        name=name,
        params={'kind': name, 'n': n, 'd_b': d_b, 'L': L, 'sigma': sigma},
    )


def nesterov_chain(L, sigma, d):
    """Single component chain ``phi(x) + sigma/2 ||x||^2`` on dimension `d`.
    """
    return _block_problem(1, L, sigma, d, 'chain')


def block_adversarial(n, L, sigma, d_b):
    """The ``n`` block instance on dimension ``n * d_b``.
    """
    return _block_problem(n, L, sigma, d_b, 'block')


def last_nonzero(x):
    """``N(x)``: 1-based index of the last nonzero entry, 0 for zero vectors.
    """
    nz = np.flatnonzero(np.asarray(x) != 0.0)
    return int(nz[-1]) + 1 if nz.size else 0


def support_profile(x, n, d_b):
    """Vector ``(N(x_1), ..., N(x_n))`` of per block support indices.
    """
    mask = np.asarray(x).reshape(n, d_b) != 0.0
    last = d_b - np.argmax(mask[:, ::-1], axis=1)
    return np.where(mask.any(axis=1), last, 0)


def distance_floor(n, kappa, supports, minimizer_block=None):
    """``sum_i q_n^(2 N(x_i)) / n``; lower bounds the squared distance ratio
    ``||x - x*||^2 / ||x*||^2`` of any point with the given supports.

    With `minimizer_block` (one block of a truncated instance's exact
    minimizer) the tail mass of that block replaces ``q_n^(2N)``, which keeps
    the bound exact after truncation.
    """
    supports = np.asarray(supports, dtype=np.int64)
    if minimizer_block is None:
        q = q_n(n, kappa)
        return float(np.mean(q ** (2.0 * supports)))
    sq = np.asarray(minimizer_block, dtype=np.float64) ** 2
    # tails[N] = sum of the squared entries after the first N
    tails = np.append(np.cumsum(sq[::-1])[::-1], 0.0)
    return float(np.mean(tails[supports]) / tails[0])


def support_distance_bound(kappa, N):
    """``q^(2N + 2) / (1 - q^2)``: the closest any point with ``N(x) = N``
    gets to the chain minimizer, in squared distance.
    """
    q = q_one(kappa)
    return q ** (2 * N + 2) / (1.0 - q * q)


def span_floor(n, kappa, k):
    """``(1 - (1 - q_n^2) / n)^k``, the expected squared distance ratio floor
    after `k` uniformly sampled steps of any span method.
    """
    q = q_n(n, kappa)
    return (1.0 - (1.0 - q * q) / n) ** k


def span_floor_relaxed(n, k):
    """``(1 - 2/n)^k``; below `span_floor` whenever ``n >= kappa``.
    """
    return (1.0 - 2.0 / n) ** k


def svrg_epoch_floor(n, kappa):
    """``q_n^2 (1 - 2/n)^n``, the much weaker floor left for one SVRG epoch
    of size ``n`` once the snapshot has touched every block.
    """
    q = q_n(n, kappa)
    return q * q * span_floor_relaxed(n, n)


class SdcaInstance(object):
    """Quadratic losses ``phi_i(t) = t^2 / 2`` with data ``Y = c (n^2 I + J)``
    and ``lambda = mu``; the primal minimizer is 0.
    """
    loss = 'squared'

    def __init__(self, n, L, mu):
        if not (L > mu > 0):
            raise InvalidArgument(
                "need L > mu > 0, got L={}, mu={}".format(L, mu))
        if int(n) != n or n <= 2:
            raise InvalidArgument("need n > 2, got {}".format(n))
        self.n = n = int(n)
        self.L = float(L)
        self.mu = self.lam = float(mu)
        self.c2 = (self.L - self.mu) / (n ** 4 + 2 * n ** 2 + n)
        self.c = np.sqrt(self.c2)

    def __repr__(self):
        return '<{} n={} L={:g} mu={:g}>'.format(
            type(self).__name__, self.n, self.L, self.mu)

    @property
    def col_sq_norm(self):
        """``||y_i||^2 = c^2 ((n^2 + 1)^2 + n - 1)``
        """
        n = self.n
        return self.c2 * ((n * n + 1) ** 2 + n - 1)

    def column(self, i):
        y = np.full(self.n, self.c)
        y[i] += self.c * self.n * self.n
        return y

    def dot_column(self, i, x):
        """``y_i' x`` in O(n).
        """
        return self.c * (self.n * self.n * x[i] + x.sum())

    def matvec(self, v):
        """``Y v`` (``Y`` is symmetric) through the ``n^2 I + J`` structure.
        """
        return self.c * (self.n * self.n * v + v.sum())

    def primal(self, alpha):
        """``x = (1 / (lambda n)) sum_i alpha_i y_i``
        """
        return self.matvec(alpha) / (self.lam * self.n)

    def dual_objective(self, alpha):
        x = self.primal(alpha)
        return (0.5 * float(alpha @ alpha) / self.n +
                0.5 * self.lam * float(x @ x))

    @property
    def ratio(self):
        """Coefficient of the closed form coordinate update
        ``(c^2 + 2 c^2 n) / (c^2 n^3 + 2 c^2 n + c^2 + mu)``.
        """
        n, c2 = self.n, self.c2
        return (c2 + 2 * c2 * n) / (c2 * n ** 3 + 2 * c2 * n + c2 + self.mu)

    @property
    def theta(self):
        """Eigenvalue of the expectation operator on the all-ones vector.
        """
        n = self.n
        return (1.0 - 1.0 / n) - self.ratio * (n - 1.0) / n

    def problem(self):
        """The primal ``f_i(x) = (x' y_i)^2 / 2 + mu/2 ||x||^2`` as a
        `FiniteSumProblem`.
        """
        n, mu = self.n, self.mu
        top = self.c * (n * n + n)  # eigenvalue of Y on the ones vector

        def local_grad(i, x):
            return self.dot_column(i, x) * self.column(i)

        def local_value(i, x):
            return 0.5 * self.dot_column(i, x) ** 2

        def smooth_value(x):
            yx = self.matvec(x)
            return 0.5 * float(yx @ yx) / n + 0.5 * mu * float(x @ x)

        def hessvec(v):
            return self.matvec(self.matvec(v)) / n + mu * v

        return FiniteSumProblem(
            n, n, local_grad, local_value, smooth_value,
            lipschitz=np.full(n, self.col_sq_norm + mu),
            L=top * top / n + mu,
            mu=mu,
            ridge=mu,
            full_grad=hessvec,
            hessvec=hessvec,
            known_minimizer=np.zeros(n),
            known_value=0.0,
            name='sdca',
            params={'kind': 'sdca', 'n': n, 'L': self.L, 'mu': mu},
        )


def sdca_adversarial(n, L, mu):
    """Build the SDCA lower bound instance.
    """
    return SdcaInstance(n, L, mu)


def sdca_theta(n, L, mu):
    return SdcaInstance(n, L, mu).theta


NonconvexSumInstance = namedtuple(
    'NonconvexSumInstance',
    'n d mu L spread seed matrices linear abar bbar minimizer '
    'nonconvex_components'
)


def nonconvex_instance(n, d, mu, L, spread, seed):
    """Quadratics ``x' A_i x / 2 + b_i' x`` with ``A_i = Abar + Delta_i``.

    ``Abar`` has a log-uniform spectrum on ``[mu, L]`` (both ends pinned),
    the ``Delta_i`` are symmetric, sum exactly to zero and are scaled so the
    largest spectral norm equals `spread`.
    """
    if not (L > mu > 0):
        raise InvalidArgument(
            "need L > mu > 0, got L={}, mu={}".format(L, mu))
    if spread < 0:
        raise InvalidArgument("spread must be >= 0, got {}".format(spread))
    n, d = int(n), int(d)
    rng = np.random.default_rng(seed)

    eigs = np.exp(rng.uniform(np.log(mu), np.log(L), size=d))
    eigs[0] = mu
    if d > 1:
        eigs[-1] = L
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    abar = (Q * eigs) @ Q.T
    abar = 0.5 * (abar + abar.T)

    G = rng.standard_normal((n, d, d))
    deltas = 0.5 * (G + G.transpose(0, 2, 1))
    deltas -= deltas.mean(axis=0)
    norms = np.abs(np.linalg.eigvalsh(deltas)).max(axis=1)
    top = norms.max()
    if spread > 0 and top > 0:
        deltas *= spread / top
    else:
        deltas[:] = 0.0
    matrices = abar + deltas

    linear = rng.standard_normal((n, d))
    bbar = linear.mean(axis=0)
    minimizer = np.linalg.solve(abar, -bbar)
    flag = bool(np.any(np.linalg.eigvalsh(matrices)[:, 0] < 0))
    log.debug("nonconvex instance n={} d={} spread={} indefinite={}"
              .format(n, d, spread, flag))
    return NonconvexSumInstance(n, d, mu, L, spread, seed, matrices, linear,
                                abar, bbar, minimizer, flag)


def nonconvex_problem(inst):
    """`FiniteSumProblem` view of a `NonconvexSumInstance`.
    """
    A, b, abar, bbar = inst.matrices, inst.linear, inst.abar, inst.bbar
    lips = np.abs(np.linalg.eigvalsh(A)).max(axis=1)
    spectrum = np.linalg.eigvalsh(abar)

    def local_grad(i, x):
        return A[i] @ x + b[i]

    def local_value(i, x):
        return 0.5 * float(x @ A[i] @ x) + float(b[i] @ x)

    def smooth_value(x):
        return 0.5 * float(x @ abar @ x) + float(bbar @ x)

    def full_grad(x):
        return abar @ x + bbar

    def hessvec(v):
        return abar @ v

    return FiniteSumProblem(
        inst.n, inst.d, local_grad, local_value, smooth_value,
        lipschitz=lips,
        L=spectrum[-1],
        mu=spectrum[0],
        full_grad=full_grad,
        hessvec=hessvec,
        known_minimizer=inst.minimizer,
        known_value=smooth_value(inst.minimizer),
        name='ncvx',
        params={'kind': 'ncvx', 'n': inst.n, 'd': inst.d, 'mu': inst.mu,
                'L': inst.L, 'spread': inst.spread, 'seed': inst.seed,
                'nonconvex_components': inst.nonconvex_components},
    )


def nonconvex_quadratic_sum(n, d, mu, L, spread, seed):
    """Seeded test family with possibly indefinite components and a strongly
    convex average.
    """
    return nonconvex_problem(nonconvex_instance(n, d, mu, L, spread, seed))


def build(kind, **params):
    """Build an instance by kind name (``chain``, ``block``, ``sdca``,
    ``ncvx``). ``sdca`` returns the `SdcaInstance`, the rest a
    `FiniteSumProblem`.
    """
    try:
        factory = _factories[kind]
    except KeyError:
        raise InvalidArgument(
            "unknown problem kind '{}' (expected one of {})"
            .format(kind, ', '.join(KINDS)))
    return factory(**params)


_factories = {
    'chain': nesterov_chain,
    'block': block_adversarial,
    'sdca': sdca_adversarial,
    'ncvx': nonconvex_quadratic_sum,
}


def enumerate_draws(n, k):
    """Every index sequence of length `k` over ``range(n)``.
    """
    return itertools.product(range(n), repeat=k)