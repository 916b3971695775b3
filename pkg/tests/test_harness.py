# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
'''
Measurement, oracle and experiment harness tests
'''
import json
import math
import numpy as np
import pytest
from spanbreaker import harness, solvers, adversarial, core, utils
from spanbreaker.measure import (
    Trace, estimate_rate, estimate_mean_rate, complexity_to_eps, mean_trace,
)
from spanbreaker.harness import RunSpec


def make_trace(values, units=None, solver='test', seed=0):
    trace = Trace({'solver': solver, 'seed': seed})
    units = units or [100 * i for i in range(len(values))]
    for epoch, (u, v) in enumerate(zip(units, values)):
        trace.record(u, epoch, v)
    return trace


class TestTrace(object):

    def test_units_must_increase(self):
        trace = make_trace([1.0, 0.5])
        with pytest.raises(utils.InvalidArgument):
            trace.record(100, 2, 0.1)

    def test_frame_clamps(self):
        trace = make_trace([1.0, -1e-13])
        frame = trace.frame
        assert list(frame.columns) == ['grad_units', 'epoch',
                                       'suboptimality', 'dist_sq']
        assert frame['suboptimality'].tolist() == [1.0, 0.0]
        assert frame['dist_sq'].isna().all()

    def test_final_and_key(self):
        trace = make_trace([1.0, 0.5], solver='svrg', seed=3)
        assert trace.final.suboptimality == 0.5
        assert trace.key == ('svrg', 3)
        assert Trace().final is None


class TestEstimateRate(object):

    def test_exact_geometric(self):
        est = estimate_rate([1.0, 0.5, 0.25, 0.125])
        assert est.rho_hat == pytest.approx(0.5)
        assert est.r_squared == pytest.approx(1.0)

    def test_constant(self):
        est = estimate_rate([1.0, 1.0, 1.0, 1.0])
        assert est.rho_hat == pytest.approx(1.0)
        assert est.r_squared == 1.0

    def test_noisy_geometric(self):
        rho, epochs = 0.7, 50
        for seed in range(100):
            rng = np.random.default_rng(seed)
            values = rho ** np.arange(epochs) * rng.uniform(0.9, 1.1, epochs)
            est = estimate_rate(values)
            assert 0.68 <= est.rho_hat <= 0.72
            assert 0 <= est.r_squared <= 1

    def test_default_window_is_last_half(self):
        est = estimate_rate(0.9 ** np.arange(20))
        assert est.window == (10, 19)

    def test_window(self):
        values = [1.0, 0.1, 0.05, 0.025, 0.0125]
        est = estimate_rate(values, window=(1, 4))
        assert est.rho_hat == pytest.approx(0.5)
        assert est.window == (1, 4)

    def test_truncates_at_zero(self):
        est = estimate_rate([1.0, 0.5, 0.25, 0.0, 0.5], window=(0, 4))
        assert est.window == (0, 2)
        with pytest.raises(utils.InsufficientData):
            estimate_rate([1.0, 0.5, 0.0, 0.1], window=(0, 3))

    def test_too_short(self):
        with pytest.raises(utils.InsufficientData):
            estimate_rate([1.0, 0.5])
        with pytest.raises(utils.InsufficientData):
            estimate_rate([])

    def test_trace_input(self):
        est = estimate_rate(make_trace([8.0, 4.0, 2.0, 1.0, 0.5, 0.25]))
        assert est.rho_hat == pytest.approx(0.5)

    def test_mean_rate(self):
        traces = [make_trace([2.0, 1.0, 0.5, 0.25]),
                  make_trace([4.0, 2.0, 1.0, 0.5])]
        epochs, values = mean_trace(traces)
        assert epochs.tolist() == [0, 1, 2, 3]
        assert values.tolist() == [3.0, 1.5, 0.75, 0.375]
        assert estimate_mean_rate(traces).rho_hat == pytest.approx(0.5)


class TestComplexity(object):

    @pytest.fixture
    def trace(self):
        return make_trace([1.0, 0.1, 0.01])

    def test_first_crossing(self, trace):
        assert complexity_to_eps(trace, 0.05) == 200

    def test_already_there(self, trace):
        assert complexity_to_eps(trace, 2.0) == 0

    def test_not_reached(self, trace):
        assert complexity_to_eps(trace, 0.001) is None

    def test_relative(self):
        trace = make_trace([10.0, 1.0, 0.1])
        assert complexity_to_eps(trace, 0.05, relative=True) == 200

    def test_bad_eps(self, trace):
        with pytest.raises(utils.InvalidArgument):
            complexity_to_eps(trace, 0.0)


class TestSdcaOracles(object):

    def test_ones_is_eigenvector(self, sdca8):
        out = harness.sdca_expectation_step(sdca8, np.ones(sdca8.n))
        theta = adversarial.sdca_theta(8, 2.0, 1.0)
        assert np.allclose(out, theta, rtol=1e-12, atol=0)

    def test_zero(self, sdca8):
        out = harness.sdca_expectation_step(sdca8, np.zeros(sdca8.n))
        assert not np.any(out)

    def test_rayleigh_quotient(self, sdca8):
        T = harness.sdca_operator(sdca8)
        ones = np.ones(sdca8.n)
        assert float(ones @ T @ ones) / sdca8.n == pytest.approx(
            sdca8.theta, rel=1e-12)

    def test_dense_matches_structured(self, sdca8, rng):
        alpha = rng.standard_normal(sdca8.n)
        assert np.allclose(harness.sdca_operator(sdca8) @ alpha,
                           harness.sdca_expectation_step(sdca8, alpha),
                           rtol=1e-12, atol=1e-15)

    def test_single_step_enumeration(self):
        inst = adversarial.sdca_adversarial(3, 2.0, 1.0)
        e1 = np.array([1.0, 0.0, 0.0])
        total = np.zeros(3)
        for i in range(3):
            alpha, x = e1.copy(), inst.primal(e1)
            solvers.sdca_step(inst, alpha, x, i)
            total += alpha
        assert np.allclose(total / 3, harness.sdca_expectation_step(inst, e1),
                           rtol=0, atol=1e-12)

    @pytest.mark.parametrize('k', [1, 2, 3, 4])
    def test_exact_mean_recursion(self, k, rng):
        inst = adversarial.sdca_adversarial(6, 2.0, 1.0)
        alpha0 = rng.standard_normal(inst.n)
        expect = alpha0
        for _ in range(k):
            expect = harness.sdca_expectation_step(inst, expect)
        assert np.allclose(harness.exact_sdca_mean(inst, alpha0, k), expect,
                           rtol=0, atol=1e-10)


class TestReferenceSolve(object):

    def test_chain_distance(self, chain):
        tol = 1e-10
        x_ref, f_ref = harness.reference_solve(chain, tol)
        exact = adversarial.tridiagonal_solve(16.0, 1.0, 1, chain.d)
        assert np.linalg.norm(x_ref - exact) <= math.sqrt(2 * tol / chain.mu)
        assert f_ref <= chain.f_star + tol

    def test_infinite_tolerance(self, chain):
        x_ref, f_ref = harness.reference_solve(chain, float('inf'))
        assert not np.any(x_ref)
        assert f_ref == chain.objective(np.zeros(chain.d))

    def test_out_of_budget(self, chain):
        with pytest.raises(utils.ReferenceSolveError) as exc:
            harness.reference_solve(chain, 1e-12, max_epochs=0)
        assert exc.value.diagnostics['epochs'] == 0
        assert 'estimate=' in str(exc.value)

    def test_l1(self, chain):
        problem = core.with_psi(chain, core.l1(0.01))
        x_ref, f_ref = harness.reference_solve(problem, 1e-9)
        assert f_ref == problem.objective(x_ref)
        assert f_ref <= problem.objective(chain.known_minimizer) + 1e-9
        assert f_ref < problem.objective(np.zeros(chain.d))

    def test_bad_tolerance(self, chain):
        with pytest.raises(utils.InvalidArgument):
            harness.reference_solve(chain, 0.0)


class TestSupportTracker(object):

    def test_every(self, block):
        tracker = harness.SupportTracker(block, every=4)
        solvers.saga(block, solvers.SolverConfig(epochs=1),
                     callback=tracker)
        its, ratios, floors = tracker.ratios()
        assert its.tolist() == list(range(4, block.n + 1, 4))
        assert tracker.draws.sum() == block.n

    def test_empty(self, block):
        its, ratios, floors = harness.SupportTracker(block).ratios()
        assert len(its) == len(ratios) == len(floors) == 0


class TestSpeedup(object):

    def test_block_length(self):
        assert harness.block_length(64, 8.0, 0.125) == 2
        assert harness.block_length(256, 16.0, 1e-6) > \
            harness.block_length(256, 16.0, 1e-2)

    def test_single_size(self):
        frame = harness.speedup_experiment([64], 0.5, 0.5, [1], threads=1)
        assert len(frame) == 1
        assert list(frame.columns) == harness.SPEEDUP_COLUMNS
        assert frame.attrs['flagged'] == []
        row = frame.iloc[0]
        assert row['n'] == 64
        assert row['kappa'] == pytest.approx(8.0)
        assert row['eps'] == pytest.approx(0.125)
        assert row['K_svrg'] > 0 and row['K_saga'] > 0
        assert row['ratio'] == pytest.approx(row['K_saga'] / row['K_svrg'],
                                             rel=1e-9)

    def test_flagged(self):
        frame = harness.speedup_experiment([64], 0.5, 0.5, [1], threads=1,
                                           max_epochs=1)
        # one saga epoch cannot get to eps = 1/8 from a zero table
        if frame.attrs['flagged']:
            assert frame.attrs['flagged'] == [64]
            assert frame[['K_svrg', 'K_saga', 'ratio']].isna().all(
                axis=None)

    @pytest.mark.parametrize('kwargs', [
        dict(n_list=[64], alpha=0.0, beta=0.5, seeds=[1]),
        dict(n_list=[64], alpha=0.5, beta=1.0, seeds=[1]),
        dict(n_list=[128, 64], alpha=0.5, beta=0.5, seeds=[1]),
        dict(n_list=[], alpha=0.5, beta=0.5, seeds=[1]),
        dict(n_list=[64], alpha=0.5, beta=0.5, seeds=[]),
    ])
    def test_bad_args(self, kwargs):
        with pytest.raises(utils.InvalidArgument):
            harness.speedup_experiment(**kwargs)


BLOCK_SPEC = {
    "problem": {"kind": "block", "n": 16, "d_b": 4, "L": 8, "sigma": 1},
    "solvers": [{"name": "svrg", "params": "auto"},
                {"name": "saga", "params": {"record_every": 16}}],
    "budget": {"epochs": 4, "target_eps": 1e-6},
    "seeds": [1, 2],
}


def with_changes(base=BLOCK_SPEC, **changes):
    doc = json.loads(json.dumps(base))
    doc.update(changes)
    return doc


class TestRunSpec(object):

    def test_round_trip(self):
        spec = RunSpec.from_dict(BLOCK_SPEC)
        again = RunSpec.from_json(spec.canonical())
        assert again.canonical() == spec.canonical()

    def test_single_solver_key(self):
        doc = with_changes(solver={"name": "gd"})
        doc.pop('solvers')
        spec = RunSpec.from_dict(doc)
        assert [s['name'] for s in spec.solvers] == ['gd']

    def test_bad_json(self):
        with pytest.raises(utils.ConfigurationError) as exc:
            RunSpec.from_json('{"problem": \n  {"kind": }')
        assert 'line 2' in str(exc.value)

    @pytest.mark.parametrize('changes, message', [
        (dict(solvers=[{"name": "sdca"}]), "sdca requires kind=sdca"),
        (dict(solvers=[{"name": "saga", "params": "auto"}]), "'auto'"),
        (dict(solvers=[{"name": "svrg", "params": "preset:nope"}]),
         "unknown preset"),
        (dict(solvers=[{"name": "lbfgs"}]), "solvers[0].name"),
        (dict(solvers=[{"name": "svrg", "params": {"eta": -1}}]),
         "params.eta"),
        (dict(budget={"epochs": 2, "grad_units": 100}), "exactly one"),
        (dict(budget={}), "exactly one"),
        (dict(seeds=[]), "seeds"),
        (dict(seeds=[1, 1]), "duplicate seeds"),
        (dict(seeds=[3, -1]), "seeds[1]: must be a non-negative integer"),
        (dict(problem={"kind": "ncvx", "n": 8, "d": 4, "mu": 1, "L": 8,
                       "spread": 4, "seed": -2}),
         "problem.seed: must be a non-negative integer"),
        (dict(problem={"kind": "block", "n": 16, "L": 8, "sigma": 1}),
         "problem.d_b"),
        (dict(problem={"kind": "lasso"}), "problem.kind"),
        (dict(extra=1), "unknown fields"),
    ])
    def test_invalid(self, changes, message):
        with pytest.raises(utils.ConfigurationError) as exc:
            RunSpec.from_dict(with_changes(**changes))
        assert message in str(exc.value)

    def test_sarah_rejects_l1(self):
        problem = dict(BLOCK_SPEC['problem'], l1=0.01)
        with pytest.raises(utils.ConfigurationError):
            RunSpec.from_dict(with_changes(
                problem=problem, solvers=[{"name": "sarah"}]))

    def test_grad_unit_budget(self):
        spec = RunSpec.from_dict(with_changes(budget={"grad_units": 100}))
        _, problem = spec.build()
        config = spec.config(spec.solvers[1], problem, 1)
        assert config.epochs == 100 // 16 + 1
        assert config.grad_units == 100
        assert config.record_every == 16

    def test_nonconvex_auto(self):
        spec = RunSpec.from_dict(with_changes(
            problem={"kind": "ncvx", "n": 8, "d": 4, "mu": 1, "L": 8,
                     "spread": 4},
            solvers=[{"name": "svrg", "params": "auto"}]))
        _, problem = spec.build()
        config = spec.config(spec.solvers[0], problem, 1)
        assert config.m == problem.n
        assert not config.P.is_uniform

    def test_explicit_params(self):
        spec = RunSpec.from_dict(with_changes(solvers=[
            {"name": "svrg", "params": {"eta": 0.001, "m": 40,
                                        "P": "importance",
                                        "epoch_mode": "fixed"}}]))
        _, problem = spec.build()
        config = spec.config(spec.solvers[0], problem, 5)
        assert config.eta == 0.001
        assert config.m == 40
        assert config.epoch_mode == 'fixed'
        assert config.seed == 5

    def test_execute(self):
        spec = RunSpec.from_dict(BLOCK_SPEC)
        traces = spec.execute(threads=2)
        assert list(traces) == [('saga', 1), ('saga', 2), ('svrg', 1),
                                ('svrg', 2)]
        summary = harness.summary_frame(spec, traces)
        assert len(summary) == 4
        assert (summary['spec'] == spec.canonical()).all()
        assert summary['complete'].all()

    def test_l1_problem_has_reference_optimum(self):
        problem = dict(BLOCK_SPEC['problem'], l1=0.01)
        spec = RunSpec.from_dict(with_changes(problem=problem))
        _, built = spec.build()
        assert built.f_star is not None
        assert core.suboptimality(built, built.known_minimizer) == 0.0

    def test_rates_frame(self):
        spec = RunSpec.from_dict(with_changes(
            solvers=[{"name": "svrg", "params": "auto"}],
            budget={"epochs": 4}))
        traces = spec.execute(threads=1)
        frame = harness.rates_frame(spec, traces)
        row = frame.iloc[0]
        assert row['bound'] == pytest.approx(
            solvers.rate_bound(16, 8.0), abs=1e-6)
        assert row['rho_hat'] > 0
        assert row['ratio'] == pytest.approx(row['rho_hat'] / row['bound'])
