# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
'''
Tests for console and command tools
'''
import os
import json
import pytest
from click.testing import CliRunner
from spanbreaker import cli, solvers
from spanbreaker.measure import CSVStore, Trace

SPEC = {
    "problem": {"kind": "block", "n": 16, "d_b": 4, "L": 8, "sigma": 1},
    "solvers": [{"name": "svrg", "params": "auto"}],
    "budget": {"epochs": 3},
    "seeds": [1, 2],
}


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def specfile(tmp_path):
    def write(doc=SPEC, name='spec.json'):
        path = tmp_path / name
        path.write_text(json.dumps(doc) if isinstance(doc, dict) else doc)
        return str(path)
    return write


def invoke(runner, *args):
    return runner.invoke(cli.cli, list(args) + ['-l', 'ERROR'])


def read(path):
    with open(path, 'rb') as f:
        return f.read()


def test_list_solvers(runner):
    result = runner.invoke(cli.cli, ['solvers'])
    assert result.exit_code == 0
    for name in ('svrg', 'sarah', 'saga', 'gd', 'sdca'):
        assert ' - {}:'.format(name) in result.output


class TestRun(object):

    def test_writes_traces_and_summary(self, runner, specfile, tmp_path):
        out = str(tmp_path / 'out')
        result = invoke(runner, 'run', '--spec', specfile(), '--out', out)
        assert result.exit_code == 0, result.output
        assert sorted(os.listdir(out)) == [
            'summary.csv', 'svrg-seed1.csv', 'svrg-seed2.csv']
        header = read(os.path.join(out, 'svrg-seed1.csv')).splitlines()[0]
        assert header == b'grad_units,epoch,suboptimality,dist_sq'

    def test_rerun_is_byte_identical(self, runner, specfile, tmp_path):
        first, second = str(tmp_path / 'a'), str(tmp_path / 'b')
        spec = specfile()
        for out in (first, second):
            assert invoke(runner, 'run', '--spec', spec,
                          '--out', out).exit_code == 0
        for name in ('svrg-seed1.csv', 'svrg-seed2.csv'):
            assert read(os.path.join(first, name)) == \
                read(os.path.join(second, name))

    def test_rerun_from_summary(self, runner, specfile, tmp_path):
        first, second = str(tmp_path / 'a'), str(tmp_path / 'b')
        assert invoke(runner, 'run', '--spec', specfile(),
                      '--out', first).exit_code == 0
        summary = os.path.join(first, 'summary.csv')
        result = invoke(runner, 'run', '--spec', summary, '--out', second)
        assert result.exit_code == 0, result.output
        for name in ('svrg-seed1.csv', 'svrg-seed2.csv'):
            assert read(os.path.join(first, name)) == \
                read(os.path.join(second, name))

    def test_seed_override(self, runner, specfile, tmp_path):
        out = str(tmp_path / 'out')
        result = invoke(runner, 'run', '--spec', specfile(), '--out', out,
                        '--seeds', '7')
        assert result.exit_code == 0
        assert 'svrg-seed7.csv' in os.listdir(out)
        summary = CSVStore(os.path.join(out, 'summary.csv')).read()
        assert summary['seed'].tolist() == [7]

    def test_sdca_on_chain(self, runner, specfile, tmp_path):
        doc = dict(SPEC, problem={"kind": "chain", "L": 8, "sigma": 1,
                                  "d": 10},
                   solvers=[{"name": "sdca"}])
        result = invoke(runner, 'run', '--spec', specfile(doc),
                        '--out', str(tmp_path / 'out'))
        assert result.exit_code == 1
        assert 'sdca requires kind=sdca' in result.output

    def test_malformed_spec(self, runner, specfile, tmp_path):
        result = invoke(runner, 'run', '--spec', specfile('{"problem": ['),
                        '--out', str(tmp_path / 'out'))
        assert result.exit_code == 1
        assert 'line 1' in result.output

    def test_negative_seed(self, runner, specfile, tmp_path):
        doc = dict(SPEC, seeds=[1, -1])
        result = invoke(runner, 'run', '--spec', specfile(doc),
                        '--out', str(tmp_path / 'out'))
        assert result.exit_code == 1
        assert 'seeds[1]' in result.output

    def test_negative_seed_override(self, runner, specfile, tmp_path):
        result = invoke(runner, 'run', '--spec', specfile(),
                        '--out', str(tmp_path / 'out'), '--seeds=-3')
        assert result.exit_code == 1
        assert 'seeds[0]' in result.output

    def test_target_missed(self, runner, specfile, tmp_path):
        doc = dict(SPEC, budget={"epochs": 1, "target_eps": 1e-30})
        out = str(tmp_path / 'out')
        result = invoke(runner, 'run', '--spec', specfile(doc), '--out', out)
        assert result.exit_code == cli.NOT_REACHED
        summary = CSVStore(os.path.join(out, 'summary.csv')).read()
        assert not summary['reached'].any()

    def test_budget_cap_recorded(self, runner, specfile, tmp_path):
        doc = dict(SPEC, budget={"grad_units": 40})
        out = str(tmp_path / 'out')
        result = invoke(runner, 'run', '--spec', specfile(doc), '--out', out)
        assert result.exit_code == 0
        summary = CSVStore(os.path.join(out, 'summary.csv')).read()
        assert not summary['complete'].any()
        assert (summary['grad_units'] <= 40).all()

    def test_sdca_run(self, runner, specfile, tmp_path):
        doc = dict(SPEC, problem={"kind": "sdca", "n": 8, "L": 2, "mu": 1},
                   solvers=[{"name": "sdca", "params": {"alpha0": "ones"}}],
                   seeds=[1])
        out = str(tmp_path / 'out')
        result = invoke(runner, 'run', '--spec', specfile(doc), '--out', out)
        assert result.exit_code == 0, result.output
        frame = CSVStore(os.path.join(out, 'sdca-seed1.csv')).read()
        assert len(frame) == 3 * 8 + 1


class TestRates(object):

    def test_bound_column(self, runner, specfile):
        result = invoke(runner, 'rates', '--spec', specfile())
        assert result.exit_code == 0, result.output
        bound = solvers.rate_bound(16, 8.0)
        assert '{:.6f}'.format(bound) in result.output
        assert 'theorem1_rate' in result.output

    def test_empty_seeds(self, runner, specfile):
        result = invoke(runner, 'rates', '--spec', specfile(), '--seeds', '')
        assert result.exit_code == 1

    def test_bad_window(self, runner, specfile):
        result = invoke(runner, 'rates', '--spec', specfile(),
                        '--window', '1,2,3')
        assert result.exit_code == 1


class TestSpeedup(object):

    def test_header(self, runner, tmp_path):
        out = str(tmp_path / 'speedup.csv')
        result = invoke(runner, 'speedup', '--n-list', '64', '--seeds', '1',
                        '--out', out)
        assert result.exit_code == 0, result.output
        lines = read(out).decode().splitlines()
        assert lines[0] == 'n,kappa,eps,K_svrg,K_saga,ratio'
        n, kappa, eps, k_svrg, k_saga, ratio = lines[1].split(',')
        assert int(n) == 64
        assert int(k_svrg) > 0 and int(k_saga) > 0
        assert float(ratio) == pytest.approx(int(k_saga) / int(k_svrg),
                                             rel=1e-9)

    def test_bad_exponent(self, runner, tmp_path):
        result = invoke(runner, 'speedup', '--n-list', '64', '--alpha', '1.5',
                        '--out', str(tmp_path / 's.csv'))
        assert result.exit_code == 1

    def test_bad_list(self, runner, tmp_path):
        result = invoke(runner, 'speedup', '--n-list', '64,x',
                        '--out', str(tmp_path / 's.csv'))
        assert result.exit_code == 1


def test_missing_dist_written_empty(tmp_path):
    trace = Trace({'solver': 'gd', 'seed': 0})
    trace.record(0, 0, 1.5)
    trace.record(10, 1, 0.25)
    path = str(tmp_path / 'trace.csv')
    CSVStore.write_trace(path, trace)
    assert read(path).decode().splitlines() == [
        'grad_units,epoch,suboptimality,dist_sq',
        '0,0,1.5,',
        '10,1,0.25,',
    ]
