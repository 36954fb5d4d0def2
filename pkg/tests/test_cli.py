import os

import pytest
from click.testing import CliRunner

from flatcore.services.artifacts import read_csv, read_report
from flatcore.services.fieldio import read_field
from manage import cli


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


def invoke(runner, *args):
    return runner.invoke(cli, ['--env', 'testing', *args])


def test_solve_writes_field_report_and_table(runner, tmp_path):
    out = str(tmp_path)
    result = invoke(runner, 'solve', '--out', out, '--mesh', '16', '--eps', '1e-2', '--theta', '1.5')
    assert result.exit_code == 0, result.stderr
    field = read_field(os.path.join(out, 'run.field'))
    assert field.mesh.n_vertices == 17 * 17
    solve_entry, coincidence_entry = read_report(os.path.join(out, 'run.report'))
    assert solve_entry['converged'] == 'true'
    assert coincidence_entry['classification'] == 'empty'
    kind, header, rows = read_csv(os.path.join(out, 'run-coincidence.csv'))
    assert kind == 'coincidence'
    assert header == ['x', 'y', 'u', 'a', 'gap', 'coincident']
    assert len(rows) == 17 * 17


def test_solve_above_threshold_exits_with_3(runner, tmp_path):
    result = invoke(runner, 'solve', '--out', str(tmp_path), '--mesh', '8', '--eps', '1')
    assert result.exit_code == 3
    assert 'eps_a' in result.stderr
    assert not os.path.exists(tmp_path / 'run.field')


def test_solve_rejects_lists(runner, tmp_path):
    result = invoke(runner, 'solve', '--out', str(tmp_path), '--eps', '1e-2,1e-3')
    assert result.exit_code == 2
    assert 'use sweep' in result.stderr


def test_solve_failure_writes_partial_files(runner, tmp_path):
    config = tmp_path / 'run.ini'
    config.write_text('[solver]\nmax_iter = 1\n[run]\nname = short\n')
    result = invoke(runner, 'solve', '--config', str(config), '--out', str(tmp_path), '--mesh', '8',
                    '--eps', '1e-2', '--theta', '1.5')
    assert result.exit_code == 4
    assert os.path.exists(tmp_path / 'short.partial.field')
    assert read_report(str(tmp_path / 'short.partial.report'))[0]['partial'] == 'true'


def test_malformed_config_exits_with_2(runner, tmp_path):
    config = tmp_path / 'bad.ini'
    config.write_text('[problem]\ntheta 0.5\n')
    result = invoke(runner, 'solve', '--config', str(config), '--out', str(tmp_path))
    assert result.exit_code == 2
    assert 'bad.ini:2:' in result.stderr


def test_invalid_flag_value_exits_with_2(runner, tmp_path):
    result = invoke(runner, 'solve', '--out', str(tmp_path), '--theta', '-1')
    assert result.exit_code == 2
    assert 'problem.theta' in result.stderr


def test_eigen_writes_table(runner, tmp_path):
    result = invoke(runner, 'eigen', '--out', str(tmp_path), '--mesh', '16')
    assert result.exit_code == 0, result.stderr
    _, _, rows = read_csv(str(tmp_path / 'eigen.csv'))
    assert float(rows[0]['lambda1']) == pytest.approx(19.7, rel=0.02)
    assert 0.03 < float(rows[0]['eps_a']) < 0.07
    assert os.path.exists(tmp_path / 'eigen-p2.field')


def test_verify_selected_suites(runner, tmp_path):
    result = invoke(runner, 'verify', '--out', str(tmp_path), '--suite', 'lemma', '--suite', 'exponents')
    assert result.exit_code == 0, result.stderr
    _, _, rows = read_csv(str(tmp_path / 'verify.csv'))
    assert [row['suite'] for row in rows] == ['lemma', 'exponents']
    assert all(row['passed'] == 'true' for row in rows)


def test_verify_detects_perturbed_lemma_constant(runner, tmp_path):
    result = invoke(runner, 'verify', '--out', str(tmp_path), '--suite', 'lemma',
                    '--perturb-lemma-constant', '1.01')
    assert result.exit_code == 5
    assert 'lemma' in result.stderr


def test_report_without_tables_exits_with_1(runner, tmp_path):
    result = invoke(runner, 'report', '--out', str(tmp_path))
    assert result.exit_code == 1
    assert 'no sweep' in result.stderr


def _sweep(runner, out, jobs):
    return invoke(runner, 'sweep', '--out', out, '--mesh', '12', '--theta', '1.5',
                  '--eps', '2e-2,1e-2,5e-3', '--jobs', str(jobs))


def test_sweep_is_deterministic_across_jobs(runner, tmp_path):
    serial, parallel = str(tmp_path / 'serial'), str(tmp_path / 'parallel')
    assert _sweep(runner, serial, 1).exit_code == 0
    assert _sweep(runner, parallel, 3).exit_code == 0
    with open(os.path.join(serial, 'sweep.csv')) as a, open(os.path.join(parallel, 'sweep.csv')) as b:
        assert a.read() == b.read()
    assert len(os.listdir(os.path.join(parallel, 'cells'))) == 3
    _, _, fits = read_csv(os.path.join(serial, 'fit.csv'))
    assert fits[0]['status'] == 'insufficient-data'


def test_report_rebuilds_fit_from_sweep(runner, tmp_path):
    out = str(tmp_path)
    assert _sweep(runner, out, 1).exit_code == 0
    os.remove(os.path.join(out, 'fit.csv'))
    result = invoke(runner, 'report', '--out', out, '--mesh', '12')
    assert result.exit_code == 0, result.stderr
    assert os.path.exists(os.path.join(out, 'fit.csv'))


@pytest.mark.slow
def test_aux_command(runner, tmp_path):
    config = tmp_path / 'aux.ini'
    config.write_text('[aux]\ndelta = 1e-4, 1e-3\nn_rings = 16\n')
    result = invoke(runner, 'aux', '--config', str(config), '--out', str(tmp_path))
    assert result.exit_code == 0, result.stderr
    _, _, rows = read_csv(str(tmp_path / 'aux.csv'))
    assert [row['bound_ok'] for row in rows] == ['true', 'true']
    assert float(rows[0]['coincidence_radius']) > 0.0
    assert os.path.exists(tmp_path / 'aux-profile.svg')
