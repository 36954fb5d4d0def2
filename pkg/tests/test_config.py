from logging.handlers import RotatingFileHandler

import pytest

from flatcore import create_app
from flatcore.errors import InvalidConfiguration
from flatcore.models.run import load_run_config, read_sections


def write(tmp_path, text):
    path = tmp_path / 'run.ini'
    path.write_text(text)
    return str(path)


def test_testing_app(lab):
    assert lab.testing
    assert lab.config['JOBS'] == 1
    assert lab.solver_defaults()['residual_tol'] == 1e-5
    assert 'mu' not in lab.solver_defaults()
    assert lab.scheduler.app is lab
    assert not any(isinstance(h, RotatingFileHandler) for h in lab.logger.handlers)


def test_production_app_logs_to_file(tmp_path, monkeypatch):
    from config import ProductionConfig
    monkeypatch.setattr(ProductionConfig, 'LOG_DIR', str(tmp_path / 'logs'))
    lab = create_app('production')
    try:
        assert any(isinstance(h, RotatingFileHandler) for h in lab.logger.handlers)
        assert (tmp_path / 'logs' / 'flatcore.log').exists()
    finally:
        create_app('testing')


def test_unknown_environment():
    with pytest.raises(InvalidConfiguration):
        create_app('staging')


def test_defaults_without_file():
    config = load_run_config()
    assert config.problem.theta == 0.5
    assert config.mesh.nx == 64
    assert config.eps_list() == [1e-3]
    assert config.run.jobs == 1


def test_file_values_and_lists(tmp_path):
    path = write(tmp_path, """
[problem]
theta = 0.25
slope = 0.2, 0.0   # along x

[mesh]
nx = 32

[sweep]
eps = 1e-2, 1e-3, 1e-4

[run]
out = results
""")
    config = load_run_config(path)
    assert config.problem.theta == 0.25
    assert config.problem.slope == (0.2, 0.0)
    assert config.mesh.build().n_vertices == 33 * 33
    assert config.eps_list() == [1e-2, 1e-3, 1e-4]
    assert config.run.out == 'results'


def test_precedence_defaults_file_overrides(tmp_path):
    path = write(tmp_path, '[run]\njobs = 2\nseed = 5\n')
    config = load_run_config(path, overrides={'run': {'seed': 7, 'out': None}},
                             defaults={'run': {'jobs': 1, 'seed': 0, 'name': 'base'}})
    assert config.run.jobs == 2
    assert config.run.seed == 7
    assert config.run.name == 'base'


def test_q_follows_p_when_missing():
    assert load_run_config(overrides={'problem': {'p': 1.5}}).problem.q == 1.5
    assert load_run_config(overrides={'problem': {'p': 3.0}}).problem.q == 2.0
    config = load_run_config(overrides={'problem': {'p': 3.0, 'q': 3.0}})
    assert config.params_for(p=2.5).q == 2.5


def test_parse_error_names_the_line(tmp_path):
    path = write(tmp_path, '[problem]\ntheta = 0.5\nthis line has no separator\n')
    with pytest.raises(InvalidConfiguration, match=r'run.ini:3:'):
        read_sections(path)


def test_unknown_section_and_key(tmp_path):
    with pytest.raises(InvalidConfiguration, match='unknown section'):
        load_run_config(write(tmp_path, '[plot]\ncolor = red\n'))
    with pytest.raises(InvalidConfiguration, match='mesh.size'):
        load_run_config(write(tmp_path, '[mesh]\nsize = 3\n'))


def test_invalid_values_name_the_field(tmp_path):
    with pytest.raises(InvalidConfiguration, match='problem.theta'):
        load_run_config(write(tmp_path, '[problem]\ntheta = -1\n'))
    with pytest.raises(InvalidConfiguration, match='aux.delta'):
        load_run_config(write(tmp_path, '[aux]\ndelta = 1e-3, 2\n'))
    with pytest.raises(InvalidConfiguration, match='problem'):
        load_run_config(write(tmp_path, '[problem]\nslope = 0, 0\n'))


def test_degenerate_mode_zeroes_the_slope(tmp_path):
    config = load_run_config(write(tmp_path, '[problem]\ndegenerate = true\n'))
    assert config.problem.slope == (0.0, 0.0)
    assert config.problem.degenerate


def test_missing_file():
    with pytest.raises(InvalidConfiguration):
        load_run_config('/nonexistent/run.ini')
