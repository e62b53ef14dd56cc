"""
Testes da linha de comando e da configuração (experiment.py)
"""

import sys
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest

# Adicionar diretório raiz ao path
sys.path.insert(0, str(Path(__file__).parent.parent))

from audit import CheckResult, flipped_conditioned_sign_reconstruct
from exceptions import ConfigError, DomainError
from experiment import (
    CONFIG_KEYS,
    ENV_PREFIX,
    EXPLICIT,
    SURFACE_COLUMNS,
    SWEEP_COLUMNS,
    THREE_STATE_COLUMNS,
    EdurExperiment,
    ExperimentConfig,
    cmd_edur_sweep,
    collect_settings,
    load_config,
    main,
    parse_angle,
    parse_correction,
    parse_counts,
)
from measurement import CorrectionTarget
from polarimeter import EXACT, POISSON, STATE_LABELS
from storage_manager import StorageManager


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """Diretório de trabalho limpo, sem variáveis EDUR_ herdadas"""
    monkeypatch.chdir(tmp_path)
    for key in CONFIG_KEYS:
        monkeypatch.delenv(ENV_PREFIX + key.upper(), raising=False)
    return tmp_path


class TestParsers:

    @pytest.mark.parametrize('text, expected', [
        ('0.5', 0.5),
        ('pi', np.pi),
        ('π', np.pi),
        ('5pi/18', 5 * np.pi / 18),
        ('5*pi/18', 5 * np.pi / 18),
        ('-pi/2', -np.pi / 2),
        ('0.5pi', np.pi / 2),
    ])
    def test_parse_angle(self, text, expected):
        assert parse_angle(text) == pytest.approx(expected)

    def test_degrees_apply_to_plain_numbers_only(self):
        assert parse_angle('90', degrees=True) == pytest.approx(np.pi / 2)
        assert parse_angle('pi/2', degrees=True) == pytest.approx(np.pi / 2)

    @pytest.mark.parametrize('text', ['abc', 'pi/0', 'inf', ''])
    def test_invalid_angle(self, text):
        with pytest.raises(ConfigError):
            parse_angle(text)

    @pytest.mark.parametrize('text, expected', [
        ('exact', (EXACT, 1e4)),
        ('poisson', (POISSON, 1e4)),
        ('poisson:500', (POISSON, 500.0)),
        ('Poisson(2000)', (POISSON, 2000.0)),
    ])
    def test_parse_counts(self, text, expected):
        assert parse_counts(text) == expected

    @pytest.mark.parametrize('text', ['gauss', 'poisson:0', 'poisson:abc'])
    def test_invalid_counts(self, text):
        with pytest.raises(ConfigError):
            parse_counts(text)

    def test_parse_correction(self):
        assert parse_correction('optimal') == 'optimal'
        assert parse_correction('BOTH') == 'both'
        target = parse_correction('pi/2,3pi/2')
        assert isinstance(target, CorrectionTarget)
        assert target.phi == pytest.approx(3 * np.pi / 2)

    def test_invalid_correction(self):
        with pytest.raises(ConfigError):
            parse_correction('best')


class TestExperimentConfig:

    def test_defaults(self):
        config = ExperimentConfig()
        grid = config.theta_oa_grid()
        assert len(grid) == 19
        assert grid[-1] == np.pi
        assert config.theta_b == [np.pi / 2]
        assert config.alphas == [1.0, 0.75, 0.5, 0.25, 0.0]
        assert config.count_mode == EXACT

    def test_step_not_dividing_range(self):
        grid = ExperimentConfig(theta_oa_step=0.5).theta_oa_grid()
        assert len(grid) == 7
        assert grid[-1] == pytest.approx(3.0)

    def test_single_theta_oa(self):
        assert ExperimentConfig(theta_oa=0.3).theta_oa_grid().tolist() == [0.3]

    def test_empty_grid(self):
        """Testa que uma grade vazia é erro de configuração"""
        with pytest.raises(ConfigError):
            ExperimentConfig(theta_oa_start=np.pi, theta_oa_stop=0.0)

    @pytest.mark.parametrize('kwargs', [
        {'theta_oa_step': 0.0},
        {'alphas': []},
        {'alphas': [1.2]},
        {'theta_b': []},
        {'correction': 'best'},
        {'counts': 'binomial'},
        {'format': 'xlsx'},
        {'max_workers': 0},
        {'log_level': 'LOUD'},
        {'noise_distribution': 'cauchy'},
    ])
    def test_invalid_values(self, kwargs):
        with pytest.raises(ConfigError):
            ExperimentConfig(**kwargs)

    def test_corrections(self):
        assert [label for label, _ in ExperimentConfig().corrections()] == ['optimal', 'anti-optimal']
        assert ExperimentConfig(correction='none').corrections() == [('none', 'none')]
        target = CorrectionTarget(0.5, 1.0)
        assert ExperimentConfig(correction=target).corrections() == [(EXPLICIT, target)]

    def test_from_settings_in_degrees(self):
        config = ExperimentConfig.from_settings({'degrees': 'true', 'theta_b': '60, 30', 'alphas': '1,0.5'})
        assert config.theta_b == pytest.approx([np.pi / 3, np.pi / 6])
        assert config.alphas == [1.0, 0.5]

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_settings({'theta_c': '1'})

    def test_empty_log_file_disables_file_handler(self):
        assert ExperimentConfig.from_settings({'log_file': ''}).log_file is None


class TestConfigSources:

    def test_precedence(self, tmp_path):
        """Testa flags > arquivo > ambiente > padrão"""
        config_file = tmp_path / 'edur.env'
        config_file.write_text('seed=2\nalphas=0.5\n')
        environ = {'EDUR_SEED': '1', 'EDUR_FORMAT': 'json', 'EDUR_ALPHAS': '1'}

        config = load_config(str(config_file), {'seed': '3', 'format': None}, environ)
        assert config.seed == 3
        assert config.format == 'json'
        assert config.alphas == [0.5]

        assert load_config(str(config_file), {}, environ).seed == 2
        assert load_config(None, {}, environ).seed == 1
        assert load_config(None, {}, {}).seed == 0

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(ConfigError):
            collect_settings(str(tmp_path / 'missing.env'), {}, {})

    def test_unrelated_environment_ignored(self):
        assert collect_settings(None, None, {'PATH': '/bin', 'SEED': '4'}) == {}


class TestCommands:

    def test_usage_error(self, workdir):
        with pytest.raises(SystemExit) as exc:
            main(['bogus'])
        assert exc.value.code == 2

    def test_invalid_configuration_exit_code(self, workdir, capsys):
        assert main(['sweep', '--step', '0']) == 2
        assert 'Erro de configuração' in capsys.readouterr().err

    def test_empty_grid_exit_code(self, workdir):
        config_file = workdir / 'edur.env'
        config_file.write_text('theta_oa_start=pi\ntheta_oa_stop=0\n')
        assert main(['sweep', '--config', str(config_file)]) == 2

    def test_sweep(self, workdir):
        out = workdir / 'sweep.csv'
        assert main(['sweep', '--alpha', '1,0.5', '--out', str(out)]) == 0
        df = pd.read_csv(out)
        assert list(df.columns) == SWEEP_COLUMNS
        assert len(df) == 2 * 2 * 19
        assert df['oracle_residual'].max() <= 1e-9
        assert df['ozawa_satisfied'].all()
        assert df['branciard_d_satisfied'].all()
        assert df['tight_applicable'].all()
        optimal = df[df['branch'] == 'optimal']
        assert optimal['tight_residual'].abs().max() <= 1e-9
        assert (df['prep_fidelity'] > 1 - 1e-6).all()

    def test_sweep_default_output_path(self, workdir):
        assert main(['sweep', '--alpha', '1', '--correction', 'optimal', '--format', 'json']) == 0
        assert (workdir / 'results' / 'edur_sweep.json').is_file()

    def test_sweep_in_degrees(self, workdir):
        out = workdir / 'sweep.csv'
        assert main(['sweep', '--theta-oa', '50', '--theta-b', '60', '--alpha', '0.5',
                     '--degrees', '--out', str(out)]) == 0
        df = pd.read_csv(out)
        assert df['theta_oa'].tolist() == pytest.approx([5 * np.pi / 18] * 2)
        assert df['theta_b'].tolist() == pytest.approx([np.pi / 3] * 2)

    def test_surface(self, workdir):
        out = workdir / 'surface.csv'
        assert main(['surface', '--step', 'pi/18', '--alpha', '1', '--out', str(out)]) == 0
        df = pd.read_csv(out)
        assert list(df.columns) == SURFACE_COLUMNS
        assert (df['kind'] == 'grid').sum() == 19 * 36
        rows = df.set_index('kind')
        assert rows.loc['min', 'disturbance'] == pytest.approx(rows.loc['closed_form_min', 'disturbance'], abs=1e-9)
        assert rows.loc['max', 'disturbance'] == pytest.approx(rows.loc['closed_form_max', 'disturbance'], abs=1e-9)
        assert rows.loc['closed_form_min', 'vartheta'] == pytest.approx(np.pi / 2)
        assert rows.loc['closed_form_min', 'phi'] == pytest.approx(np.pi / 2)

    def test_surface_defaults(self, workdir):
        """Testa os extremos 2 sin 20° e 2 cos 20° em θ_OA = 5π/18"""
        out = workdir / 'surface.csv'
        assert main(['surface', '--out', str(out)]) == 0
        rows = pd.read_csv(out).set_index('kind')
        assert rows.loc['min', 'disturbance'] == pytest.approx(0.684, abs=1e-3)
        assert rows.loc['max', 'disturbance'] == pytest.approx(1.879, abs=1e-3)

    def test_coarse_surface(self, workdir):
        out = workdir / 'surface.csv'
        assert main(['surface', '--step', 'pi/2', '--out', str(out)]) == 0
        grid = pd.read_csv(out).query("kind == 'grid'")
        assert len(grid) == 3 * 4
        assert sorted(set(grid['vartheta'])) == pytest.approx([0.0, np.pi / 2, np.pi])

    def test_three_state_other_setting(self, workdir):
        out = workdir / 'three.csv'
        assert main(['three-state', '--theta-oa', '2pi/9', '--theta-b', 'pi/3', '--alpha', '1',
                     '--correction', 'none', '--out', str(out)]) == 0
        assert pd.read_csv(out)['theta_b'].tolist() == pytest.approx([np.pi / 3])

    def test_three_state_exact(self, workdir):
        out = workdir / 'three.csv'
        assert main(['three-state', '--alpha', '0.5', '--out', str(out)]) == 0
        points = pd.read_csv(out)
        counts = pd.read_csv(workdir / 'three_counts.csv')
        assert list(points.columns) == THREE_STATE_COLUMNS
        assert (points['seed'] == -1).all()
        assert len(counts) == len(points) * 5 * 4
        assert counts['state'].is_unique is False
        assert counts.groupby('state').size().eq(4).all()

    def test_three_state_counts_load_as_tables(self, workdir):
        out = workdir / 'three.csv'
        assert main(['three-state', '--theta-oa', '5pi/18', '--alpha', '0.5',
                     '--correction', 'optimal', '--out', str(out)]) == 0
        tables = StorageManager().load_count_tables(str(workdir / 'three_counts.csv'))
        assert len(tables) == 5
        assert all(label.startswith('optimal|theta_oa=') for label in tables)
        assert {label.rsplit('|', 1)[1] for label in tables} == set(STATE_LABELS)
        for table in tables.values():
            assert sorted(table.entries) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]

    def test_three_state_poisson_reruns_identical(self, workdir):
        """Testa que a mesma semente gera arquivos idênticos com qualquer número de workers"""
        args = ['three-state', '--alpha', '1,0.25', '--counts', 'poisson:1000', '--seed', '5']
        assert main(args + ['--max-workers', '1', '--out', str(workdir / 'a.csv')]) == 0
        assert main(args + ['--max-workers', '4', '--out', str(workdir / 'b.csv')]) == 0
        for name in ('{}.csv', '{}_counts.csv'):
            first = (workdir / name.format('a')).read_bytes()
            second = (workdir / name.format('b')).read_bytes()
            assert first == second
        assert (pd.read_csv(workdir / 'a.csv')['seed'] >= 0).all()

    def test_three_state_different_seeds_differ(self, workdir):
        args = ['three-state', '--theta-oa', '5pi/18', '--alpha', '0.5', '--counts', 'poisson:1000']
        assert main(args + ['--seed', '1', '--out', str(workdir / 'a.csv')]) == 0
        assert main(args + ['--seed', '2', '--out', str(workdir / 'b.csv')]) == 0
        assert (workdir / 'a.csv').read_bytes() != (workdir / 'b.csv').read_bytes()

    @pytest.mark.parametrize('passed, code', [(True, 0), (False, 1)])
    def test_audit_exit_code(self, workdir, passed, code):
        with patch('experiment.AcceptanceAudit') as mock_audit:
            mock_audit.return_value.run.return_value = passed
            mock_audit.return_value.results = [CheckResult('x', passed, 0.0, 1e-9)]
            assert main(['audit', '--out', str(workdir / 'audit.csv')]) == code
        report = pd.read_csv(workdir / 'audit.csv')
        assert report['passed'].tolist() == [passed]

    def test_audit_inject_fault(self, workdir):
        with patch('experiment.AcceptanceAudit') as mock_audit:
            mock_audit.return_value.run.return_value = False
            mock_audit.return_value.results = []
            assert main(['audit', '--inject-fault']) == 1
        assert mock_audit.call_args.kwargs['reconstruct'] is flipped_conditioned_sign_reconstruct

    def test_simulation_error_exit_code(self, workdir):
        config = ExperimentConfig(log_file=None, alphas=[1.0])
        with patch.object(EdurExperiment, 'edur_sweep', side_effect=DomainError('radicando negativo')):
            assert cmd_edur_sweep(config) == 2

    def test_output_io_error_exit_code(self, workdir):
        """Testa que falha de escrita (diretório pai é um arquivo) retorna 2"""
        blocker = workdir / 'blocker'
        blocker.write_text('')
        assert main(['sweep', '--alpha', '1', '--correction', 'optimal',
                     '--out', str(blocker / 'x.csv')]) == 2
        assert not (blocker / 'x.csv').exists()

    @pytest.mark.slow
    def test_audit_end_to_end(self, workdir):
        assert main(['audit', '--max-workers', '4']) == 0
        assert main(['audit', '--inject-fault', '--max-workers', '4']) == 1
