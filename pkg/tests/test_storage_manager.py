"""
Testes unitários para StorageManager
"""

import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

# Adicionar diretório raiz ao path
sys.path.insert(0, str(Path(__file__).parent.parent))

from exceptions import ConfigError, PreconditionError
from measurement import OPTIMAL, apparatus_for_branch
from polarimeter import POISSON, run_three_state
from states import AxisObservable, rho_x
from storage_manager import COUNT_COLUMNS, FLOAT_FORMAT, StorageManager


class TestStorageManager:

    @pytest.fixture
    def storage(self):
        return StorageManager()

    @pytest.fixture
    def sample_data(self):
        """Dados de amostra para testes"""
        return pd.DataFrame({
            'theta_oa': [0.0, np.pi / 18, 5 * np.pi / 18],
            'error': [0.0, 0.17431148549531633, 0.8452365234813989],
            'branch': ['optimal', 'optimal', 'anti-optimal'],
        })

    @pytest.fixture
    def run(self):
        b = AxisObservable(np.pi / 2)
        app = apparatus_for_branch(AxisObservable(5 * np.pi / 18), b, OPTIMAL)
        return run_three_state(app, AxisObservable(0.0), b, rho_x(0.5))

    def test_init_default(self, storage):
        """Testa inicialização com formato padrão"""
        assert storage.output_format == 'csv'

    def test_unknown_format(self):
        with pytest.raises(ConfigError):
            StorageManager(output_format='xlsx')

    def test_save_csv(self, storage, sample_data, tmp_path):
        path = storage.save_table(sample_data, str(tmp_path / 'out' / 'sweep.csv'))
        lines = Path(path).read_text().splitlines()
        assert lines[0] == 'theta_oa,error,branch'
        assert len(lines) == 4

    def test_csv_floats_round_trip_exactly(self, storage, sample_data, tmp_path):
        """Testa que 17 dígitos preservam os floats bit a bit"""
        path = storage.save_table(sample_data, str(tmp_path / 'sweep.csv'))
        loaded = storage.read_table(path)
        assert loaded['theta_oa'].tolist() == sample_data['theta_oa'].tolist()
        assert loaded['error'].tolist() == sample_data['error'].tolist()
        assert FLOAT_FORMAT == '%.17g'

    def test_save_json(self, storage, sample_data, tmp_path):
        path = storage.save_table(sample_data, str(tmp_path / 'sweep.json'), output_format='json')
        with open(path, 'r', encoding='utf-8') as f:
            records = json.load(f)
        assert records[1]['branch'] == 'optimal'
        assert records[2]['theta_oa'] == 5 * np.pi / 18
        assert storage.read_table(path)['error'].tolist() == sample_data['error'].tolist()

    def test_json_non_finite_becomes_null(self, storage, tmp_path):
        df = pd.DataFrame({'value': [1.0, np.nan]})
        path = storage.save_table(df, str(tmp_path / 'nan.json'), output_format='json')
        with open(path, 'r', encoding='utf-8') as f:
            assert json.load(f) == [{'value': 1.0}, {'value': None}]

    def test_save_parquet(self, sample_data, tmp_path):
        storage = StorageManager(output_format='parquet')
        path = storage.save_table(sample_data, str(tmp_path / 'sweep.parquet'))
        pd.testing.assert_frame_equal(storage.read_table(path), sample_data)

    def test_save_twice_is_byte_identical(self, storage, sample_data, tmp_path):
        first = Path(storage.save_table(sample_data, str(tmp_path / 'a.csv'))).read_bytes()
        second = Path(storage.save_table(sample_data, str(tmp_path / 'b.csv'))).read_bytes()
        assert first == second

    def test_count_tables_frame(self, storage, run):
        df = storage.count_tables_to_frame(run.tables)
        assert list(df.columns) == COUNT_COLUMNS
        assert len(df) == 4 * len(run.tables)
        assert df.iloc[0][['m', 'b']].tolist() == [1, 1]
        assert df.iloc[3][['m', 'b']].tolist() == [-1, -1]

    @pytest.mark.parametrize('fmt', ['csv', 'json', 'parquet'])
    def test_count_tables_round_trip(self, run, tmp_path, fmt):
        """Testa gravação e leitura das tabelas de contagens"""
        storage = StorageManager(output_format=fmt)
        path = storage.save_count_tables(run.tables, str(tmp_path / f'counts.{fmt}'))
        loaded = storage.load_count_tables(path, mean_counts=1e4)
        assert list(loaded) == list(run.tables)
        for label, table in run.tables.items():
            assert loaded[label].entries == table.entries

    def test_loaded_poisson_tables_keep_mode(self, storage, tmp_path):
        b = AxisObservable(np.pi / 2)
        app = apparatus_for_branch(AxisObservable(0.4), b, OPTIMAL)
        run = run_three_state(app, AxisObservable(0.0), b, rho_x(0.5), mode=POISSON, seed=3)
        path = storage.save_count_tables(run.tables, str(tmp_path / 'counts.csv'))
        loaded = storage.load_count_tables(path, mode=POISSON)
        assert all(table.mode == POISSON for table in loaded.values())
        assert loaded['rho'].mean_counts == run.tables['rho'].total

    def test_missing_count_columns(self, storage):
        with pytest.raises(PreconditionError):
            storage.frame_to_count_tables(pd.DataFrame({'state': ['rho'], 'm': [1]}))

    def test_read_missing_file(self, storage, tmp_path):
        with pytest.raises(OSError):
            storage.read_table(str(tmp_path / 'missing.csv'))

    def test_get_storage_info(self):
        """Testa informações de armazenamento"""
        info = StorageManager(output_format='json').get_storage_info()
        assert info['storage_type'] == 'Local'
        assert info['output_format'] == 'json'
        assert info['float_format'] == FLOAT_FORMAT
