#!/usr/bin/env python3
"""
Storage Manager - Gravação e leitura de resultados em disco

Interface única para salvar as tabelas de resultados (CSV, JSON ou Parquet)
e as tabelas de contagens do método dos três estados no formato
`state,m,b,intensity`. A gravação é determinística: ordem de colunas fixa,
cabeçalho e floats com 17 dígitos significativos, independente de locale.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from exceptions import ConfigError, PreconditionError
from polarimeter import EXACT, CountTable

COUNT_COLUMNS = ['state', 'm', 'b', 'intensity']
FORMATS = ('csv', 'json', 'parquet')
FLOAT_FORMAT = '%.17g'


def _native(value: Any) -> Any:
    """Converte escalares numpy para tipos Python serializáveis em JSON"""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class StorageManager:
    """Gerenciador de armazenamento local dos resultados"""

    def __init__(self, output_format: str = 'csv'):
        self.logger = logging.getLogger(__name__)
        if output_format not in FORMATS:
            raise ConfigError(f"Formato de saída desconhecido: {output_format!r} (use {', '.join(FORMATS)})")
        self.output_format = output_format
        self.logger.debug(f"StorageManager inicializado: formato={self.output_format}")

    def save_table(self, df: pd.DataFrame, file_path: str, output_format: Optional[str] = None) -> str:
        """
        Salva DataFrame no formato configurado

        Args:
            df: tabela com colunas já na ordem final
            file_path: caminho do arquivo
            output_format: sobrescreve o formato padrão

        Returns:
            Caminho gravado
        """
        fmt = output_format or self.output_format
        path = Path(file_path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            if fmt == 'csv':
                df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
            elif fmt == 'json':
                self.save_json(self.frame_to_records(df), str(path))
            elif fmt == 'parquet':
                df.to_parquet(path, index=False, engine='pyarrow')
            else:
                raise ConfigError(f"Formato de saída desconhecido: {fmt!r}")
        except OSError as e:
            self.logger.error(f"Erro ao salvar {path}: {e}")
            raise

        self.logger.info(f"Arquivo {fmt.upper()} salvo: {path} ({len(df)} linhas)")
        return str(path)

    def read_table(self, file_path: str) -> pd.DataFrame:
        """Lê tabela gravada por save_table (formato pela extensão)"""
        path = Path(file_path)
        suffix = path.suffix.lower().lstrip('.')
        try:
            if suffix == 'json':
                with open(path, 'r', encoding='utf-8') as f:
                    return pd.DataFrame.from_records(json.load(f))
            if suffix == 'parquet':
                return pd.read_parquet(path, engine='pyarrow')
            return pd.read_csv(path, float_precision='round_trip')
        except OSError as e:
            self.logger.error(f"Erro ao ler {path}: {e}")
            raise

    @staticmethod
    def frame_to_records(df: pd.DataFrame) -> List[Dict[str, Any]]:
        return [{key: _native(value) for key, value in row.items()}
                for row in df.to_dict(orient='records')]

    def save_json(self, data: Any, file_path: str) -> str:
        """Salva dados como JSON (floats com repr exato)"""
        path = Path(file_path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(data, f, indent=2, ensure_ascii=False, allow_nan=False)
                f.write('\n')
        except OSError as e:
            self.logger.error(f"Erro ao salvar JSON {path}: {e}")
            raise
        self.logger.debug(f"JSON salvo: {path}")
        return str(path)

    @staticmethod
    def count_tables_to_frame(tables: Dict[str, CountTable]) -> pd.DataFrame:
        """Formato longo state,m,b,intensity na ordem de inserção dos estados"""
        rows = []
        for label, table in tables.items():
            for m in (1, -1):
                for b in (1, -1):
                    rows.append({'state': label, 'm': m, 'b': b,
                                 'intensity': float(table.entries[(m, b)])})
        return pd.DataFrame(rows, columns=COUNT_COLUMNS)

    @staticmethod
    def frame_to_count_tables(df: pd.DataFrame, mode: str = EXACT,
                              mean_counts: Optional[float] = None) -> Dict[str, CountTable]:
        """
        Reconstrói as CountTables a partir do formato longo

        Sem mean_counts, usa o total de cada tabela.
        """
        missing = [col for col in COUNT_COLUMNS if col not in df.columns]
        if missing:
            raise PreconditionError(f"Colunas ausentes na tabela de contagens: {missing}")
        tables = {}
        for label, group in df.groupby('state', sort=False):
            entries = {(int(row.m), int(row.b)): float(row.intensity) for row in group.itertuples()}
            total = sum(entries.values())
            tables[str(label)] = CountTable(entries=entries, mode=mode,
                                            mean_counts=mean_counts if mean_counts else total)
        return tables

    def save_count_tables(self, tables: Dict[str, CountTable], file_path: str,
                          output_format: Optional[str] = None) -> str:
        return self.save_table(self.count_tables_to_frame(tables), file_path, output_format)

    def load_count_tables(self, file_path: str, mode: str = EXACT,
                          mean_counts: Optional[float] = None) -> Dict[str, CountTable]:
        df = self.read_table(file_path)
        tables = self.frame_to_count_tables(df, mode=mode, mean_counts=mean_counts)
        self.logger.info(f"Tabelas de contagens carregadas: {file_path} ({len(tables)} estados)")
        return tables

    def get_storage_info(self) -> Dict[str, Any]:
        """Retorna informações sobre a configuração de armazenamento"""
        return {
            'storage_type': 'Local',
            'output_format': self.output_format,
            'float_format': FLOAT_FORMAT,
        }
