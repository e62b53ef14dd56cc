#!/usr/bin/env python3
"""
EDUR Experiment - Linha de comando do simulador de medições sucessivas

Subcomandos:
    surface      superfície η(ϑ, φ) da correção e seus extremos
    sweep        varredura (ε, η) em θ_OA, α e ramos de correção, com limites e desigualdades
    three-state  tabelas de contagens e reconstrução pelo método dos três estados
    audit        verificações de aceitação (código de saída 0 ou 1)

Configuração (da menor para a maior precedência): valores padrão, variáveis de
ambiente EDUR_<CHAVE>, arquivo chave=valor passado em --config, flags.
Arquivos de saída sempre em radianos.
"""

import argparse
import concurrent.futures
import logging
import os
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd
from dotenv import dotenv_values, load_dotenv

from audit import STANDARD_ALPHAS, AcceptanceAudit, flipped_conditioned_sign_reconstruct
from edur_metrics import (
    A_DEFAULT,
    bounds,
    check_branciard,
    check_ozawa,
    check_tight_qubit,
    disturbance_closed_form,
    error_disturbance,
    optimize_correction,
)
from exceptions import ConfigError, EdurError
from measurement import (
    ANTI_OPTIMAL,
    OPTIMAL,
    UNCORRECTED,
    CorrectionTarget,
    apparatus_for_branch,
    optimal_target,
)
from polarimeter import (
    DEFAULT_MEAN_COUNTS,
    DISTRIBUTIONS,
    EXACT,
    GAUSSIAN,
    POISSON,
    CountTable,
    prepare_input_state,
    run_three_state,
    three_state_reconstruct,
)
from states import AxisObservable, rho_x
from storage_manager import FORMATS, StorageManager

ENV_PREFIX = 'EDUR_'
BOTH = 'both'
EXPLICIT = 'explicit'
CORRECTION_CHOICES = (BOTH, OPTIMAL, ANTI_OPTIMAL, UNCORRECTED)
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')

SURFACE_THETA_OA = 5 * np.pi / 18
TIGHT_APPLICABLE_TOL = 1e-12

SURFACE_COLUMNS = ['kind', 'theta_oa', 'theta_b', 'alpha', 'vartheta', 'phi', 'disturbance']
POINT_COLUMNS = ['theta_oa', 'theta_b', 'alpha', 'branch', 'error', 'disturbance',
                 'error_sq', 'disturbance_sq', 'error_sq_std', 'disturbance_sq_std']
SWEEP_COLUMNS = POINT_COLUMNS + [
    'c_ab', 'c_prime_ab', 'd_ab',
    'ozawa_lhs', 'ozawa_rhs', 'ozawa_satisfied',
    'branciard_c_lhs', 'branciard_c_rhs', 'branciard_c_satisfied',
    'branciard_d_lhs', 'branciard_d_rhs', 'branciard_d_satisfied',
    'tight_lhs', 'tight_residual', 'tight_satisfied', 'tight_applicable',
    'oracle_residual', 'prep_fidelity',
]
THREE_STATE_COLUMNS = POINT_COLUMNS + ['prefactor_a', 'prefactor_b', 'seed']
AUDIT_COLUMNS = ['name', 'passed', 'residual', 'tolerance', 'detail']

_PI_EXPR = re.compile(r'^([+-]?(?:\d+\.?\d*|\.\d+)?)\s*\*?\s*(?:pi|π)\s*(?:/\s*(\d+\.?\d*))?$',
                      re.IGNORECASE)

Correction = Union[str, CorrectionTarget]


def parse_angle(text: str, degrees: bool = False) -> float:
    """
    Converte '0.5', '5pi/18', '5*pi/18', '-pi/2' ou 'π' em radianos

    Com degrees=True números simples são lidos em graus; expressões com pi
    são sempre radianos.
    """
    value = str(text).strip()
    match = _PI_EXPR.match(value)
    if match:
        coefficient, divisor = match.groups()
        if coefficient in ('', '+'):
            factor = 1.0
        elif coefficient == '-':
            factor = -1.0
        else:
            factor = float(coefficient)
        denominator = float(divisor) if divisor else 1.0
        if denominator == 0:
            raise ConfigError(f"Ângulo inválido (divisão por zero): {text!r}")
        return factor * np.pi / denominator
    try:
        number = float(value)
    except ValueError:
        raise ConfigError(f"Ângulo inválido: {text!r}")
    if not np.isfinite(number):
        raise ConfigError(f"Ângulo inválido: {text!r}")
    return float(np.deg2rad(number)) if degrees else number


def _split(text: str, name: str) -> List[str]:
    items = [item.strip() for item in str(text).split(',')]
    if not items or any(not item for item in items):
        raise ConfigError(f"Lista vazia ou malformada em {name}: {text!r}")
    return items


def _parse_float(text: str, name: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{name} deve ser numérico, recebido {text!r}")


def _parse_int(text: str, name: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{name} deve ser inteiro, recebido {text!r}")


def _parse_bool(text: str) -> bool:
    value = str(text).strip().lower()
    if value in ('1', 'true', 'yes', 'sim', 'on'):
        return True
    if value in ('0', 'false', 'no', 'nao', 'não', 'off', ''):
        return False
    raise ConfigError(f"Valor booleano inválido: {text!r}")


def parse_correction(text: str, degrees: bool = False) -> Correction:
    """'both', 'optimal', 'anti-optimal', 'none' ou alvo explícito 'ϑ,φ'"""
    value = str(text).strip().lower()
    if value in CORRECTION_CHOICES:
        return value
    parts = _split(text, 'correction')
    if len(parts) != 2:
        raise ConfigError(f"Correção inválida: {text!r} (use {', '.join(CORRECTION_CHOICES)} ou 'ϑ,φ')")
    return CorrectionTarget(parse_angle(parts[0], degrees), parse_angle(parts[1], degrees))


def parse_counts(text: str) -> Tuple[str, float]:
    """'exact', 'poisson', 'poisson:N' ou 'poisson(N)' -> (modo, contagem média)"""
    value = str(text).strip().lower()
    if value == EXACT:
        return EXACT, DEFAULT_MEAN_COUNTS
    match = re.match(r'^poisson(?:[:(]\s*([0-9.eE+]+)\s*\)?)?$', value)
    if not match:
        raise ConfigError(f"Modo de contagem inválido: {text!r} (use exact ou poisson:N)")
    mean_counts = _parse_float(match.group(1), 'counts') if match.group(1) else DEFAULT_MEAN_COUNTS
    if not (mean_counts > 0 and np.isfinite(mean_counts)):
        raise ConfigError(f"Contagem média deve ser positiva, recebido {mean_counts}")
    return POISSON, mean_counts


@dataclass
class ExperimentConfig:
    """Configuração dos subcomandos (ângulos em radianos)"""
    theta_oa_start: float = 0.0
    theta_oa_stop: float = np.pi
    theta_oa_step: float = np.pi / 18
    theta_oa: Optional[float] = None  # valor único, substitui a grade
    theta_b: List[float] = None
    alphas: List[float] = None
    correction: Correction = BOTH
    counts: str = EXACT
    seed: int = 0
    grid_step: float = np.pi / 36
    out: Optional[str] = None
    format: str = 'csv'
    degrees: bool = False
    max_workers: int = 4
    log_file: Optional[str] = 'edur_experiment.log'
    log_level: str = 'INFO'
    noise_distribution: str = GAUSSIAN

    def __post_init__(self):
        if self.theta_b is None:
            self.theta_b = [np.pi / 2]
        if self.alphas is None:
            self.alphas = list(STANDARD_ALPHAS)
        self.validate()

    def validate(self):
        """
        Raises:
            ConfigError: valor fora do domínio ou grade vazia
        """
        for name in ('theta_oa_step', 'grid_step'):
            step = getattr(self, name)
            if not (np.isfinite(step) and step > 0):
                raise ConfigError(f"{name} deve ser positivo, recebido {step}")
        if not self.theta_b:
            raise ConfigError("Lista de θ_B vazia")
        if not self.alphas:
            raise ConfigError("Lista de α vazia")
        bad = [alpha for alpha in self.alphas if not (0.0 <= alpha <= 1.0)]
        if bad:
            raise ConfigError(f"α deve estar em [0, 1], recebido {bad}")
        if isinstance(self.correction, str) and self.correction not in CORRECTION_CHOICES:
            raise ConfigError(f"Correção desconhecida: {self.correction!r}")
        parse_counts(self.counts)
        if self.format not in FORMATS:
            raise ConfigError(f"Formato desconhecido: {self.format!r} (use {', '.join(FORMATS)})")
        if self.max_workers < 1:
            raise ConfigError(f"max_workers deve ser >= 1, recebido {self.max_workers}")
        if self.noise_distribution not in DISTRIBUTIONS:
            raise ConfigError(f"Distribuição de ruído desconhecida: {self.noise_distribution!r}")
        if self.log_level not in LOG_LEVELS:
            raise ConfigError(f"Nível de log desconhecido: {self.log_level!r}")
        if len(self.theta_oa_grid()) == 0:
            raise ConfigError(f"Grade de θ_OA vazia: [{self.theta_oa_start}, {self.theta_oa_stop}]")

    def theta_oa_grid(self) -> np.ndarray:
        """Grade de θ_OA com os extremos incluídos quando o passo divide o intervalo"""
        if self.theta_oa is not None:
            return np.array([self.theta_oa])
        span = self.theta_oa_stop - self.theta_oa_start
        if span < 0:
            return np.array([])
        intervals = int(np.floor(span / self.theta_oa_step + 1e-9))
        end = self.theta_oa_start + intervals * self.theta_oa_step
        if abs(end - self.theta_oa_stop) < 1e-9:
            end = self.theta_oa_stop
        return np.linspace(self.theta_oa_start, end, intervals + 1)

    @property
    def count_mode(self) -> str:
        return parse_counts(self.counts)[0]

    @property
    def mean_counts(self) -> float:
        return parse_counts(self.counts)[1]

    def corrections(self) -> List[Tuple[str, Correction]]:
        """(rótulo, correção) na ordem de saída"""
        if isinstance(self.correction, CorrectionTarget):
            return [(EXPLICIT, self.correction)]
        if self.correction == BOTH:
            return [(OPTIMAL, OPTIMAL), (ANTI_OPTIMAL, ANTI_OPTIMAL)]
        return [(self.correction, self.correction)]

    @classmethod
    def from_settings(cls, settings: Mapping[str, str]) -> 'ExperimentConfig':
        """Constrói a configuração a partir de valores textuais (ambiente, arquivo, flags)"""
        unknown = sorted(set(settings) - set(CONFIG_KEYS))
        if unknown:
            raise ConfigError(f"Chaves de configuração desconhecidas: {unknown}")
        degrees = _parse_bool(settings.get('degrees', 'false'))
        kwargs: Dict[str, Any] = {'degrees': degrees}

        for key in ('theta_oa_start', 'theta_oa_stop', 'theta_oa_step', 'theta_oa', 'grid_step'):
            if key in settings:
                kwargs[key] = parse_angle(settings[key], degrees)
        if 'theta_b' in settings:
            kwargs['theta_b'] = [parse_angle(item, degrees) for item in _split(settings['theta_b'], 'theta_b')]
        if 'alphas' in settings:
            kwargs['alphas'] = [_parse_float(item, 'alphas') for item in _split(settings['alphas'], 'alphas')]
        if 'correction' in settings:
            kwargs['correction'] = parse_correction(settings['correction'], degrees)
        if 'counts' in settings:
            kwargs['counts'] = str(settings['counts']).strip().lower()
        if 'seed' in settings:
            kwargs['seed'] = _parse_int(settings['seed'], 'seed')
        if 'max_workers' in settings:
            kwargs['max_workers'] = _parse_int(settings['max_workers'], 'max_workers')
        for key in ('out', 'log_file'):
            if key in settings:
                kwargs[key] = settings[key] or None
        if 'format' in settings:
            kwargs['format'] = str(settings['format']).strip().lower()
        if 'log_level' in settings:
            kwargs['log_level'] = str(settings['log_level']).strip().upper()
        if 'noise_distribution' in settings:
            kwargs['noise_distribution'] = str(settings['noise_distribution']).strip().lower()
        return cls(**kwargs)


CONFIG_KEYS = ('theta_oa_start', 'theta_oa_stop', 'theta_oa_step', 'theta_oa', 'theta_b', 'alphas',
               'correction', 'counts', 'seed', 'grid_step', 'out', 'format', 'degrees',
               'max_workers', 'log_file', 'log_level', 'noise_distribution')


def collect_settings(config_file: Optional[str] = None, overrides: Optional[Mapping[str, Optional[str]]] = None,
                     environ: Optional[Mapping[str, str]] = None) -> Dict[str, str]:
    """
    Junta as fontes de configuração respeitando a precedência

    Args:
        config_file: arquivo chave=valor (lido com dotenv_values)
        overrides: valores das flags; None significa ausente
        environ: ambiente (os.environ por padrão)
    """
    env = os.environ if environ is None else environ
    settings = {}
    for key in CONFIG_KEYS:
        value = env.get(ENV_PREFIX + key.upper())
        if value is not None:
            settings[key] = value

    if config_file:
        path = Path(config_file)
        if not path.is_file():
            raise ConfigError(f"Arquivo de configuração não encontrado: {config_file}")
        for key, value in dotenv_values(path).items():
            if value is not None:
                settings[key.strip().lower()] = value

    for key, value in (overrides or {}).items():
        if value is not None:
            settings[key] = value
    return settings


def load_config(config_file: Optional[str] = None, overrides: Optional[Mapping[str, Optional[str]]] = None,
                environ: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    return ExperimentConfig.from_settings(collect_settings(config_file, overrides, environ))


def _point_seed(seed: int, index: int) -> int:
    """Semente de cada ponto da grade, independente da ordem de execução"""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


class EdurExperiment:
    """Executa os subcomandos e grava os resultados"""

    def __init__(self, config: ExperimentConfig = None):
        self.config = config or ExperimentConfig()
        self.setup_logging()
        self.storage_manager = StorageManager(self.config.format)
        self.logger.info(f"Storage configurado: {self.storage_manager.get_storage_info()}")

    def setup_logging(self):
        """Configura o sistema de logging"""
        handlers: List[logging.Handler] = [logging.StreamHandler()]
        if self.config.log_file:
            handlers.insert(0, logging.FileHandler(self.config.log_file))
        logging.basicConfig(
            level=getattr(logging, self.config.log_level),
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            handlers=handlers
        )
        self.logger = logging.getLogger(__name__)

    def _output_path(self, default_stem: str) -> str:
        return self.config.out or str(Path('results') / f"{default_stem}.{self.config.format}")

    def _tasks(self) -> List[Tuple[int, float, float, float, str, Correction]]:
        """Pontos (índice, θ_OA, θ_B, α, ramo, correção) em ordem determinística"""
        tasks = []
        for theta_b in self.config.theta_b:
            for alpha in self.config.alphas:
                for label, correction in self.config.corrections():
                    for theta_oa in self.config.theta_oa_grid():
                        tasks.append((len(tasks), float(theta_oa), float(theta_b), float(alpha),
                                      label, correction))
        return tasks

    def _map(self, function: Callable, tasks: List) -> List:
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.config.max_workers) as executor:
            return list(executor.map(function, tasks))

    # ------------------------------------------------------------------ surface

    def correction_surface(self) -> pd.DataFrame:
        """Superfície η(ϑ, φ) em θ_OA fixo, com linhas de mínimo, máximo e forma fechada"""
        theta_oa = self.config.theta_oa if self.config.theta_oa is not None else SURFACE_THETA_OA
        theta_b = self.config.theta_b[0]
        alpha = self.config.alphas[0]
        b = AxisObservable(theta_b)
        self.logger.info(f"Superfície de correção: θ_OA={theta_oa:.6f}, θ_B={theta_b:.6f}, "
                         f"α={alpha}, passo={self.config.grid_step:.6f}")

        result = optimize_correction(theta_oa, b, rho_x(alpha), self.config.grid_step)
        context = {'theta_oa': float(theta_oa), 'theta_b': float(theta_b), 'alpha': float(alpha)}
        rows = [dict(kind='grid', vartheta=vartheta, phi=phi, disturbance=eta, **context)
                for vartheta, phi, eta in result.surface]
        for kind, (target, eta) in (('min', result.min_point), ('max', result.max_point)):
            rows.append(dict(kind=kind, vartheta=target.vartheta, phi=target.phi, disturbance=eta, **context))

        oa = AxisObservable(theta_oa)
        in_range = 0.0 <= theta_oa <= np.pi and 0.0 <= theta_b <= np.pi
        if in_range:
            for kind, branch in (('closed_form_min', OPTIMAL), ('closed_form_max', ANTI_OPTIMAL)):
                target = optimal_target(oa, b, branch)
                rows.append(dict(kind=kind, vartheta=target.vartheta, phi=target.phi,
                                 disturbance=disturbance_closed_form(theta_oa, theta_b, branch), **context))

        self.logger.info(f"η mínimo {result.min_point[1]:.6f}, η máximo {result.max_point[1]:.6f}")
        return pd.DataFrame(rows, columns=SURFACE_COLUMNS)

    # -------------------------------------------------------------------- sweep

    def _sweep_row(self, task, fidelities: Dict[float, float]) -> Dict[str, Any]:
        index, theta_oa, theta_b, alpha, label, correction = task
        a, b = A_DEFAULT, AxisObservable(theta_b)
        app = apparatus_for_branch(AxisObservable(theta_oa), b, correction)
        state = rho_x(alpha)

        direct = error_disturbance(app, a, b, state)
        oracle = three_state_reconstruct(run_three_state(app, a, b, state, mode=EXACT))
        oracle_residual = max(abs(direct.error_sq - oracle.error_sq),
                              abs(direct.disturbance_sq - oracle.disturbance_sq))

        point = direct
        if self.config.count_mode == POISSON:
            point = three_state_reconstruct(run_three_state(
                app, a, b, state, mean_counts=self.config.mean_counts, mode=POISSON,
                seed=_point_seed(self.config.seed, index)))

        bound_set = bounds(a, b, state)
        ozawa = check_ozawa(point, a, b, state)
        branciard_c = check_branciard(point, a, b, state, bound_set.c_prime_ab)
        branciard_d = check_branciard(point, a, b, state, bound_set.d_ab)
        tight = check_tight_qubit(point)
        self.logger.debug(f"Ponto {index}: θ_OA={theta_oa:.4f} θ_B={theta_b:.4f} α={alpha} {label} "
                          f"ε={point.error:.6f} η={point.disturbance:.6f}")

        return {
            'theta_oa': theta_oa, 'theta_b': theta_b, 'alpha': alpha, 'branch': label,
            'error': point.error, 'disturbance': point.disturbance,
            'error_sq': point.error_sq, 'disturbance_sq': point.disturbance_sq,
            'error_sq_std': point.error_sq_std, 'disturbance_sq_std': point.disturbance_sq_std,
            'c_ab': bound_set.c_ab, 'c_prime_ab': bound_set.c_prime_ab, 'd_ab': bound_set.d_ab,
            'ozawa_lhs': ozawa.lhs, 'ozawa_rhs': ozawa.rhs, 'ozawa_satisfied': bool(ozawa.satisfied),
            'branciard_c_lhs': branciard_c.lhs, 'branciard_c_rhs': branciard_c.rhs,
            'branciard_c_satisfied': bool(branciard_c.satisfied),
            'branciard_d_lhs': branciard_d.lhs, 'branciard_d_rhs': branciard_d.rhs,
            'branciard_d_satisfied': bool(branciard_d.satisfied),
            'tight_lhs': tight.lhs, 'tight_residual': tight.residual,
            'tight_satisfied': bool(tight.satisfied),
            'tight_applicable': bool(abs(bound_set.d_ab - 1.0) <= TIGHT_APPLICABLE_TOL),
            'oracle_residual': float(oracle_residual),
            'prep_fidelity': fidelities[alpha],
        }

    def edur_sweep(self) -> pd.DataFrame:
        """Uma linha por (θ_B, α, ramo, θ_OA)"""
        tasks = self._tasks()
        self.logger.info(f"Varredura EDUR: {len(tasks)} pontos, contagens={self.config.counts}, "
                         f"{self.config.max_workers} workers")

        fidelities = {}
        for alpha in self.config.alphas:
            if alpha not in fidelities:
                fidelities[alpha] = prepare_input_state(alpha, self.config.noise_distribution)[2]
                self.logger.debug(f"Fidelidade da preparação α={alpha}: {fidelities[alpha]:.12f}")

        rows = self._map(lambda task: self._sweep_row(task, fidelities), tasks)
        violations = sum(1 for row in rows
                         if not (row['ozawa_satisfied'] and row['branciard_d_satisfied']))
        if violations:
            self.logger.warning(f"{violations} pontos violam Ozawa ou Branciard com D_AB")
        return pd.DataFrame(rows, columns=SWEEP_COLUMNS)

    # -------------------------------------------------------------- three-state

    def _three_state_point(self, task) -> Tuple[Dict[str, Any], Dict[str, Any]]:
        index, theta_oa, theta_b, alpha, label, correction = task
        b = AxisObservable(theta_b)
        app = apparatus_for_branch(AxisObservable(theta_oa), b, correction)
        seed = _point_seed(self.config.seed, index) if self.config.count_mode == POISSON else None
        run = run_three_state(app, A_DEFAULT, b, rho_x(alpha), mean_counts=self.config.mean_counts,
                              mode=self.config.count_mode, seed=seed)
        point = three_state_reconstruct(run)

        row = {
            'theta_oa': theta_oa, 'theta_b': theta_b, 'alpha': alpha, 'branch': label,
            'error': point.error, 'disturbance': point.disturbance,
            'error_sq': point.error_sq, 'disturbance_sq': point.disturbance_sq,
            'error_sq_std': point.error_sq_std, 'disturbance_sq_std': point.disturbance_sq_std,
            'prefactor_a': run.prefactor_a, 'prefactor_b': run.prefactor_b,
            'seed': -1 if seed is None else seed,
        }
        context = f"{label}|theta_oa={theta_oa!r}|theta_b={theta_b!r}|alpha={alpha!r}"
        tables = {f"{context}|{state}": table for state, table in run.tables.items()}
        return row, tables

    def three_state(self) -> Tuple[pd.DataFrame, Dict[str, CountTable]]:
        """Pontos reconstruídos e tabelas de contagens rotuladas por ponto e estado"""
        tasks = self._tasks()
        self.logger.info(f"Método dos três estados: {len(tasks)} pontos, contagens={self.config.counts}")
        results = self._map(self._three_state_point, tasks)

        tables = {}
        for _, point_tables in results:
            tables.update(point_tables)
        points = pd.DataFrame([row for row, _ in results], columns=THREE_STATE_COLUMNS)
        return points, tables

    # -------------------------------------------------------------------- audit

    def audit(self, inject_fault: bool = False) -> Tuple[bool, pd.DataFrame]:
        reconstruct = flipped_conditioned_sign_reconstruct if inject_fault else three_state_reconstruct
        if inject_fault:
            self.logger.warning("Auditoria com falha injetada na reconstrução")
        auditor = AcceptanceAudit(reconstruct=reconstruct, seed=self.config.seed,
                                  max_workers=self.config.max_workers)
        passed = auditor.run()
        report = pd.DataFrame([vars(result) for result in auditor.results], columns=AUDIT_COLUMNS)
        return passed, report

    # ------------------------------------------------------------------ writers

    def write_surface(self) -> str:
        return self.storage_manager.save_table(self.correction_surface(),
                                               self._output_path('correction_surface'))

    def write_sweep(self) -> str:
        return self.storage_manager.save_table(self.edur_sweep(), self._output_path('edur_sweep'))

    def write_three_state(self) -> Tuple[str, str]:
        points, tables = self.three_state()
        path = Path(self._output_path('three_state'))
        counts_path = path.with_name(f"{path.stem}_counts{path.suffix}")
        return (self.storage_manager.save_table(points, str(path)),
                self.storage_manager.save_count_tables(tables, str(counts_path)))

    def write_audit(self, inject_fault: bool = False) -> bool:
        passed, report = self.audit(inject_fault)
        if self.config.out:
            self.storage_manager.save_table(report, self.config.out)
        return passed


def _run(config: ExperimentConfig, action: Callable[[EdurExperiment], Any]) -> int:
    """Executa a ação mapeando erros para códigos de saída"""
    logger = logging.getLogger(__name__)
    try:
        experiment = EdurExperiment(config)
        result = action(experiment)
    except (EdurError, OSError) as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return 2
    if result is False:
        return 1
    return 0


def cmd_correction_surface(config: ExperimentConfig) -> int:
    return _run(config, lambda experiment: experiment.write_surface())


def cmd_edur_sweep(config: ExperimentConfig) -> int:
    return _run(config, lambda experiment: experiment.write_sweep())


def cmd_three_state(config: ExperimentConfig) -> int:
    return _run(config, lambda experiment: experiment.write_three_state())


def cmd_audit(config: ExperimentConfig, inject_fault: bool = False) -> int:
    """0 se todas as verificações passarem, 1 caso contrário, 2 em erro de configuração"""
    return _run(config, lambda experiment: experiment.write_audit(inject_fault))


COMMANDS = {
    'surface': cmd_correction_surface,
    'sweep': cmd_edur_sweep,
    'three-state': cmd_three_state,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--theta-oa', help='θ_OA único (aceita pi: 5pi/18)')
    common.add_argument('--theta-b', help='θ_B, lista separada por vírgulas')
    common.add_argument('--alpha', help='Comprimentos de Bloch α, lista separada por vírgulas')
    common.add_argument('--step', help='Passo da grade (θ_OA; no surface, da grade ϑ/φ)')
    common.add_argument('--correction', help='both, optimal, anti-optimal, none ou alvo "ϑ,φ"')
    common.add_argument('--counts', help='exact ou poisson:N')
    common.add_argument('--seed', help='Semente das contagens de Poisson')
    common.add_argument('--out', help='Arquivo de saída')
    common.add_argument('--format', choices=FORMATS, help='Formato de saída (padrão: csv)')
    common.add_argument('--degrees', action='store_true', default=None,
                        help='Ângulos numéricos de entrada em graus')
    common.add_argument('--max-workers', help='Threads para pontos independentes')
    common.add_argument('--log-level', help='DEBUG, INFO, WARNING, ERROR')
    common.add_argument('--config', help='Arquivo de configuração chave=valor')

    parser = argparse.ArgumentParser(description='Simulador de relações erro-perturbação em qubits')
    subparsers = parser.add_subparsers(dest='command', required=True)
    subparsers.add_parser('surface', parents=[common], help='Superfície η(ϑ, φ) da correção')
    subparsers.add_parser('sweep', parents=[common], help='Varredura (ε, η) com limites e desigualdades')
    subparsers.add_parser('three-state', parents=[common], help='Contagens e reconstrução pelos três estados')
    audit_parser = subparsers.add_parser('audit', parents=[common], help='Verificações de aceitação')
    audit_parser.add_argument('--inject-fault', action='store_true', help=argparse.SUPPRESS)
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Optional[str]]:
    step_key = 'grid_step' if args.command == 'surface' else 'theta_oa_step'
    return {
        'theta_oa': args.theta_oa,
        'theta_b': args.theta_b,
        'alphas': args.alpha,
        step_key: args.step,
        'correction': args.correction,
        'counts': args.counts,
        'seed': args.seed,
        'out': args.out,
        'format': args.format,
        'degrees': 'true' if args.degrees else None,
        'max_workers': args.max_workers,
        'log_level': args.log_level,
    }


def main(argv: Optional[List[str]] = None) -> int:
    """Função principal"""
    args = build_parser().parse_args(argv)
    load_dotenv()

    try:
        config = load_config(args.config, _overrides(args))
    except ConfigError as e:
        print(f"Erro de configuração: {e}", file=sys.stderr)
        return 2

    if args.command == 'audit':
        return cmd_audit(config, inject_fault=args.inject_fault)
    return COMMANDS[args.command](config)


if __name__ == "__main__":
    sys.exit(main())
