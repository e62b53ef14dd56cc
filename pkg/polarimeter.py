#!/usr/bin/env python3
"""
Polarimeter Protocol - Simulação do polarímetro em três estágios

1. Preparação: rotação π/2 ruidosa em torno de x (canal de mistura) seguida da
   reorientação para +x, produzindo ρ_x(α).
2. Medição sucessiva: aparato M1 (O_A + correção) e projeção em B, gerando as
   quatro intensidades I_mb por estado de entrada.
3. Reconstrução de ε(A) e η(B) pelo método dos três estados, apenas a partir
   das intensidades e dos pré-fatores Tr(P⁺ρ) medidos separadamente.

As contagens podem ser exatas (probabilidades vezes contagem média) ou
amostradas de Poisson com sub-sementes derivadas de (semente, estado, m, b).
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np

import qubit_core as qc
from edur_metrics import EdurPoint, clamp_square
from exceptions import (
    AccuracyError,
    EmptyDataError,
    PreconditionError,
    ProtocolIncompleteError,
    RangeError,
)
from measurement import MeasurementFamily, OUTCOMES, apparatus_theta
from states import AxisObservable, QubitState, conditioned, conjugate, fidelity, rho_x

logger = logging.getLogger(__name__)

GAUSSIAN = 'gaussian'
UNIFORM = 'uniform'
DISTRIBUTIONS = (GAUSSIAN, UNIFORM)

EXACT = 'exact'
POISSON = 'poisson'
COUNT_MODES = (EXACT, POISSON)

DEFAULT_MEAN_COUNTS = 1e4

REFINEMENT_TOL = 1e-10
CONVERGENCE_TOL = 1e-8
MAX_QUADRATURE_POINTS = 1024
# hermgauss devolve pesos NaN a partir de ~512 nós
MAX_HERMITE_POINTS = 256
# acima disso o ruído gaussiano é integrado como normal enrolada em [-π, π]
WRAPPED_SIGMA = np.pi
SOLVE_TOL = 1e-9

# rótulos dos estados de entrada, na ordem usada para as sub-sementes
RHO = 'rho'
A_REFLECTED = 'a_reflected'
A_CONDITIONED = 'a_conditioned'
B_REFLECTED = 'b_reflected'
B_CONDITIONED = 'b_conditioned'
STATE_LABELS = (RHO, A_REFLECTED, A_CONDITIONED, B_REFLECTED, B_CONDITIONED)
ERROR_SET = (RHO, A_REFLECTED, A_CONDITIONED)
DISTURBANCE_SET = (RHO, B_REFLECTED, B_CONDITIONED)

PREFACTOR_STREAM = 1000

# reorientação fixa do estágio de preparação: -y -> +x
_REORIENT = qc.rotation_about_z(np.pi / 2)
_SPIN_UP = QubitState.from_bloch((0.0, 0.0, 1.0))


@dataclass(frozen=True)
class NoisyRotationSpec:
    """Rotação U(π/2 + Δξ) em torno de x com Δξ aleatório de desvio noise_sigma"""
    nominal_angle: float = np.pi / 2
    noise_sigma: float = 0.0
    distribution: str = GAUSSIAN
    quadrature_points: int = 8

    def __post_init__(self):
        if not np.isfinite(self.noise_sigma) or self.noise_sigma < 0:
            raise PreconditionError(f"noise_sigma deve ser >= 0, recebido {self.noise_sigma}")
        if self.distribution not in DISTRIBUTIONS:
            raise PreconditionError(f"Distribuição desconhecida: {self.distribution!r}")
        if self.quadrature_points < 3:
            raise PreconditionError(f"quadrature_points deve ser >= 3, recebido {self.quadrature_points}")


@lru_cache(maxsize=32)
def _hermite_nodes(points: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.hermite.hermgauss(points)
    return nodes, weights / np.sqrt(np.pi)


@lru_cache(maxsize=32)
def _legendre_nodes(points: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(points)
    return nodes, weights / 2.0


def _wrapped_normal(x: np.ndarray, sigma: float) -> np.ndarray:
    """Densidade da normal N(0, σ²) enrolada no círculo, soma sobre imagens x + 2πk"""
    images = int(np.ceil(8 * sigma / (2 * np.pi))) + 1
    shifted = x[:, None] + 2 * np.pi * np.arange(-images, images + 1)
    return np.exp(-shifted ** 2 / (2 * sigma ** 2)).sum(axis=1) / (sigma * np.sqrt(2 * np.pi))


def _quadrature(spec: NoisyRotationSpec, points: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nós Δξ e pesos normalizados da distribuição do ruído"""
    sigma = spec.noise_sigma
    if spec.distribution == GAUSSIAN and sigma < WRAPPED_SIGMA:
        nodes, weights = _hermite_nodes(min(points, MAX_HERMITE_POINTS))
        return np.sqrt(2.0) * sigma * nodes, weights
    nodes, weights = _legendre_nodes(points)
    if spec.distribution == GAUSSIAN:
        # o canal é 2π-periódico em Δξ
        shifts = np.pi * nodes
        density = weights * _wrapped_normal(shifts, sigma)
        return shifts, density / density.sum()
    # uniforme em [-w, w] com desvio σ: w = √3 σ
    return np.sqrt(3.0) * sigma * nodes, weights


def _averaged_rotation(spec: NoisyRotationSpec, rho: np.ndarray, points: int) -> np.ndarray:
    shifts, weights = _quadrature(spec, points)
    if not (np.all(np.isfinite(shifts)) and np.all(np.isfinite(weights))):
        raise AccuracyError(f"Nós de quadratura não finitos ({points} nós, σ={spec.noise_sigma})")
    half = (spec.nominal_angle + shifts) / 2
    unitaries = (np.cos(half)[:, None, None] * qc.IDENTITY
                 - 1j * np.sin(half)[:, None, None] * qc.SIGMA_X)
    averaged = np.einsum('n,nij,jk,nlk->il', weights, unitaries, rho, unitaries.conj())
    if not np.all(np.isfinite(averaged)):
        raise AccuracyError(f"Canal de mistura não finito ({points} nós, σ={spec.noise_sigma})")
    return averaged


def mixing_channel(spec: NoisyRotationSpec, state: QubitState) -> QubitState:
    """
    Média da rotação ruidosa sobre a distribuição de Δξ

    A quadratura dobra o número de nós até o vetor de Bloch variar menos que
    1e-10. Ruído gaussiano com σ < π usa Gauss-Hermite (até 256 nós); acima
    disso a normal enrolada em [-π, π] é integrada por Gauss-Legendre.

    Raises:
        AccuracyError: discordância final entre refinamentos maior que 1e-8
    """
    if spec.noise_sigma == 0:
        return state.evolve(qc.rotation_about_x(spec.nominal_angle))

    points = spec.quadrature_points
    current = _averaged_rotation(spec, state.rho, points)
    while True:
        points *= 2
        refined = _averaged_rotation(spec, state.rho, points)
        change = float(np.linalg.norm(qc.bloch_vector(refined) - qc.bloch_vector(current)))
        current = refined
        logger.debug(f"Quadratura {spec.distribution}: {points} nós, variação {change:.3e}")
        if change < REFINEMENT_TOL or points >= MAX_QUADRATURE_POINTS:
            break

    if change > CONVERGENCE_TOL:
        raise AccuracyError(
            f"Quadratura não convergiu para σ={spec.noise_sigma} ({points} nós, variação {change:.3e})"
        )
    if change >= REFINEMENT_TOL:
        logger.warning(f"Quadratura aceita com variação {change:.3e} (σ={spec.noise_sigma})")
    return QubitState(0.5 * (current + qc.dagger(current)))


def _signed_length(sigma: float, distribution: str) -> float:
    """Polarização de saída na direção nominal para entrada |+z⟩"""
    spec = NoisyRotationSpec(noise_sigma=sigma, distribution=distribution)
    nominal = qc.apply_unitary_to_bloch(qc.rotation_about_x(spec.nominal_angle), _SPIN_UP.bloch)
    return float(np.dot(mixing_channel(spec, _SPIN_UP).bloch, nominal))


@lru_cache(maxsize=64)
def solve_sigma_for_alpha(alpha: float, distribution: str = GAUSSIAN) -> float:
    """
    Amplitude de ruído que leva |+z⟩ a um estado de polarização α

    Bissecção contra a própria quadratura do canal de mistura. Para a
    distribuição uniforme a busca fica no primeiro lobo de sinc(√3σ).

    Raises:
        RangeError: α fora de [0, 1]
    """
    if not (0.0 <= alpha <= 1.0):
        raise RangeError(f"α deve estar em [0, 1], recebido {alpha}")
    if distribution not in DISTRIBUTIONS:
        raise PreconditionError(f"Distribuição desconhecida: {distribution!r}")
    if alpha == 1.0:
        return 0.0

    if distribution == UNIFORM:
        high = np.pi / np.sqrt(3.0)
    else:
        high = 1.0
        while _signed_length(high, distribution) > max(alpha, SOLVE_TOL):
            high *= 2
    low = 0.0

    mid = high
    while high - low > 1e-12:
        mid = 0.5 * (low + high)
        length = _signed_length(mid, distribution)
        if abs(length - alpha) < SOLVE_TOL:
            break
        if length > alpha:
            low = mid
        else:
            high = mid

    logger.debug(f"σ para α={alpha} ({distribution}): {mid:.10f}")
    return float(mid)


def prepare_input_state(alpha: float, distribution: str = GAUSSIAN) -> Tuple[QubitState, NoisyRotationSpec, float]:
    """
    Estágio de preparação completo para ρ_x(α)

    Returns:
        (estado preparado, especificação do ruído, fidelidade com ρ_x(α))
    """
    spec = NoisyRotationSpec(noise_sigma=solve_sigma_for_alpha(alpha, distribution),
                             distribution=distribution)
    prepared = mixing_channel(spec, _SPIN_UP).evolve(_REORIENT)
    return prepared, spec, fidelity(rho_x(alpha), prepared)


@dataclass(frozen=True)
class CountTable:
    """Quatro intensidades I_mb de um estado de entrada"""
    entries: Dict[Tuple[int, int], float]
    mode: str = EXACT
    mean_counts: float = DEFAULT_MEAN_COUNTS

    def __post_init__(self):
        keys = {(m, b) for m in OUTCOMES for b in OUTCOMES}
        if set(self.entries) != keys:
            raise PreconditionError(f"Tabela deve ter as chaves {sorted(keys)}, recebido {sorted(self.entries)}")
        if any(value < 0 or not np.isfinite(value) for value in self.entries.values()):
            raise PreconditionError(f"Intensidades devem ser finitas e >= 0: {self.entries}")
        if self.mode not in COUNT_MODES:
            raise PreconditionError(f"Modo de contagem desconhecido: {self.mode!r}")

    @property
    def total(self) -> float:
        return float(sum(self.entries.values()))

    def normalized(self) -> Dict[Tuple[int, int], float]:
        total = self.total
        if total <= 0:
            raise EmptyDataError("Tabela de contagens vazia")
        return {key: value / total for key, value in self.entries.items()}


@dataclass(frozen=True)
class ThreeStateRun:
    """Tabelas e pré-fatores do método dos três estados"""
    tables: Dict[str, CountTable]
    prefactor_a: float
    prefactor_b: float
    theta_oa: float
    theta_b: float
    alpha: float
    seed: Optional[int] = None
    prefactor_a_var: float = 0.0
    prefactor_b_var: float = 0.0
    states: Dict[str, QubitState] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for name in ('prefactor_a', 'prefactor_b'):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise PreconditionError(f"{name} deve estar em [0, 1], recebido {value}")

    @property
    def mode(self) -> str:
        modes = {table.mode for table in self.tables.values()}
        return POISSON if POISSON in modes else EXACT


def joint_probabilities(app: MeasurementFamily, b: AxisObservable,
                        state: QubitState) -> Dict[Tuple[int, int], float]:
    """p(m, b) = Tr(P_b^B M_m ρ M_m†)"""
    probs = {}
    for m in OUTCOMES:
        op = app.operator(m)
        after = op @ state.rho @ qc.dagger(op)
        for sign in OUTCOMES:
            probs[(m, sign)] = max(float(np.trace(b.projector(sign) @ after).real), 0.0)
    return probs


def _sub_rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *stream]))


def simulate_counts(app: MeasurementFamily, b: AxisObservable, state: QubitState,
                    mean_counts: float = DEFAULT_MEAN_COUNTS, seed: Optional[int] = None,
                    mode: str = EXACT, state_index: int = 0) -> CountTable:
    """
    Intensidades da medição sucessiva O_A -> B

    Modo exato: I_mb = N p(m,b). Modo Poisson: sorteios independentes com
    essas médias, cada um com sub-semente (seed, state_index, m, b).
    """
    if not (mean_counts > 0):
        raise RangeError(f"mean_counts deve ser positivo, recebido {mean_counts}")
    if mode not in COUNT_MODES:
        raise PreconditionError(f"Modo de contagem desconhecido: {mode!r}")
    probs = joint_probabilities(app, b, state)

    if mode == EXACT:
        entries = {key: mean_counts * p for key, p in probs.items()}
    else:
        if seed is None:
            raise PreconditionError("Modo Poisson exige semente")
        entries = {}
        for (m, sign), p in probs.items():
            rng = _sub_rng(seed, state_index, OUTCOMES.index(m), OUTCOMES.index(sign))
            entries[(m, sign)] = float(rng.poisson(mean_counts * p))
    return CountTable(entries=entries, mode=mode, mean_counts=mean_counts)


def expectations_from_counts(table: CountTable) -> Tuple[float, float]:
    """(Tr(O_A ρ), Tr(O_B ρ)) a partir das quatro intensidades"""
    total = table.total
    if total <= 0:
        raise EmptyDataError("Tabela de contagens vazia: sem dados para médias")
    mean_oa = sum(m * value for (m, _), value in table.entries.items()) / total
    mean_ob = sum(sign * value for (_, sign), value in table.entries.items()) / total
    return float(mean_oa), float(mean_ob)


def expectation_variances(table: CountTable) -> Tuple[float, float]:
    """
    Variâncias das médias propagando Var(I_k) = I_k linearmente

    Var(⟨O⟩) = Σ_k (w_k - ⟨O⟩)² I_k / T². Zero no modo exato.
    """
    if table.mode == EXACT:
        return 0.0, 0.0
    mean_oa, mean_ob = expectations_from_counts(table)
    total = table.total
    var_oa = sum((m - mean_oa) ** 2 * value for (m, _), value in table.entries.items()) / total ** 2
    var_ob = sum((sign - mean_ob) ** 2 * value for (_, sign), value in table.entries.items()) / total ** 2
    return float(var_oa), float(var_ob)


def prefactor(obs: AxisObservable, state: QubitState) -> float:
    """Tr(P⁺ρ) com P⁺ = ½(𝟙 + obs)"""
    return float(np.clip(np.trace(obs.projector(1) @ state.rho).real, 0.0, 1.0))


def sample_prefactor(obs: AxisObservable, state: QubitState, mean_counts: float,
                     seed: int, index: int = 0) -> Tuple[float, float]:
    """
    Pré-fator medido com um único aparato (contagens I₊, I₋ de Poisson)

    Returns:
        (estimativa I₊/T, variância propagada I₊I₋/T³)
    """
    p_plus = prefactor(obs, state)
    rng = _sub_rng(seed, PREFACTOR_STREAM, index)
    plus = float(rng.poisson(mean_counts * p_plus))
    minus = float(rng.poisson(mean_counts * (1.0 - p_plus)))
    total = plus + minus
    if total <= 0:
        raise EmptyDataError("Nenhuma contagem na medição do pré-fator")
    return plus / total, plus * minus / total ** 3


def run_three_state(app: MeasurementFamily, a: AxisObservable, b: AxisObservable,
                    state: QubitState, mean_counts: float = DEFAULT_MEAN_COUNTS,
                    mode: str = EXACT, seed: Optional[int] = 0) -> ThreeStateRun:
    """Simula as tabelas dos cinco estados de entrada e os dois pré-fatores"""
    states = {
        RHO: state,
        A_REFLECTED: conjugate(state, a),
        A_CONDITIONED: conditioned(state, a),
        B_REFLECTED: conjugate(state, b),
        B_CONDITIONED: conditioned(state, b),
    }
    tables = {
        label: simulate_counts(app, b, states[label], mean_counts, seed=seed, mode=mode,
                               state_index=STATE_LABELS.index(label))
        for label in STATE_LABELS
    }

    if mode == EXACT:
        prefactor_a, prefactor_a_var = prefactor(a, state), 0.0
        prefactor_b, prefactor_b_var = prefactor(b, state), 0.0
    else:
        prefactor_a, prefactor_a_var = sample_prefactor(a, state, mean_counts, seed, index=0)
        prefactor_b, prefactor_b_var = sample_prefactor(b, state, mean_counts, seed, index=1)

    return ThreeStateRun(tables=tables, prefactor_a=prefactor_a, prefactor_b=prefactor_b,
                         theta_oa=apparatus_theta(app), theta_b=b.theta, alpha=state.alpha,
                         seed=seed, prefactor_a_var=prefactor_a_var,
                         prefactor_b_var=prefactor_b_var, states=states)


def _combine(run: ThreeStateRun, labels: Tuple[str, str, str], weight: float,
             weight_var: float, column: int) -> Tuple[float, float]:
    """2 - 4 p Tr(ρ| O) + Tr(OρO O) + Tr(ρ O) e sua variância"""
    direct_label, reflected_label, conditioned_label = labels
    direct = expectations_from_counts(run.tables[direct_label])[column]
    reflected = expectations_from_counts(run.tables[reflected_label])[column]
    cond = expectations_from_counts(run.tables[conditioned_label])[column]
    value = 2.0 - 4.0 * weight * cond + reflected + direct

    var = (16 * weight ** 2 * expectation_variances(run.tables[conditioned_label])[column]
           + 16 * cond ** 2 * weight_var
           + expectation_variances(run.tables[reflected_label])[column]
           + expectation_variances(run.tables[direct_label])[column])
    return value, var


def three_state_reconstruct(run: ThreeStateRun) -> EdurPoint:
    """
    ε(A)² e η(B)² pelo método dos três estados

    No modo exato os quadrados são truncados como na avaliação direta; no modo
    Poisson o estimador mantém o sinal e os desvios padrão propagados vão em
    error_sq_std e disturbance_sq_std.

    Raises:
        ProtocolIncompleteError: falta alguma das tabelas
    """
    missing = [label for label in STATE_LABELS if label not in run.tables]
    if missing:
        raise ProtocolIncompleteError(f"Tabelas ausentes no método dos três estados: {missing}")

    error_sq, error_var = _combine(run, ERROR_SET, run.prefactor_a, run.prefactor_a_var, 0)
    disturbance_sq, disturbance_var = _combine(run, DISTURBANCE_SET, run.prefactor_b,
                                               run.prefactor_b_var, 1)
    if run.mode == EXACT:
        error_sq = clamp_square(error_sq, "ε²")
        disturbance_sq = clamp_square(disturbance_sq, "η²")

    return EdurPoint.from_squares(error_sq, disturbance_sq, theta_oa=run.theta_oa,
                                  theta_b=run.theta_b, alpha=run.alpha,
                                  error_sq_std=float(np.sqrt(error_var)),
                                  disturbance_sq_std=float(np.sqrt(disturbance_var)))
