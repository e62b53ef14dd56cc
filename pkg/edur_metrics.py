#!/usr/bin/env python3
"""
EDUR Metrics - Erro, perturbação, limites e desigualdades

Calcula ε(A) e η(B) de um aparato pela forma geral de operadores de saída e
pela forma binária (as duas devem concordar), os limites C_AB, C'_AB e D_AB,
as desigualdades de Ozawa, Branciard e a relação justa para qubits, as formas
fechadas da medição desafinada e o otimizador da unitária de correção.
"""

import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Tuple

import numpy as np

import qubit_core as qc
from exceptions import ConsistencyError, DomainError, RangeError
from measurement import (
    ANTI_OPTIMAL,
    BRANCHES,
    OPTIMAL,
    CorrectionTarget,
    MeasurementFamily,
    apparatus_theta,
    corrected_apparatus,
    output_operator_A,
    output_operator_B,
)
from states import AxisObservable, QubitState, variance

logger = logging.getLogger(__name__)

CONSISTENCY_TOL = 1e-10
CLAMP_TOL = 1e-10
SNAP_TOL = 1e-14
INEQUALITY_TOL = 1e-10
RADICAND_TOL = 1e-12
TIGHT_TOL = 1e-9
ANGLE_TOL = 1e-12

A_DEFAULT = AxisObservable(0.0)


@dataclass(frozen=True)
class EdurPoint:
    """Ponto (ε(A), η(B)) de uma configuração de aparato e estado"""
    error: float
    disturbance: float
    error_sq: float
    disturbance_sq: float
    theta_oa: float
    theta_b: float
    alpha: float
    error_sq_std: float = 0.0
    disturbance_sq_std: float = 0.0

    @classmethod
    def from_squares(cls, error_sq: float, disturbance_sq: float, theta_oa: float,
                     theta_b: float, alpha: float, **stds) -> 'EdurPoint':
        return cls(error=float(np.sqrt(max(error_sq, 0.0))),
                   disturbance=float(np.sqrt(max(disturbance_sq, 0.0))),
                   error_sq=float(error_sq), disturbance_sq=float(disturbance_sq),
                   theta_oa=float(theta_oa), theta_b=float(theta_b), alpha=float(alpha),
                   **stds)


@dataclass(frozen=True)
class BoundSet:
    """Constantes de Robertson C_AB, C'_AB e a constante de Ozawa D_AB"""
    c_ab: float
    c_prime_ab: float
    d_ab: float


class InequalityCheck(NamedTuple):
    lhs: float
    rhs: float
    satisfied: bool
    slack: float


class TightCheck(NamedTuple):
    lhs: float
    satisfied: bool
    residual: float


@dataclass(frozen=True)
class CorrectionSurface:
    """Resultado da varredura de alvos de correção"""
    min_point: Tuple[CorrectionTarget, float]
    max_point: Tuple[CorrectionTarget, float]
    surface: List[Tuple[float, float, float]] = field(repr=False)


def clamp_square(value: float, name: str) -> float:
    """
    Trunca valores quadráticos em (-1e-10, 1e-14) para zero

    O arredondamento de 2 - 2x com x próximo de 1 deixa resíduos da ordem de
    1e-16, que viram 1e-8 após a raiz.
    """
    if value < SNAP_TOL:
        if value > -CLAMP_TOL:
            return 0.0
        raise ConsistencyError(f"{name} negativo: {value:.3e}")
    return value


def _mean(operator: np.ndarray, state: QubitState) -> float:
    return float(np.trace(operator @ state.rho).real)


def _squared_deviation(app_out: np.ndarray, app_out_sq: np.ndarray, target: np.ndarray,
                       state: QubitState) -> Tuple[float, float]:
    """
    (forma geral, forma binária) do desvio quadrático médio

    geral:   ⟨(O - T)²⟩ + ⟨O^(2) - O²⟩
    binária: 2 - 2 Re⟨T O⟩
    """
    diff = app_out - target
    general = _mean(diff @ diff, state) + _mean(app_out_sq - app_out @ app_out, state)
    binary = 2.0 - 2.0 * float(np.trace(state.rho @ target @ app_out).real)
    return general, binary


def _checked(general: float, binary: float, name: str) -> float:
    if abs(general - binary) > CONSISTENCY_TOL:
        raise ConsistencyError(
            f"{name}: forma geral {general!r} e forma binária {binary!r} discordam"
        )
    return clamp_square(binary, name)


def error_sq(app: MeasurementFamily, a: AxisObservable, state: QubitState) -> float:
    general, binary = _squared_deviation(output_operator_A(app, 1), output_operator_A(app, 2),
                                         a.matrix, state)
    return _checked(general, binary, "ε²")


def disturbance_sq(app: MeasurementFamily, b: AxisObservable, state: QubitState) -> float:
    general, binary = _squared_deviation(output_operator_B(app, b, 1), output_operator_B(app, b, 2),
                                         b.matrix, state)
    return _checked(general, binary, "η²")


def error_disturbance(app: MeasurementFamily, a: AxisObservable, b: AxisObservable,
                      state: QubitState) -> EdurPoint:
    """
    ε(A) e η(B) do aparato no estado dado

    Raises:
        ConsistencyError: forma geral e forma binária discordam além de 1e-10
    """
    return EdurPoint.from_squares(error_sq(app, a, state), disturbance_sq(app, b, state),
                                  theta_oa=apparatus_theta(app), theta_b=b.theta,
                                  alpha=state.alpha)


def _require_angle(value: float, name: str):
    if not (-ANGLE_TOL <= value <= np.pi + ANGLE_TOL):
        raise RangeError(f"{name} deve estar em [0, π], recebido {value}")


def error_closed_form(theta_oa: float) -> float:
    """ε(A) = 2 sin(θ_OA/2) para A = σz"""
    _require_angle(theta_oa, "θ_OA")
    return float(2 * np.sin(np.clip(theta_oa, 0.0, np.pi) / 2))


def disturbance_bounds_closed_form(theta_oa: float, theta_b: float) -> Tuple[float, float]:
    """
    (η mínimo, η máximo) sobre todas as correções

    2|sin(Δ/2)| <= η <= 2|cos(Δ/2)| com Δ = θ_OA - θ_B quando |Δ| <= π/2;
    fora dessa janela os dois ramos trocam de papel.
    """
    _require_angle(theta_oa, "θ_OA")
    _require_angle(theta_b, "θ_B")
    half = (theta_oa - theta_b) / 2
    s, c = abs(np.sin(half)), abs(np.cos(half))
    return float(2 * min(s, c)), float(2 * max(s, c))


def disturbance_closed_form(theta_oa: float, theta_b: float, branch: str = OPTIMAL) -> float:
    """η do ramo: η² = 2 ∓ 2|cos(θ_B - θ_OA)|"""
    low, high = disturbance_bounds_closed_form(theta_oa, theta_b)
    if branch == OPTIMAL:
        return low
    if branch == ANTI_OPTIMAL:
        return high
    raise RangeError(f"Ramo desconhecido: {branch!r}")


def _angle_grid(stop: float, step: float, endpoint: bool) -> np.ndarray:
    if step <= 0 or not np.isfinite(step):
        raise RangeError(f"Passo da grade deve ser positivo, recebido {step}")
    intervals = max(int(np.ceil(stop / step - 1e-9)), 1)
    if endpoint:
        return np.linspace(0.0, stop, intervals + 1)
    return np.arange(intervals) * (stop / intervals)


def optimize_correction(theta_oa: float, b: AxisObservable, state: QubitState,
                        grid_step: float) -> CorrectionSurface:
    """
    Busca exaustiva de η(B) sobre alvos (ϑ, φ) da correção

    ϑ percorre [0, π] com os extremos incluídos, φ percorre [0, 2π).
    """
    oa = AxisObservable(theta_oa)
    varthetas = _angle_grid(np.pi, grid_step, endpoint=True)
    phis = _angle_grid(2 * np.pi, grid_step, endpoint=False)

    surface = []
    best_min = best_max = None
    for vartheta in varthetas:
        for phi in phis:
            target = CorrectionTarget(vartheta, phi)
            eta = float(np.sqrt(disturbance_sq(corrected_apparatus(oa, target), b, state)))
            surface.append((float(vartheta), float(phi), eta))
            if best_min is None or eta < best_min[1]:
                best_min = (target, eta)
            if best_max is None or eta > best_max[1]:
                best_max = (target, eta)

    logger.debug(f"Superfície de correção: {len(surface)} pontos, "
                 f"η mín {best_min[1]:.6f} em ({best_min[0].vartheta:.4f}, {best_min[0].phi:.4f}), "
                 f"η máx {best_max[1]:.6f}")
    return CorrectionSurface(min_point=best_min, max_point=best_max, surface=surface)


def bound_c(a: AxisObservable, b: AxisObservable, state: QubitState) -> float:
    """C'_AB = ½|Tr([A,B]ρ)| (igual a C_AB para estados puros)"""
    comm = qc.commutator(a.matrix, b.matrix)
    return float(0.5 * abs(np.trace(comm @ state.rho)))


def bound_d(a: AxisObservable, b: AxisObservable, state: QubitState) -> float:
    """D_AB = ½ Tr|√ρ [A,B] √ρ|"""
    root = qc.psd_sqrt(state.rho)
    return 0.5 * qc.trace_abs(root @ qc.commutator(a.matrix, b.matrix) @ root)


def bounds(a: AxisObservable, b: AxisObservable, state: QubitState) -> BoundSet:
    """
    Os três limites para o estado

    C_AB é avaliado no estado puro com a mesma direção de Bloch; para o estado
    totalmente misturado (sem direção) vale C'_AB.
    """
    c_prime = bound_c(a, b, state)
    alpha = state.alpha
    if alpha > 1e-12 and not state.is_pure:
        c_ab = bound_c(a, b, QubitState.from_bloch(state.bloch / alpha))
    else:
        c_ab = c_prime
    return BoundSet(c_ab=c_ab, c_prime_ab=c_prime, d_ab=bound_d(a, b, state))


def _spreads(a: AxisObservable, b: AxisObservable, state: QubitState) -> Tuple[float, float]:
    return float(np.sqrt(variance(a, state))), float(np.sqrt(variance(b, state)))


def check_ozawa(point: EdurPoint, a: AxisObservable, b: AxisObservable,
                state: QubitState) -> InequalityCheck:
    """εη + εΔB + ηΔA >= C'_AB"""
    delta_a, delta_b = _spreads(a, b, state)
    eps, eta = point.error, point.disturbance
    lhs = eps * eta + eps * delta_b + eta * delta_a
    rhs = bound_c(a, b, state)
    return InequalityCheck(lhs, rhs, lhs >= rhs - INEQUALITY_TOL, lhs - rhs)


def check_branciard(point: EdurPoint, a: AxisObservable, b: AxisObservable,
                    state: QubitState, bound: float) -> InequalityCheck:
    """
    ε²ΔB² + η²ΔA² + 2εη sqrt(ΔA²ΔB² - C²) >= C²

    Raises:
        DomainError: radicando menor que -1e-12
    """
    var_a, var_b = variance(a, state), variance(b, state)
    radicand = var_a * var_b - bound ** 2
    if radicand < -RADICAND_TOL:
        raise DomainError(f"Radicando negativo na desigualdade de Branciard: {radicand:.3e}")
    eps, eta = point.error, point.disturbance
    lhs = (eps ** 2) * var_b + (eta ** 2) * var_a + 2 * eps * eta * np.sqrt(max(radicand, 0.0))
    rhs = bound ** 2
    return InequalityCheck(float(lhs), float(rhs), lhs >= rhs - INEQUALITY_TOL, float(lhs - rhs))


def check_tight_qubit(point: EdurPoint) -> TightCheck:
    """(ε² - 2)² + (η² - 2)² <= 4, saturada pelos pontos com correção ótima"""
    lhs = (point.error_sq - 2) ** 2 + (point.disturbance_sq - 2) ** 2
    return TightCheck(float(lhs), lhs <= 4 + TIGHT_TOL, float(lhs - 4))
