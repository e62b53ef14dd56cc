#!/usr/bin/env python3
"""
Measurement - Modelos de aparato para a medição sucessiva

O aparato M1 faz a medição projetiva de O_A seguida de uma unitária de
correção U_corr, descrita pela sua ação: o resultado +1 sai no estado
|ψ(ϑ,φ)⟩ e o resultado -1 no estado antipodal |ψ(π-ϑ, φ+π)⟩. A POVM não
depende da correção.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np

import qubit_core as qc
from exceptions import PreconditionError
from states import AxisObservable, QubitState, spin_state, TWO_PI

logger = logging.getLogger(__name__)

COMPLETENESS_TOL = 1e-10
OUTCOMES = (1, -1)

OPTIMAL = 'optimal'
ANTI_OPTIMAL = 'anti-optimal'
UNCORRECTED = 'none'
BRANCHES = (OPTIMAL, ANTI_OPTIMAL)


@dataclass(frozen=True)
class CorrectionTarget:
    """
    Estado de saída |ψ(ϑ,φ)⟩ do resultado +1 após a correção

    Ângulos canônicos: ϑ em [0, π], φ em [0, 2π).
    """
    vartheta: float
    phi: float

    def __post_init__(self):
        if not (np.isfinite(self.vartheta) and np.isfinite(self.phi)):
            raise PreconditionError(f"Alvo de correção inválido: ({self.vartheta}, {self.phi})")
        vartheta = float(self.vartheta) % TWO_PI
        phi = float(self.phi)
        if vartheta > np.pi:
            vartheta = TWO_PI - vartheta
            phi += np.pi
        phi %= TWO_PI
        if np.isclose(phi, TWO_PI, rtol=0.0, atol=1e-15):
            phi = 0.0
        object.__setattr__(self, 'vartheta', vartheta)
        object.__setattr__(self, 'phi', phi)

    @classmethod
    def from_direction(cls, direction) -> 'CorrectionTarget':
        """Alvo cujo vetor de Bloch aponta na direção dada"""
        x, y, z = np.asarray(direction, dtype=float) / np.linalg.norm(direction)
        return cls(float(np.arccos(np.clip(z, -1.0, 1.0))), float(np.arctan2(y, x)))

    def output_state(self, sign: int) -> np.ndarray:
        """Estado de saída do resultado sign"""
        if sign == 1:
            return spin_state(self.vartheta, self.phi)
        if sign == -1:
            return spin_state(np.pi - self.vartheta, self.phi + np.pi)
        raise PreconditionError(f"Resultado deve ser ±1, recebido {sign}")

    @property
    def direction(self) -> np.ndarray:
        return np.array([np.sin(self.vartheta) * np.cos(self.phi),
                         np.sin(self.vartheta) * np.sin(self.phi),
                         np.cos(self.vartheta)])


@dataclass(frozen=True)
class MeasurementFamily:
    """
    Família de operadores de medição {M_m} com rótulos m em {+1, -1}

    Completude Σ M_m† M_m = 𝟙 verificada na construção (tolerância 1e-10).
    """
    outcomes: Tuple[Tuple[int, np.ndarray], ...]
    target: Optional[CorrectionTarget] = field(default=None, compare=False)

    def __post_init__(self):
        labels = [label for label, _ in self.outcomes]
        if sorted(labels) != sorted(OUTCOMES):
            raise PreconditionError(f"Rótulos devem ser exatamente {{+1, -1}}, recebido {labels}")
        frozen = []
        for label, operator in self.outcomes:
            op = np.array(qc.as_matrix(operator))
            op.setflags(write=False)
            frozen.append((int(label), op))
        total = sum(qc.dagger(op) @ op for _, op in frozen)
        deviation = float(np.max(np.abs(total - qc.IDENTITY)))
        if deviation > COMPLETENESS_TOL:
            raise PreconditionError(f"Família incompleta: |Σ M†M - 𝟙| = {deviation:.3e}")
        object.__setattr__(self, 'outcomes', tuple(frozen))

    def operator(self, m: int) -> np.ndarray:
        for label, op in self.outcomes:
            if label == m:
                return op
        raise PreconditionError(f"Resultado inexistente: {m}")

    def povm(self) -> Dict[int, np.ndarray]:
        """Elementos P_m = M_m† M_m"""
        return {label: qc.dagger(op) @ op for label, op in self.outcomes}

    def probability(self, state: QubitState, m: int) -> float:
        op = self.operator(m)
        return float(np.trace(op @ state.rho @ qc.dagger(op)).real)

    def post_measurement(self, state: QubitState, m: int) -> Tuple[float, Optional[QubitState]]:
        """(p(m), M_m ρ M_m† / p(m)); estado None quando p(m) = 0"""
        op = self.operator(m)
        unnormalized = op @ state.rho @ qc.dagger(op)
        prob = float(np.trace(unnormalized).real)
        if prob <= 1e-15:
            return 0.0, None
        return prob, QubitState(unnormalized / prob)

    def apply(self, state: QubitState) -> QubitState:
        """Canal não seletivo Σ M_m ρ M_m†"""
        return QubitState(sum(op @ state.rho @ qc.dagger(op) for _, op in self.outcomes))


def projective_apparatus(oa: AxisObservable) -> MeasurementFamily:
    """Medição projetiva de O_A: M_m = |m_OA⟩⟨m_OA|"""
    return MeasurementFamily(tuple((m, oa.projector(m)) for m in OUTCOMES))


def corrected_apparatus(oa: AxisObservable, target: CorrectionTarget) -> MeasurementFamily:
    """
    Medição de O_A seguida da correção: M_m = |saída_m⟩⟨m_OA|

    A POVM permanece |m_OA⟩⟨m_OA|.
    """
    outcomes = []
    for m in OUTCOMES:
        out = target.output_state(m)
        outcomes.append((m, np.outer(out, np.conj(oa.eigenstate(m)))))
    return MeasurementFamily(tuple(outcomes), target=target)


def correction_unitary(oa: AxisObservable, target: CorrectionTarget) -> np.ndarray:
    """U_corr = |ψ⟩⟨+_OA| + |-ψ⟩⟨-_OA|"""
    return sum(np.outer(target.output_state(m), np.conj(oa.eigenstate(m))) for m in OUTCOMES)


def output_operator_A(app: MeasurementFamily, power: int = 1) -> np.ndarray:
    """O_A^(k) = Σ_m m^k P_m"""
    if power not in (1, 2):
        raise PreconditionError(f"Potência deve ser 1 ou 2, recebido {power}")
    return sum((m ** power) * p for m, p in app.povm().items())


def output_operator_B(app: MeasurementFamily, b: AxisObservable, power: int = 1) -> np.ndarray:
    """O_B^(k) = Σ_m M_m† B^k M_m"""
    if power not in (1, 2):
        raise PreconditionError(f"Potência deve ser 1 ou 2, recebido {power}")
    b_k = np.linalg.matrix_power(b.matrix, power)
    return sum(qc.dagger(op) @ b_k @ op for _, op in app.outcomes)


def apparatus_theta(app: MeasurementFamily) -> float:
    """Ângulo polar de O_A^(1) no plano z-y"""
    o_a = output_operator_A(app, 1)
    theta = float(np.arctan2(np.trace(qc.SIGMA_Y @ o_a).real, np.trace(qc.SIGMA_Z @ o_a).real) % TWO_PI)
    return 0.0 if theta > TWO_PI - 1e-12 else theta


def optimal_target(oa: AxisObservable, b: AxisObservable, branch: str = OPTIMAL) -> CorrectionTarget:
    """
    Alvo de correção que minimiza (optimal) ou maximiza (anti-optimal) η(B)

    O resultado +1 é levado ao autoestado de B de sinal s·sign(cos(θ_B - θ_OA)),
    com s = +1 no ramo ótimo e -1 no anti-ótimo.
    """
    if branch not in BRANCHES:
        raise PreconditionError(f"Ramo desconhecido: {branch!r}")
    sign = 1 if np.cos(b.theta - oa.theta) >= 0 else -1
    if branch == ANTI_OPTIMAL:
        sign = -sign
    return CorrectionTarget.from_direction(sign * b.direction)


def apparatus_for_branch(oa: AxisObservable, b: AxisObservable,
                         correction: Union[str, CorrectionTarget, None]) -> MeasurementFamily:
    """Aparato para um ramo ('optimal', 'anti-optimal', 'none') ou alvo explícito"""
    if isinstance(correction, CorrectionTarget):
        return corrected_apparatus(oa, correction)
    if correction is None or correction == UNCORRECTED:
        return projective_apparatus(oa)
    return corrected_apparatus(oa, optimal_target(oa, b, correction))
