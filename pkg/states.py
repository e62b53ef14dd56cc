#!/usr/bin/env python3
"""
States & Observables - Matrizes densidade e observáveis de spin no plano z-y

Contém a família de estados ρ_x(α) = ½(𝟙 + ασx) usada nas medições, os
observáveis binários cos(θ)σz + sin(θ)σy (A, B e O_A), fidelidade,
polarização e variância.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

import qubit_core as qc
from exceptions import PreconditionError, RangeError

STATE_TOL = 1e-12
DET_SNAP = 1e-14
TWO_PI = 2 * np.pi


def _frozen(m: np.ndarray) -> np.ndarray:
    arr = np.array(m, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class QubitState:
    """
    Estado de um qubit dado pela matriz densidade ρ = ½(𝟙 + r·σ)

    A validade (hermitiana, traço 1, positiva) é verificada na construção;
    as demais operações assumem um estado válido.
    """
    rho: np.ndarray
    bloch: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rho = qc.require_hermitian(self.rho, "ρ")
        trace = np.trace(rho).real
        if abs(trace - 1.0) > STATE_TOL:
            raise PreconditionError(f"Traço de ρ diferente de 1: {trace!r}")
        eigenvalues, _ = qc.hermitian_eig(rho)
        if eigenvalues[-1] < -STATE_TOL:
            raise PreconditionError(f"ρ não é positiva (autovalor {eigenvalues[-1]:.3e})")
        bloch = qc.bloch_vector(rho)
        bloch.setflags(write=False)
        object.__setattr__(self, 'rho', _frozen(rho))
        object.__setattr__(self, 'bloch', bloch)

    @classmethod
    def from_bloch(cls, r: Sequence[float]) -> 'QubitState':
        r = np.asarray(r, dtype=float)
        if np.linalg.norm(r) > 1 + STATE_TOL:
            raise PreconditionError(f"Vetor de Bloch fora da esfera: |r| = {np.linalg.norm(r):.6f}")
        return cls(qc.from_bloch(r))

    @classmethod
    def pure(cls, vector: Sequence[complex]) -> 'QubitState':
        psi = np.asarray(vector, dtype=complex)
        norm = np.linalg.norm(psi)
        if psi.shape != (2,) or norm == 0:
            raise PreconditionError(f"Vetor de estado inválido: {vector}")
        psi = psi / norm
        return cls(np.outer(psi, np.conj(psi)))

    @property
    def alpha(self) -> float:
        """Comprimento do vetor de Bloch (grau de polarização)"""
        return float(np.linalg.norm(self.bloch))

    @property
    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)

    @property
    def is_pure(self) -> bool:
        return abs(self.alpha - 1.0) <= 1e-10

    def evolve(self, u: np.ndarray) -> 'QubitState':
        """U ρ U†"""
        return QubitState(u @ self.rho @ qc.dagger(u))

    def __eq__(self, other):
        if not isinstance(other, QubitState):
            return NotImplemented
        return bool(np.max(np.abs(self.rho - other.rho)) <= STATE_TOL)

    __hash__ = None


def spin_state(vartheta: float, phi: float) -> np.ndarray:
    """|ψ(ϑ,φ)⟩ = (cos(ϑ/2), e^{iφ} sin(ϑ/2))ᵀ"""
    return np.array([np.cos(vartheta / 2), np.exp(1j * phi) * np.sin(vartheta / 2)], dtype=complex)


def axis_matrix(direction: Sequence[float]) -> np.ndarray:
    """Observável n·σ para um eixo arbitrário (fora da API de varredura)"""
    n = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(n)
    if n.shape != (3,) or norm == 0:
        raise PreconditionError(f"Direção inválida: {direction}")
    n = n / norm
    return n[0] * qc.SIGMA_X + n[1] * qc.SIGMA_Y + n[2] * qc.SIGMA_Z


@dataclass(frozen=True)
class AxisObservable:
    """
    Observável binário de spin no plano z-y: cos(θ)σz + sin(θ)σy

    θ é reduzido módulo 2π na construção. θ = 0 é A = σz.
    """
    theta: float
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not np.isfinite(self.theta):
            raise PreconditionError(f"Ângulo do observável inválido: {self.theta}")
        theta = float(self.theta) % TWO_PI
        # 2π - ε arredondado para 2π
        if np.isclose(theta, TWO_PI, rtol=0.0, atol=1e-15):
            theta = 0.0
        object.__setattr__(self, 'theta', theta)
        object.__setattr__(self, 'matrix', _frozen(np.cos(theta) * qc.SIGMA_Z + np.sin(theta) * qc.SIGMA_Y))

    @property
    def direction(self) -> np.ndarray:
        """Eixo do observável na esfera de Bloch (x, y, z)"""
        return np.array([0.0, np.sin(self.theta), np.cos(self.theta)])

    def eigenstate(self, sign: int) -> np.ndarray:
        """Autovetor de autovalor sign (±1)"""
        if sign == 1:
            return spin_state(self.theta, np.pi / 2)
        if sign == -1:
            return spin_state(np.pi - self.theta, 3 * np.pi / 2)
        raise PreconditionError(f"Autovalor deve ser ±1, recebido {sign}")

    def projector(self, sign: int) -> np.ndarray:
        """P^± = ½(𝟙 ± obs)"""
        if sign not in (1, -1):
            raise PreconditionError(f"Autovalor deve ser ±1, recebido {sign}")
        return 0.5 * (qc.IDENTITY + sign * self.matrix)


def rho_x(alpha: float) -> QubitState:
    """
    Estado ρ_x(α) = ½(𝟙 + ασx)

    Raises:
        RangeError: α fora de [0, 1]
    """
    if not (0.0 <= alpha <= 1.0):
        raise RangeError(f"α deve estar em [0, 1], recebido {alpha}")
    return QubitState.from_bloch((alpha, 0.0, 0.0))


def expectation(obs, state: QubitState) -> float:
    """Tr(obs ρ) para um observável hermitiano"""
    matrix = qc.require_hermitian(obs.matrix if isinstance(obs, AxisObservable) else obs, "observável")
    value = np.trace(matrix @ state.rho)
    if abs(value.imag) > STATE_TOL:
        raise PreconditionError(f"Valor esperado com parte imaginária {value.imag:.3e}")
    return float(value.real)


def variance(obs: AxisObservable, state: QubitState) -> float:
    """⟨obs²⟩ - ⟨obs⟩², em [0, 1] para observáveis binários"""
    mean = expectation(obs.matrix, state)
    second = expectation(obs.matrix @ obs.matrix, state)
    return float(np.clip(second - mean ** 2, 0.0, 1.0))


def fidelity(rho: QubitState, sigma: QubitState) -> float:
    """
    Fidelidade F = Tr sqrt(sqrt(ρ) σ sqrt(ρ))

    Sem o quadrado; F = 1/√2 entre |+z⟩ e |+x⟩. Para qubits
    F² = Tr(ρσ) + 2 sqrt(det ρ det σ), simétrica por construção.
    """
    overlap = float(np.trace(rho.rho @ sigma.rho).real)
    return float(np.sqrt(max(overlap + 2 * np.sqrt(_det(rho) * _det(sigma)), 0.0)))


def _det(state: QubitState) -> float:
    """det ρ = (1 - |r|²)/4, zero abaixo de 1e-14 (estados puros)"""
    det = (1.0 - float(np.dot(state.bloch, state.bloch))) / 4
    return det if det >= DET_SNAP else 0.0


def conjugate(state: QubitState, obs: AxisObservable) -> QubitState:
    """Estado refletido O ρ O (AρA ou BρB)"""
    return QubitState(obs.matrix @ state.rho @ obs.matrix)


def conditioned(state: QubitState, obs: AxisObservable) -> QubitState:
    """
    Estado condicionado ρ|O = P⁺ρP⁺ / Tr(P⁺ρ)

    Para projetor de posto 1 o resultado é sempre o autoestado +1; quando
    Tr(P⁺ρ) < 1e-12 o limite é devolvido diretamente.
    """
    p_plus = obs.projector(1)
    weight = float(np.trace(p_plus @ state.rho).real)
    if weight < STATE_TOL:
        return QubitState(p_plus)
    return QubitState(p_plus @ state.rho @ p_plus / weight)
