#!/usr/bin/env python3
"""
Qubit Core - Álgebra linear exata para matrizes complexas 2x2

Base de Pauli, rotações, decomposição espectral hermitiana em forma fechada,
raiz quadrada de matrizes positivas e norma traço. Todas as funções são puras
e operam sobre arrays numpy de forma (2, 2) e dtype complexo.
"""

from typing import Sequence, Tuple

import numpy as np

from exceptions import NotPSDError, PreconditionError

# Tipo de trabalho: array numpy (2, 2) complex128
ComplexMatrix2 = np.ndarray

HERMITIAN_TOL = 1e-12
DEGENERATE_TOL = 1e-14
PSD_TOL = 1e-12

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_PAULI = {
    'identity': IDENTITY,
    'x': SIGMA_X,
    'y': SIGMA_Y,
    'z': SIGMA_Z,
}

for _m in _PAULI.values():
    _m.setflags(write=False)


def as_matrix(m) -> ComplexMatrix2:
    """Converte para array complexo 2x2 finito"""
    arr = np.asarray(m, dtype=complex)
    if arr.shape != (2, 2):
        raise PreconditionError(f"Esperada matriz 2x2, recebido shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError("Matriz contém NaN ou Inf")
    return arr


def pauli(axis: str) -> ComplexMatrix2:
    """Retorna a matriz de Pauli do eixo ('x', 'y', 'z') ou a identidade"""
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise PreconditionError(f"Eixo de Pauli desconhecido: {axis!r}") from None


def dagger(m: ComplexMatrix2) -> ComplexMatrix2:
    return np.conj(np.transpose(m))


def commutator(a: ComplexMatrix2, b: ComplexMatrix2) -> ComplexMatrix2:
    return a @ b - b @ a


def anticommutator(a: ComplexMatrix2, b: ComplexMatrix2) -> ComplexMatrix2:
    return a @ b + b @ a


def is_hermitian(m: ComplexMatrix2, tol: float = HERMITIAN_TOL) -> bool:
    """Verifica |M - M†|_max <= tol"""
    return bool(np.max(np.abs(m - dagger(m))) <= tol)


def require_hermitian(m, name: str = "matriz") -> ComplexMatrix2:
    arr = as_matrix(m)
    if not is_hermitian(arr):
        deviation = float(np.max(np.abs(arr - dagger(arr))))
        raise PreconditionError(f"{name} não é hermitiana (desvio {deviation:.3e})")
    return arr


def rotation(axis: Sequence[float], angle: float) -> ComplexMatrix2:
    """
    Rotação de spin exp(-i angle n·σ/2) em torno do eixo n

    Args:
        axis: vetor 3D (normalizado internamente)
        angle: ângulo em radianos

    Returns:
        Matriz unitária 2x2
    """
    if not np.isfinite(angle):
        raise PreconditionError(f"Ângulo de rotação inválido: {angle}")
    n = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(n)
    if n.shape != (3,) or norm == 0 or not np.isfinite(norm):
        raise PreconditionError(f"Eixo de rotação inválido: {axis}")
    n = n / norm
    generator = n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z
    return np.cos(angle / 2) * IDENTITY - 1j * np.sin(angle / 2) * generator


def rotation_about_x(angle: float) -> ComplexMatrix2:
    """Precessão de Larmor em torno de x: exp(-i angle σx/2)"""
    return rotation((1.0, 0.0, 0.0), angle)


def rotation_about_z(angle: float) -> ComplexMatrix2:
    return rotation((0.0, 0.0, 1.0), angle)


def hermitian_eig(m) -> Tuple[np.ndarray, np.ndarray]:
    """
    Decomposição espectral de uma matriz hermitiana 2x2 em forma fechada

    Usa o discriminante traço/determinante. Autovalores em ordem decrescente;
    autovetores ortonormais nas colunas do segundo retorno. Para autovalores
    degenerados (discriminante < 1e-14) devolve a base canônica.

    Returns:
        (autovalores shape (2,), autovetores shape (2, 2) por coluna)
    """
    arr = require_hermitian(m)
    a = arr[0, 0].real
    d = arr[1, 1].real
    b = arr[0, 1]

    mean = (a + d) / 2
    disc = float(np.hypot((a - d) / 2, abs(b)))
    eigenvalues = np.array([mean + disc, mean - disc])

    if disc < DEGENERATE_TOL:
        return eigenvalues, np.eye(2, dtype=complex)

    top = eigenvalues[0]
    # escolhe a linha com maior pivô para não anular o vetor
    if a >= d:
        v1 = np.array([top - d, np.conj(b)], dtype=complex)
    else:
        v1 = np.array([b, top - a], dtype=complex)
    v1 /= np.linalg.norm(v1)
    v2 = np.array([-np.conj(v1[1]), np.conj(v1[0])], dtype=complex)

    return eigenvalues, np.column_stack([v1, v2])


def psd_sqrt(m) -> ComplexMatrix2:
    """
    Raiz quadrada positiva de uma matriz hermitiana semidefinida positiva

    Autovalores em (-1e-12, 0) são truncados para zero.

    Raises:
        NotPSDError: autovalor menor que -1e-12
    """
    eigenvalues, vectors = hermitian_eig(m)
    if eigenvalues[-1] < -PSD_TOL:
        raise NotPSDError(f"Matriz não é semidefinida positiva (autovalor {eigenvalues[-1]:.3e})")
    roots = np.sqrt(np.clip(eigenvalues, 0.0, None))
    return (vectors * roots) @ dagger(vectors)


def trace_abs(m) -> float:
    """
    Norma traço Tr|X| = Tr sqrt(X†X), soma dos valores singulares

    Para 2x2: (s1 + s2)^2 = ||X||_F^2 + 2|det X|.
    """
    arr = as_matrix(m)
    frobenius_sq = float(np.sum(np.abs(arr) ** 2))
    det = abs(arr[0, 0] * arr[1, 1] - arr[0, 1] * arr[1, 0])
    return float(np.sqrt(frobenius_sq + 2 * det))


def bloch_vector(m: ComplexMatrix2) -> np.ndarray:
    """Componentes r_i = Tr(σ_i m) (parte real)"""
    return np.array([np.trace(SIGMA_X @ m).real,
                     np.trace(SIGMA_Y @ m).real,
                     np.trace(SIGMA_Z @ m).real])


def from_bloch(r: Sequence[float]) -> ComplexMatrix2:
    """Matriz ½(𝟙 + r·σ)"""
    x, y, z = (float(c) for c in r)
    return 0.5 * (IDENTITY + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)


def apply_unitary_to_bloch(u: ComplexMatrix2, r: Sequence[float]) -> np.ndarray:
    """Vetor de Bloch de U ρ U† com ρ = ½(𝟙 + r·σ)"""
    rho = from_bloch(r)
    return bloch_vector(u @ rho @ dagger(u))
