#!/usr/bin/env python3
"""
Acceptance Audit - Verificação completa das propriedades do simulador

Executa as verificações de aceitação (saturação da relação justa, pontos de
referência, limites, independência da mistura, equivalência do método dos
três estados, canal não seletivo do aparato, superfície de correção, canal de
mistura, modo estatístico e desigualdades) e produz um relatório com o resíduo de cada uma.
"""

import concurrent.futures
import logging
from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np

from edur_metrics import (
    EdurPoint,
    bound_c,
    bound_d,
    check_branciard,
    check_ozawa,
    check_tight_qubit,
    disturbance_bounds_closed_form,
    error_disturbance,
    optimize_correction,
)
from measurement import (
    ANTI_OPTIMAL,
    BRANCHES,
    OPTIMAL,
    OUTCOMES,
    apparatus_for_branch,
    correction_unitary,
)
from polarimeter import (
    A_CONDITIONED,
    EXACT,
    POISSON,
    ThreeStateRun,
    expectations_from_counts,
    mixing_channel,
    NoisyRotationSpec,
    run_three_state,
    solve_sigma_for_alpha,
    three_state_reconstruct,
)
from states import AxisObservable, QubitState, fidelity, rho_x

STANDARD_ALPHAS = (1.0, 0.75, 0.5, 0.25, 0.0)
STANDARD_THETA_B = (np.pi / 2, np.pi / 3, np.pi / 6)
STANDARD_STEP = np.pi / 18

A = AxisObservable(0.0)
B_STANDARD = AxisObservable(np.pi / 2)
_SPIN_UP = QubitState.from_bloch((0.0, 0.0, 1.0))

Reconstructor = Callable[[ThreeStateRun], EdurPoint]


@dataclass(frozen=True)
class CheckResult:
    """Linha do relatório de auditoria"""
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""


def flipped_conditioned_sign_reconstruct(run: ThreeStateRun) -> EdurPoint:
    """Reconstrução com o sinal do termo do estado condicionado invertido (teste de mutação)"""
    point = three_state_reconstruct(run)
    cond = expectations_from_counts(run.tables[A_CONDITIONED])[0]
    return EdurPoint.from_squares(point.error_sq + 8 * run.prefactor_a * cond, point.disturbance_sq,
                                  theta_oa=point.theta_oa, theta_b=point.theta_b, alpha=point.alpha)


def theta_grid(step: float = STANDARD_STEP) -> np.ndarray:
    intervals = int(round(np.pi / step))
    return np.linspace(0.0, np.pi, intervals + 1)


class AcceptanceAudit:
    """Executa as verificações de aceitação e acumula o relatório"""

    def __init__(self, reconstruct: Reconstructor = three_state_reconstruct, seed: int = 0,
                 max_workers: int = 4, statistical_trials: int = 200, mean_counts: float = 1e4,
                 surface_step: float = np.pi / 72):
        self.logger = logging.getLogger(__name__)
        self.reconstruct = reconstruct
        self.seed = seed
        self.max_workers = max_workers
        self.statistical_trials = statistical_trials
        self.mean_counts = mean_counts
        self.surface_step = surface_step
        self.results: List[CheckResult] = []

    def _record(self, name: str, residual: float, tolerance: float, passed: bool, detail: str = ""):
        result = CheckResult(name, bool(passed), float(residual), float(tolerance), detail)
        self.results.append(result)
        if result.passed:
            self.logger.info(f"✅ {name}: resíduo {residual:.3e} (tolerância {tolerance:.1e})")
        else:
            self.logger.error(f"❌ {name}: resíduo {residual:.3e} (tolerância {tolerance:.1e}) {detail}")

    def _points(self, theta_bs: Sequence[float], branches: Sequence[str]):
        """Todas as combinações (θ_OA, θ_B, α, ramo) da grade padrão"""
        return [(theta_oa, theta_b, alpha, branch)
                for theta_b in theta_bs
                for alpha in STANDARD_ALPHAS
                for branch in branches
                for theta_oa in theta_grid()]

    def _direct(self, theta_oa: float, theta_b: float, alpha: float, branch: str) -> EdurPoint:
        b = AxisObservable(theta_b)
        app = apparatus_for_branch(AxisObservable(theta_oa), b, branch)
        return error_disturbance(app, A, b, rho_x(alpha))

    def check_saturation(self):
        worst = 0.0
        for theta_oa, theta_b, alpha, branch in self._points((np.pi / 2,), (OPTIMAL,)):
            worst = max(worst, abs(check_tight_qubit(self._direct(theta_oa, theta_b, alpha, branch)).residual))
        self._record("saturação da relação justa", worst, 1e-9, worst <= 1e-9)

    def check_anchor_points(self):
        residuals = []
        start = self._direct(0.0, np.pi / 2, 1.0, OPTIMAL)
        residuals += [abs(start.error), abs(start.disturbance - np.sqrt(2))]
        residuals.append(abs(self._direct(np.pi / 2, np.pi / 2, 1.0, OPTIMAL).disturbance))
        residuals.append(abs(self._direct(np.pi / 2, np.pi / 2, 1.0, ANTI_OPTIMAL).disturbance - 2))
        residuals.append(abs(self._direct(np.pi, np.pi / 2, 1.0, OPTIMAL).error - 2))
        worst = max(residuals)
        self._record("pontos de referência", worst, 1e-9, worst <= 1e-9)

    def check_bounds(self):
        residuals = []
        for alpha in STANDARD_ALPHAS:
            state = rho_x(alpha)
            residuals.append(abs(bound_d(A, B_STANDARD, state) - 1.0))
            residuals.append(abs(bound_c(A, B_STANDARD, state) - alpha))
            for theta_b in STANDARD_THETA_B[1:]:
                residuals.append(abs(bound_d(A, AxisObservable(theta_b), state) - np.sin(theta_b)))
        worst = max(residuals)
        self._record("limites C'_AB e D_AB", worst, 1e-12, worst <= 1e-12)

    def check_mixture_independence(self):
        worst = 0.0
        for theta_oa in theta_grid():
            for branch in BRANCHES:
                reference = self._direct(theta_oa, np.pi / 2, 1.0, branch)
                for alpha in STANDARD_ALPHAS[1:]:
                    point = self._direct(theta_oa, np.pi / 2, alpha, branch)
                    worst = max(worst, abs(point.error - reference.error),
                                abs(point.disturbance - reference.disturbance))
        self._record("independência da mistura", worst, 1e-9, worst <= 1e-9)

    def _channel_residual(self, task) -> float:
        theta_oa, theta_b, alpha, branch = task
        oa = AxisObservable(theta_oa)
        app = apparatus_for_branch(oa, AxisObservable(theta_b), branch)
        state = rho_x(alpha)
        channel = app.apply(state).rho
        mixture = np.zeros((2, 2), dtype=complex)
        factored = []
        u_corr = correction_unitary(oa, app.target)
        for m in OUTCOMES:
            prob, post = app.post_measurement(state, m)
            if post is not None:
                mixture += prob * post.rho
            # M_m = U_corr |m_OA⟩⟨m_OA|
            factored.append(float(np.max(np.abs(app.operator(m) - u_corr @ oa.projector(m)))))
        return max(abs(float(np.trace(channel).real) - 1.0),
                   float(np.max(np.abs(channel - mixture))), *factored)

    def check_channel(self):
        """Canal não seletivo: traço 1, mistura dos pós-medição e fatoração pela correção"""
        tasks = self._points(STANDARD_THETA_B, BRANCHES)
        worst = max(self._channel_residual(task) for task in tasks)
        self._record("canal não seletivo do aparato", worst, 1e-10, worst <= 1e-10)

    def _oracle_residual(self, task) -> float:
        theta_oa, theta_b, alpha, branch = task
        b = AxisObservable(theta_b)
        app = apparatus_for_branch(AxisObservable(theta_oa), b, branch)
        state = rho_x(alpha)
        direct = error_disturbance(app, A, b, state)
        rebuilt = self.reconstruct(run_three_state(app, A, b, state, mode=EXACT))
        return max(abs(direct.error_sq - rebuilt.error_sq),
                   abs(direct.disturbance_sq - rebuilt.disturbance_sq))

    def check_oracle_equivalence(self):
        tasks = self._points(STANDARD_THETA_B, BRANCHES)
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            residuals = list(executor.map(self._oracle_residual, tasks))
        worst = max(residuals)
        self._record("equivalência do método dos três estados", worst, 1e-9, worst <= 1e-9,
                     f"{len(tasks)} pontos")

    def check_correction_surface(self):
        theta_oa = 5 * np.pi / 18
        result = optimize_correction(theta_oa, B_STANDARD, rho_x(1.0), self.surface_step)
        low, high = disturbance_bounds_closed_form(theta_oa, np.pi / 2)
        value_residual = max(abs(result.min_point[1] - low), abs(result.max_point[1] - high))

        eigenstates = [QubitState.pure(B_STANDARD.eigenstate(s)) for s in (1, -1)]
        fidelities = []
        for target, _ in (result.min_point, result.max_point):
            output = QubitState.pure(target.output_state(1))
            fidelities.append(max(fidelity(output, eig) for eig in eigenstates))
        passed = value_residual <= 5e-3 and min(fidelities) >= 0.999
        self._record("superfície de correção", value_residual, 5e-3, passed,
                     f"argmin ({result.min_point[0].vartheta:.4f}, {result.min_point[0].phi:.4f}), "
                     f"fidelidade mínima {min(fidelities):.6f}")

    def check_mixing_channel(self):
        residuals = []
        for alpha in STANDARD_ALPHAS:
            sigma = solve_sigma_for_alpha(alpha)
            length = mixing_channel(NoisyRotationSpec(noise_sigma=sigma), _SPIN_UP).alpha
            residuals.append(abs(length - alpha))
            residuals.append(abs(np.exp(-sigma ** 2 / 2) - alpha))
        worst = max(residuals)
        self._record("canal de mistura", worst, 1e-6, worst <= 1e-6)

    def check_statistics(self):
        theta_oa, alpha = 5 * np.pi / 18, 0.5
        app = apparatus_for_branch(AxisObservable(theta_oa), B_STANDARD, OPTIMAL)
        state = rho_x(alpha)
        exact = self.reconstruct(run_three_state(app, A, B_STANDARD, state, mode=EXACT))

        samples, propagated = [], []
        for trial in range(self.statistical_trials):
            point = self.reconstruct(run_three_state(app, A, B_STANDARD, state, mean_counts=self.mean_counts,
                                                     mode=POISSON, seed=self.seed + trial))
            samples.append(point.error_sq)
            propagated.append(point.error_sq_std)
        samples = np.asarray(samples)
        empirical_std = float(np.std(samples, ddof=1))
        standard_error = empirical_std / np.sqrt(len(samples))
        bias = abs(float(np.mean(samples)) - exact.error_sq)
        std_ratio = abs(float(np.mean(propagated)) / empirical_std - 1.0) if empirical_std > 0 else np.inf

        self._record("modo estatístico: média", bias, 3 * standard_error, bias < 3 * standard_error)
        self._record("modo estatístico: desvio propagado", std_ratio, 0.25, std_ratio <= 0.25,
                     f"empírico {empirical_std:.5f}")

    def _inequality_slacks(self, task):
        theta_oa, theta_b, alpha, branch = task
        b = AxisObservable(theta_b)
        state = rho_x(alpha)
        point = self._direct(theta_oa, theta_b, alpha, branch)
        ozawa = check_ozawa(point, A, b, state).slack
        with_d = check_branciard(point, A, b, state, bound_d(A, b, state)).slack
        with_c = check_branciard(point, A, b, state, bound_c(A, b, state)).slack
        return ozawa, with_d, with_c if (branch == OPTIMAL and alpha <= 0.5) else None

    def check_inequalities(self):
        tasks = self._points(STANDARD_THETA_B, BRANCHES)
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            slacks = list(executor.map(self._inequality_slacks, tasks))
        worst_ozawa = min(s[0] for s in slacks)
        worst_d = min(s[1] for s in slacks)
        worst_c = min(s[2] for s in slacks if s[2] is not None)
        self._record("desigualdade de Ozawa", worst_ozawa, -1e-10, worst_ozawa >= -1e-10)
        self._record("Branciard com D_AB", worst_d, -1e-10, worst_d >= -1e-10)
        self._record("Branciard com C'_AB não saturada (α <= 0.5)", worst_c, 0.01, worst_c > 0.01)

    def run(self) -> bool:
        """Executa todas as verificações; True se todas passarem"""
        self.results = []
        self.logger.info("Iniciando auditoria de aceitação")
        for check in (self.check_saturation, self.check_anchor_points, self.check_bounds,
                      self.check_mixture_independence, self.check_channel,
                      self.check_oracle_equivalence, self.check_correction_surface, self.check_mixing_channel,
                      self.check_statistics, self.check_inequalities):
            check()
        failed = [r.name for r in self.results if not r.passed]
        if failed:
            self.logger.error(f"Auditoria falhou: {len(failed)} verificações ({', '.join(failed)})")
        else:
            self.logger.info(f"Auditoria concluída: {len(self.results)} verificações aprovadas")
        return not failed
