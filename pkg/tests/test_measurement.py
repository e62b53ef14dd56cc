"""
Testes unitários para measurement (aparatos e operadores de saída)
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

# Adicionar diretório raiz ao path
sys.path.insert(0, str(Path(__file__).parent.parent))

import qubit_core as qc
from exceptions import PreconditionError
from measurement import (
    ANTI_OPTIMAL,
    OPTIMAL,
    CorrectionTarget,
    MeasurementFamily,
    apparatus_for_branch,
    apparatus_theta,
    corrected_apparatus,
    correction_unitary,
    optimal_target,
    output_operator_A,
    output_operator_B,
    projective_apparatus,
)
from states import AxisObservable, QubitState, expectation, rho_x

B_Y = AxisObservable(np.pi / 2)
angles = st.floats(min_value=0.0, max_value=2 * np.pi, allow_nan=False)
unit = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)


class TestCorrectionTarget:

    def test_canonical_ranges(self):
        target = CorrectionTarget(3 * np.pi / 2, np.pi / 2)
        assert target.vartheta == pytest.approx(np.pi / 2)
        assert target.phi == pytest.approx(3 * np.pi / 2)

    def test_negative_phi_wrapped(self):
        assert CorrectionTarget(np.pi / 2, -np.pi / 2).phi == pytest.approx(3 * np.pi / 2)

    def test_non_finite_rejected(self):
        with pytest.raises(PreconditionError):
            CorrectionTarget(np.nan, 0.0)

    def test_output_states_are_antipodal(self):
        target = CorrectionTarget(1.1, 0.4)
        plus = QubitState.pure(target.output_state(1))
        minus = QubitState.pure(target.output_state(-1))
        assert np.allclose(plus.bloch, target.direction, atol=1e-12)
        assert np.allclose(minus.bloch, -target.direction, atol=1e-12)

    def test_from_direction(self):
        target = CorrectionTarget.from_direction((0, -1, 0))
        assert target.vartheta == pytest.approx(np.pi / 2)
        assert target.phi == pytest.approx(3 * np.pi / 2)


class TestMeasurementFamily:

    def test_incomplete_family_rejected(self):
        with pytest.raises(PreconditionError):
            MeasurementFamily(((1, qc.IDENTITY), (-1, qc.IDENTITY)))

    def test_wrong_labels_rejected(self):
        with pytest.raises(PreconditionError):
            MeasurementFamily(((1, qc.IDENTITY), (0, np.zeros((2, 2)))))

    def test_post_measurement_zero_probability(self):
        app = projective_apparatus(AxisObservable(0.0))
        prob, state = app.post_measurement(QubitState.from_bloch((0, 0, 1)), -1)
        assert prob == 0.0
        assert state is None

    def test_post_measurement_state(self):
        app = projective_apparatus(AxisObservable(0.0))
        prob, state = app.post_measurement(rho_x(1.0), 1)
        assert prob == pytest.approx(0.5)
        assert state == QubitState.from_bloch((0, 0, 1))


class TestProjectiveApparatus:

    def test_theta_zero(self):
        app = projective_apparatus(AxisObservable(0.0))
        assert np.allclose(app.operator(1), np.diag([1, 0]))
        assert np.allclose(app.operator(-1), np.diag([0, 1]))

    def test_completeness(self):
        app = projective_apparatus(AxisObservable(0.7))
        total = sum(p for p in app.povm().values())
        assert np.allclose(total, qc.IDENTITY, atol=1e-12)

    def test_theta_half_pi_projects_on_sigma_y(self):
        app = projective_apparatus(B_Y)
        for m in (1, -1):
            assert np.allclose(app.operator(m), 0.5 * (qc.IDENTITY + m * qc.SIGMA_Y), atol=1e-12)


class TestCorrectedApparatus:

    def test_own_eigenbasis_reduces_to_projective(self):
        """Mesmo canal, mesma POVM e mesmo O_B que a medição projetiva"""
        oa = AxisObservable(5 * np.pi / 18)
        target = CorrectionTarget.from_direction(oa.direction)
        corrected, projective = corrected_apparatus(oa, target), projective_apparatus(oa)
        state = QubitState.from_bloch((0.3, -0.2, 0.5))
        assert corrected.apply(state) == projective.apply(state)
        for m in (1, -1):
            assert np.allclose(corrected.povm()[m], projective.povm()[m], atol=1e-12)
        assert np.allclose(output_operator_B(corrected, B_Y), output_operator_B(projective, B_Y), atol=1e-12)
        assert np.allclose(correction_unitary(oa, target) @ qc.dagger(correction_unitary(oa, target)),
                           qc.IDENTITY, atol=1e-12)

    @seed(7)
    @settings(max_examples=300, deadline=None)
    @given(theta=angles, vartheta=angles, phi=angles)
    def test_povm_unchanged(self, theta, vartheta, phi):
        oa = AxisObservable(theta)
        corrected = corrected_apparatus(oa, CorrectionTarget(vartheta, phi))
        projective = projective_apparatus(oa)
        for m in (1, -1):
            assert np.allclose(corrected.povm()[m], projective.povm()[m], atol=1e-12)

    @seed(8)
    @settings(max_examples=300, deadline=None)
    @given(theta=angles, vartheta=angles, phi=angles, x=unit, y=unit, z=unit)
    def test_channel_is_trace_preserving(self, theta, vartheta, phi, x, y, z):
        r = np.array([x, y, z])
        if np.linalg.norm(r) > 1:
            r = r / np.linalg.norm(r)
        app = corrected_apparatus(AxisObservable(theta), CorrectionTarget(vartheta, phi))
        out = app.apply(QubitState.from_bloch(r))
        assert np.trace(out.rho).real == pytest.approx(1.0, abs=1e-12)

    def test_post_measurement_states_are_sigma_y_eigenstates(self):
        app = corrected_apparatus(AxisObservable(5 * np.pi / 18), CorrectionTarget(np.pi / 2, 3 * np.pi / 2))
        for m in (1, -1):
            _, state = app.post_measurement(rho_x(1.0), m)
            assert state.is_pure
            assert abs(expectation(qc.SIGMA_Y, state)) == pytest.approx(1.0, abs=1e-12)

    def test_correction_unitary_is_unitary(self):
        u = correction_unitary(AxisObservable(1.2), CorrectionTarget(0.4, 2.0))
        assert np.allclose(u @ qc.dagger(u), qc.IDENTITY, atol=1e-12)


class TestOutputOperators:

    def test_projective_theta_zero(self):
        assert np.allclose(output_operator_A(projective_apparatus(AxisObservable(0.0)), 1), qc.SIGMA_Z)

    def test_projective_theta_half_pi(self):
        assert np.allclose(output_operator_A(projective_apparatus(B_Y), 1), qc.SIGMA_Y, atol=1e-12)

    @pytest.mark.parametrize('power', [1, 2])
    def test_invalid_power(self, power):
        with pytest.raises(PreconditionError):
            output_operator_A(projective_apparatus(B_Y), power + 2)

    def test_second_moments_are_identity(self):
        app = corrected_apparatus(AxisObservable(0.9), CorrectionTarget(2.1, 4.0))
        assert np.allclose(output_operator_A(app, 2), qc.IDENTITY, atol=1e-12)
        assert np.allclose(output_operator_B(app, AxisObservable(1.3), 2), qc.IDENTITY, atol=1e-12)

    @pytest.mark.parametrize('theta', [0.0, np.pi / 6, 5 * np.pi / 18, np.pi / 2, np.pi])
    def test_uncorrected_disturbance_operator(self, theta):
        oa = AxisObservable(theta)
        app = projective_apparatus(oa)
        assert np.allclose(output_operator_B(app, B_Y, 1), np.sin(theta) * oa.matrix, atol=1e-12)

    def test_b_equal_to_oa_is_undisturbed(self):
        oa = AxisObservable(0.8)
        assert np.allclose(output_operator_B(projective_apparatus(oa), oa, 1), oa.matrix, atol=1e-12)

    @pytest.mark.parametrize('theta_oa', np.linspace(0, np.pi, 7))
    @pytest.mark.parametrize('alpha', [1.0, 0.5, 0.0])
    def test_optimal_correction_disturbance_term(self, theta_oa, alpha):
        """Re⟨B O_B⟩ = |cos(θ_B - θ_OA)| no ramo ótimo"""
        oa = AxisObservable(theta_oa)
        app = apparatus_for_branch(oa, B_Y, OPTIMAL)
        o_b = output_operator_B(app, B_Y, 1)
        value = np.trace(rho_x(alpha).rho @ B_Y.matrix @ o_b).real
        assert value == pytest.approx(abs(np.cos(np.pi / 2 - theta_oa)), abs=1e-12)

    def test_apparatus_theta(self):
        assert apparatus_theta(projective_apparatus(AxisObservable(5 * np.pi / 18))) == pytest.approx(5 * np.pi / 18)
        assert apparatus_theta(projective_apparatus(AxisObservable(0.0))) == 0.0


class TestBranches:

    def test_optimal_target_is_b_eigenstate(self):
        target = optimal_target(AxisObservable(5 * np.pi / 18), B_Y, OPTIMAL)
        assert np.allclose(target.direction, B_Y.direction, atol=1e-12)

    def test_anti_optimal_is_opposite(self):
        target = optimal_target(AxisObservable(5 * np.pi / 18), B_Y, ANTI_OPTIMAL)
        assert np.allclose(target.direction, -B_Y.direction, atol=1e-12)

    def test_sign_follows_cosine(self):
        target = optimal_target(AxisObservable(0.0), AxisObservable(3 * np.pi / 4), OPTIMAL)
        assert np.allclose(target.direction, -AxisObservable(3 * np.pi / 4).direction, atol=1e-12)

    def test_unknown_branch(self):
        with pytest.raises(PreconditionError):
            optimal_target(AxisObservable(0.0), B_Y, 'best')

    def test_none_is_projective(self):
        app = apparatus_for_branch(AxisObservable(0.3), B_Y, None)
        assert app.target is None
        assert apparatus_for_branch(AxisObservable(0.3), B_Y, 'none').target is None

    def test_explicit_target(self):
        target = CorrectionTarget(0.5, 1.0)
        assert apparatus_for_branch(AxisObservable(0.3), B_Y, target).target == target
