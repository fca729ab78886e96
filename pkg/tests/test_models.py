import numpy as np
import pytest

from oblique_vqe.errors import ImaginaryResidue, InvalidInput, InvalidWeights
from oblique_vqe.landscape import (
    Block,
    BlockSpec,
    MixedColumn,
    build_qomm_stationary,
    build_qtpm_minimizer,
)
from oblique_vqe.linalg import eigh
from oblique_vqe.manifold import random_oblique
from oblique_vqe.models import (
    Model,
    ModelConfig,
    gershgorin_upper_bound,
    model_gradient,
    model_value,
    ql1m_smoothed_value,
    ql1m_subgrad,
    ql1m_value,
    qomm_grad,
    qomm_value,
    qtpm_grad,
    qtpm_penalty_value,
    qtpm_value,
    reference_minimum,
    shift_to_negative_definite,
    slrp_value,
    weighted_ql1m_subgrad,
    weighted_ql1m_value,
)

from conftest import conjugated_spectrum, random_negdef, random_unitary


def rank_two_mixed_column_certificate(seed=0):
    """The 7x5 rank-2 stationary point with multiplier -8 on spectrum -1..-7."""
    a = conjugated_spectrum([-1, -2, -3, -4, -5, -6, -7], seed)
    spec = BlockSpec(model=Model.QOMM, blocks=(
        Block(size=5, rank=2, eigenvector_indices=(5,),
              mixed_column=MixedColumn(indices=(6, 1), weights=(0.4, 0.6))),))
    return a, build_qomm_stationary(a, spec)


def finite_difference(value_fn, x, direction, h=1e-5):
    return (value_fn(x + h * direction) - value_fn(x - h * direction)) / (2 * h)


def directional(grad, direction):
    return float(np.real(np.sum(np.conj(grad) * direction)))


class TestQommValue:
    def test_orthonormal_eigenvector_columns(self):
        a = random_negdef(8, 3)
        dec = eigh(a)
        x = dec.vectors[:, :3]
        assert qomm_value(a, x) == pytest.approx(dec.values[:3].sum())

    def test_single_column_rayleigh(self):
        a = random_negdef(5, 4)
        x = random_oblique(5, 1, seed=2)
        assert qomm_value(a, x) == pytest.approx(float(np.real(x.conj().T @ a @ x)[0, 0]))

    def test_rank_two_mixed_column_value(self):
        # oracle: sum_j a_j (2 - sigma_j^2) sigma_j^2 with a = (-2, -4), sigma^2 = (3, 2)
        expected = (-2.0) * (2 - 3) * 3 + (-4.0) * (2 - 2) * 2
        assert expected == 6.0
        a, cert = rank_two_mixed_column_certificate()
        assert qomm_value(a, cert.x) == pytest.approx(6.0, abs=1e-9)

    def test_imaginary_residue_detected(self):
        bad = np.array([[1.0, 2.0], [0.0, 1.0]])  # deliberately non-Hermitian
        x = np.array([[1.0], [1j]]) / np.sqrt(2)  # Rayleigh quotient 1 + i
        with pytest.raises(ImaginaryResidue):
            qomm_value(bad, x)


class TestQommGrad:
    def test_vanishes_at_minimizer_after_projection(self):
        from oblique_vqe.manifold import tangent_project

        a = random_negdef(9, 5)
        x = eigh(a).vectors[:, :3]
        assert np.linalg.norm(tangent_project(x, qomm_grad(a, x))) <= 1e-10

    def test_first_order_equation_with_constant_multiplier(self):
        a, cert = rank_two_mixed_column_certificate()
        x = cert.x
        ax = a @ x
        lhs = 2 * ax - ax @ (x.conj().T @ x) - x @ (x.conj().T @ ax)
        assert np.linalg.norm(lhs - 8.0 * x) <= 1e-10

    def test_finite_differences(self, rng):
        a = random_negdef(6, 8)
        for k in range(5):
            x = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
            d = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
            fd = finite_difference(lambda z: qomm_value(a, z), x, d)
            an = directional(qomm_grad(a, x), d)
            assert an == pytest.approx(fd, rel=1e-6, abs=1e-8)


class TestQtpm:
    def test_single_column_example(self):
        a = np.diag([-2.0])
        x = np.array([[1.0]])
        assert qtpm_value(a, x, mu=4.0) == pytest.approx(0.0)

    def test_minimizer_values_diag_example(self):
        # Table-style oracle: tr/2 + (p mean^2 - sum lam^2)/(4 mu) = -2.53125
        a = np.diag([-3.0, -2.0, -1.0])
        x = build_qtpm_minimizer(a, mu=4.0, p=2)
        assert qtpm_penalty_value(a, x, 4.0) == pytest.approx(-2.53125, abs=1e-10)
        # the quartic trace form sits exactly mu p / 4 above it on the manifold
        assert qtpm_value(a, x, 4.0) == pytest.approx(-2.53125 + 2.0, abs=1e-10)

    def test_penalty_identity_on_manifold(self):
        a = random_negdef(7, 2)
        x = random_oblique(7, 3, seed=3)
        assert qtpm_value(a, x, 2.5) - qtpm_penalty_value(a, x, 2.5) == pytest.approx(
            2.5 * 3 / 4, abs=1e-10)

    def test_orthonormal_penalty_vanishes(self):
        a = random_negdef(6, 6)
        x = eigh(a).vectors[:, :2]
        assert qtpm_penalty_value(a, x, 3.0) == pytest.approx(
            0.5 * float(np.real(np.trace(x.conj().T @ a @ x))))

    def test_finite_differences(self, rng):
        a = random_negdef(6, 9)
        for _ in range(5):
            x = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
            d = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
            fd = finite_difference(lambda z: qtpm_value(a, z, 3.0), x, d)
            assert directional(qtpm_grad(a, x, 3.0), d) == pytest.approx(fd, rel=1e-6, abs=1e-8)


class TestSlrp:
    def test_zero_point(self):
        a = random_negdef(5, 1)
        mu = 3.0
        x = np.zeros((5, 2))
        expected = 0.25 * mu * np.linalg.norm(np.eye(5) - a / mu) ** 2
        assert slrp_value(a, x, mu) == pytest.approx(expected)

    def test_difference_constant_in_x(self, rng):
        a = random_negdef(6, 5)
        mu = 4.0
        diffs = []
        for _ in range(100):
            x = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
            diffs.append(qtpm_penalty_value(a, x, mu) - slrp_value(a, x, mu))
        scale = max(abs(d) for d in diffs)
        assert max(diffs) - min(diffs) <= 1e-9 * scale

    def test_spot_value_by_trace_expansion(self, rng):
        a = random_negdef(5, 7)
        mu = 2.0
        x = rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2))
        target = np.eye(5) - a / mu
        diff = x @ x.conj().T - target
        expected = 0.25 * mu * float(np.real(np.trace(diff.conj().T @ diff)))
        assert slrp_value(a, x, mu) == pytest.approx(expected)


class TestQl1m:
    def test_orthonormal_penalty_free(self):
        a = random_negdef(6, 3)
        x = eigh(a).vectors[:, :3]
        assert ql1m_value(a, x, 5.0) == pytest.approx(float(np.real(np.trace(x.conj().T @ a @ x))))

    def test_direct_evaluation(self):
        a = np.diag([-3.0, -2.0, -1.0])
        x = np.column_stack([np.array([1.0, 0, 0]), np.array([1.0, 1.0, 0]) / np.sqrt(2)])
        expected = -5.5 + 96.0 / np.sqrt(2)
        assert ql1m_value(a, x, 96.0) == pytest.approx(expected, abs=1e-12)

    def test_smoothed_finite_differences(self, rng):
        a = random_negdef(6, 4)
        delta = 1e-3
        for _ in range(5):
            x = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
            d = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
            fd = finite_difference(lambda z: ql1m_smoothed_value(a, z, 2.0, delta), x, d)
            an = directional(ql1m_subgrad(a, x, 2.0, delta), d)
            assert an == pytest.approx(fd, rel=1e-6, abs=1e-8)

    def test_subgradient_selection_at_zero(self):
        a = random_negdef(4, 2)
        x = np.eye(4)[:, :2]
        g = ql1m_subgrad(a, x, 3.0, delta=0.0)
        assert np.allclose(g, 2.0 * a @ x)


class TestWeightedQl1m:
    def test_near_identity_weights_reduce(self, rng):
        a = random_negdef(5, 5)
        x = random_oblique(5, 2, seed=1)
        eps = 1e-9
        w = np.array([1.0 + 2 * eps, 1.0 + eps])
        assert weighted_ql1m_value(a, x, w, 2.0) == pytest.approx(ql1m_value(a, x, 2.0), abs=1e-6)

    def test_ordered_eigenvectors(self):
        a = np.diag([-3.0, -2.0, -1.0])
        x = np.eye(3)[:, :2]
        assert weighted_ql1m_value(a, x, [2.0, 1.0], 1.0) == pytest.approx(-8.0)

    def test_column_swap_increases(self):
        a = np.diag([-3.0, -2.0, -1.0])
        x = np.eye(3)[:, [1, 0]]
        assert weighted_ql1m_value(a, x, [2.0, 1.0], 1.0) == pytest.approx(-7.0)

    def test_rejects_non_decreasing_weights(self):
        a = random_negdef(4, 8)
        x = random_oblique(4, 2, seed=2)
        with pytest.raises(InvalidWeights):
            weighted_ql1m_value(a, x, [1.0, 1.0], 2.0)

    def test_weighted_gradient_fd(self, rng):
        a = random_negdef(5, 12)
        w = np.array([3.0, 2.0, 1.0])
        delta = 1e-3
        for _ in range(3):
            x = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
            d = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))

            def smoothed(z):
                base = weighted_ql1m_value(a, z, w, 2.0)
                exact = ql1m_value(np.zeros_like(a), z, 2.0)
                smooth = ql1m_smoothed_value(np.zeros_like(a), z, 2.0, delta)
                return base - exact + smooth

            fd = finite_difference(smoothed, x, d)
            an = directional(weighted_ql1m_subgrad(a, x, w, 2.0, delta), d)
            assert an == pytest.approx(fd, rel=1e-6, abs=1e-8)


class TestInvariances:
    def test_permutation_invariance(self, rng):
        a = random_negdef(6, 10)
        x = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
        perm = rng.permutation(4)
        xp = x[:, perm]
        assert qomm_value(a, xp) == pytest.approx(qomm_value(a, x), abs=1e-12)
        assert qtpm_value(a, xp, 2.0) == pytest.approx(qtpm_value(a, x, 2.0), abs=1e-12)
        assert ql1m_value(a, xp, 2.0) == pytest.approx(ql1m_value(a, x, 2.0), abs=1e-12)

    def test_right_unitary_invariance_of_smooth_models(self, rng):
        a = random_negdef(6, 11)
        x = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
        v = random_unitary(3, rng)
        xv = x @ v
        assert qomm_value(a, xv) == pytest.approx(qomm_value(a, x), abs=1e-10)
        assert qtpm_value(a, xv, 2.0) == pytest.approx(qtpm_value(a, x, 2.0), abs=1e-10)


class TestReferencesAndShift:
    def test_reference_minima_formulas(self):
        lam = np.array([-5.0, -3.0, -2.0, -1.0])
        p = 3
        assert reference_minimum(ModelConfig(model=Model.QOMM), lam, p) == pytest.approx(-10.0)
        assert reference_minimum(ModelConfig(model=Model.QL1M, mu1=1.0), lam, p) == pytest.approx(-10.0)
        mu = 7.0
        mean = -10.0 / 3
        expected = -5.0 + (3 * mean**2 - (25 + 9 + 4)) / (4 * mu)
        assert reference_minimum(ModelConfig(model=Model.QTPM, mu=mu), lam, p) == pytest.approx(expected)
        w = np.array([3.0, 2.0, 1.0])
        cfg = ModelConfig(model=Model.WEIGHTED_QL1M, mu1=1.0, weights=w)
        assert reference_minimum(cfg, lam, p) == pytest.approx(3 * -5.0 + 2 * -3.0 + 1 * -2.0)

    def test_gershgorin_shift(self):
        a = np.array([[1.0, 0.5], [0.5, 2.0]])
        g = gershgorin_upper_bound(a)
        assert g == pytest.approx(2.5)
        shifted, shift = shift_to_negative_definite(a)
        assert shift == pytest.approx(3.5)
        assert np.linalg.eigvalsh(shifted)[-1] < 0
        already = random_negdef(4, 13)
        same, zero = shift_to_negative_definite(already)
        assert zero == 0.0 and np.allclose(same, already)

    def test_model_config_validation(self):
        with pytest.raises(InvalidInput):
            ModelConfig(model=Model.QTPM)
        with pytest.raises(InvalidInput):
            ModelConfig(model=Model.QL1M, mu1=-1.0)
        with pytest.raises(InvalidWeights):
            ModelConfig(model=Model.WEIGHTED_QL1M, mu1=1.0, weights=np.array([1.0, 2.0]))

    def test_dispatch_helpers(self, rng):
        a = random_negdef(5, 14)
        x = random_oblique(5, 2, seed=4)
        cfg = ModelConfig(model=Model.QTPM, mu=3.0)
        assert model_value(cfg, a, x) == pytest.approx(qtpm_value(a, x, 3.0))
        assert np.allclose(model_gradient(cfg, a, x), qtpm_grad(a, x, 3.0))
