import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kantorovich.hermitian import loewner_leq
from kantorovich.instances import random_map, random_unitary
from kantorovich.maps import (
    CompressionMap,
    InvalidMapError,
    KrausMap,
    NormalizedTraceMap,
    PinchingMap,
    UnitaryMixtureMap,
    apply_map,
    map_from_json,
    map_to_json,
    random_unital_map,
    to_kraus,
    validate_map,
)

from conftest import random_hermitian

STYLES = ["trace", "pinching", "compression", "kraus(3)", "kraus(1)", "unitary_mixture(4)"]


def random_psd(rng, n, rank=None):
    rank = rank or n
    G = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    return G @ G.conj().T


class TestApplication:
    def test_normalized_trace(self):
        out = apply_map(NormalizedTraceMap(2), np.diag([1.0, 2.0]))
        assert out.shape == (1, 1)
        assert out[0, 0] == pytest.approx(1.5)

    def test_compression_is_principal_submatrix(self, rng):
        A = random_hermitian(rng, 5)
        out = apply_map(CompressionMap(np.eye(5)[:, :3]), A)
        np.testing.assert_allclose(out, A[:3, :3], atol=1e-15)

    def test_pinching_zeroes_off_blocks(self, rng):
        A = random_hermitian(rng, 5)
        out = apply_map(PinchingMap.from_blocks([2, 3]), A)
        expected = A.copy()
        expected[:2, 2:] = 0
        expected[2:, :2] = 0
        np.testing.assert_allclose(out, expected, atol=1e-15)

    def test_unitary_mixture(self, rng):
        U, V = random_unitary(3, rng), random_unitary(3, rng)
        A = random_hermitian(rng, 3)
        out = apply_map(UnitaryMixtureMap((0.25, 0.75), (U, V)), A)
        expected = 0.25 * U.conj().T @ A @ U + 0.75 * V.conj().T @ A @ V
        np.testing.assert_allclose(out, expected, atol=1e-13)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply_map(NormalizedTraceMap(3), np.eye(2))

    @pytest.mark.parametrize("style", STYLES)
    def test_unital_and_linear(self, style, rng):
        phi = random_map(style, 4, rng)
        out = apply_map(phi, np.eye(4))
        np.testing.assert_allclose(out, np.eye(out.shape[0]), atol=1e-10)
        A, B = random_hermitian(rng, 4), random_hermitian(rng, 4)
        a, b = 0.7, -2.3
        lhs = apply_map(phi, a * A + b * B)
        rhs = a * apply_map(phi, A) + b * apply_map(phi, B)
        scale = max(np.abs(A).max(), np.abs(B).max(), 1)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * scale * 4

    @pytest.mark.parametrize("style", STYLES)
    def test_kraus_form_agrees(self, style, rng):
        phi = random_map(style, 4, rng)
        A = random_hermitian(rng, 4)
        np.testing.assert_allclose(apply_map(to_kraus(phi), A), apply_map(phi, A), atol=1e-12)

    @given(st.integers(0, 2**32 - 1), st.sampled_from(STYLES))
    def test_order_preserving(self, seed, style):
        rng = np.random.default_rng(seed)
        phi = random_map(style, 4, rng)
        A = random_hermitian(rng, 4)
        B = A + random_psd(rng, 4, rank=2)
        assert loewner_leq(apply_map(phi, A), apply_map(phi, B)).holds


class TestValidation:
    def test_valid_kraus(self):
        report = validate_map(random_unital_map(3, 3, 2, seed=5), trials=50, seed=1)
        assert report.unitality_residual <= 1e-10
        assert report.positivity_failures == 0
        assert report.valid

    def test_scaled_kraus_residual(self):
        spec = random_unital_map(3, 3, 2, seed=5)
        scaled = KrausMap(tuple(2 * K for K in spec.operators), validate=False)
        # Σ (2K)* (2K) = 4 I, so ||Φ(I) - I|| = 3
        report = validate_map(scaled, trials=5)
        assert report.unitality_residual == pytest.approx(3.0, abs=1e-9)
        assert not report.valid

    def test_trace_residual_zero(self):
        assert validate_map(NormalizedTraceMap(4), trials=3).unitality_residual == 0

    @pytest.mark.parametrize("style", STYLES)
    def test_positivity_campaign(self, style):
        phi = random_map(style, 5, seed=11)
        report = validate_map(phi, trials=1000, seed=2)
        assert report.positivity_failures == 0 and report.unitality_residual <= 1e-9

    def test_constructor_rejections(self):
        with pytest.raises(InvalidMapError):
            KrausMap((2 * np.eye(2),))
        with pytest.raises(InvalidMapError):
            PinchingMap((np.diag([1.0, 0.0]),))
        with pytest.raises(InvalidMapError):
            CompressionMap(2 * np.eye(3)[:, :2])
        with pytest.raises(InvalidMapError):
            UnitaryMixtureMap((0.5, 0.6), (np.eye(2), np.eye(2)))
        with pytest.raises(InvalidMapError):
            UnitaryMixtureMap((1.0,), (2 * np.eye(2),))

    def test_trials_must_be_positive(self):
        with pytest.raises(ValueError):
            validate_map(NormalizedTraceMap(2), trials=0)


class TestRandomUnitalMap:
    def test_single_operator_is_unitary(self):
        (K,) = random_unital_map(4, 4, 1, seed=3).operators
        np.testing.assert_allclose(K.conj().T @ K, np.eye(4), atol=1e-12)
        np.testing.assert_allclose(K @ K.conj().T, np.eye(4), atol=1e-12)

    def test_deterministic(self):
        a = random_unital_map(3, 2, 3, seed=9)
        b = random_unital_map(3, 2, 3, seed=9)
        for Ka, Kb in zip(a.operators, b.operators):
            assert np.array_equal(Ka, Kb)

    def test_rectangular_unitality(self):
        phi = random_unital_map(3, 2, 2, seed=0)
        assert phi.dim_in == 3 and phi.dim_out == 2
        np.testing.assert_allclose(apply_map(phi, np.eye(3)), np.eye(2), atol=1e-12)

    def test_singular_gram_fails_after_retries(self):
        # one 1 x 3 operator cannot have an invertible 3 x 3 Gram matrix
        with pytest.raises(np.linalg.LinAlgError):
            random_unital_map(1, 3, 1, seed=0)

    def test_positivity_over_100_trials(self):
        phi = random_unital_map(4, 3, 3, seed=21)
        assert validate_map(phi, trials=100, seed=4).positivity_failures == 0


@pytest.mark.parametrize("style", STYLES)
def test_json_roundtrip(style, rng):
    phi = random_map(style, 3, rng)
    data = json.loads(json.dumps(map_to_json(phi)))
    back = map_from_json(data)
    assert back.variant == phi.variant
    A = random_hermitian(rng, 3)
    np.testing.assert_allclose(apply_map(back, A), apply_map(phi, A), atol=1e-14)


def test_json_matrix_encoding():
    data = map_to_json(CompressionMap(np.array([[1j], [0]])))
    assert data == {"variant": "compression", "isometry": [[[0.0, 1.0]], [[0.0, 0.0]]]}
