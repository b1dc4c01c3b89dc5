import json

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from kantorovich.hermitian import DomainError, SpectrumBounds, SpectrumError, eigenvalues
from kantorovich.inequalities import (
    ChainReport,
    Link,
    check_ando,
    check_bhatia_kittaneh,
    check_cdj,
    check_eq6,
    check_logconvex_refinement,
    check_norm_criterion,
    check_power_refinement,
    check_refined_kantorovich,
    check_squared,
    check_theorem_A,
    check_theorem_C,
    classical_slack,
)
from kantorovich.instances import InstanceRecipe, conjugate_spectrum, random_unitary, realize
from kantorovich.maps import NormalizedTraceMap
from kantorovich.scalar import ScalarFunction, affine, exp_neg, get_function, inverse, kantorovich_constant

from conftest import random_pd

TRACE2 = NormalizedTraceMap(2)
TRACE3 = NormalizedTraceMap(3)
B12 = SpectrumBounds(1, 2)
D12 = np.diag([1.0, 2.0])
D3 = np.diag([1.0, 1.5, 2.0])

maps = st.sampled_from(["trace", "pinching", "compression", "kraus(3)", "unitary_mixture(4)"])
spectra = st.sampled_from(["uniform-in-band", "two-point", "endpoint-pinned", "clustered"])


@st.composite
def instances(draw):
    m = draw(st.floats(0.2, 4.0))
    ratio = draw(st.floats(1.05, 20.0))
    recipe = InstanceRecipe(draw(st.integers(2, 6)), SpectrumBounds(m, m * ratio), draw(spectra),
                            draw(maps), draw(st.integers(0, 2**32 - 1)))
    A, phi = realize(recipe)
    return A, phi, recipe.bounds


def tight(A):
    lam = eigenvalues(A)
    return SpectrumBounds(lam[0], lam[-1])


class TestTheoremA:
    def test_equality_case(self):
        r = check_theorem_A(D12, TRACE2, B12)
        assert r.all_hold and abs(r.links[0].gap) <= 1e-15

    def test_scalar_multiple_of_identity(self):
        c, b = 2.0, SpectrumBounds(1.0, 3.0)
        K = (3 + 1) ** 2 / (4 * 3)
        r = check_theorem_A(c * np.eye(3), TRACE3, b)
        assert r.links[0].gap == pytest.approx((K - 1) / c, rel=1e-13)

    @given(instances())
    def test_campaign(self, inst):
        assert check_theorem_A(*inst).all_hold

    def test_spectrum_outside(self):
        with pytest.raises(SpectrumError):
            check_theorem_A(np.diag([0.5, 2.0]), TRACE2, B12)


class TestRefined:
    def test_two_point_equality(self):
        r = check_refined_kantorovich(D12, TRACE2, B12)
        assert r.all_hold and max(abs(g) for g in r.gaps) <= 1e-15

    def test_strict_witness(self):
        # oracle: average of 1/t and 2^(1-t) over t = 1, 1.5, 2
        left = (1 + 1 / 1.5 + 0.5) / 3
        middle = (1 + 2**-0.5 + 0.5) / 3
        right = 1.125 / 1.5
        assert left == pytest.approx(13 / 18)
        r = check_refined_kantorovich(D3, TRACE3, B12)
        assert r.gaps[0] == pytest.approx(middle - left, abs=1e-14)
        assert r.gaps[1] == pytest.approx(right - middle, abs=1e-14)
        assert r.gaps[0] == pytest.approx(0.01348, abs=1e-4)
        assert r.gaps[1] == pytest.approx(0.01430, abs=1e-4)

    @given(instances())
    def test_campaign_and_dominance(self, inst):
        A, phi, b = inst
        r = check_refined_kantorovich(A, phi, b)
        assert r.all_hold
        # the middle term never exceeds the classical bound, so link 2 is at most the classical slack
        assert r.gaps[1] <= classical_slack(A, phi, b) + 1e-9

    @given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
    def test_monotone_under_tightening(self, seed, frac):
        recipe = InstanceRecipe(4, SpectrumBounds(0.5, 6.0), "uniform-in-band", "kraus(3)", seed)
        A, phi = realize(recipe)
        lam = eigenvalues(A)
        loose = SpectrumBounds(0.5, lam[-1])
        tighter = SpectrumBounds(0.5 + frac * (lam[0] - 0.5), lam[-1])
        assert check_refined_kantorovich(A, phi, loose).all_hold
        assert check_refined_kantorovich(A, phi, tighter).all_hold

    def test_json_schema(self):
        data = json.loads(json.dumps(check_refined_kantorovich(D3, TRACE3, B12).to_json()))
        assert set(data) == {"name", "links", "instance", "all_hold"}
        assert set(data["links"][0]) >= {"lhs", "rhs", "gap", "holds"}
        assert data["instance"] == {"dim": 3, "m": 1.0, "M": 2.0, "map_variant": "normalized_trace"}
        assert data["all_hold"] is True


class TestLogConvex:
    def test_inverse_matches_refined(self, rng):
        A = conjugate_spectrum(rng.uniform(1, 3, 4), random_unitary(4, rng))
        phi = realize(InstanceRecipe(4, SpectrumBounds(1, 3), map_style="kraus(2)", seed=4))[1]
        b = tight(A)
        lc = check_logconvex_refinement(A, phi, b, inverse())
        rk = check_refined_kantorovich(A, phi, b)
        assert lc.instance["mu"] == pytest.approx(kantorovich_constant(b, -1), rel=1e-10)
        np.testing.assert_allclose(lc.gaps[:2], rk.gaps, atol=1e-9)

    def test_two_point_first_link_exact(self):
        r = check_logconvex_refinement(np.diag([1.0, 3.0]), TRACE2, SpectrumBounds(1, 3), exp_neg())
        assert abs(r.gaps[0]) <= 1e-15 and r.all_hold
        assert len(r.links) == 3

    @given(instances())
    def test_exp_neg_campaign(self, inst):
        assert check_logconvex_refinement(*inst, exp_neg()).all_hold

    def test_rejects_non_log_convex(self):
        with pytest.raises(DomainError):
            check_logconvex_refinement(D12, TRACE2, B12, get_function("sq"))

    def test_rejects_nonpositive_endpoint(self):
        # flagged log-convex but vanishing at m, so the chord is undefined
        f = ScalarFunction("vanishing", lambda t: (t - 1.0) ** 2, log_convex=True, convex=True)
        with pytest.raises(DomainError):
            check_logconvex_refinement(D12, TRACE2, B12, f)


class TestPower:
    def test_p_minus_two_example(self):
        r = check_power_refinement(D12, TRACE2, B12, -2)
        t = np.linspace(1, 2, 200001)
        K = np.max(((2 - t) + (t - 1) * 0.25) * t**2)  # dense-grid oracle for K(1, 2, -2)
        assert abs(r.gaps[0]) <= 1e-15
        assert r.gaps[1] == pytest.approx(K * 1.5**-2 - 0.625, abs=1e-8)
        assert r.all_hold

    @given(instances())
    def test_reduces_to_refined_at_minus_one(self, inst):
        a = check_power_refinement(*inst, -1)
        b = check_refined_kantorovich(*inst)
        assert max(abs(x - y) for x, y in zip(a.gaps, b.gaps)) <= 1e-10

    @given(instances(), st.sampled_from([-0.5, -1.0, -2.0, -3.0]))
    def test_campaign(self, inst, p):
        assert check_power_refinement(*inst, p).all_hold

    @pytest.mark.parametrize("p", [0, 0.5, 2])
    def test_nonnegative_rejected(self, p):
        with pytest.raises(DomainError):
            check_power_refinement(D12, TRACE2, B12, p)


class TestCDJ:
    def test_inverse_example(self):
        r = check_cdj(D12, TRACE2, inverse())
        assert r.all_hold
        assert r.gaps[0] == pytest.approx(0.75 - 1 / 1.5)

    def test_identity_equality(self):
        r = check_cdj(3 * np.eye(3), TRACE3, get_function("sq"))
        assert abs(r.gaps[0]) <= 1e-14

    @given(instances(), st.sampled_from(["inv", "sq"]))
    def test_campaign(self, inst, fid):
        A, phi, _ = inst
        assert check_cdj(A, phi, get_function(fid)).all_hold

    def test_rejects_unflagged(self):
        with pytest.raises(DomainError):
            check_cdj(D12, TRACE2, exp_neg())


class TestTheoremC:
    def test_inverse_example(self):
        r = check_theorem_C(D12, TRACE2, B12, inverse())
        assert r.instance["mu"] == pytest.approx(1.125)
        assert r.all_hold
        assert r.gaps[0] == pytest.approx(0, abs=1e-14)
        assert r.gaps[1] == pytest.approx(1.125 * 0.75 - 1 / 1.5, rel=1e-12)

    def test_affine_collapses(self, rng):
        A = conjugate_spectrum(np.array([1.0, 1.3, 2.0]), random_unitary(3, rng))
        phi = realize(InstanceRecipe(3, B12, map_style="kraus(2)", seed=1))[1]
        r = check_theorem_C(A, phi, B12, affine(2, 1))
        assert r.instance["mu"] == pytest.approx(1.0, abs=1e-14)
        assert max(abs(g) for g in r.gaps) <= 1e-12

    @given(instances())
    def test_square_campaign(self, inst):
        assert check_theorem_C(*inst, get_function("sq")).all_hold

    def test_rejects_non_convex(self):
        with pytest.raises(DomainError):
            check_theorem_C(D12, TRACE2, B12, get_function("pow(0.5)"))


class TestLemmas:
    def test_bk_identity(self):
        r = check_bhatia_kittaneh(np.eye(3), np.eye(3))
        assert r.all_hold and r.gaps[0] == pytest.approx(0, abs=1e-14)

    def test_bk_diagonal(self):
        r = check_bhatia_kittaneh(np.diag([1.0, 4.0]), np.diag([4.0, 1.0]))
        assert r.gaps[0] == pytest.approx(6.25 - 4)

    def test_bk_rejects_singular(self):
        with pytest.raises(DomainError):
            check_bhatia_kittaneh(np.diag([1.0, 0.0]), np.eye(2))

    @given(st.integers(0, 2**32 - 1))
    def test_bk_random(self, seed):
        rng = np.random.default_rng(seed)
        assert check_bhatia_kittaneh(random_pd(rng, 4), random_pd(rng, 4)).all_hold

    def test_ando_r1_equality(self, rng):
        r = check_ando(random_pd(rng, 4), random_pd(rng, 4), 1)
        assert abs(r.gaps[0]) <= 1e-12

    def test_ando_identity(self):
        assert check_ando(np.eye(2), np.eye(2), 2).gaps[0] == pytest.approx(2.0)

    @given(st.integers(0, 2**32 - 1), st.sampled_from([1.5, 2.0, 3.0]))
    def test_ando_random_singular(self, seed, r):
        rng = np.random.default_rng(seed)
        U = random_unitary(4, rng)
        A = conjugate_spectrum(np.array([0.0, 0.0, 1.0, 3.0]), U)
        assert check_ando(A, random_pd(rng, 4, 0.0, 2.0), r).all_hold

    def test_ando_rejects(self):
        with pytest.raises(DomainError):
            check_ando(np.eye(2), np.eye(2), 0.5)
        with pytest.raises(DomainError):
            check_ando(-np.eye(2), np.eye(2), 2)


class TestEq6:
    def test_two_point_equality(self):
        assert abs(check_eq6(D12, TRACE2, B12).gaps[0]) <= 1e-15

    def test_endpoint(self):
        # A = m I gives m + mM/m = M + m
        r = check_eq6(np.eye(3), TRACE3, SpectrumBounds(1, 5))
        assert abs(r.gaps[0]) <= 1e-14

    @given(instances())
    def test_campaign(self, inst):
        assert check_eq6(*inst).all_hold


class TestSquared:
    def test_p2_equality(self):
        assert abs(check_squared(D12, TRACE2, B12, 2).gaps[0]) <= 1e-15

    def test_p4_value(self):
        # chord image is 0.75; the constant is ((M+m)^2 / (4^(1/2) M m))^4 = (9/4)^4
        lhs = 0.75**4
        rhs = (9 / 4) ** 4 * 1.5**-4
        assert (lhs, rhs) == (0.31640625, 5.0625)
        r = check_squared(D12, TRACE2, B12, 4)
        assert r.gaps[0] == pytest.approx(rhs - lhs, rel=1e-13)

    @given(instances(), st.sampled_from([2.0, 3.0, 4.0, 8.0]))
    def test_campaign(self, inst, p):
        assert check_squared(*inst, p).all_hold

    @pytest.mark.parametrize("p", [1.0, 1.99, 17.0])
    def test_rejected(self, p):
        with pytest.raises(DomainError):
            check_squared(D12, TRACE2, B12, p)


class TestNormCriterion:
    def test_equal_matrices(self):
        # α = 1 sits on the boundary, so it is reported but excluded from statistics
        r = check_norm_criterion(np.eye(2), np.eye(2), 1.0)
        assert r.instance["loewner_holds"] and r.instance["norm_holds"]
        assert r.inconclusive

    def test_scalar_case(self):
        r = check_norm_criterion(4 * np.eye(2), np.eye(2), 2.0)
        assert not r.instance["loewner_holds"] and not r.instance["norm_holds"]
        assert r.all_hold and not r.inconclusive
        assert r.gaps[0] == pytest.approx(2**0.5 - 2)

    def test_singular_b(self):
        with pytest.raises(DomainError):
            check_norm_criterion(np.eye(2), np.diag([1.0, 0.0]), 1.0)

    @given(st.integers(0, 2**32 - 1))
    def test_sweep_flips_at_generalized_eigenvalue(self, seed):
        rng = np.random.default_rng(seed)
        A, B = random_pd(rng, 4, 0.2, 3.0), random_pd(rng, 4, 0.2, 3.0)
        # independent oracle: A <= αB iff α >= largest root of det(A - λB)
        critical = scipy.linalg.eigh(A, B, eigvals_only=True)[-1]
        for factor in (0.5, 0.9, 0.999, 1.001, 1.1, 2.0):
            r = check_norm_criterion(A, B, critical * factor)
            assert not r.inconclusive
            assert r.all_hold
            assert r.instance["loewner_holds"] == (factor > 1)

    def test_critical_value_is_inconclusive(self, rng):
        A, B = random_pd(rng, 3), random_pd(rng, 3)
        critical = scipy.linalg.eigh(A, B, eigvals_only=True)[-1]
        assert check_norm_criterion(A, B, critical).inconclusive


def test_link_coerces_numpy_scalars():
    link = Link("a", "b", np.float64(1.0), np.True_, 1.0)
    assert type(link.gap) is float and type(link.holds) is bool
    report = ChainReport("x", [link], {})
    assert json.dumps(report.to_json())
