import math

import numpy as np
import pytest

from ghlab.ansatz import HolomorphicData, standard_data
from ghlab.errors import InvalidDataError, StencilError
from ghlab.verify import (
    BetaZeroReport,
    FDConfig,
    beta_zero_search,
    cauchy_riemann_residual,
    closure_residual,
    contact_ratio,
    curl_residual,
    curvature,
    curvature_with_noise,
    fd_exterior_derivative,
    metric_field,
    quaternion_check,
    structure_coeffs,
)

FLAT = HolomorphicData.flat_reference()
DATA = standard_data()


class TestFDEngine:
    def test_gradient_of_scalar(self):
        f = lambda x: x[0] ** 2 + x[1] * x[2]
        g = fd_exterior_derivative(f, [1.0, 2.0, 3.0])
        assert np.allclose(g, [2.0, 3.0, 2.0], atol=1e-9)

    def test_rotation_one_form(self):
        field = lambda x: np.array([-x[1], x[0]])
        d = fd_exterior_derivative(field, [0.4, -0.3])
        assert d[0, 1] == pytest.approx(2.0, abs=1e-9)
        assert d[1, 0] == pytest.approx(-2.0, abs=1e-9)

    def test_two_form(self):
        # d(x0 dx1^dx2) = dx0^dx1^dx2
        def field(x):
            F = np.zeros((3, 3))
            F[1, 2] = x[0]
            return F - F.T

        d = fd_exterior_derivative(field, [0.7, 0.1, -0.2])
        assert d[0, 1, 2] == pytest.approx(1.0, abs=1e-9)
        assert d[1, 0, 2] == pytest.approx(-1.0, abs=1e-9)

    def test_richardson_kills_cubic_error(self):
        f = lambda x: x[0] ** 3
        plain = fd_exterior_derivative(f, [0.5], FDConfig(h=1e-2, richardson=0))
        rich = fd_exterior_derivative(f, [0.5], FDConfig(h=1e-2, richardson=1))
        # central difference of x^3 carries error h^2 exactly
        assert abs(plain[0] - 0.75) == pytest.approx(1e-4, rel=1e-6)
        assert abs(rich[0] - 0.75) < 1e-12

    def test_config_validation(self):
        with pytest.raises(ValueError):
            FDConfig(h=0.0)
        with pytest.raises(ValueError):
            FDConfig(richardson=3)

    def test_cauchy_riemann(self):
        assert cauchy_riemann_residual(lambda z: z * z, 0.3 + 0.2j) < 1e-9
        assert cauchy_riemann_residual(lambda z: z.conjugate(), 0.3 + 0.2j) == (
            pytest.approx(1.0, abs=1e-9)
        )

    def test_covering_chart_is_holomorphic(self):
        for z in (0.25 + 0.1j, -0.3 + 0.4j):
            res = cauchy_riemann_residual(lambda w: DATA.cover.value(w).w, z)
            assert res < 1e-8


class TestGibbonsHawking:
    @pytest.mark.parametrize("data", [FLAT, DATA], ids=["flat", "blaschke"])
    def test_forms_closed(self, data):
        assert closure_residual(data, 1.1, 0.3 + 0.2j) < 1e-8

    @pytest.mark.parametrize("data", [FLAT, DATA], ids=["flat", "blaschke"])
    def test_curl_equation(self, data):
        assert curl_residual(data, 1.1, 0.3 + 0.2j)["max"] < 1e-8

    def test_corrupted_potential_flagged(self):
        bad = standard_data(v_multiplier=1.01)
        z = 0.3 + 0.2j
        out = curl_residual(bad, 1.1, z)
        expected = -0.01 * bad.phi(z).imag * bad.cover.metric_factor(z)
        assert out["du^dv"] == pytest.approx(expected, rel=1e-4)
        assert out["max"] > 1e-3

    @pytest.mark.parametrize("data", [FLAT, DATA], ids=["flat", "blaschke"])
    @pytest.mark.parametrize("rho,z", [(1.1, 0.3 + 0.2j), (0.7, -0.2 - 0.35j)])
    def test_quaternion_algebra(self, data, rho, z):
        out = quaternion_check(data, rho, z)
        assert out["unit"] < 1e-12
        assert out["product"] < 1e-12
        assert out["anticommute"] < 1e-12
        assert out["roundtrip"] < 1e-12


class TestCurvature:
    def test_flat_reference_is_flat(self):
        rep = curvature(metric_field(FLAT), [1.3, 0.2, 0.1, 0.0], h=1e-3)
        assert rep.riemann_max < 1e-4
        assert rep.ricci_max < 1e-4

    def test_hyperkahler_is_ricci_flat_but_curved(self):
        coarse, fine, noise = curvature_with_noise(
            metric_field(DATA), [1.1, 0.3, 0.2, 0.0], h=1e-3
        )
        assert coarse.ricci_max < 10.0 * max(noise["ricci"], 1e-10)
        assert coarse.riemann_max > 100.0 * max(noise["riemann"], 1e-10)
        assert coarse.riemann_max > 0.1

    def test_truncation_error_is_second_order(self):
        # Ricci of this data is genuinely zero, so the measured value is
        # pure truncation error of the plain central scheme
        r1 = curvature(metric_field(DATA), [1.1, 0.3, 0.2, 0.0], h=1e-2)
        r2 = curvature(metric_field(DATA), [1.1, 0.3, 0.2, 0.0], h=5e-3)
        assert 3.0 < r1.ricci_max / r2.ricci_max < 5.0

    def test_cone_point_guard(self):
        with pytest.raises(StencilError):
            curvature(metric_field(FLAT), [1e-3, 0.1, 0.1, 0.0], h=1e-3)


class TestStructureEquations:
    @pytest.mark.parametrize("z", [0.3 + 0.2j, -0.2 + 0.4j])
    def test_canonical_slice(self, z):
        fit = structure_coeffs(DATA, z, "canonical")
        assert fit.residual < 1e-8
        assert fit.lam0 == pytest.approx(1.0, abs=1e-8)
        assert np.abs(fit.beta0 - fit.beta0_predicted).max() < 1e-8

    @pytest.mark.parametrize("z", [0.3 + 0.2j, -0.2 + 0.4j])
    def test_zero_slice_constant_rho0(self, z):
        data = standard_data(rho0_kind="constant", rho0_scale=0.7)
        fit = structure_coeffs(data, z, "zero")
        assert fit.residual < 1e-8
        assert fit.lam0 == pytest.approx(math.exp(data.t_slice_at(z)), rel=1e-6)
        assert fit.lam0 == pytest.approx(fit.lam0_predicted, rel=1e-8)
        assert np.abs(fit.beta0 - fit.beta0_predicted).max() < 1e-8


class TestContactRatio:
    @pytest.mark.parametrize("z", [0.3 + 0.2j, 0.5 - 0.1j, -0.15 + 0.42j])
    def test_two_routes_agree_and_are_negative(self, z):
        out = contact_ratio(DATA, z)
        assert out["ratio"] == pytest.approx(out["algebraic"], abs=1e-8)
        assert out["ratio"] < 0

    def test_vanishes_at_contact_zero(self):
        rep = _zeros()
        ring = [z for z in rep.zeros if abs(z) > 0.1][0]
        out = contact_ratio(DATA, ring)
        assert abs(out["algebraic"]) < 1e-12
        assert abs(out["ratio"]) < 1e-8


_ZERO_CACHE = []


def _zeros() -> BetaZeroReport:
    if not _ZERO_CACHE:
        _ZERO_CACHE.append(beta_zero_search(DATA, grid=40))
    return _ZERO_CACHE[0]


class TestBetaZeros:
    def test_count_and_radii(self):
        rep = _zeros()
        assert len(rep.zeros) == 5
        radii = sorted(abs(z) for z in rep.zeros)
        assert radii[0] < 1e-3
        for r in radii[1:]:
            assert r == pytest.approx(0.6625322041, abs=1e-6)

    def test_fourfold_symmetry(self):
        rep = _zeros()
        ring = [z for z in rep.zeros if abs(z) > 0.1]
        base = [z for z in ring if abs(z.imag) < 1e-6 and z.real > 0][0]
        for k in range(4):
            target = base * 1j**k
            assert min(abs(z - target) for z in ring) < 1e-9

    def test_all_are_actual_zeros(self):
        rep = _zeros()
        assert max(rep.beta_norms) < 1e-10

    def test_separated(self):
        assert _zeros().min_separation > 0.6

    def test_three_vertex_variant(self):
        rep = beta_zero_search(standard_data(vertices=(1, -1, 1j)), grid=24)
        assert len(rep.zeros) == 1
        assert rep.zeros[0] == pytest.approx(0.658269j, abs=1e-4)
        assert rep.min_separation == math.inf

    def test_constant_data_rejected(self):
        with pytest.raises(InvalidDataError):
            beta_zero_search(FLAT)
