import itertools
import math

import numpy as np
import pytest

from ghlab.ansatz import (
    HolomorphicData,
    beta_cross_check,
    sphere_jacobian,
    standard_data,
    wedge,
)
from ghlab.errors import DegenerateMetricError, InvalidDataError
from ghlab.holo import HoloFn

FLAT = HolomorphicData.flat_reference()
DATA = standard_data()

SAMPLE_POINTS = [0.3 + 0.2j, -0.15 + 0.42j, 0.5 - 0.1j, -0.33 - 0.28j]


def fd_closure_residual(data, rho, z, h=1e-5):
    """Worst component of d(Omega_i) over all coordinate triples."""
    worst = 0.0
    for i in range(3):
        d_rho = (
            np.array(data.symplectic(rho + h, z)[i]) - data.symplectic(rho - h, z)[i]
        ) / (2 * h)
        d_u = (
            np.array(data.symplectic(rho, z + h)[i]) - data.symplectic(rho, z - h)[i]
        ) / (2 * h)
        d_v = (
            np.array(data.symplectic(rho, z + 1j * h)[i])
            - data.symplectic(rho, z - 1j * h)[i]
        ) / (2 * h)
        parts = [d_rho, d_u, d_v, np.zeros((4, 4))]
        for a, b, c in itertools.combinations(range(4), 3):
            worst = max(worst, abs(parts[a][b, c] - parts[b][a, c] + parts[c][a, b]))
    return worst


class TestFlatReference:
    def test_potential(self):
        assert FLAT.potential(2.0, 0.1 + 0.1j) == pytest.approx(0.25)
        assert FLAT.potential(0.5, 0j) == pytest.approx(1.0)

    @pytest.mark.parametrize("z", [0.3 + 0.2j, -0.5 + 0.1j, 0.7j])
    def test_xi_closed_form(self, z):
        # radial homotopy of 2/(1+s^2|z|^2)^2 integrates to 1/(1+|z|^2)
        xi_u, xi_v = FLAT.xi_at(z)
        coeff = 1.0 / (1.0 + abs(z) ** 2)
        assert xi_u == pytest.approx(-z.imag * coeff, abs=1e-12)
        assert xi_v == pytest.approx(z.real * coeff, abs=1e-12)

    def test_xi_vanishes_at_origin(self):
        assert FLAT.xi_at(0j) == (0.0, 0.0)

    def test_beta_vanishes_on_canonical_slice(self):
        # psi is the constant 2i, so both d(log Im psi) and Re(psi) die
        for z in SAMPLE_POINTS:
            frame = FLAT.slice_frame(z)
            assert np.abs(frame.beta).max() < 1e-14
            assert np.abs(frame.g3 - frame.g_s).max() < 1e-13


class TestSphereJacobian:
    @pytest.mark.parametrize("data", [FLAT, DATA], ids=["flat", "blaschke"])
    def test_partials_match_fd(self, data):
        z = 0.3 + 0.2j
        h = 1e-6
        val = data.cover.value(z)
        _, dpu, dpv = sphere_jacobian(val.w, val.dw_dz)
        fdu = (data.cover.value(z + h).p - data.cover.value(z - h).p) / (2 * h)
        fdv = (data.cover.value(z + 1j * h).p - data.cover.value(z - 1j * h).p) / (
            2 * h
        )
        assert np.abs(dpu - fdu).max() < 1e-8
        assert np.abs(dpv - fdv).max() < 1e-8

    def test_chart_is_orientation_preserving(self):
        for w in (0.2 + 0.1j, 1.5 - 0.4j, 0.01j):
            p, dpa_u, dpa_v = sphere_jacobian(w, 1.0 + 0j)
            normal = np.cross(dpa_u, dpa_v)
            assert float(np.dot(normal, p)) > 0

    @pytest.mark.parametrize("rho,z", [(1.7, 0.3 + 0.2j), (0.6, -0.25 - 0.4j)])
    def test_momentum_jacobian_gram(self, rho, z):
        # conformality of the covering: the dx rows are orthogonal with
        # the squared lengths (1, rho^2 m, rho^2 m)
        dx = DATA.dx_rows(rho, z)[:, :3]
        assert np.abs(dx.T @ dx - DATA.base_metric(rho, z)).max() < 1e-12

    def test_momentum_length(self):
        assert np.linalg.norm(DATA.momentum(1.3, 0.2 + 0.1j)) == pytest.approx(1.3)


class TestHomogeneity:
    @pytest.mark.parametrize("s", [0.5, 2.7])
    def test_metric_degree_one(self, s):
        z, rho = 0.2 + 0.35j, 1.3
        D = np.diag([s, 1.0, 1.0, 1.0])
        G1 = DATA.metric(rho, z)
        G2 = DATA.metric(s * rho, z)
        assert np.abs(D.T @ G2 @ D - s * G1).max() < 1e-12

    @pytest.mark.parametrize("s", [0.5, 2.7])
    def test_forms_degree_one(self, s):
        z, rho = 0.2 + 0.35j, 1.3
        D = np.diag([s, 1.0, 1.0, 1.0])
        for om1, om2 in zip(DATA.symplectic(rho, z), DATA.symplectic(s * rho, z)):
            assert np.abs(D.T @ om2 @ D - s * om1).max() < 1e-12

    def test_potential_degree_minus_one(self):
        z = 0.1 + 0.4j
        assert DATA.potential(2.6, z) == pytest.approx(DATA.potential(1.3, z) / 2)


class TestForms:
    @pytest.mark.parametrize("data", [FLAT, DATA], ids=["flat", "blaschke"])
    def test_symplectic_forms_closed(self, data):
        assert fd_closure_residual(data, 1.1, 0.3 + 0.2j) < 1e-6

    def test_corrupted_potential_breaks_closure(self):
        bad = standard_data(v_multiplier=1.01)
        assert fd_closure_residual(bad, 1.1, 0.3 + 0.2j) > 1e-3

    def test_coframe_differentiates_to_forms(self):
        # omega_i is the scaling-field contraction of Omega_i, and its
        # exterior derivative on the slice must reproduce Omega_i there
        z, h = 0.3 + 0.2j, 1e-5
        du = (DATA.slice_frame(z + h).omega - DATA.slice_frame(z - h).omega) / (2 * h)
        dv = (
            DATA.slice_frame(z + 1j * h).omega - DATA.slice_frame(z - 1j * h).omega
        ) / (2 * h)
        rho_s, grad = DATA._slice_graph(z, "canonical")
        pull = np.zeros((4, 3))
        pull[0, 0], pull[0, 1] = grad
        pull[1, 0] = pull[2, 1] = pull[3, 2] = 1.0
        for i, om in enumerate(DATA.symplectic(rho_s, z)):
            fd = np.array([du[i, 1] - dv[i, 0], du[i, 2], dv[i, 2]])
            pb = pull.T @ om @ pull
            assert np.abs(fd - np.array([pb[0, 1], pb[0, 2], pb[1, 2]])).max() < 1e-6

    def test_metric_positive_definite(self):
        G = DATA.metric(0.9, 0.4 - 0.2j)
        vals = np.linalg.eigvalsh(G)
        assert vals.min() > 0

    def test_negative_potential_rejected(self):
        bad = standard_data(v_multiplier=-1.0)
        with pytest.raises(DegenerateMetricError):
            bad.metric(1.0, 0.2 + 0.1j)

    def test_wedge_antisymmetry(self):
        a = np.array([1.0, 2.0, 0.0, -1.0])
        b = np.array([0.5, 0.0, 3.0, 1.0])
        W = wedge(a, b)
        assert np.abs(W + W.T).max() == 0.0
        assert np.abs(wedge(a, b) + wedge(b, a)).max() == 0.0


class TestCanonicalSlice:
    @pytest.mark.parametrize("z", SAMPLE_POINTS)
    def test_unit_scaling_field(self, z):
        frame = DATA.slice_frame(z)
        assert frame.x_norm_sq == pytest.approx(1.0, abs=1e-12)
        assert frame.t_slice == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("z", SAMPLE_POINTS)
    def test_psi_reconstruction(self, z):
        frame = DATA.slice_frame(z)
        recon = -frame.beta[2] + 1j * frame.rho
        assert abs(recon - DATA.psi(z)) < 1e-12

    @pytest.mark.parametrize("z", SAMPLE_POINTS)
    def test_metric_splits_off_beta(self, z):
        frame = DATA.slice_frame(z)
        dev = frame.g3 - frame.g_s - np.outer(frame.beta, frame.beta)
        assert np.abs(dev).max() < 1e-12

    @pytest.mark.parametrize("z", SAMPLE_POINTS)
    def test_beta_gamma_recovery(self, z):
        out = beta_cross_check(DATA, z)
        assert np.abs(out["beta_solved"] - out["beta_direct"]).max() < 1e-12
        assert np.abs(out["gamma_solved"] - out["gamma_direct"]).max() < 1e-12

    def test_quotient_metric_is_circle_reduction(self):
        z = 0.31 - 0.22j
        g3 = DATA.slice_frame(z).g3
        A, c, d = g3[:2, :2], g3[:2, 2], g3[2, 2]
        assert np.abs(A - np.outer(c, c) / d - DATA.g_sigma(z)).max() < 1e-12

    def test_quotient_metric_positive(self):
        for z in SAMPLE_POINTS:
            assert np.linalg.eigvalsh(DATA.g_sigma(z)).min() > 0


class TestZeroSlice:
    data = standard_data(rho0_kind="constant", rho0_scale=0.7)

    @pytest.mark.parametrize("z", [0.3 + 0.2j, -0.2 + 0.4j])
    def test_structure_constant_is_exp_t(self, z):
        frame = self.data.slice_frame(z, "zero")
        assert frame.lam0 == pytest.approx(math.exp(self.data.t_slice_at(z)), rel=1e-12)
        assert abs(self.data.t_slice_at(z)) > 1e-3  # canonical slice genuinely elsewhere

    def test_scaled_rho0_shifts_t_uniformly(self):
        data = standard_data(rho0_kind="scaled", rho0_scale=2.0)
        ts = {round(data.t_slice_at(z), 12) for z in SAMPLE_POINTS}
        assert ts == {round(-math.log(2.0), 12)}

    def test_zero_slice_structure_equation(self):
        z, h = 0.3 + 0.2j, 1e-5
        frame = self.data.slice_frame(z, "zero")
        du = (
            self.data.slice_frame(z + h, "zero").omega
            - self.data.slice_frame(z - h, "zero").omega
        ) / (2 * h)
        dv = (
            self.data.slice_frame(z + 1j * h, "zero").omega
            - self.data.slice_frame(z - 1j * h, "zero").omega
        ) / (2 * h)
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            fd = np.array([du[i, 1] - dv[i, 0], du[i, 2], dv[i, 2]])
            pred = wedge3 = wedge(frame.beta, frame.omega[i]) + frame.lam0 * wedge(
                frame.omega[j], frame.omega[k]
            )
            got = np.array([wedge3[0, 1], wedge3[0, 2], wedge3[1, 2]])
            assert np.abs(fd - got).max() < 1e-6


class TestValidation:
    def test_lower_halfplane_psi_rejected(self):
        with pytest.raises(InvalidDataError):
            HolomorphicData.flat_reference().__class__(
                cover=FLAT.cover, psi=HoloFn.constant(1 - 2j)
            )

    def test_unknown_rho0_kind_rejected(self):
        with pytest.raises(InvalidDataError):
            standard_data(rho0_kind="fancy")

    def test_nonpositive_rho_rejected(self):
        with pytest.raises(ValueError):
            DATA.potential(0.0, 0.1j)

    def test_xi_memoized(self):
        data = standard_data()
        first = data.xi_at(0.22 + 0.13j)
        assert data.xi_at(0.22 + 0.13j) is first
