import math

import numpy as np
import pytest

from spindir.geometry import sphere_quadrature
from spindir.groups import Block, SignalFamily, build_signal_family, dihedral_d3
from spindir.optimize import (
    ChiDensity,
    DirectionCode,
    chi_density,
    coherent_code,
    d3_coherent_error,
    default_d3_grid,
    direction_cos_matrix,
    finite_group_optimum,
    optimal_direction_encoding,
)
from spindir.states import ProductBasis, SpinBasis, SpinJ, StateVector

GROUP, IRREPS = dihedral_d3()


def family_on_qubits(num_spins: int) -> SignalFamily:
    amps = np.zeros(2**num_spins, dtype=complex)
    amps[0] = 1.0
    fid = StateVector(basis=ProductBasis(num_qubits=num_spins), amplitudes=amps)
    return build_signal_family(GROUP, num_spins, fid, IRREPS)


class TestFiniteGroupOptimum:
    def test_single_spin_third(self):
        opt = finite_group_optimum(family_on_qubits(1))
        assert opt.fidelity == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert opt.optimal_coefficients == (1.0,)
        assert opt.score_rule == "zero-one"

    def test_two_spins_two_thirds(self):
        opt = finite_group_optimum(family_on_qubits(2))
        assert opt.fidelity == pytest.approx(2.0 / 3.0, abs=1e-15)
        got = sorted(opt.optimal_coefficients)
        want = sorted([0.5, 0.5, math.sqrt(0.5)])
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_single_trivial_block_one_sixth(self):
        # six copies of the identity on a one-dimensional space
        rep = tuple(np.eye(1, dtype=complex) for _ in range(6))
        fid = StateVector(basis=SpinBasis(SpinJ(0)), amplitudes=np.array([1.0]))
        family = SignalFamily(
            group=GROUP,
            rep_matrices=rep,
            fiducial=fid,
            block_structure=(Block(irrep=0, basis=np.eye(1, dtype=complex)),),
        )
        assert finite_group_optimum(family).fidelity == pytest.approx(1.0 / 6.0)

    def test_repeated_blocks_rejected(self):
        with pytest.raises(ValueError, match="repeated"):
            finite_group_optimum(family_on_qubits(3))


class TestCosMatrix:
    def test_two_block_fixture(self):
        mat = direction_cos_matrix(SpinJ(2))
        want = np.array([[0.0, 1.0 / math.sqrt(3.0)], [1.0 / math.sqrt(3.0), 0.0]])
        np.testing.assert_allclose(mat, want, atol=1e-15)

    def test_band_structure(self):
        mat = direction_cos_matrix(SpinJ(20))
        assert np.max(np.abs(np.diag(mat))) == 0.0
        for k in range(10):
            off = (k + 1.0) / math.sqrt((2.0 * k + 1.0) * (2.0 * k + 3.0))
            assert mat[k, k + 1] == pytest.approx(off, abs=1e-15)
        band = np.triu(mat, 2)
        assert np.max(np.abs(band)) == 0.0

    def test_matches_quadrature_overlaps(self):
        # <p_j | u | p_j'> with p_j = sqrt((2j+1)/2) P_j(u) on [-1, 1]
        j_top = 30
        x, w = np.polynomial.legendre.leggauss(j_top + 4)
        rows = np.polynomial.legendre.legvander(x, j_top).T
        rows = rows * np.sqrt((2.0 * np.arange(j_top + 1) + 1.0) / 2.0)[:, None]
        oracle = (rows * (w * x)) @ rows.T
        mat = direction_cos_matrix(SpinJ(2 * j_top))
        np.testing.assert_allclose(mat, oracle, atol=1e-10)

    def test_rejects_half_integer(self):
        with pytest.raises(ValueError):
            direction_cos_matrix(SpinJ(3))


class TestOptimalEncoding:
    def test_trivial_code(self):
        code = optimal_direction_encoding(SpinJ(0))
        assert code.fidelity == 0.5
        assert code.amplitudes.tolist() == [1.0]
        assert code.effective_dimension == 1

    def test_two_spins_closed_form(self):
        code = optimal_direction_encoding(SpinJ(2))
        assert code.infidelity == pytest.approx((1.0 - 1.0 / math.sqrt(3.0)) / 2.0,
                                                abs=1e-14)
        assert code.effective_dimension == 4

    def test_four_spins_closed_form(self):
        code = optimal_direction_encoding(SpinJ(4))
        assert code.infidelity == pytest.approx((1.0 - math.sqrt(0.6)) / 2.0, abs=1e-14)

    def test_fidelity_is_rayleigh_quotient(self):
        code = optimal_direction_encoding(SpinJ(16))
        a = code.amplitudes
        assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-12)
        mat = direction_cos_matrix(SpinJ(16))
        assert (1.0 + a @ mat @ a) / 2.0 == pytest.approx(code.fidelity, abs=1e-12)
        assert a[0] > 0  # sign pinned on the leading entry

    @pytest.mark.parametrize(
        "n,value",
        [(40, 4.99826350368835), (50, 5.14287356797899), (60, 5.24253272494093)],
    )
    def test_scaled_infidelity_frozen(self, n, value):
        code = optimal_direction_encoding(SpinJ(n))
        assert n * n * code.infidelity == pytest.approx(value, rel=1e-10)

    def test_scaled_infidelity_increases(self):
        values = [
            n * n * optimal_direction_encoding(SpinJ(n)).infidelity
            for n in range(2, 61, 2)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_rejects_odd_spin_count(self):
        with pytest.raises(ValueError, match="integer j"):
            optimal_direction_encoding(SpinJ(3))

    def test_beats_coherent_at_same_size(self):
        for n in (6, 10, 20):
            assert (
                optimal_direction_encoding(SpinJ(n)).fidelity
                > coherent_code(SpinJ(n)).fidelity
            )


class TestCoherentCode:
    def test_fidelity_formula(self):
        assert coherent_code(SpinJ(1)).fidelity == pytest.approx(2.0 / 3.0)
        assert coherent_code(SpinJ(8)).fidelity == pytest.approx(0.9)
        code = coherent_code(SpinJ(8))
        assert code.carrier == "coherent"
        assert code.infidelity == pytest.approx(0.1)
        assert code.effective_dimension == 9

    def test_code_validation(self):
        with pytest.raises(ValueError, match="carrier"):
            DirectionCode(j_max=SpinJ(2), amplitudes=np.array([1.0]), fidelity=0.5,
                          effective_dimension=1, carrier="m1")
        with pytest.raises(ValueError, match="length"):
            DirectionCode(j_max=SpinJ(4), amplitudes=np.array([1.0, 0.0]),
                          fidelity=0.5, effective_dimension=1)
        with pytest.raises(ValueError, match="unit norm"):
            DirectionCode(j_max=SpinJ(2), amplitudes=np.array([1.0, 1.0]),
                          fidelity=0.5, effective_dimension=1)


class TestChiDensity:
    @pytest.fixture(params=["m0", "coherent"])
    def density(self, request) -> ChiDensity:
        if request.param == "m0":
            return chi_density(optimal_direction_encoding(SpinJ(12)))
        return chi_density(coherent_code(SpinJ(9)))

    def test_normalized(self, density):
        assert density.normalization() == pytest.approx(1.0, abs=1e-12)

    def test_expected_fidelity_matches_code(self, density):
        assert density.expected_fidelity() == pytest.approx(
            density.code.fidelity, abs=1e-12
        )
        assert density.expected_infidelity() == pytest.approx(
            density.code.infidelity, abs=1e-12
        )

    def test_pdf_non_negative_and_consistent(self, density):
        chi = np.linspace(0.0, math.pi, 301)
        p = density.pdf(chi)
        assert np.all(p >= -1e-15)
        np.testing.assert_allclose(
            p, np.sin(chi) * density.pdf_cos(np.cos(chi)), atol=1e-14
        )

    def test_pdf_integrates_to_one(self, density):
        chi = np.linspace(0.0, math.pi, 20001)
        total = np.trapezoid(density.pdf(chi), chi)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_cumulative_monotone(self, density):
        u, cdf = density.cumulative_in_cos(n=512)
        assert cdf[0] == 0.0
        assert cdf[-1] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(cdf) >= -1e-15)
        assert u[0] == -1.0 and u[-1] == 1.0


class TestSixDirectionDecoding:
    def test_default_grid_shape_rules(self):
        for twice_j, scale in [(4, 1), (4, 2), (8, 1), (24, 8), (2, 3)]:
            quad = default_d3_grid(SpinJ(twice_j), scale=scale)
            n_theta = len(np.unique(np.round(quad.unit_vectors[:, 2], 14)))
            assert n_theta % 2 == 0
            assert quad.max_exact_degree >= 2 * twice_j + 2

    def test_default_grid_phi_count(self):
        quad = default_d3_grid(SpinJ(4))
        # 6 even thetas x 15 azimuths (first count with 2n-1 >= 10, 15 = 3 mod 6)
        assert quad.size == 6 * 15

    def test_default_grid_rejects_bad_scale(self):
        with pytest.raises(ValueError):
            default_d3_grid(SpinJ(4), scale=0)

    def test_error_rejects_coarse_grid(self):
        with pytest.raises(ValueError, match="degree"):
            d3_coherent_error(SpinJ(8), sphere_quadrature(5, 9))

    def test_error_rejects_boundary_nodes(self):
        # odd n_theta puts nodes on the equator, tie-broken by index, which
        # skews the six per-direction rates
        with pytest.raises(ValueError, match="symmetry"):
            d3_coherent_error(SpinJ(4), sphere_quadrature(11, 21))

    @pytest.mark.parametrize(
        "twice_j,value",
        [
            (4, 0.420266637526832),
            (8, 0.224129132441742),
            (24, 0.0241597207054172),
        ],
    )
    def test_frozen_scale8_errors(self, twice_j, value):
        j = SpinJ(twice_j)
        err = d3_coherent_error(j, default_d3_grid(j, scale=8))
        assert err == pytest.approx(value, rel=1e-10)

    def test_error_decreases_with_spins(self):
        errs = [
            d3_coherent_error(SpinJ(n), default_d3_grid(SpinJ(n), scale=4))
            for n in (2, 4, 8, 12)
        ]
        assert all(b < a for a, b in zip(errs, errs[1:]))

    def test_grid_refinement_converges(self):
        # boundary-exact reference for the four-spin code; node membership
        # converges like 1/scale^2 toward it
        truth = 0.4204489202377
        j = SpinJ(4)
        d8 = abs(d3_coherent_error(j, default_d3_grid(j, scale=8)) - truth)
        d16 = abs(d3_coherent_error(j, default_d3_grid(j, scale=16)) - truth)
        assert d8 < 5e-4
        assert d16 < d8 / 3.0
