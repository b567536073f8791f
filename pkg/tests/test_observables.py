"""Steady-state observables across both representations."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bruteforce as bf
from xyzspin.dicke import all_down, build_layout, expand_full
from xyzspin.liouvillian import BorderedSolver, build_symmetric_liouvillian, steady_state
from xyzspin.model import ModelParams
from xyzspin.observables import (
    ChiLinearityWarning,
    averaged_susceptibility,
    averaged_susceptibility_linear,
    bimodality,
    chi_tensor,
    compute_report,
    entropy,
    purity,
    spin_structure_factor,
    z_magnetization,
)


def make_params(N, Jy=1.4, gamma=1.0, Gamma=0.0):
    return ModelParams(N=N, Jx=0.6, Jy=Jy, Jz=1.0, gamma=gamma, Gamma=Gamma)


@pytest.fixture(scope="module")
def solved_pair():
    """Steady state at N=4 in both representations."""
    p = make_params(4, Jy=1.45, gamma=0.7, Gamma=0.9)
    rho = steady_state(build_symmetric_liouvillian(p))
    return p, rho, expand_full(rho)


class TestCrossRepresentation:
    def test_structure_factor(self, solved_pair):
        p, rho, dense = solved_pair
        for axis in ("x", "y", "z"):
            assert spin_structure_factor(rho, axis) == pytest.approx(
                bf.structure_factor(dense, p.N, axis), abs=1e-12
            )
            assert spin_structure_factor(dense, axis) == pytest.approx(
                spin_structure_factor(rho, axis), abs=1e-12
            )

    def test_magnetization(self, solved_pair):
        p, rho, dense = solved_pair
        assert z_magnetization(rho) == pytest.approx(bf.z_magnetization(dense, p.N), abs=1e-12)
        assert z_magnetization(dense) == pytest.approx(z_magnetization(rho), abs=1e-12)

    def test_entropy_and_purity(self, solved_pair):
        _, rho, dense = solved_pair
        assert entropy(rho) == pytest.approx(bf.entropy(dense), abs=1e-9)
        assert purity(rho) == pytest.approx(bf.purity(dense), abs=1e-11)
        assert entropy(dense) == pytest.approx(entropy(rho), abs=1e-9)
        assert purity(dense) == pytest.approx(purity(rho), abs=1e-11)

    def test_bimodality(self, solved_pair):
        p, rho, dense = solved_pair
        for axis in ("x", "y"):
            assert bimodality(rho, axis) == pytest.approx(
                bf.bimodality(dense, p.N, axis), abs=1e-12
            )


class TestClosedFormAnchors:
    @pytest.mark.parametrize("N", [2, 5, 12])
    def test_all_down_bimodality(self, N):
        # x-moments of the fully polarized state: m2 = N, m4 = N(3N-2)
        rho = all_down(build_layout(N))
        assert bimodality(rho, "x") == pytest.approx(N / (3.0 * N - 2.0), abs=1e-12)

    def test_all_down_moments(self):
        rho = all_down(build_layout(6))
        assert z_magnetization(rho) == pytest.approx(-1.0, abs=1e-14)
        assert entropy(rho) == pytest.approx(0.0, abs=1e-12)
        assert purity(rho) == pytest.approx(1.0, abs=1e-12)
        # no connected correlations along z; transverse factor loses the
        # self-term only
        assert spin_structure_factor(rho, "z") == pytest.approx(1.0, abs=1e-13)
        assert spin_structure_factor(rho, "x") == pytest.approx(0.0, abs=1e-13)


class TestSusceptibility:
    def test_tensor_matches_dense_reference(self):
        p = make_params(4, Jy=1.3)
        L = build_symmetric_liouvillian(p)
        chi = chi_tensor(L)
        dense_L = bf.liouvillian_matrix(p.N, p.Jx, p.Jy, p.Jz, p.gamma, p.Gamma)
        dense_rho = bf.steady_state(dense_L)
        chi_ref = bf.susceptibility_tensor(dense_L, dense_rho, p.N)
        np.testing.assert_allclose(chi, chi_ref, atol=1e-8)

    def test_angular_average_matches_dense_reference(self):
        p = make_params(3, Jy=1.5)
        ours = averaged_susceptibility_linear(p)
        dense_L = bf.liouvillian_matrix(p.N, p.Jx, p.Jy, p.Jz, p.gamma, p.Gamma)
        dense_rho = bf.steady_state(dense_L)
        theirs = bf.averaged_susceptibility(dense_L, dense_rho, p.N)
        assert ours == pytest.approx(theirs, abs=1e-8)

    def test_finite_field_route_agrees_with_linear_response(self):
        p = make_params(4, Jy=1.3)
        lin = averaged_susceptibility_linear(p, n_theta=16)
        fin = averaged_susceptibility(p, n_theta=16)
        assert fin == pytest.approx(lin, rel=1e-3)

    def test_finite_field_warns_when_probe_too_strong(self):
        p = make_params(4, Jy=1.3)
        with pytest.warns(ChiLinearityWarning):
            averaged_susceptibility(p, h=2.0, n_theta=8)

    def test_reuses_caller_factorization(self):
        p = make_params(5, Jy=1.2)
        L = build_symmetric_liouvillian(p)
        solver = BorderedSolver(L)
        a = averaged_susceptibility_linear(p, L=L, solver=solver)
        b = averaged_susceptibility_linear(p)
        assert a == pytest.approx(b, abs=1e-12)


class TestReport:
    def test_report_covers_requested_names(self):
        p = make_params(3)
        rep = compute_report(p)
        assert set(rep) == {
            "Sxx", "Syy", "Mz", "entropy_per_spin", "purity", "Bc_x", "Bc_y", "chi_av",
        }

    def test_report_is_subsettable(self):
        p = make_params(3)
        rep = compute_report(p, observables=("Mz", "purity"))
        assert set(rep) == {"Mz", "purity"}

    def test_report_rejects_unknown_names(self):
        with pytest.raises(ValueError, match="unknown observable"):
            compute_report(make_params(3), observables=("bogus",))

    def test_report_consistent_with_direct_calls(self):
        p = make_params(4, Jy=1.35)
        rep = compute_report(p)
        rho = steady_state(build_symmetric_liouvillian(p))
        assert rep["Sxx"] == pytest.approx(spin_structure_factor(rho, "x"), abs=1e-12)
        assert rep["Mz"] == pytest.approx(z_magnetization(rho), abs=1e-12)
        assert rep["entropy_per_spin"] == pytest.approx(entropy(rho) / p.N, abs=1e-12)
        assert rep["purity"] == pytest.approx(purity(rho), abs=1e-12)
        assert rep["Bc_x"] == pytest.approx(bimodality(rho, "x"), abs=1e-12)


class TestPhysicalRanges:
    @settings(max_examples=12, deadline=None)
    @given(
        Jy=st.floats(0.2, 2.4),
        Jx=st.floats(-1.0, 0.9),
        gamma=st.floats(0.2, 1.5),
        Gamma=st.floats(0.0, 1.5),
        N=st.integers(2, 7),
    )
    def test_steady_state_observable_bounds(self, Jy, Jx, gamma, Gamma, N):
        p = ModelParams(N=N, Jx=Jx, Jy=Jy, Jz=1.0, gamma=gamma, Gamma=Gamma)
        rep = compute_report(p, observables=("Sxx", "Mz", "entropy_per_spin", "purity", "Bc_x"))
        assert -1.0 <= rep["Mz"] <= 1.0
        assert -1.0 / (N - 1.0) - 1e-9 <= rep["Sxx"] <= 1.0 + 1e-9
        assert 0.0 - 1e-12 <= rep["entropy_per_spin"] <= np.log(2.0) + 1e-12
        assert 2.0**-N - 1e-12 <= rep["purity"] <= 1.0 + 1e-12
        assert 0.0 < rep["Bc_x"] <= 1.0 + 1e-9
