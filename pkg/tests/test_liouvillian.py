"""Generator construction and steady-state solver, cross-checked densely."""

from __future__ import annotations

import numpy as np
import pytest

import bruteforce as bf
from xyzspin.dicke import (
    DickeBlockMatrix,
    all_down,
    build_layout,
    expand_full,
    maximally_mixed,
    project_symmetric,
)
from xyzspin.liouvillian import (
    BorderedSolver,
    MultiplicityError,
    ResourceLimitError,
    SteadyStateError,
    SuperOperator,
    build_full_liouvillian,
    build_hamiltonian,
    build_symmetric_liouvillian,
    build_z2,
    collective_full,
    site_operator,
    steady_state,
)
from xyzspin.model import ModelParams

CONFIGS = {
    "local": (1.0, 0.0),
    "collective": (0.0, 1.0),
    "mixed": (0.7, 0.9),
}


def make_params(N, gamma, Gamma, Jx=0.6, Jy=1.3, Jz=1.0):
    return ModelParams(N=N, Jx=Jx, Jy=Jy, Jz=Jz, gamma=gamma, Gamma=Gamma)


def random_block_state(layout, seed=0):
    rng = np.random.default_rng(seed)
    rho = all_down(layout).copy()
    total = 0.0
    for i, blk in enumerate(layout.blocks):
        A = rng.normal(size=(blk.dim, blk.dim)) + 1j * rng.normal(size=(blk.dim, blk.dim))
        rho.blocks[i] = A @ A.conj().T
        total += rho.blocks[i].trace().real
    for i in range(len(rho.blocks)):
        rho.blocks[i] = rho.blocks[i] / total
    return rho


class TestElementaryOperators:
    def test_site_operator_embedding_matches_dense_kron(self):
        for N in (2, 3):
            for i in range(N):
                ours = site_operator(bf.SY, i, N).toarray()
                np.testing.assert_allclose(ours, bf.site(bf.SY, i, N), atol=1e-15)

    def test_site_algebra(self):
        N = 3
        sx1 = site_operator(bf.SX, 1, N).toarray()
        sy1 = site_operator(bf.SY, 1, N).toarray()
        sz1 = site_operator(bf.SZ, 1, N).toarray()
        np.testing.assert_allclose(sx1 @ sy1 - sy1 @ sx1, 2j * sz1, atol=1e-14)
        sy2 = site_operator(bf.SY, 2, N).toarray()
        np.testing.assert_allclose(sx1 @ sy2, sy2 @ sx1, atol=1e-15)

    def test_collective_full_accumulates_sites(self):
        for which, pauli in (("Sx", bf.SX), ("Sz", bf.SZ)):
            np.testing.assert_allclose(
                collective_full(which, 3).toarray(), bf.collective(pauli, 3), atol=1e-15
            )


class TestHamiltonian:
    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_full_basis_matches_reference(self, N):
        p = make_params(N, 1.0, 0.0, Jx=-0.4, Jy=2.1, Jz=0.7)
        H = build_hamiltonian(p, basis="full")
        np.testing.assert_allclose(
            H.toarray(), bf.hamiltonian(N, -0.4, 2.1, 0.7), atol=1e-13
        )

    @pytest.mark.parametrize("N", [2, 3, 5])
    def test_symmetric_blocks_are_projection_of_full(self, N):
        p = make_params(N, 1.0, 0.0, Jx=0.9, Jy=-1.2, Jz=0.3)
        lay = build_layout(N)
        Hs = build_hamiltonian(p, basis="symmetric")
        Hf = np.asarray(build_hamiltonian(p, basis="full").todense())
        projected = project_symmetric(Hf, lay)
        for blk, a, b in zip(lay.blocks, Hs.blocks, projected.blocks):
            # projection of an operator carries a multiplicity weight per block
            np.testing.assert_allclose(a * blk.degeneracy, b, atol=1e-12)

    def test_blocks_are_hermitian(self):
        Hs = build_hamiltonian(make_params(6, 1.0, 0.5), basis="symmetric")
        for blk in Hs.blocks:
            np.testing.assert_allclose(blk, blk.conj().T, atol=1e-14)


class TestGeneratorEquivalence:
    @pytest.mark.parametrize("config", sorted(CONFIGS))
    @pytest.mark.parametrize("N", [2, 3, 4])
    def test_action_matches_projected_full_action(self, N, config):
        gamma, Gamma = CONFIGS[config]
        p = make_params(N, gamma, Gamma, Jx=0.25, Jy=1.45, Jz=0.8)
        lay = build_layout(N)
        Ls = build_symmetric_liouvillian(p)
        Lf = bf.liouvillian_matrix(N, 0.25, 1.45, 0.8, gamma, Gamma)
        rho = random_block_state(lay, seed=7 * N)
        ours = DickeBlockMatrix.from_packed(lay, Ls.matrix @ rho.packed())
        dense = bf.apply(Lf, expand_full(rho))
        theirs = project_symmetric(dense, lay)
        for a, b in zip(ours.blocks, theirs.blocks):
            np.testing.assert_allclose(a, b, atol=1e-12)

    @pytest.mark.parametrize("config", sorted(CONFIGS))
    def test_full_builder_matches_reference_matrix(self, config):
        gamma, Gamma = CONFIGS[config]
        p = make_params(3, gamma, Gamma)
        L = build_full_liouvillian(p)
        np.testing.assert_allclose(
            L.matrix.toarray(),
            bf.liouvillian_matrix(3, p.Jx, p.Jy, p.Jz, gamma, Gamma),
            atol=1e-13,
        )

    @pytest.mark.parametrize("basis", ["symmetric", "full"])
    def test_trace_vector_annihilates_generator(self, basis):
        p = make_params(4, 0.7, 0.9)
        L = (build_symmetric_liouvillian if basis == "symmetric" else build_full_liouvillian)(p)
        t = L.trace_vector()
        assert np.abs(t @ L.matrix).max() < 1e-12 * max(1.0, L.norm_inf())

    def test_trace_vector_reads_trace(self):
        p = make_params(4, 1.0, 0.0)
        L = build_symmetric_liouvillian(p)
        rho = random_block_state(L.layout, seed=11)
        assert (L.trace_vector() @ rho.packed()).real == pytest.approx(1.0, abs=1e-12)

    def test_action_preserves_hermiticity(self):
        p = make_params(5, 0.7, 0.9)
        L = build_symmetric_liouvillian(p)
        rho = random_block_state(L.layout, seed=3)
        out = DickeBlockMatrix.from_packed(L.layout, L.matrix @ rho.packed())
        assert out.is_hermitian(tol=1e-11)

    def test_resource_guard_on_full_basis(self):
        with pytest.raises(ResourceLimitError):
            build_full_liouvillian(make_params(8, 1.0, 0.0))
        # opt-in override raises the ceiling
        L = build_full_liouvillian(make_params(8, 1.0, 0.0), n_max=8)
        assert L.matrix.shape == (4**8, 4**8)


class TestZ2Symmetry:
    @pytest.mark.parametrize("basis", ["symmetric", "full"])
    def test_parity_squares_to_identity(self, basis):
        Z = build_z2(4, basis=basis)
        rng = np.random.default_rng(0)
        v = rng.normal(size=Z.diag.shape) + 1j * rng.normal(size=Z.diag.shape)
        np.testing.assert_allclose(Z.apply(Z.apply(v)), v, atol=0)

    @pytest.mark.parametrize("config", sorted(CONFIGS))
    @pytest.mark.parametrize("basis", ["symmetric", "full"])
    def test_parity_commutes_with_generator(self, basis, config):
        gamma, Gamma = CONFIGS[config]
        p = make_params(4, gamma, Gamma)
        L = (build_symmetric_liouvillian if basis == "symmetric" else build_full_liouvillian)(p)
        Z = build_z2(4, basis=basis)
        rng = np.random.default_rng(5)
        v = rng.normal(size=L.matrix.shape[0]) + 1j * rng.normal(size=L.matrix.shape[0])
        lhs = Z.apply(L.matrix @ v)
        rhs = L.matrix @ Z.apply(v)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10 * L.norm_inf())

    def test_full_basis_parity_counts_flipped_spins(self):
        Z = build_z2(3, basis="full")
        # parity of rho factorizes into signs (-1)^(popcount row + popcount col)
        signs = np.array([(-1) ** bin(x).count("1") for x in range(8)], dtype=float)
        expected = np.kron(signs, signs)
        np.testing.assert_allclose(Z.diag, expected, atol=0)


class TestSteadyState:
    @pytest.mark.parametrize("config", ["local", "mixed"])
    @pytest.mark.parametrize("N", [3, 4])
    def test_matches_dense_reference(self, N, config):
        gamma, Gamma = CONFIGS[config]
        p = make_params(N, gamma, Gamma)
        rho = steady_state(build_symmetric_liouvillian(p))
        dense = bf.steady_state(bf.liouvillian_matrix(N, p.Jx, p.Jy, p.Jz, gamma, Gamma))
        back = project_symmetric(dense, build_layout(N))
        for a, b in zip(rho.blocks, back.blocks):
            np.testing.assert_allclose(a, b, atol=1e-10)

    def test_full_basis_solver(self):
        p = make_params(3, 1.0, 0.0)
        rho = steady_state(build_full_liouvillian(p))
        dense = bf.steady_state(bf.liouvillian_matrix(3, p.Jx, p.Jy, p.Jz, 1.0, 0.0))
        np.testing.assert_allclose(rho, dense, atol=1e-10)

    def test_collective_only_kernel_is_degenerate(self):
        p = make_params(4, 0.0, 1.0)
        L = build_symmetric_liouvillian(p)
        with pytest.raises(MultiplicityError):
            steady_state(L)

    def test_collective_only_top_sector_opt_in(self):
        p = make_params(4, 0.0, 1.0)
        L = build_symmetric_liouvillian(p)
        rho = steady_state(L, allow_degenerate=True)
        # supported on the maximal-spin block only, and annihilated by the
        # dense product-basis generator
        for blk in rho.blocks[1:]:
            assert np.abs(blk).max() < 1e-12
        Lf = bf.liouvillian_matrix(4, p.Jx, p.Jy, p.Jz, 0.0, 1.0)
        out = bf.apply(Lf, expand_full(rho))
        assert np.abs(out).max() < 1e-10
        assert rho.trace().real == pytest.approx(1.0, abs=1e-12)

    def test_solver_response_inverts_generator_on_traceless_rhs(self):
        p = make_params(4, 0.7, 0.9)
        L = build_symmetric_liouvillian(p)
        solver = BorderedSolver(L)
        rho = steady_state(L)
        # a traceless, in-range perturbation: the commutator of Sx with rho
        from xyzspin.dicke import collective_operator

        sx = collective_operator(L.layout, "Sx")
        kick = DickeBlockMatrix(
            L.layout,
            [-1j * (o @ r - r @ o) for o, r in zip(sx.blocks, rho.blocks)],
        )
        delta = solver.response(kick.packed())
        np.testing.assert_allclose(L.matrix @ delta, kick.packed(), atol=1e-9)
        assert abs(L.trace_vector() @ delta) < 1e-10

    def test_positivity_enforced(self):
        p = make_params(5, 1.0, 0.5, Jy=1.5)
        rho = steady_state(build_symmetric_liouvillian(p))
        for blk, mat in zip(rho.layout.blocks, rho.blocks):
            w = np.linalg.eigvalsh(mat / blk.degeneracy)
            assert w.min() > -1e-9

    def test_stiff_couplings_match_dense_reference(self):
        # |J| >> gamma exercises the diagonal-pivot factorization path
        p = make_params(4, 1.0, 0.0, Jy=60.0)
        rho = steady_state(build_symmetric_liouvillian(p))
        dense = bf.steady_state(
            bf.liouvillian_matrix(4, p.Jx, p.Jy, p.Jz, 1.0, 0.0)
        )
        back = project_symmetric(dense, build_layout(4))
        for a, b in zip(rho.blocks, back.blocks):
            np.testing.assert_allclose(a, b, atol=1e-9)

    @pytest.mark.parametrize("config", ["local", "mixed"])
    def test_ilu_method_matches_direct(self, config):
        gamma, Gamma = CONFIGS[config]
        p = make_params(12, gamma, Gamma, Jy=1.45)
        L = build_symmetric_liouvillian(p)
        direct = steady_state(L, method="direct")
        iterative = steady_state(L, method="ilu")
        for a, b in zip(direct.blocks, iterative.blocks):
            np.testing.assert_allclose(a, b, atol=1e-10)

    def test_ilu_response_matches_direct(self):
        p = make_params(8, 0.7, 0.9)
        L = build_symmetric_liouvillian(p)
        rho = steady_state(L)
        from xyzspin.dicke import collective_operator

        sx = collective_operator(L.layout, "Sx")
        kick = DickeBlockMatrix(
            L.layout,
            [-1j * (o @ r - r @ o) for o, r in zip(sx.blocks, rho.blocks)],
        ).packed()
        d_direct = BorderedSolver(L, method="direct").response(kick)
        d_ilu = BorderedSolver(L, method="ilu").response(kick)
        np.testing.assert_allclose(d_ilu, d_direct, atol=1e-9)

    def test_unknown_method_rejected(self):
        p = make_params(3, 1.0, 0.0)
        L = build_symmetric_liouvillian(p)
        with pytest.raises(ValueError, match="method"):
            BorderedSolver(L, method="qr")

    def test_ordering_choice_does_not_change_answer(self):
        p = make_params(6, 0.7, 0.9, Jy=1.3)
        L = build_symmetric_liouvillian(p)
        a = BorderedSolver(L, permc_spec="COLAMD").steady()
        b = BorderedSolver(L, permc_spec="MMD_AT_PLUS_A").steady()
        np.testing.assert_allclose(a, b, atol=1e-11)
