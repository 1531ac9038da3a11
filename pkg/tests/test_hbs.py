"""Block-separable / HBS formats: the Woodbury variation, skeletonization,
and the level-by-level inversion pipeline."""

import numpy as np
import pytest
import scipy.linalg

from fds.bie2d import assemble_bie, laplace_fundamental, make_curve
from fds.bvp1d import green_1d
from fds.hbs import (
    block_separable_inverse_apply,
    compress_to_block_separable,
    compress_to_hbs,
    hbs_apply_inverse,
    hbs_invert,
    hbs_matvec,
    hbs_storage,
    woodbury_variant,
)
from fds.linalg import SingularMatrixError, dense_lu_solve
from fds.tree import build_uniform_tree

RNG_SEED = 90210


def green_kernel_matrix(N):
    """Trapezoid discretization of the 1D zero-boundary Green's function."""
    h = 1.0 / (N + 1)
    x = h * np.arange(1, N + 1)
    return h * green_1d(x[:, None], x[None, :], 0.0, 1.0)


def ellipse_bie_matrix(N):
    curve = make_curve("ellipse", N, 2.0, 1.0)
    return assemble_bie(curve, np.zeros(N)).matrix


class TestWoodburyVariant:
    def test_empty_low_rank_part(self):
        rng = np.random.default_rng(RNG_SEED)
        D = 5.0 * np.eye(6) + rng.standard_normal((6, 6))
        Dhat, E, F, G = woodbury_variant(D, np.zeros((6, 0)), np.zeros((6, 0)))
        assert Dhat.shape == (0, 0) and E.shape == (6, 0)
        assert np.allclose(G, np.linalg.inv(D), atol=1e-12)

    def test_inverse_identity_random(self):
        rng = np.random.default_rng(RNG_SEED)
        N, K = 8, 2
        D = 4.0 * np.eye(N) + rng.standard_normal((N, N))
        U = rng.standard_normal((N, K))
        V = rng.standard_normal((N, K))
        At = rng.standard_normal((K, K))
        A = U @ At @ V.conj().T + D
        Dhat, E, F, G = woodbury_variant(D, U, V, At)
        Ainv = E @ np.linalg.solve(At + Dhat, F.conj().T) + G
        assert np.max(np.abs(Ainv @ A - np.eye(N))) < 1e-12

    def test_projector_rank(self):
        # D = I, U = V orthonormal, Atilde = 0: G = I - U U*, rank N - K
        rng = np.random.default_rng(RNG_SEED)
        N, K = 10, 3
        U, _ = np.linalg.qr(rng.standard_normal((N, K)))
        Dhat, E, F, G = woodbury_variant(np.eye(N), U, U)
        assert np.allclose(Dhat, np.eye(K), atol=1e-13)
        assert np.allclose(G, np.eye(N) - U @ U.T, atol=1e-13)
        eigs = np.linalg.eigvalsh(G)
        assert int(np.sum(eigs > 0.5)) == N - K and int(np.sum(eigs < 0.5)) == K

    @pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")

    def test_singular_d_identified(self):
        with pytest.raises(SingularMatrixError, match="D is singular"):
            woodbury_variant(np.zeros((4, 4)), np.zeros((4, 1)), np.zeros((4, 1)))

    def test_singular_core_identified(self):
        # V* D^-1 U = 0 when U, V have disjoint supports
        D = np.eye(4)
        U = np.array([[1.0], [0.0], [0.0], [0.0]])
        V = np.array([[0.0], [0.0], [0.0], [1.0]])
        with pytest.raises(SingularMatrixError, match="V"):
            woodbury_variant(D, U, V)

    def test_micro_instances(self):
        # the Lemma identity holds across 200 random small instances
        rng = np.random.default_rng(RNG_SEED)
        for _ in range(200):
            N = int(rng.integers(2, 13))
            K = int(rng.integers(1, min(5, N + 1)))
            D = (N + 2) * np.eye(N) + rng.standard_normal((N, N))
            U = rng.standard_normal((N, K))
            V = rng.standard_normal((N, K))
            At = rng.standard_normal((K, K))
            A = U @ At @ V.conj().T + D
            Dhat, E, F, G = woodbury_variant(D, U, V, At)
            Ainv = E @ np.linalg.solve(At + Dhat, F.conj().T) + G
            assert np.max(np.abs(A @ Ainv - np.eye(N))) < 1e-12


class TestCompress:
    def test_identity(self):
        tree = build_uniform_tree(64, 8)
        H = compress_to_hbs(np.eye(64), tree, 1e-10)
        assert all(len(s) == 0 for s in H.skeleton.values())
        for tau in tree.leaves():
            assert np.allclose(H.D[tau], np.eye(tree.size(tau)))

    def test_green_kernel_tiny_ranks(self):
        A = green_kernel_matrix(512)
        tree = build_uniform_tree(512, 32)
        H = compress_to_hbs(A, tree, 1e-12)
        assert max(H.per_level_ranks().values()) <= 2
        assert np.linalg.norm(H.todense() - A) <= 1e-11 * np.linalg.norm(A)

    def test_bie_matrix_reconstruction(self):
        A = ellipse_bie_matrix(1024)
        tree = build_uniform_tree(1024, 64)
        H = compress_to_hbs(A, tree, 1e-10)
        assert np.linalg.norm(H.todense() - A) <= 1e-9 * np.linalg.norm(A)

    def test_submatrix_property(self):
        # sibling interactions are literal submatrices, bit for bit
        A = ellipse_bie_matrix(256)
        tree = build_uniform_tree(256, 32)
        H = compress_to_hbs(A, tree, 1e-10)
        from fds.tree import sibling_pairs

        for a, b in sibling_pairs(tree):
            assert np.array_equal(
                H.Atilde[(a, b)], A[np.ix_(H.skeleton[a], H.skeleton[b])]
            )

    def test_nested_basis_spans_block_row(self):
        A = green_kernel_matrix(256)
        tree = build_uniform_tree(256, 32)
        tol = 1e-10
        H = compress_to_hbs(A, tree, tol)
        # densified long bases reproduce each block row at tol
        long_u = {}
        for ell in range(tree.depth, 0, -1):
            for tau in tree.nodes_at_level(ell):
                if tree.is_leaf(tau):
                    long_u[tau] = H.U[tau]
                else:
                    a, b = tree.children(tau)
                    long_u[tau] = scipy.linalg.block_diag(long_u[a], long_u[b]) @ H.U[tau]
        allidx = np.arange(256)
        for tau in list(tree.nodes_at_level(1)) + list(tree.nodes_at_level(2)):
            own = tree.index_range(tau)
            comp = np.setdiff1d(allidx, own)
            block = A[np.ix_(own, comp)]
            proj = long_u[tau] @ A[np.ix_(H.skeleton[tau], comp)]
            assert np.linalg.norm(block - proj) <= 100 * tol * np.linalg.norm(A)


class TestMatvec:
    def test_identity(self):
        tree = build_uniform_tree(64, 8)
        H = compress_to_hbs(np.eye(64), tree, 1e-10)
        x = np.arange(64.0)
        assert np.allclose(hbs_matvec(H, x), x)

    def test_vs_dense(self):
        rng = np.random.default_rng(RNG_SEED)
        A = green_kernel_matrix(512) + np.eye(512)
        tree = build_uniform_tree(512, 32)
        H = compress_to_hbs(A, tree, 1e-12)
        x = rng.standard_normal(512)
        assert np.linalg.norm(hbs_matvec(H, x) - A @ x) <= 1e-9 * np.linalg.norm(A @ x)

    def test_linearity(self):
        rng = np.random.default_rng(RNG_SEED)
        A = green_kernel_matrix(128) + np.eye(128)
        tree = build_uniform_tree(128, 16)
        H = compress_to_hbs(A, tree, 1e-12)
        x, y = rng.standard_normal((2, 128))
        lhs = hbs_matvec(H, x + y)
        rhs = hbs_matvec(H, x) + hbs_matvec(H, y)
        assert np.max(np.abs(lhs - rhs)) <= 1e-13 * np.max(np.abs(lhs))


class TestInvert:
    def test_scaled_identity(self):
        tree = build_uniform_tree(48, 8)
        H = compress_to_hbs(3.0 * np.eye(48), tree, 1e-12)
        inv = hbs_invert(H)
        x = np.arange(48.0)
        assert np.allclose(inv.apply(x), x / 3.0)

    def test_depth_one_reduces_to_flat_pipeline(self):
        rng = np.random.default_rng(RNG_SEED)
        A = green_kernel_matrix(64) + np.eye(64)
        tree = build_uniform_tree(64, 32)  # depth 1: two leaves
        H = compress_to_hbs(A, tree, 1e-12)
        inv = hbs_invert(H)
        flat = compress_to_block_separable(
            A, [np.arange(0, 32), np.arange(32, 64)], 1e-12
        )
        u = rng.standard_normal(64)
        q_h = inv.apply(u)
        q_f = block_separable_inverse_apply(flat, u)
        assert np.linalg.norm(q_h - q_f) <= 1e-12 * np.linalg.norm(q_f)

    def test_flat_vs_two_level_agreement(self):
        # same matrix, 4-leaf tree vs flat 4-block partition
        rng = np.random.default_rng(RNG_SEED)
        A = green_kernel_matrix(128) + np.eye(128)
        tree = build_uniform_tree(128, 32)  # depth 2
        H = compress_to_hbs(A, tree, 1e-13)
        inv = hbs_invert(H)
        parts = [np.arange(i, i + 32) for i in range(0, 128, 32)]
        flat = compress_to_block_separable(A, parts, 1e-13)
        u = rng.standard_normal(128)
        assert np.linalg.norm(inv.apply(u) - block_separable_inverse_apply(flat, u)) <= (
            1e-11 * np.linalg.norm(u)
        )

    def test_bie_system_vs_dense_solve(self):
        N = 1024
        curve = make_curve("ellipse", N, 2.0, 1.0)
        charge = np.array([3.0, 1.5])
        f = laplace_fundamental(np.linalg.norm(curve.x - charge, axis=1))
        system = assemble_bie(curve, f)
        tree = build_uniform_tree(N, 64)
        H = compress_to_hbs(system.matrix, tree, 1e-10)
        inv = hbs_invert(H)
        sigma = inv.apply(system.rhs)
        sigma_ref = dense_lu_solve(system.matrix, system.rhs)
        assert np.linalg.norm(sigma - sigma_ref) <= 1e-8 * np.linalg.norm(sigma_ref)

    def test_condition_estimates_recorded(self):
        A = green_kernel_matrix(128) + np.eye(128)
        tree = build_uniform_tree(128, 32)
        inv = hbs_invert(compress_to_hbs(A, tree, 1e-12))
        nodes = [tau for tau in range(1, tree.nnodes + 1)]
        assert sorted(inv.cond_estimates) == nodes
        assert all(np.isfinite(c) and c >= 1.0 for c in inv.cond_estimates.values())

    @pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")
    def test_singular_intermediate_names_node_and_level(self):
        A = green_kernel_matrix(64) + np.eye(64)
        tree = build_uniform_tree(64, 8)
        H = compress_to_hbs(A, tree, 1e-12)
        leaf = next(iter(tree.leaves()))
        H.D[leaf] = np.zeros_like(H.D[leaf])
        with pytest.raises(SingularMatrixError, match=f"node {leaf}"):
            hbs_invert(H)


class TestApplyInverse:
    def test_identity_inverse(self):
        tree = build_uniform_tree(64, 8)
        H = compress_to_hbs(np.eye(64), tree, 1e-12)
        inv = hbs_invert(H)
        u = np.arange(64.0)
        assert np.allclose(hbs_apply_inverse(inv, u), u)

    def test_composition_identity(self):
        rng = np.random.default_rng(RNG_SEED)
        N = 1024
        A = green_kernel_matrix(N) + np.eye(N)
        tree = build_uniform_tree(N, 64)
        H = compress_to_hbs(A, tree, 1e-12)
        inv = hbs_invert(H)
        for _ in range(20):
            u = rng.standard_normal(N)
            q = hbs_apply_inverse(inv, hbs_matvec(H, u))
            assert np.linalg.norm(q - u) <= 1e-8 * np.linalg.norm(u)

    def test_zero_maps_to_zero(self):
        tree = build_uniform_tree(64, 8)
        H = compress_to_hbs(green_kernel_matrix(64) + np.eye(64), tree, 1e-12)
        inv = hbs_invert(H)
        assert np.allclose(inv.apply(np.zeros(64)), 0.0)

    def test_dimension_mismatch(self):
        tree = build_uniform_tree(64, 8)
        H = compress_to_hbs(np.eye(64), tree, 1e-12)
        inv = hbs_invert(H)
        with pytest.raises(ValueError):
            inv.apply(np.ones(63))


class TestStorage:
    def test_linear_growth_at_fixed_rank(self):
        s = {}
        for N in (1024, 2048):
            A = green_kernel_matrix(N) + np.eye(N)
            tree = build_uniform_tree(N, 32)
            H = compress_to_hbs(A, tree, 1e-12)
            s[N] = hbs_storage(H)["stored_scalars"]
        assert s[2048] / s[1024] <= 2.2

    def test_identity_leaf_storage_only(self):
        tree = build_uniform_tree(64, 8)
        H = compress_to_hbs(np.eye(64), tree, 1e-10)
        assert hbs_storage(H)["stored_scalars"] == 8 * 64

    def test_per_level_ranks_toward_root(self):
        A = green_kernel_matrix(512)
        tree = build_uniform_tree(512, 32)
        H = compress_to_hbs(A, tree, 1e-12)
        ranks = hbs_storage(H)["per_level_ranks"]
        levels = sorted(ranks)
        assert all(ranks[a] <= ranks[b] for a, b in zip(levels, levels[1:]))
