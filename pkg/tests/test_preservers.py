import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smalg.quasiorder import QuasiOrder, all_preorders, condition_i
from smalg.matalg import char_poly, in_sma, matrix_unit, random_in_sma
from smalg.cocycle import TransitiveMap
from smalg.jordan import CentralIdempotent, JordanSpec, build_embedding
from smalg.preservers import (
    GALLERY_KINDS,
    case2_kink,
    classify_unit_action,
    commutes_criterion,
    counterexample,
    gen_commuting_pair,
    identity_map,
    remark_gallery,
    transpose_map,
    verify_preserver,
)

complexes = st.complex_numbers(allow_nan=False, allow_infinity=False,
                               min_magnitude=0.0, max_magnitude=1e6)


class TestCommutingPairs:
    def test_diagonal_algebra(self):
        X, Y = gen_commuting_pair(QuasiOrder.diagonal(5), 0)
        assert np.array_equal(X, np.diag(np.diag(X)))
        assert np.linalg.norm(X @ Y - Y @ X) < 1e-14

    def test_membership_exact_and_commutator_small(self, cocycle7):
        for seed in range(200):
            X, Y = gen_commuting_pair(cocycle7, seed)
            assert in_sma(X, cocycle7, tol=0.0)
            assert in_sma(Y, cocycle7, tol=0.0)
            scale = max(1.0, float(np.linalg.norm(X)) * float(np.linalg.norm(Y)))
            assert np.linalg.norm(X @ Y - Y @ X) < 1e-10 * scale


class TestKink:
    def test_pinned_values(self):
        assert case2_kink(0, 1 + 0j) == 1
        assert case2_kink(-2, 1) == 0.5
        assert case2_kink(0, 5j) == 5j

    @given(complexes, complexes, st.floats(1e-6, 1e6))
    @settings(max_examples=300)
    def test_homogeneous_and_contractive(self, u, v, t):
        f = case2_kink(u, v)
        assert abs(f) <= abs(v) * (1 + 1e-12)
        ft = case2_kink(t * u, t * v)
        assert abs(ft - t * f) <= 1e-9 * max(1.0, abs(t * f))

    @given(complexes, complexes, complexes)
    @settings(max_examples=200)
    def test_injective_sections(self, u, v, w):
        if abs(v - w) < 1e-9 * max(1.0, abs(v), abs(w)):
            return
        fv, fw = case2_kink(u, v), case2_kink(u, w)
        assert fv != fw


class TestCounterexample:
    def test_refuses_good_patterns(self, cocycle7):
        with pytest.raises(ValueError, match="Jordan embedding"):
            counterexample(cocycle7)

    def test_fan_case2(self, fan4):
        mut = counterexample(fan4)
        assert (mut.case, mut.r, mut.s) == (2, 1, 3)
        E11, E13 = matrix_unit(4, 1, 1), matrix_unit(4, 1, 3)
        assert np.array_equal(mut.eval(2 * E11 + E13), 2 * E11 + 0.5 * E13)
        assert np.array_equal(mut.eval(E13), E13)
        assert np.array_equal(mut.eval(2 * E11 + 2 * E13), 2 * E11 + 2 * E13)

    def test_sympair_case1_witness(self, sympair3):
        mut = counterexample(sympair3)
        assert (mut.case, mut.r, mut.s) == (1, 1, 2)
        E12, E21 = matrix_unit(3, 1, 2), matrix_unit(3, 2, 1)
        # f(0) = -1 and f(1) = i
        assert np.allclose(mut.eval(E12), -E12)
        assert np.array_equal(mut.eval(E21), E21)
        assert np.allclose(mut.eval(E12 + E21), 1j * E12 - 1j * E21)
        assert np.linalg.norm(
            mut.eval(E12) + mut.eval(E21) - mut.eval(E12 + E21)) > 1

    def test_full_2x2_block_is_whole_algebra(self):
        # n = 2: the twisted block is the entire matrix, nothing to carry along
        rho = QuasiOrder.full(2)
        mut = counterexample(rho)
        assert mut.case == 1 and (mut.r, mut.s) == (1, 2)
        E12 = matrix_unit(2, 1, 2)
        assert np.allclose(mut.eval(E12), -E12)
        rep = verify_preserver(mut, n_samples=200, tol=1e-8, seed=0)
        assert rep.spectrum.ok and rep.commutativity.ok and not rep.additivity.ok

    def test_case2_spectrum_identity_exact(self, fan4, rng):
        # the redrawn entry never enters the characteristic polynomial
        mut = counterexample(fan4)
        for _ in range(200):
            X = random_in_sma(fan4, rng)
            assert np.max(np.abs(char_poly(mut.eval(X)) - char_poly(X))) < 1e-12 * max(
                1.0, float(np.max(np.abs(char_poly(X)))))

    def test_case1_spectrum_and_commutativity(self, sympair3):
        mut = counterexample(sympair3)
        rep = verify_preserver(mut, n_samples=500, tol=1e-8, seed=0,
                               spectrum_tol=1e-12)
        assert rep.spectrum.ok and rep.commutativity.ok and rep.injectivity.ok
        assert not rep.additivity.ok and rep.additivity.witnesses

    def test_every_failing_preorder_n3(self):
        for rho in all_preorders(3):
            holds, _ = condition_i(rho)
            if holds:
                continue
            mut = counterexample(rho)
            rep = verify_preserver(mut, n_samples=100, tol=1e-8, seed=0)
            assert rep.spectrum.ok and rep.commutativity.ok
            assert not rep.additivity.ok, sorted(rho.off_diagonal)


class TestCommutesCriterion:
    def test_self_commutes(self, fan4, rng):
        X = random_in_sma(fan4, rng)
        assert commutes_criterion(X, X, fan4, 1, 3)

    def test_agrees_with_direct_commutator(self, fan4, rng):
        mismatches = 0
        for k in range(10_000):
            if k % 3 == 0:
                X, Y = gen_commuting_pair(fan4, k)
            else:
                X, Y = random_in_sma(fan4, rng), random_in_sma(fan4, rng)
            direct = np.linalg.norm(X @ Y - Y @ X) <= 1e-9 * max(
                1.0, float(np.linalg.norm(X)) * float(np.linalg.norm(Y)))
            if commutes_criterion(X, Y, fan4, 1, 3) != direct:
                mismatches += 1
        assert mismatches == 0

    def test_known_noncommuting_pair(self, fan4):
        X = 2 * matrix_unit(4, 1, 1) + matrix_unit(4, 1, 3)
        Y = matrix_unit(4, 1, 3)
        assert not commutes_criterion(X, Y, fan4, 1, 3)
        assert np.linalg.norm(X @ Y - Y @ X) > 1

    def test_structural_precondition(self, sympair3, rng):
        X = random_in_sma(sympair3, rng)
        with pytest.raises(ValueError, match="isolate"):
            commutes_criterion(X, X, sympair3, 1, 2)


class TestClassifyUnits:
    def test_identity(self, fan4):
        rm, ra = classify_unit_action(lambda X: np.array(X), fan4)
        assert rm == fan4
        assert ra == QuasiOrder.diagonal(4)

    def test_transpose_on_symmetric(self, two_blocks6):
        rm, ra = classify_unit_action(lambda X: np.array(X).T, two_blocks6)
        assert rm == QuasiOrder.diagonal(6)
        assert ra == two_blocks6

    def test_block_embedding_split_is_quasiorder(self, two_blocks6):
        P = CentralIdempotent((1, 1, 1, 0, 0, 0))
        phi = build_embedding(JordanSpec(
            two_blocks6, np.eye(6, dtype=complex),
            TransitiveMap.constant_one(two_blocks6), P))
        rm, ra = classify_unit_action(phi, two_blocks6)
        block1 = {(i, j) for i in range(1, 4) for j in range(1, 4) if i != j}
        block2 = {(i, j) for i in range(4, 7) for j in range(4, 7) if i != j}
        assert rm.off_diagonal == frozenset(block1)
        assert ra.off_diagonal == frozenset(block2)

    def test_built_embeddings_always_split_into_quasiorders(self, rng):
        from smalg.quasiorder import random_preorder
        from smalg.jordan import central_idempotents
        from smalg.matalg import random_invertible
        from smalg.cocycle import random_transitive

        done = 0
        for k in range(40):
            rho = random_preorder(5, rng, p=0.35)
            if not condition_i(rho)[0]:
                continue
            idems = central_idempotents(rho)
            spec = JordanSpec(rho, random_invertible(5, rng, max_cond=50),
                              random_transitive(rho, k),
                              idems[int(rng.integers(0, len(idems)))])
            # psi = S^{-1} phi S keeps unit images parallel to units
            phi = build_embedding(spec)
            Sinv = np.linalg.inv(spec.S)
            rm, ra = classify_unit_action(lambda X: Sinv @ phi(X) @ spec.S, rho)
            assert rm.pairs | ra.pairs == rho.pairs
            assert rm.pairs & ra.pairs == QuasiOrder.diagonal(5).pairs
            done += 1
        assert done > 5

    def test_non_parallel_image_rejected(self, fan4):
        def phi(X):
            out = np.array(X, dtype=complex)
            out[0, 2] += out[0, 3]  # smear E_14 onto (1,3)
            out[0, 3] = out[0, 2]
            return out

        with pytest.raises(ValueError, match="parallel"):
            classify_unit_action(phi, fan4)


class TestGallery:
    def test_scaling_breaks_spectrum_only(self, fan4):
        rep = verify_preserver(remark_gallery(fan4, "scaling"), n_samples=200, seed=0)
        assert not rep.spectrum.ok and rep.spectrum.witnesses
        assert rep.commutativity.ok and rep.injectivity.ok
        assert rep.additivity.ok and rep.homogeneity.ok

    def test_det_twist_breaks_commutativity(self):
        t3 = QuasiOrder.upper_triangular(3)
        rep = verify_preserver(remark_gallery(t3, "det_twist"),
                               n_samples=300, seed=0, sample_scale=0.5)
        assert rep.spectrum.ok
        assert not rep.commutativity.ok and rep.commutativity.witnesses
        assert rep.injectivity.ok

    def test_diag_shift_linear_spectrum_preserver(self):
        d4 = QuasiOrder.diagonal(4)
        mut = remark_gallery(d4, "diag_shift")
        rep = verify_preserver(mut, n_samples=300, seed=0)
        assert rep.spectrum.ok and rep.injectivity.ok
        assert rep.additivity.ok and rep.homogeneity.ok
        assert not rep.commutativity.ok
        # linear but not Jordan: squares disagree
        X = np.diag([1.0, 2.0, 3.0, 4.0]).astype(complex)
        fX = mut.eval(X)
        assert np.linalg.norm(mut.eval(X @ X) - fX @ fX) > 0.1

    def test_noninjective_jordan_on_t2(self):
        t2 = QuasiOrder.upper_triangular(2)
        mut = remark_gallery(t2, "noninjective_jordan")
        assert not np.any(mut.eval(matrix_unit(2, 1, 2)))
        rep = verify_preserver(mut, n_samples=300, seed=0)
        assert rep.spectrum.ok and rep.commutativity.ok
        assert not rep.injectivity.ok and rep.injectivity.witnesses
        assert rep.additivity.ok
        from smalg.jordan import verify_jordan
        assert verify_jordan(mut.eval, t2, n_samples=200).jordan_ok

    @pytest.mark.parametrize("kind,rho_builder", [
        ("det_twist", lambda: QuasiOrder.diagonal(4)),
        ("diag_shift", lambda: QuasiOrder.upper_triangular(3)),
        ("noninjective_jordan", lambda: QuasiOrder.full(3)),
    ])
    def test_inapplicable_kinds_raise(self, kind, rho_builder):
        with pytest.raises(ValueError):
            remark_gallery(rho_builder(), kind)

    def test_unknown_kind(self, fan4):
        with pytest.raises(ValueError, match="unknown"):
            remark_gallery(fan4, "nonsense")


class TestHarness:
    def test_identity_all_pass(self, cocycle7):
        rep = verify_preserver(identity_map(cocycle7), n_samples=200, seed=0)
        assert rep.all_pass
        for verdict in rep._verdicts().values():
            assert verdict.checked > 0 and not verdict.witnesses

    def test_transpose_passes_on_symmetric(self, two_blocks6):
        rep = verify_preserver(transpose_map(two_blocks6), n_samples=200, seed=0)
        assert rep.all_pass

    def test_determinism(self, fan4):
        a = verify_preserver(counterexample(fan4), n_samples=150, seed=3).to_dict()
        b = verify_preserver(counterexample(fan4), n_samples=150, seed=3).to_dict()
        assert a == b

    def test_report_serializes(self, fan4):
        import json

        rep = verify_preserver(counterexample(fan4), n_samples=100, seed=0)
        blob = json.dumps(rep.to_dict(), sort_keys=True)
        assert "additivity" in blob and not rep.all_pass
