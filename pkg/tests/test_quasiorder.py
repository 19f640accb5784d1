import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smalg.quasiorder import (
    BlockTriangularization,
    Partition,
    QuasiOrder,
    all_preorders,
    block_triangular_permutation,
    closure,
    components,
    condition_i,
    delete_indices,
    image,
    is_symmetric,
    is_two_free,
    mutual_classes,
    neighborhood,
    preimage,
    rank_one_density,
    rank_one_density_naive,
    random_preorder,
)


@st.composite
def preorders(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    pairs = draw(st.sets(
        st.tuples(st.integers(1, n), st.integers(1, n)), max_size=n * n))
    return closure(n, pairs)


def diag(n):
    return QuasiOrder.diagonal(n)


class TestConstruction:
    def test_reflexivity_enforced(self):
        with pytest.raises(ValueError, match="reflexive"):
            QuasiOrder(2, frozenset({(1, 1)}))

    def test_transitivity_enforced(self):
        with pytest.raises(ValueError, match="transitive"):
            QuasiOrder(3, frozenset({(1, 1), (2, 2), (3, 3), (1, 2), (2, 3)}))

    def test_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            closure(3, {(1, 4)})

    def test_closure_of_empty_is_diagonal(self):
        assert closure(3, set()) == diag(3)

    def test_closure_forces_composite(self):
        rho = closure(3, {(1, 2), (2, 3)})
        assert rho.pairs == diag(3).pairs | {(1, 2), (2, 3), (1, 3)}

    def test_already_closed_unchanged(self, cocycle7):
        assert closure(7, cocycle7.pairs) == cocycle7

    @given(preorders())
    def test_closure_idempotent(self, rho):
        assert closure(rho.n, rho.pairs) == rho


class TestImagePreimage:
    def test_cocycle7_neighborhood(self, cocycle7):
        assert neighborhood(cocycle7, 1) == {1, 3, 4, 5, 6, 7}

    def test_diagonal_image(self):
        assert image(diag(5), 3) == {3}
        assert preimage(diag(5), 3) == {3}

    def test_fan_image(self, fan4):
        assert image(fan4, 1) == {1, 3, 4}

    def test_out_of_range(self, fan4):
        with pytest.raises(ValueError):
            image(fan4, 5)


class TestComponents:
    def test_two_blocks(self, two_blocks6):
        assert set(components(two_blocks6).blocks) == {
            frozenset({1, 2, 3}), frozenset({4, 5, 6})}

    def test_diagonal_singletons(self):
        assert len(components(diag(4))) == 4

    def test_fan_single_class(self, fan4):
        assert components(fan4).blocks == (frozenset({1, 2, 3, 4}),)

    def test_partition_validation(self):
        with pytest.raises(ValueError):
            Partition(3, ({1, 2}, {2, 3}))
        with pytest.raises(ValueError):
            Partition(3, ({1, 2},))


class TestPredicates:
    def test_t2_not_two_free(self):
        assert not is_two_free(closure(2, {(1, 2)}))

    def test_diagonal_two_free(self):
        assert is_two_free(diag(5))

    def test_cocycle7_two_free(self, cocycle7):
        assert is_two_free(cocycle7)

    def test_condition_cocycle7(self, cocycle7):
        assert condition_i(cocycle7) == (True, None)

    def test_condition_fan_witness(self, fan4):
        holds, witness = condition_i(fan4)
        assert not holds and witness == (1, 3)
        assert neighborhood(fan4, 1) & neighborhood(fan4, 3) == {1, 3}

    def test_condition_diagonal_vacuous(self):
        assert condition_i(diag(6)) == (True, None)

    def test_symmetric(self, two_blocks6, cocycle7):
        assert is_symmetric(two_blocks6)
        assert not is_symmetric(closure(2, {(1, 2)}))
        assert not is_symmetric(cocycle7)  # (1,3) in, (3,1) out

    @pytest.mark.parametrize("n", [3, 4])
    def test_condition_implies_two_free(self, n):
        for rho in all_preorders(n):
            if condition_i(rho)[0]:
                assert is_two_free(rho), sorted(rho.off_diagonal)


def conjugated(rho, perm):
    return frozenset(
        (perm.index(i) + 1, perm.index(j) + 1) for (i, j) in rho.pairs)


def check_sandwich(rho, bt):
    """Diagonal blocks inside the permuted relation, relation inside the block
    upper-triangular pattern."""
    perm, sizes = bt.perm, bt.sizes
    rel = conjugated(rho, list(perm))
    start = 1
    spans = []
    for k in sizes:
        spans.append(range(start, start + k))
        start += k
    for sp in spans:
        for t, u in itertools.product(sp, sp):
            assert (t, u) in rel
    block_of = {t: b for b, sp in enumerate(spans) for t in sp}
    for t, u in rel:
        assert block_of[t] <= block_of[u]
    full = sum(ka * kb for a, ka in enumerate(sizes)
               for b, kb in enumerate(sizes) if a <= b)
    assert bt.upper_exact == (len(rel) == full)


class TestBlockTriangular:
    def test_upper_pattern_identity(self, cocycle7):
        bt = block_triangular_permutation(cocycle7)
        assert bt.perm == (1, 2, 3, 4, 5, 6, 7)
        assert bt.sizes == (1,) * 7

    def test_two_blocks(self, two_blocks6):
        bt = block_triangular_permutation(two_blocks6)
        assert bt.perm == (1, 2, 3, 4, 5, 6)
        assert bt.sizes == (3, 3)
        assert not bt.upper_exact  # no cross block, so strictly smaller

    def test_reversed_pair_swaps(self):
        bt = block_triangular_permutation(closure(3, {(2, 1)}))
        assert bt.perm == (2, 1, 3)
        assert bt.sizes == (1, 1, 1)

    def test_full_matrix_exact(self):
        bt = block_triangular_permutation(QuasiOrder.full(3))
        assert bt.sizes == (3,) and bt.upper_exact

    def test_upper_triangular_exact(self):
        assert block_triangular_permutation(QuasiOrder.upper_triangular(4)).upper_exact

    @given(preorders())
    @settings(max_examples=60)
    def test_sandwich_always_holds(self, rho):
        check_sandwich(rho, block_triangular_permutation(rho))

    def test_mutual_classes_refine_components(self, cocycle7, two_blocks6):
        assert len(mutual_classes(cocycle7)) == 7
        assert mutual_classes(two_blocks6).blocks == components(two_blocks6).blocks


class TestDeleteIndices:
    def test_chain_becomes_pair(self):
        rho = closure(3, {(1, 3)})
        assert delete_indices(rho, {2}).pairs == closure(2, {(1, 2)}).pairs

    def test_empty_delete_is_identity(self, fan4):
        assert delete_indices(fan4, set()) == fan4

    def test_keep_three_of_seven(self, cocycle7):
        kept = delete_indices(cocycle7, {4, 5})
        # survivors 1,2,3,6,7 reindex to 1,2,3,4,5
        kappa = {1: 1, 2: 2, 3: 3, 6: 4, 7: 5}
        expected = frozenset(
            (kappa[i], kappa[j]) for (i, j) in cocycle7.pairs
            if i not in (4, 5) and j not in (4, 5))
        assert kept.pairs == expected

    def test_cannot_delete_all(self, fan4):
        with pytest.raises(ValueError):
            delete_indices(fan4, {1, 2, 3, 4})

    @given(preorders(), st.data())
    @settings(max_examples=60)
    def test_result_is_quasiorder(self, rho, data):
        if rho.n == 1:
            return
        drop = data.draw(st.sets(st.integers(1, rho.n), max_size=rho.n - 1))
        delete_indices(rho, drop)  # constructor re-validates reflexive+transitive


class TestRankOneDensity:
    def test_fan_fails(self, fan4):
        assert not rank_one_density(fan4)

    def test_full_holds(self):
        assert rank_one_density(QuasiOrder.full(5))

    def test_upper_triangular_holds(self):
        assert rank_one_density(QuasiOrder.upper_triangular(3))

    def test_reduction_matches_naive_scan(self):
        for rho in all_preorders(4):
            assert rank_one_density(rho) == rank_one_density_naive(rho)

    def test_reduction_matches_naive_random_n6(self, rng):
        for k in range(25):
            rho = random_preorder(6, rng, p=0.25)
            assert rank_one_density(rho) == rank_one_density_naive(rho)

    def test_size_guard(self):
        with pytest.raises(ValueError):
            rank_one_density(diag(25))


class TestCensus:
    def test_counts(self):
        assert len(list(all_preorders(1))) == 1
        assert len(list(all_preorders(2))) == 4
        assert len(list(all_preorders(3))) == 29

    def test_all_valid_and_distinct(self):
        seen = set()
        for rho in all_preorders(3):
            assert rho.pairs not in seen
            seen.add(rho.pairs)
