"""Quasi-orders on [1, n]: the combinatorial skeleton of a structural matrix algebra.

A quasi-order is a reflexive transitive relation rho on [1, n], stored as a
frozen set of 1-based index pairs.  Everything in this module is pure: values
are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

__all__ = [
    "QuasiOrder",
    "Partition",
    "BlockTriangularization",
    "closure",
    "close_pairs",
    "image",
    "preimage",
    "neighborhood",
    "components",
    "mutual_classes",
    "is_two_free",
    "condition_i",
    "is_symmetric",
    "block_triangular_permutation",
    "delete_indices",
    "rank_one_density",
    "rank_one_density_naive",
    "all_preorders",
    "random_preorder",
]


def _row_masks(n, pairs):
    """Adjacency rows as integer bitmasks; bit j-1 of rows[i-1] set iff (i,j) present."""
    rows = [0] * n
    for i, j in pairs:
        rows[i - 1] |= 1 << (j - 1)
    return rows


def close_pairs(n: int, pairs) -> frozenset:
    """Smallest reflexive-transitive superset of `pairs`, via Warshall on bitmask rows."""
    for i, j in pairs:
        if not (1 <= i <= n and 1 <= j <= n):
            raise ValueError(f"pair ({i},{j}) out of range for n={n}")
    rows = _row_masks(n, pairs)
    for i in range(n):
        rows[i] |= 1 << i
    for k in range(n):
        kbit = 1 << k
        krow = rows[k]
        for i in range(n):
            if rows[i] & kbit:
                rows[i] |= krow
    return frozenset(
        (i + 1, j + 1) for i in range(n) for j in range(n) if rows[i] >> j & 1
    )


@dataclass(frozen=True)
class QuasiOrder:
    """A reflexive transitive relation on [1, n] (1-based pairs)."""

    n: int
    pairs: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        object.__setattr__(self, "pairs", frozenset(map(tuple, self.pairs)))
        for i, j in self.pairs:
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValueError(f"pair ({i},{j}) out of range for n={self.n}")
        for i in range(1, self.n + 1):
            if (i, i) not in self.pairs:
                raise ValueError(f"not reflexive: missing ({i},{i})")
        rows = _row_masks(self.n, self.pairs)
        for i, j in self.pairs:
            # transitivity: row j must be contained in row i
            if rows[j - 1] & ~rows[i - 1]:
                k = (rows[j - 1] & ~rows[i - 1]).bit_length()
                raise ValueError(f"not transitive: ({i},{j}),({j},{k}) but not ({i},{k})")

    def __contains__(self, pair):
        return tuple(pair) in self.pairs

    def __len__(self):
        return len(self.pairs)

    @property
    def off_diagonal(self) -> frozenset:
        """rho^x = rho minus the diagonal."""
        return frozenset(p for p in self.pairs if p[0] != p[1])

    def row_masks(self):
        return _row_masks(self.n, self.pairs)

    @classmethod
    def diagonal(cls, n: int) -> "QuasiOrder":
        return cls(n, frozenset((i, i) for i in range(1, n + 1)))

    @classmethod
    def full(cls, n: int) -> "QuasiOrder":
        return cls(n, frozenset(itertools.product(range(1, n + 1), repeat=2)))

    @classmethod
    def upper_triangular(cls, n: int) -> "QuasiOrder":
        return cls(n, frozenset((i, j) for i in range(1, n + 1) for j in range(i, n + 1)))


@dataclass(frozen=True)
class Partition:
    """Disjoint index blocks covering [1, n]."""

    n: int
    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(frozenset(b) for b in self.blocks))
        seen = set()
        for b in self.blocks:
            if seen & b:
                raise ValueError("blocks are not pairwise disjoint")
            seen |= b
        if seen != set(range(1, self.n + 1)):
            raise ValueError("blocks do not cover [1, n]")

    def block_of(self, i: int) -> frozenset:
        for b in self.blocks:
            if i in b:
                return b
        raise KeyError(i)

    def __len__(self):
        return len(self.blocks)


def closure(n: int, pairs) -> QuasiOrder:
    """Load arbitrary pairs into a valid quasi-order by reflexive-transitive closure."""
    return QuasiOrder(n, close_pairs(n, pairs))


def _check_index(rho, i):
    if not (1 <= i <= rho.n):
        raise ValueError(f"index {i} out of range for n={rho.n}")


def image(rho: QuasiOrder, i: int) -> frozenset:
    """rho(i) = all j with (i,j) in rho."""
    _check_index(rho, i)
    return frozenset(j for (a, j) in rho.pairs if a == i)


def preimage(rho: QuasiOrder, i: int) -> frozenset:
    """rho^{-1}(i) = all j with (j,i) in rho."""
    _check_index(rho, i)
    return frozenset(j for (j, b) in rho.pairs if b == i)


def neighborhood(rho: QuasiOrder, i: int) -> frozenset:
    """rho(i) union rho^{-1}(i)."""
    return image(rho, i) | preimage(rho, i)


def _union_find_classes(n, edges):
    parent = list(range(n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups = {}
    for i in range(1, n + 1):
        groups.setdefault(find(i), set()).add(i)
    return [frozenset(g) for g in sorted(groups.values(), key=min)]


def components(rho: QuasiOrder) -> Partition:
    """Classes of the symmetrized-and-transitively-closed relation on [1, n]."""
    return Partition(rho.n, _union_find_classes(rho.n, rho.off_diagonal))


def mutual_classes(rho: QuasiOrder) -> Partition:
    """Classes of the mutual relation i ~ j iff both (i,j) and (j,i) lie in rho.

    This is already an equivalence (transitivity of rho closes it), and it is
    finer than `components`.
    """
    edges = [(i, j) for (i, j) in rho.off_diagonal if (j, i) in rho.pairs]
    return Partition(rho.n, _union_find_classes(rho.n, edges))


def is_two_free(rho: QuasiOrder) -> bool:
    """True iff no component class has exactly two elements."""
    return all(len(c) != 2 for c in components(rho).blocks)


def condition_i(rho: QuasiOrder):
    """Neighborhood-intersection criterion deciding whether every continuous
    injective commutativity-and-spectrum preserver on the algebra of `rho` is a
    Jordan embedding.

    Returns ``(True, None)`` when for every off-diagonal (i,j) in rho the sets
    rho(i) u rho^{-1}(i) and rho(j) u rho^{-1}(j) share at least 3 indices, else
    ``(False, (i,j))`` with the lexicographically first violating pair.
    """
    nbhd = {i: neighborhood(rho, i) for i in range(1, rho.n + 1)}
    for i, j in sorted(rho.off_diagonal):
        if len(nbhd[i] & nbhd[j]) < 3:
            return False, (i, j)
    return True, None


def is_symmetric(rho: QuasiOrder) -> bool:
    """True iff (i,j) in rho implies (j,i) in rho; equivalently the algebra is semisimple."""
    return all((j, i) in rho.pairs for (i, j) in rho.pairs)


@dataclass(frozen=True)
class BlockTriangularization:
    """A permutation placing the mutual classes of rho in block upper-triangular position.

    ``perm[t-1]`` is the original index sitting at new position t; with
    R_perm = sum_k E_{k, perm(k)}, conjugation A -> R A R^{-1} carries the
    algebra of rho between diag(M_{k_1},...,M_{k_p}) and the full block
    upper-triangular algebra with these block sizes.  ``upper_exact`` records
    whether the upper inclusion is an equality.
    """

    perm: tuple
    sizes: tuple
    upper_exact: bool


def block_triangular_permutation(rho: QuasiOrder) -> BlockTriangularization:
    """Group mutual classes contiguously along a linear extension of the class order.

    Kahn's algorithm with smallest-original-index-first tie-break, so the output
    is deterministic.  Both sandwich inclusions are re-verified on the permuted
    relation; a failure there raises RuntimeError (a bug, not bad input).
    """
    classes = list(mutual_classes(rho).blocks)
    idx_of = {}
    for c_idx, c in enumerate(classes):
        for i in c:
            idx_of[i] = c_idx
    succ = [set() for _ in classes]
    indeg = [0] * len(classes)
    seen = set()
    for i, j in rho.off_diagonal:
        a, b = idx_of[i], idx_of[j]
        if a != b and (a, b) not in seen:
            seen.add((a, b))
            succ[a].add(b)
            indeg[b] += 1
    ready = sorted((c_idx for c_idx in range(len(classes)) if indeg[c_idx] == 0),
                   key=lambda c_idx: min(classes[c_idx]))
    order = []
    while ready:
        c_idx = ready.pop(0)
        order.append(c_idx)
        for b in sorted(succ[c_idx], key=lambda x: min(classes[x])):
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)
        ready.sort(key=lambda x: min(classes[x]))
    if len(order) != len(classes):
        raise RuntimeError("class order contains a cycle across distinct mutual classes")

    perm = []
    sizes = []
    for c_idx in order:
        members = sorted(classes[c_idx])
        perm.extend(members)
        sizes.append(len(members))

    # verify: diag blocks inside the permuted relation, permuted relation inside
    # the block upper-triangular pattern
    pos = {orig: t for t, orig in enumerate(perm, start=1)}
    starts = []
    acc = 1
    for k in sizes:
        starts.append(acc)
        acc += k
    block_of_pos = {}
    for b, (s, k) in enumerate(zip(starts, sizes)):
        for t in range(s, s + k):
            block_of_pos[t] = b
    for s, k in zip(starts, sizes):
        for t, u in itertools.product(range(s, s + k), repeat=2):
            if (perm[t - 1], perm[u - 1]) not in rho.pairs:
                raise RuntimeError("sandwich failure: diagonal block not inside relation")
    count_upper = sum(
        ka * kb for a, ka in enumerate(sizes) for b, kb in enumerate(sizes) if a <= b
    )
    for i, j in rho.pairs:
        if block_of_pos[pos[i]] > block_of_pos[pos[j]]:
            raise RuntimeError("sandwich failure: relation escapes block upper-triangular pattern")
    return BlockTriangularization(tuple(perm), tuple(sizes), len(rho.pairs) == count_upper)


def delete_indices(rho: QuasiOrder, drop) -> QuasiOrder:
    """Quasi-order on [1, n-|drop|] obtained by deleting the indices in `drop`
    and reindexing the survivors order-preservingly."""
    drop = frozenset(drop)
    for i in drop:
        _check_index(rho, i)
    if len(drop) == rho.n:
        raise ValueError("cannot delete every index")
    keep = sorted(set(range(1, rho.n + 1)) - drop)
    kappa = {orig: new for new, orig in enumerate(keep, start=1)}
    pairs = frozenset(
        (kappa[i], kappa[j]) for (i, j) in rho.pairs if i not in drop and j not in drop
    )
    return QuasiOrder(rho.n - len(drop), pairs)


def rank_one_density(rho: QuasiOrder) -> bool:
    """Whether rank-one non-nilpotents are dense among the rank-one matrices of
    the algebra of rho.

    The defining criterion quantifies over pairs of subsets S, T with
    S x T inside rho; it collapses to the maximal T for each S:  with
    T_max(S) = intersection of rho(i) over i in S, a witness k in T_max(S)
    covering T_max(S) also covers every smaller T.  `rank_one_density_naive`
    scans all (S, T) pairs and is used to cross-check this reduction.
    """
    n = rho.n
    if n > 24:
        raise ValueError("exhaustive subset scan capped at n=24")
    rows = rho.row_masks()
    verdict_for_tmax = {}

    def tmax_ok(tmax):
        if tmax == 0:
            return True
        cached = verdict_for_tmax.get(tmax)
        if cached is None:
            cached = any(
                tmax >> k & 1 and tmax & ~rows[k] == 0 for k in range(n)
            )
            verdict_for_tmax[tmax] = cached
        return cached

    full = (1 << n) - 1
    for s_mask in range(1, 1 << n):
        tmax = full
        m = s_mask
        while m:
            k = (m & -m).bit_length() - 1
            tmax &= rows[k]
            m &= m - 1
        if not tmax_ok(tmax):
            return False
    return True


def rank_one_density_naive(rho: QuasiOrder) -> bool:
    """Direct scan over all nonempty S, T with S x T inside rho (small n only)."""
    n = rho.n
    if n > 12:
        raise ValueError("naive scan capped at n=12")
    rows = rho.row_masks()
    idx = range(n)
    for s_mask in range(1, 1 << n):
        for t_mask in range(1, 1 << n):
            if any(s_mask >> i & 1 and t_mask & ~rows[i] for i in idx):
                continue
            ok = any(
                all(rows[i] >> k & 1 for i in idx if s_mask >> i & 1)
                and all(rows[k] >> j & 1 for j in idx if t_mask >> j & 1)
                for k in idx
            )
            if not ok:
                return False
    return True


def all_preorders(n: int):
    """Yield every quasi-order on [1, n], by filtering off-diagonal subsets for closedness.

    Exponential in n(n-1); intended for n <= 4 (29 preorders on 3 points, 355 on 4).
    """
    off = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
    diag = frozenset((i, i) for i in range(1, n + 1))
    for mask in range(1 << len(off)):
        pairs = diag | frozenset(off[b] for b in range(len(off)) if mask >> b & 1)
        if close_pairs(n, pairs) == pairs:
            yield QuasiOrder(n, pairs)


def random_preorder(n: int, rng, p: float = 0.3) -> QuasiOrder:
    """Closure of a random off-diagonal pair set with inclusion probability p."""
    pairs = [
        (i, j)
        for i in range(1, n + 1)
        for j in range(1, n + 1)
        if i != j and rng.random() < p
    ]
    return closure(n, pairs)
