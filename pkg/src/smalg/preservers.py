"""Commutativity-and-spectrum preserver harness and explicit non-Jordan preservers.

When the neighborhood-intersection criterion fails at a pair (r,s), the algebra
of rho carries a continuous injective commutativity and spectrum preserver that
is not additive.  Two shapes occur: a full 2x2 central block at {r,s} twisted
by a phase map (the symmetric case), and a single strict pair (r,s) whose entry
is redrawn through the homogeneous kink f(u,v) = v min(1, |v/u|).  This module
builds those maps, a gallery of negative controls, and the seeded sampling
harness that grades any black-box map on the algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quasiorder import QuasiOrder, condition_i, image, preimage
from .matalg import (
    char_poly,
    flat,
    in_sma,
    lambda_matrix,
    matrix_unit,
    nearby_diagonalizable,
    project_sma,
    random_in_sma,
    sharp,
    sma_mask,
)

__all__ = [
    "MapUnderTest",
    "CounterexampleMap",
    "PropertyVerdict",
    "PreserverReport",
    "identity_map",
    "transpose_map",
    "gen_commuting_pair",
    "counterexample",
    "case2_kink",
    "commutes_criterion",
    "classify_unit_action",
    "remark_gallery",
    "verify_preserver",
    "GALLERY_KINDS",
]

GALLERY_KINDS = ("scaling", "det_twist", "diag_shift", "noninjective_jordan")


@dataclass
class MapUnderTest:
    """A total map on the algebra of `domain`, tagged for reporting."""

    domain: QuasiOrder
    eval: Callable[[np.ndarray], np.ndarray]
    label: str


@dataclass
class CounterexampleMap(MapUnderTest):
    r: int = 0
    s: int = 0
    case: int = 0  # 1 = full 2x2 central block, 2 = strict pair


def identity_map(rho: QuasiOrder) -> MapUnderTest:
    return MapUnderTest(rho, lambda X: np.array(X, dtype=complex), "identity")


def transpose_map(rho: QuasiOrder) -> MapUnderTest:
    return MapUnderTest(rho, lambda X: np.array(X, dtype=complex).T, "transpose")


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def gen_commuting_pair(rho: QuasiOrder, seed=0):
    """A commuting pair X = S D1 S^{-1}, Y = S D2 S^{-1} with S = I plus a small
    strictly-off-diagonal element of the algebra; both outputs are projected to
    the algebra exactly, leaving a commutator at roundoff level."""
    rng = _as_rng(seed)
    n = rho.n
    N = random_in_sma(rho, rng)
    np.fill_diagonal(N, 0.0)
    norm = np.linalg.norm(N)
    if norm > 0:
        N *= 0.5 / norm
    S = np.eye(n, dtype=complex) + N
    Sinv = project_sma(np.linalg.inv(S), rho)
    D1 = np.diag(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    D2 = np.diag(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    X = project_sma(S @ D1 @ Sinv, rho)
    Y = project_sma(S @ D2 @ Sinv, rho)
    return X, Y


def case2_kink(u: complex, v: complex) -> complex:
    """Continuous homogeneous map with injective sections: v when |u| <= |v|,
    else v |v/u|."""
    if abs(u) <= abs(v):
        return v
    return v * abs(v / u)


def _case1_block_twist(B: np.ndarray) -> np.ndarray:
    """Phase-twisted 2x2 map: multiplies the top-right entry by f(|c/b|) and the
    bottom-left by its conjugate, f(t) = exp(i pi / (t+1)); identity-like when
    the top-right entry vanishes."""
    a, b, c, d = B[0, 0], B[0, 1], B[1, 0], B[1, 1]
    if b == 0:
        return np.array([[a, 0.0], [c, d]], dtype=complex)
    fval = np.exp(1j * np.pi / (abs(c / b) + 1.0))
    return np.array([[a, b * fval], [c * np.conj(fval), d]], dtype=complex)


def counterexample(rho: QuasiOrder) -> CounterexampleMap:
    """A continuous injective commutativity and spectrum preserver on the
    algebra of rho that fails additivity; only exists (and is only built) when
    the neighborhood-intersection criterion fails.

    The witness pair is the lexicographically first violating (r,s); the map is
    the 2x2-block twist when (s,r) also lies in rho, else the strict-pair kink
    phi(X) = X off (r,s), with X_rs redrawn through case2_kink(X_ss - X_rr, X_rs).
    """
    ok, witness = condition_i(rho)
    if ok:
        raise ValueError("criterion holds: every such preserver is a Jordan embedding")
    r, s = witness
    n = rho.n
    if (s, r) in rho.pairs:
        for t in (r, s):
            if image(rho, t) != {r, s} or preimage(rho, t) != {r, s}:
                raise RuntimeError("violating symmetric pair is not a central 2x2 block")
        pair = sorted((r, s))
        rest = [t for t in range(1, n + 1) if t not in pair]

        def eval_case1(X):
            X = np.asarray(X, dtype=complex)
            block = flat(X, rest) if rest else X
            twisted = _case1_block_twist(block)
            if not rest:
                return twisted
            return sharp(twisted, rest) + sharp(flat(X, pair), pair)

        return CounterexampleMap(rho, eval_case1, f"case1-block({r},{s})", r, s, 1)

    if preimage(rho, r) != {r} or image(rho, s) != {s}:
        raise RuntimeError("violating strict pair does not isolate row r / column s")

    def eval_case2(X):
        out = np.array(X, dtype=complex)
        out[r - 1, s - 1] = case2_kink(X[s - 1, s - 1] - X[r - 1, r - 1], X[r - 1, s - 1])
        return out

    return CounterexampleMap(rho, eval_case2, f"case2-kink({r},{s})", r, s, 2)


def commutes_criterion(X, Y, rho: QuasiOrder, r: int, s: int, tol: float = 1e-9) -> bool:
    """Commutation test specialized to the strict-pair geometry: X and Y commute
    iff their (r,s)-punctured parts commute and
    (X_ss - X_rr) Y_rs = (Y_ss - Y_rr) X_rs."""
    if preimage(rho, r) != {r} or image(rho, s) != {s}:
        raise ValueError("pair (r,s) does not isolate row r / column s in rho")
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    X0 = X.copy()
    X0[r - 1, s - 1] = 0.0
    Y0 = Y.copy()
    Y0[r - 1, s - 1] = 0.0
    scale = max(1.0, float(np.linalg.norm(X)) * float(np.linalg.norm(Y)))
    base = np.linalg.norm(X0 @ Y0 - Y0 @ X0) <= tol * scale
    lhs = (X[s - 1, s - 1] - X[r - 1, r - 1]) * Y[r - 1, s - 1]
    rhs = (Y[s - 1, s - 1] - Y[r - 1, r - 1]) * X[r - 1, s - 1]
    return bool(base and abs(lhs - rhs) <= tol * scale)


def classify_unit_action(phi, rho: QuasiOrder, rel_tol: float = 1e-7):
    """Split rho into the pairs whose matrix unit maps parallel to itself versus
    to its transpose; both parts are returned as (verified) quasi-orders.

    Raises ValueError with a witness when some image is parallel to neither.
    """
    n = rho.n
    m_pairs, a_pairs = set(), set()
    for i, j in sorted(rho.off_diagonal):
        A = np.asarray(phi(matrix_unit(n, i, j)), dtype=complex)
        p, q = np.unravel_index(np.argmax(np.abs(A)), A.shape)
        val = A[p, q]
        residual = A.copy()
        residual[p, q] = 0.0
        if abs(val) == 0 or np.max(np.abs(residual)) > rel_tol * abs(val):
            raise ValueError(f"phi(E_{i}{j}) is parallel to no matrix unit")
        if (p + 1, q + 1) == (i, j):
            m_pairs.add((i, j))
        elif (p + 1, q + 1) == (j, i):
            a_pairs.add((i, j))
        else:
            raise ValueError(
                f"phi(E_{i}{j}) concentrates at {(p + 1, q + 1)}, not the pair or its flip")
    diag = frozenset((i, i) for i in range(1, n + 1))
    return QuasiOrder(n, diag | frozenset(m_pairs)), QuasiOrder(n, diag | frozenset(a_pairs))


def remark_gallery(rho: QuasiOrder, kind: str) -> MapUnderTest:
    """Named negative controls showing each preserver hypothesis is needed:
    `scaling` breaks spectrum, `det_twist` breaks commutativity (diagonal-rich
    rho), `diag_shift` breaks commutativity on the diagonal algebra, and
    `noninjective_jordan` truncates to the mutual part of a non-symmetric rho.
    """
    n = rho.n
    if kind == "scaling":
        return MapUnderTest(rho, lambda X: 2.0 * np.asarray(X, dtype=complex), "scaling-2x")

    if kind == "det_twist":
        anchors = [i for i in range(1, n + 1)
                   if any(j != i for j in image(rho, i) | preimage(rho, i))]
        if not anchors:
            raise ValueError("det_twist needs an index with an off-diagonal neighbor")
        i0 = anchors[0] - 1

        def eval_twist(X):
            out = np.array(X, dtype=complex)
            t = np.exp(np.linalg.det(out))
            out[i0, :] *= t
            out[:, i0] /= t
            return out

        return MapUnderTest(rho, eval_twist, f"det-twist@{i0 + 1}")

    if kind == "diag_shift":
        if rho.off_diagonal or n < 3:
            raise ValueError("diag_shift is the diagonal-algebra control (n >= 3)")

        def eval_shift(X):
            out = np.array(X, dtype=complex)
            out[1, n - 1] += X[0, 0]
            return out

        return MapUnderTest(rho, eval_shift, "diag-shift")

    if kind == "noninjective_jordan":
        from .quasiorder import is_symmetric

        if is_symmetric(rho):
            raise ValueError("truncation is injective on a symmetric rho")
        mutual = np.zeros((n, n), dtype=bool)
        for i, j in rho.pairs:
            if (j, i) in rho.pairs:
                mutual[i - 1, j - 1] = True

        def eval_trunc(X):
            return np.where(mutual, np.asarray(X, dtype=complex), 0.0)

        return MapUnderTest(rho, eval_trunc, "mutual-block-truncation")

    raise ValueError(f"unknown gallery kind {kind!r}; choose from {GALLERY_KINDS}")


@dataclass
class PropertyVerdict:
    ok: bool = True
    checked: int = 0
    witnesses: list = field(default_factory=list)

    def fail(self, witness, cap: int = 3):
        self.ok = False
        if len(self.witnesses) < cap:
            self.witnesses.append(witness)


@dataclass
class PreserverReport:
    label: str
    seed: int
    samples: int
    spectrum: PropertyVerdict
    commutativity: PropertyVerdict
    injectivity: PropertyVerdict
    additivity: PropertyVerdict
    homogeneity: PropertyVerdict

    @property
    def all_pass(self) -> bool:
        return all(v.ok for v in self._verdicts().values())

    def _verdicts(self):
        return {
            "spectrum": self.spectrum,
            "commutativity": self.commutativity,
            "injectivity": self.injectivity,
            "additivity": self.additivity,
            "homogeneity": self.homogeneity,
        }

    def to_dict(self) -> dict:
        def enc(x):
            if isinstance(x, np.ndarray):
                return [[[float(z.real), float(z.imag)] for z in row] for row in x]
            if isinstance(x, complex):
                return [float(x.real), float(x.imag)]
            if isinstance(x, (np.floating, np.integer)):
                return float(x)
            if isinstance(x, (list, tuple)):
                return [enc(y) for y in x]
            return x

        return {
            "label": self.label,
            "seed": self.seed,
            "samples": self.samples,
            "all_pass": self.all_pass,
            "properties": {
                name: {
                    "ok": v.ok,
                    "checked": v.checked,
                    "witnesses": [enc(w) for w in v.witnesses],
                }
                for name, v in self._verdicts().items()
            },
        }


def _poly_pair(rho, rng):
    X = random_in_sma(rho, rng)
    c = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    Y = c[0] * np.eye(rho.n) + c[1] * X + c[2] * X @ X
    return X, project_sma(Y, rho)


def verify_preserver(mut: MapUnderTest, n_samples: int = 1000, tol: float = 1e-8,
                     seed: int = 0, sample_scale: float = 1.0,
                     spectrum_tol: float | None = None,
                     commutator_tol: float | None = None,
                     batch: int = 128) -> PreserverReport:
    """Grade a map on sampled spectrum/commutativity/injectivity/additivity/
    homogeneity preservation.

    Spectrum is compared through characteristic polynomials on general and
    explicitly diagonalizable samples; commuting inputs alternate between
    conjugated diagonal pairs and (X, p(X)) pairs.  Deterministic probes (the
    identity, diag(1..n), per-pair unit combinations) run before the seeded
    batches, so structural failures do not depend on sampling luck.  Batches
    use independent generators keyed by (seed, batch index) and are merged in
    batch order; they carry no shared state and may run in parallel.
    """
    rho = mut.domain
    phi = mut.eval
    n = rho.n
    spectrum_tol = tol if spectrum_tol is None else spectrum_tol
    commutator_tol = tol if commutator_tol is None else commutator_tol
    rep = PreserverReport(mut.label, seed if isinstance(seed, int) else -1, n_samples,
                          PropertyVerdict(), PropertyVerdict(), PropertyVerdict(),
                          PropertyVerdict(), PropertyVerdict())

    def check_spectrum(X):
        rep.spectrum.checked += 1
        want = char_poly(X)
        got = char_poly(phi(X))
        scale = max(1.0, float(np.max(np.abs(want))))
        err = float(np.max(np.abs(got - want)))
        if not np.isfinite(err) or err > spectrum_tol * scale:
            rep.spectrum.fail((X, phi(X), err))

    def check_commuting(X, Y):
        rep.commutativity.checked += 1
        fX, fY = phi(X), phi(Y)
        scale = max(1.0, float(np.linalg.norm(fX)) * float(np.linalg.norm(fY)))
        err = float(np.linalg.norm(fX @ fY - fY @ fX))
        if not np.isfinite(err) or err > commutator_tol * scale:
            rep.commutativity.fail((X, Y, err))

    def check_injective(X, Y):
        if np.linalg.norm(X - Y) <= 1e-6:
            return
        rep.injectivity.checked += 1
        fX, fY = phi(X), phi(Y)
        sep = float(np.linalg.norm(fX - fY))
        if sep <= tol * max(1.0, float(np.linalg.norm(fX)), float(np.linalg.norm(fY))):
            rep.injectivity.fail((X, Y, sep))

    def check_additive(X, Y):
        rep.additivity.checked += 1
        fX, fY = phi(X), phi(Y)
        err = float(np.linalg.norm(phi(X + Y) - fX - fY))
        if not np.isfinite(err) or err > tol * max(1.0, np.linalg.norm(fX) + np.linalg.norm(fY)):
            rep.additivity.fail((X, Y, err))

    def check_homogeneous(X, alpha):
        rep.homogeneity.checked += 1
        fX = phi(X)
        err = float(np.linalg.norm(phi(alpha * X) - alpha * fX))
        if not np.isfinite(err) or err > tol * max(1.0, abs(alpha) * float(np.linalg.norm(fX))):
            rep.homogeneity.fail((X, alpha, err))

    # deterministic structural probes
    check_spectrum(np.eye(n, dtype=complex))
    check_spectrum(lambda_matrix(n))
    off = sorted(rho.off_diagonal)[:64]
    for i, j in off:
        E, F = matrix_unit(n, i, i), matrix_unit(n, i, j)
        check_additive(2.0 * E + F, F)
        check_injective(2.0 * E + F, F)
        if (j, i) in rho.pairs:
            check_additive(F, matrix_unit(n, j, i))

    done = 0
    b = 0
    while done < n_samples:
        take = min(batch, n_samples - done)
        rng = np.random.default_rng((seed, b))
        for t in range(take):
            X = random_in_sma(rho, rng, sample_scale)
            Y = random_in_sma(rho, rng, sample_scale)
            if t % 2 == 0:
                check_spectrum(X)
            else:
                nd = nearby_diagonalizable(X, rho, 1e-6)
                Xd = project_sma(nd.S @ np.diag(nd.eigenvalues) @ np.linalg.inv(nd.S), rho)
                check_spectrum(Xd)
            if t % 2 == 0:
                check_commuting(*gen_commuting_pair(rho, rng))
            else:
                check_commuting(*_poly_pair(rho, rng))
            check_injective(X, Y)
            if off:
                i, j = off[t % len(off)]
                c = complex(rng.standard_normal(), rng.standard_normal())
                check_injective(X, X + c * matrix_unit(n, i, j))
            check_additive(X, Y)
            alpha = complex(rng.standard_normal(), rng.standard_normal())
            check_homogeneous(X, alpha)
        done += take
        b += 1
    return rep
