"""Jordan embeddings of structural matrix algebras.

Every Jordan embedding of the algebra of rho into M_n is conjugation by an
invertible S of a map that scales entries by a transitive map g and transposes
the part cut out by the complement of a central idempotent P:

    phi(X) = S (P g*(X) + (I - P) g*(X)^t) S^{-1}.

This module constructs such maps from their (S, g, P) data, verifies the
Jordan/multiplicativity properties of arbitrary black-box maps by seeded
sampling, and recovers the (S, g, P) data from a black-box preserver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quasiorder import QuasiOrder, components, condition_i
from .matalg import in_sma, lambda_matrix, matrix_unit, random_in_sma
from .cocycle import TransitiveMap, induced_auto, validate as validate_transitive

__all__ = [
    "CentralIdempotent",
    "JordanSpec",
    "RecoveryError",
    "central_idempotents",
    "is_central",
    "validate_spec",
    "build_embedding",
    "JordanVerification",
    "verify_jordan",
    "verify_multiplicative",
    "verify_antimultiplicative",
    "RecoveredForm",
    "recover_form",
]


class RecoveryError(RuntimeError):
    """The black-box map does not expose the structure needed for recovery."""


@dataclass(frozen=True)
class CentralIdempotent:
    """Diagonal 0/1 matrix constant on the component classes of its quasi-order."""

    diag_bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.diag_bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("diagonal bits must be 0 or 1")
        object.__setattr__(self, "diag_bits", bits)

    def matrix(self) -> np.ndarray:
        return np.diag(np.array(self.diag_bits, dtype=complex))

    def complement(self) -> "CentralIdempotent":
        return CentralIdempotent(tuple(1 - b for b in self.diag_bits))


def is_central(P: CentralIdempotent, rho: QuasiOrder) -> bool:
    """Literal check that P commutes with every matrix unit of the algebra."""
    Pm = P.matrix()
    for i, j in rho.pairs:
        E = matrix_unit(rho.n, i, j)
        if np.any(Pm @ E != E @ Pm):
            return False
    return True


def central_idempotents(rho: QuasiOrder) -> list:
    """All central idempotents of the algebra of rho: the 0/1 diagonals constant
    on component classes, 2^(number of classes) in total."""
    classes = components(rho).blocks
    if len(classes) > 20:
        raise ValueError("more than 20 component classes; enumeration refused")
    out = []
    for mask in range(1 << len(classes)):
        bits = [0] * rho.n
        for c, block in enumerate(classes):
            if mask >> c & 1:
                for i in block:
                    bits[i - 1] = 1
        P = CentralIdempotent(tuple(bits))
        # centrality is equivalent to constancy across each pair of rho
        assert all(bits[i - 1] == bits[j - 1] for i, j in rho.pairs)
        out.append(P)
    return out


@dataclass(frozen=True)
class JordanSpec:
    """Parameters (rho, S, g, P) of a Jordan embedding."""

    rho: QuasiOrder
    S: np.ndarray
    g: TransitiveMap
    P: CentralIdempotent

    @property
    def cond(self) -> float:
        return float(np.linalg.cond(self.S))


def validate_spec(spec: JordanSpec, tol: float = 1e-10) -> None:
    S = np.asarray(spec.S, dtype=complex)
    n = spec.rho.n
    if S.shape != (n, n):
        raise ValueError("S has the wrong shape")
    if not np.isfinite(np.linalg.cond(S)) or np.linalg.cond(S) > 1e12:
        raise ValueError("S is not (numerically) invertible")
    if spec.g.rho != spec.rho:
        raise ValueError("transitive map is defined on a different quasi-order")
    ok, violation = validate_transitive(spec.g, tol=max(tol, 1e-10))
    if not ok:
        raise ValueError(f"transitive map violates the cocycle law at {violation}")
    if len(spec.P.diag_bits) != n:
        raise ValueError("idempotent has the wrong length")
    bits = spec.P.diag_bits
    for i, j in spec.rho.pairs:
        if bits[i - 1] != bits[j - 1]:
            raise ValueError(f"idempotent is not central: bits differ on pair ({i},{j})")


def build_embedding(spec: JordanSpec):
    """The Jordan embedding X -> S (P g*(X) + (I-P) g*(X)^t) S^{-1}."""
    validate_spec(spec)
    S = np.asarray(spec.S, dtype=complex)
    Sinv = np.linalg.inv(S)
    Pm = spec.P.matrix()
    Qm = np.eye(spec.rho.n, dtype=complex) - Pm
    gstar = induced_auto(spec.g)

    def phi(X):
        Y = gstar(X)
        return S @ (Pm @ Y + Qm @ Y.T) @ Sinv

    return phi


@dataclass
class JordanVerification:
    """Sampled verdicts for a black-box map on the algebra of rho."""

    additivity_ok: bool
    homogeneity_ok: bool
    jordan_ok: bool
    injectivity_ok: bool
    samples: int
    witnesses: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.additivity_ok and self.homogeneity_ok
                and self.jordan_ok and self.injectivity_ok)


def verify_jordan(phi, rho: QuasiOrder, n_samples: int = 1000,
                  tol: float = 1e-8, seed: int = 0) -> JordanVerification:
    """Sample additivity, homogeneity, the square identity phi(X^2) = phi(X)^2,
    and pairwise output separation of distinct inputs."""
    rng = np.random.default_rng(seed)
    add_ok = hom_ok = jor_ok = inj_ok = True
    witnesses = []

    def record(kind, *payload):
        if len(witnesses) < 8:
            witnesses.append((kind,) + payload)

    for _ in range(n_samples):
        X = random_in_sma(rho, rng)
        Y = random_in_sma(rho, rng)
        alpha = complex(rng.standard_normal(), rng.standard_normal())
        fX, fY = phi(X), phi(Y)
        scale = max(1.0, float(np.linalg.norm(fX)), float(np.linalg.norm(fY)))
        if np.linalg.norm(phi(X + Y) - fX - fY) > tol * scale:
            if add_ok:
                record("additivity", X, Y)
            add_ok = False
        if np.linalg.norm(phi(alpha * X) - alpha * fX) > tol * scale * max(1.0, abs(alpha)):
            if hom_ok:
                record("homogeneity", X, alpha)
            hom_ok = False
        if np.linalg.norm(phi(X @ X) - fX @ fX) > tol * max(1.0, float(np.linalg.norm(fX)) ** 2):
            if jor_ok:
                record("jordan", X)
            jor_ok = False
        if np.linalg.norm(X - Y) > 1e-6 and np.linalg.norm(fX - fY) <= tol * scale:
            if inj_ok:
                record("injectivity", X, Y)
            inj_ok = False
    return JordanVerification(add_ok, hom_ok, jor_ok, inj_ok, n_samples, witnesses)


def _verify_product_rule(phi, rho, reverse, n_samples, tol, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n_samples):
        X = random_in_sma(rho, rng)
        Y = random_in_sma(rho, rng)
        fX, fY = phi(X), phi(Y)
        want = fY @ fX if reverse else fX @ fY
        got = phi(X @ Y)
        if np.linalg.norm(got - want) > tol * max(1.0, float(np.linalg.norm(want))):
            return False, (X, Y)
    return True, None


def verify_multiplicative(phi, rho: QuasiOrder, n_samples: int = 200,
                          tol: float = 1e-8, seed: int = 0):
    """Sampled check of phi(XY) = phi(X)phi(Y); returns (ok, witness_pair)."""
    return _verify_product_rule(phi, rho, False, n_samples, tol, seed)


def verify_antimultiplicative(phi, rho: QuasiOrder, n_samples: int = 200,
                              tol: float = 1e-8, seed: int = 0):
    """Sampled check of phi(XY) = phi(Y)phi(X); returns (ok, witness_pair)."""
    return _verify_product_rule(phi, rho, True, n_samples, tol, seed)


@dataclass
class RecoveredForm:
    spec: JordanSpec
    rho_m: QuasiOrder
    rho_a: QuasiOrder
    max_unit_error: float
    max_sample_error: float


def _gauge_columns(V):
    """Rotate each column so its first significant entry is positive real."""
    W = V.copy()
    for k in range(W.shape[1]):
        col = W[:, k]
        idx = np.nonzero(np.abs(col) > 1e-8 * np.max(np.abs(col)))[0]
        z = col[idx[0]]
        W[:, k] = col * (abs(z) / z)
    return W


def recover_form(phi, rho: QuasiOrder, tol: float = 1e-8,
                 n_samples: int = 100, seed: int = 0) -> RecoveredForm:
    """Recover (S, g, P) from a black-box preserver on an algebra satisfying the
    neighborhood-intersection criterion.

    S diagonalizes phi(diag(1..n)) with eigenvalue k in column k; reading
    S^{-1} phi(E_ij) S on the matrix units splits rho into the identity-like and
    transpose-like parts and yields g; P marks the indices touched by the
    identity-like part.  The rebuilt map is compared against phi on all matrix
    units and on random samples, and the recovery fails loudly on mismatch.
    """
    ok, witness = condition_i(rho)
    if not ok:
        raise ValueError(f"quasi-order fails the neighborhood criterion at {witness}")
    n = rho.n

    M = phi(lambda_matrix(n))
    w, V = np.linalg.eig(M)
    cols = []
    used = set()
    for k in range(1, n + 1):
        cand = [(abs(w[a] - k), a) for a in range(n) if a not in used]
        err, a = min(cand)
        if err > 1e-6:
            raise RecoveryError(
                f"phi(diag(1..n)) has no eigenvalue near {k} (spectrum not preserved?)")
        used.add(a)
        cols.append(a)
    S = _gauge_columns(V[:, cols])
    Sinv = np.linalg.inv(S)

    def psi(X):
        return Sinv @ phi(X) @ S

    rel_tol = 1e-7
    m_pairs, a_pairs = set(), set()
    gvals = {}
    for i, j in sorted(rho.off_diagonal):
        A = psi(matrix_unit(n, i, j))
        p, q = np.unravel_index(np.argmax(np.abs(A)), A.shape)
        val = A[p, q]
        if abs(val) <= rel_tol:
            raise RecoveryError(f"psi(E_{i}{j}) is numerically zero")
        residual = A.copy()
        residual[p, q] = 0.0
        if np.max(np.abs(residual)) > rel_tol * abs(val):
            raise RecoveryError(
                f"psi(E_{i}{j}) is parallel to no matrix unit (dominant at {(p + 1, q + 1)})")
        if (p + 1, q + 1) == (i, j):
            m_pairs.add((i, j))
        elif (p + 1, q + 1) == (j, i):
            a_pairs.add((i, j))
        else:
            raise RecoveryError(
                f"psi(E_{i}{j}) concentrates at {(p + 1, q + 1)}, not at ({i},{j}) or ({j},{i})")
        gvals[(i, j)] = val

    diag = frozenset((i, i) for i in range(1, n + 1))
    try:
        rho_m = QuasiOrder(n, diag | frozenset(m_pairs))
        rho_a = QuasiOrder(n, diag | frozenset(a_pairs))
    except ValueError as exc:
        raise RecoveryError(f"unit classification is not a quasi-order: {exc}") from exc
    g = TransitiveMap(rho, gvals)
    ok, violation = validate_transitive(g, tol=1e-6)
    if not ok:
        raise RecoveryError(f"recovered scalars violate the cocycle law at {violation}")

    bits = [0] * n
    for i, j in m_pairs:
        bits[i - 1] = 1
        bits[j - 1] = 1
    P = CentralIdempotent(tuple(bits))
    spec = JordanSpec(rho, S, g, P)
    try:
        rebuilt = build_embedding(spec)
    except ValueError as exc:
        raise RecoveryError(f"recovered parameters are inconsistent: {exc}") from exc

    unit_err = 0.0
    for i, j in sorted(rho.pairs):
        E = matrix_unit(n, i, j)
        unit_err = max(unit_err, float(np.linalg.norm(rebuilt(E) - phi(E))))
    rng = np.random.default_rng(seed)
    sample_err = 0.0
    for _ in range(n_samples):
        X = random_in_sma(rho, rng)
        diff = np.linalg.norm(rebuilt(X) - phi(X)) / max(1.0, float(np.linalg.norm(X)))
        sample_err = max(sample_err, float(diff))
    if unit_err > tol or sample_err > tol:
        raise RecoveryError(
            f"rebuilt map disagrees with phi (unit error {unit_err:.3e}, "
            f"sample error {sample_err:.3e})")
    return RecoveredForm(spec, rho_m, rho_a, unit_err, sample_err)
