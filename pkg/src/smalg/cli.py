"""Command-line front end over the JSON wire formats.

Exit codes: 0 when the requested properties hold, 2 when some check fails,
1 on usage errors or malformed input.  All randomness flows through --seed,
so reports are byte-identical across runs for fixed inputs.
"""

from __future__ import annotations

import argparse
import sys
import time
from importlib import resources

import numpy as np

from .quasiorder import (
    QuasiOrder,
    all_preorders,
    block_triangular_permutation,
    components,
    condition_i,
    is_symmetric,
    is_two_free,
    rank_one_density,
)
from .matalg import matrix_unit, rank_one_closure_member
from .cocycle import TransitiveMap, Nontrivial, triviality, validate, induced_auto, walk_product
from .jordan import (
    CentralIdempotent,
    JordanSpec,
    build_embedding,
    central_idempotents,
    verify_antimultiplicative,
    verify_jordan,
    verify_multiplicative,
)
from .preservers import (
    GALLERY_KINDS,
    MapUnderTest,
    counterexample,
    identity_map,
    remark_gallery,
    transpose_map,
    verify_preserver,
)
from . import jsonio
from .jordan import recover_form, RecoveryError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAIL = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(obj, pretty):
    print(jsonio.dump_json(obj, pretty=pretty))


def _load_quasiorder(path):
    try:
        return jsonio.load_quasiorder(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: cannot load quasi-order from {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def cmd_analyze(args):
    rho, added = _load_quasiorder(args.quasiorder)
    holds, witness = condition_i(rho)
    bt = block_triangular_permutation(rho)
    report = {
        "n": rho.n,
        "pair_count": len(rho.pairs),
        "added_by_closure": [list(p) for p in added],
        "classes": [sorted(c) for c in components(rho).blocks],
        "two_free": is_two_free(rho),
        "condition_i": {"holds": holds, "witness": list(witness) if witness else None},
        "symmetric": is_symmetric(rho),
        "semisimple": is_symmetric(rho),
        "block_triangular": {
            "perm": list(bt.perm),
            "sizes": list(bt.sizes),
            "upper_exact": bt.upper_exact,
        },
        "rank_one_dense": rank_one_density(rho) if rho.n <= 24 else None,
        "all_preservers_jordan": "YES" if holds else "NO",
    }
    _emit(report, args.pretty)
    if args.pretty:
        print(f"all preservers Jordan: {report['all_preservers_jordan']}")
    return EXIT_OK


def cmd_embed(args):
    spec = jsonio.load_jordan_spec(args.spec)
    phi = build_embedding(spec)
    table = []
    for i, j in sorted(spec.rho.pairs):
        table.append({
            "unit": [i, j],
            "image": jsonio.matrix_to_dict(phi(matrix_unit(spec.rho.n, i, j))),
        })
    _emit({"n": spec.rho.n, "units": table}, args.pretty)
    return EXIT_OK


def _build_map(args):
    if args.spec:
        spec = jsonio.load_jordan_spec(args.spec)
        return MapUnderTest(spec.rho, build_embedding(spec), "embedding"), None
    rho, _ = _load_quasiorder(args.quasiorder)
    kind = args.kind
    if kind == "identity":
        return identity_map(rho), None
    if kind == "transpose":
        return transpose_map(rho), None
    if kind == "counterexample":
        return counterexample(rho), None
    if kind in GALLERY_KINDS:
        return remark_gallery(rho, kind), None
    return None, f"unknown map kind {kind!r}"


def cmd_verify(args):
    if not args.spec and not (args.kind and args.quasiorder):
        print("error: provide --spec FILE or --kind NAME --quasiorder FILE", file=sys.stderr)
        return EXIT_USAGE
    try:
        mut, err = _build_map(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    report = verify_preserver(mut, n_samples=args.samples, tol=args.tol, seed=args.seed)
    _emit(report.to_dict(), args.pretty)
    return EXIT_OK if report.all_pass else EXIT_FAIL


def cmd_counterexample(args):
    rho, _ = _load_quasiorder(args.quasiorder)
    try:
        mut = counterexample(rho)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    report = verify_preserver(mut, n_samples=args.samples, tol=args.tol, seed=args.seed)
    as_expected = (report.spectrum.ok and report.commutativity.ok
                   and report.injectivity.ok and not report.additivity.ok)
    _emit({
        "witness": [mut.r, mut.s],
        "case": mut.case,
        "as_expected": as_expected,
        "report": report.to_dict(),
    }, args.pretty)
    return EXIT_OK if as_expected else EXIT_FAIL


def cmd_recover(args):
    spec = jsonio.load_jordan_spec(args.spec)
    phi = build_embedding(spec)
    try:
        rec = recover_form(phi, spec.rho, tol=args.tol, n_samples=args.samples, seed=args.seed)
    except (RecoveryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit({
        "recovered": jsonio.jordan_spec_to_dict(rec.spec),
        "rho_m": jsonio.quasiorder_to_dict(rec.rho_m),
        "rho_a": jsonio.quasiorder_to_dict(rec.rho_a),
        "max_unit_error": rec.max_unit_error,
        "max_sample_error": rec.max_sample_error,
    }, args.pretty)
    return EXIT_OK


def _golden(name):
    return resources.files("smalg").joinpath("golden", name)


def _selftest_checks():
    import json as _json

    def load_q(name):
        with _golden(name).open() as fh:
            return jsonio.quasiorder_from_dict(_json.load(fh))

    def check_fan():
        rho, added = load_q("fan_2x2.json")
        if added:
            return f"closure added {added}, expected the file to be closed"
        holds, witness = condition_i(rho)
        if holds or witness != (1, 3):
            return f"criterion verdict ({holds}, {witness}), expected (False, (1,3))"
        with _golden("fan_2x2_rank_one.json").open() as fh:
            A = jsonio.matrix_from_dict(_json.load(fh))
        member, _ = rank_one_closure_member(A, rho)
        if member:
            return "rank-one closure membership: got True, expected False"
        mut = counterexample(rho)
        if (mut.case, mut.r, mut.s) != (2, 1, 3):
            return f"counterexample shape {(mut.case, mut.r, mut.s)}, expected (2, 1, 3)"
        X = 2 * matrix_unit(4, 1, 1) + matrix_unit(4, 1, 3)
        want = 2 * matrix_unit(4, 1, 1) + 0.5 * matrix_unit(4, 1, 3)
        got = mut.eval(X)
        if not np.array_equal(got, want):
            return f"kink image mismatch: got {got.tolist()}, want {want.tolist()}"
        return None

    def check_cocycle7():
        rho, added = load_q("nontrivial_cocycle_7.json")
        if added:
            return f"closure added {added}, expected the file to be closed"
        holds, witness = condition_i(rho)
        if not holds:
            return f"criterion should hold, got witness {witness}"
        g = TransitiveMap(rho, {
            p: (2.0 if p in {(2, 4), (2, 5)} else 1.0) for p in rho.off_diagonal
        })
        ok, violation = validate(g)
        if not ok:
            return f"transitivity law violated at {violation}"
        verdict = triviality(g)
        if not isinstance(verdict, Nontrivial):
            return f"expected a nontrivial map, got {verdict!r}"
        if abs(verdict.product - 1.0) < 1e-9 or abs(walk_product(g, verdict.walk) - verdict.product) > 1e-12:
            return f"nontriviality walk product {verdict.product} is not a certificate"
        X = sum(matrix_unit(7, i, j) for i, j in [(1, 4), (1, 6), (2, 4), (2, 6)])
        want = (matrix_unit(7, 1, 4) + matrix_unit(7, 1, 6)
                + 2 * matrix_unit(7, 2, 4) + matrix_unit(7, 2, 6))
        got = induced_auto(g)(X)
        if not np.array_equal(got, want):
            return "entrywise automorphism image mismatch"
        sv = np.linalg.svd(got, compute_uv=False)
        if not sv[1] > 0.3:
            return f"second singular value {sv[1]:.4f} <= 0.3 (rank should jump to 2)"
        return None

    def check_two_blocks():
        rho, added = load_q("two_blocks_3x3.json")
        if added:
            return f"closure added {added}, expected the file to be closed"
        ids = central_idempotents(rho)
        if len(ids) != 4:
            return f"{len(ids)} central idempotents, expected 4"
        P = CentralIdempotent((1, 1, 1, 0, 0, 0))
        spec = JordanSpec(rho, np.eye(6, dtype=complex), TransitiveMap.constant_one(rho), P)
        phi = build_embedding(spec)
        ver = verify_jordan(phi, rho, n_samples=1000, tol=1e-8, seed=0)
        if not ver.passed:
            return f"block embedding failed the Jordan battery: {ver}"
        mul_ok, mul_wit = verify_multiplicative(phi, rho, n_samples=200, seed=0)
        anti_ok, anti_wit = verify_antimultiplicative(phi, rho, n_samples=200, seed=0)
        if mul_ok or anti_ok:
            return f"expected both product rules to fail (mult={mul_ok}, anti={anti_ok})"
        if mul_wit is None or anti_wit is None:
            return "missing product-rule witnesses"
        return None

    def check_symmetric_pair():
        rho, added = load_q("symmetric_pair_3.json")
        if added:
            return f"closure added {added}, expected the file to be closed"
        mut = counterexample(rho)
        if (mut.case, mut.r, mut.s) != (1, 1, 2):
            return f"counterexample shape {(mut.case, mut.r, mut.s)}, expected (1, 1, 2)"
        E12, E21 = matrix_unit(3, 1, 2), matrix_unit(3, 2, 1)
        lhs = mut.eval(E12) + mut.eval(E21)
        rhs = mut.eval(E12 + E21)
        if np.linalg.norm(lhs - rhs) < 1e-6:
            return "block twist unexpectedly additive on the unit pair"
        report = verify_preserver(mut, n_samples=200, tol=1e-8, seed=0)
        if not (report.spectrum.ok and report.commutativity.ok and not report.additivity.ok):
            return f"unexpected report: {report.to_dict()['properties']}"
        return None

    def check_preorder_census():
        pres = list(all_preorders(3))
        if len(pres) != 29:
            return f"{len(pres)} preorders on [1,3], expected 29"
        diag = QuasiOrder.diagonal(3)
        for rho in pres:
            if rho == diag:
                continue
            holds, _ = condition_i(rho)
            exact = block_triangular_permutation(rho).upper_exact
            if holds != exact:
                return (f"criterion/{'block-triangular'} mismatch on pairs "
                        f"{sorted(rho.off_diagonal)}: {holds} vs {exact}")
        return None

    return [
        ("fan pattern: criterion fails, closure gap, kink witness", check_fan),
        ("7x7 pattern: nontrivial cocycle and rank jump", check_cocycle7),
        ("two-block algebra: Jordan but neither product rule", check_two_blocks),
        ("symmetric pair: block twist breaks additivity", check_symmetric_pair),
        ("3-point census: 29 preorders, criterion = block-triangularizable", check_preorder_census),
    ]


def cmd_selftest(args):
    failures = []
    t0 = time.time()
    for name, check in _selftest_checks():
        try:
            diff = check()
        except Exception as exc:  # a broken golden file should fail, not crash
            diff = f"exception: {exc!r}"
        status = "PASS" if diff is None else "FAIL"
        print(f"[{status}] {name}")
        if diff is not None:
            print(f"       {diff}")
            failures.append(name)
    print(f"selftest: {len(failures)} failure(s) in {time.time() - t0:.1f}s")
    return EXIT_OK if not failures else EXIT_FAIL


def _add_common(p, samples_default=1000):
    p.add_argument("--seed", type=int, default=0, help="root seed for all sampling")
    p.add_argument("--tol", type=float, default=1e-8, help="comparison tolerance")
    p.add_argument("--samples", type=int, default=samples_default, help="sample count")
    p.add_argument("--pretty", action="store_true", help="indented human-oriented output")


def main(argv=None):
    parser = _Parser(prog="smalg", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("analyze", help="structural report for a quasi-order file")
    p.add_argument("quasiorder")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("embed", help="matrix-unit table of an embedding spec")
    p.add_argument("spec")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("verify", help="grade a map as a preserver")
    p.add_argument("--spec", help="embedding spec JSON to verify")
    p.add_argument("--kind", help="builtin map: identity, transpose, counterexample, "
                                  + ", ".join(GALLERY_KINDS))
    p.add_argument("--quasiorder", help="quasi-order file for --kind maps")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("counterexample", help="build and grade the non-Jordan preserver")
    p.add_argument("quasiorder")
    _add_common(p)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("recover", help="recover (S, g, P) data from an embedding spec")
    p.add_argument("--spec", required=True)
    _add_common(p, samples_default=100)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("selftest", help="run the golden end-to-end checks")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_selftest)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
