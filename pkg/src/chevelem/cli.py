"""Command-line surface: relations, factor, verify, roundtrip, demo.

Exit codes: 0 success, 1 verification or relation failure, 2 budget
exhausted (NotFactored), 3 invalid input (parse errors, rank gate,
non-membership).  Reports on stdout are deterministic for fixed inputs
and seeds; timing goes to stderr.
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from .errors import (
    ChevElemError,
    NotFactored,
    NotInGroup,
    ParseError,
    RankTooLow,
    UnsupportedType,
)
from .exactring import BaseRing, MultiPoly, parse_poly
from .factorize import (
    Budget,
    factor_polynomial,
    random_elementary_word,
)
from .fileio import (
    certificate_from_dict,
    certificate_to_dict,
    load,
    matrix_from_dict,
    save,
)
from .rootdata import (
    GroupMatrix,
    build_root_system,
    commutator_expand,
    elem_unipotent,
    weyl_and_torus,
)
from .words import eval_word

Z = BaseRing.integers()

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_NOT_FACTORED = 2
EXIT_BAD_INPUT = 3


def _rand_poly(rng: random.Random, nvars: int, max_degree: int = 2, bound: int = 9) -> MultiPoly:
    terms = {}
    for _ in range(rng.randint(1, 3)):
        e = tuple(rng.randint(0, max_degree) for _ in range(nvars))
        c = rng.randint(-bound, bound)
        if c:
            terms[e] = terms.get(e, 0) + c
    return MultiPoly(Z, nvars, terms)


def run_relation_suite(kind: str, rank: int, trials: int, seed: int) -> dict:
    """Commutator, additivity, and torus-conjugation checks, all exact.

    Arguments are seeded random polynomials in two variables of degree at
    most 2 with coefficients in [-9, 9]; every ordered non-proportional
    root pair is exercised.
    """
    rs = build_root_system(kind, rank)
    rng = random.Random(seed)
    nvars = 2
    pairs = [
        (a, b) for a in rs.roots for b in rs.roots if not rs.proportional(a, b)
    ]
    failures = {"commutator": 0, "additivity": 0, "torus": 0}
    ident = GroupMatrix.identity(rs, Z, nvars)
    for a, b in pairs:
        for _ in range(trials):
            s = _rand_poly(rng, nvars)
            t = _rand_poly(rng, nvars)
            word = commutator_expand(rs, a, b, s, t)
            lhs = eval_word(word, Z, nvars)
            rhs = (
                ident.rmul_unipotent(a, s)
                .rmul_unipotent(b, t)
                .rmul_unipotent(a, -s)
                .rmul_unipotent(b, -t)
            )
            if lhs != rhs:
                failures["commutator"] += 1
    for a in rs.roots:
        for _ in range(trials):
            s = _rand_poly(rng, nvars)
            t = _rand_poly(rng, nvars)
            lhs = ident.rmul_unipotent(a, s).rmul_unipotent(a, t)
            if lhs != elem_unipotent(rs, a, s + t):
                failures["additivity"] += 1
    units = (1, -1)
    torus = {}
    for a in rs.roots:
        for u in units:
            _, h = weyl_and_torus(rs, a, MultiPoly.const(Z, nvars, u))
            torus[(a, u)] = (h, h.inverse())
    all_pairs = [(a, b) for a in rs.roots for b in rs.roots]
    torus_trials = max(1, trials // 5)
    for a, b in all_pairs:
        k = rs.pairing(b, a)
        for u in units:
            h, hinv = torus[(a, u)]
            for _ in range(torus_trials):
                t = _rand_poly(rng, nvars)
                lhs = h * elem_unipotent(rs, b, t) * hinv
                scaled = t if u == 1 else (t if k % 2 == 0 else -t)
                if lhs != elem_unipotent(rs, b, scaled):
                    failures["torus"] += 1
    report = {
        "type": kind,
        "rank": rank,
        "trials": trials,
        "seed": seed,
        "root_pairs": len(pairs),
        "failures": failures,
        "ok": not any(failures.values()),
    }
    return report


def _budget_from_args(args) -> Budget:
    return Budget(
        max_letters=args.budget_letters,
        max_degree=args.budget_degree,
        max_coeff_bits=Budget().max_coeff_bits,
        max_steps=Budget().max_steps,
    )


def cmd_factor(args) -> int:
    try:
        data = load(args.infile)
        g = matrix_from_dict(data)
    except (ParseError, RankTooLow, UnsupportedType, ChevElemError) as exc:
        print("invalid input: %s" % exc, file=sys.stderr)
        return EXIT_BAD_INPUT
    t0 = time.monotonic()
    try:
        cert = factor_polynomial(g, _budget_from_args(args))
    except NotFactored as exc:
        print("not factored within budget: %s" % exc, file=sys.stderr)
        print("hint: this is a resource limit, not a non-membership proof", file=sys.stderr)
        return EXIT_NOT_FACTORED
    except (NotInGroup, RankTooLow, ChevElemError) as exc:
        print("invalid input: %s" % exc, file=sys.stderr)
        return EXIT_BAD_INPUT
    elapsed = time.monotonic() - t0
    payload = certificate_to_dict(cert)
    if args.outfile:
        save(args.outfile, payload)
        print("certificate written to %s" % args.outfile)
    else:
        from .fileio import dumps

        sys.stdout.write(dumps(payload))
    print(
        "verified=%s word_length=%d max_degree=%d"
        % (cert.verified, cert.word_length, cert.max_degree)
    )
    print("wall time: %.3f s" % elapsed, file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        data = load(args.infile)
        cert = certificate_from_dict(data)
    except (ParseError, ChevElemError) as exc:
        print("invalid certificate file: %s" % exc, file=sys.stderr)
        return EXIT_BAD_INPUT
    base, nvars = cert.target.base, cert.target.nvars
    product = eval_word(cert.word, base, nvars) * cert.residual_constant
    if product == cert.target:
        print("certificate verifies: word * residual = target exactly")
        return EXIT_OK
    print("certificate REJECTED: product differs from the target")
    return EXIT_MISMATCH


def cmd_relations(args) -> int:
    try:
        report = run_relation_suite(args.type, args.rank, args.trials, args.seed)
    except (RankTooLow, UnsupportedType) as exc:
        print("invalid input: %s" % exc, file=sys.stderr)
        return EXIT_BAD_INPUT
    print(
        "relations %s%d: pairs=%d trials=%d commutator_failures=%d "
        "additivity_failures=%d torus_failures=%d"
        % (
            report["type"],
            report["rank"],
            report["root_pairs"],
            report["trials"],
            report["failures"]["commutator"],
            report["failures"]["additivity"],
            report["failures"]["torus"],
        )
    )
    print("result: %s" % ("PASS" if report["ok"] else "FAIL"))
    return EXIT_OK if report["ok"] else EXIT_MISMATCH


def cmd_roundtrip(args) -> int:
    try:
        rs = build_root_system(args.type, args.rank)
    except (RankTooLow, UnsupportedType) as exc:
        print("invalid input: %s" % exc, file=sys.stderr)
        return EXIT_BAD_INPUT
    budget = _budget_from_args(args)
    master = random.Random(args.seed)
    failures = 0
    budget_misses = 0
    for trial in range(args.trials):
        trial_seed = master.randrange(1 << 30)
        word = random_elementary_word(
            rs, trial_seed, args.length, nvars=args.vars
        )
        g = eval_word(word, Z, args.vars)
        try:
            cert = factor_polynomial(g, budget)
        except NotFactored:
            budget_misses += 1
            print("trial %d: NOT FACTORED (budget)" % trial)
            continue
        ok = cert.check() and cert.residual_constant.is_identity()
        if not ok:
            failures += 1
        print(
            "trial %d: %s word_length=%d"
            % (trial, "verified" if ok else "MISMATCH", cert.word_length)
        )
    print(
        "roundtrip summary: %d trials, %d verified, %d budget misses, %d failures"
        % (args.trials, args.trials - failures - budget_misses, budget_misses, failures)
    )
    if failures:
        return EXIT_MISMATCH
    if budget_misses:
        return EXIT_NOT_FACTORED
    return EXIT_OK


def cohn_matrix() -> GroupMatrix:
    """diag(Cohn, 1): the rank-1 flagship input, elementary only in SL_3."""
    rs = build_root_system("A", 2)
    rows = [
        ["1+2*x1", "x1^2", "0"],
        ["-4", "1-2*x1", "0"],
        ["0", "0", "1"],
    ]
    return GroupMatrix(rs, [[parse_poly(t, Z, 1) for t in row] for row in rows])


def cmd_demo(args) -> int:
    g = cohn_matrix()
    print("demo: factoring the 3x3 embedding of [[1+2x, x^2], [-4, 1-2x]]")
    t0 = time.monotonic()
    cert = factor_polynomial(g)
    elapsed = time.monotonic() - t0
    out = args.outfile or "cohn_certificate.json"
    save(out, certificate_to_dict(cert))
    print(
        "verified=%s word_length=%d max_degree=%d -> %s"
        % (cert.verified, cert.word_length, cert.max_degree, out)
    )
    print("wall time: %.3f s" % elapsed, file=sys.stderr)
    replay = certificate_from_dict(load(out))
    product = eval_word(replay.word, Z, 1) * replay.residual_constant
    if product != replay.target:
        print("replay verification FAILED")
        return EXIT_MISMATCH
    print("replay verification: exact match")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chevelem",
        description=(
            "Factor polynomial matrices in SL_N / Sp_2N into words of "
            "elementary generators, with exact verification."
        ),
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def add_common(p):
        p.add_argument("--budget-letters", type=int, default=Budget().max_letters)
        p.add_argument("--budget-degree", type=int, default=Budget().max_degree)

    p_factor = sub.add_parser("factor", help="factor a matrix file into a certificate")
    p_factor.add_argument("--in", dest="infile", required=True)
    p_factor.add_argument("--out", dest="outfile")
    add_common(p_factor)
    p_factor.set_defaults(func=cmd_factor)

    p_verify = sub.add_parser("verify", help="re-check a certificate from scratch")
    p_verify.add_argument("--in", dest="infile", required=True)
    p_verify.set_defaults(func=cmd_verify)

    p_rel = sub.add_parser("relations", help="run the exact relation suites")
    p_rel.add_argument("--type", choices=("A", "C"), required=True)
    p_rel.add_argument("--rank", type=int, required=True)
    p_rel.add_argument("--trials", type=int, default=100)
    p_rel.add_argument("--seed", type=int, default=0)
    p_rel.set_defaults(func=cmd_relations)

    p_round = sub.add_parser("roundtrip", help="factor random words and verify")
    p_round.add_argument("--type", choices=("A", "C"), required=True)
    p_round.add_argument("--rank", type=int, required=True)
    p_round.add_argument("--vars", type=int, default=1)
    p_round.add_argument("--trials", type=int, default=10)
    p_round.add_argument("--seed", type=int, default=0)
    p_round.add_argument("--length", type=int, default=10)
    add_common(p_round)
    p_round.set_defaults(func=cmd_roundtrip)

    p_demo = sub.add_parser("demo", help="factor the flagship 3x3 example")
    p_demo.add_argument("--out", dest="outfile")
    p_demo.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ChevElemError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
