"""Batch command-line front end: rule reports, sweeps, measures, experiments.

Exit codes: 0 on success, 1 when a requested check found a failure (a
domination violation, a conjecture counterexample, an invalid parameter
set), 2 on usage or guard-limit errors.  All seeded commands are
deterministic: rerunning with the same flags and seed reproduces output
byte for byte, independently of --jobs.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import os
import sys
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from importlib import import_module

from . import block_sampler, interval_swap, measures, rules
from .rng import derive_seed

# the package re-exports a function named `correlation`, shadowing the
# submodule attribute; fetch the module itself
correlation = import_module("cafreq.correlation")

CHECKS = ("one_domination", "high_domination", "prefix_sums", "conservation", "averages")


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("CAFREQ_JOBS", "1")))
    except ValueError:
        return 1


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _symbols(rule: rules.LocalRule, text: str) -> frozenset[int]:
    return correlation.parse_symbols(text, rule.q)


def _fmt_frac(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def _write_csv(path: Optional[str], header: Sequence[str], rows: Iterable[Sequence]) -> None:
    if path is None:
        return
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _proper_subsets(q: int) -> list[frozenset[int]]:
    return [
        frozenset(c)
        for size in range(1, q)
        for c in itertools.combinations(range(q), size)
    ]


def _set_label(symbols: frozenset[int]) -> str:
    return "".join(rules.DIGITS[s] for s in sorted(symbols))


# ---------------------------------------------------------------------------
# rule subcommands


def _cmd_rule_info(args) -> int:
    rule = rules.parse_rule(args.rule)
    print(f"rule: {rule.format()}")
    print(f"alphabet size: {rule.q}  radius: {rule.r}")
    print(f"balanced: {rules.is_balanced(rule)}")
    print(f"surjective: {rules.is_surjective(rule)}")
    for A in _proper_subsets(rule.q):
        h = correlation.histogram(rule, A, A)
        c1 = h.moment(1)
        norm = correlation.normalized_correlation(rule, A, A)
        ident = correlation.identity_correlation(rule.q, len(A), rule.r)
        print(
            f"A=B={{{_set_label(A)}}}: histogram={h.counts} C={c1} "
            f"normalized={norm} identity={ident}"
        )
    return 0


def _cmd_rule_surjective(args) -> int:
    descriptors = list(args.rules)
    if args.file:
        with open(args.file) as fh:
            descriptors.extend(
                line.strip() for line in fh if line.strip() and not line.startswith("#")
            )
    if not descriptors:
        print("no rules given", file=sys.stderr)
        return 2
    for text in descriptors:
        rule = rules.parse_rule(text)
        print(f"{rule.format()}\t{rules.is_surjective(rule)}")
    return 0


def _cmd_correlate(args) -> int:
    rule = rules.parse_rule(args.rule)
    A = _symbols(rule, args.A)
    B = _symbols(rule, args.B if args.B is not None else args.A)
    h = correlation.histogram(rule, A, B, args.r_eff)
    print(f"histogram (r_eff={h.r}): {h.counts}  total={h.total}")
    rows = []
    for m in range(args.m + 1):
        raw = h.moment(m)
        norm = correlation.normalized_correlation(rule, A, B, m)
        rows.append(
            (
                rule.format(),
                h.r,
                _set_label(A),
                _set_label(B),
                m,
                raw,
                _fmt_frac(norm),
                float(norm),
            )
        )
        print(f"order {m}: C={raw}  normalized={norm}")
    _write_csv(
        args.out,
        ["rule", "r_eff", "A", "B", "m", "C_raw", "C_normalized", "C_normalized_float"],
        rows,
    )
    return 0


# ---------------------------------------------------------------------------
# sweeps


def _surjective_index_range(args: tuple[int, int, int, int]) -> list[int]:
    q, r, lo, hi = args
    return [
        i for i in range(lo, hi) if rules.is_surjective(rules.rule_from_index(q, r, i))
    ]


def _sweep_rules(q: int, r: int, limit: int, jobs: int = 1) -> list[rules.LocalRule]:
    """All surjective radius-r rules in table order, optionally in parallel."""
    total = rules.rule_count(q, r)
    if total > limit:
        raise ValueError(f"rule space of size {total} exceeds limit {limit}")
    if jobs <= 1:
        return [
            rule
            for rule in rules.enumerate_rules(q, r, limit=limit)
            if rules.is_surjective(rule)
        ]
    from concurrent.futures import ProcessPoolExecutor

    bounds = [total * w // jobs for w in range(jobs + 1)]
    chunks = [
        (q, r, bounds[w], bounds[w + 1])
        for w in range(jobs)
        if bounds[w] < bounds[w + 1]
    ]
    indices: list[int] = []
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        for part in pool.map(_surjective_index_range, chunks):
            indices.extend(part)
    return [rules.rule_from_index(q, r, i) for i in indices]


def _cmd_sweep(args) -> int:
    q = args.q
    radii = list(range(args.r + 1))
    violations = 0
    rows: list[Sequence] = []
    header: list[str]
    counts = {}
    if args.check == "averages":
        header = ["q", "r", "A", "B", "average", "expected", "equal"]
        failed = False
        for r in radii:
            for label_a, label_b in ((args.A, args.B if args.B else args.A),):
                A = correlation.parse_symbols(label_a, q)
                B = correlation.parse_symbols(label_b, q)
                avg = correlation.average_normalized_correlation(
                    q, r, A, B, limit=args.limit
                )
                expected = Fraction(len(A) * len(B), q)
                equal = avg == expected
                failed |= not equal
                rows.append(
                    (q, r, _set_label(A), _set_label(B), _fmt_frac(avg), _fmt_frac(expected), equal)
                )
                print(f"q={q} r={r}: average={avg} expected={expected} equal={equal}")
        _write_csv(args.out, header, rows)
        return 1 if failed else 0

    if args.rules_file:
        with open(args.rules_file) as fh:
            swept = [
                rules.parse_rule(line.strip())
                for line in fh
                if line.strip() and not line.startswith("#")
            ]
        groups = [(rule.r, [rule]) for rule in swept]
        for r, _ in groups:
            counts[r] = counts.get(r, 0) + 1
        radii = sorted(counts)
    else:
        groups = []
        for r in radii:
            surjective = _sweep_rules(q, r, args.limit, jobs=args.jobs)
            counts[r] = len(surjective)
            groups.append((r, surjective))

    for r, group in groups:
        for rule in group:
            text = rule.format()
            rq = rule.q
            if args.check == "one_domination":
                for A in _proper_subsets(rq):
                    c1 = correlation.correlation(rule, A, A)
                    ident = correlation.identity_correlation(rq, len(A), r)
                    holds = c1 <= ident
                    violations += not holds
                    rows.append(
                        (text, rq, r, _set_label(A), _set_label(A), c1, ident, ident - c1, holds)
                    )
            elif args.check == "high_domination":
                for A in _proper_subsets(rq):
                    rep = correlation.check_high_domination(rule, A, m_max=args.m_max)
                    found = rep.m_star is not None
                    violations += not found
                    rows.append(
                        (
                            text,
                            rq,
                            r,
                            _set_label(A),
                            rep.k0 if rep.k0 is not None else "",
                            rep.strict_at_k0 if rep.strict_at_k0 is not None else "",
                            rep.m_star if rep.m_star is not None else "",
                        )
                    )
            elif args.check == "prefix_sums":
                rep = correlation.check_prefix_sum_conjecture(rule)
                violations += not rep.holds
                rows.append(
                    (text, rq, r, rep.holds, rep.witness_n if rep.witness_n is not None else "")
                )
            elif args.check == "conservation":
                for A in _proper_subsets(rq):
                    by_histogram = correlation.histogram_matches_identity(rule, A)
                    witness = correlation.find_conservation_violation(
                        rule, A, args.max_period
                    )
                    agree = by_histogram == (witness is None)
                    violations += not agree
                    rows.append(
                        (
                            text,
                            rq,
                            r,
                            _set_label(A),
                            by_histogram,
                            witness is None,
                            agree,
                            witness[0] if witness else "",
                            witness[1] if witness else "",
                        )
                    )

    if args.check == "one_domination":
        header = ["rule", "q", "r", "A", "B", "C_raw", "C_identity", "margin", "holds"]
    elif args.check == "high_domination":
        header = ["rule", "q", "r", "A", "k0", "strict_at_k0", "m_star"]
    elif args.check == "prefix_sums":
        header = ["rule", "q", "r", "holds", "witness_n"]
    else:
        header = [
            "rule",
            "q",
            "r",
            "A",
            "conserves_by_histogram",
            "conserves_by_periodic_search",
            "agree",
            "witness_config",
            "witness_image",
        ]
    _write_csv(args.out, header, rows)
    total = sum(counts.values())
    per_radius = ", ".join(f"r={r}: {counts[r]}" for r in radii)
    kind = "rules from file" if args.rules_file else "surjective rules"
    print(f"{violations} violations / {total} {kind} ({per_radius})")
    return 1 if violations else 0


# ---------------------------------------------------------------------------
# measure subcommands


def _cmd_measure_pushforward(args) -> int:
    rule = rules.parse_rule(args.rule)
    mu = measures.make_measure(args.measure, rule.q)
    t_values = range(args.t_max + 1) if args.t_max is not None else [args.t]
    rows = []
    for t in t_values:
        value = measures.iterate_pushforward(rule, mu, t, args.word, limit=args.limit)
        rows.append(
            (t, args.word, value.numerator, value.denominator, float(value))
        )
        print(f"t={t}: measure([{args.word}]) = {value} ~ {float(value):.6g}")
    _write_csv(
        args.out,
        ["t", "word", "value_numerator", "value_denominator", "value_float"],
        rows,
    )
    return 0


def _cmd_measure_contraction(args) -> int:
    rule = rules.parse_rule(args.rule)
    mu = measures.make_measure(args.measure, rule.q)
    rep = measures.check_uniform_contraction(rule, mu, args.n, limit=args.limit)
    print(f"lhs (image distance to uniform):  {rep.lhs} at [{rep.witness_u}]")
    print(f"rhs (source distance to uniform): {rep.rhs} at [{rep.witness_w}]")
    print(f"holds: {rep.holds}")
    _write_csv(
        args.out,
        ["n", "lhs", "rhs", "holds", "witness_u", "witness_w"],
        [(args.n, _fmt_frac(rep.lhs), _fmt_frac(rep.rhs), rep.holds, rep.witness_u, rep.witness_w)],
    )
    return 0 if rep.holds else 1


# ---------------------------------------------------------------------------
# construction experiments


def _cmd_fn_check(args) -> int:
    params = interval_swap.SwapParams(args.n, args.p)
    rep = interval_swap.check_swap_params(params)
    print(f"marker: {params.marker}  short_bound: {params.short_bound}  "
          f"medium_bound: {params.medium_bound}")
    print(f"valid: {rep.valid}  vacuous: {rep.vacuous}")
    if not rep.vacuous:
        print(f"medium free-part lengths: [{rep.min_free_length}, {rep.max_free_length}]")
    for reason in rep.reasons:
        print(f"  - {reason}")
    return 0 if rep.valid else 1


def _cmd_fn_apply(args) -> int:
    params = interval_swap.SwapParams(args.n, args.p)
    trials = interval_swap.run_swap_trials(
        params,
        args.windows,
        seed=args.seed,
        window_length=args.window_length,
        jobs=args.jobs,
    )
    rows = [
        (
            t.index,
            t.occurrences,
            t.complete,
            t.medium,
            t.to_dense,
            t.to_sparse,
            t.involution_ok,
            t.occurrences_conserved,
            t.quad_free,
            t.max_dense_run,
        )
        for t in trials
    ]
    _write_csv(
        args.out,
        [
            "index",
            "occurrences",
            "complete_intervals",
            "medium_intervals",
            "rewritten_to_dense",
            "rewritten_to_sparse",
            "involution_ok",
            "occurrences_conserved",
            "quad_free",
            "max_dense_run",
        ],
        rows,
    )
    bad = sum(
        not (t.involution_ok and t.occurrences_conserved and t.quad_free)
        for t in trials
    )
    rewritten = sum(t.to_dense + t.to_sparse for t in trials)
    print(
        f"{len(trials)} windows, {rewritten} rewrites, {bad} failures "
        f"(seed={args.seed}, length={args.window_length or 3 * params.medium_bound})"
    )
    return 1 if bad else 0


def _cmd_xor_limit(args) -> int:
    params = block_sampler.BlockMeasureParams(levels=args.levels, alpha=args.alpha)
    sampler = block_sampler.BlockSampler(params)
    if args.n_values:
        n_values = [int(x) for x in args.n_values.split(",")]
    else:
        n_values = list(range(1, args.levels))
    rows = []
    for n in n_values:
        steps = 1 << block_sampler.triangular(n)
        transformed = block_sampler.XorPowerSampler(sampler, steps)
        est = block_sampler.estimate_cylinder(
            transformed,
            args.word,
            args.samples,
            derive_seed(args.seed, n),
            jobs=args.jobs,
        )
        rows.append(
            (
                n,
                steps,
                _fmt_frac(args.alpha),
                est.samples,
                repr(est.estimate),
                repr(est.std_error),
                args.seed,
            )
        )
        print(
            f"n={n} (t={steps}): P([{args.word}]) ~ {est.estimate:.4f} "
            f"+- {est.std_error:.4f} ({est.hits}/{est.samples})"
        )
    _write_csv(
        args.out,
        ["n", "t", "alpha", "samples", "estimate", "stderr", "seed"],
        rows,
    )
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cafreq",
        description="Exact symbol-frequency analysis for one-dimensional cellular automata.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_rule = sub.add_parser("rule", help="inspect single rules")
    rule_sub = p_rule.add_subparsers(dest="rule_command", required=True)
    p_info = rule_sub.add_parser("info", help="histograms and correlations of a rule")
    p_info.add_argument("rule", help='descriptor "q r digits"')
    p_info.set_defaults(func=_cmd_rule_info)
    p_surj = rule_sub.add_parser("surjective", help="surjectivity of rules")
    p_surj.add_argument("rules", nargs="*", help="rule descriptors")
    p_surj.add_argument("--file", help="file with one descriptor per line")
    p_surj.set_defaults(func=_cmd_rule_surjective)

    p_corr = sub.add_parser("correlate", help="histogram and correlations for A, B")
    p_corr.add_argument("rule")
    p_corr.add_argument("--A", required=True, help='symbol set, e.g. "1" or "{0,2}"')
    p_corr.add_argument("--B", help="defaults to A")
    p_corr.add_argument("--m", type=int, default=1, help="maximum order")
    p_corr.add_argument("--r-eff", type=int, default=None)
    p_corr.add_argument("--out", help="CSV output path")
    p_corr.set_defaults(func=_cmd_correlate)

    p_sweep = sub.add_parser("sweep", help="exhaustive checks over rule spaces")
    p_sweep.add_argument("--q", type=int, default=2)
    p_sweep.add_argument("--r", type=int, required=True, help="maximum radius")
    p_sweep.add_argument("--check", choices=CHECKS, required=True)
    p_sweep.add_argument("--A", default="1", help="symbol set for averages")
    p_sweep.add_argument("--B", help="symbol set for averages, defaults to A")
    p_sweep.add_argument("--m-max", type=int, default=16)
    p_sweep.add_argument("--max-period", type=int, default=12)
    p_sweep.add_argument("--limit", type=int, default=rules.DEFAULT_ENUMERATION_LIMIT)
    p_sweep.add_argument("--jobs", type=int, default=_default_jobs())
    p_sweep.add_argument(
        "--rules-file",
        help="sweep these descriptors (one per line) instead of enumerating",
    )
    p_sweep.add_argument("--out", help="CSV output path")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_measure = sub.add_parser("measure", help="exact measure computations")
    measure_sub = p_measure.add_subparsers(dest="measure_command", required=True)
    p_push = measure_sub.add_parser("pushforward", help="cylinder values after t steps")
    p_push.add_argument("rule")
    p_push.add_argument("--measure", required=True, help='e.g. "bernoulli:1/4"')
    p_push.add_argument("--word", required=True)
    p_push.add_argument("--t", type=int, default=1)
    p_push.add_argument("--t-max", type=int, default=None, help="emit a trajectory 0..t_max")
    p_push.add_argument("--limit", type=int, default=measures.DEFAULT_PUSHFORWARD_LIMIT)
    p_push.add_argument("--out", help="CSV output path")
    p_push.set_defaults(func=_cmd_measure_pushforward)
    p_contr = measure_sub.add_parser("contraction", help="sup-distance to uniform, before vs after")
    p_contr.add_argument("rule")
    p_contr.add_argument("--measure", required=True)
    p_contr.add_argument("--n", type=int, required=True, help="cylinder length")
    p_contr.add_argument("--limit", type=int, default=measures.DEFAULT_PUSHFORWARD_LIMIT)
    p_contr.add_argument("--out", help="CSV output path")
    p_contr.set_defaults(func=_cmd_measure_contraction)

    p_fn = sub.add_parser("fn", help="marker interval-swap experiments")
    fn_sub = p_fn.add_subparsers(dest="fn_command", required=True)
    p_fncheck = fn_sub.add_parser("check", help="validity of swap parameters")
    p_fncheck.add_argument("--n", type=int, required=True)
    p_fncheck.add_argument("--p", type=_frac, required=True)
    p_fncheck.set_defaults(func=_cmd_fn_check)
    p_fnapply = fn_sub.add_parser("apply", help="seeded involution/conservation trials")
    p_fnapply.add_argument("--n", type=int, required=True)
    p_fnapply.add_argument("--p", type=_frac, required=True)
    p_fnapply.add_argument("--windows", type=int, default=1000)
    p_fnapply.add_argument("--window-length", type=int, default=None)
    p_fnapply.add_argument("--seed", type=int, default=0)
    p_fnapply.add_argument("--jobs", type=int, default=_default_jobs())
    p_fnapply.add_argument("--out", help="CSV output path")
    p_fnapply.set_defaults(func=_cmd_fn_apply)

    p_xor = sub.add_parser("xor-limit", help="hierarchical measure under iterated XOR")
    p_xor.add_argument("--levels", type=int, default=4)
    p_xor.add_argument("--alpha", type=_frac, default=Fraction(1))
    p_xor.add_argument("--samples", type=int, default=10000)
    p_xor.add_argument("--seed", type=int, default=0)
    p_xor.add_argument("--word", default="1")
    p_xor.add_argument("--n-values", help="comma-separated levels, default 1..levels-1")
    p_xor.add_argument("--jobs", type=int, default=_default_jobs())
    p_xor.add_argument("--out", help="CSV output path")
    p_xor.set_defaults(func=_cmd_xor_limit)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
