"""Command-line driver.

Subcommands: check-channel, verify, search, extend, evaluate.  Exit
codes: 0 for a positive verdict (verified / feasible / no violation
found), 1 for a principled negative verdict, 2 for usage or I/O errors.
Gamma is accepted only as an exact rational string like "2/3"; the
number of users that must be corrected is ceil(gamma*t), which is
discontinuous in gamma, so floats are refused.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import __version__
from .adversary import (
    fixed_state_strategy,
    max_error_exhaustive,
    monte_carlo_error,
    uniform_state_strategy,
)
from .channel import ChannelSpec, adder_params, make_adder_channel, parse_channel, validate
from .codebooks import (
    AdderDecoder,
    CodebookTuple,
    format_codeword,
    parse_codebooks,
    serialize_codebooks,
    verify_zero_error,
)
from .extension import (
    achieved_rates,
    build_plan,
    parse_outer_sections,
    verify_extension,
)
from .feasibility import interior_necessary_conditions
from .search import SearchSpec, search

REPORT_SCHEMA = "avmac.report/1"


class UsageError(Exception):
    pass


def _parse_gamma(text: str) -> Fraction:
    try:
        gamma = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"gamma must be a rational like 2/3, got {text!r}") from exc
    if "." in text or "e" in text.lower():
        raise UsageError(f"gamma must be an exact rational string, got {text!r}")
    if not 0 < gamma < 1:
        raise UsageError(f"gamma must lie strictly between 0 and 1, got {gamma}")
    return gamma


def _load_channel(args) -> ChannelSpec:
    if getattr(args, "adder", None) is not None:
        t, ell = args.adder
        if t < 2 or ell < 1:
            raise UsageError(f"--adder needs t >= 2 and ell >= 1, got t={t} ell={ell}")
        return make_adder_channel(t, ell)
    path = getattr(args, "channel", None)
    if path is None:
        raise UsageError("one channel source required: --adder T ELL or --channel FILE")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            ch = parse_channel(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read channel file: {exc}") from exc
    report = validate(ch)
    if not report.passed:
        raise UsageError("channel file fails validation: " + "; ".join(report.problems))
    return ch


def _load_codebooks(path: str) -> CodebookTuple:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_codebooks(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read codebook file: {exc}") from exc


def _frac_str(x) -> str:
    return str(x)


def _emit(args, doc: dict, human: str) -> None:
    if args.json:
        doc = {"schema": REPORT_SCHEMA, "version": __version__, **doc}
        print(json.dumps(doc, sort_keys=True))
    else:
        print(human, end="" if human.endswith("\n") else "\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_check_channel(args) -> int:
    ch = _load_channel(args)
    gamma = _parse_gamma(args.gamma)
    report = interior_necessary_conditions(ch, gamma)
    sym_counts = {m: [users for users, _ in entries] for m, entries in report.symmetrizable.items()}
    doc = {
        "command": "check-channel",
        "channel": ch.name or "file",
        "gamma": _frac_str(report.gamma),
        "u": report.u,
        "verdict": "PASS" if report.passed else "FAIL",
        "overwritable_subsets": [list(users) for users, _ in report.overwritable],
        "symmetrizable_subsets": {str(m): [list(u) for u in subs] for m, subs in sym_counts.items()},
        "reasons": report.reasons,
    }
    lines = [
        f"channel: {ch.name or 'from file'}",
        f"gamma = {report.gamma}, must correct u = {report.u} of {ch.t} users",
    ]
    for m in sorted(sym_counts):
        subs = sym_counts[m]
        shown = ", ".join(str(u) for u in subs) if subs else "none"
        lines.append(f"symmetrizable subsets of size {m}: {shown}")
    over = ", ".join(str(list(u)) for u, _ in report.overwritable) if report.overwritable else "none"
    lines.append(f"overwritable subsets: {over}")
    lines.append("necessary conditions: " + ("PASS" if report.passed else "FAIL"))
    lines.extend("  " + r for r in report.reasons)
    _emit(args, doc, "\n".join(lines))
    return 0 if report.passed else 1


def _describe_failure(f) -> str:
    w = f.witness
    if f.condition == 1:
        return (
            f"condition 1: clean output {format_codeword(w.clean_sum)} = "
            f"{format_codeword(w.base_sum)} + state sequence s={format_codeword(w.state_diff)}"
        )
    if f.condition == 2:
        msgs = ", ".join(str(m) for m in w.msgs)
        return f"condition 2: clean output {format_codeword(w.output)} produced by message tuples {msgs}"
    decs = "; ".join(
        f"s={format_codeword(s)} msgs={m}" for s, m in w.decompositions[:4]
    )
    return (
        f"condition 3: attacked output {format_codeword(w.output)} agrees only on users "
        f"{list(w.agreement)} ({decs})"
    )


def _cmd_verify(args) -> int:
    cb = _load_codebooks(args.codebook)
    gamma = _parse_gamma(args.gamma)
    ell = _resolve_ell(args, cb)
    report = verify_zero_error(cb, ell, gamma, budget=args.budget)
    doc = {
        "command": "verify",
        "t": cb.t,
        "n": cb.n,
        "sizes": list(cb.sizes),
        "ell": ell,
        "gamma": _frac_str(gamma),
        "u": report.u,
        "verdict": report.ok,
        "failures": [
            {"condition": f.condition, "description": _describe_failure(f)} for f in report.failures
        ],
    }
    lines = [
        f"codebooks: t={cb.t}, n={cb.n}, sizes={list(cb.sizes)}",
        f"adder channel state bound ell={ell}, gamma={gamma} (correct u={report.u})",
        "zero-error partial correction: " + ("VERIFIED" if report.ok else "FAILED"),
    ]
    lines.extend("  " + _describe_failure(f) for f in report.failures)
    _emit(args, doc, "\n".join(lines))
    return 0 if report.ok else 1


def _resolve_ell(args, cb: CodebookTuple) -> int:
    if getattr(args, "adder", None) is not None:
        t, ell = args.adder
        if t != cb.t:
            raise UsageError(f"--adder user count {t} does not match codebook t={cb.t}")
        if ell < 1:
            raise UsageError("--adder needs ell >= 1")
        return ell
    if getattr(args, "ell", None) is not None:
        if args.ell < 1:
            raise UsageError("--ell must be >= 1")
        return args.ell
    raise UsageError("state bound required: --adder T ELL or --ell ELL")


def _cmd_search(args) -> int:
    gamma = _parse_gamma(args.gamma)
    sizes = tuple(int(v) for v in args.sizes.split(","))
    spec = SearchSpec(
        t=len(sizes),
        n=args.n,
        ell=args.ell,
        gamma=gamma,
        sizes=sizes,
        symmetry_reduce=not args.no_symmetry,
        budget=args.budget,
        stop_after=args.stop_after,
    )
    result = search(spec)
    st = result.stats
    doc = {
        "command": "search",
        "n": spec.n,
        "ell": spec.ell,
        "gamma": _frac_str(gamma),
        "sizes": list(sizes),
        "solutions": len(result.solutions),
        "stats": {
            "candidates": st.candidates,
            "pruned_pairwise": st.pruned_pairwise,
            "pruned_union": st.pruned_union,
            "pruned_condition1": st.pruned_condition1,
            "pruned_condition2": st.pruned_condition2,
            "pruned_condition3": st.pruned_condition3,
            "verified": st.verified,
            "budget_exhausted": st.budget_exhausted,
        },
    }
    lines = [
        f"search n={spec.n} ell={spec.ell} gamma={gamma} sizes={list(sizes)}"
        + (" (symmetry reduced)" if spec.symmetry_reduce else ""),
        f"candidates: {st.candidates}  pruned: pairwise={st.pruned_pairwise} union={st.pruned_union}"
        f" c1={st.pruned_condition1} c2={st.pruned_condition2} c3={st.pruned_condition3}",
        f"verified tuples: {st.verified}  distinct solutions: {len(result.solutions)}",
    ]
    if st.budget_exhausted:
        lines.append("warning: budget exhausted, results are partial")
    if args.out:
        import os

        os.makedirs(args.out, exist_ok=True)
        for idx, cb in enumerate(result.solutions, start=1):
            path = os.path.join(args.out, f"solution-{idx:04d}.cb")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(serialize_codebooks(cb))
        lines.append(f"wrote {len(result.solutions)} codebook files to {args.out}")
    else:
        for idx, cb in enumerate(result.solutions, start=1):
            lines.append(f"solution {idx}:")
            for j, book in enumerate(cb.codebooks, start=1):
                lines.append(f"  user {j}: " + " ".join(format_codeword(w) for w in book))
    _emit(args, doc, "\n".join(lines))
    return 0 if result.solutions else 1


def _cmd_extend(args) -> int:
    inner = _load_codebooks(args.inner)
    gamma = _parse_gamma(args.gamma)
    try:
        with open(args.outer, "r", encoding="utf-8") as fh:
            outer = parse_outer_sections(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read outer code file: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"bad outer code file: {exc}") from exc
    if not outer:
        raise UsageError("outer code file has no sections")
    r = args.r if args.r is not None else len(outer[0][0])
    try:
        plan = build_plan(inner, outer, r=r, ell=args.ell, gamma=gamma)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rates = achieved_rates(plan)
    doc = {
        "command": "extend",
        "r": plan.r,
        "ell": plan.ell,
        "gamma": _frac_str(gamma),
        "u": plan.u,
        "erasure_budget": plan.budget,
        "required_dmin": plan.required_dmin,
        "warnings": list(plan.warnings),
        "inner_rates": [_frac_str(x) for x in plan.inner_rates()],
        "outer_rates": [_frac_str(x) for x in plan.outer_rates()],
        "achieved_rates": [_frac_str(x) for x in rates],
    }
    lines = [
        f"plan: r={plan.r} ell={plan.ell} gamma={gamma} u={plan.u}",
        f"erasure budget {plan.budget}, outer codes need minimum distance {plan.required_dmin}",
        "achieved rates: " + " ".join(_frac_str(x) for x in rates),
    ]
    lines.extend("warning: " + w for w in plan.warnings)
    code = 0
    if args.check_patterns:
        check = verify_extension(plan, budget=args.budget)
        doc["patterns_checked"] = check.patterns_checked
        doc["verdict"] = check.ok
        if check.ok:
            lines.append(f"all {check.patterns_checked} admissible erasure patterns recover u={plan.u} users")
        else:
            rows = [
                f"  user {j + 1}: " + "".join("E" if e else "." for e in check.failing_pattern.grid[j])
                for j in range(plan.t)
            ]
            lines.append(
                f"FAILED after {check.patterns_checked} patterns; users {list(check.unrecoverable_users)} unrecoverable under:"
            )
            lines.extend(rows)
            doc["unrecoverable_users"] = list(check.unrecoverable_users)
            code = 1
    _emit(args, doc, "\n".join(lines))
    return code


def _cmd_evaluate(args) -> int:
    cb = _load_codebooks(args.codebook)
    gamma = _parse_gamma(args.gamma)
    if args.adder is not None:
        t, ell = args.adder
        ch = make_adder_channel(t, ell)
    elif args.channel is not None:
        ch = _load_channel(args)
        params = adder_params(ch)
        if params is None:
            raise UsageError(
                "evaluate decodes with the adder-channel table decoder; "
                "the channel file must be a serialized adder channel"
            )
        t, ell = params
    else:
        raise UsageError("evaluate needs --adder T ELL or --channel FILE")
    if t != cb.t:
        raise UsageError(f"channel user count {t} does not match codebook t={cb.t}")
    decoder = AdderDecoder(cb, ell, gamma, budget=args.budget)
    verified = verify_zero_error(cb, ell, gamma, budget=args.budget).ok
    doc = {
        "command": "evaluate",
        "t": cb.t,
        "n": cb.n,
        "ell": ell,
        "gamma": _frac_str(gamma),
        "verified": verified,
        "mode": args.mode,
    }
    lines = [
        f"codebooks: t={cb.t}, n={cb.n}, sizes={list(cb.sizes)} over adder channel ell={ell}",
        f"tuple verifies zero-error: {verified}",
    ]
    if args.mode == "exhaustive":
        profile = max_error_exhaustive(cb, ch, decoder, gamma, budget=args.budget, workers=args.threads)
        worst = profile.max_value
        doc["max_error"] = _frac_str(worst)
        doc["worst_state"] = format_codeword(profile.max_key)
        lines.append(
            f"max error over all {len(profile.values)} state sequences: {worst}"
            f" (at s={format_codeword(profile.max_key)})"
        )
        _emit(args, doc, "\n".join(lines))
        return 0 if worst == 0 else 1
    if args.state is not None:
        s_seq = tuple(int(c) for c in args.state)
        if len(s_seq) != cb.n or any(not 0 <= s <= ell for s in s_seq):
            raise UsageError(f"--state must be {cb.n} digits in 0..{ell}")
        strategy = fixed_state_strategy(s_seq)
        strategy_name = f"fixed:{args.state}"
    else:
        strategy = uniform_state_strategy(ell + 1)
        strategy_name = "uniform"
    estimate = monte_carlo_error(cb, ch, decoder, strategy, gamma, trials=args.trials, seed=args.seed)
    lo, hi = estimate.interval()
    doc.update(
        {
            "strategy": strategy_name,
            "trials": estimate.trials,
            "failures": estimate.failures,
            "estimate": _frac_str(estimate.mean),
            "interval": [lo, hi],
            "seed": args.seed,
        }
    )
    lines.append(
        f"strategy {strategy_name}: {estimate.failures}/{estimate.trials} failures"
        f" (mean {estimate.mean}, {int(estimate.level * 100)}% interval [{lo:.6f}, {hi:.6f}])"
    )
    _emit(args, doc, "\n".join(lines))
    return 0 if estimate.failures == 0 else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avmac", description=__doc__)
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_channel_source(p, codebook_mode=False):
        p.add_argument("--adder", nargs=2, type=int, metavar=("T", "ELL"), help="adder channel parameters")
        if codebook_mode:
            p.add_argument("--ell", type=int, help="adder state bound (alternative to --adder)")
        else:
            p.add_argument("--channel", help="channel spec file")

    p = sub.add_parser("check-channel", help="necessary-condition report for a channel")
    add_channel_source(p)
    p.add_argument("--gamma", required=True, help="correction fraction as a rational, e.g. 2/3")
    p.set_defaults(func=_cmd_check_channel)

    p = sub.add_parser("verify", help="zero-error verification of a codebook tuple")
    p.add_argument("--codebook", required=True, help="codebook file")
    add_channel_source(p, codebook_mode=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--budget", type=int, default=4_000_000)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("search", help="search for zero-error codebook tuples")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--sizes", required=True, help="comma-separated codebook sizes, e.g. 2,2")
    p.add_argument("--no-symmetry", action="store_true")
    p.add_argument("--budget", type=int, default=5_000_000)
    p.add_argument("--stop-after", type=int)
    p.add_argument("--out", help="directory for solution codebook files")
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("extend", help="build and check a block-length extension plan")
    p.add_argument("--inner", required=True, help="inner codebook file")
    p.add_argument("--outer", required=True, help="outer code file (user sections)")
    p.add_argument("--gamma", required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--r", type=int, help="repetition count (default: outer codeword length)")
    p.add_argument("--no-check-patterns", dest="check_patterns", action="store_false")
    p.add_argument("--budget", type=int, default=2_000_000)
    p.set_defaults(func=_cmd_extend)

    p = sub.add_parser("evaluate", help="error profiles, exhaustive or sampled")
    p.add_argument("--codebook", required=True)
    p.add_argument("--adder", nargs=2, type=int, metavar=("T", "ELL"))
    p.add_argument("--channel", help="serialized adder channel file")
    p.add_argument("--gamma", required=True)
    p.add_argument("--mode", choices=("exhaustive", "monte-carlo"), default="exhaustive")
    p.add_argument("--state", help="fixed state sequence digits for monte-carlo")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1, help="worker threads for exhaustive sweeps")
    p.add_argument("--budget", type=int, default=2_000_000)
    p.set_defaults(func=_cmd_evaluate)

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"avmac: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"avmac: {exc}", file=sys.stderr)
        return 2


def main(argv: Sequence[str] | None = None) -> int:
    code = run(argv)
    sys.exit(code)


if __name__ == "__main__":
    main()
