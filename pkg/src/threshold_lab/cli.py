"""``threshold-lab`` command-line entry point.

Exit codes: 0 success, 2 validation error, 3 cap exceeded, 4 verdict failure
under ``--assert``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import secrets
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import __version__
from .caps import CapExceeded, Caps, ValidationError
from .certify import closed_form, series_rhs
from .cover import exact_cost, greedy_cost, is_q_small
from .families import gen_random_family, gen_subgraph_family
from .fragmentation import (
    fragments,
    minimal_fragments,
    run_process,
    split_large_small,
    verify_lemma1,
    verify_lemma2,
)
from .measure import (
    STREAM_PROCESS,
    ProbVector,
    amplify,
    bernoulli_estimate,
    expected_hits,
    prob_upset_exact,
    prob_upset_mc,
    substream,
)
from .schedule import Schedule
from .sets import SetFamily, bound_ell, mask_of, minimal_elements, family_to_dict, parse_family
from .thresholds import expectation_threshold, kk_gap_report, prob_threshold

log = logging.getLogger("threshold_lab")

EXIT_OK, EXIT_VALIDATION, EXIT_CAP, EXIT_VERDICT = 0, 2, 3, 4


# ------------------------------------------------------------ input helpers


def load_schema(name="report") -> dict:
    """Shipped JSON schema: ``report`` for command output, ``family`` for family files."""
    text = resources.files("threshold_lab").joinpath(f"schema/{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_family(path) -> SetFamily:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ValidationError(f"cannot read family file: {exc}") from None
    if not data.strip():
        raise ValidationError(f"family file {path} is empty")
    return parse_family(data)


def _number(text, rational):
    try:
        return Fraction(text.strip()) if rational else float(text)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"not a number: {text!r}") from None


def parse_probs(spec, family: SetFamily, rational=False, name="q") -> ProbVector:
    """Uniform scalar, comma-separated per-element vector, or ``file`` for the family's own q."""
    if spec is None:
        raise ValidationError(f"--{name} is required")
    if spec == "file":
        if family.q is None:
            raise ValidationError('family file has no "q" entry')
        values = [_number(repr(v), True) if rational else v for v in family.q]
    else:
        parts = spec.split(",")
        values = [_number(t, rational) for t in parts]
        if len(values) == 1:
            values = values * family.n
    return ProbVector(tuple(values)).check_length(family.n)


def resolve_seed(args):
    if getattr(args, "seed", None) is None:
        args.seed = secrets.randbits(62)
        print(f"seed={args.seed}", file=sys.stderr)
    return args.seed


def resolve_caps(args) -> Caps:
    caps = Caps.from_env()
    for item in args.cap or []:
        key, _, value = item.partition("=")
        try:
            caps = replace(caps, **{key: int(value)})
        except (TypeError, ValueError):
            raise ValidationError(f"bad --cap {item!r}") from None
    return caps


# ------------------------------------------------------------ commands


def cmd_info(args, caps):
    fam = load_family(args.family)
    mins = minimal_elements(fam)
    ell, empty = bound_ell(mins)
    warnings = []
    if empty:
        warnings.append("family is empty")
    elif mins.has_empty_set():
        warnings.append("family contains the empty set; its up-closure is all of 2^X")
    result = {
        "n": fam.n,
        "size": len(fam),
        "minimal_size": len(mins),
        "ell": ell,
        "empty": empty,
        "antichain": fam.is_antichain(),
        "has_q": fam.q is not None,
    }
    return result, warnings


def cmd_cost(args, caps):
    fam = load_family(args.family)
    q = parse_probs(args.q, fam, args.rational)
    if args.greedy:
        sol = greedy_cost(fam, q, caps)
        half = Fraction(1, 2) if isinstance(sol.cost, Fraction) else 0.5
        small = sol.cost <= half  # an upper bound at most 1/2 settles it; above is inconclusive
    else:
        sol = exact_cost(fam, q, caps)
        small, _ = is_q_small(fam, q, caps)
    eq = expected_hits(minimal_elements(fam), q)
    result = {
        "e_q": float(eq),
        "c_q": float(sol.cost),
        "q_small": bool(small),
        "solution": sol.to_dict(),
        "verdict": bool(small),
    }
    return result, []


def cmd_prob(args, caps):
    fam = load_family(args.family)
    p = parse_probs(args.p, fam, name="p")
    if args.mode == "exact":
        value = prob_upset_exact(fam, p, caps)
        return {"mode": "exact", "probability": value}, []
    seed = resolve_seed(args)
    est = prob_upset_mc(fam, p, args.trials, seed, args.confidence, args.threads)
    return {"mode": "monte-carlo", "probability": est.point, "estimate": est.to_dict()}, []


def cmd_pc(args, caps):
    fam = load_family(args.family)
    mode = "monte-carlo" if args.mode == "mc" else "exact"
    seed = resolve_seed(args) if mode == "monte-carlo" or args.mc_fallback else 0
    res = prob_threshold(fam, args.tol, mode, args.trials, seed, args.confidence, args.mc_fallback, caps)
    return {"threshold": "p_c", **res.to_dict()}, (["bracket unresolved"] if res.unresolved else [])


def cmd_qc(args, caps):
    fam = load_family(args.family)
    res = expectation_threshold(fam, args.tol, caps)
    return {"threshold": "q_c", **res.to_dict()}, []


def cmd_kk(args, caps):
    fam = load_family(args.family)
    rep = kk_gap_report(fam, args.tol, caps)
    return {**rep, "verdict": rep["pass"]}, []


def cmd_fragment(args, caps):
    fam = load_family(args.family)
    try:
        elems = [int(x) for x in args.w.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"bad --w {args.w!r}") from None
    if any(not 0 <= x < fam.n for x in elems):
        raise ValidationError(f"W has elements outside [0, {fam.n})")
    w = mask_of(elems)
    result = {
        "W": elems,
        "fragments": fragments(fam, w).as_sets(),
        "minimal_fragments": minimal_fragments(fam, w).as_sets(),
    }
    if args.m is not None:
        large, small = split_large_small(fam, w, args.m)
        result.update(m=args.m, large=large.as_sets(), small=small.as_sets())
    return result, []


def _simulate_trial(fam, q, schedule, seed, t, costs, caps):
    return run_process(fam, q, schedule, substream(seed, STREAM_PROCESS, t), costs, caps)


def cmd_simulate(args, caps):
    fam = load_family(args.family)
    q = parse_probs(args.q, fam)
    schedule = Schedule.parse(args.schedule)
    if args.trials < 1:
        raise ValidationError("--trials must be >= 1")
    seed = resolve_seed(args)

    def one(t):
        return _simulate_trial(fam, q, schedule, seed, t, args.costs, caps)

    if args.threads > 1:
        with ThreadPoolExecutor(args.threads) as pool:
            traces = list(pool.map(one, range(args.trials)))
    else:
        traces = [one(t) for t in range(args.trials)]

    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            for t, tr in enumerate(traces):
                fh.write(json.dumps({"trial": t, **tr.to_dict()}) + "\n")

    e_hits = sum(tr.event_e for tr in traces)
    m_hits = sum(tr.member_hit for tr in traces)
    k = traces[0].k
    exponent = schedule.total(k)
    result = {
        "trials": args.trials,
        "k": k,
        "ell": traces[0].ell,
        "exponent_total": str(exponent),
        "event_E": bernoulli_estimate(e_hits, args.trials, seed, args.confidence).to_dict(),
        "member_hit": bernoulli_estimate(m_hits, args.trials, seed, args.confidence).to_dict(),
        "sigma": (m_hits * (args.trials - m_hits)) ** 0.5 / args.trials**1.5,
        "violations": sum(bool(tr.violations()) for tr in traces),
    }
    try:
        result["prob_member_exact"] = prob_upset_exact(fam, amplify(q, exponent), caps)
    except CapExceeded:
        result["prob_member_exact"] = None
    try:
        result["c_q"] = float(exact_cost(fam, q, caps).cost)
    except CapExceeded:
        result["c_q"] = None
    result["verdict"] = result["violations"] == 0 and (
        result["c_q"] is None or result["c_q"] <= 0.5 or m_hits / args.trials > 0.5
    )
    return result, []


def cmd_verify(args, caps):
    fam = load_family(args.family)
    q = parse_probs(args.q, fam)
    L = _number(args.L, True)
    if args.lemma == 1:
        if args.m is None:
            raise ValidationError("Lemma 1 needs --m")
        check = verify_lemma1(fam, q, L, args.m, caps=caps)
    else:
        check = verify_lemma2(fam, q, L, enumerate_check=args.enumerate, caps=caps)
    return check.to_dict(), []


def cmd_certify(args, caps):
    schedule = Schedule.parse(args.schedule)
    warnings = []
    if args.closed_form:
        if schedule.kind != "constant":
            raise ValidationError("--closed-form needs a constant schedule")
        cf = closed_form(schedule(1))
        result = {**cf.to_dict(), "verdict": cf.verdict}
    else:
        rep = series_rhs(schedule, args.i_max, args.exact_limit)
        result = rep.to_dict()
        if args.proof_log:
            print(rep.proof_log(), file=sys.stderr)
        if rep.total_upper is None:
            warnings.append("some block has L_i < 4 past the exact limit; total is unbounded")
    return result, warnings


def cmd_gen(args, caps):
    model, *params = args.model.split(":")
    try:
        ints = [int(x) for x in params]
    except ValueError:
        raise ValidationError(f"bad generator parameters in {args.model!r}") from None
    if model == "random":
        if len(ints) != 3:
            raise ValidationError("random generator is random:n:count:ell")
        seed = resolve_seed(args)
        fam = gen_random_family(*ints, seed=seed)
    else:
        try:
            fam = gen_subgraph_family(model, *ints)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"wrong parameters for {model!r}: {args.model!r}") from None
    if args.format != "json":
        raise ValidationError("gen writes the JSON family file format; --format csv does not apply")
    return {"family": family_to_dict(fam), "n": fam.n, "size": len(fam)}, []


COMMANDS = {
    "info": cmd_info,
    "cost": cmd_cost,
    "prob": cmd_prob,
    "pc": cmd_pc,
    "qc": cmd_qc,
    "kk": cmd_kk,
    "fragment": cmd_fragment,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "certify": cmd_certify,
    "gen": cmd_gen,
}


# ------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--assert", dest="assert_", action="store_true",
                        help="exit 4 when the report's verdict is false")
    common.add_argument("--cap", action="append", metavar="KEY=VALUE",
                        help="override an enumeration cap (also via THRESHOLD_LAB_CAPS)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="threshold-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    p = add("info", "family statistics")
    p.add_argument("family")

    p = add("cost", "expected hits, q-cost and q-small verdict")
    p.add_argument("family")
    p.add_argument("--q", default="file")
    p.add_argument("--greedy", action="store_true", help="greedy upper bound instead of exact")
    p.add_argument("--rational", action="store_true", help="exact rational arithmetic")

    p = add("prob", "probability that X_p lies in the up-closure")
    p.add_argument("family")
    p.add_argument("--p", required=True)
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int)
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--threads", type=int, default=1)

    p = add("pc", "probability threshold bracket")
    p.add_argument("family")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--mc-fallback", action="store_true")
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--seed", type=int)
    p.add_argument("--confidence", type=float, default=0.99)

    for name, help_ in (("qc", "expectation threshold bracket"), ("kk", "Kahn-Kalai gap report")):
        p = add(name, help_)
        p.add_argument("family")
        p.add_argument("--tol", type=float, default=1e-6)

    p = add("fragment", "one-step fragments, minimal fragments and split")
    p.add_argument("family")
    p.add_argument("--w", default="", help="comma-separated elements of W")
    p.add_argument("--m", type=int)

    p = add("simulate", "run the fragmentation process")
    p.add_argument("family")
    p.add_argument("--q", default="file")
    p.add_argument("--schedule", default="paper")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--costs", action="store_true", help="compute exact per-round costs")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--trace-out", help="write one JSON trace per trial (JSON lines)")

    p = add("verify", "exact check of the large-fragment cost lemmas")
    p.add_argument("family")
    p.add_argument("--lemma", type=int, choices=(1, 2), required=True)
    p.add_argument("--q", default="file")
    p.add_argument("--L", required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--enumerate", action="store_true", help="Lemma 2: also enumerate outcomes")

    p = add("certify", "exact-rational certificate for a schedule")
    p.add_argument("schedule", help="paper | const:L | custom:L1,L2,...")
    p.add_argument("--i-max", type=int, default=30)
    p.add_argument("--exact-limit", type=int, default=14)
    p.add_argument("--closed-form", action="store_true")
    p.add_argument("--proof-log", action="store_true", help="human-readable term log on stderr")

    p = add("gen", "generate a family file")
    p.add_argument("model", help="clique:v:k | matching:v | star:v:d | path:v:len | cycle:v:len | random:n:count:ell")
    p.add_argument("--seed", type=int)
    return parser


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(value, list):
        out[prefix] = json.dumps(value)
    else:
        out[prefix] = value


def render(report, fmt) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    flat = {}
    _flatten("", report, flat)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(flat))
    writer.writeheader()
    writer.writerow(flat)
    return buf.getvalue()


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        caps = resolve_caps(args)
        result, warnings = COMMANDS[args.command](args, caps)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    config = {k: v for k, v in vars(args).items() if k not in ("verbose",)}
    config["assert"] = config.pop("assert_")
    config["caps"] = asdict(caps)
    report = {
        "command": args.command,
        "version": __version__,
        "config": config,
        "result": result,
        "warnings": warnings,
    }
    for w in warnings:
        log.warning(w)
    if args.command == "gen":
        # gen produces an input file, not a report
        text = json.dumps(result["family"]) + "\n"
    else:
        text = render(report, args.format)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.assert_ and result.get("verdict") in (False, "not-below-half"):
        return EXIT_VERDICT
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
