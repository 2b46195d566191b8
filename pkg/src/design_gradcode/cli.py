"""Command-line front end: build codes, sweep worst-case errors, compute
adversarial thresholds and run the coded-vs-uncoded SGD demo.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import designs
from .decoder import worst_case_error
from .errors import GradCodeError
from .gradcode import GradientCode, code_from_design, frc_code, uncoded_code
from .simsgd import make_dataset, run_sgd, trajectory_csv
from .straggler import adversarial_threshold, greedy_adversary

FAMILIES = ("pg", "dual-ag", "ag", "hadamard", "frc", "uncoded")
SWEEP_FAMILIES = ("pg", "dual-ag", "ag", "frc", "uncoded")


def make_code(family: str, q: int, m: int = 2) -> tuple[GradientCode, designs.Design | None]:
    """Code of the requested family; also the underlying design, if any.

    ``frc`` is the ((q+1)^2, q+1) repetition code and ``uncoded`` has
    q^2+q+1 workers, matching the projective plane's worker count.
    ``hadamard`` reads its order parameter from ``m``.
    """
    if family == "pg":
        d = designs.projective_geometry(m, q)
        return code_from_design(d), d
    if family == "ag":
        d, res = designs.affine_geometry(m, q)
        return code_from_design(d, res), d
    if family == "dual-ag":
        d, _ = designs.affine_geometry(m, q)
        return code_from_design(d, dual=True), designs.dual(d)
    if family == "hadamard":
        d = designs.hadamard_design(m)
        return code_from_design(d), d
    if family == "frc":
        designs.factor_prime_power(q)
        return frc_code((q + 1) ** 2, q + 1), None
    if family == "uncoded":
        designs.factor_prime_power(q)
        return uncoded_code(q * q + q + 1), None
    raise ValueError(f"unknown family {family!r}")


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _rat(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_table(header: list[str], rows: list[dict], fmt: str, out: str | None) -> None:
    if fmt == "json":
        _emit(json.dumps(rows, indent=1) + "\n", out)
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([r[h] if not isinstance(r[h], (float, Fraction)) else _fmt(r[h]) for h in header])
    _emit(buf.getvalue(), out)


# commands ---------------------------------------------------------------


def cmd_build(args) -> int:
    code, design = make_code(args.family, args.q, args.m)
    print(code.summary())
    if args.dump_design:
        if design is None:
            raise GradCodeError(f"family {args.family} has no underlying design")
        with open(args.dump_design, "w") as fh:
            fh.write(design.to_json(indent=1) + "\n")
    text = code.to_json(indent=1) + "\n"
    if args.out:
        _emit(text, args.out)
    else:
        sys.stdout.write(text)
    return 0


def frc_worst_case(code: GradientCode, S: int) -> int:
    """Group-kill worst case ``L * floor(S / R)`` of an FRC, checked
    against the wiped count of the greedy adversary."""
    value = code.L * (S // code.R)
    _, wiped = greedy_adversary(code, S)
    if len(wiped) != value:
        raise RuntimeError(f"greedy wiped {len(wiped)} gradients, formula gives {value}")
    return value


def sweep_rows(q: int, m: int = 2, s_min: int = 0, s_max: int | None = None,
               families=SWEEP_FAMILIES, exhaustive: bool = False) -> list[dict]:
    """Worst-case error series of each family plus the floor(S/L) lower bound.

    The lower-bound series uses the projective-plane code's L = q+1.
    """
    rows: list[dict] = []
    pg_code, _ = make_code("pg", q, m)
    L_ref = pg_code.L
    by_family: dict[str, dict[int, Fraction]] = {}
    for fam in families:
        code, _ = make_code(fam, q, m)
        hi = code.N - 1 if s_max is None else min(s_max, code.N - 1)
        series = by_family.setdefault(fam, {})
        for S in range(s_min, hi + 1):
            if exhaustive:
                err, _ = worst_case_error(code, S, "exhaustive")
                method = "exhaustive"
            elif fam == "frc":
                err, method = Fraction(frc_worst_case(code, S)), "frc-group-kill"
            elif fam == "uncoded":
                err, method = Fraction(S), "uncoded"
            else:
                err, _ = worst_case_error(code, S, "closed_form")
                method = "closed_form"
            err = Fraction(err)
            series[S] = err
            rows.append(_row(fam, q, code.N, code.K, code.L, S, err, method))
    hi = pg_code.N - 1 if s_max is None else min(s_max, pg_code.N - 1)
    for S in range(s_min, hi + 1):
        rows.append(_row("lower-bound", q, pg_code.N, pg_code.K, L_ref, S,
                         Fraction(S // L_ref), "floor(S/L)"))
    _check_sweep(by_family, L_ref, pg_code.N)
    return rows


def _row(fam, q, N, K, L, S, err, method) -> dict:
    return {"family": fam, "q": q, "N": N, "K": K, "L": L, "S": S,
            "S_over_N": Fraction(S, N), "err": err, "err_over_K": err / K, "method": method}


def _check_sweep(by_family: dict, L: int, N: int) -> None:
    for fam in ("pg", "dual-ag", "ag"):
        for S, err in by_family.get(fam, {}).items():
            if err < S // L:
                raise RuntimeError(f"{fam} S={S}: err {err} below floor(S/L) = {S // L}")
            if S < N * (L - 1) / L and err > S:
                raise RuntimeError(f"{fam} S={S}: err {err} above the uncoded error {S}")


SWEEP_HEADER = ["family", "q", "N", "K", "L", "S", "S_over_N", "err", "err_over_K", "method"]


def cmd_sweep(args) -> int:
    families = SWEEP_FAMILIES if args.family in (None, "all") else tuple(args.family.split(","))
    rows = sweep_rows(args.q, args.m, args.s_min, args.s_max, families,
                      exhaustive=args.policy == "exhaustive")
    if args.format == "json":
        for r in rows:
            r["err_float"] = float(r["err"])
            for k in ("S_over_N", "err", "err_over_K"):
                r[k] = _rat(r[k])
    _write_table(SWEEP_HEADER, rows, args.format, args.out)
    return 0


THRESHOLD_HEADER = ["eta", "S_star", "S_star_lb", "lambda2", "witness"]


def threshold_rows(code: GradientCode, etas) -> list[dict]:
    rows = []
    for eta in etas:
        rep = adversarial_threshold(code, eta)
        rows.append({
            "eta": eta,
            "S_star": rep.S_star,
            "S_star_lb": "" if rep.S_star_lb is None else rep.S_star_lb,
            "lambda2": rep.lambda2,
            "witness": " ".join(str(i) for i in rep.witness_T),
            "report": rep,
        })
    return rows


def cmd_threshold(args) -> int:
    if any(e < 1 for e in args.eta):
        raise _Usage("eta must be >= 1")
    code, _ = make_code(args.family, args.q, args.m)
    rows = threshold_rows(code, args.eta)
    if args.format == "json":
        _emit(json.dumps([r["report"].to_dict() for r in rows], indent=1) + "\n", args.out)
        return 0
    for r in rows:
        if r["report"].lb_note:
            print(f"# eta={r['eta']}: no lower bound ({r['report'].lb_note})", file=sys.stderr)
    _write_table(THRESHOLD_HEADER, rows, "csv", args.out)
    return 0


def cmd_sgd_demo(args) -> int:
    code, _ = make_code(args.family, args.q, args.m)
    base = uncoded_code(code.K)
    M = args.samples or 9 * code.K
    data = make_dataset(M, args.dim, code.K, args.sigma, args.seed)
    policy = "adversarial" if args.policy == "greedy" else args.policy
    runs = {}
    for name, c in ((args.family, code), ("uncoded", base)):
        runs[name] = run_sgd(c, data, policy, args.stragglers, args.steps, args.alpha, args.seed)
    if args.family == "uncoded":
        runs = {"coded": runs["uncoded"], "uncoded": runs["uncoded"]}
    _emit(trajectory_csv(runs), args.out)
    return 0


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="design-gradcode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, family_default="pg", family_choices=FAMILIES):
        p.add_argument("--family", default=family_default, choices=family_choices)
        p.add_argument("--q", type=int, default=2, help="field order (prime power)")
        p.add_argument("--m", type=int, default=2, help="geometry dimension / Hadamard parameter")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output path (stdout if omitted)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("build", help="construct a code and write it as JSON")
    common(p)
    p.add_argument("--dump-design", default=None, metavar="PATH")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("sweep", help="worst-case error versus number of stragglers")
    common(p, family_default=None, family_choices=None)
    p.add_argument("--s-min", type=int, default=0)
    p.add_argument("--s-max", type=int, default=None)
    p.add_argument("--policy", choices=("none", "random", "greedy", "exhaustive"), default="none",
                   help="'exhaustive' replaces closed forms by full enumeration")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("threshold", help="adversarial threshold table")
    common(p)
    p.add_argument("--eta", type=int, nargs="+", default=[1])
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("sgd-demo", help="coded vs uncoded gradient descent trajectories")
    common(p)
    p.add_argument("--policy", choices=("none", "random", "greedy", "exhaustive"), default="greedy")
    p.add_argument("--stragglers", type=int, default=2)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--alpha", type=float, default=2e-3)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--samples", type=int, default=None)
    p.set_defaults(func=cmd_sgd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "steps", 1) < 1:
        parser.error("--steps must be >= 1")
    try:
        return args.func(args)
    except _Usage as exc:
        parser.error(str(exc))
    except GradCodeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
