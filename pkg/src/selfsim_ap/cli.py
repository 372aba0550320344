"""Command-line front end.

Every numeric flag is read as an exact rational.  JSON goes to stdout (or
``--out``), with rationals rendered as ``p/q`` and fields in a fixed order so
repeated runs are byte-identical.

Exit codes: 0 definite answer, 1 undecided within the budget, 2 a
certificate that failed re-verification, 64 usage or parse error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .bounds import THEOREM_MAIN, ap_length_bounds, lambda_nm, power_residual, upper_bound_alpha, upper_bound_power
from .construct import APWitness, build_ap, verify_witness
from .core import Coding, GeneralSystem, format_scalar, make_system, parse_scalar, value
from .errors import APError, BudgetError, DomainError, InfeasibleError, ParseError
from .expansion import member
from .search import DEFAULT_ENDPOINT_CAP, DEFAULT_MAX_DEPTH, DEFAULT_NODE_BUDGET, certified_search, endpoint_llap

EXIT_OK = 0
EXIT_UNKNOWN = 1
EXIT_FAILED = 2
EXIT_USAGE = 64

COMMANDS = ("bounds", "construct", "member", "search", "sweep", "solve-lambda", "verify")

SWEEP_COLUMNS = [
    "lambda", "n", "lower", "lower_source", "upper", "upper_source",
    "exact", "search_depth_used", "error",
]


class UsageError(APError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class CommandSpec:
    command: str
    flags: dict
    out: Optional[str] = None


def _params(n: int, lam: Fraction) -> dict:
    return {"n": n, "lambda": format_scalar(lam)}


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def cmd_bounds(n, lam, m_max=8):
    p = make_system(n, lam)
    b = ap_length_bounds(p, m_max)
    power = upper_bound_power(p, m_max)
    doc = {
        "kind": "BOUNDS",
        "params": _params(n, lam),
        "m_max": m_max,
        "bounds": b.to_json(),
        "checks": {
            "alpha": format_scalar(p.alpha),
            "threshold": format_scalar(p.threshold),
            "alpha_bound": upper_bound_alpha(p),
            "power_bound": "inf" if power == float("inf") else int(power),
        },
    }
    return doc, EXIT_OK


def cmd_construct(n, lam, digits=64, depth=256):
    p = make_system(n, lam)
    try:
        w = build_ap(p, digits)
    except InfeasibleError as exc:
        doc = {
            "kind": "INFEASIBLE",
            "params": _params(n, lam),
            "k": n + 1,
            "checks": {"threshold": format_scalar(p.threshold), "reason": str(exc)},
        }
        return doc, EXIT_OK
    report = verify_witness(w, p, depth)
    if report.passed:
        kind, code = "EXISTS", EXIT_OK
    elif not w.exact:
        kind, code = "APPROXIMATE", EXIT_UNKNOWN
    else:
        kind, code = "FAIL", EXIT_FAILED
    doc = {
        "kind": kind,
        "params": _params(n, lam),
        "k": w.length,
        "witness": w.to_json(),
        "checks": report.checks,
    }
    return doc, code


def cmd_member(n, lam, x, depth=256):
    p = make_system(n, lam)
    r = member(x, p, depth)
    doc = {
        "kind": "MEMBER",
        "params": _params(n, lam),
        "x": format_scalar(x),
        "verdict": r.verdict,
        "depth": r.depth,
    }
    if r.coding is not None:
        doc["coding"] = r.coding.to_json()
    return doc, EXIT_UNKNOWN if r.verdict == "UNKNOWN" else EXIT_OK


def cmd_search(n, lam, k, max_depth=DEFAULT_MAX_DEPTH, budget=DEFAULT_NODE_BUDGET, depth=256):
    p = make_system(n, lam)
    cert = certified_search(p, k, max_depth, budget)
    if cert.witness is not None:
        cert.checks = verify_witness(cert.witness, p, depth).checks
    doc = cert.to_json()
    doc["params"] = _params(n, lam)
    return doc, EXIT_UNKNOWN if cert.kind == "UNKNOWN" else EXIT_OK


def cmd_solve_lambda(n, m, tol=Fraction(1, 10**12)):
    box = lambda_nm(n, m, tol)
    f_lo, f_hi = power_residual(n, m, box.low), power_residual(n, m, box.high)
    doc = {
        "kind": "ROOT_BRACKET",
        "params": {"n": n, "m": m},
        "tol": format_scalar(tol),
        "interval": {"low": format_scalar(box.low), "high": format_scalar(box.high)},
        "width": format_scalar(box.width),
        "checks": {"residual_sign_low": _sign(f_lo), "residual_sign_high": _sign(f_hi)},
    }
    return doc, EXIT_OK


def _sweep_row(n: int, lam: Fraction, m_depth: int, cap: int) -> dict:
    row = dict.fromkeys(SWEEP_COLUMNS, "")
    row.update({"lambda": format_scalar(lam), "n": n})
    try:
        p = make_system(n, lam)
        bounds = ap_length_bounds(p)
        lowers = [(bounds.lower, THEOREM_MAIN)]
        if lam >= p.threshold:
            w = build_ap(p)
            if verify_witness(w, p).passed:
                lowers.append((w.length, w.provenance))
        m = m_depth
        while m > 1 and n**m > cap:
            m -= 1
        lowers.append((endpoint_llap(p, m, cap).length, "EndpointDP"))
        lower = max(v for v, _ in lowers)
        row["lower"] = lower
        row["lower_source"] = "|".join(tag for v, tag in lowers if v == lower)
        row["upper"] = "inf" if bounds.upper == float("inf") else int(bounds.upper)
        row["upper_source"] = "|".join(s for s in bounds.sources if s != THEOREM_MAIN) or THEOREM_MAIN
        if lower == bounds.upper:
            row["exact"] = lower
        row["search_depth_used"] = m
    except APError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep(n: int, grid: Sequence[Fraction], m_depth: int = 8, out=None,
          cap: int = DEFAULT_ENDPOINT_CAP) -> dict:
    """Write one CSV row per grid value; return a summary of the staircase."""
    writer = csv.DictWriter(out, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    rows = []
    for lam in grid:
        row = _sweep_row(n, lam, m_depth, cap)
        writer.writerow(row)
        rows.append((lam, row))
    exact = [(lam, row["exact"]) for lam, row in sorted(rows, key=lambda r: r[0]) if row["exact"] != ""]
    non_decreasing = all(a[1] <= b[1] for a, b in zip(exact, exact[1:]))
    return {
        "rows": len(rows),
        "errors": sum(1 for _, row in rows if row["error"]),
        "exact_values": [[format_scalar(lam), v] for lam, v in exact],
        "exact_non_decreasing": non_decreasing,
    }


def _system_from(params: dict):
    lam = parse_scalar(params["lambda"])
    if "b" in params:
        return GeneralSystem(int(params["n"]), lam, tuple(parse_scalar(x) for x in params["b"]))
    return make_system(int(params["n"]), lam)


def _witness_from(doc: dict) -> APWitness:
    w = doc["witness"]
    codings = [Coding.from_json(c) for c in w.get("codings", [])] or None
    if "terms" in w:
        terms = [parse_scalar(x) for x in w["terms"]]
        witness = APWitness(terms, codings, w.get("provenance", "External"),
                            parse_scalar(w["residual"]), int(w["residual_index"]))
        return witness
    witness = APWitness.progression(parse_scalar(w["first"]), parse_scalar(w["diff"]),
                                    int(w["length"]), codings, w.get("provenance", "External"))
    return witness


def cmd_verify(path: str, depth=256):
    with open(path) as fh:
        doc = json.load(fh)
    kind = doc.get("kind")
    checks = []

    def add(name, ok, detail=""):
        checks.append({"check": name, "ok": bool(ok), "detail": detail})

    params = doc.get("params", {})
    if kind in ("EXISTS", "APPROXIMATE", "FAIL") and "witness" in doc:
        system = _system_from(params)
        witness = _witness_from(doc)
        report = verify_witness(witness, system, depth)
        if kind == "APPROXIMATE":
            # The truncated terms are declared inexact; what is claimed is the
            # window bound on the residual, which guarantees an exact continuation.
            for c in report.checks:
                if c["check"] == "ap_identity":
                    add("ap_identity_inexact_as_declared", not c["ok"], c["detail"])
                else:
                    checks.append(c)
            add("declared_truncated", not witness.exact)
        else:
            checks.extend(report.checks)
            add("verdict_matches", (kind == "EXISTS") == report.passed,
                f"certificate says {kind}, re-check {'PASS' if report.passed else 'FAIL'}")
    elif kind in ("NOT_EXISTS", "UNKNOWN") and "k" in doc:
        system = _system_from(params)
        again = certified_search(system, int(doc["k"]), int(doc.get("depth") or 1))
        add("search_reproduced", again.kind == kind and again.depth == doc.get("depth"),
            f"re-run gives {again.kind} at depth {again.depth}")
    elif kind == "BOUNDS":
        fresh, _ = cmd_bounds(int(params["n"]), parse_scalar(params["lambda"]), int(doc.get("m_max", 8)))
        add("bounds_reproduced", fresh["bounds"] == doc.get("bounds"), json.dumps(fresh["bounds"]))
    elif kind == "ROOT_BRACKET":
        n, m = int(params["n"]), int(params["m"])
        lo, hi = parse_scalar(doc["interval"]["low"]), parse_scalar(doc["interval"]["high"])
        add("residual_signs", power_residual(n, m, lo) <= 0 <= power_residual(n, m, hi))
        add("width_within_tol", hi - lo <= parse_scalar(doc["tol"]))
    elif kind == "MEMBER":
        system = _system_from(params)
        x = parse_scalar(doc["x"])
        if doc.get("verdict") == "YES" and "coding" in doc:
            add("coding_value", value(Coding.from_json(doc["coding"]), system) == x)
        else:
            again = member(x, system, max(int(doc.get("depth") or 1), 1))
            add("verdict_reproduced", again.verdict == doc.get("verdict"), again.verdict)
    elif kind == "INFEASIBLE":
        p = make_system(int(params["n"]), parse_scalar(params["lambda"]))
        add("below_threshold", p.lam < p.threshold)
    else:
        raise UsageError(f"cannot verify certificate of kind {kind!r}")
    passed = bool(checks) and all(c["ok"] for c in checks)
    out = {
        "kind": "VERIFY",
        "certificate_kind": kind,
        "result": "PASS" if passed else "FAIL",
        "checks": checks,
    }
    return out, EXIT_OK if passed else EXIT_FAILED


def _scalar(text):
    try:
        return parse_scalar(text)
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="selfsim-ap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def system_flags(sp):
        sp.add_argument("-n", type=int, required=True, help="number of maps")
        sp.add_argument("--lambda", dest="lam", type=_scalar, required=True, help="contraction ratio p/q")

    sp = sub.add_parser("bounds", help="closed-form bounds on the longest progression")
    system_flags(sp)
    sp.add_argument("--m-max", type=int, default=8)

    sp = sub.add_parser("construct", help="explicit 2n-term progression")
    system_flags(sp)
    sp.add_argument("--digits", type=int, default=64)
    sp.add_argument("--depth", type=int, default=256, help="membership depth cap")

    sp = sub.add_parser("member", help="decide membership of a rational point")
    system_flags(sp)
    sp.add_argument("--x", type=_scalar, required=True)
    sp.add_argument("--depth", type=int, default=256)

    sp = sub.add_parser("search", help="certified k-term progression search")
    system_flags(sp)
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("--max-depth", type=int, default=DEFAULT_MAX_DEPTH)
    sp.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET)

    sp = sub.add_parser("sweep", help="CSV of bounds over a grid of ratios")
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("--grid", required=True, help='comma-separated ratios, e.g. "3/10,1/3"')
    sp.add_argument("--m-depth", type=int, default=8)

    sp = sub.add_parser("solve-lambda", help="bracket the root of n x + (n-1) x^m = 1")
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("-m", type=int, required=True)
    sp.add_argument("--tol", type=_scalar, default=Fraction(1, 10**12))

    sp = sub.add_parser("verify", help="re-check a JSON certificate")
    sp.add_argument("--cert", required=True)
    sp.add_argument("--depth", type=int, default=256)

    for sp in sub.choices.values():
        sp.add_argument("--out", help="write output here instead of stdout")
    return parser


def parse_command(argv: Sequence[str]) -> CommandSpec:
    args = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "out")}
    return CommandSpec(args.command, flags, args.out)


def _parse_grid(text: str) -> list:
    items = [t for t in (s.strip() for s in text.split(",")) if t]
    return [parse_scalar(t) for t in items]


def run(spec: CommandSpec, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    f = spec.flags
    if spec.command == "sweep":
        buf = io.StringIO()
        summary = sweep(f["n"], _parse_grid(f["grid"]), f["m_depth"], buf)
        _emit(buf.getvalue(), spec.out, stdout)
        stderr.write(json.dumps(summary) + "\n")
        return EXIT_OK
    if spec.command == "bounds":
        doc, code = cmd_bounds(f["n"], f["lam"], f["m_max"])
    elif spec.command == "construct":
        doc, code = cmd_construct(f["n"], f["lam"], f["digits"], f["depth"])
    elif spec.command == "member":
        doc, code = cmd_member(f["n"], f["lam"], f["x"], f["depth"])
    elif spec.command == "search":
        doc, code = cmd_search(f["n"], f["lam"], f["k"], f["max_depth"], f["budget"])
    elif spec.command == "solve-lambda":
        doc, code = cmd_solve_lambda(f["n"], f["m"], f["tol"])
    else:
        doc, code = cmd_verify(f["cert"], f["depth"])
    _emit(json.dumps(doc, indent=2) + "\n", spec.out, stdout)
    return code


def _emit(text: str, path: Optional[str], stdout) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(parse_command(argv))
    except (UsageError, ParseError, DomainError, BudgetError, OSError, KeyError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
