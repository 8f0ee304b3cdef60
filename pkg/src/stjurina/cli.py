"""Command-line front end: germ files, the bundled catalog, batch verification and scans."""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .exactla import BadPrime
from .groebner import DEFAULT_DEGREE_CAP, NonIsolated
from .invariants import (
    AssertionFailure,
    BSViolation,
    Germ,
    GermError,
    InternalMismatch,
    invariant_report,
    milnor_number,
    tjurina_number,
)
from .join import (
    DEFAULT_PRIMES,
    DimensionMismatch,
    ProfileMismatch,
    TooLarge,
    b_minus_u_over_seeds,
    make_join,
    verify_theorem,
)
from .polyring import Polynomial, PolynomialError, VariableSet, to_text

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_NONISOLATED = 2
EXIT_INTERNAL = 3
EXIT_ASSERTION = 4
EXIT_RESOURCE = 5

# joins larger than this are refused outright
MAX_JOIN_DIM = 100_000
BU_SEEDS = 20


class CatalogError(ValueError):
    pass


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (NonIsolated, GermError)):
        return EXIT_NONISOLATED
    if isinstance(exc, (InternalMismatch, BSViolation, DimensionMismatch)):
        return EXIT_INTERNAL
    if isinstance(exc, AssertionFailure):
        return EXIT_ASSERTION
    if isinstance(exc, TooLarge):
        return EXIT_RESOURCE
    if isinstance(exc, (PolynomialError, CatalogError, ProfileMismatch, BadPrime, ValueError)):
        return EXIT_PARSE
    raise exc


# -- germ files -----------------------------------------------------------------


@dataclass
class CatalogEntry:
    name: str
    vars: str
    text: str
    expect: dict[str, int] = field(default_factory=dict)

    def germ(self) -> Germ:
        return Germ.parse(self.text, self.vars, self.name)


@dataclass
class JoinEntry:
    left: str
    right: str
    expect: dict[str, int] = field(default_factory=dict)


@dataclass
class GermFile:
    path: str
    entries: dict[str, CatalogEntry] = field(default_factory=dict)
    joins: list[JoinEntry] = field(default_factory=list)


_EXPECT_KEYS = {"mu", "tau", "nu1", "ebs"}


def _parse_expectations(text: str, lineno: int) -> dict[str, int]:
    out = {}
    for item in text.split():
        key, sep, value = item.partition("=")
        if not sep or key not in _EXPECT_KEYS:
            raise CatalogError(f"line {lineno}: bad expectation {item!r}")
        try:
            out[key] = int(value)
        except ValueError:
            raise CatalogError(f"line {lineno}: expectation {item!r} is not an integer") from None
    return out


def parse_germ_file(text: str, path: str = "<string>") -> GermFile:
    gf = GermFile(path)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(":")]
        if parts[0] == "join":
            if len(parts) not in (3, 4):
                raise CatalogError(f"line {lineno}: expected 'join : A : B [: tau=..]'")
            expect = _parse_expectations(parts[3], lineno) if len(parts) == 4 else {}
            gf.joins.append(JoinEntry(parts[1], parts[2], expect))
            continue
        if len(parts) not in (3, 4):
            raise CatalogError(f"line {lineno}: expected 'name : vars : polynomial [: expectations]'")
        name = parts[0]
        if name in gf.entries:
            raise CatalogError(f"line {lineno}: duplicate germ name {name!r}")
        expect = _parse_expectations(parts[3], lineno) if len(parts) == 4 else {}
        entry = CatalogEntry(name, parts[1], parts[2], expect)
        try:
            entry.germ()
        except PolynomialError as e:
            raise CatalogError(f"line {lineno}: {e}") from e
        gf.entries[name] = entry
    for j in gf.joins:
        for side in (j.left, j.right):
            if side not in gf.entries:
                raise CatalogError(f"join refers to unknown germ {side!r}")
    return gf


def load_germ_file(path: str | None) -> GermFile:
    if path is None:
        text = resources.files("stjurina").joinpath("data/catalog.txt").read_text(encoding="utf-8")
        return parse_germ_file(text, "<bundled catalog>")
    return parse_germ_file(Path(path).read_text(encoding="utf-8"), path)


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def resolve_germ(spec: str, vars: str | None, catalog: GermFile) -> Germ:
    """A catalog name, 'vars : polynomial', or polynomial text (with --vars or inferred)."""
    spec = spec.strip()
    if spec in catalog.entries and vars is None:
        return catalog.entries[spec].germ()
    if ":" in spec:
        v, _, text = spec.partition(":")
        return Germ.parse(text, v.strip())
    if vars is None:
        vars = ",".join(sorted(set(_IDENT.findall(spec))))
    return Germ.parse(spec, vars)


# -- output -----------------------------------------------------------------------


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


def _emit_csv(header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows([["" if c is None else str(c) for c in r] for r in rows])
    sys.stdout.write(buf.getvalue())


def _emit_table(args, header: list[str], rows: list[list], extra: dict | None = None) -> None:
    if args.format == "json":
        obj = {"rows": [dict(zip(header, ["" if c is None else str(c) for c in r])) for r in rows]}
        if extra:
            obj.update(extra)
        _emit_json(obj)
    else:
        _emit_csv(header, rows)


# -- verbs ------------------------------------------------------------------------


def cmd_invariants(args) -> int:
    catalog = load_germ_file(args.catalog)
    g = resolve_germ(args.germ, args.vars, catalog)
    report = invariant_report(g, args.max_degree_cap)
    d = report.to_dict()
    if args.format == "csv":
        _emit_csv(list(d), [[_flat(v) for v in d.values()]])
    else:
        _emit_json(d)
    return EXIT_OK


def _flat(v):
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return v


def _check_size(g1: Germ, g2: Germ, degree_cap: int) -> None:
    n = milnor_number(g1, degree_cap) * milnor_number(g2, degree_cap)
    if n > MAX_JOIN_DIM:
        raise TooLarge(f"tensor algebra of dimension {n} exceeds the cap {MAX_JOIN_DIM}")


def cmd_join(args) -> int:
    catalog = load_germ_file(args.catalog)
    g1 = resolve_germ(args.germ1, args.vars, catalog)
    g2 = resolve_germ(args.germ2, args.vars2 or args.vars, catalog)
    _check_size(g1, g2, args.max_degree_cap)
    j = make_join(g1, g2)
    report = verify_theorem(j, args.mode, args.primes, args.seed, args.oracle, args.max_degree_cap)
    d = report.to_dict()
    if args.format == "csv":
        flat = {k: v for k, v in d.items() if not isinstance(v, dict)}
        _emit_csv(list(flat), [[_flat(v) for v in flat.values()]])
    else:
        _emit_json(d)
    return EXIT_OK


CATALOG_HEADER = ["kind", "name", "check", "expected", "computed", "status"]


def _germ_rows(entry: CatalogEntry, degree_cap: int) -> tuple[list[list], int]:
    try:
        r = invariant_report(entry.germ(), degree_cap)
    except (ArithmeticError, ValueError, RuntimeError, AssertionError) as e:
        code = exit_code_for(e)
        return [["germ", entry.name, "invariants", "", f"{type(e).__name__}: {e}", "FAILED"]], code
    rows, code = [], EXIT_OK
    computed = {"mu": r.mu, "tau": r.tau, "nu1": r.nu1, "ebs": r.ebs}
    for key in ("mu", "tau", "nu1", "ebs"):
        exp = entry.expect.get(key)
        ok = exp is None or exp == computed[key]
        rows.append(["germ", entry.name, key, exp, computed[key], "ok" if ok else "FAILED"])
        if not ok:
            code = code or EXIT_ASSERTION
    rows.append(["germ", entry.name, "ebs<=arity", r.arity, r.ebs, "ok" if r.ebs <= r.arity else "FAILED"])
    rows.append(["germ", entry.name, "mu/tau<ebs", "", f"{r.quotient_mu_tau} vs {r.ebs}", r.bs_verdict])
    return rows, code


def _join_rows(je: JoinEntry, catalog: GermFile, args) -> tuple[list[list], int]:
    name = f"{je.left}+{je.right}"
    try:
        g1 = catalog.entries[je.left].germ()
        g2 = catalog.entries[je.right].germ()
        _check_size(g1, g2, args.max_degree_cap)
        j = make_join(g1, g2)
        rep = verify_theorem(j, args.mode, args.primes, args.seed, True, args.max_degree_cap)
    except (ArithmeticError, ValueError, RuntimeError, AssertionError) as e:
        code = exit_code_for(e)
        return [["join", name, "verify_theorem", "", f"{type(e).__name__}: {e}", "FAILED"]], code
    rows = [
        ["join", name, f"tau ({rep.rank_mode})", je.expect.get("tau"), rep.tau_join_tensor, "ok"],
        ["join", name, "theorem_residual", 0, rep.theorem_residual, "ok"],
        ["join", name, "bounds", "", rep.tau_join_tensor, "ok" if rep.bounds_ok else "FAILED"],
        ["join", name, "b,u", "", f"{rep.b},{rep.u}", "ok"],
    ]
    code = EXIT_OK
    exp = je.expect.get("tau")
    if exp is not None and exp != rep.tau_join_tensor:
        rows[0][-1] = "FAILED"
        code = EXIT_ASSERTION
    if rep.directsum_ok is not None:
        rows.append(["join", name, "directsum", rep.directsum["bookkeeping"], rep.directsum["dim_im_F"], "ok"])
    if rep.tau_join_fullring is not None:
        rows.append(["join", name, "fullring_tau", rep.tau_join_tensor, rep.tau_join_fullring, "ok"])
    if rep.cor25 is not None:
        rows.append(["join", name, "cor25", rep.cor25, rep.tau_join_tensor, "ok"])
    if rep.r1.dim_B and rep.r2.dim_B:
        diffs = sorted({b - u for b, u in b_minus_u_over_seeds(j, range(BU_SEEDS), args.max_degree_cap)})
        ok = diffs == [rep.b - rep.u]
        rows.append(["join", name, f"b-u over {BU_SEEDS} seeds", rep.b - rep.u, " ".join(map(str, diffs)),
                     "ok" if ok else "FAILED"])
        if not ok:
            code = code or EXIT_ASSERTION
    for key in ("charqh", "maximaltau", "small_gap"):
        rows.append(["join", name, key, "", rep.verdicts[key], "ok"])
    for prof, verdict in rep.verdicts["quotient_bounds"].items():
        rows.append(["join", name, prof, "", verdict, "ok"])
    return rows, code


def cmd_verify_catalog(args) -> int:
    catalog = load_germ_file(args.catalog_path or args.catalog)
    rows, code = [], EXIT_OK
    for entry in catalog.entries.values():
        r, c = _germ_rows(entry, args.max_degree_cap)
        rows += r
        code = code or c
    for je in catalog.joins:
        r, c = _join_rows(je, catalog, args)
        rows += r
        code = code or c
    _emit_table(args, CATALOG_HEADER, rows)
    return code


def tau_min_formula(n: int) -> Fraction:
    return Fraction(3 * n * n, 4) - 1 if n % 2 == 0 else Fraction(3 * (n * n - 1), 4)


def family_monomials(n: int) -> list[tuple[int, int]]:
    """x^a y^b with a <= n-1, b <= n-2 and w-degree above n(n+1), w = (n, n+1)."""
    return [
        (a, b)
        for a in range(n)
        for b in range(n - 1)
        if a * n + b * (n + 1) > n * (n + 1)
    ]


def family_scan(n: int, max_terms: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> dict:
    if not 3 <= n <= 8:
        raise ValueError("family-scan needs 3 <= n <= 8")
    if max_terms not in (1, 2):
        raise ValueError("--max-terms must be 1 or 2")
    vs = VariableSet(("x", "y"))
    base = Polynomial.monomial((0, n), vs) - Polynomial.monomial((n + 1, 0), vs)
    mons = family_monomials(n)
    mu_expected = (n - 1) * n
    rows = []
    # the empty sum counts as a deformation too, so n = 3 still has a member
    for k in range(0, max_terms + 1):
        for combo in itertools.combinations(mons, k):
            g = base
            for m in combo:
                g = g + Polynomial.monomial(m, vs)
            germ = Germ(g)
            mu = milnor_number(germ, degree_cap)
            if mu != mu_expected:
                raise AssertionFailure("family member is not mu-constant", {"germ": to_text(g), "mu": mu})
            tau = tjurina_number(germ, degree_cap)
            deformation = " + ".join(to_text(Polynomial.monomial(m, vs)) for m in combo) or "0"
            rows.append([deformation, mu, tau, Fraction(mu, tau)])
    tmin = min(r[2] for r in rows)
    argmin = [r[0] for r in rows if r[2] == tmin]
    formula = tau_min_formula(n)
    return {
        "n": n,
        "max_terms": max_terms,
        "rows": rows,
        "tau_min_found": tmin,
        "tau_min_formula": formula,
        "matches_formula": Fraction(tmin) == formula,
        "attained_by": argmin,
    }


def cmd_family_scan(args) -> int:
    res = family_scan(args.n, args.max_terms, args.max_degree_cap)
    header = ["deformation", "mu", "tau", "mu/tau", "tau_min_formula", "matches_formula", "attained_by"]
    rows = [r + [None, None, None] for r in res["rows"]]
    rows.append(["min", (args.n - 1) * args.n, res["tau_min_found"],
                 Fraction((args.n - 1) * args.n, res["tau_min_found"]), res["tau_min_formula"],
                 str(res["matches_formula"]).lower(), " | ".join(res["attained_by"])])
    if args.format == "json":
        _emit_json({
            "n": res["n"],
            "max_terms": res["max_terms"],
            "rows": [{"deformation": r[0], "mu": r[1], "tau": r[2], "mu/tau": str(r[3])} for r in res["rows"]],
            "tau_min_found": res["tau_min_found"],
            "tau_min_formula": str(res["tau_min_formula"]),
            "matches_formula": res["matches_formula"],
            "attained_by": res["attained_by"],
        })
    else:
        _emit_csv(header, rows)
    return EXIT_OK


QUOTIENT_HEADER = ["name", "mu", "tau", "mu/tau", "ebs", "verdict"]


def cmd_quotient_report(args) -> int:
    gf = load_germ_file(args.path)
    rows, code = [], EXIT_OK
    for entry in gf.entries.values():
        try:
            r = invariant_report(entry.germ(), args.max_degree_cap)
            rows.append([entry.name, r.mu, r.tau, r.quotient_mu_tau, r.ebs, r.bs_verdict])
        except AssertionFailure as e:
            rows.append([entry.name, "", "", "", "", f"FAILED: {e}"])
            code = code or EXIT_ASSERTION
    _emit_table(args, QUOTIENT_HEADER, rows)
    return code


# -- argument parsing ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--vars", help="comma separated variable names for inline germ text")
    p.add_argument("--mode", choices=["exact", "modular"], default="exact")
    p.add_argument("--primes", type=_positive, default=DEFAULT_PRIMES, help="number of primes in modular mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-degree-cap", type=_positive, default=DEFAULT_DEGREE_CAP)
    p.add_argument("--catalog", help="germ file used to resolve names (default: bundled catalog)")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json")
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stjurina", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("invariants", help="mu, tau, nu1, e^BS and the decomposition of one germ")
    p.add_argument("germ")
    _common(p)
    p.set_defaults(func=cmd_invariants, default_format="json")

    p = sub.add_parser("join", help="verify the Tjurina formula for f1(x) + f2(y)")
    p.add_argument("germ1")
    p.add_argument("germ2")
    p.add_argument("--vars2", help="variables of the second germ when they differ from --vars")
    p.add_argument("--oracle", action="store_true", help="also compute tau on the combined ring")
    _common(p)
    p.set_defaults(func=cmd_join, default_format="json")

    p = sub.add_parser("verify-catalog", help="run every check in a germ file")
    p.add_argument("catalog_path", nargs="?", help="germ file (default: bundled catalog)")
    _common(p)
    p.set_defaults(func=cmd_verify_catalog, default_format="csv")

    p = sub.add_parser("family-scan", help="tau over deformations of y^n - x^(n+1)")
    p.add_argument("n", type=int)
    p.add_argument("--max-terms", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_family_scan, default_format="csv")

    p = sub.add_parser("quotient-report", help="mu/tau against e^BS for each germ in a file")
    p.add_argument("path")
    _common(p)
    p.set_defaults(func=cmd_quotient_report, default_format="csv")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.format is None:
        args.format = args.default_format
    if args.mode == "modular" and args.primes < 3:
        print("stjurina: error: modular mode needs at least 3 primes", file=sys.stderr)
        return EXIT_PARSE
    try:
        return args.func(args)
    except (ArithmeticError, ValueError, RuntimeError, AssertionError, OSError) as e:
        if isinstance(e, OSError):
            print(f"stjurina: {e}", file=sys.stderr)
            return EXIT_PARSE
        code = exit_code_for(e)
        print(f"stjurina: {type(e).__name__}: {e}", file=sys.stderr)
        values = getattr(e, "values", None)
        if values:
            print(json.dumps(values, indent=2, default=str), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
