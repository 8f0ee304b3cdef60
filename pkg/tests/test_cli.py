import csv
import io
import json

import pytest

from stjurina import cli


def run(capsys, *argv):
    try:
        code = cli.main(list(argv))
    except SystemExit as e:  # argparse usage errors
        code = e.code
    out, err = capsys.readouterr()
    return code, out, err


def rows(out):
    return list(csv.DictReader(io.StringIO(out)))


# -- invariants ------------------------------------------------------------------------


def test_invariants_G(capsys):
    code, out, _ = run(capsys, "invariants", "--vars", "x,y", "y^4-x^5+x^3*y^2")
    assert code == 0
    d = json.loads(out)
    assert (d["mu"], d["tau"], d["nu1"], d["ebs"]) == (12, 11, 1, 2)
    assert d["quotient_mu_tau"] == "12/11"


def test_invariants_morse(capsys):
    code, out, _ = run(capsys, "invariants", "--vars", "x,y", "x^2+y^2")
    d = json.loads(out)
    assert code == 0 and (d["mu"], d["tau"], d["nu1"], d["ebs"]) == (1, 1, 0, 1)


def test_invariants_inline_forms(capsys):
    _, a, _ = run(capsys, "invariants", "x,y : x^3 + y^4")
    _, b, _ = run(capsys, "invariants", "x^3 + y^4")
    _, c, _ = run(capsys, "invariants", "E6")
    assert json.loads(a)["mu"] == json.loads(b)["mu"] == json.loads(c)["mu"] == 6


def test_invariants_csv(capsys):
    code, out, _ = run(capsys, "invariants", "G", "--csv")
    assert code == 0 and rows(out)[0]["tau"] == "11"


@pytest.mark.parametrize(
    "argv, code",
    [
        (["invariants", "--vars", "x", "x"], 2),
        (["invariants", "--vars", "x,y", "x^2*y", "--max-degree-cap", "30"], 2),
        (["invariants", "--vars", "x,y", "x^2 +"], 1),
        (["invariants", "--vars", "x", "x^2 + q^2"], 1),
        (["frobnicate"], 1),
        (["join", "G"], 1),
        (["join", "G", "G", "--mode", "modular", "--primes", "2"], 1),
        (["family-scan", "9"], 1),
        (["family-scan", "4", "--max-terms", "3"], 1),
        (["quotient-report", "/nonexistent/file"], 1),
    ],
)
def test_exit_codes(capsys, argv, code):
    got, out, err = run(capsys, *argv)
    assert got == code
    assert out == "" or code == 0
    assert err


def test_exit_code_mapping():
    from stjurina.invariants import AssertionFailure, BSViolation, InternalMismatch
    from stjurina.join import DimensionMismatch, TooLarge

    assert cli.exit_code_for(InternalMismatch("x")) == 3
    assert cli.exit_code_for(BSViolation("x")) == 3
    assert cli.exit_code_for(DimensionMismatch("x")) == 3
    assert cli.exit_code_for(AssertionFailure("x")) == 4
    assert cli.exit_code_for(TooLarge("x")) == 5


def test_resource_cap(capsys, monkeypatch):
    monkeypatch.setattr(cli, "MAX_JOIN_DIM", 100)
    code, out, err = run(capsys, "join", "G", "G")
    assert code == 5 and "TooLarge" in err


# -- join -------------------------------------------------------------------------------------


def test_join_GG(capsys):
    code, out, _ = run(capsys, "join", "G", "G", "--oracle")
    d = json.loads(out)
    assert code == 0
    assert (d["tau_join"], d["theorem_residual"], d["tau_join_fullring"]) == (122, 0, 122)


def test_join_HG_modular(capsys):
    code, out, _ = run(capsys, "join", "H", "G", "--mode", "modular")
    d = json.loads(out)
    assert code == 0
    assert d["tau_join"] == 1363 == d["cor25"]
    assert d["rank_mode"] == "modular, lower-bound-certified rank"
    assert len(d["per_prime_ranks"]) == 3


def test_join_inline(capsys):
    code, out, _ = run(capsys, "join", "--vars", "x", "x^2", "x^2")
    assert code == 0 and json.loads(out)["tau_join"] == 1


def test_join_output_byte_stable(capsys):
    _, a, _ = run(capsys, "join", "G", "E6")
    _, b, _ = run(capsys, "join", "G", "E6")
    assert a == b
    assert json.dumps(json.loads(a), indent=2, ensure_ascii=False) + "\n" == a


# -- germ files ---------------------------------------------------------------------------------


def test_parse_germ_file():
    gf = cli.parse_germ_file("# c\nA : x,y : x^2+y^2 : mu=1 tau=1\n\nB : x : x^3  # tail\njoin : A : B : tau=2\n")
    assert list(gf.entries) == ["A", "B"]
    assert gf.entries["A"].expect == {"mu": 1, "tau": 1}
    assert gf.joins[0].left == "A" and gf.joins[0].expect == {"tau": 2}


@pytest.mark.parametrize(
    "text",
    [
        "A : x : x^2\nA : x : x^3\n",
        "A : x : x^2 +\n",
        "A : x : x^2 : tau=one\n",
        "A : x : x^2 : foo=1\n",
        "join : A : B\n",
        "A : x\n",
    ],
)
def test_bad_germ_files(text):
    with pytest.raises(cli.CatalogError):
        cli.parse_germ_file(text)


def test_bundled_catalog_contents():
    gf = cli.load_germ_file(None)
    for name in ("A1", "E6", "E12", "D5", "D6", "D7", "D8", "G", "H"):
        assert name in gf.entries
    assert gf.entries["G"].expect == {"mu": 12, "tau": 11, "nu1": 1, "ebs": 2}
    assert gf.entries["H"].expect["nu1"] == 21
    assert len(gf.joins) >= 12


def test_verify_catalog_wrong_expectation(tmp_path, capsys):
    p = tmp_path / "bad.txt"
    p.write_text("G : x,y : y^4-x^5+x^3*y^2 : tau=12\nA : x : x^2\njoin : G : A : tau=11\n")
    code, out, _ = run(capsys, "verify-catalog", str(p))
    assert code == 4
    flagged = [r for r in rows(out) if r["status"] == "FAILED"]
    assert [(r["name"], r["check"]) for r in flagged] == [("G", "tau")]


def test_verify_catalog_empty(tmp_path, capsys):
    p = tmp_path / "empty.txt"
    p.write_text("# nothing here\n")
    code, out, _ = run(capsys, "verify-catalog", str(p))
    assert code == 0
    assert rows(out) == []


def test_verify_catalog_small(tmp_path, capsys):
    p = tmp_path / "small.txt"
    p.write_text("G : x,y : y^4-x^5+x^3*y^2\nZ : z : z^2\njoin : G : Z : tau=11\n")
    code, out, _ = run(capsys, "verify-catalog", str(p), "--json")
    assert code == 0
    d = json.loads(out)
    checks = {(r["name"], r["check"]): r for r in d["rows"]}
    assert checks[("G+Z", "fullring_tau")]["computed"] == "11"
    assert all(r["status"] != "FAILED" for r in d["rows"])


# -- family scan ------------------------------------------------------------------------------------


def test_family_scan_n4(capsys):
    code, out, _ = run(capsys, "family-scan", "4")
    assert code == 0
    rs = rows(out)
    assert all(r["mu"] == "12" for r in rs)
    summary = rs[-1]
    assert summary["deformation"] == "min"
    assert (summary["tau"], summary["tau_min_formula"], summary["matches_formula"]) == ("11", "11", "true")
    assert summary["attained_by"] == "x^3*y^2"


def test_family_scan_n5_two_terms(capsys):
    code, out, _ = run(capsys, "family-scan", "5", "--max-terms", "2", "--json")
    d = json.loads(out)
    assert code == 0
    assert d["tau_min_formula"] == "18" and d["tau_min_found"] == 18 and d["matches_formula"]
    assert all(r["mu"] == 20 for r in d["rows"])


def test_family_monomials():
    assert cli.family_monomials(4) == [(3, 2)]
    assert all(a * 5 + b * 6 > 30 for a, b in cli.family_monomials(5))
    assert cli.tau_min_formula(4) == 11 and cli.tau_min_formula(5) == 18


# -- quotient report -----------------------------------------------------------------------------------


def test_quotient_report(tmp_path, capsys):
    p = tmp_path / "q.txt"
    p.write_text(
        "G : x,y : y^4-x^5+x^3*y^2\n"
        "E12 : x,y : x^3+y^7\n"
        "H : x1,x2,x3,x4 : x2^4 - x1^5 + x1^3*x2^2 + x4^4 - x3^5 + x3^3*x4^2\n"
    )
    code, out, _ = run(capsys, "quotient-report", str(p))
    assert code == 0
    got = [tuple(r.values()) for r in rows(out)]
    assert got == [
        ("G", "12", "11", "12/11", "2", "ok"),
        ("E12", "12", "12", "1", "1", "equality-case"),
        ("H", "144", "122", "72/61", "3", "ok"),
    ]
    # CSV survives a parse/serialise round trip byte for byte
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(csv.reader(io.StringIO(out)))
    assert buf.getvalue() == out
