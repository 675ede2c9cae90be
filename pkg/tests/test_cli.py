import json
import subprocess
import sys

import pytest

from traintrack.cli import main
from traintrack.formats import dump_automorphism
from traintrack.fixtures import fixture_text

PHI = (1 + 5 ** 0.5) / 2


@pytest.fixture(scope="session")
def files(tmp_path_factory, rel):
    d = tmp_path_factory.mktemp("inputs")
    for name, fname in [
        ("fib", "fib.aut"), ("plas", "plas.aut"),
        ("poly", "poly.aut"), ("broken", "broken.gm"),
    ]:
        (d / fname).write_text(fixture_text(name))
    (d / "rel.aut").write_text(dump_automorphism(rel))
    (d / "bad.aut").write_text("basis: a b\nmap: a -> c\nmap: b -> a\n")
    (d / "notes.txt").write_text("not an input\n")
    return d


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


class TestAnalyze:
    def test_fib_json(self, capsys, files):
        code, out, err = run(capsys, "analyze", files / "fib.aut")
        assert code == 0 and err == ""
        rep = json.loads(out)
        assert rep["kind"] == "automorphism"
        assert rep["rank"] == 2
        (s,) = rep["strata"]
        assert s["kind"] == "exponential"
        assert s["lambda"] == pytest.approx(PHI, abs=1e-9)
        assert rep["rtt"]["passed"] is True
        # period-2 Nielsen path: stronger conditions fail, exit still 0
        assert rep["improved"]["passed"] is False

    def test_strict_gates_on_improved(self, capsys, files):
        code, _, _ = run(capsys, "analyze", files / "fib.aut", "--strict")
        assert code == 1

    def test_broken_graph_map_fails(self, capsys, files):
        code, out, _ = run(capsys, "analyze", files / "broken.gm")
        assert code == 1
        rep = json.loads(out)
        assert rep["rtt"]["passed"] is False
        (v,) = rep["rtt"]["violations"]
        assert v["condition"] == 1
        assert v["edge"] == "ea"
        assert v["stratum"] == 2

    def test_text_format(self, capsys, files):
        code, out, _ = run(
            capsys, "analyze", files / "fib.aut", "--format", "text"
        )
        assert code == 0
        assert "stratum 1: exponential" in out
        assert "rtt: pass" in out

    def test_csv_format(self, capsys, files):
        code, out, _ = run(
            capsys, "analyze", files / "plas.aut", "--format", "csv"
        )
        assert code == 0
        head, row = out.splitlines()
        assert head == "index,edges,kind,lambda"
        assert row.startswith("1,a b c,exponential,1.32471795724")


class TestProbe:
    def test_fib_witnesses(self, capsys, files):
        code, out, _ = run(
            capsys, "probe", files / "fib.aut", "-L", "4", "-P", "2"
        )
        assert code == 0
        rep = json.loads(out)
        assert rep["verdict"] == "not-atoroidal"
        assert rep["classes_enumerated"] == 50
        assert rep["witnesses"] == [
            {"class": "a b^-1 a^-1 b", "norm": 4, "period": 2,
             "inverted": True, "inversion_step": 1},
            {"class": "a b a^-1 b^-1", "norm": 4, "period": 2,
             "inverted": True, "inversion_step": 1},
        ]

    def test_plas_no_witness(self, capsys, files):
        code, out, _ = run(
            capsys, "probe", files / "plas.aut", "-L", "5", "-P", "3"
        )
        assert code == 0
        rep = json.loads(out)
        assert rep["verdict"] == "no-witness-within-bounds"
        assert rep["witnesses"] == []

    def test_jobs_do_not_change_bytes(self, capsys, files):
        argv = ["probe", files / "fib.aut", "-L", "4", "-P", "2"]
        _, one, _ = run(capsys, *argv, "--jobs", "1")
        _, four, _ = run(capsys, *argv, "--jobs", "4")
        assert one == four


class TestCertify:
    def test_plas_certificate(self, capsys, files):
        code, out, _ = run(capsys, "certify", files / "plas.aut")
        assert code == 0
        rep = json.loads(out)
        assert rep["verdict"] == "empirical-certificate"
        assert rep["M"] == 3
        assert rep["lambda_exact"] == [6, 5]
        assert rep["lambda"] == pytest.approx(1.2)
        assert [h["argmin"] for h in rep["history"]] == [
            "a b a b a c^-1", "a b a c^-1 b^-1", "a b a c^-1 b^-1",
        ]

    def test_fib_no_certificate(self, capsys, files):
        code, out, _ = run(
            capsys, "certify", files / "fib.aut", "-M", "6", "-L", "4"
        )
        assert code == 0
        rep = json.loads(out)
        assert rep["verdict"] == "no-certificate-within-bounds"
        assert rep["M"] is None
        assert all(h["ratio"] == 1.0 for h in rep["history"])

    def test_csv_stable_across_jobs(self, capsys, files):
        argv = ["certify", files / "plas.aut", "-L", "5", "--format", "csv"]
        _, one, _ = run(capsys, *argv, "--jobs", "1")
        _, three, _ = run(capsys, *argv, "--jobs", "3")
        assert one == three
        assert one.splitlines()[0] == "class,norm,fwd,bwd,ratio"


class TestGrowth:
    def test_fibonacci_series(self, capsys, files):
        code, out, _ = run(capsys, "growth", files / "fib.aut", "a")
        assert code == 0
        assert out == "k,norm\n0,1\n1,2\n2,3\n3,5\n4,8\n5,13\n6,21\n"

    def test_negative_exponents(self, capsys, files):
        code, out, _ = run(
            capsys, "growth", files / "fib.aut", "a",
            "--k-min", "-3", "--k-max", "0",
        )
        assert code == 0
        assert out == "k,norm\n-3,3\n-2,2\n-1,1\n0,1\n"

    def test_unknown_letter(self, capsys, files):
        code, _, err = run(capsys, "growth", files / "fib.aut", "z")
        assert code == 2
        assert err.startswith("error:")


class TestNielsen:
    def test_fib_inventory(self, capsys, files):
        code, out, _ = run(capsys, "nielsen", files / "fib.aut")
        assert code == 0
        rep = json.loads(out)
        assert rep["count"] == 1
        (row,) = rep["paths"]
        assert row["path"] == "a^-1 b^-1 a b"
        assert row["period"] == 2
        assert row["indivisible"] is True
        assert row["illegal"] == 1


class TestValidate:
    def test_bcc_constants(self, capsys, files):
        code, out, _ = run(capsys, "validate", files / "fib.aut", "bcc")
        assert code == 0
        assert out == (
            "quantity,value\n"
            "C_f,3.2360679775\n"
            "window,3\n"
            "stable,true\n"
            "critical_length_1,10.472135955\n"
        )

    def test_bw1_rows_pass(self, capsys, files):
        code, out, _ = run(
            capsys, "validate", files / "fib.aut", "bw1", "--samples", "40"
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "circuit,k,L,Lr,i,ir,scriptL,bound,margin,pass"
        rows = [l.rsplit(",", 2) for l in lines[1:]]
        assert len(rows) == 200
        assert all(r[2] == "true" and float(r[1]) > 0 for r in rows)

    def test_bw2_relative(self, capsys, files):
        code, out, _ = run(
            capsys, "validate", files / "rel.aut", "bw2", "--samples", "30"
        )
        assert code == 0
        assert all(l.endswith(",true") for l in out.splitlines()[1:])

    def test_illen(self, capsys, files):
        code, out, _ = run(capsys, "validate", files / "fib.aut", "illen")
        assert code == 0
        assert out.splitlines()[0] == "quantity,value"

    def test_backgrowth_never_spurious(self, capsys, files):
        code, out, _ = run(
            capsys, "validate", files / "fib.aut", "backgrowth",
            "--samples", "120",
        )
        assert code == 0

    def test_tricho(self, capsys, files):
        code, out, _ = run(
            capsys, "validate", files / "fib.aut", "tricho", "--samples", "12"
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "path,case,pass"
        assert len(lines) == 13
        assert all(l.endswith(",true") for l in lines[1:])

    def test_decomp(self, capsys, files):
        code, out, _ = run(
            capsys, "validate", files / "plas.aut", "decomp", "--samples", "8"
        )
        assert code == 0
        assert out.splitlines()[0] == "circuit,case,fraction,pieces,pass"

    def test_seed_reproducibility(self, capsys, files):
        argv = ["validate", files / "fib.aut", "bw1", "--samples", "25"]
        _, a, _ = run(capsys, *argv, "--seed", "7")
        _, b, _ = run(capsys, *argv, "--seed", "7")
        _, c, _ = run(capsys, *argv, "--seed", "8")
        assert a == b
        assert a != c


class TestInputErrors:
    def test_missing_file(self, capsys, files):
        code, out, err = run(capsys, "analyze", files / "absent.aut")
        assert code == 2 and out == ""
        assert err.startswith("error:")

    def test_unknown_extension(self, capsys, files):
        code, _, err = run(capsys, "analyze", files / "notes.txt")
        assert code == 2
        assert ".aut or .gm" in err

    def test_parse_error_carries_location(self, capsys, files):
        code, _, err = run(capsys, "probe", files / "bad.aut")
        assert code == 2
        assert "bad.aut:2" in err

    def test_tol_must_be_positive(self, capsys, files):
        code, _, err = run(
            capsys, "analyze", files / "fib.aut", "--tol", "0"
        )
        assert code == 2

    def test_jobs_must_be_positive(self, capsys, files):
        code, _, err = run(
            capsys, "probe", files / "fib.aut", "--jobs", "0"
        )
        assert code == 2

    def test_argparse_rejects_unknown_lemma(self, capsys, files):
        with pytest.raises(SystemExit) as exc:
            main(["validate", str(files / "fib.aut"), "nope"])
        assert exc.value.code == 2


class TestEntryPoints:
    def test_module_execution(self, files):
        proc = subprocess.run(
            [sys.executable, "-m", "traintrack.cli", "growth",
             str(files / "fib.aut"), "a", "--k-max", "3"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout == "k,norm\n0,1\n1,2\n2,3\n3,5\n"

    def test_console_script(self, files):
        proc = subprocess.run(
            ["traintrack", "analyze", str(files / "broken.gm")],
            capture_output=True, text=True,
        )
        assert proc.returncode == 1
        assert '"condition": 1' in proc.stdout
