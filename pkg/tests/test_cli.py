import csv
import io
import json
import shlex
import subprocess
import sys

import pytest

from shortsol.cli import UsageError, data_section, main, parse_config


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def header_and_body(text):
    lines = text.splitlines(keepends=True)
    assert lines[0].startswith("# config: shortsol ")
    assert lines[1].startswith("# version: ")
    return lines[0], "".join(lines[2:])


def test_parse_valid_config():
    argv = shlex.split(
        "simulate-rdist --n 2 --j 1 --modulus-kind prime --range 100000:1000000 --count 10 "
        "--samples 20000 --a 1.0 --seed 42"
    )
    cfg = parse_config(argv)
    assert cfg.command == "simulate-rdist"
    assert cfg.range == (100000, 1000000) and cfg.count == 10
    assert cfg.box.shape == "square" and cfg.box.a == 1.0
    assert cfg.seed == 42 and cfg.format == "csv"


def test_parse_defaults():
    cfg = parse_config(["simulate-rdist", "--modulus", "101"])
    assert cfg.box.shape == "square" and cfg.box.a == 1.0
    assert cfg.seed == 0 and cfg.format == "csv"
    assert parse_config(["solve", "--modulus", "25", "--row", "1,1"]).format == "json"


@pytest.mark.parametrize(
    "argv",
    [
        "theory --a 3.0",
        "theory --a 0",
        "simulate-rdist --modulus 11 --n 2 --j 2",
        "simulate-rdist --modulus 11 --n 3 --j 0",
        "simulate-rdist --modulus 11 --box cube --D 1.5",
        "simulate-rdist --modulus 11 --box cube",
        "simulate-rdist --modulus 11 --n 3",
        "simulate-rdist --n 2",
        "simulate-rdist --modulus-kind prime",
        "simulate-rdist --modulus 11 --bogus 1",
        "solve --modulus 25 --row 1,1 --row 1",
        "solve --modulus 25 --row 1,1 --row 1,2",
        "expsum --prime-range 10:5",
        "nonsense",
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(UsageError):
        parse_config(shlex.split(argv))
    code, out, err = run_cli(capsys, *shlex.split(argv))
    assert code == 2 and out == "" and err


def test_theory_table(capsys):
    code, out, _ = run_cli(capsys, "theory", "--a", "1", "--rmax", "9")
    assert code == 0
    _, body = header_and_body(out)
    rows = list(csv.DictReader(io.StringIO(body)))
    c = {int(r["r"]): float(r["value"]) for r in rows if r["quantity"] == "c2r"}
    assert round(c[1], 6) == 0.696036
    assert round(c[3], 6) == 0.227973
    assert round(c[5], 6) == 0.042217
    assert c[2] == 0 and c[4] == 0
    other = {r["quantity"]: float(r["value"]) for r in rows if r["quantity"] != "c2r"}
    assert round(other["p_nontrivial"], 6) == 0.303964
    assert round(other["primitive_lower_bound"], 6) == 0.089029


def test_numbers_have_nine_significant_digits(capsys):
    _, out, _ = run_cli(capsys, "theory", "--a", "1")
    assert "0.696036449\n" in out


def test_solve_json(capsys):
    code, out, _ = run_cli(capsys, "solve", "--modulus", "25", "--row", "1,1")
    assert code == 0
    _, body = header_and_body(out)
    obj = json.loads(body)
    assert obj["generator"] == [1, 24]
    assert obj["shortest_nontrivial"] == [1, -1]
    assert obj["count_in_box"] == 1 + len(obj["census"])


def test_solve_higher_dims(capsys):
    code, out, _ = run_cli(capsys, "solve", "--modulus", "30", "--row", "1,2,3", "--row", "0,1,4", "--box", "cube", "--D", "0.9")
    assert code == 0
    obj = json.loads(header_and_body(out)[1])
    assert obj["n"] == 3 and obj["j"] == 2
    assert obj["sup_norm"] <= obj["dirichlet_bound"]
    assert obj["count_in_box"] % 2 == 1


def test_runtime_error_exit_1(capsys):
    code, out, err = run_cli(capsys, "solve", "--modulus", "6", "--row", "2,4")
    assert code == 1
    obj = json.loads(header_and_body(out)[1])
    assert obj["error"] == "NormalizationError"
    code, out, _ = run_cli(capsys, "lattices", "--modulus", "100003", "--n", "3")
    assert code == 1
    body = header_and_body(out)[1]
    assert body.startswith("# error: ")
    assert json.loads(body[len("# error: "):])["error"] == "SizeLimitError"


def test_rdist_schema(capsys):
    code, out, _ = run_cli(capsys, "simulate-rdist", "--modulus", "1009,1013", "--samples", "300", "--seed", "3")
    assert code == 0
    body = header_and_body(out)[1]
    reader = csv.reader(io.StringIO(body))
    assert next(reader) == ["N", "r", "count", "freq", "theory_freq", "z"]
    rows = list(reader)
    assert {r[0] for r in rows} == {"1009", "1013", "all"}
    assert sum(int(r[2]) for r in rows if r[0] == "all") == 600
    assert all(r[4] != "" for r in rows)
    assert all(int(r[2]) == 0 for r in rows if int(r[1]) % 2 == 0)


def test_rdist_schema_no_theory_for_n3(capsys):
    code, out, _ = run_cli(capsys, "simulate-rdist", "--n", "3", "--modulus", "101", "--box", "cube", "--D", "0.8", "--samples", "50")
    assert code == 0
    reader = csv.reader(io.StringIO(header_and_body(out)[1]))
    assert next(reader) == ["N", "r", "count", "freq", "theory_freq", "z"]
    rows = list(reader)
    assert rows and all(r[4] == "" and r[5] == "" for r in rows)


def test_data_section_deterministic_and_thread_independent(capsys):
    base = ["simulate-rdist", "--modulus-kind", "squarefree", "--range", "1000:5000", "--count", "3", "--samples", "400", "--seed", "5"]
    _, a, _ = run_cli(capsys, *base)
    _, b, _ = run_cli(capsys, *base)
    _, c, _ = run_cli(capsys, *base, "--threads", "3")
    assert data_section(a) == data_section(b) == data_section(c)
    assert a == b


def test_config_echo_round_trips(capsys, tmp_path):
    argv = ["simulate-primitive", "--modulus-kind", "prime", "--range", "1000:2000", "--count", "2",
            "--samples", "100", "--a", "1.5", "--seed", "11", "--format", "json",
            "--output", str(tmp_path / "x y.json")]
    assert main(argv) == 0
    text = (tmp_path / "x y.json").read_text()
    first = text.splitlines()[0]
    echoed = shlex.split(first[len("# config: "):])[1:]
    assert parse_config(echoed).data_key() == parse_config(argv).data_key()
    assert echoed == argv
    obj = json.loads(data_section(text))
    assert obj["columns"][0] == "N" and "d_distribution" in obj


def test_lattices_listing(capsys):
    code, out, _ = run_cli(capsys, "lattices", "--modulus", "4")
    rows = list(csv.DictReader(io.StringIO(header_and_body(out)[1])))
    assert len(rows) == 7
    bad = [(r["d"], r["a"]) for r in rows if r["cyclic"] == "false"]
    assert bad == [("2", "0")]
    code, out, _ = run_cli(capsys, "lattices", "--modulus", "6,10", "--n", "3", "--j", "2")
    rows = list(csv.DictReader(io.StringIO(header_and_body(out)[1])))
    assert [(r["count_formula"], r["orbit_size"]) for r in rows] == [("91", "91"), ("217", "217")]


def test_hecke_average_command(capsys):
    code, out, _ = run_cli(capsys, "hecke-average", "--modulus", "3", "--a", "2", "--r", "3")
    rows = list(csv.DictReader(io.StringIO(header_and_body(out)[1])))
    assert rows[0]["orbit_size"] == "4" and float(rows[0]["average"]) == 1.0


def test_expsum_command(capsys):
    code, out, _ = run_cli(capsys, "expsum", "--prime-range", "1000:2000", "--count", "2", "--samples", "3", "--seed", "1")
    assert code == 0
    reader = csv.reader(io.StringIO(header_and_body(out)[1]))
    assert next(reader) == ["p", "g", "h1", "h2", "r1", "r2", "a1", "a2", "abs_S", "weil_bound",
                            "M_unsigned", "M_signed", "improved_holds"]
    assert len(list(reader)) == 6


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "shortsol", "theory", "--a", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "p_nontrivial,,0.607927" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "shortsol", "theory", "--a", "3"], capture_output=True, text=True)
    assert proc.returncode == 2
