import csv
import io
import json

import pytest

from spinorcheck.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "I", "--samples", "5", "--quiet")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert all(c["pass"] is not False for c in doc["checks"])


def test_verify_wrong_statistics_fails(capsys):
    code, _, _ = run(capsys, "verify", "--suite", "S", "--stat", "bosonic", "--assume", "fermionic",
                     "--samples", "3", "--quiet")
    assert code == EXIT_FAIL


def test_verify_report_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["verify", "--suite", "I", "--samples", "4", "--seed", "9", "--no-timings",
                     "--quiet", "--out", str(path)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_unknown_suite_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["verify", "--suite", "nope"])
    assert info.value.code == EXIT_USAGE


def test_relations(capsys):
    code, out, _ = run(capsys, "relations", "--family", "I", "--samples", "20", "--quiet")
    assert code == EXIT_OK
    rel = json.loads(out)["relations"][0]
    assert rel["family"] == "I" and rel["nullspace_dim"] == 1


def test_eval_expression(capsys):
    code, out, _ = run(capsys, "eval", "--expr", "phi^a phibar_a")
    assert code == EXIT_OK
    value = json.loads(out)["results"][0]["value"]
    assert value["imag"] == pytest.approx(0.0, abs=1e-15)
    assert value["real"] > 0


def test_eval_fermionic_expression(capsys):
    code, out, _ = run(capsys, "eval", "--stat", "fermionic", "--expr",
                       "g^{lm} Omegabar_{l a} Omega_m^a g^{nr} Omegabar_{n b} Omega_r^b")
    assert code == EXIT_OK
    assert json.loads(out)["results"][0]["value"]["degree"] == 4


def test_eval_from_file_with_bindings(tmp_path, capsys):
    src = tmp_path / "expr.txt"
    src.write_text("# comment line\nphi^a phibar_a\n")
    bind = tmp_path / "bind.json"
    bind.write_text(json.dumps({"phi": {"slots": "i^", "real": [3.0, 4.0]}}))
    code, out, _ = run(capsys, "eval", "--expr", str(src), "--bind", str(bind))
    assert code == EXIT_OK
    assert json.loads(out)["results"][0]["value"]["real"] == pytest.approx(25.0)


def test_eval_bad_expression(capsys):
    code, _, err = run(capsys, "eval", "--expr", "phi^a phi^a")
    assert code == EXIT_USAGE
    assert "same variance" in err


def test_enumerate(capsys):
    code, out, _ = run(capsys, "enumerate", "--slots", "A,B,C,D")
    assert code == EXIT_OK
    assert len(out.strip().splitlines()) == 3


def test_enumerate_odd_group(capsys):
    code, _, _ = run(capsys, "enumerate", "--slots", "A,B,C")
    assert code == EXIT_USAGE


def test_vertices_csv(capsys):
    code, out, _ = run(capsys, "vertices", "--term", "higgs-potential")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert any(r["legs"] == "H H H H" for r in rows)


def test_eval_uses_fixed_metric_and_forms(capsys):
    code, out, _ = run(capsys, "eval", "--expr", "g^{lm} gdown_{lm}")
    assert code == EXIT_OK
    assert json.loads(out)["results"][0]["value"]["real"] == pytest.approx(4.0)
    code, out, _ = run(capsys, "eval", "--expr", "epsup^{ab} eps_{cb} -> a c")
    assert json.loads(out)["results"][0]["value"]["real"] == [[1.0, 0.0], [0.0, 1.0]]


def test_eval_with_bindings_matches_family(tmp_path, capsys):
    from spinorcheck.invariants import eval_I_family, sample_gauge_higgs
    b = sample_gauge_higgs(3, 0)
    bind = tmp_path / "bind.json"
    bind.write_text(json.dumps({
        "W": {"slots": "t_ i^ i_", "real": b["W"].data.real.tolist(), "imag": b["W"].data.imag.tolist()},
        "phi": {"slots": "i^", "real": b["phi"].data.real.tolist(), "imag": b["phi"].data.imag.tolist()},
    }))
    code, out, _ = run(capsys, "eval", "--expr", "g^{lm} W_l^a_b W_m^c_a phi^b phibar_c", "--bind", str(bind))
    assert code == EXIT_OK
    value = json.loads(out)["results"][0]["value"]
    want = eval_I_family(b["W"], b["phi"], b["phibar"])[0].scalar()
    assert complex(value["real"], value["imag"]) == pytest.approx(want, rel=1e-12)
