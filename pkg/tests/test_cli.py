from __future__ import annotations

import json

import numpy as np
import pytest

from corramp.cli import main
from corramp.vecio import read_vectors


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_params_detect_example(capsys):
    code, out, _ = run(capsys, "params", "detect", "--n", "1000000", "--d", "100", "--rho", "0.2",
                       "--tau", "0.05", "--eps", "0.5", "--C", "61", "--delta", "0.1", "--alpha", "1")
    assert "0.00181836" in out
    # every assumption fails at this size; the ledger is still printed
    assert code == 2 and "dimension assumption" in out


def test_params_amplify_example(capsys):
    code, out, _ = run(capsys, "params", "amplify", "--d", "2", "--tau", "0.5", "--gamma", "4", "--ell", "1")
    assert code == 0
    line = next(ln for ln in out.splitlines() if ln.startswith("K "))
    assert line.split("=")[1].split()[0] == "592"


def test_params_bounds_example(capsys):
    code, out, _ = run(capsys, "params", "bounds", "--d", "20000", "--p", "2", "--tau", "0.05", "--gamma", "2", "--json")
    assert code == 0
    assert json.loads(out)["params"]["lower"] == 20


def test_spectral_square_example(capsys):
    code, out, _ = run(capsys, "spectral", "--graph", "c3", "--op", "square")
    assert code == 0
    assert json.loads(out)["results"]["lambda_hat"] == pytest.approx(0.25, abs=1e-6)


def test_spectral_bad_zigzag_exit_2(capsys):
    code, _, err = run(capsys, "spectral", "--graph", "c4", "--op", "zigzag", "--with", "c3")
    assert code == 2 and "zigzag" in err


def test_lightbulb_example(capsys):
    code, out, _ = run(capsys, "lightbulb", "--n", "64", "--d", "512", "--rho", "0.5", "--kappa", "2",
                       "--mode", "toy", "--seed", "7")
    rep = json.loads(out)
    assert code == 0
    assert rep["results"]["pair"] == rep["results"]["planted"]
    assert rep["params"]["mode"] == "toy"


def test_reports_are_deterministic(tmp_path, capsys):
    paths = [tmp_path / "r1.json", tmp_path / "r2.json"]
    for p in paths:
        main(["lightbulb", "--n", "32", "--d", "256", "--seed", "3", "--out", str(p)])
    docs = [json.loads(p.read_text()) for p in paths]
    for doc in docs:
        doc.pop("timings")
    assert docs[0] == docs[1]


def test_gen_round_trip(tmp_path, capsys):
    a, b, c = tmp_path / "a.txt", tmp_path / "a.bin", tmp_path / "c.txt"
    assert main(["gen", "uniform", "--n", "7", "--d", "45", "--seed", "2", "--vectors", str(a)]) == 0
    assert main(["gen", "convert", "--in", str(a), "--vectors", str(b), "--binary"]) == 0
    assert main(["gen", "convert", "--in", str(b), "--vectors", str(c)]) == 0
    assert a.read_bytes() == c.read_bytes()
    assert b.read_bytes()[:4] == b"PM1\x00"


def test_detect_exit_codes(tmp_path, capsys):
    lb, un = tmp_path / "lb.txt", tmp_path / "un.txt"
    main(["gen", "lightbulb", "--n", "32", "--d", "256", "--rho", "0.5", "--seed", "3", "--vectors", str(lb)])
    planted = json.loads(capsys.readouterr().out)["results"]["planted"]
    code, out, _ = run(capsys, "detect", "--x", str(lb), "--rho", "0.5", "--tau", "0.25", "--mode", "identity")
    assert code == 0
    assert [r[:2] for r in json.loads(out)["results"]["outliers"]] == [planted]
    main(["gen", "uniform", "--n", "32", "--d", "256", "--seed", "4", "--vectors", str(un)])
    capsys.readouterr()
    code, out, _ = run(capsys, "detect", "--x", str(un), "--rho", "0.5", "--tau", "0.25")
    assert code == 1


def test_malformed_file_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("pm1 3 1\n+?+\n")
    code, _, err = run(capsys, "detect", "--x", str(bad), "--rho", "0.5", "--tau", "0.25")
    assert code == 2 and "line 2" in err


def test_parity_cli(capsys):
    code, out, _ = run(capsys, "parity", "--v", "8", "--k", "2", "--support", "1,5", "--eta", "0.1", "--d", "2000")
    assert code == 0 and json.loads(out)["results"]["support"] == [1, 5]


def test_amplify_cli(tmp_path, capsys):
    src, dst = tmp_path / "x.txt", tmp_path / "fx.bin"
    main(["gen", "uniform", "--n", "3", "--d", "2", "--vectors", str(src)])
    capsys.readouterr()
    code, out, _ = run(capsys, "amplify", "--d", "2", "--tau", "0.9", "--gamma", "2.25", "--graphs", "k32,k1024",
                       "--in", str(src), "--vectors", str(dst), "--binary")
    assert code == 0
    F = read_vectors(dst)
    assert F.shape == (3, 2**20)
    X = read_vectors(src)
    # complete graphs square exactly: <f(x), f(y)> = 2^20 (<x, y>/2)^4
    assert int(F[0].astype(np.int64) @ F[1]) == 2**20 * (int(X[0].astype(int) @ X[1]) / 2) ** 4
    code, out, _ = run(capsys, "amplify", "--d", "2", "--tau", "0.5", "--gamma", "4", "--mode", "theoretical",
                       "--coord", "0,99999999999999999999")
    assert code == 0 and json.loads(out)["results"]["input_touches"] == 4
