import json
import math
import subprocess
import sys

import pytest

from helson import Sequence, save_sequence, sequence_from_triples
from helson.cli import main, parse_r_grid


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# -------------------------------------------------------------------- factor


def test_factor_output(capsys):
    code, out, _ = run(capsys, "factor", "360")
    assert code == 0
    assert out.strip() == "360 = 2^3 · 3^2 · 5, kappa=(3,2,1)"


def test_factor_one(capsys):
    code, out, _ = run(capsys, "factor", "1")
    assert code == 0
    assert out.strip() == "1 = 1, kappa=()"


def test_factor_domain_error(capsys):
    code, _, err = run(capsys, "factor", "0")
    assert code == 2
    assert "error" in err


# --------------------------------------------------------- convolve / dilate


def test_convolve_roundtrip(capsys, tmp_path):
    pa = tmp_path / "a.json"
    pb = tmp_path / "b.json"
    save_sequence(Sequence.delta(2), pa)
    save_sequence(Sequence.delta(3), pb)
    code, out, _ = run(capsys, "convolve", f"file:{pa}", f"file:{pb}")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == 1
    assert sequence_from_triples(doc["sequence"]) == Sequence.delta(6)


def test_convolve_output_reusable_as_input(capsys, tmp_path):
    out_path = tmp_path / "c.json"
    code = main(
        ["convolve", "delta:2", "delta:3", "--output", str(out_path)]
    )
    assert code == 0
    capsys.readouterr()
    code, out, _ = run(capsys, "convolve", f"file:{out_path}", "delta:2")
    assert code == 0
    doc = json.loads(out)
    assert sequence_from_triples(doc["sequence"]) == Sequence.delta(12)


def test_dilate(capsys):
    code, out, _ = run(capsys, "dilate", "0.5", "delta:3")
    assert code == 0
    doc = json.loads(out)
    assert doc["sequence"] == [[3, 0.25, 0.0]]


# ---------------------------------------------------------------------- norm


def test_norm_delta1(capsys):
    code, out, _ = run(capsys, "norm", "delta:1", "--N", "8")
    assert code == 0
    doc = json.loads(out)
    assert doc["norm"] == pytest.approx(1.0, abs=1e-10)
    assert doc["N"] == 8
    assert doc["fixture"] == "delta:1"
    assert doc["schema"] == 1


def test_norm_power_rank_one(capsys):
    code, out, _ = run(capsys, "norm", "power:1", "--N", "2")
    assert code == 0
    assert json.loads(out)["norm"] == pytest.approx(1.25, rel=1e-10)


def test_norm_mhilbert_monotone(capsys):
    norms = {}
    for n in (32, 64, 128):
        code, out, _ = run(capsys, "norm", "mhilbert", "--N", str(n))
        assert code == 0
        norms[n] = json.loads(out)["norm"]
    assert norms[32] < norms[64] < norms[128]


def test_norm_requires_n(capsys):
    code, _, err = run(capsys, "norm", "delta:1")
    assert code == 2
    assert "--N" in err


def test_norm_unreachable_tolerance(capsys):
    code, _, err = run(capsys, "norm", "mhilbert", "--N", "16", "--norm-tol", "1e-30")
    assert code == 3
    assert "convergence" in err.lower()


# ------------------------------------------------------------------- essnorm


def test_essnorm_delta1_zeros(capsys):
    code, out, _ = run(
        capsys, "essnorm", "delta:1", "--grid", "0.5,0.9", "--N", "4"
    )
    assert code == 0
    doc = json.loads(out)
    for _r, _n, value in doc["rows"]:
        assert value <= 1e-9
    for block in doc["weights"].values():
        assert block["value"] <= 1e-9
    assert doc["determinism"].startswith("seed-free")


def test_essnorm_csv_and_manifest(capsys, tmp_path):
    out_path = tmp_path / "table.csv"
    code = main(
        [
            "essnorm",
            "delta:2",
            "--grid",
            "0.5,0.9",
            "--N",
            "2,4",
            "--format",
            "csv",
            "--output",
            str(out_path),
        ]
    )
    assert code == 0
    text = out_path.read_text()
    lines = text.splitlines()
    assert lines[0].startswith("# schema=1 config_hash=")
    assert lines[1] == "r,N,value"
    # delta_2 diagnostic values are exactly 1 - r
    rows = [ln.split(",") for ln in lines[2:]]
    for r, _n, v in rows:
        assert float(v) == pytest.approx(1 - float(r), abs=1e-9)
    manifest = json.loads((tmp_path / "table.csv.manifest.json").read_text())
    assert manifest["schema"] == 1
    assert manifest["grid"] == [0.5, 0.9]
    assert "determinism" in manifest


def test_essnorm_geometric_grid(capsys):
    code, out, _ = run(
        capsys, "essnorm", "delta:1", "--grid", "geometric(0.9,0.1,3)", "--N", "2"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["grid"] == pytest.approx([0.9, 0.99, 0.999])


def test_parse_r_grid():
    assert parse_r_grid("0.5,0.9") == (0.5, 0.9)
    geo = parse_r_grid("geometric(0.5,0.5,3)")
    assert geo == pytest.approx((0.5, 0.75, 0.875))
    from helson import DomainError

    for bad in ("", "1.5", "geometric(0.5,0.5,0)", "0.9,0.5"):
        with pytest.raises(DomainError):
            parse_r_grid(bad)


# --------------------------------------------------------------------- xnorm


def test_xnorm_delta1(capsys):
    code, out, _ = run(capsys, "xnorm", "delta:1", "--N", "4")
    assert code == 0
    doc = json.loads(out)
    assert doc["value"] == pytest.approx(1.0, abs=1e-6)
    assert doc["gap"] < 1e-6


def test_xnorm_delta4(capsys):
    code, out, _ = run(capsys, "xnorm", "delta:4", "--N", "4")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(1.0, abs=1e-6)


def test_xnorm_matrix_out(capsys, tmp_path):
    path = tmp_path / "x.csv"
    code = main(["xnorm", "delta:1", "--N", "2", "--matrix-out", str(path)])
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# schema=1")
    assert len(lines) == 3


def test_xnorm_unrepresentable(capsys):
    code, _, err = run(capsys, "xnorm", "delta:5", "--N", "4")
    assert code == 2
    assert "5" in err


# ------------------------------------------------------------------- duality


def test_duality_inequality(capsys):
    code, out, _ = run(capsys, "duality", "power:1", "delta:1", "--N", "4")
    assert code == 0
    doc = json.loads(out)
    assert doc["ratio"] <= 1 + 1e-6
    assert doc["bound"] >= doc["pairing"] - 1e-9


def test_duality_equality(capsys):
    code, out, _ = run(capsys, "duality", "delta:1", "delta:1", "--N", "2")
    assert code == 0
    assert json.loads(out)["ratio"] == pytest.approx(1.0, abs=1e-6)


# ------------------------------------------------------------- plumbing


def test_determinism_byte_identical(tmp_path, capsys):
    p1 = tmp_path / "r1.json"
    p2 = tmp_path / "r2.json"
    argv = ["norm", "power:1", "--N", "16", "--output"]
    assert main(argv + [str(p1)]) == 0
    assert main(argv + [str(p2)]) == 0
    capsys.readouterr()
    assert p1.read_bytes() == p2.read_bytes()


def test_config_file_equivalence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("N = 8\nnorm_tol = 1e-9\n# comment\n")
    code, out_file, _ = run(capsys, "norm", "delta:1", "--config", str(cfg))
    code2, out_flags, _ = run(
        capsys, "norm", "delta:1", "--N", "8", "--norm-tol", "1e-9"
    )
    assert code == code2 == 0
    assert out_file == out_flags


def test_cli_flags_beat_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("N = 4\n")
    code, out, _ = run(capsys, "norm", "delta:1", "--config", str(cfg), "--N", "8")
    assert code == 0
    assert json.loads(out)["N"] == 8


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("frobnicate = 1\n")
    code, _, err = run(capsys, "norm", "delta:1", "--config", str(cfg))
    assert code == 2
    assert "frobnicate" in err


def test_sieve_limit_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HELSON_SIEVE_LIMIT", "30")
    # N = 8 needs products up to 64 > 30
    code, _, err = run(capsys, "norm", "delta:1", "--N", "8")
    assert code == 2
    assert "30" in err
    monkeypatch.delenv("HELSON_SIEVE_LIMIT")
    assert main(["norm", "delta:1", "--N", "8"]) == 0
    capsys.readouterr()


def test_prime_budget_flag(capsys):
    code, out, _ = run(capsys, "norm", "delta:1", "--N", "10", "--primes", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["indices"] == [1, 2, 4, 8]


def test_console_script_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "helson.cli", "factor", "12"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "12 = 2^2 · 3, kappa=(2,1)"
