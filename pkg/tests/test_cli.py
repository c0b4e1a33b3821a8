import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import anchor_energy
from kgnu import cli

GOLDEN_DIR = Path(__file__).parent / "golden"
REGEN = os.environ.get("KGNU_REGEN_GOLDEN") == "1"

# small, fast invocations; one or more per command
GOLDEN = {
    "potential_q1.csv": ["potential", "--v1", "1", "--v2", "-0.3333333333", "--q", "1", "--points", "11"],
    "potential_long.csv": ["potential", "--v1", "1", "--v2", "-0.3333333333", "--q", "1", "0.5", "-1",
                           "--xmin", "0.5", "--xmax", "3", "--points", "6"],
    "potential_q0.json": ["potential", "--v1", "1", "--v2", "0.5", "--q", "0", "--points", "5", "--format", "json"],
    "spectrum_anchor.csv": ["spectrum", "--v1", "2", "--v2", "0"],
    "spectrum_pt.csv": ["spectrum", "--variant", "PTRosenMorse", "--v1", "2", "--v2", "0.2"],
    "spectrum_eckart.json": ["spectrum", "--variant", "Eckart", "--v1", "0.1", "--v2", "0.3", "--format", "json"],
    "sweep_small.csv": ["sweep", "--q", "1", "0.5", "--n", "0", "1", "--from", "0.5", "--to", "2.5", "--steps", "5"],
    "verify_case.csv": ["verify", "--v1", "2", "--v2", "0", "--q", "1", "--grid-points", "1000"],
    "wavefunction_n1.csv": ["wavefunction", "--v1", "2", "--n", "1", "--points", "21"],
    "wavefunction_oracle.json": ["wavefunction", "--v1", "2", "--points", "9", "--oracle",
                                 "--grid-points", "1000", "--format", "json"],
}


def run(args, capsys):
    code = cli.main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def rows(csv_text):
    lines = [ln for ln in csv_text.splitlines() if not ln.startswith("#")]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden(name, capsys):
    code, out, _ = run(GOLDEN[name], capsys)
    assert code == 0
    path = GOLDEN_DIR / name
    if REGEN:
        path.write_bytes(out.encode())
    assert out.encode() == path.read_bytes()


@pytest.mark.parametrize("name", ["sweep_small.csv", "verify_case.csv", "spectrum_pt.csv"])
def test_repeat_runs_byte_identical(name, capsys):
    outs = {run(GOLDEN[name], capsys)[1] for _ in range(3)}
    assert len(outs) == 1


def test_thread_count_does_not_change_output(capsys, monkeypatch):
    args = GOLDEN["sweep_small.csv"]
    monkeypatch.setenv("KGNU_THREADS", "1")
    serial = run(args, capsys)[1]
    monkeypatch.setenv("KGNU_THREADS", "4")
    parallel = run(args, capsys)[1]
    assert serial == parallel


@pytest.mark.parametrize("value", ["0", "-2", "many"])
def test_bad_thread_env(value, capsys, monkeypatch):
    monkeypatch.setenv("KGNU_THREADS", value)
    assert run(GOLDEN["sweep_small.csv"], capsys)[0] == 2


def test_potential_center_row(capsys):
    code, out, _ = run(["potential", "--v1", "1", "--v2", "-0.3333333333", "--alpha", "1", "--q", "1",
                        "--xmin", "-5", "--xmax", "5", "--points", "201"], capsys)
    assert code == 0
    header, body = rows(out)
    assert header == ["x", "V"]
    assert len(body) == 201
    assert ["0", "-1"] in body


def test_potential_exponential_limit(capsys):
    code, out, _ = run(["potential", "--v1", "1", "--v2", "0.5", "--q", "0", "--points", "7"], capsys)
    assert code == 0
    _, body = rows(out)
    x = np.array([float(r[0]) for r in body])
    v = np.array([float(r[1]) for r in body])
    assert np.allclose(v, -4 * np.exp(-2 * x) - 0.5, rtol=1e-13)


def test_potential_long_format_has_q_column(capsys):
    _, out, _ = run(GOLDEN["potential_long.csv"], capsys)
    header, body = rows(out)
    assert header == ["q", "x", "V"]
    assert sorted({r[0] for r in body}) == ["-1", "0.5", "1"]


def test_spectrum_anchor_row(capsys):
    _, out, _ = run(GOLDEN["spectrum_anchor.csv"], capsys)
    header, body = rows(out)
    assert header == ["n", "E", "Ebar2", "mu", "nu", "physical", "reasons"]
    first = body[0]
    assert first[0] == "0" and first[5] == "true" and first[6] == ""
    assert float(first[1]) == pytest.approx(anchor_energy(), abs=1e-10)
    assert all(r[5] == "true" or r[6] for r in body)


def test_spectrum_free_case_header_only(capsys):
    code, out, _ = run(["spectrum", "--v1", "0", "--v2", "0"], capsys)
    assert code == 0
    assert rows(out) == (["n", "E", "Ebar2", "mu", "nu", "physical", "reasons"], [])


@pytest.mark.parametrize(
    "args",
    [
        ["spectrum", "--q", "0"],
        ["spectrum", "--variant", "PTEckart", "--theta", "0.2"],
        ["potential", "--points", "1"],
        ["potential", "--q", "-1", "--xmin", "-1", "--xmax", "1", "--points", "3"],
        ["sweep", "--steps", "0"],
        ["verify", "--frobnicate"],
        ["spectrum", "--variant", "PTRosenMorse", "--v1", "-1"],
        [],
    ],
)
def test_usage_errors_exit_2(args, capsys):
    assert run(args, capsys)[0] == 2


def test_q0_message_mentions_convention(capsys):
    _, _, err = run(["spectrum", "--q", "0"], capsys)
    assert "q" in err and "0" in err


def test_wavefunction_unphysical_exit_1(capsys):
    code, _, err = run(["wavefunction", "--v1", "2", "--n", "5"], capsys)
    assert code == 1 and err


def test_verify_tight_tolerance_exit_1(capsys):
    code, out, _ = run(GOLDEN["verify_case.csv"] + ["--tol", "1e-12"], capsys)
    assert code == 1
    assert "# passed: false" in out


def test_verify_user_case_gap(capsys):
    code, out, _ = run(GOLDEN["verify_case.csv"], capsys)
    assert code == 0
    _, body = rows(out)
    assert [r[1] for r in body] == ["0", "1", "2"]
    assert max(float(r[4]) for r in body) <= 1e-4


def test_wavefunction_normalized_on_emitted_grid(capsys):
    code, out, _ = run(["wavefunction", "--v1", "2", "--n", "0"], capsys)
    assert code == 0
    header, body = rows(out)
    assert header == ["x", "psi"]
    x = np.array([float(r[0]) for r in body])
    psi = np.array([float(r[1]) for r in body])
    assert np.trapezoid(psi**2, x) == pytest.approx(1.0, abs=1e-4)
    assert np.all(psi > 0)


def test_wavefunction_json_matches_csv(capsys):
    base = ["wavefunction", "--v1", "2", "--n", "1", "--points", "21"]
    _, csv_out, _ = run(base, capsys)
    _, js, _ = run(base + ["--format", "json"], capsys)
    doc = json.loads(js)
    assert doc["schema"] == "kgnu/1"
    meta = doc["metadata"]
    assert meta["convention_erratum"] is True and meta["version"]
    assert meta["params"]["v1"] == 2.0
    assert doc["columns"] == ["x", "psi"]
    _, body = rows(csv_out)
    assert np.array(doc["rows"]) == pytest.approx(np.array(body, dtype=float), rel=1e-15, abs=1e-300)


def test_csv_metadata_header(capsys):
    _, out, _ = run(GOLDEN["spectrum_anchor.csv"], capsys)
    meta = [ln for ln in out.splitlines() if ln.startswith("# ")]
    keys = {ln[2:].split(":", 1)[0] for ln in meta}
    assert {"version", "convention_erratum", "params"} <= keys
    assert "\r" not in out


def test_sweep_missing_levels_blank(capsys):
    _, out, _ = run(GOLDEN["sweep_small.csv"], capsys)
    header, body = rows(out)
    assert header == ["q", "n", "V", "E"]
    q1_n1 = [r for r in body if r[0] == "1" and r[1] == "1"]
    assert q1_n1 and all(r[3] == "" for r in q1_n1)
    assert any(r[3] != "" for r in body if r[0] == "0.5" and r[1] == "1")


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# anchor\nv1 = 2\nv2 = 0\nphysical-only = true\n")
    code, out, _ = run(["--config", str(cfg), "spectrum"], capsys)
    assert code == 0
    _, body = rows(out)
    assert float(body[0][1]) == pytest.approx(anchor_energy(), abs=1e-10)
    # explicit flags win over the file
    _, out2, _ = run(["--config", str(cfg), "spectrum", "--v1", "1"], capsys)
    assert rows(out2)[1][0][1] != body[0][1]


@pytest.mark.parametrize("text", ["bogus = 1\n", "v1 = abc\n", "no equals sign\n", "physical-only = maybe\n"])
def test_bad_config_exit_2(text, tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    assert run(["--config", str(cfg), "spectrum"], capsys)[0] == 2


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.csv"
    code, out, _ = run(GOLDEN["spectrum_anchor.csv"] + ["-o", str(target)], capsys)
    assert code == 0 and out == ""
    assert target.read_bytes() == (GOLDEN_DIR / "spectrum_anchor.csv").read_bytes()


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kgnu", "spectrum", "--v1", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.encode() == (GOLDEN_DIR / "spectrum_anchor.csv").read_bytes()


def test_fixed_q_variant_rejects_conflicting_q(capsys):
    assert run(["spectrum", "--variant", "Eckart", "--q", "1", "--v1", "0.1"], capsys)[0] == 2
    code, out, _ = run(["spectrum", "--variant", "Eckart", "--q", "-1", "--v1", "0.1", "--v2", "0.3",
                        "--format", "json"], capsys)
    assert code == 0
    assert json.loads(out)["metadata"]["params"]["q"] == -1.0
