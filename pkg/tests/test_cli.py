import csv
import io
import json

import pytest

from wedgelab import network
from wedgelab.cli import load_config, main
from wedgelab.errors import ConfigError

BASE = """
name: small
smatrix: {kind: bullough-dodd, B: 0.5}
functions:
  f: {center: [0.0, -1.0], radius: 0.6, amplitude: 1.0, wedge: left}
  g: {center: [0.1, 1.1], radius: 0.55, amplitude: 1.0, wedge: right}
numbers: [1]
"""


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_bundled_config_passes(tmp_path):
    out = tmp_path / "report.json"
    assert main(["run", "bullough-dodd-0.5.default", "--output", str(out), "--threads", "2"]) == 0
    rep = json.loads(out.read_text())
    assert rep["summary"]["passed"] == rep["summary"]["total"] > 30


def test_axioms_suite_has_six_entries(tmp_path, capsys):
    cfg = write(tmp_path, BASE + "suites: [axioms]\n")
    assert main(["run", cfg]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert [e["suite"] for e in rep["entries"]] == ["axioms"] * 6


def test_failing_check_gives_exit_one(tmp_path):
    cfg = write(tmp_path, BASE + "suites: [contour-lemmas]\n")
    assert main(["run", cfg, "--tolerance-scale", "1e-30", "--output", str(tmp_path / "r.json")]) == 1


def test_config_error_reports_field_and_line(tmp_path, capsys):
    cfg = write(tmp_path, BASE.replace("B: 0.5", "B: 1.0"))
    with pytest.raises(ConfigError) as e:
        load_config(cfg)
    assert e.value.line == 3
    assert main(["run", cfg]) == 2
    assert "config error" in capsys.readouterr().err


@pytest.mark.parametrize(
    "bad",
    [
        "suites: [nonsense]\n",
        "numbers: [7]\n",
        "bogus: 1\n",
    ],
)
def test_other_config_errors(tmp_path, bad):
    assert main(["run", write(tmp_path, BASE + bad)]) == 2


def test_wrong_wedge_is_config_error(tmp_path):
    text = BASE.replace("wedge: left", "wedge: right") + "suites: [propositions]\n"
    assert main(["run", write(tmp_path, text)]) == 2


def test_missing_config_is_config_error():
    assert main(["run", "no-such-config"]) == 2


def test_generate_prints_residue(capsys):
    assert main(["generate", "0.5", "0.3", "1.7"]) == 0
    io_ = capsys.readouterr()
    assert "residue_R" in io_.err
    assert json.loads(io_.out)["kind"]


def test_generate_even_factor_count():
    assert main(["generate", "0.5", "0.3"]) == 2


def test_axioms_command_roundtrip(tmp_path, capsys):
    doc = tmp_path / "s.json"
    assert main(["generate", "0.5", "--output", str(doc)]) == 0
    capsys.readouterr()
    assert main(["axioms", str(doc)]) == 0
    assert len(json.loads(capsys.readouterr().out)["entries"]) == 6


def test_axioms_command_bad_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["axioms", str(p)]) == 2


def test_reports_are_deterministic(tmp_path):
    cfg = write(tmp_path, BASE + "suites: [contour-lemmas, axioms]\n")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["run", cfg, "--output", str(a)])
    main(["run", cfg, "--output", str(b), "--threads", "3"])
    assert a.read_text() == b.read_text()


def test_csv_output(tmp_path, capsys):
    cfg = write(tmp_path, BASE + "suites: [contour-lemmas]\n")
    assert main(["run", cfg, "--format", "csv"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["suite", "name", "residual", "scale", "tolerance", "pass"]
    assert len(rows) == 7


def test_thread_env_default_and_flag(tmp_path, monkeypatch):
    cfg = write(tmp_path, BASE + "suites: [contour-lemmas]\n")
    out = str(tmp_path / "r.json")
    monkeypatch.setenv("WEDGELAB_THREADS", "3")
    main(["run", cfg, "--output", out])
    assert network.get_threads() == 3
    main(["run", cfg, "--output", out, "--threads", "2"])
    assert network.get_threads() == 2
    network.set_threads(1)
