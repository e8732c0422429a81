import csv
import io
import subprocess
import sys

import pytest
import yaml

from hgsg import cli
from hgsg.exceptions import ConfigError

SMALL = {"function": "f2", "d": 2, "schedule": "ten_pow2", "p_max": [1, 2],
         "epsilon": [1e-3, 1e-5], "n_samples": 200}


def write(tmp_path, data, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return str(path)


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_run_one_row_per_cell(tmp_path, capsys):
    assert cli.main(["run", "--config", write(tmp_path, SMALL)]) == 0
    out = capsys.readouterr().out
    rows = rows_of(out)
    assert len(rows) == 4
    assert list(rows[0]) == cli.COLUMNS
    assert [(r["p_max"], r["epsilon"]) for r in rows] == [
        ("1", "0.001"), ("1", "1.0000000000000001e-05"), ("2", "0.001"), ("2", "1.0000000000000001e-05")]
    assert all(r["reason"] == "converged" for r in rows)
    assert "\r" not in out


def test_empty_epsilon_list(tmp_path, capsys):
    assert cli.main(["run", "--config", write(tmp_path, dict(SMALL, epsilon=[]))]) == 0
    assert capsys.readouterr().out.strip() == ",".join(cli.COLUMNS)


def test_sweep_sorted_by_evaluations(tmp_path):
    cfg = dict(SMALL, epsilon=[1e-5, 1e-3, 1e-4], termination=["classic", "modified"])
    out = tmp_path / "s.csv"
    assert cli.main(["sweep", "--config", write(tmp_path, cfg), "--out", str(out)]) == 0
    rows = rows_of(out.read_text())
    assert len(rows) == 12
    series = {}
    for r in rows:
        series.setdefault((r["p_max"], r["termination"]), []).append(int(r["n_evals"]))
    assert len(series) == 4
    assert all(v == sorted(v) for v in series.values())


def test_single_row_sweep(tmp_path, capsys):
    assert cli.main(["sweep", "--config", write(tmp_path, dict(SMALL, p_max=1, epsilon=1e-3))]) == 0
    assert len(rows_of(capsys.readouterr().out)) == 1


@pytest.mark.parametrize("bad, field", [
    ({"function": "f7"}, "function"),
    ({"epsilon": [1e-3, -1.0]}, "epsilon"),
    ({"p_max": 0}, "p_max"),
    ({"indicator": "rel"}, "indicator"),
    ({"termination": "never"}, "termination"),
    ({"schedule": "Q"}, "schedule"),
    ({"colour": "red"}, "colour"),
])
def test_config_errors_exit_1(tmp_path, capsys, bad, field):
    assert cli.main(["run", "--config", write(tmp_path, dict(SMALL, **bad))]) == 1
    assert field in capsys.readouterr().err


def test_missing_config_file_exit_1(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "nope.yaml")]) == 1


def test_bad_usage_exit_1():
    with pytest.raises(SystemExit) as info:
        cli.main(["preset", "fig99"])
    assert info.value.code == 1


def test_config_error_names_field():
    with pytest.raises(ConfigError, match="epsilon"):
        cli.ExperimentConfig.from_mapping(dict(SMALL, epsilon=0))


def test_strict_capped_exit_2(tmp_path):
    cfg = write(tmp_path, dict(SMALL, epsilon=1e-9, max_points=50))
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "a.csv")]) == 0
    assert cli.main(["run", "--config", cfg, "--strict", "--out", str(tmp_path / "b.csv")]) == 2
    rows = rows_of((tmp_path / "b.csv").read_text())
    assert {r["reason"] for r in rows} == {"capped"}


def test_byte_identical_and_threads(tmp_path):
    cfg = write(tmp_path, SMALL)
    outs = []
    for threads in ("1", "1", "3"):
        path = tmp_path / f"o{len(outs)}.csv"
        assert cli.main(["run", "--config", cfg, "--threads", threads, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_seed_changes_metrics_only(tmp_path):
    cfg = write(tmp_path, SMALL)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.main(["run", "--config", cfg, "--seed", "1", "--out", str(a)])
    cli.main(["run", "--config", cfg, "--seed", "2", "--out", str(b)])
    ra, rb = rows_of(a.read_text()), rows_of(b.read_text())
    assert [r["n_evals"] for r in ra] == [r["n_evals"] for r in rb]
    assert [r["linf"] for r in ra] != [r["linf"] for r in rb]


def test_timing_column(tmp_path, capsys):
    cli.main(["run", "--config", write(tmp_path, dict(SMALL, p_max=1, epsilon=1e-3)), "--timing"])
    rows = rows_of(capsys.readouterr().out)
    assert float(rows[0][cli.TIMING_COLUMN]) >= 0


def test_plot_script_stub(tmp_path):
    script = tmp_path / "plot.py"
    cli.main(["run", "--config", write(tmp_path, SMALL), "--out", str(tmp_path / "r.csv"),
              "--plot-script", str(script)])
    compile(script.read_text(), str(script), "exec")
    assert "r.csv" in script.read_text()


def test_presets_resolve():
    for name in cli.PRESETS:
        cfg = cli.preset_config(name)
        assert cfg.cells()
    assert len(cli.preset_config("table1").cells()) == 7
    assert len(cli.preset_config("fig3").cells()) == 2
    assert len(cli.preset_config("table1", {"epsilon": [1e-4, 1e-5]}).cells()) == 14


def test_fig3_preset_with_override(tmp_path, capsys):
    override = write(tmp_path, {"epsilon": 1e-3})
    assert cli.main(["preset", "fig3", "--config", override]) == 0
    rows = rows_of(capsys.readouterr().out)
    assert [r["p_max"] for r in rows] == ["1", "2"]
    assert all(r["function"] == "f4" and r["d"] == "2" for r in rows)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hgsg", "run", "--config",
                           write(tmp_path, dict(SMALL, p_max=1, epsilon=1e-2))],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("function,d,")
