import json
import logging
from collections.abc import Iterator
from pathlib import Path

import pandas as pd
import pytest

from ncqm_brackets.cli.commands import EXIT_FAILED, EXIT_IO, EXIT_OK, EXIT_USAGE, main

# The worked example on a 7x7 grid, which contains the probe point (1, 2)
EXAMPLE_CONFIG = {
    "profile": {"theta": 0.1, "alpha": 0.5, "f_poly": [0.0, 1.0], "gauge": "phi"},
    "grid": {"xmin": -3, "xmax": 3, "ymin": -3, "ymax": 3, "nx": 7, "ny": 7},
    "lsz_samples": 20,
}


@pytest.fixture(autouse=True)
def restore_logging() -> Iterator[None]:
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


def write_config(directory: Path, **changes: object) -> Path:
    config = json.loads(json.dumps(EXAMPLE_CONFIG))
    for key, value in changes.items():
        if key in config["profile"]:
            config["profile"][key] = value
        else:
            config[key] = value
    path = directory / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    return path


def row_at(frame: pd.DataFrame, x: float, y: float) -> pd.Series:
    return frame[(frame["x"] == x) & (frame["y"] == y)].iloc[0]


def test_full_run_passes(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    out = tmp_path / "out"
    assert main(["run", "--config", str(write_config(tmp_path)), "--out", str(out)]) == EXIT_OK
    assert "overall: PASS" in capsys.readouterr().out

    omega0 = pd.read_csv(out / "omega0.csv")
    assert list(omega0.columns) == ["x", "y", "omega12", "omega13", "omega14", "omega23", "omega24", "omega34"]
    assert len(omega0) == 49
    probe = row_at(omega0, 1.0, 2.0)
    assert probe["omega12"] == pytest.approx(0.08, abs=1e-14)
    assert probe["omega34"] == pytest.approx(0.09375, abs=1e-14)

    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["passed"] is True
    names = [task["task"] for task in report["tasks"]]
    assert names == [
        "omega0",
        "omega2",
        "jacobi",
        "roundtrip",
        "roundtrip.derivatives",
        "counterexample",
        "lsz",
        "lsz.substitution",
        "limits",
        "limits.global",
    ]
    assert set(report["provenance"]["checksums"]) == {"omega0.csv", "omega2.csv"}
    assert (out / "report.txt").exists()


def test_runs_are_byte_identical(tmp_path: Path) -> None:
    config = write_config(tmp_path, lsz_samples=5)
    first, second = tmp_path / "first", tmp_path / "second"
    for out in (first, second):
        assert main(["run", "--config", str(config), "--out", str(out), "--tasks", "omega0,omega2,lsz"]) == EXIT_OK
    for name in ("omega0.csv", "omega2.csv", "report.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_chi_gauge_momentum_bracket_vanishes(tmp_path: Path) -> None:
    out = tmp_path / "out"
    config = write_config(tmp_path, gauge="chi")
    assert main(["run", "--config", str(config), "--out", str(out), "--tasks", "omega0"]) == EXIT_OK
    omega0 = pd.read_csv(out / "omega0.csv")
    assert (omega0["omega34"] == 0.0).all()
    assert row_at(omega0, 1.0, 2.0)["omega14"] == pytest.approx(0.16, abs=1e-14)


def test_global_profile_has_no_quantum_correction(tmp_path: Path) -> None:
    out = tmp_path / "out"
    config = write_config(tmp_path, alpha=0.0)
    assert main(["run", "--config", str(config), "--out", str(out), "--tasks", "omega2,jacobi"]) == EXIT_OK
    omega2 = pd.read_csv(out / "omega2.csv")
    assert (omega2.drop(columns=["x", "y"]) == 0.0).all().all()


def test_singular_profile_fails_grid_tasks(tmp_path: Path) -> None:
    out = tmp_path / "out"
    config = write_config(tmp_path, theta=-0.5)
    assert main(["run", "--config", str(config), "--out", str(out)]) == EXIT_FAILED
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    records = {task["task"]: task for task in report["tasks"]}
    assert records["omega0"]["passed"] is False
    assert records["omega0"]["worst_point"] == [-3.0, -3.0]
    assert "SingularProfileError" in records["omega0"]["error"]
    assert records["counterexample"]["passed"] is True


def test_task_and_order_overrides(tmp_path: Path) -> None:
    out = tmp_path / "out"
    config = write_config(tmp_path)
    assert main(["run", "--config", str(config), "--out", str(out), "--tasks", "counterexample,lsz"]) == EXIT_OK
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert [task["task"] for task in report["tasks"]] == ["counterexample", "lsz", "lsz.substitution"]
    assert not (out / "omega0.csv").exists()
    assert main(["run", "--config", str(config), "--out", str(out), "--jet-order", "2"]) == EXIT_USAGE


def test_jet_order_does_not_change_quantum_table(tmp_path: Path) -> None:
    config = write_config(tmp_path)
    tables: list[pd.DataFrame] = []
    for order in ("3", "6"):
        out = tmp_path / f"order{order}"
        arguments = ["run", "--config", str(config), "--out", str(out), "--tasks", "omega2", "--jet-order", order]
        assert main(arguments) == EXIT_OK
        tables.append(pd.read_csv(out / "omega2.csv"))
    pd.testing.assert_frame_equal(tables[0], tables[1], check_exact=False, rtol=0.0, atol=1e-15)


def test_unknown_task_is_a_usage_error(tmp_path: Path) -> None:
    with pytest.raises(SystemExit) as info:
        main(["run", "--config", str(write_config(tmp_path)), "--tasks", "omega0,everything"])
    assert info.value.code == EXIT_USAGE


def test_invalid_config_is_a_usage_error(tmp_path: Path) -> None:
    config = write_config(tmp_path, grid={"nx": 1})
    assert main(["run", "--config", str(config), "--out", str(tmp_path / "out")]) == EXIT_USAGE
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    assert main(["profile", "--config", str(broken)]) == EXIT_USAGE


@pytest.mark.parametrize("f_poly", [None, 1.0, "u"])
def test_malformed_polynomial_is_a_usage_error(tmp_path: Path, f_poly: object) -> None:
    config = write_config(tmp_path, f_poly=f_poly)
    assert main(["run", "--config", str(config), "--out", str(tmp_path / "out"), "--tasks", "lsz"]) == EXIT_USAGE


def test_io_errors(tmp_path: Path) -> None:
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_IO
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    config = write_config(tmp_path)
    assert main(["run", "--config", str(config), "--out", str(blocker), "--tasks", "lsz"]) == EXIT_IO


def test_profile_command(tmp_path: Path) -> None:
    out = tmp_path / "out"
    assert main(["profile", "--config", str(write_config(tmp_path)), "--out", str(out)]) == EXIT_OK
    table = pd.read_csv(out / "profile.csv")
    assert list(table.columns) == ["x", "y", "d", "Bx", "By"]
    probe = row_at(table, 1.0, 2.0)
    assert probe["d"] == pytest.approx(0.8, abs=1e-15)
    assert probe["Bx"] == pytest.approx(-1.25, abs=1e-15)
    assert probe["By"] == pytest.approx(0.625, abs=1e-15)


def test_profile_command_rejects_singular_profile(tmp_path: Path) -> None:
    config = write_config(tmp_path, theta=-0.5)
    assert main(["profile", "--config", str(config), "--out", str(tmp_path / "out")]) == EXIT_FAILED


def test_counterexample_command(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["counterexample", "--f1", "2.5"]) == EXIT_OK
    output = capsys.readouterr().out
    assert "k=1: (x, y) -> -2.5" in output


def test_lsz_check_command(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["lsz-check", "--theta", "0.2", "--samples", "25", "--seed", "3"]) == EXIT_OK
    assert capsys.readouterr().out.rstrip().endswith("PASS")


def test_version_flag(capsys: pytest.CaptureFixture[str]) -> None:
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "ncqm_brackets" in capsys.readouterr().out
