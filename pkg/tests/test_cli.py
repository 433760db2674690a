import json
import os
import subprocess
import sys

import pytest

from evoflow.cli import main
from evoflow.experiment import ExperimentConfig
from evoflow.registry import ALGORITHMS, PROBLEMS
from evoflow.runtime.spmd import free_port


def write_config(tmp_path, name="cfg.json", **overrides):
    cfg = {
        "algorithm": {"name": "pso", "params": {}},
        "problem": {"name": "sphere", "params": {}},
        "dim": 4,
        "pop_size": 8,
        "seed": 0,
        "t_max": 10,
        "output_dir": str(tmp_path / "out"),
        "wall_clock": False,
    }
    cfg.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def test_run_writes_one_row_per_iteration(tmp_path):
    assert main(["run", write_config(tmp_path)]) == 0
    rows = (tmp_path / "out" / "metrics.csv").read_text().splitlines()
    assert rows[0] == "iteration,elapsed_ms,best" and len(rows) == 11
    meta = json.loads((tmp_path / "out" / "metadata.json").read_text())
    assert meta["effective_pop_size"] == 8 and meta["kernel_backend"] in ("compiled", "python")


def test_runs_are_byte_identical(tmp_path):
    a = write_config(tmp_path, "a.json", output_dir=str(tmp_path / "a"))
    b = write_config(tmp_path, "b.json", output_dir=str(tmp_path / "b"), workers=3, executor="thread")
    assert main(["run", a]) == 0 and main(["run", b]) == 0
    assert (tmp_path / "a" / "metrics.csv").read_bytes() == (tmp_path / "b" / "metrics.csv").read_bytes()


def test_metadata_round_trips(tmp_path):
    path = write_config(tmp_path, algorithm={"name": "de", "params": {"f": 0.6}})
    assert main(["run", path]) == 0
    meta = json.loads((tmp_path / "out" / "metadata.json").read_text())
    cfg = ExperimentConfig.from_dict(meta["config"])
    assert cfg == ExperimentConfig.load(path)
    assert cfg.config_hash().hex() == meta["config_hash"]


def test_multiobjective_run_reports_igd(tmp_path):
    path = write_config(tmp_path, algorithm="nsga2", problem="zdt1", dim=6, pop_size=12, t_max=3)
    assert main(["run", path]) == 0
    header = (tmp_path / "out" / "metrics.csv").read_text().splitlines()[0]
    assert header == "iteration,elapsed_ms,igd,hv"


@pytest.mark.parametrize(
    "override,field",
    [
        ({"algorithm": "nope"}, "algorithm.name"),
        ({"problem": {"name": "zdt9"}}, "problem.name"),
        ({"seed": -1}, "seed"),
        ({"t_max": "10"}, "t_max"),
        ({"colour": 1}, "colour"),
        ({"algorithm": {"name": "pso", "params": {"bogus": 1}}}, "algorithm.params"),
        ({"algorithm": "nsga2"}, "problem.name"),
        ({"executor": "gpu"}, "executor"),
    ],
)
def test_config_errors_exit_2_and_name_field(tmp_path, capsys, override, field):
    assert main(["run", write_config(tmp_path, **override)]) == 2
    err = capsys.readouterr().err
    assert field in err


def test_missing_and_malformed_files(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 2
    assert "path" in capsys.readouterr().err


def test_list_sorted(capsys):
    assert main(["list", "algorithms"]) == 0
    out = capsys.readouterr().out.split()
    assert out == sorted(ALGORITHMS)
    assert main(["list", "problems"]) == 0
    assert capsys.readouterr().out.split() == sorted(PROBLEMS)
    assert main(["list", "widgets"]) == 2


def test_sweep_rows_and_file(tmp_path, capsys):
    path = write_config(tmp_path)
    assert main(["sweep", path, "--axis", "dim", "--values", "10,100"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "axis_value,mean_iter_ms,std_iter_ms"
    assert [r.split(",")[0] for r in out[1:]] == ["10", "100"]
    assert (tmp_path / "out" / "sweep_dim.csv").read_text().splitlines() == out


@pytest.mark.parametrize("values", ["100,10", "10,10", "5000", "a,b", ""])
def test_sweep_bad_values(tmp_path, values):
    assert main(["sweep", write_config(tmp_path), "--axis", "dim", "--values", values]) == 2


def test_output_dir_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("EVOFLOW_OUTPUT_DIR", str(tmp_path / "elsewhere"))
    assert main(["run", write_config(tmp_path)]) == 0
    assert (tmp_path / "elsewhere" / "metrics.csv").exists()
    assert not (tmp_path / "out").exists()


def _spawn(config, role, node, world, port, timeout=20):
    cmd = [sys.executable, "-m", "evoflow", "run", config, "--role", role, "--node-id", str(node)]
    cmd += ["--world-size", str(world), "--addr", f"127.0.0.1:{port}", "--timeout", str(timeout)]
    return subprocess.Popen(cmd, stdout=subprocess.PIPE, stderr=subprocess.PIPE, env=os.environ.copy())


def test_spmd_handshake_mismatch_exits_4(tmp_path):
    port = free_port()
    a = write_config(tmp_path, "a.json")
    b = write_config(tmp_path, "b.json", pop_size=10)
    procs = [_spawn(a, "coordinator", 0, 2, port), _spawn(b, "worker", 1, 2, port)]
    codes = [p.wait(60) for p in procs]
    for p in procs:
        p.stdout.close()
        p.stderr.close()
    assert codes == [4, 4]


def test_spmd_matches_single_process(tmp_path):
    single = write_config(tmp_path, "single.json", output_dir=str(tmp_path / "single"))
    assert main(["run", single]) == 0
    port = free_port()
    cfg = write_config(tmp_path, "spmd.json", output_dir=str(tmp_path / "spmd"))
    procs = [_spawn(cfg, "coordinator", 0, 2, port), _spawn(cfg, "worker", 1, 2, port)]
    codes = [p.wait(60) for p in procs]
    for p in procs:
        p.stdout.close()
        p.stderr.close()
    assert codes == [0, 0]
    expect = (tmp_path / "single" / "metrics.csv").read_bytes()
    assert (tmp_path / "spmd" / "metrics.csv").read_bytes() == expect
    assert (tmp_path / "spmd" / "node1" / "metrics.csv").read_bytes() == expect
