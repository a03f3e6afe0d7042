import json
import subprocess
import sys

import pytest

from twomatrix import cli, io

from conftest import EXAMPLES


def example(name="symmetric"):
    return json.loads(EXAMPLES.joinpath(f"{name}.json").read_text())


def run(tmp_path, doc, *args, name="cfg.json"):
    cfg = tmp_path / name
    cfg.write_text(json.dumps(doc))
    out = tmp_path / ("report-" + name)
    code = cli.main([args[0], "--config", str(cfg), "--out", str(out), *args[1:]])
    return code, json.loads(out.read_text())


def test_forward_is_deterministic(tmp_path):
    code, rep = run(tmp_path, example(), "forward")
    assert code == cli.EXIT_OK and rep["status"] == "pass"
    first = (tmp_path / "report-cfg.json").read_bytes()
    run(tmp_path, example(), "forward")
    assert (tmp_path / "report-cfg.json").read_bytes() == first
    assert rep["config_hash"] == io.digest(example())
    assert rep["tool_version"] and rep["tolerances"]["norm_residual"] == 1e-10
    # the hand seed is only a starting point, not a normalized curve
    assert not rep["result"]["norm_ok"]


def test_forward_solve_roundtrip(tmp_path, sym):
    doc = example()
    _, solved = run(tmp_path, doc, "solve", name="a.json")
    doc["seed"] = solved["result"]["params"]
    code, rep = run(tmp_path, doc, "forward", name="b.json")
    assert code == 0
    assert rep["result"]["norm_residual"] < 1e-10 and rep["result"]["norm_ok"]
    got = io.model_from_dict({k: rep["result"][k] for k in ("g", "gt", "epsilon")})
    assert abs(got.target() - sym.model.target()).max() < 1e-10


def test_solve_uses_the_cache(tmp_path):
    cache = tmp_path / "cache"
    code, rep = run(tmp_path, example(), "solve", "--cache", str(cache))
    assert code == 0 and rep["result"]["solve"]["cache_hit"] is False
    assert rep["result"]["solve"]["iterations"][-1] < 30
    code, again = run(tmp_path, example(), "solve", "--cache", str(cache))
    assert again["result"]["solve"]["cache_hit"] is True
    assert again["result"]["params"] == rep["result"]["params"]
    assert "pinned_im_ratio" in rep["result"]["gauge"]


def test_solve_matches_the_fixture(tmp_path):
    expected = json.loads(EXAMPLES.joinpath("symmetric.expected.json").read_text())
    _, rep = run(tmp_path, example(), "solve")
    got = io.params_from_dict(rep["result"]["params"]).to_vector()
    want = io.params_from_dict(expected["params"]).to_vector()
    assert max(abs(got - want) / abs(want)) < expected["rtol"]


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(extra=1),
    lambda d: d["model"].update(g=[[1, 0]]),
    lambda d: d.update(tolerances={"unheard_of": 1e-3}),
    lambda d: d["seed"].update(d1=3),
])
def test_config_errors_exit_2(tmp_path, mutate):
    doc = example()
    mutate(doc)
    code, rep = run(tmp_path, doc, "forward")
    assert code == cli.EXIT_CONFIG and rep["status"] == "error"


def test_bad_node_count_exits_2(tmp_path):
    code, _ = run(tmp_path, example(), "forward", "--nodes", "100")
    assert code == cli.EXIT_CONFIG


def test_unreadable_config_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["forward", "--config", str(bad), "--out", str(tmp_path / "r.json")]) == 2


def test_numeric_error_dumps_last_iterate(tmp_path):
    doc = example()
    doc["seed"]["u_inf"] = [0.0, 0.0]
    code, rep = run(tmp_path, doc, "solve")
    assert code == cli.EXIT_NUMERIC
    assert rep["result"]["last_iterate"]["u_inf"] == [0.0, 0.0]


def test_failed_check_exits_4(tmp_path):
    doc = example()
    doc["tolerances"] = {"f1_gauge": 1e-300}
    code, rep = run(tmp_path, doc, "correction")
    assert code == cli.EXIT_VALIDATION and rep["status"] == "fail"
    assert rep["checks"][0]["anchor"]


def test_complex_epsilon_warns(tmp_path):
    doc = example()
    doc["model"]["epsilon"] = [0.5, 1e-3]
    _, rep = run(tmp_path, doc, "forward")
    assert rep["warnings"]


def test_validate_selected_suites(tmp_path):
    code, rep = run(tmp_path, example(), "validate", "--suite", "elliptic", "--suite", "torusmap")
    assert code == 0
    assert set(rep["result"]["suites"]) == {"elliptic", "torusmap"}
    assert all(c["name"].split("/")[0] in ("elliptic", "torusmap") for c in rep["checks"])


def test_correction_report(tmp_path):
    code, rep = run(tmp_path, example(), "correction")
    assert code == 0
    names = {c["name"]: c for c in rep["checks"]}
    assert names["dF1-deps"]["passed"] and names["f1-gauge"]["passed"]
    info = names["dF1-deps"]["info"]
    assert len(rep["result"]["y1_samples"]["s"]) == len(rep["result"]["y1_samples"]["y1"])
    assert "ratio_fd_over_gamma1" in info
    io.validate(rep, "report")


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(example()))
    proc = subprocess.run([sys.executable, "-m", "twomatrix", "forward", "--config", str(cfg)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "forward"


def test_full_validation_on_the_example(tmp_path):
    import time
    t0 = time.perf_counter()
    code, rep = run(tmp_path, example(), "validate")
    elapsed = time.perf_counter() - t0
    failed = [c["name"] for c in rep["checks"] if not c["passed"]]
    assert code == 0, failed
    assert set(rep["result"]["suites"]) == set(cli.validation.SUITES)
    assert elapsed < 60
