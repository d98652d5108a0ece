import json
import subprocess
import sys

import pytest

from salemkit.cli import config_from_args, main

SALEM = {"construction": "salem", "d": 1, "r": 2, "alpha": "1/2", "depth": 2, "seed": 11}


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_construct_then_verify(tmp_path):
    params = write(tmp_path / "p.json", SALEM)
    out = tmp_path / "a"
    assert main(["construct", "--params", params, "--out", str(out)]) == 0
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["seed"] == 11 and len(meta["files"]) == 2
    assert main(["verify", str(out), "--out", str(tmp_path / "v")]) == 0
    rep = json.loads((tmp_path / "v" / "verify.json").read_text())
    assert rep["passed"]
    assert any(v["name"] == "files_match_rebuild" and v["passed"] for v in rep["verdicts"])


def test_construct_is_byte_identical(tmp_path):
    params = write(tmp_path / "p.json", SALEM)
    for name in ("a", "b"):
        assert main(["construct", "--params", params, "--out", str(tmp_path / name)]) == 0
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b")
    # the embedded echo alone reproduces the run
    echo = json.loads((tmp_path / "a" / "metadata.json").read_text())["params"]
    again = write(tmp_path / "echo.json", echo)
    assert main(["construct", "--params", again, "--out", str(tmp_path / "c")]) == 0
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "c")


def test_seed_flag_overrides(tmp_path):
    params = write(tmp_path / "p.json", SALEM)
    main(["construct", "--params", params, "--out", str(tmp_path / "a"), "--seed", "12"])
    assert json.loads((tmp_path / "a" / "metadata.json").read_text())["seed"] == 12


def test_tampered_file_fails_verify(tmp_path):
    params = write(tmp_path / "p.json", SALEM)
    out = tmp_path / "a"
    main(["construct", "--params", params, "--out", str(out)])
    f = out / "measure_02.txt"
    lines = f.read_text().splitlines()
    head, first = lines[0], lines[1].split()
    first[-1] = str(int(first[-1]) + 1)
    f.write_text("\n".join([head, " ".join(first)] + lines[2:]) + "\n")
    assert main(["verify", str(out), "--out", str(tmp_path / "v")]) == 1


@pytest.mark.parametrize("doc, code", [
    ({**SALEM, "alpha": 1}, 2),
    ({**SALEM, "construction": "heavy-core", "alpha": "3/10", "beta": "1/2", "overrides": {"c": 100}}, 3),
])
def test_exit_codes(tmp_path, doc, code):
    params = write(tmp_path / "p.json", doc)
    assert main(["construct", "--params", params, "--out", str(tmp_path / "o")]) == code


def test_unreadable_inputs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["construct", "--params", str(bad), "--out", str(tmp_path / "o")]) == 4
    assert main(["verify", str(tmp_path / "missing"), "--out", str(tmp_path / "o")]) == 4
    assert main(["construct", "--params", str(tmp_path / "p.json"), "--seed", str(2 ** 64)]) == 2


def test_out_precedence(tmp_path):
    assert str(config_from_args(["construct"], {"SALEMKIT_OUT": "/e"}).out) == "/e"
    assert str(config_from_args(["construct", "--out", "/f"], {"SALEMKIT_OUT": "/e"}).out) == "/f"
    assert str(config_from_args(["construct"], {}).out) == "salemkit-out"


def test_experiment_restriction(tmp_path):
    doc = {"construction": "restriction-nongeo", "d": 1, "r": 2, "alpha": "3/10", "beta": "1/2",
           "depth": 3, "seed": 1, "experiment": "restriction", "pq": [[2, 2], [2, 20]]}
    params = write(tmp_path / "p.json", doc)
    for name in ("a", "b"):
        assert main(["experiment", "--params", params, "--out", str(tmp_path / name), "--threads", "2"]) == 0
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b")
    rep = json.loads((tmp_path / "a" / "restriction.json").read_text())
    assert rep["params"]["pq"] == [["2", "2"], ["2", "20"]]
    wrong = write(tmp_path / "w.json", {**doc, "experiment": "conv-geometric"})
    assert main(["experiment", "--params", wrong, "--out", str(tmp_path / "o")]) == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "salemkit", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("salemkit ")
