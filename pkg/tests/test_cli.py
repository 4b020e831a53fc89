import csv
import json
import warnings

import numpy as np
import pytest

from hardydil import __version__
from hardydil.cli import config_hash, emit_plotdata, load_config, main, run_pipeline
from hardydil.errors import ConfigInvalid, PipelineStageFailure

SMALL = {
    "group": "abelian:2",
    "A": [[1, 0], [0, 2]],
    "B": [[2, 0], [0, 1]],
    "p": 0.5,
    "grid": {"L": 2.0, "m": 17},
    "atom_grid": {"L": 2.0, "m": 65},
    "ladder": {"q": 4, "K": 8},
    "seed": 7,
    "j_max": 2,
}


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_group_check(capsys):
    code, out = run(capsys, "group", "check", "--group", "heisenberg")
    assert code == 0 and json.loads(out.out)["step"] == 2


def test_dilation_check_exit_codes(capsys):
    code, _ = run(capsys, "dilation", "check", "--group", "heisenberg", "--matrix", "[[1,0,0],[0,1,0],[0,0,2]]")
    assert code == 0
    code, out = run(capsys, "dilation", "check", "--group", "heisenberg", "--matrix", "[[1,0,0],[0,2,0],[0,0,2]]")
    assert code == 4 and "derivation" in out.err
    code, _ = run(capsys, "dilation", "check", "--matrix", "[[1,0],[0")
    assert code == 2


def test_normalize_flag(capsys):
    code, out = run(capsys, "dilation", "check", "--matrix", "[[2,0],[0,4]]", "--normalize-min-eigenvalue")
    assert code == 0 and json.loads(out.out)["eigenvalues"] == [1.0, 2.0]


def test_norm_commands(capsys):
    code, out = run(capsys, "norm", "eval", "--matrix", "[[1,0],[0,2]]", "--point", "[0,4]")
    assert json.loads(out.out)["rho"] == pytest.approx(2.0)
    code, out = run(capsys, "norm", "constants", "--group", "heisenberg", "--matrix",
                    "[[1,0,0],[0,1,0],[0,0,2]]", "--samples", "500")
    assert set(json.loads(out.out)) >= {"C", "gamma", "c1", "c2", "seed", "samples"}


def test_moments_alpha(capsys):
    code, out = run(capsys, "moments", "alpha", "--group", "heisenberg", "--matrix",
                    "[[1,0,0],[0,1,0],[0,0,2]]", "--p", "0.5")
    d = json.loads(out.out)
    assert d["alpha_min"] == 4 and d["delta"] == [0, 1, 2, 3, 4]


def test_atom_round_trip(capsys, tmp_path):
    pre = str(tmp_path / "a0")
    assert run(capsys, "atom", "build-base", "--alpha", "2", "--p", "0.5", "--m", "65", "--prefix", pre)[0] == 0
    aux = str(tmp_path / "a2")
    args = ["--A", "[[1,0],[0,2]]", "--B", "[[2,0],[0,1]]"]
    assert run(capsys, "atom", "build-aux", "--atom", pre, "--j", "2", "--prefix", aux, *args)[0] == 0
    code, out = run(capsys, "atom", "validate", "--atom", aux, "--kind", "family", *args)
    assert code == 0 and json.loads(out.out)["passed"]
    assert (tmp_path / "a2.npy").exists()


def test_atom_validate_failure_exit_code(capsys, tmp_path):
    pre = tmp_path / "a0"
    run(capsys, "atom", "build-base", "--alpha", "1", "--m", "65", "--prefix", str(pre))
    head = json.loads(pre.with_suffix(".json").read_text())
    vals = np.load(pre.with_suffix(".npy")) * 1e6
    np.save(pre.with_suffix(".npy"), vals)
    code, _ = run(capsys, "atom", "validate", "--atom", str(pre), "--kind", "family",
                  "--A", "[[1,0],[0,1]]", "--B", "[[1,0],[0,1]]")
    assert code == 4 and head["kind"] == "family"


def test_classify_commands(capsys):
    code, out = run(capsys, "classify", "hardy", "--A", "[[2,0],[0,2]]", "--B", "[[1,0],[0,1]]", "--scan-window", "4")
    assert json.loads(out.out)["verdict"] == "equal-hardy"
    code, out = run(capsys, "classify", "norms", "--A", "[[1,0],[0,2]]", "--B", "[[2,0],[0,1]]")
    assert json.loads(out.out)["verdict"] == "neither"


def test_blowup_command_rejects_p(capsys):
    code, out = run(capsys, "experiment", "blowup", "--A", "[[1,0],[0,2]]", "--B", "[[2,0],[0,1]]", "--p", "1")
    assert code == 2 and "'p'" in out.err


def test_config_validation():
    with pytest.raises(ConfigInvalid) as err:
        load_config({**SMALL, "p": 1.5})
    assert err.value.field == "p"
    with pytest.raises(ConfigInvalid) as err:
        load_config({**SMALL, "grid": {"L": 2.0, "m": 16}})
    assert err.value.field == "grid.m"
    with pytest.raises(ConfigInvalid):
        load_config({**SMALL, "group": "missing-group.json"})
    with pytest.raises(ConfigInvalid):
        load_config({**SMALL, "tolerance": 0})


def test_pipeline_stage_failure(tmp_path):
    bad = {**SMALL, "A": [[1, 0, 0], [0, 2, 0], [0, 0, 3]], "group": "heisenberg"}
    with pytest.raises(PipelineStageFailure) as err:
        run_pipeline(bad, tmp_path)
    assert err.value.stage == "setup" and err.value.exit_code == 4


def test_pipeline_is_byte_identical(tmp_path):
    a = run_pipeline(SMALL, tmp_path / "a")
    b = run_pipeline(SMALL, tmp_path / "b")
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
    man = json.loads((a / "manifest.json").read_text())
    assert man["version"] == __version__
    assert man["config_sha256"] == config_hash(load_config(SMALL))
    assert "blowup.csv" in man["files"] and "atom_aux_j2.npy" in man["files"]


def test_pipeline_at_p_one_skips_blowup(tmp_path):
    out = run_pipeline({**SMALL, "p": 1.0, "j_max": 1}, tmp_path)
    assert not (out / "blowup.csv").exists()
    assert json.loads((out / "manifest.json").read_text())["notes"]


@pytest.mark.parametrize("name", ["r2-diverge.json", "heisenberg-same.json"])
def test_bundled_configs(name, tmp_path):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        out = run_pipeline(name, tmp_path)
    col = [float(r["integral_p"]) for r in csv.DictReader(open(out / "blowup.csv"))]
    if name.startswith("r2"):
        assert all(b > a for a, b in zip(col, col[1:]))
    else:
        assert max(col) / min(col) <= 4


def test_plotdata(tmp_path):
    src = tmp_path / "t.csv"
    src.write_text("j,d_j,tau_j,det_Mj,witness_min,integral_p,marker\n1,1,1,1,1,0.5,2\n2,2,1,1,1,0.9,4\n")
    out = emit_plotdata(src)
    assert out["integral_p"].read_text().splitlines()[1:] == ["1 0.5", "2 0.9"]
    assert out["marker"].read_text().splitlines()[2] == "2 4"


def test_plotdata_empty_and_missing(tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("")
    with pytest.warns(RuntimeWarning):
        out = emit_plotdata(empty)
    assert out["marker"].read_text().splitlines()[1:] == []
    miss = tmp_path / "m.csv"
    miss.write_text("j,d_j\n1,1\n")
    with pytest.raises(ConfigInvalid, match="integral_p"):
        emit_plotdata(miss)
    with pytest.raises(FileNotFoundError):
        emit_plotdata(tmp_path / "none.csv")
