import json
import subprocess
import sys

import pytest

from squashed_s7.cli import (
    CRITERIA, REGISTRY, Config, main, read_config_file, resolve_config, run, run_claim, select,
)


def _json(capsys, argv):
    code = main(argv + ["--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_every_criterion_has_one_claim():
    assert sorted(CRITERIA) == list(range(1, 15))
    crits = [c.criterion for c in REGISTRY.values() if c.criterion is not None]
    assert len(crits) == len(set(crits)) == 14


def test_unknown_suite_is_usage_error():
    proc = subprocess.run([sys.executable, "-m", "squashed_s7", "--suite", "bogus"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "usage" in proc.stderr
    with pytest.raises(ValueError):
        select("bogus")


def test_case_filter():
    ids = {c.claim_id for c in select("deform", "A2")}
    assert ids == {"kernel_dim_A2", "trivial_rank_A2"}


def test_kernel_claim_value(capsys):
    code, doc = _json(capsys, ["--suite", "deform", "--case", "A2"])
    claims = {c["claim_id"]: c for c in doc["claims"]}
    assert claims["kernel_dim_A2"]["status"] == "pass"
    assert claims["kernel_dim_A2"]["witness"]["value"] == 16
    assert code == 0


def test_report_schema(capsys):
    _, doc = _json(capsys, ["--suite", "twistor"])
    assert set(doc) == {"config", "claims", "summary"}
    for c in doc["claims"]:
        assert set(c) == {"claim_id", "status", "residual", "tolerance", "witness"}
        assert c["status"] in ("pass", "fail", "error")
    assert doc["summary"]["total"] == len(doc["claims"])
    assert doc["config"]["suite"] == "twistor"


def test_timings_flag(capsys):
    _, doc = _json(capsys, ["--suite", "twistor", "--timings"])
    assert all("runtime_ms" in c for c in doc["claims"])


def test_failure_gives_nonzero_exit(capsys):
    code, doc = _json(capsys, ["--suite", "structure"])
    assert doc["summary"]["fail"] + doc["summary"]["error"] > 0
    assert code == 1


def test_output_is_byte_identical(capsys):
    main(["--suite", "twistor", "--format", "json"])
    a = capsys.readouterr().out
    main(["--suite", "twistor", "--format", "json", "--jobs", "3"])
    b = capsys.readouterr().out
    assert a == b


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nseed = 7\nsamples=5\ngamma-max = 5\n")
    assert read_config_file(cfg) == {"seed": 7, "samples": 5, "gamma_max": 5}
    c, _ = resolve_config(["--config", str(cfg), "--seed", "9"])
    assert (c.seed, c.samples, c.gamma_max, c.nmax) == (9, 5, 5, 10)


def test_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(SystemExit) as exc:
        resolve_config(["--config", str(cfg)])
    assert exc.value.code == 2


def test_negative_claim_passes():
    rep = run_claim(REGISTRY["sol1_counterexample"], Config())
    assert rep.status == "pass"


def test_errors_are_reported():
    from squashed_s7.cli import Claim

    def boom(cfg):
        raise RuntimeError("no")
    rep = run_claim(Claim("boom", "all", boom), Config())
    assert rep.status == "error" and "RuntimeError" in rep.witness


def test_spectrum_output(tmp_path, capsys):
    out = tmp_path / "s.csv"
    main(["--suite", "deform", "--case", "L2", "--spectrum-out", str(out)])
    lines = out.read_text().splitlines()
    assert lines[0] == "case,n,k,gamma_eigenvalue,in_kernel"
    assert all(l.startswith("L2,") for l in lines[1:])


def test_list(capsys):
    assert main(["--list", "--suite", "twistor"]) == 0
    out = capsys.readouterr().out
    assert "veronese_stabilizer" in out and "criterion 12" in out


def test_run_without_config():
    reps = run("twistor")
    assert [r.claim_id for r in reps] == sorted(r.claim_id for r in reps)
