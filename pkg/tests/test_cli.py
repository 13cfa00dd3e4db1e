import io
import json

import pytest

from hypersos.cli import main


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


def test_twopoint_gen_and_verify(tmp_path):
    f = tmp_path / "c.json"
    code, text = run("twopoint", "gen", "--k", "2", "--rho", "1/3", "--out", str(f))
    assert code == 0 and "[PASS]" in text
    assert json.loads(f.read_text())["format"] == "hypersos-cert/1"
    rep = tmp_path / "r.json"
    code, _ = run("--report", str(rep), "verify", str(f))
    assert code == 0
    data = json.loads(rep.read_text())
    assert data["ok"] and str(f) in json.dumps(data["files"])


def test_report_digest_ignores_timings(tmp_path):
    digests = []
    for i in range(2):
        rep = tmp_path / f"r{i}.json"
        assert run("--quiet", "--report", str(rep), "hyper", "identity", "--smax", "20")[0] == 0
        digests.append(json.loads(rep.read_text())["digest"])
    assert digests[0] == digests[1]


def test_corrupted_certificate(tmp_path):
    f = tmp_path / "c.json"
    run("--quiet", "twopoint", "gen", "--k", "1", "--rho", "1/2", "--out", str(f))
    data = json.loads(f.read_text())
    data["target"] = data["target"] + " + 1"
    f.write_text(json.dumps(data))
    code, text = run("verify", str(f))
    assert code == 1 and "[FAIL]" in text


def test_malformed_input_exit_2(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("{not json")
    assert run("verify", str(f))[0] == 2
    assert run("twopoint", "gen", "--k", "1", "--rho", "0.5")[0] == 2
    assert run("hyper", "termwise", "--s", "2", "--rho2", "1/2")[0] == 2
    assert run("nonsense")[0] == 2


def test_reverse_and_hyper_dags(tmp_path):
    f = tmp_path / "r.dag"
    assert run("--quiet", "reverse", "gen", "--n", "2", "--k", "1", "--rho", "1/2", "--out", str(f))[0] == 0
    assert run("reverse", "verify", str(f))[0] == 0
    h = tmp_path / "h.dag"
    assert run("--quiet", "hyper", "gen", "--n", "1", "--s", "2", "--rho2", "1/3", "--out", str(h))[0] == 0
    assert run("verify", str(h))[0] == 0


def test_termwise_verdicts():
    assert run("hyper", "termwise", "--s", "2", "--rho2", "1/3", "--moments", "1,9")[0] == 0
    code, text = run("hyper", "termwise", "--s", "2", "--rho2", "1/3", "--moments", "1,10")
    assert code == 1 and "j=2" in text


def test_fr_verbs(tmp_path):
    code, text = run("fr", "minalpha", "--n", "4", "--gamma", "1/2")
    assert code == 0 and "119/100" in text
    assert run("--quiet", "fr", "refute", "--n", "4", "--gamma", "1/2", "--alpha", "9/10")[0] == 1
    f = tmp_path / "fr.dag"
    assert run("--quiet", "fr", "refute", "--n", "4", "--gamma", "1/2", "--alpha", "6/5", "--out", str(f))[0] == 0
    assert run("verify", str(f))[0] == 0


@pytest.mark.parametrize("verb", [["twopoint", "puzzle"], ["hyper", "moments", "--s", "3"],
                                  ["fr", "spectrum", "--n", "4", "--gamma", "1/2"], ["repro", "puzzle"]])
def test_simple_verbs(verb):
    assert run(*verb)[0] == 0
