import json
import os
import subprocess
import sys

import pytest

from crossed_site import cli
from crossed_site.standard_families import weyl_table


def run_json(capsys, *argv):
    code = cli.run([*argv, "--json"])
    out = capsys.readouterr().out
    return code, json.loads(out), out


def assert_ints_only(obj):
    assert not isinstance(obj, float)
    if isinstance(obj, dict):
        for v in obj.values():
            assert_ints_only(v)
    elif isinstance(obj, list):
        for v in obj:
            assert_ints_only(v)


@pytest.mark.parametrize("site,n,order", [("aug-delta", 3, 48), ("nabla", 2, 16), ("delta", 1, 8)])
def test_weyl(capsys, site, n, order):
    code, body, raw = run_json(capsys, "weyl", "--site", site, "--level", str(n), "--elements")
    assert code == 0
    assert body["order"] == body["closed_form_order"] == order == len(body["elements"])
    assert body["schema_version"] == 1 and body["probe_cap"] == n + 2
    assert raw == json.dumps(body, sort_keys=True, indent=2) + "\n"
    assert_ints_only(body)


def test_output_is_deterministic(tmp_path, capsys):
    outs = []
    for k in range(2):
        p = tmp_path / f"o{k}.json"
        assert cli.run(["classify", "--table", "2", "--max-level", "3", "--json", "--output", str(p)]) == 0
        outs.append(p.read_text())
    assert outs[0] == outs[1]
    assert capsys.readouterr().out == ""
    body = json.loads(outs[0])
    assert body["ok"] and body["matched_rows"] == 7


def test_verify(capsys):
    code, body, _ = run_json(capsys, "verify", "--family", "hyp", "--site", "nabla", "--max-level", "2")
    assert code == 0 and body["passed"] and body["orders"] == [1, 2, 8]
    assert_ints_only(body)


def test_text_mode(capsys):
    assert cli.run(["verify", "--family", "sym", "--site", "aug-delta", "--max-level", "2"]) == 0
    assert "PASS" in capsys.readouterr().out


@pytest.mark.parametrize("table", [1, 2, 3])
def test_classify(capsys, table):
    code, body, _ = run_json(capsys, "classify", "--table", str(table), "--max-level", "3")
    assert code == 0 and body["ok"]
    assert_ints_only(body)


def test_classify_default_is_capped(capsys, monkeypatch):
    monkeypatch.setenv("CROSSED_SITE_MAX_LEVEL", "2")
    code, body, _ = run_json(capsys, "classify", "--table", "2")
    assert code == 0 and body["max_level"] == 2


def test_env_var_sets_the_default_level(capsys, monkeypatch):
    monkeypatch.setenv("CROSSED_SITE_MAX_LEVEL", "1")
    code, body, _ = run_json(capsys, "verify", "--family", "weyl", "--site", "aug-delta")
    assert code == 0 and body["max_level"] == 1
    # an explicit flag wins over the environment
    code, body, _ = run_json(capsys, "verify", "--family", "weyl", "--site", "aug-delta", "--max-level", "2")
    assert body["max_level"] == 2


def test_rtimes_and_free_monoid(capsys):
    code, body, _ = run_json(capsys, "rtimes", "--objects", "rep1,sym", "--max-level", "2")
    assert code == 0 and body["ok"] and len(body["triples"]) == 8
    code, body, _ = run_json(capsys, "free-monoid", "--object", "rep1", "--word-cap", "2")
    assert code == 0 and body["ok"]
    assert body["words"] == [sum(g ** k for k in range(3)) for g in body["generators"]]


def test_base_change(tmp_path, capsys):
    request = tmp_path / "in.json"
    request.write_text(json.dumps({"family": "weyl", "site": "delta", "max_level": 2}))
    code, body, _ = run_json(capsys, "base-change", "--functor", "j", "--direction", "ran", "--input", str(request))
    assert code == 0 and body["counit_iso"] and body["output_orders"] == weyl_table("aug-delta", 3).orders
    tab = tmp_path / "t.json"
    tab.write_text(json.dumps(weyl_table("aug-delta", 2).to_json()))
    code, body, _ = run_json(capsys, "base-change", "--functor", "j", "--direction", "lan", "--input", str(tab))
    assert code == 0 and all(e["unit_bijective"] for e in body["levels"] if e["level"] >= 1)
    request.write_text(json.dumps({"family": "weyl", "site": "aug-delta", "max_level": 3}))
    code, body, _ = run_json(capsys, "base-change", "--functor", "J", "--direction", "ran", "--input", str(request))
    # with theta = +1 no endpoint swap survives: hyperoctahedral orders on Nabla levels 0, 1
    assert code == 0 and body["valid"] and body["output_sizes"] == [1, 2]


def test_goursat(capsys):
    code, body, _ = run_json(capsys, "goursat")
    assert code == 0 and body["ok"]
    assert body["subgroups"] == body["quintuples"] == 24
    assert sorted(c["quadruple"] for c in body["candidates"] if not c["nabla_closed"]) == \
        ["(*,*;C2,C2)", "(S,S;C2,C2)"]


def test_subgroup_gen(capsys):
    W = weyl_table("aug-delta", 3)
    perms, signs = W.signed[1]
    refl = next(i for i in range(W.sizes[1]) if signs[i].tolist() == [-1])
    code, body, _ = run_json(capsys, "subgroup-gen", "--site", "aug-delta", "--generator", f"1:{refl}")
    assert code == 0 and "refl" in body["named_families"]
    code, body, _ = run_json(capsys, "subgroup-gen", "--site", "aug-delta")
    assert body["orders"] == [1, 1, 1, 1] and "trivial" in body["named_families"]


def test_mismatch_exit_code(capsys, monkeypatch):
    assert cli.run(["weyl", "--site", "delta", "--level", "2"]) == 0
    capsys.readouterr()
    # a wrong closed form must surface as a mismatch, not a crash
    monkeypatch.setattr(cli, "weyl_closed_order", lambda site, n: 1)
    code, body, _ = run_json(capsys, "weyl", "--site", "delta", "--level", "2")
    assert code == 1 and body["order"] == 48 and body["closed_form_order"] == 1


USAGE = [
    (["weyl", "--site", "mars", "--level", "1"], "--site"),
    (["weyl", "--site", "nabla", "--level", "-1"], "--level"),
    (["weyl", "--site", "nabla", "--level", "2", "--probe-cap", "2"], "--probe-cap"),
    (["verify", "--family", "cyc", "--site", "nabla"], "--family"),
    (["verify", "--family", "nope", "--site", "nabla"], "--family"),
    (["verify", "--family", "weyl", "--site", "delta", "--max-level", "5"], "--max-level"),
    (["classify", "--table", "9"], "--table"),
    (["classify", "--table", "2", "--max-level", "5"], "--max-level"),
    (["verify", "--family", "sym", "--site", "nabla", "--word-cap", "0"], "--word-cap"),
    (["verify", "--family", "sym", "--site", "nabla", "--threads", "0"], "--threads"),
    (["verify", "--family", "sym", "--site", "nabla", "--bogus"], "--bogus"),
    (["weyl", "--site", "nabla", "--level", "x"], "--level"),
    (["subgroup-gen", "--site", "nabla", "--generator", "1-2"], "--generator"),
    (["rtimes", "--objects", "rep9"], "--objects"),
    (["base-change", "--functor", "k", "--direction", "lan", "--input", "x"], "--functor"),
    (["base-change", "--functor", "j", "--direction", "up", "--input", "x"], "--direction"),
    (["base-change", "--functor", "j", "--direction", "lan", "--input", "/nonexistent"], "--input"),
    (["goursat", "--max-level", "-1"], "--max-level"),
]


@pytest.mark.parametrize("argv,flag", USAGE, ids=[" ".join(a) for a, _ in USAGE])
def test_usage_errors_name_the_flag(capsys, argv, flag):
    assert cli.run(argv) == 2
    assert flag in capsys.readouterr().err


def test_bad_env_var(capsys, monkeypatch):
    monkeypatch.setenv("CROSSED_SITE_MAX_LEVEL", "many")
    assert cli.run(["verify", "--family", "sym", "--site", "nabla"]) == 2
    assert "CROSSED_SITE_MAX_LEVEL" in capsys.readouterr().err


def test_console_script():
    env = dict(os.environ, CROSSED_SITE_MAX_LEVEL="2")
    out = subprocess.run([sys.executable, "-m", "crossed_site.cli", "weyl", "--site", "nabla", "--level", "1",
                          "--json", "--threads", "4", "--seed", "7"],
                         env=env, capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["order"] == 4
    out = subprocess.run([sys.executable, "-m", "crossed_site.cli", "weyl"], capture_output=True, text=True)
    assert out.returncode == 2
