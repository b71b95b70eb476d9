import io
import json

import pytest

from crosscomp.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def test_bound_text():
    code, out = run("bound", "--ls", "3,3", "--t", "1", "--ns", "5,5")
    assert code == 0
    assert "rhs=36" in out and "paper_n0=81" in out


def test_bound_json():
    code, out = run("bound", "--ls", "4,3", "--t", "1", "--format", "json")
    data = json.loads(out)
    assert data["paper_n0"] == "324"
    assert data["per_case_thresholds"]["case3_1"] == "257"
    assert data["rhs"] is None


def test_space():
    code, out = run("space", "--space", "2:2", "--format", "json")
    assert code == 0
    assert json.loads(out) == {"n": 2, "l": 2, "count": "3", "elements": [[0, 2], [1, 1], [2, 0]]}
    code, out = run("space", "--space", "1000:40", "--count-only")
    assert code == 0 and out.startswith("|P(1000,40)| = ")


def test_star_to_check_round_trip(tmp_path, capsys):
    code, out = run("star", "--spaces", "5:3,7:3,4:4", "--T", "2", "--format", "json")
    assert code == 0
    system = json.loads(out)
    assert system["t"] == 1 and len(system["families"]) == 3
    path = write_json(tmp_path / "sys.json", system)
    code, out = run("check", "--system", path)
    assert code == 0
    assert "cross-1-intersecting: true" in out


def test_single_star_family():
    code, out = run("star", "--spaces", "3:3", "--T", "1", "--format", "json")
    data = json.loads(out)
    assert data["members"] == [[0, 0, 3], [0, 1, 2], [0, 2, 1], [0, 3, 0]]


def test_check_violation_exits_one(tmp_path):
    system = {"t": 1, "families": [
        {"n": 1, "l": 3, "members": [[1, 0, 0]]},
        {"n": 3, "l": 3, "members": [[0, 1, 2]]},
    ]}
    code, out = run("check", "--system", write_json(tmp_path / "s.json", system))
    assert code == 1
    assert "cross-1-intersecting: false" in out and "(1,0,0) (0,1,2)" in out


def test_check_malformed_member_exits_two(tmp_path, capsys):
    system = {"t": 1, "families": [
        {"n": 1, "l": 3, "members": [[1, 0, 0]]},
        {"n": 3, "l": 3, "members": [[0, 1, 2], [1, 1, 0]]},
    ]}
    code, _ = run("check", "--system", write_json(tmp_path / "s.json", system))
    assert code == 2
    err = capsys.readouterr().err
    assert "families[1]" in err and "member #1" in err and "(1,1,0)" in err


def test_check_missing_file_and_bad_json(tmp_path, capsys):
    assert run("check", "--system", str(tmp_path / "nope.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run("check", "--system", str(bad))[0] == 2


def test_oracle():
    code, out = run("oracle", "--spaces", "1:3,1:3", "--t", "1")
    assert code == 0 and "product=9" in out


def test_search_json_and_algorithms():
    _, r2 = run("search", "--spaces", "3:3,2:4", "--t", "1", "--format", "json")
    _, gen = run("search", "--spaces", "3:3,2:4", "--t", "1", "--algorithm", "general",
                 "--format", "json")
    a, b = json.loads(r2), json.loads(gen)
    assert a["product"] == b["product"] and a["witnesses"] == b["witnesses"]
    assert a["optimal"] is True


def test_search_r3():
    code, out = run("search", "--spaces", "1:3,1:3,1:3", "--t", "1", "--format", "json")
    assert code == 0 and json.loads(out)["product"] == "8"


def test_scan_csv():
    code, out = run("scan", "--ls", "3,3", "--t", "1", "--n-min", "1", "--n-max", "4",
                    "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n,max_product,star_bound,equals_star,unique_star,T_observed"
    assert lines[1] == "1,9,4,false,false,"
    assert lines[4] == "4,25,25,true,true,{1};{2};{3}"


def test_scan_cache_second_run_reads_cache(tmp_path, monkeypatch):
    import crosscomp.search as search

    args = ("scan", "--ls", "3,3", "--t", "1", "--n-max", "4", "--format", "json",
            "--cache", str(tmp_path))
    first = run(*args)
    calls = []
    monkeypatch.setattr(search, "max_product_r2", lambda *a, **k: calls.append(a))
    second = run(*args)
    assert calls == []
    assert first == second


def test_cache_env_variable(tmp_path, monkeypatch):
    monkeypatch.setenv("CROSSCOMP_CACHE", str(tmp_path))
    run("search", "--spaces", "2:3,2:3", "--t", "1")
    assert len(list(tmp_path.glob("*.json"))) == 1
    run("search", "--spaces", "2:3,2:3", "--t", "2")
    assert len(list(tmp_path.glob("*.json"))) == 2


def test_corrupt_cache_entry_is_recomputed(tmp_path, caplog):
    args = ("search", "--spaces", "2:3,2:3", "--t", "1", "--format", "json", "--cache", str(tmp_path))
    first = run(*args)
    (entry,) = tmp_path.glob("*.json")
    entry.write_text("not json")
    assert run(*args) == first
    assert "ignoring unreadable cache entry" in caplog.text


def test_unwritable_cache_dir_warns_and_proceeds(tmp_path, caplog):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, out = run("oracle", "--spaces", "1:3,1:3", "--t", "1", "--cache", str(blocker / "sub"))
    assert code == 0 and "product=9" in out
    assert "caching disabled" in caplog.text


def test_independent(tmp_path):
    fam = {"n": 1, "l": 3, "members": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}
    path = write_json(tmp_path / "f.json", fam)
    code, out = run("independent", "--family", path, "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["size"] == 1 and data["optimal"] is True
    code, out = run("independent", "--family", path, "--method", "greedy", "--format", "json")
    assert json.loads(out)["members"] == [[0, 0, 1]]


def test_dichotomy(tmp_path):
    star = json.loads(run("star", "--spaces", "5:3", "--T", "1", "--format", "json")[1])
    path = write_json(tmp_path / "a.json", star)
    assert run("dichotomy", "--family", path, "--v", "(0,2,3)", "--xs", "1", "--ys", "0",
               "--t", "1")[1].strip() == "BRANCH_B"
    assert run("dichotomy", "--family", path, "--v", "(1,2,2)", "--xs", "1", "--ys", "0",
               "--t", "1")[1].strip() == "BRANCH_A"
    code, _ = run("dichotomy", "--family", path, "--v", "(1,2,2)", "--xs", "1", "--ys", "0",
                  "--t", "2")
    assert code == 2


@pytest.mark.parametrize("argv", [
    ("bound", "--ls", "3,x", "--t", "1"),
    ("search", "--spaces", "1-3", "--t", "1"),
    ("frobnicate",),
    ("bound", "--ls", "3,4", "--t", "2"),
])
def test_invalid_arguments_exit_two(argv):
    with pytest.raises(SystemExit) as exc:
        code, _ = run(*argv)
        raise SystemExit(code)
    assert exc.value.code == 2


def test_outputs_are_byte_identical_across_runs():
    args = ("search", "--spaces", "3:3,3:3", "--t", "1", "--all-maximizers", "--format", "json")
    assert run(*args) == run(*args)
    workers = run(*args[:-2], "--workers", "2", "--format", "json")
    assert workers == run(*args)
