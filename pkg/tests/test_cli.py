"""End-to-end runs of the command-line entry point."""

import json

import pytest

from bergelab.cli import main, workers

INV_CONFIG = {
    "backorders": False,
    "L": 2.0,
    "M": "+inf",
    "c1": 1.0,
    "c2": 1.0,
    "alpha": 0.9,
    "h": {"op": "abs", "args": [{"var": "x"}]},
    "demand": [[0.0, 0.5], [1.0, 0.5]],
    "grid": {"lo": 0.0, "hi": 2.0, "step": 1.0},
    "action_step": 1.0,
    "horizon": 2,
}

MMX_CONFIG = {
    "x_domain": {"lo": 0.0, "hi": 1.0},
    "a_domain": {"lo": 0.0, "hi": 1.0},
    "b_domain": {"lo": 0.0, "hi": 1.0},
    "phi_A": {"pieces": [{"lower": {"const": 0}, "upper": {"const": 1}}]},
    "phi_B": {"pieces": [{"lower": {"const": 0}, "upper": {"const": 1}}]},
    "f": {
        "op": "mul",
        "args": [
            {"op": "sub", "args": [{"var": "a"}, {"var": "b"}]},
            {"op": "sub", "args": [{"var": "a"}, {"var": "b"}]},
        ],
    },
    "a_grid": {"lo": 0.0, "hi": 1.0, "step": "1/16"},
    "b_grid": {"lo": 0.0, "hi": 1.0, "step": "1/16"},
}


@pytest.fixture()
def inv_config(tmp_path):
    path = tmp_path / "inv.json"
    path.write_text(json.dumps(INV_CONFIG))
    return path


@pytest.fixture()
def mmx_config(tmp_path):
    path = tmp_path / "mmx.json"
    path.write_text(json.dumps(MMX_CONFIG))
    return path


def test_corpus_list(tmp_path, capsys):
    assert main(["corpus", "list", "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert "vasquez" in out["fixtures"]


def test_corpus_show(tmp_path, capsys):
    assert main(["corpus", "show", "optimum-counterexample",
                 "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["subcases"][0]["labels"]


def test_check_violated_flips_exit_code_under_strict(tmp_path, capsys):
    argv = ["check", "--problem", "optimum-counterexample", "--property", "KN",
            "--at", "0", "--out", str(tmp_path)]
    assert main(argv) == 0
    assert main(argv + ["--strict"]) == 2
    report = json.loads((tmp_path / "check.json").read_text())
    assert report["verdict"]["status"] == "Violated"
    assert (tmp_path / "check.json.meta.json").exists()


def test_check_unknown_property_exits_1(tmp_path, capsys):
    assert main(["check", "--problem", "optimum-counterexample",
                 "--property", "bogus", "--at", "0", "--out", str(tmp_path)]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["module"] == "cli"
    assert "bogus" in err["error"]["detail"]


def test_missing_file_exits_1(tmp_path, capsys):
    assert main(["inventory", "solve", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path)]) == 1


def test_solve_writes_csv_json_and_png(tmp_path, capsys):
    assert main(["solve", "--problem", "optimum-counterexample",
                 "--grid", "0:1:1/8", "--ygrid", "0:1:1/16",
                 "--out", str(tmp_path)]) == 0
    assert (tmp_path / "solve.csv").exists()
    assert (tmp_path / "solve.png").exists()
    profile = json.loads((tmp_path / "solve.json").read_text())["profile"]
    # u*(x) = 1 - x on this fixture; extended reals serialize as text
    assert profile[0]["value"] == "1.0"
    assert profile[-1]["value"] == "0.0"


def test_inventory_solve_with_oracle(inv_config, tmp_path, capsys):
    assert main(["inventory", "solve", "--config", str(inv_config),
                 "--oracle", "--out", str(tmp_path)]) == 0
    diag = json.loads((tmp_path / "inventory.json").read_text())
    assert diag["oracle_max_deviation"] <= 1e-9
    assert diag["never_order_bound_respected"] is True
    assert (tmp_path / "inventory.png").exists()


def test_inventory_oracle_refuses_huge_instances(inv_config, tmp_path, capsys):
    big = json.loads(inv_config.read_text())
    big["horizon"] = 8
    big["grid"] = {"lo": 0.0, "hi": 50.0, "step": 0.1}
    big["action_step"] = 0.1
    path = inv_config.parent / "big.json"
    path.write_text(json.dumps(big))
    assert main(["inventory", "solve", "--config", str(path),
                 "--oracle", "--out", str(tmp_path)]) == 1
    err = json.loads(capsys.readouterr().err)
    assert "exhaustive" in err["error"]["detail"]


def test_inventory_diagnose_reports_refined_moduli(inv_config, tmp_path, capsys):
    assert main(["inventory", "diagnose", "--config", str(inv_config),
                 "--out", str(tmp_path)]) == 0
    diag = json.loads(capsys.readouterr().out)
    assert len(diag["modulus_per_stage_refined"]) == len(diag["modulus_per_stage"])


def test_minimax_solve_with_oracle(mmx_config, tmp_path, capsys):
    assert main(["minimax", "solve", "--config", str(mmx_config),
                 "--oracle", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "minimax.json").read_text())
    assert report["f_star"][0] == "0.25"
    assert report["weak_duality_holds"] is True
    assert all(report["oracle_matches"])


def test_minimax_check_strict_exit(mmx_config, tmp_path, capsys):
    assert main(["minimax", "check", "--config", str(mmx_config),
                 "--property", "a-lsc", "--at", "0.5",
                 "--out", str(tmp_path), "--strict"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"]["status"] == "NoViolationFound"


def test_plot_subcommand_renders_existing_csv(inv_config, tmp_path, capsys):
    assert main(["inventory", "solve", "--config", str(inv_config),
                 "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    assert main(["plot", str(tmp_path / "inventory.csv"),
                 "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["png"].endswith("inventory.png")


def test_worker_pool_env_parsing(monkeypatch):
    monkeypatch.delenv("BERGELAB_WORKERS", raising=False)
    assert workers() >= 1
    monkeypatch.setenv("BERGELAB_WORKERS", "3")
    assert workers() == 3
    monkeypatch.setenv("BERGELAB_WORKERS", "0")
    with pytest.raises(Exception):
        workers()


def test_payloads_identical_across_worker_counts(tmp_path, monkeypatch, capsys):
    payloads = {}
    for n in ("1", "8"):
        out = tmp_path / f"w{n}"
        monkeypatch.setenv("BERGELAB_WORKERS", n)
        assert main(["corpus", "verify", "optimum-counterexample",
                     "--out", str(out)]) == 0
        payloads[n] = (out / "corpus-verify.json").read_bytes()
    assert payloads["1"] == payloads["8"]
