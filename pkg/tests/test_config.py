import json

import config_heegner as config
from heegner_config import HeegnerConfig, create_sample_config


def test_defaults():
    settings = HeegnerConfig.load()
    assert settings.oracle_budget == config.ORACLE["search_budget"]
    assert settings.max_workers == config.BATCH["max_workers"]
    assert settings.verbose is False


def test_priority_cli_over_env_over_file(isolated_home, monkeypatch):
    (isolated_home / ".heegner.json").write_text(json.dumps({"oracle_budget": 11, "count_budget": 77}))
    monkeypatch.setenv("HEEGNER_ORACLE_BUDGET", "22")
    settings = HeegnerConfig.load()
    assert settings.oracle_budget == 22
    assert settings.count_budget == 77
    assert HeegnerConfig.load(cli_budget=33).oracle_budget == 33


def test_explicit_config_path(tmp_path):
    path = tmp_path / "custom.json"
    path.write_text(json.dumps({"precision_slack": 2, "verbose": True}))
    settings = HeegnerConfig.load(config_path=str(path))
    assert settings.precision_slack == 2
    assert settings.verbose is True


def test_bad_values_fall_back(isolated_home, monkeypatch):
    monkeypatch.setenv("HEEGNER_MAX_WORKERS", "many")
    monkeypatch.setenv("HEEGNER_COUNT_BUDGET", "0")
    settings = HeegnerConfig.load(cli_workers=0)
    assert settings.max_workers == 1
    assert settings.count_budget == config.ORACLE["count_budget"]


def test_verbose_from_env(monkeypatch):
    monkeypatch.setenv("HEEGNER_VERBOSE", "yes")
    assert HeegnerConfig.load().verbose is True


def test_create_sample_config(tmp_path):
    path = tmp_path / "sample.json"
    create_sample_config(str(path), env_dir=str(tmp_path))
    assert json.loads(path.read_text())["count_budget"] == config.ORACLE["count_budget"]
    assert (tmp_path / ".env").exists()


def test_budgets_and_slack_from_env(monkeypatch):
    monkeypatch.setenv("HEEGNER_ORACLE_BUDGET", "40000000")
    monkeypatch.setenv("HEEGNER_COUNT_BUDGET", "900")
    monkeypatch.setenv("HEEGNER_PRECISION_SLACK", "3")
    settings = HeegnerConfig.load()
    assert (settings.oracle_budget, settings.count_budget, settings.precision_slack) == (40_000_000, 900, 3)


def test_existence_budget_is_separate_from_count_budget():
    settings = HeegnerConfig()
    assert settings.oracle_budget == config.ORACLE["search_budget"]
    assert settings.oracle_budget >= 10 * settings.count_budget


def test_env_oracle_budget_reaches_oracle_verify(monkeypatch, capsys):
    import main_heegner
    from heegner.errors import OracleBudgetError

    seen = []

    def record(*args, budget=None, **kwargs):
        seen.append(budget)
        raise OracleBudgetError(f"lifting search exceeded {budget} nodes")

    monkeypatch.setenv("HEEGNER_ORACLE_BUDGET", "777")
    monkeypatch.setattr("heegner.padic_oracle.enumerate_optimal", record)
    code = main_heegner.main(["oracle-verify", "--p", "3", "--case", "cartan", "--max-m", "0", "--max-n", "1"])
    assert code == config.EXIT_CODES["undetermined"]
    assert seen == [777]


def test_sample_env_lists_every_setting(tmp_path):
    create_sample_config(str(tmp_path / "s.json"), env_dir=str(tmp_path))
    text = (tmp_path / ".env").read_text()
    for name in ("ORACLE_BUDGET", "COUNT_BUDGET", "PRECISION_SLACK", "MAX_WORKERS", "VERBOSE"):
        assert f"HEEGNER_{name}=" in text
    assert "HEEGNER_VERBOSE=false" in text
