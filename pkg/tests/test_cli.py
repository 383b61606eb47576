import json

import pytest

import main_heegner
from heegner.errors import AssumptionViolation, HeegnerError, OracleBudgetError, SigmaError
from heegner.schema import AnalyzeRequest


def run(capsys, *argv):
    code = main_heegner.main(list(argv))
    out = capsys.readouterr().out
    lines = [json.loads(line) for line in out.splitlines() if line.strip()]
    return code, lines


def test_analyze_exists(capsys):
    code, [report] = run(capsys, "analyze", "--N", "99", "--disc", "-4", "--c", "3", "--sigma", "3,11")
    assert code == 0
    assert report["status"] == "exists"
    assert report["level"] == 99
    assert report["request"]["sigma"] == [3, 11]


def test_analyze_rejects_contradictory_sigma(capsys):
    code, [error] = run(capsys, "analyze", "--N", "99", "--disc", "-4", "--c", "1", "--sigma", "3,11")
    assert code == 1
    assert error["kind"] == "SigmaError"


def test_analyze_undetermined(capsys):
    code, [report] = run(capsys, "analyze", "--N", "99", "--disc", "-4", "--c", "3")
    assert code == 3
    assert report["exists"] is None


def test_analyze_from_request_file(capsys, tmp_path):
    path = tmp_path / "request.json"
    path.write_text(json.dumps({"N": [[3, 2], [11, 1]], "disc": -4, "c": 3,
                                "sigma_overrides": {"3": True}}))
    code, [report] = run(capsys, "analyze", "--request", str(path))
    assert code == 0
    assert report["c_prime"] == 3


def test_analyze_needs_inputs(capsys):
    code, [error] = run(capsys, "analyze", "--N", "99")
    assert code == 1
    assert error["kind"] == "InputError"


def test_embed_verdicts(capsys):
    code, [verdict] = run(capsys, "embed", "--case", "division", "--p", "5", "--m", "1", "--n", "3",
                          "--K-class", "unram", "--L-class", "unram")
    assert code == 0
    assert verdict["rule_id"] == "div-1a"

    code, [verdict] = run(capsys, "embed", "--case", "cartan", "--p", "7", "--m", "1", "--n", "2")
    assert code == 1
    assert verdict["exists"] is False

    code, [verdict] = run(capsys, "embed", "--case", "eichler", "--p", "3", "--m", "0", "--n", "1",
                          "--K-class", "inert")
    assert code == 1
    assert verdict["count"] == 0


def test_embed_rejects_unknown_class(capsys):
    code, [error] = run(capsys, "embed", "--case", "division", "--p", "3", "--m", "0", "--n", "1",
                        "--K-class", "sqrt3", "--L-class", "unram")
    assert code == 1
    assert "error" in error


def test_oracle_verify_prime_budget(capsys):
    code, [error] = run(capsys, "oracle-verify", "--p", "13", "--case", "eichler")
    assert code == 1
    assert "prime exceeds oracle budget" in error["error"]


def test_oracle_verify_small_grid(capsys):
    code, [report] = run(capsys, "oracle-verify", "--p", "3", "--case", "eichler",
                         "--max-m", "1", "--max-n", "1")
    assert code == 0
    assert report["all_match"] is True
    assert report["total"] == 3 * 2 * 2


def test_oracle_verify_skipped_cells_are_undetermined(capsys, monkeypatch):
    def exhausted(*args, **kwargs):
        raise OracleBudgetError("lifting search exceeded 5 nodes")

    monkeypatch.setattr("heegner.padic_oracle.enumerate_optimal", exhausted)
    code, [report] = run(capsys, "oracle-verify", "--p", "3", "--case", "eichler",
                         "--max-m", "0", "--max-n", "1")
    assert code == 3
    assert report["all_match"] is False
    assert report["skipped"] == report["total"]


def test_oracle_verify_budget_reaches_the_search(capsys, monkeypatch):
    seen = []

    def record(*args, budget=None, **kwargs):
        seen.append(budget)
        raise OracleBudgetError(f"lifting search exceeded {budget} nodes")

    monkeypatch.setattr("heegner.padic_oracle.enumerate_optimal", record)
    code, _ = run(capsys, "--oracle-budget", "1234", "oracle-verify", "--p", "3", "--case", "cartan",
                  "--max-m", "0", "--max-n", "1")
    assert code == 3
    assert seen == [1234]


@pytest.mark.parametrize("error,code", [
    (HeegnerError("no conductor exponent up to 16 works at the Eichler prime 3"), 3),
    (AssumptionViolation("Eichler prime 3: below the embedding bound"), 3),
    (SigmaError("Sigma is undetermined at [3]"), 1),
])
def test_analyze_reports_engine_errors(capsys, monkeypatch, error, code):
    def fail(self, verbose=False):
        raise error

    monkeypatch.setattr(AnalyzeRequest, "run", fail)
    status, [report] = run(capsys, "analyze", "--N", "99", "--disc", "-4", "--c", "3", "--mode", "abelian")
    assert status == code
    assert report["kind"] == type(error).__name__
    assert report["error"] == str(error)


def test_batch(capsys, tmp_path):
    table = tmp_path / "curves.csv"
    table.write_text('label,N,reps\na,77,\nb,21,\nc,189,"3:sc:ram,2"\n')
    code, lines = run(capsys, "batch", "--table", str(table), "--disc", "-4", "--c", "1")
    assert code == 0
    assert [line["label"] for line in lines] == ["a", "b", "c"]
    assert all(line["report"]["status"] == "exists" for line in lines)
    assert lines[2]["report"]["request"]["reps"] == ["3:sc:ramp,2"]


def test_batch_counts_malformed_rows(capsys, tmp_path):
    table = tmp_path / "curves.csv"
    table.write_text("label,N\na,77\nbad,0\nsq,99\n")
    code, lines = run(capsys, "batch", "--table", str(table), "--disc", "-4")
    assert code == 1
    assert [line["label"] for line in lines] == ["a", "sq"]
    assert lines[1]["kind"] == "SigmaError"


def test_batch_requires_columns(capsys, tmp_path):
    table = tmp_path / "curves.csv"
    table.write_text("name,conductor\na,77\n")
    code, [error] = run(capsys, "batch", "--table", str(table), "--disc", "-4")
    assert code == 1
    assert "label" in error["error"] or "N" in error["error"]


def test_sample_config(capsys, tmp_path):
    path = tmp_path / "conf" / "heegner.json"
    code = main_heegner.main(["sample-config", "--path", str(path), "--env-dir", str(tmp_path)])
    assert code == 0
    assert json.loads(path.read_text())["max_workers"] >= 1
    assert "HEEGNER_ORACLE_BUDGET" in (tmp_path / ".env").read_text()


def test_unknown_command_exits():
    with pytest.raises(SystemExit):
        main_heegner.main(["frobnicate"])
