import pytest

from heegner.engine import Mode
from heegner.errors import InputError
from heegner.localdata import RepKind
from heegner.quadarith import LocalQuadExt
from heegner.schema import AnalyzeRequest, exit_code_for, format_rep, parse_factored, parse_rep


def test_parse_factored():
    assert parse_factored(99) == {3: 2, 11: 1}
    assert parse_factored("891") == {3: 4, 11: 1}
    assert parse_factored([[3, 2], [11, 1]]) == {3: 2, 11: 1}


@pytest.mark.parametrize("value", [1, "abc", [[4, 1]], [[3, 0]], [[3, 1], [3, 2]], [], 10**13, [3, 1]])
def test_parse_factored_rejects(value):
    with pytest.raises(InputError):
        parse_factored(value)


def test_parse_rep_forms():
    assert parse_rep("11:st") == (11, parse_rep("st", 11)[1])
    p, rep = parse_rep("2:st:2")
    assert (p, rep.n, rep.twist_conductor) == (2, 4, 2)
    p, rep = parse_rep("3:sc:ram,2")
    assert rep.inducing is LocalQuadExt.RAMIFIED_PRIME and rep.n == 3
    p, rep = parse_rep("sc:exceptional", 2)
    assert rep.exceptional
    p, rep = parse_rep("5:ps:2")
    assert rep.kind is RepKind.PRINCIPAL_SERIES and rep.n == 2


@pytest.mark.parametrize("text", ["st", "3:sc:ramp", "3:xx", "3:st:x", "3:st:1:2", "2:sc:ramp,1", "3:sc:sqrt9,1"])
def test_parse_rep_rejects(text):
    with pytest.raises(InputError):
        parse_rep(text)


def test_format_rep():
    assert format_rep(parse_rep("3:sc:ram,2")[1]) == "3:sc:ramp,2"
    assert format_rep(parse_rep("7:st")[1]) == "7:st:0"
    assert format_rep(parse_rep("2:sc:exceptional")[1]) == "2:sc:exceptional"


def test_request_defaults_and_echo():
    request = AnalyzeRequest.from_dict({"N": 99, "disc": -4, "c": 3, "sigma": [11, 3]})
    assert request.mode is Mode.ELLIPTIC
    assert request.sigma == [3, 11]
    echo = request.to_dict()
    assert echo["N"] == [[3, 2], [11, 1]]
    assert echo["flags"] == {"primitive": True, "two_minimal": True}
    assert AnalyzeRequest.from_dict(echo) == request


def test_principal_series_override_takes_exponent_from_n():
    request = AnalyzeRequest.from_dict({"N": 25 * 7, "disc": -4, "reps": ["5:ps"]})
    assert request.reps[5].n == 2
    assert request.to_dict()["reps"] == ["5:ps:2"]


def test_reps_may_be_keyed_by_prime():
    request = AnalyzeRequest.from_dict({"N": 189, "disc": -4, "reps": {"3": "sc:ram,2"}})
    assert request.reps[3].inducing is LocalQuadExt.RAMIFIED_PRIME


@pytest.mark.parametrize("data", [
    {"N": 99},
    {"N": 99, "disc": -4, "colour": "red"},
    {"N": 99, "disc": -4, "schema_version": "2"},
    {"N": 99, "disc": -4, "mode": "modular"},
    {"N": 99, "disc": "x"},
    {"N": 99, "disc": -4, "flags": {"primitive": True, "cm": False}},
    {"N": 99, "disc": -4, "epsilon_flags": {"5": {}}},
    {"N": 99, "disc": -4, "epsilon_flags": {"3": {"twist": 1}}},
])
def test_request_rejects(data):
    with pytest.raises(InputError):
        AnalyzeRequest.from_dict(data)


def test_sigma_list_fixes_membership_and_overrides_win():
    request = AnalyzeRequest.from_dict({
        "N": 99, "disc": -4, "c": 3, "sigma": [11], "sigma_overrides": {"3": True},
    })
    assert request.overrides() == {3: True, 11: True}
    assert AnalyzeRequest.from_dict({"N": 99, "disc": -4}).overrides() == {}


def test_epsilon_flags_reach_the_sign_computation():
    request = AnalyzeRequest.from_dict({
        "N": 99, "disc": -3, "c": 1,
        "epsilon_flags": {"11": {"steinberg_norm_relation": True}},
    })
    assert request.curve_input().epsilon_flags[11].steinberg_norm_relation is True
    assert request.to_dict()["epsilon_flags"]["11"]["steinberg_norm_relation"] is True


def test_run_attaches_the_request_and_maps_exit_codes():
    report = AnalyzeRequest.from_dict({"N": 99, "disc": -4, "c": 3, "sigma": [3, 11]}).run()
    assert report.to_dict()["request"]["sigma"] == [3, 11]
    assert exit_code_for(report) == 0
    undetermined = AnalyzeRequest.from_dict({"N": 99, "disc": -4, "c": 3}).run()
    assert exit_code_for(undetermined) == 3
