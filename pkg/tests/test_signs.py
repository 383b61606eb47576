import pytest

from heegner.errors import InputError, SigmaError
from heegner.localdata import LocalRepType, RepKind, default_rep_type, steinberg, supercuspidal
from heegner.quadarith import LocalQuadExt, QuadOrder, SplittingType
from heegner.signs import (
    NEEDS_CHARACTER_VALUES,
    EpsilonFlags,
    SignValue,
    build_sigma,
    eta_minus_one,
    local_epsilon,
)

INERT, RAMIFIED, SPLIT = SplittingType.INERT, SplittingType.RAMIFIED, SplittingType.SPLIT


@pytest.mark.parametrize("d,p,eta", [(-3, 3, -1), (-4, 3, 1), (-20, 5, 1), (-4, 5, 1), (-3, 2, 1)])
def test_eta_minus_one(d, p, eta):
    assert eta_minus_one(QuadOrder(d), p) == eta


def test_sign_value_validation():
    assert SignValue.plus().label == "+"
    assert SignValue.undetermined("x").label == "?"
    with pytest.raises(InputError):
        SignValue(0)
    with pytest.raises(InputError):
        SignValue(None)


def test_split_primes_have_trivial_sign():
    assert local_epsilon(5, steinberg(5), SPLIT, 3).value == 1


def test_steinberg_signs():
    rep = steinberg(7)
    assert local_epsilon(7, rep, INERT, 0).value == -1
    assert local_epsilon(7, rep, INERT, 0, EpsilonFlags(steinberg_norm_relation=True)).value == -1
    assert local_epsilon(7, rep, INERT, 1).value == 1
    with pytest.raises(InputError):
        local_epsilon(7, rep, INERT, 0, EpsilonFlags(steinberg_norm_relation=False))
    with pytest.raises(InputError):
        local_epsilon(7, rep, INERT, 1, EpsilonFlags(steinberg_norm_relation=True))


def test_steinberg_at_ramified_prime_needs_character_values():
    sign = local_epsilon(3, steinberg(3), RAMIFIED, 0)
    assert not sign.determined
    assert NEEDS_CHARACTER_VALUES in sign.reason
    assert local_epsilon(3, steinberg(3), RAMIFIED, 0, EpsilonFlags(steinberg_norm_relation=True)).value == -1
    assert local_epsilon(3, steinberg(3), RAMIFIED, 0, EpsilonFlags(steinberg_norm_relation=False)).value == 1


def test_principal_series_signs():
    rep = LocalRepType(5, RepKind.PRINCIPAL_SERIES, 2)
    assert local_epsilon(5, rep, INERT, 0).value == 1
    assert not local_epsilon(5, rep, INERT, 1).determined


def test_ramified_induction_signs():
    rep = supercuspidal(3, LocalQuadExt.RAMIFIED_PRIME, 2)
    assert local_epsilon(3, rep, RAMIFIED, 3).value == 1
    assert local_epsilon(3, rep, RAMIFIED, 1).value == -1
    assert not local_epsilon(3, rep, RAMIFIED, 0).determined
    assert local_epsilon(3, rep, INERT, 1).value == -1
    assert local_epsilon(3, rep, INERT, 2).value == 1


def test_conductor_two_supercuspidal_signs():
    rep = default_rep_type(5, 2)
    assert local_epsilon(5, rep, INERT, 0).value == 1
    assert local_epsilon(5, rep, INERT, 2).value == 1
    assert local_epsilon(5, rep, RAMIFIED, 1).value == 1
    assert local_epsilon(3, supercuspidal(3, LocalQuadExt.UNRAMIFIED, 2), INERT, 1).value == 1
    assert not local_epsilon(5, rep, INERT, 1).determined


def test_twisted_conductor_flags_decide_the_sign():
    rep = supercuspidal(3, LocalQuadExt.RAMIFIED_PRIME, 1)
    assert not local_epsilon(3, rep, RAMIFIED, 0, k_class=LocalQuadExt.RAMIFIED_UNIT).determined
    flags = EpsilonFlags(twist_conductor=1)
    assert local_epsilon(3, rep, RAMIFIED, 0, flags, LocalQuadExt.RAMIFIED_UNIT).value == -1
    pair = EpsilonFlags(twist_conductor_pair=(1, 1))
    assert local_epsilon(3, rep, RAMIFIED, 0, pair, LocalQuadExt.RAMIFIED_PRIME).value == 1


def test_exceptional_supercuspidal_signs():
    rep = default_rep_type(2, 7)
    assert local_epsilon(2, rep, RAMIFIED, 4).value == 1
    assert local_epsilon(2, rep, RAMIFIED, 0).value == -1


def test_local_epsilon_rejects_mismatched_input():
    with pytest.raises(InputError):
        local_epsilon(5, steinberg(7), INERT, 0)
    with pytest.raises(InputError):
        local_epsilon(5, default_rep_type(5, 2), INERT, 0, EpsilonFlags(steinberg_norm_relation=True))


def test_sigma_for_conductor_99(curve_99, gaussian):
    sigma = build_sigma(curve_99.N, curve_99.reps, gaussian, 1)
    assert sigma.determined
    assert sigma.finite == [11]
    assert sigma.size == 2
    assert sigma.global_sign == 1
    assert sigma.entry(3).in_sigma is False


def test_sigma_override_cannot_contradict_a_determined_sign(curve_99, gaussian):
    with pytest.raises(SigmaError, match="3 cannot lie in Sigma"):
        build_sigma(curve_99.N, curve_99.reps, gaussian, 1, {3: True, 11: True})


def test_sigma_override_fills_undetermined_prime(curve_99, gaussian):
    open_sigma = build_sigma(curve_99.N, curve_99.reps, gaussian, 3)
    assert open_sigma.undetermined_primes == [3]
    assert open_sigma.size is None
    assert open_sigma.to_dict()["finite"] is None

    sigma = build_sigma(curve_99.N, curve_99.reps, gaussian, 3, {3: True})
    assert sigma.finite == [3, 11]
    assert sigma.size == 3
    assert sigma.global_sign == -1
    assert sigma.delta == 33
    assert sigma.entry(3).source == "override"


def test_sigma_overrides_are_structurally_checked(curve_99, gaussian):
    with pytest.raises(SigmaError, match="does not divide N"):
        build_sigma(curve_99.N, curve_99.reps, gaussian, 3, {3: True, 5: True})
    build_sigma(curve_99.N, curve_99.reps, gaussian, 3, {3: True, 5: False})
    with pytest.raises(SigmaError, match="splits in K"):
        build_sigma({5: 1}, {}, gaussian, 1, {5: True})


def test_sigma_is_stable_under_its_own_overrides(curve_99, gaussian):
    first = build_sigma(curve_99.N, curve_99.reps, gaussian, 3, {3: True})
    again = build_sigma(curve_99.N, curve_99.reps, gaussian, 3, first.overrides())
    assert again.finite == first.finite
    assert again.to_dict()["global_sign"] == first.to_dict()["global_sign"]
