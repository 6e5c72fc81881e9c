import pytest
from hypothesis import given, strategies as st

from crackdiff.errors import InconsistentMode, OutOfRange, ProfileMassMismatch
from crackdiff.params import make_profile, validate_params


def test_small_alpha_constant_mode():
    p = validate_params(0.1, 0.0, 0.2)
    assert (p.alpha, p.beta, p.epsilon, p.wall_flux_mode) == (0.1, 0.0, 0.2, "constant")
    assert p.wall_flux_density == pytest.approx(0.05)
    assert p.bottom_flux == 0.0


def test_beta_without_crack_rejected():
    with pytest.raises(OutOfRange):
        validate_params(0.0, 0.1, 1.0)


def test_linear_profile_integrates_to_half_alpha():
    p = validate_params(0.6, 0.0, 0.1, "profile", "linear")
    assert p.profile.integral() == pytest.approx(0.3, abs=1e-14)
    assert p.bottom_flux == 0.0


@pytest.mark.parametrize("alpha,beta,eps", [(-0.1, 0, 1), (1.0, 0, 1), (0.5, 0.5, 1), (0.5, -0.1, 1), (0.5, 0, 0), (0.5, 0, -1)])
def test_out_of_range(alpha, beta, eps):
    with pytest.raises(OutOfRange):
        validate_params(alpha, beta, eps)


def test_profile_needs_zero_beta():
    with pytest.raises(InconsistentMode):
        validate_params(0.4, 0.1, 1.0, "profile")


def test_profile_mass_mismatch():
    with pytest.raises(ProfileMassMismatch):
        validate_params(0.4, 0.0, 1.0, "profile", "tabulated", {"nodes": [-1, 0], "values": [1.0, 0.0]})


def test_tabulated_profile_accepted():
    # triangle with area alpha/2 = 0.2
    p = validate_params(0.4, 0.0, 1.0, "profile", "tabulated", {"nodes": [-1, -0.5, 0], "values": [0.0, 0.4, 0.0]})
    assert p.profile(-0.5) == pytest.approx(0.4)
    assert p.as_dict()["profile"]["profile_id"] == "tabulated"


def test_unknown_profile():
    with pytest.raises(InconsistentMode):
        make_profile("cubic", 0.1)


@given(st.one_of(st.just(0.0), st.floats(1e-6, 0.99)), st.floats(0.0, 1.0), st.floats(1e-3, 10.0))
def test_accepted_params_satisfy_invariants(alpha, frac, eps):
    beta = 0.0 if alpha == 0.0 else frac * alpha * 0.999
    p = validate_params(alpha, beta, eps)
    assert 0.0 <= p.alpha < 1.0 and 0.0 <= p.beta and (p.beta < p.alpha or p.beta == 0.0)
    if alpha > 0:
        # total influx per unit y-width is one
        total = (1 - alpha) + 2 * p.wall_flux_density + alpha * p.bottom_flux
        assert total == pytest.approx(1.0, abs=1e-14)
