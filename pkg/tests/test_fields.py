import logging

import numpy as np
import pytest

from ncqm_brackets.core.exceptions import ConfigError, SingularProfileError
from ncqm_brackets.core.fields import Gauge, GaugeField, GaugeSolver, NCProfile, PolynomialSource
from ncqm_brackets.core.taylor_jets import coordinate_jets

from .conftest import GRID_21, POINT, grid_points

# Profiles positive on [-3, 3]² for θ = 0.1, α = 0.5
ROUNDTRIP_PROFILES = [(0.0, 1.0), (0.0, 1.0, 0.5), (0.0, -0.2, 0.05)]
DERIVATIVE_ORDERS = ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


def test_density_at_probe(example_profile: NCProfile) -> None:
    d = GaugeSolver.d_from_profile(example_profile)(*POINT, 2)
    assert d.value == pytest.approx(0.8, abs=1e-15)
    assert d.partial(1, 0) == pytest.approx(-0.064, abs=1e-15)
    assert d.partial(0, 1) == pytest.approx(-0.128, abs=1e-15)


@pytest.mark.parametrize(
    ("profile", "expected"),
    [
        (NCProfile(theta=0.1, alpha=0.0, f_poly=(0.0, 1.0)), 1.0),
        (NCProfile(theta=0.0, alpha=0.5, f_poly=(0.0, 1.0)), 1.0),
        (NCProfile(theta=0.1, alpha=0.0, f_poly=(2.0, 1.0)), 1.0 / 1.2),
    ],
)
def test_density_degenerate_profiles(profile: NCProfile, expected: float) -> None:
    assert GaugeSolver.d_from_profile(profile)(*POINT, 0).value == pytest.approx(expected, abs=1e-15)


def test_phi_gauge_at_probe(phi_field: GaugeField) -> None:
    bx, by = phi_field(*POINT, 1)
    assert bx.value == pytest.approx(-1.25, abs=1e-15)
    assert by.value == pytest.approx(0.625, abs=1e-15)


def test_phi_gauge_is_regular_at_origin(phi_field: GaugeField) -> None:
    bx, by = phi_field(0.0, 0.0, 3)
    assert bx.value == 0.0
    assert by.value == 0.0
    for jet in (bx, by):
        assert np.all(np.isfinite(jet.coeffs))


def test_chi_gauge_at_probe(chi_field: GaugeField) -> None:
    bx, by = chi_field(*POINT, 1)
    assert bx.value == pytest.approx(-7.0 / 6.0, abs=1e-14)
    assert by.value == bx.value


def test_chi_gauge_vanishes_on_the_diagonal(chi_field: GaugeField) -> None:
    for t in (-2.0, 0.5, 3.0):
        assert chi_field(t, t, 0)[0].value == pytest.approx(0.0, abs=1e-14)


def test_chi_gauge_solves_its_equation(chi_field: GaugeField, rng: np.random.Generator) -> None:
    source = PolynomialSource.from_profile(NCProfile(theta=0.1, alpha=0.5, f_poly=(0.0, 1.0)))
    for x, y in rng.uniform(-3.0, 3.0, size=(20, 2)):
        chi, _ = chi_field(x, y, 1)
        assert chi.partial(1, 0) - chi.partial(0, 1) == pytest.approx(source.value(x, y), abs=1e-12)


def test_chi_gauge_momentum_bracket_density_vanishes(chi_field: GaugeField, rng: np.random.Generator) -> None:
    for x, y in rng.uniform(-3.0, 3.0, size=(20, 2)):
        bx, by = chi_field(x, y, 1)
        determinant = bx.partial(1, 0) * by.partial(0, 1) - by.partial(1, 0) * bx.partial(0, 1)
        assert determinant == 0.0


@pytest.mark.parametrize("gauge", [Gauge.PHI, Gauge.CHI])
def test_zero_alpha_gives_zero_field(gauge: Gauge) -> None:
    field = GaugeSolver.solve(NCProfile(theta=0.1, alpha=0.0), gauge)
    for x, y in grid_points(np.linspace(-3.0, 3.0, 5)):
        bx, by = field(x, y, 2)
        assert np.all(bx.coeffs == 0.0)
        assert np.all(by.coeffs == 0.0)


@pytest.mark.parametrize("gauge", [Gauge.PHI, Gauge.CHI])
def test_density_from_both_gauges_at_probe(example_profile: NCProfile, gauge: Gauge) -> None:
    field = GaugeSolver.solve(example_profile, gauge)
    assert GaugeSolver.d_from_B(field, example_profile.theta)(*POINT, 0).value == pytest.approx(0.8, abs=1e-14)


def test_density_from_zero_field_is_one() -> None:
    d = GaugeSolver.d_from_B(GaugeField.zero(Gauge.PHI), 0.1)(*POINT, 2)
    assert d.value == 1.0
    assert d.gradient() == (0.0, 0.0)


@pytest.mark.parametrize("gauge", [Gauge.PHI, Gauge.CHI])
@pytest.mark.parametrize("f_poly", ROUNDTRIP_PROFILES)
def test_roundtrip_recovers_profile(gauge: Gauge, f_poly: tuple[float, ...]) -> None:
    profile = NCProfile(theta=0.1, alpha=0.5, f_poly=f_poly)
    prescribed = GaugeSolver.d_from_profile(profile)
    recovered = GaugeSolver.d_from_B(GaugeSolver.solve(profile, gauge), profile.theta)
    for x, y in grid_points(GRID_21):
        expected, actual = prescribed(x, y, 2), recovered(x, y, 2)
        assert actual.value == pytest.approx(expected.value, abs=1e-10)
        for a, b in DERIVATIVE_ORDERS:
            assert actual.partial(a, b) == pytest.approx(expected.partial(a, b), abs=1e-8)


def test_density_is_gauge_independent(example_profile: NCProfile) -> None:
    phi = GaugeSolver.d_from_B(GaugeSolver.solve_phi_gauge(example_profile), example_profile.theta)
    chi = GaugeSolver.d_from_B(GaugeSolver.solve_chi_gauge(example_profile), example_profile.theta)
    for x, y in grid_points(np.linspace(-3.0, 3.0, 7)):
        assert phi(x, y, 0).value == pytest.approx(chi(x, y, 0).value, abs=1e-12)


def test_polynomial_source_roundtrip(rng: np.random.Generator) -> None:
    coeffs = np.zeros((4, 4))
    coeffs[1, 1] = 1.0
    coeffs[3, 0] = 0.3
    coeffs[0, 2] = -0.2
    source = PolynomialSource(coeffs)
    assert source.degree == 3
    field = GaugeSolver.solve_chi_gauge_for_source(source)
    expected = GaugeSolver.d_from_source(source, 0.05)
    recovered = GaugeSolver.d_from_B(field, 0.05)
    for x, y in rng.uniform(-1.5, 1.5, size=(25, 2)):
        assert recovered(x, y, 1).value == pytest.approx(expected(x, y, 1).value, abs=1e-10)
        chi, _ = field(x, y, 1)
        assert chi.partial(1, 0) - chi.partial(0, 1) == pytest.approx(source.value(x, y), abs=1e-12)


def test_polynomial_source_evaluates_on_jets() -> None:
    source = PolynomialSource(np.array([[1.0, 2.0], [3.0, 4.0]]))
    xj, yj = coordinate_jets(0.5, -1.0, 1)
    jet = source(xj, yj)
    assert jet.value == pytest.approx(source.value(0.5, -1.0))
    # ∂_x (1 + 2y + 3x + 4xy) = 3 + 4y
    assert jet.partial(1, 0) == pytest.approx(-1.0)


def test_source_from_profile_drops_constant_term() -> None:
    profile = NCProfile(theta=0.1, alpha=0.5, f_poly=(2.0, 1.0, 0.5))
    source = PolynomialSource.from_profile(profile)
    x, y = 0.7, -1.3
    u = 0.5 * (x * x + y * y)
    assert source.value(x, y) == pytest.approx(u + 0.5 * u * u, abs=1e-14)
    assert source.value(0.0, 0.0) == 0.0


def test_chi_gauge_warns_about_constant_term(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.WARNING, logger="ncqm_brackets.core.fields"):
        GaugeSolver.solve_chi_gauge(NCProfile(theta=0.1, alpha=0.5, f_poly=(1.0, 1.0)))
    assert "f(0)" in caplog.text


def test_validate_on_grid_names_first_failing_node() -> None:
    profile = NCProfile(theta=-0.5, alpha=0.5, f_poly=(0.0, 1.0))
    with pytest.raises(SingularProfileError) as info:
        profile.validate_on_grid(GRID_21, GRID_21)
    assert info.value.point == (-3.0, -3.0)


def test_validate_on_grid_accepts_positive_profile(example_profile: NCProfile) -> None:
    example_profile.validate_on_grid(GRID_21, GRID_21)


def test_density_rejects_non_positive_denominator() -> None:
    density = GaugeSolver.d_from_profile(NCProfile(theta=-0.5, alpha=0.5))
    with pytest.raises(SingularProfileError):
        density(2.0, 0.0, 0)


@pytest.mark.parametrize(
    ("kwargs", "field_path"),
    [
        ({"theta": 0.1, "alpha": -1.0}, "profile.alpha"),
        ({"theta": 0.1, "alpha": 0.5, "f_poly": ()}, "profile.f_poly"),
        ({"theta": float("nan"), "alpha": 0.5}, "profile"),
    ],
)
def test_profile_validation(kwargs: dict, field_path: str) -> None:
    with pytest.raises(ConfigError) as info:
        NCProfile(**kwargs)
    assert info.value.field_path == field_path


def test_profile_dict_form(example_profile: NCProfile) -> None:
    assert NCProfile.from_dict(example_profile.to_dict()) == example_profile
    with pytest.raises(ConfigError) as info:
        NCProfile.from_dict({"alpha": 0.5})  # type: ignore[typeddict-item]
    assert info.value.field_path == "profile.theta"


def test_profile_trims_trailing_zeros() -> None:
    profile = NCProfile(theta=0.1, alpha=0.5, f_poly=(0.0, 1.0, 0.0))
    assert profile.coefficients == (0.0, 1.0)
    assert profile.is_linear_example


def test_gauge_names() -> None:
    assert Gauge.from_name("phi") is Gauge.PHI
    assert Gauge.from_name(" CHI ") is Gauge.CHI
    with pytest.raises(ConfigError) as info:
        Gauge.from_name("coulomb")
    assert info.value.field_path == "profile.gauge"
