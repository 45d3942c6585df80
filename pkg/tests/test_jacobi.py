import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ncqm_brackets.core.exceptions import ConsistencyError
from ncqm_brackets.core.fields import Gauge, GaugeField, GaugeSolver, NCProfile
from ncqm_brackets.core.jacobi import JacobiChecker, StructureConstants
from ncqm_brackets.core.symplectic import BivectorField4, DiracBrackets, PhaseIndexing
from ncqm_brackets.core.taylor_jets import Jet2, ScalarField, coordinate_jets

from .conftest import GRID_21, POINT


def quadratic_entry(weights: np.ndarray) -> ScalarField:
    """a + b x + c y + e x² + f xy + g y²."""

    def entry(x: float, y: float, order: int) -> Jet2:
        xj, yj = coordinate_jets(x, y, order)
        monomials = (Jet2.constant(1.0, (x, y), order), xj, yj, xj * xj, xj * yj, yj * yj)
        total = Jet2.constant(0.0, (x, y), order)
        for monomial, weight in zip(monomials, weights, strict=True):
            total = total + monomial * float(weight)
        return total

    return entry


def test_constant_bracket_is_jacobi() -> None:
    bracket = DiracBrackets.constant_theta(0.3)
    for residual in JacobiChecker.residuals(bracket, POINT):
        assert residual.value == 0.0


def test_dirac_bracket_at_probe(phi_field: GaugeField) -> None:
    bracket = DiracBrackets.omega0_by_inversion(DiracBrackets.build_constraints(phi_field, 0.1))
    assert abs(JacobiChecker.jacobiator(bracket, (1, 2, 3), POINT)) <= 1e-10


@pytest.mark.parametrize("gauge", [Gauge.PHI, Gauge.CHI])
@pytest.mark.parametrize("theta", [0.05, 0.1, 0.5])
@pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5])
def test_dirac_bracket_on_full_grid(gauge: Gauge, theta: float, alpha: float) -> None:
    field = GaugeSolver.solve(NCProfile(theta=theta, alpha=alpha), gauge)
    bracket = DiracBrackets.omega0_by_inversion(DiracBrackets.build_constraints(field, theta))
    worst = JacobiChecker.grid_maximum(bracket, GRID_21, GRID_21)
    assert worst.value <= 1e-9
    assert worst.indices in PhaseIndexing.INDEPENDENT_TRIPLES


@pytest.mark.parametrize("gauge", [Gauge.PHI, Gauge.CHI])
@pytest.mark.parametrize(
    ("theta", "f_poly"),
    [(0.05, (0.0, 1.0)), (0.5, (0.0, 1.0)), (0.1, (0.0, 1.0, 0.5)), (0.1, (0.0, -0.2, 0.05))],
)
def test_dirac_bracket_parameter_sweep(gauge: Gauge, theta: float, f_poly: tuple[float, ...]) -> None:
    profile = NCProfile(theta=theta, alpha=0.5, f_poly=f_poly)
    field = GaugeSolver.solve(profile, gauge)
    grid = np.linspace(-3.0, 3.0, 7)
    for bracket in (
        DiracBrackets.omega0_by_inversion(DiracBrackets.build_constraints(field, theta)),
        DiracBrackets.omega0_closed_form(field, theta),
    ):
        assert JacobiChecker.grid_maximum(bracket, grid, grid).value <= 1e-9


def test_non_closed_bivector_fails() -> None:
    # ω^{12} = x with canonical momenta, read off on the triple (p_x, x, y)
    one = lambda x, y, order: Jet2.constant(1.0, (x, y), order)  # noqa: E731
    position = lambda x, y, order: coordinate_jets(x, y, order)[0]  # noqa: E731
    bracket = BivectorField4.from_entries({(1, 2): position, (1, 3): one, (2, 4): one})
    assert abs(JacobiChecker.jacobiator(bracket, (3, 1, 2), POINT)) == pytest.approx(1.0, abs=1e-15)


def test_grid_maximum_reports_location() -> None:
    one = lambda x, y, order: Jet2.constant(1.0, (x, y), order)  # noqa: E731
    # ω^{12} = x² so the violation 2|x| peaks at the grid edge
    square = lambda x, y, order: coordinate_jets(x, y, order)[0] ** 2  # noqa: E731
    bracket = BivectorField4.from_entries({(1, 2): square, (1, 3): one, (2, 4): one})
    worst = JacobiChecker.grid_maximum(bracket, [-1.0, 0.0, 2.0], [0.0, 1.0])
    assert worst.value == pytest.approx(4.0)
    assert worst.point == (2.0, 0.0)


def test_linear_counterexample_without_constants() -> None:
    violations = JacobiChecker.linear_counterexample(StructureConstants(np.zeros((2, 2, 2))))
    assert np.all(violations == 0.0)


def test_linear_counterexample_single_constant() -> None:
    violations = JacobiChecker.linear_counterexample(StructureConstants.single(1, 1.0))
    assert abs(violations[0, 0, 1]) == pytest.approx(1.0, abs=1e-12)
    assert violations[0, 0, 1] == pytest.approx(-1.0)
    assert violations[0, 1, 0] == pytest.approx(1.0)
    assert np.all(violations[1] == 0.0)


def test_linear_counterexample_scales_linearly() -> None:
    unit = JacobiChecker.linear_counterexample(StructureConstants.single(2, 1.0))
    scaled = JacobiChecker.linear_counterexample(StructureConstants.single(2, 2.5))
    assert scaled[1, 0, 1] / unit[1, 0, 1] == pytest.approx(2.5, abs=1e-12)


def test_linear_counterexample_is_position_independent() -> None:
    constants = StructureConstants.single(1, -0.75)
    first = JacobiChecker.linear_counterexample(constants, point=(0.0, 0.0))
    second = JacobiChecker.linear_counterexample(constants, point=(2.5, -1.0))
    assert np.array_equal(first, second)


def test_structure_constants_validation() -> None:
    with pytest.raises(ValueError, match="shape"):
        StructureConstants(np.zeros((2, 2)))
    table = np.zeros((2, 2, 2))
    table[0, 0, 1] = 1.0
    with pytest.raises(ValueError, match="antisymmetric"):
        StructureConstants(table)


def test_quadratic_counterexample() -> None:
    constants = np.zeros((2, 2, 2, 2))
    constants[0, 1, 0, 0] = 1.0
    constants[1, 0, 0, 0] = -1.0
    violations = JacobiChecker.quadratic_counterexample(constants, (0.5, -2.0))
    assert violations[0, 0, 1] == pytest.approx(-1.0, abs=1e-12)
    assert violations[0, 1, 0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(violations[1] == 0.0)


def test_quadratic_counterexample_mixed_term() -> None:
    constants = np.zeros((2, 2, 2, 2))
    constants[0, 1, 0, 1] = 0.5
    constants[1, 0, 0, 1] = -0.5
    # ω^{12} = 0.5 x y, so ∂_x ω^{12} = 0.5 y and ∂_y ω^{12} = 0.5 x
    violations = JacobiChecker.quadratic_counterexample(constants, (3.0, -2.0))
    assert violations[0, 0, 1] == pytest.approx(1.0, abs=1e-12)
    assert violations[1, 0, 1] == pytest.approx(-1.5, abs=1e-12)


def test_quadratic_counterexample_validation() -> None:
    with pytest.raises(ValueError, match="antisymmetry"):
        JacobiChecker.quadratic_counterexample(np.ones((2, 2, 2, 2)), POINT)


def test_counterexample_mismatch_raises(monkeypatch: pytest.MonkeyPatch) -> None:
    silent = staticmethod(lambda omega12, point: np.zeros((2, 2, 2)))
    monkeypatch.setattr(JacobiChecker, "_momentum_violations", silent)
    with pytest.raises(ConsistencyError):
        JacobiChecker.linear_counterexample(StructureConstants.single(1, 1.0))


@settings(max_examples=30, deadline=None)
@given(
    weights=arrays(np.float64, (6, 6), elements=st.floats(-1.0, 1.0)),
    point=st.tuples(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0)),
)
def test_jacobiator_is_totally_antisymmetric(weights: np.ndarray, point: tuple[float, float]) -> None:
    bracket = BivectorField4.from_entries(
        {pair: quadratic_entry(row) for pair, row in zip(PhaseIndexing.INDEPENDENT_PAIRS, weights, strict=True)}
    )
    for triple in PhaseIndexing.INDEPENDENT_TRIPLES:
        reference = JacobiChecker.jacobiator(bracket, triple, point)
        for permutation in itertools.permutations(triple):
            value = JacobiChecker.jacobiator(bracket, permutation, point)
            sign = np.linalg.det(np.eye(3)[[sorted(triple).index(i) for i in permutation]])
            assert value == pytest.approx(sign * reference, abs=1e-13)
