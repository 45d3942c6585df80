"""
Constraint currents, the constraint two-form Ω and the classical Dirac bivector ω₀ = Ω⁻¹.

Phase coordinates are ξ^μ = (x, y, p_x, p_y) with 1-based μ in the public API. Every field here depends on
(x, y) only; momentum derivatives of bivector entries vanish identically.
"""

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .exceptions import ConsistencyError, SingularStructureError, UnsupportedProfileError
from .fields import Gauge, GaugeField, NCProfile, structure_density
from .taylor_jets import FloatArray, Jet2, ScalarField, coordinate_jets

logger = logging.getLogger(__name__)

Pair = tuple[int, int]
# Evaluates the six independent entries (μ < ν) at a point and order
BivectorEvaluator = Callable[[float, float, int], dict[Pair, Jet2]]


class PhaseIndexing:
    """Index conventions shared by the whole library."""

    COORDINATES: ClassVar[tuple[str, ...]] = ("x", "y", "px", "py")
    EPSILON: ClassVar[FloatArray] = np.array([[0.0, 1.0], [-1.0, 0.0]])
    INDEPENDENT_PAIRS: ClassVar[tuple[Pair, ...]] = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))
    INDEPENDENT_TRIPLES: ClassVar[tuple[tuple[int, int, int], ...]] = ((1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4))

    @staticmethod
    def column_name(pair: Pair) -> str:
        """Return the table column of an entry, e.g. `omega13`."""
        return f"omega{pair[0]}{pair[1]}"


@dataclass(frozen=True)
class BivectorDerivatives:
    """
    Values and position derivatives of a bivector at one point, 0-based indices.

    `values[m, n]` = ω^{mn}, `first[s, m, n]` = ∂_s ω^{mn}, `second[s, t, m, n]` = ∂_s ∂_t ω^{mn}. Slots for
    momentum derivatives (s or t in {2, 3}) are zero.
    """

    values: FloatArray
    first: FloatArray
    second: FloatArray


@dataclass(frozen=True)
class BivectorField4:
    """An antisymmetric 4x4 matrix-valued field over (x, y)."""

    entries_at: BivectorEvaluator

    def jets(self, x: float, y: float, order: int) -> dict[Pair, Jet2]:
        """Return the jets of the six independent entries."""
        return self.entries_at(float(x), float(y), order)

    def component(self, mu: int, nu: int) -> ScalarField:
        """
        Return ω^{μν} as a scalar field, using antisymmetry for μ > ν.

        Args:
            mu (int): Row index, 1..4.
            nu (int): Column index, 1..4.

        Returns:
            ScalarField: The entry field.
        """
        if mu == nu:
            return lambda x, y, order: Jet2.constant(0.0, (float(x), float(y)), order)
        if mu < nu:
            return lambda x, y, order: self.jets(x, y, order)[(mu, nu)]
        return lambda x, y, order: -self.jets(x, y, order)[(nu, mu)]

    def matrix(self, x: float, y: float) -> FloatArray:
        """Return the 4x4 matrix of values at a point."""
        return self.derivatives(x, y, order=0).values

    def entry(self, mu: int, nu: int, x: float, y: float) -> float:
        """Return the value ω^{μν}(x, y)."""
        return float(self.matrix(x, y)[mu - 1, nu - 1])

    def derivatives(self, x: float, y: float, order: int = 2) -> BivectorDerivatives:
        """
        Collect values and position derivatives up to second order.

        Args:
            x (float): Abscissa.
            y (float): Ordinate.
            order (int): Jet order to request; derivatives above it are left at zero.

        Returns:
            BivectorDerivatives: The derivative arrays.
        """
        values = np.zeros((4, 4))
        first = np.zeros((4, 4, 4))
        second = np.zeros((4, 4, 4, 4))
        for (mu, nu), jet in self.jets(x, y, order).items():
            m, n = mu - 1, nu - 1
            values[m, n] = jet.value
            if order >= 1:
                first[0, m, n], first[1, m, n] = jet.gradient()
            if order >= 2:
                second[:2, :2, m, n] = jet.hessian()
        values -= values.T
        first -= first.transpose(0, 2, 1)
        second -= second.transpose(0, 1, 3, 2)
        return BivectorDerivatives(values, first, second)

    @staticmethod
    def from_entries(entries: Mapping[Pair, ScalarField]) -> "BivectorField4":
        """
        Build a bivector from scalar fields for some of the independent entries; the rest are zero.

        Args:
            entries (Mapping[Pair, ScalarField]): Map (μ, ν), μ < ν, to the entry field.

        Returns:
            BivectorField4: The assembled field.
        """
        unknown = set(entries) - set(PhaseIndexing.INDEPENDENT_PAIRS)
        if unknown:
            raise ValueError(f"Bivector entries need μ < ν in 1..4, got {sorted(unknown)}")

        def entries_at(x: float, y: float, order: int) -> dict[Pair, Jet2]:
            zero = Jet2.constant(0.0, (x, y), order)
            return {
                pair: entries[pair](x, y, order) if pair in entries else zero
                for pair in PhaseIndexing.INDEPENDENT_PAIRS
            }

        return BivectorField4(entries_at)

    @staticmethod
    def from_constant(matrix: FloatArray) -> "BivectorField4":
        """Build a constant bivector from the upper triangle of a 4x4 matrix."""
        values = np.asarray(matrix, dtype=np.float64)
        return BivectorField4.from_entries(
            {
                pair: (lambda x, y, order, v=float(values[pair[0] - 1, pair[1] - 1]): Jet2.constant(v, (x, y), order))
                for pair in PhaseIndexing.INDEPENDENT_PAIRS
            }
        )

    @staticmethod
    def canonical() -> "BivectorField4":
        """The canonical Poisson bivector, {x^i, p_j} = δ^i_j."""
        matrix = np.zeros((4, 4))
        matrix[0, 2] = matrix[1, 3] = 1.0
        return BivectorField4.from_constant(matrix)


@dataclass(frozen=True)
class ConstraintData:
    """
    The currents J_μ of the first-order Lagrangian and the constraint two-form Ω_μν = ∂_μJ_ν − ∂_νJ_μ.

    J_i = p_i + (θ/2) B_j ε^{jk} ∂_i B_k and J_{i+2} = −(θ/2) ε^{ij} (p_j + 2 B_j).
    """

    gauge_field: GaugeField
    theta: float

    def current_jets(self, x: float, y: float, px: float, py: float, order: int) -> list[Jet2]:
        """Return the jets in (x, y) of the four currents at fixed momenta; B is expanded to order + 1."""
        bx, by = self.gauge_field(x, y, order + 1)
        half = self.theta / 2.0
        bx_n, by_n = bx.truncate(order), by.truncate(order)
        j1 = (bx_n * by.derivative(0) - by_n * bx.derivative(0)) * half + px
        j2 = (bx_n * by.derivative(1) - by_n * bx.derivative(1)) * half + py
        j3 = (by_n * 2.0 + py) * -half
        j4 = (bx_n * 2.0 + px) * half
        return [j1, j2, j3, j4]

    def currents(self, x: float, y: float, px: float, py: float) -> FloatArray:
        """Return the values J_μ at a phase-space point."""
        return np.array([jet.value for jet in self.current_jets(x, y, px, py, 0)])

    def momentum_gradient(self, x: float, y: float, px: float, py: float) -> FloatArray:
        """
        Return G[μ, k] = ∂J_μ / ∂p_k.

        The currents are affine in p, so unit differences are exact.
        """
        base = self.currents(x, y, px, py)
        return np.stack(
            [self.currents(x, y, px + 1.0, py) - base, self.currents(x, y, px, py + 1.0) - base],
            axis=1,
        )

    def omega_jets(self, x: float, y: float, px: float, py: float, order: int) -> dict[Pair, Jet2]:
        """
        Return the jets of the independent entries Ω_μν, μ < ν.

        Momentum derivatives contribute constants; position derivatives come from the current jets, which
        are expanded one order above the request.
        """
        currents = self.current_jets(x, y, px, py, order + 1)
        grad_p = self.momentum_gradient(x, y, px, py)
        base_point = (float(x), float(y))

        def derivative(alpha: int, mu: int) -> Jet2:
            # ∂_α J_μ, 0-based
            if alpha < 2:
                return currents[mu].derivative(0 if alpha == 0 else 1)
            return Jet2.constant(float(grad_p[mu, alpha - 2]), base_point, order)

        return {
            (mu, nu): derivative(mu - 1, nu - 1) - derivative(nu - 1, mu - 1)
            for mu, nu in PhaseIndexing.INDEPENDENT_PAIRS
        }

    def omega(self, x: float, y: float, px: float, py: float) -> FloatArray:
        """Return the 4x4 matrix Ω at a phase-space point."""
        matrix = np.zeros((4, 4))
        for (mu, nu), jet in self.omega_jets(x, y, px, py, 0).items():
            matrix[mu - 1, nu - 1] = jet.value
        return matrix - matrix.T


def pfaffian_inverse(entries: Mapping[Pair, Jet2], point: tuple[float, float]) -> dict[Pair, Jet2]:
    """
    Invert an antisymmetric 4x4 matrix of jets through its Pfaffian.

    Args:
        entries (Mapping[Pair, Jet2]): The independent entries (μ < ν).
        point (tuple[float, float]): The evaluation point, for error reporting.

    Returns:
        dict[Pair, Jet2]: The independent entries of the inverse.

    Raises:
        SingularStructureError: If the determinant (the squared Pfaffian) is below 1e-12.
    """
    a, b, c = entries[1, 2], entries[1, 3], entries[1, 4]
    d, e, f = entries[2, 3], entries[2, 4], entries[3, 4]
    pfaffian = a * f - b * e + c * d
    if pfaffian.value**2 < 1e-12:
        raise SingularStructureError(f"Ω is singular (det = {pfaffian.value**2:.3g})", point)
    inverse_pf = pfaffian.reciprocal()
    return {
        (1, 2): -f * inverse_pf,
        (1, 3): e * inverse_pf,
        (1, 4): -d * inverse_pf,
        (2, 3): -c * inverse_pf,
        (2, 4): b * inverse_pf,
        (3, 4): -a * inverse_pf,
    }


@dataclass(frozen=True)
class PhaseState:
    """A point of phase space with the velocities of all four coordinates."""

    x: float
    y: float
    px: float
    py: float
    xdot: float
    ydot: float
    pxdot: float
    pydot: float

    @property
    def velocities(self) -> FloatArray:
        """ξ̇^μ."""
        return np.array([self.xdot, self.ydot, self.pxdot, self.pydot])


@dataclass(frozen=True)
class FirstOrderLagrangian:
    """
    The first-order model L = p_i ẋ^i − H + (p_i + B_i) θ ε^{ij} (ṗ_j + Ḃ_j) / 2.

    The Hamiltonian enters only as a number; no dynamics are derived from it.
    """

    gauge_field: GaugeField
    theta: float

    def lagrangian(self, state: PhaseState, hamiltonian: float = 0.0) -> float:
        """Evaluate L with Ḃ_j = ∂_k B_j ẋ^k."""
        bx, by = self.gauge_field(state.x, state.y, 1)
        shifted = np.array([state.px + bx.value, state.py + by.value])
        rates = np.array(
            [
                state.pxdot + bx.partial(1, 0) * state.xdot + bx.partial(0, 1) * state.ydot,
                state.pydot + by.partial(1, 0) * state.xdot + by.partial(0, 1) * state.ydot,
            ]
        )
        kinetic = state.px * state.xdot + state.py * state.ydot
        return float(kinetic - hamiltonian + self.theta * shifted @ PhaseIndexing.EPSILON @ rates / 2.0)

    def current_form(self, state: PhaseState, hamiltonian: float = 0.0) -> float:
        """Evaluate J_μ ξ̇^μ − H."""
        currents = ConstraintData(self.gauge_field, self.theta).currents(state.x, state.y, state.px, state.py)
        return float(currents @ state.velocities - hamiltonian)

    def boundary_term(self, state: PhaseState) -> float:
        """
        Return (θ/2) d/dt (ε^{ij} p_i B_j), the total derivative separating the two forms.

        Args:
            state (PhaseState): The phase-space state.

        Returns:
            float: (θ/2) ε^{ij} (ṗ_i B_j + p_i ∂_k B_j ẋ^k).
        """
        bx, by = self.gauge_field(state.x, state.y, 1)
        b = np.array([bx.value, by.value])
        b_rate = np.array(
            [
                bx.partial(1, 0) * state.xdot + bx.partial(0, 1) * state.ydot,
                by.partial(1, 0) * state.xdot + by.partial(0, 1) * state.ydot,
            ]
        )
        p = np.array([state.px, state.py])
        p_rate = np.array([state.pxdot, state.pydot])
        epsilon = PhaseIndexing.EPSILON
        return float(self.theta / 2.0 * (p_rate @ epsilon @ b + p @ epsilon @ b_rate))


class DiracBrackets:
    """Three independent constructions of the classical bracket ω₀."""

    # Momenta used to confirm that Ω⁻¹ does not depend on p
    PROBE_MOMENTA: ClassVar[tuple[tuple[float, float], tuple[float, float]]] = ((0.0, 0.0), (7.0, -3.0))

    @staticmethod
    def build_constraints(gauge_field: GaugeField, theta: float) -> ConstraintData:
        """
        Build the currents and the constraint two-form for a gauge field.

        Args:
            gauge_field (GaugeField): The correction fields.
            theta (float): The noncommutativity scale.

        Returns:
            ConstraintData: Currents and Ω.
        """
        return ConstraintData(gauge_field, theta)

    @staticmethod
    def omega0_by_inversion(constraints: ConstraintData) -> BivectorField4:
        """
        Invert Ω pointwise to get ω₀^{μν} = (Ω⁻¹)_{μν}.

        Each evaluation also inverts Ω at a second momentum and requires the values to agree to 1e-12.

        Args:
            constraints (ConstraintData): The constraint data.

        Returns:
            BivectorField4: The Dirac bivector.

        Raises:
            SingularStructureError: Where Ω degenerates.
            ConsistencyError: If the inverse depends on the momenta.
        """
        (p0x, p0y), (p1x, p1y) = DiracBrackets.PROBE_MOMENTA

        def entries_at(x: float, y: float, order: int) -> dict[Pair, Jet2]:
            point = (x, y)
            inverse = pfaffian_inverse(constraints.omega_jets(x, y, p0x, p0y, order), point)
            probe = pfaffian_inverse(constraints.omega_jets(x, y, p1x, p1y, 0), point)
            for pair, jet in inverse.items():
                if abs(jet.value - probe[pair].value) > 1e-12:
                    raise ConsistencyError(
                        f"Ω⁻¹ entry {pair} depends on the momenta at {point}: {jet.value!r} vs {probe[pair].value!r}"
                    )
            return inverse

        return BivectorField4(entries_at)

    @staticmethod
    def omega0_closed_form(gauge_field: GaugeField, theta: float) -> BivectorField4:
        """
        Assemble ω₀ directly from B and d.

        {x^i, x^j} = θ d ε^{ij}, {x^i, p_j} = d (δ^i_j − θ ε^{ik} ∂_k B_j) and
        {p_i, p_j} = θ (∂₁B₁ ∂₂B₂ − ∂₁B₂ ∂₂B₁) d ε_{ij}.

        Args:
            gauge_field (GaugeField): The correction fields.
            theta (float): The noncommutativity scale.

        Returns:
            BivectorField4: The Dirac bivector.
        """

        def entries_at(x: float, y: float, order: int) -> dict[Pair, Jet2]:
            bx, by = gauge_field(x, y, order + 1)
            d = structure_density(bx, by, theta)
            dx_bx, dy_bx = bx.derivative(0), bx.derivative(1)
            dx_by, dy_by = by.derivative(0), by.derivative(1)
            return {
                (1, 2): d * theta,
                (1, 3): d * (1.0 - dy_bx * theta),
                (1, 4): -(d * dy_by) * theta,
                (2, 3): d * dx_bx * theta,
                (2, 4): d * (1.0 + dx_by * theta),
                (3, 4): (dx_bx * dy_by - dx_by * dy_bx) * d * theta,
            }

        return BivectorField4(entries_at)

    @staticmethod
    def omega0_example_forms(profile: NCProfile, gauge: Gauge) -> BivectorField4:
        """
        Return the explicit brackets worked out for f(u) = u.

        Args:
            profile (NCProfile): Must have f(u) = u.
            gauge (Gauge): Which gauge's brackets to build.

        Returns:
            BivectorField4: The Dirac bivector.

        Raises:
            UnsupportedProfileError: For any other profile.
        """
        if not profile.is_linear_example:
            raise UnsupportedProfileError(f"Explicit brackets exist only for f(u) = u, got f_poly={profile.f_poly}")
        theta, alpha = profile.theta, profile.alpha
        at = alpha * theta

        def entries_at(x: float, y: float, order: int) -> dict[Pair, Jet2]:
            xj, yj = coordinate_jets(x, y, order)
            r2 = xj * xj + yj * yj
            denominator = 1.0 + r2 * at
            if denominator.value <= 0.0:
                raise SingularStructureError("1 + θ α r² is not positive", (x, y))
            d = denominator.reciprocal()
            if gauge is Gauge.PHI:
                mixed = -(xj * yj * d) * (at / 2.0)
                return {
                    (1, 2): d * theta,
                    (1, 3): (1.0 + (xj * xj + yj * yj * 3.0) * (at / 4.0)) * d,
                    (1, 4): mixed,
                    (2, 3): mixed,
                    (2, 4): (1.0 + (xj * xj * 3.0 + yj * yj) * (at / 4.0)) * d,
                    (3, 4): r2 * r2 * d * (3.0 * theta * alpha**2 / 16.0),
                }
            return {
                (1, 2): d * theta,
                (1, 3): (1.0 + yj * yj * at) * d,
                (1, 4): yj * yj * d * at,
                (2, 3): xj * xj * d * at,
                (2, 4): (1.0 + xj * xj * at) * d,
                (3, 4): Jet2.constant(0.0, (x, y), order),
            }

        return BivectorField4(entries_at)

    @staticmethod
    def constant_theta(theta: float) -> BivectorField4:
        """The global noncommutativity bivector: ω^{12} = θ, ω^{13} = ω^{24} = 1."""
        matrix = np.zeros((4, 4))
        matrix[0, 1] = theta
        matrix[0, 2] = matrix[1, 3] = 1.0
        return BivectorField4.from_constant(matrix)
