import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum, auto
from typing import TypedDict

import numpy as np
from numpy.polynomial import legendre
from numpy.polynomial import polynomial as poly

from .exceptions import ConfigError, SingularProfileError, SingularStructureError
from .taylor_jets import FloatArray, Jet2, ScalarField, coordinate_jets, polyval

logger = logging.getLogger(__name__)

# Evaluates (B_x, B_y) at a point and order
GaugeEvaluator = Callable[[float, float, int], tuple[Jet2, Jet2]]


class Gauge(Enum):
    """Enumeration of the two conditions closing the system for B."""

    PHI = auto()
    CHI = auto()

    @staticmethod
    def from_name(name: str) -> "Gauge":
        """
        Parse a gauge tag as written in run configurations ("phi" or "chi").

        Args:
            name (str): The tag, case-insensitive.

        Returns:
            Gauge: The matching gauge.
        """
        try:
            return Gauge[name.strip().upper()]
        except KeyError:
            raise ConfigError("profile.gauge", f"unknown gauge {name!r}, expected 'phi' or 'chi'") from None


class ProfileJson(TypedDict):
    """JSON representation of a noncommutativity profile."""

    theta: float
    alpha: float
    f_poly: list[float]


@dataclass(frozen=True)
class NCProfile:
    """
    The noncommutativity specification θ, α and the radial profile f(u) = Σ c_k u^k.
    The induced density is d(x, y) = 1 / (1 + θ f(α (x² + y²))).
    """

    theta: float
    alpha: float
    f_poly: tuple[float, ...] = field(default=(0.0, 1.0))

    def __post_init__(self) -> None:
        if not self.f_poly:
            raise ConfigError("profile.f_poly", "needs at least one coefficient")
        if not all(math.isfinite(value) for value in (self.theta, self.alpha, *self.f_poly)):
            raise ConfigError("profile", "theta, alpha and f_poly must be finite")
        if self.alpha < 0:
            raise ConfigError("profile.alpha", f"must be non-negative, got {self.alpha}")
        object.__setattr__(self, "f_poly", tuple(float(c) for c in self.f_poly))

    @property
    def coefficients(self) -> tuple[float, ...]:
        """The profile coefficients with trailing zeros removed."""
        trimmed = poly.polytrim(np.array(self.f_poly))
        return tuple(float(c) for c in trimmed)

    @property
    def is_linear_example(self) -> bool:
        """Whether f(u) = u, the profile the worked example displays are written for."""
        return self.coefficients == (0.0, 1.0)

    def f(self, u: float) -> float:
        """Evaluate the radial profile f at a real argument."""
        return float(poly.polyval(u, self.f_poly))

    def radial_argument(self, x: float, y: float, order: int) -> Jet2:
        """Return the jet of u = α (x² + y²)."""
        xj, yj = coordinate_jets(x, y, order)
        return (xj * xj + yj * yj) * self.alpha

    def denominator(self, x: float, y: float, order: int) -> Jet2:
        """Return the jet of 1 + θ f(α r²)."""
        return 1.0 + polyval(self.f_poly, self.radial_argument(x, y, order)) * self.theta

    def validate_on_grid(self, xs: Sequence[float], ys: Sequence[float]) -> None:
        """
        Check that 1 + θ f(α r²) stays positive on every node of a grid.

        Args:
            xs (Sequence[float]): Grid abscissae.
            ys (Sequence[float]): Grid ordinates.

        Raises:
            SingularProfileError: On the first failing node in row-major order (y outer, x inner).
        """
        gx, gy = np.meshgrid(np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64))
        values = 1.0 + self.theta * poly.polyval(self.alpha * (gx**2 + gy**2), self.f_poly)
        bad = np.argwhere(values <= 0.0)
        if bad.size:
            row, col = bad[0]
            point = (float(gx[row, col]), float(gy[row, col]))
            raise SingularProfileError("1 + θ f(α r²) is not positive", point)
        logger.debug("Profile positive on grid, min(1 + θ f) = %.6g", float(values.min()))

    def to_dict(self) -> ProfileJson:
        """
        Convert the profile into a Python dictionary.

        Returns:
            ProfileJson: The profile encoded in a dict.
        """
        return {"theta": self.theta, "alpha": self.alpha, "f_poly": list(self.f_poly)}

    @staticmethod
    def from_dict(data: ProfileJson) -> "NCProfile":
        """
        Build a profile from its dictionary form.

        Args:
            data (ProfileJson): The profile in a dict format.

        Returns:
            NCProfile: The validated profile.
        """
        try:
            return NCProfile(
                theta=float(data["theta"]),
                alpha=float(data["alpha"]),
                f_poly=tuple(float(c) for c in data.get("f_poly", [0.0, 1.0])),
            )
        except KeyError as error:
            raise ConfigError(f"profile.{error.args[0]}", "missing") from None
        except (TypeError, ValueError) as error:
            raise ConfigError("profile", str(error)) from None


@dataclass(frozen=True)
class GaugeField:
    """The correction fields (B_x, B_y) together with the gauge they were solved in."""

    gauge: Gauge
    evaluate: GaugeEvaluator

    def __call__(self, x: float, y: float, order: int) -> tuple[Jet2, Jet2]:
        return self.evaluate(float(x), float(y), order)

    @property
    def bx(self) -> ScalarField:
        """B_x as a scalar field."""
        return lambda x, y, order: self(x, y, order)[0]

    @property
    def by(self) -> ScalarField:
        """B_y as a scalar field."""
        return lambda x, y, order: self(x, y, order)[1]

    @staticmethod
    def zero(gauge: Gauge) -> "GaugeField":
        """Return the identically vanishing field."""

        def evaluate(x: float, y: float, order: int) -> tuple[Jet2, Jet2]:
            zero = Jet2.constant(0.0, (x, y), order)
            return zero, zero

        return GaugeField(gauge, evaluate)


@dataclass(frozen=True)
class PolynomialSource:
    """
    A polynomial source g(x, y) = Σ g_ab x^a y^b for the χ-gauge equation (∂_x − ∂_y) χ = g.

    `coeffs[a, b]` holds g_ab.
    """

    coeffs: FloatArray

    def __post_init__(self) -> None:
        table = np.atleast_2d(np.array(self.coeffs, dtype=np.float64))
        table.setflags(write=False)
        object.__setattr__(self, "coeffs", table)

    @property
    def degree(self) -> int:
        """Total degree of the source (0 for the zero polynomial)."""
        nonzero = np.argwhere(self.coeffs != 0.0)
        return int(nonzero.sum(axis=1).max()) if nonzero.size else 0

    def __call__(self, x: Jet2, y: Jet2) -> Jet2:
        result = Jet2.constant(0.0, x.base_point, x.order)
        # Horner in x with coefficients that are polynomials in y
        for row in self.coeffs[::-1]:
            result = result * x + polyval(row, y)
        return result

    def value(self, x: float, y: float) -> float:
        """Evaluate the source at a real point."""
        return float(poly.polyval2d(x, y, self.coeffs))

    @staticmethod
    def from_profile(profile: NCProfile) -> "PolynomialSource":
        """
        Expand g = f(α (x² + y²)) − f(0) into monomials.

        Args:
            profile (NCProfile): The profile.

        Returns:
            PolynomialSource: The source with g|_{α=0} = 0.
        """
        coefficients = profile.coefficients
        size = 2 * (len(coefficients) - 1) + 1
        table = np.zeros((size, size))
        for k, c_k in enumerate(coefficients[1:], start=1):
            scale = c_k * profile.alpha**k
            for j in range(k + 1):
                table[2 * j, 2 * (k - j)] += scale * math.comb(k, j)
        return PolynomialSource(table)


def structure_density(bx: Jet2, by: Jet2, theta: float) -> Jet2:
    """
    Return d = 1 / (1 + θ (∂_x B_y − ∂_y B_x)) from B jets of order n + 1 as a jet of order n.

    Raises:
        SingularStructureError: If the denominator vanishes at the base point.
    """
    denominator = 1.0 + (by.derivative(0) - bx.derivative(1)) * theta
    if denominator.value == 0.0:
        raise SingularStructureError("1 + θ (∂₁B₂ − ∂₂B₁) vanishes", bx.base_point)
    return denominator.reciprocal()


class GaugeSolver:
    """Builds d fields from a profile and solves for the correction fields B in either gauge."""

    @staticmethod
    def d_from_profile(profile: NCProfile) -> ScalarField:
        """
        Return d(x, y) = 1 / (1 + θ f(α (x² + y²))) as a jet-valued field.

        Args:
            profile (NCProfile): The noncommutativity profile.

        Returns:
            ScalarField: The density field.
        """

        def density(x: float, y: float, order: int) -> Jet2:
            denominator = profile.denominator(x, y, order)
            if denominator.value <= 0.0:
                raise SingularProfileError("1 + θ f(α r²) is not positive", (x, y))
            return denominator.reciprocal()

        return density

    @staticmethod
    def solve_phi_gauge(profile: NCProfile) -> GaugeField:
        """
        Solve for B in the φ-gauge, B_i = −ε^{ij} ∂_j φ with φ radial.

        With P(u) = Σ c_k u^k / (k + 1), that is (F(u) − F(0)) / u for F' = f, the solution is
        B_x = −y P(α r²) / 2 and B_y = x P(α r²) / 2, regular at the origin.

        Args:
            profile (NCProfile): The noncommutativity profile.

        Returns:
            GaugeField: The φ-gauge field; identically zero for α = 0.
        """
        if profile.alpha == 0.0:
            return GaugeField.zero(Gauge.PHI)
        reduced = [c_k / (k + 1) for k, c_k in enumerate(profile.f_poly)]

        def evaluate(x: float, y: float, order: int) -> tuple[Jet2, Jet2]:
            xj, yj = coordinate_jets(x, y, order)
            half_p = polyval(reduced, profile.radial_argument(x, y, order)) * 0.5
            return -yj * half_p, xj * half_p

        return GaugeField(Gauge.PHI, evaluate)

    @staticmethod
    def solve_chi_gauge_for_source(source: PolynomialSource) -> GaugeField:
        """
        Solve (∂_x − ∂_y) χ = g with B_x = B_y = χ.

        In ξ = x − y, η = x + y the equation reads ∂_ξ χ = g / 2. Integrating from ξ = 0 with the
        integration function of η set to zero gives χ = (ξ / 2) ∫₀¹ g(x(tξ, η), y(tξ, η)) dt, which
        Gauss-Legendre quadrature with deg g + 1 nodes evaluates exactly.

        Args:
            source (PolynomialSource): The polynomial source g.

        Returns:
            GaugeField: The χ-gauge field.
        """
        nodes, weights = legendre.leggauss(source.degree + 1)
        # Map [-1, 1] onto [0, 1]
        nodes = (nodes + 1.0) / 2.0
        weights = weights / 2.0

        def evaluate(x: float, y: float, order: int) -> tuple[Jet2, Jet2]:
            xj, yj = coordinate_jets(x, y, order)
            xi, eta = xj - yj, xj + yj
            integral = Jet2.constant(0.0, (x, y), order)
            for t_k, w_k in zip(nodes, weights, strict=True):
                integral = integral + source((xi * t_k + eta) * 0.5, (eta - xi * t_k) * 0.5) * w_k
            chi = xi * integral * 0.5
            return chi, chi

        return GaugeField(Gauge.CHI, evaluate)

    @staticmethod
    def solve_chi_gauge(profile: NCProfile) -> GaugeField:
        """
        Solve for B in the χ-gauge with source g = f(α r²) − f(0).

        Args:
            profile (NCProfile): The noncommutativity profile.

        Returns:
            GaugeField: The χ-gauge field; identically zero for α = 0.
        """
        if profile.alpha != 0.0 and profile.f_poly[0] != 0.0:
            logger.warning(
                "Profile has f(0) = %g; the χ-gauge source drops it, so its d is 1 / (1 + θ (f − f(0)))",
                profile.f_poly[0],
            )
        return GaugeSolver.solve_chi_gauge_for_source(PolynomialSource.from_profile(profile))

    @staticmethod
    def solve(profile: NCProfile, gauge: Gauge) -> GaugeField:
        """Dispatch to the solver of the requested gauge."""
        match gauge:
            case Gauge.PHI:
                return GaugeSolver.solve_phi_gauge(profile)
            case Gauge.CHI:
                return GaugeSolver.solve_chi_gauge(profile)
        raise ConfigError("profile.gauge", f"unsupported gauge {gauge}")

    @staticmethod
    def d_from_B(gauge_field: GaugeField, theta: float) -> ScalarField:
        """
        Return d = 1 / (1 + θ (∂₁B₂ − ∂₂B₁)) as a jet-valued field.

        Args:
            gauge_field (GaugeField): The correction fields.
            theta (float): The noncommutativity scale.

        Returns:
            ScalarField: The density field; B is expanded one order above the request.
        """

        def density(x: float, y: float, order: int) -> Jet2:
            bx, by = gauge_field(x, y, order + 1)
            return structure_density(bx, by, theta)

        return density

    @staticmethod
    def d_from_source(source: PolynomialSource, theta: float) -> ScalarField:
        """Return d = 1 / (1 + θ g) for a polynomial source."""

        def density(x: float, y: float, order: int) -> Jet2:
            xj, yj = coordinate_jets(x, y, order)
            denominator = 1.0 + source(xj, yj) * theta
            if denominator.value <= 0.0:
                raise SingularProfileError("1 + θ g is not positive", (x, y))
            return denominator.reciprocal()

        return density
