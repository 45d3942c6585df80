"""
Truncated bivariate Taylor arithmetic.

A `Jet2` stores the Taylor coefficients c_ab = ∂_x^a ∂_y^b f / (a! b!) of a scalar field at a base point for
all a + b <= K. Sums, products and quotients of jets are the truncated expansions of the exact results, so
derivatives of polynomial expressions come out exact up to rounding.
"""

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import cache
from typing import Literal

import numpy as np
import numpy.typing as npt

from .exceptions import ConfigurationError, OrderExceededError, SingularDivisorError

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.intp]

DEFAULT_ORDER = 4


@cache
def _product_indices(order: int) -> tuple[IntArray, IntArray, IntArray]:
    """
    Flat index triples (left, right, out) of the truncated 2D convolution for one order.

    Args:
        order (int): The jet order K.

    Returns:
        tuple[IntArray, IntArray, IntArray]: Indices into the flattened (K+1)x(K+1) tables.
    """
    size = order + 1
    left: list[int] = []
    right: list[int] = []
    out: list[int] = []
    for a1 in range(size):
        for b1 in range(size - a1):
            for a2 in range(size - a1 - b1):
                for b2 in range(size - a1 - b1 - a2):
                    left.append(a1 * size + b1)
                    right.append(a2 * size + b2)
                    out.append((a1 + a2) * size + b1 + b2)
    return np.array(left, dtype=np.intp), np.array(right, dtype=np.intp), np.array(out, dtype=np.intp)


@cache
def _triangle_mask(order: int) -> npt.NDArray[np.bool_]:
    a, b = np.indices((order + 1, order + 1))
    return np.asarray(a + b <= order)


@dataclass(frozen=True, eq=False)
class Jet2:
    """
    Truncated Taylor expansion of a scalar field of (x, y) at a base point.

    The coefficient table has shape (K+1, K+1); entries with a + b > K are kept at zero so the
    (K+1)(K+2)/2 meaningful coefficients form the upper-left triangle.
    """

    base_point: tuple[float, float]
    order: int
    coeffs: FloatArray

    def __post_init__(self) -> None:
        if self.order < 0:
            raise ConfigurationError(f"Jet order must be non-negative, got {self.order}")
        table = np.array(self.coeffs, dtype=np.float64)
        if table.shape != (self.order + 1, self.order + 1):
            raise ConfigurationError(f"Coefficient table of shape {table.shape} does not match order {self.order}")
        table[~_triangle_mask(self.order)] = 0.0
        table.setflags(write=False)
        object.__setattr__(self, "coeffs", table)

    # Constructors

    @staticmethod
    def constant(value: float, base_point: tuple[float, float], order: int = DEFAULT_ORDER) -> "Jet2":
        """
        Build the jet of a constant field.

        Args:
            value (float): The constant.
            base_point (tuple[float, float]): The expansion point.
            order (int): The jet order.

        Returns:
            Jet2: The constant jet.
        """
        coeffs = np.zeros((order + 1, order + 1))
        coeffs[0, 0] = value
        return Jet2(base_point, order, coeffs)

    @staticmethod
    def variable(axis: Literal[0, 1], base_point: tuple[float, float], order: int = DEFAULT_ORDER) -> "Jet2":
        """
        Build the jet of the coordinate x (axis 0) or y (axis 1).

        Args:
            axis (Literal[0, 1]): Which coordinate.
            base_point (tuple[float, float]): The expansion point.
            order (int): The jet order.

        Returns:
            Jet2: The coordinate jet.
        """
        coeffs = np.zeros((order + 1, order + 1))
        coeffs[0, 0] = base_point[axis]
        if order >= 1:
            coeffs[(1, 0) if axis == 0 else (0, 1)] = 1.0
        return Jet2(base_point, order, coeffs)

    @staticmethod
    def from_derivatives(
        derivatives: dict[tuple[int, int], float], base_point: tuple[float, float], order: int
    ) -> "Jet2":
        """
        Build a jet from raw partial derivatives ∂_x^a ∂_y^b f at the base point.

        Args:
            derivatives (dict[tuple[int, int], float]): Map (a, b) -> derivative value; missing entries are 0.
            base_point (tuple[float, float]): The expansion point.
            order (int): The jet order.

        Returns:
            Jet2: The jet with c_ab = derivative / (a! b!).
        """
        coeffs = np.zeros((order + 1, order + 1))
        for (a, b), value in derivatives.items():
            if a + b > order:
                raise OrderExceededError(f"Derivative ({a}, {b}) exceeds jet order {order}")
            coeffs[a, b] = value / (math.factorial(a) * math.factorial(b))
        return Jet2(base_point, order, coeffs)

    # Accessors

    @property
    def value(self) -> float:
        """The field value at the base point."""
        return float(self.coeffs[0, 0])

    def coefficient(self, a: int, b: int) -> float:
        """Return the Taylor coefficient c_ab (zero above the order)."""
        if a + b > self.order:
            return 0.0
        return float(self.coeffs[a, b])

    def partial(self, a: int, b: int) -> float:
        """
        Return the mixed partial ∂_x^a ∂_y^b of the field at the base point.

        Args:
            a (int): Order in x.
            b (int): Order in y.

        Returns:
            float: a! b! c_ab.

        Raises:
            OrderExceededError: If a + b exceeds the jet order.
        """
        if a < 0 or b < 0 or a + b > self.order:
            raise OrderExceededError(f"Partial ({a}, {b}) requested from a jet of order {self.order}")
        return math.factorial(a) * math.factorial(b) * float(self.coeffs[a, b])

    def gradient(self) -> tuple[float, float]:
        """Return (∂_x f, ∂_y f) at the base point."""
        return self.partial(1, 0), self.partial(0, 1)

    def hessian(self) -> FloatArray:
        """Return the 2x2 matrix of second partials at the base point."""
        mixed = self.partial(1, 1)
        return np.array([[self.partial(2, 0), mixed], [mixed, self.partial(0, 2)]])

    # Structural operations

    def derivative(self, axis: Literal[0, 1]) -> "Jet2":
        """
        Differentiate the jet along x (axis 0) or y (axis 1).

        The result is exact but one order lower, since the top coefficients lose their partners.

        Raises:
            OrderExceededError: If the jet has order 0.
        """
        if self.order == 0:
            raise OrderExceededError("Cannot differentiate a jet of order 0")
        size = self.order
        if axis == 0:
            weights = np.arange(1, size + 1, dtype=np.float64)[:, None]
            coeffs = self.coeffs[1:, :size] * weights
        else:
            weights = np.arange(1, size + 1, dtype=np.float64)[None, :]
            coeffs = self.coeffs[:size, 1:] * weights
        return Jet2(self.base_point, self.order - 1, coeffs)

    def truncate(self, order: int) -> "Jet2":
        """Drop every coefficient of total degree above `order`."""
        if order > self.order:
            raise OrderExceededError(f"Cannot raise a jet of order {self.order} to order {order}")
        return Jet2(self.base_point, order, self.coeffs[: order + 1, : order + 1])

    def reciprocal(self) -> "Jet2":
        """
        Return the jet of 1/f.

        With f = c00 (1 + e) and e nilpotent under truncation, 1/f = (1/c00) Σ_{n<=K} (−e)^n.

        Raises:
            SingularDivisorError: If the constant term vanishes.
        """
        head = self.value
        if head == 0.0:
            raise SingularDivisorError(self.base_point)
        tail = self * (1.0 / head) - 1.0
        result = self._lift(1.0)
        for _ in range(self.order):
            result = 1.0 - tail * result
        return result * (1.0 / head)

    # Arithmetic

    def _lift(self, other: "Jet2 | float") -> "Jet2":
        if isinstance(other, Jet2):
            if other.base_point != self.base_point or other.order != self.order:
                raise ConfigurationError(
                    f"Jets at {self.base_point} (order {self.order}) and {other.base_point} "
                    f"(order {other.order}) cannot be combined"
                )
            return other
        return Jet2.constant(float(other), self.base_point, self.order)

    def __add__(self, other: "Jet2 | float") -> "Jet2":
        return Jet2(self.base_point, self.order, self.coeffs + self._lift(other).coeffs)

    __radd__ = __add__

    def __sub__(self, other: "Jet2 | float") -> "Jet2":
        return Jet2(self.base_point, self.order, self.coeffs - self._lift(other).coeffs)

    def __rsub__(self, other: "Jet2 | float") -> "Jet2":
        return Jet2(self.base_point, self.order, self._lift(other).coeffs - self.coeffs)

    def __neg__(self) -> "Jet2":
        return Jet2(self.base_point, self.order, -self.coeffs)

    def __mul__(self, other: "Jet2 | float") -> "Jet2":
        if not isinstance(other, Jet2):
            return Jet2(self.base_point, self.order, self.coeffs * float(other))
        other = self._lift(other)
        left, right, out = _product_indices(self.order)
        size = self.order + 1
        weights = self.coeffs.ravel()[left] * other.coeffs.ravel()[right]
        product = np.bincount(out, weights=weights, minlength=size * size)
        return Jet2(self.base_point, self.order, product.reshape(size, size))

    __rmul__ = __mul__

    def __truediv__(self, other: "Jet2 | float") -> "Jet2":
        if not isinstance(other, Jet2):
            if float(other) == 0.0:
                raise SingularDivisorError(self.base_point)
            return self * (1.0 / float(other))
        return self * self._lift(other).reciprocal()

    def __rtruediv__(self, other: float) -> "Jet2":
        return self.reciprocal() * float(other)

    def __pow__(self, exponent: int) -> "Jet2":
        if exponent < 0:
            return (self**-exponent).reciprocal()
        result = self._lift(1.0)
        for _ in range(exponent):
            result = result * self
        return result

    def __repr__(self) -> str:
        return f"Jet2(base_point={self.base_point}, order={self.order}, value={self.value!r})"


# Scalar fields are evaluated at a point and a requested jet order.
ScalarField = Callable[[float, float, int], Jet2]


def coordinate_jets(x: float, y: float, order: int) -> tuple[Jet2, Jet2]:
    """Return the jets of the coordinates x and y expanded at (x, y)."""
    base_point = (float(x), float(y))
    return Jet2.variable(0, base_point, order), Jet2.variable(1, base_point, order)


def polyval(coefficients: Sequence[float], argument: Jet2) -> Jet2:
    """
    Evaluate Σ c_k u^k at a jet argument by Horner's rule.

    Args:
        coefficients (Sequence[float]): c_0, c_1, ... in increasing degree.
        argument (Jet2): The jet u.

    Returns:
        Jet2: The jet of the polynomial.
    """
    result = Jet2.constant(0.0, argument.base_point, argument.order)
    for coefficient in reversed(coefficients):
        result = result * argument + coefficient
    return result


def jet_arith(a: Jet2, b: Jet2, op: Literal["add", "sub", "mul", "div"]) -> Jet2:
    """
    Combine two jets at the same base point and order.

    Args:
        a (Jet2): Left operand.
        b (Jet2): Right operand.
        op (Literal["add", "sub", "mul", "div"]): The operation.

    Returns:
        Jet2: The truncated expansion of the exact result.

    Raises:
        ConfigurationError: On mismatched base point or order, or an unknown operation.
        SingularDivisorError: On division by a jet with zero constant term.
    """
    # Raises on mismatched base point or order
    a._lift(b)  # noqa: SLF001
    match op:
        case "add":
            return a + b
        case "sub":
            return a - b
        case "mul":
            return a * b
        case "div":
            return a / b
    raise ConfigurationError(f"Unknown jet operation {op!r}")


def jet_partial(j: Jet2, a: int, b: int) -> float:
    """Return the true mixed partial ∂_x^a ∂_y^b of a jet at its base point."""
    return j.partial(a, b)


def central_difference(
    function: Callable[[float, float], float], x: float, y: float, a: int, b: int, step: float = 1e-5
) -> float:
    """
    Approximate ∂_x^a ∂_y^b f with central differences, for a + b <= 2.

    Used as an independent oracle for the jet engine.

    Raises:
        OrderExceededError: For derivative orders above two.
    """
    h = step
    match (a, b):
        case (0, 0):
            return function(x, y)
        case (1, 0):
            return (function(x + h, y) - function(x - h, y)) / (2 * h)
        case (0, 1):
            return (function(x, y + h) - function(x, y - h)) / (2 * h)
        case (2, 0):
            return (function(x + h, y) - 2 * function(x, y) + function(x - h, y)) / h**2
        case (0, 2):
            return (function(x, y + h) - 2 * function(x, y) + function(x, y - h)) / h**2
        case (1, 1):
            return (
                function(x + h, y + h) - function(x + h, y - h) - function(x - h, y + h) + function(x - h, y - h)
            ) / (4 * h**2)
    raise OrderExceededError(f"Finite differences are provided up to second order, got ({a}, {b})")
