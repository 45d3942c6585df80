import itertools
import logging
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .exceptions import ConsistencyError
from .symplectic import BivectorDerivatives, BivectorField4, PhaseIndexing
from .taylor_jets import FloatArray, Jet2, ScalarField, coordinate_jets

logger = logging.getLogger(__name__)

Triple = tuple[int, int, int]

# Sampling point for the position-independent linear obstruction
DEFAULT_PROBE = (0.3, -0.7)


@dataclass(frozen=True)
class JacobiResidual:
    """The cyclic sum ω^{μσ}∂_σω^{νλ} + cycl(μνλ) for one triple at one point."""

    indices: Triple
    point: tuple[float, float]
    value: float


@dataclass(frozen=True)
class GridMaximum:
    """The largest |residual| found on a grid and where it occurred."""

    value: float
    point: tuple[float, float]
    indices: Triple


@dataclass(frozen=True)
class StructureConstants:
    """
    The constants f_k^{ij} of a linear coordinate algebra ω^{ij} = f_k^{ij} x^k.

    `table[k, i, j]` holds f_k^{ij} with 0-based i, j, k.
    """

    table: FloatArray

    def __post_init__(self) -> None:
        table = np.array(self.table, dtype=np.float64)
        if table.shape != (2, 2, 2):
            raise ValueError(f"Structure constants need shape (2, 2, 2), got {table.shape}")
        if not np.array_equal(table, -table.transpose(0, 2, 1)):
            raise ValueError("Structure constants must be antisymmetric in their upper indices")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @staticmethod
    def single(k: int, value: float) -> "StructureConstants":
        """
        Return the algebra with only f_k^{12} = −f_k^{21} = value.

        Args:
            k (int): The lower index, 1 or 2.
            value (float): The constant.

        Returns:
            StructureConstants: The constants.
        """
        table = np.zeros((2, 2, 2))
        table[k - 1, 0, 1] = value
        table[k - 1, 1, 0] = -value
        return StructureConstants(table)


def _cyclic_sums(derivatives: BivectorDerivatives) -> FloatArray:
    """Return C[m, n, l], the cyclic sum for every 0-based triple."""
    values, first = derivatives.values, derivatives.first
    return (
        np.einsum("ms,snl->mnl", values, first)
        + np.einsum("ns,slm->mnl", values, first)
        + np.einsum("ls,smn->mnl", values, first)
    )


class JacobiChecker:
    """Evaluates the classical Jacobi identity and the obstructions of naive coordinate algebras."""

    @staticmethod
    def jacobiator(w: BivectorField4, triple: Triple, point: tuple[float, float]) -> float:
        """
        Evaluate ω^{μσ}∂_σω^{νλ} + ω^{νσ}∂_σω^{λμ} + ω^{λσ}∂_σω^{μν}.

        Args:
            w (BivectorField4): The bivector.
            triple (Triple): (μ, ν, λ), 1-based.
            point (tuple[float, float]): The position.

        Returns:
            float: The cyclic sum; only σ in {1, 2} contributes.
        """
        mu, nu, lam = (index - 1 for index in triple)
        return float(_cyclic_sums(w.derivatives(*point, order=1))[mu, nu, lam])

    @staticmethod
    def residuals(w: BivectorField4, point: tuple[float, float]) -> list[JacobiResidual]:
        """Return the residuals of the four independent triples at a point."""
        sums = _cyclic_sums(w.derivatives(*point, order=1))
        return [
            JacobiResidual(triple, point, float(sums[triple[0] - 1, triple[1] - 1, triple[2] - 1]))
            for triple in PhaseIndexing.INDEPENDENT_TRIPLES
        ]

    @staticmethod
    def grid_maximum(w: BivectorField4, xs: Iterable[float], ys: Iterable[float]) -> GridMaximum:
        """
        Scan a grid in row-major order (y outer) for the largest |jacobiator|.

        Args:
            w (BivectorField4): The bivector.
            xs (Iterable[float]): Abscissae.
            ys (Iterable[float]): Ordinates.

        Returns:
            GridMaximum: The worst residual; ties keep the first point.
        """
        worst = GridMaximum(0.0, (float("nan"), float("nan")), PhaseIndexing.INDEPENDENT_TRIPLES[0])
        xs = list(xs)
        for y, x in itertools.product(ys, xs):
            for residual in JacobiChecker.residuals(w, (float(x), float(y))):
                if abs(residual.value) > worst.value or np.isnan(worst.point[0]):
                    worst = GridMaximum(abs(residual.value), residual.point, residual.indices)
        logger.debug("Largest Jacobi residual %.3e at %s for %s", worst.value, worst.point, worst.indices)
        return worst

    @staticmethod
    def linear_counterexample(
        sc: StructureConstants, point: tuple[float, float] = DEFAULT_PROBE, tolerance: float = 1e-12
    ) -> FloatArray:
        """
        Show that ω^{ij} = f_k^{ij} x^k with canonical momenta breaks the Jacobi identity.

        Args:
            sc (StructureConstants): The constants f_k^{ij}.
            point (tuple[float, float]): Where to evaluate; the result does not depend on it.
            tolerance (float): Allowed deviation of |violation| from |f_k^{ij}|.

        Returns:
            FloatArray: V[k, i, j], the cyclic sum for (p_k, x^i, x^j), which equals −f_k^{ij}.

        Raises:
            ConsistencyError: If a violation does not have the magnitude |f_k^{ij}|.
        """
        table = sc.table

        def omega12(x: float, y: float, order: int) -> Jet2:
            xj, yj = coordinate_jets(x, y, order)
            return xj * float(table[0, 0, 1]) + yj * float(table[1, 0, 1])

        violations = JacobiChecker._momentum_violations(omega12, point)
        if not np.allclose(np.abs(violations), np.abs(table), rtol=0.0, atol=tolerance):
            raise ConsistencyError(f"Jacobi violation {violations.tolist()} does not match |f| = {table.tolist()}")
        return violations

    @staticmethod
    def quadratic_counterexample(r: FloatArray, point: tuple[float, float], tolerance: float = 1e-12) -> FloatArray:
        """
        The same obstruction for a quadratic algebra ω^{ij} = R^{ij}_{kl} x^k x^l.

        Args:
            r (FloatArray): R[i, j, k, l], antisymmetric in (i, j).
            point (tuple[float, float]): The position; here the violation depends on it.
            tolerance (float): Allowed deviation from the analytic violation.

        Returns:
            FloatArray: V[k, i, j] = −(R^{ij}_{kl} + R^{ij}_{lk}) x^l.

        Raises:
            ConsistencyError: If the computed table differs from the analytic one.
        """
        constants = np.asarray(r, dtype=np.float64)
        if constants.shape != (2, 2, 2, 2) or not np.array_equal(constants, -constants.transpose(1, 0, 2, 3)):
            raise ValueError("Quadratic constants need shape (2, 2, 2, 2) and antisymmetry in the upper indices")
        coupling = constants[0, 1]

        def omega12(x: float, y: float, order: int) -> Jet2:
            xj, yj = coordinate_jets(x, y, order)
            coords = (xj, yj)
            total = Jet2.constant(0.0, (x, y), order)
            for k, l in itertools.product(range(2), repeat=2):
                total = total + coords[k] * coords[l] * float(coupling[k, l])
            return total

        violations = JacobiChecker._momentum_violations(omega12, point)
        position = np.asarray(point, dtype=np.float64)
        expected = -np.einsum("ijkl,l->kij", constants + constants.transpose(0, 1, 3, 2), position)
        if not np.allclose(violations, expected, rtol=0.0, atol=tolerance):
            raise ConsistencyError(f"Quadratic violation {violations.tolist()} differs from {expected.tolist()}")
        return violations

    @staticmethod
    def _momentum_violations(omega12: ScalarField, point: tuple[float, float]) -> FloatArray:
        """Cyclic sums for (p_k, x^i, x^j) of the bivector with ω^{12} given and canonical momenta."""
        one = lambda x, y, order: Jet2.constant(1.0, (x, y), order)  # noqa: E731
        w = BivectorField4.from_entries({(1, 2): omega12, (1, 3): one, (2, 4): one})
        sums = _cyclic_sums(w.derivatives(*point, order=1))
        violations = np.zeros((2, 2, 2))
        for k, i, j in itertools.product(range(2), repeat=3):
            violations[k, i, j] = sums[k + 2, i, j]
        return violations
