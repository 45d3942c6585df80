"""
The ħ² correction ω₂ to the classical bracket, which restores the operator Jacobi identity at third order in ħ.

ω₂^{μν} = (1/48) ∂_γω₀^{ρσ} ∂_ρω₀^{γδ} ∂_σ∂_δω₀^{μν} − (1/24) ∂_σ∂_γω₀^{μρ} ∂_ρ∂_δω₀^{νσ} ω₀^{γδ}
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .exceptions import OrderExceededError
from .fields import GaugeField, structure_density
from .symplectic import BivectorField4, Pair, PhaseIndexing
from .taylor_jets import FloatArray, Jet2, ScalarField


EPSILON = PhaseIndexing.EPSILON


@dataclass(frozen=True)
class BlockComponents:
    """
    ω₂ assembled block by block from d, B and P^n_j = {x^n, p_j}.

    `operator_parts` holds the contribution of the first-derivative operator acting on each ω₀ entry, so the
    remaining contraction term is `components[pair] - operator_parts[pair]`.
    """

    components: dict[Pair, float] = field(default_factory=dict)
    operator_parts: dict[Pair, float] = field(default_factory=dict)

    def matrix(self) -> FloatArray:
        """Return the components as an antisymmetric 4x4 matrix."""
        matrix = np.zeros((4, 4))
        for (mu, nu), value in self.components.items():
            matrix[mu - 1, nu - 1] = value
        return matrix - matrix.T


@dataclass(frozen=True)
class HbarSeriesBivector:
    """The truncated series ω = ω₀ + ħ² ω₂, with ħ a formal parameter."""

    omega0: BivectorField4
    omega2: BivectorField4

    def evaluate(self, x: float, y: float, hbar: float) -> FloatArray:
        """Return the 4x4 matrix ω₀ + ħ² ω₂ at a point."""
        return self.omega0.matrix(x, y) + hbar**2 * self.omega2.matrix(x, y)

    @staticmethod
    def from_omega0(omega0: BivectorField4) -> "HbarSeriesBivector":
        """
        Attach the correction computed from the general formula.

        The ω₂ field only serves values (order 0); its derivatives would need ω₄, which is not built.
        """

        def entries_at(x: float, y: float, order: int) -> dict[Pair, Jet2]:
            if order > 0:
                raise OrderExceededError("ω₂ is tabulated by value only")
            matrix = QuantumCorrection.omega2_general(omega0, (x, y))
            return {
                (mu, nu): Jet2.constant(float(matrix[mu - 1, nu - 1]), (x, y), 0)
                for mu, nu in PhaseIndexing.INDEPENDENT_PAIRS
            }

        return HbarSeriesBivector(omega0, BivectorField4(entries_at))


def _second_partial(jet: Jet2, s: int, t: int) -> float:
    """∂_s ∂_t at the base point for 0-based position indices."""
    return jet.partial(int(s == 0) + int(t == 0), int(s == 1) + int(t == 1))


class QuantumCorrection:
    """Two independent evaluations of ω₂ and the first-order star commutator."""

    @staticmethod
    def omega2_general(w0: BivectorField4, point: tuple[float, float], order: int = 2) -> FloatArray:
        """
        Evaluate ω₂ by full index contraction.

        Args:
            w0 (BivectorField4): The classical bracket.
            point (tuple[float, float]): The position.
            order (int): Jet order requested from w0, at least 2.

        Returns:
            FloatArray: The antisymmetric 4x4 matrix ω₂.
        """
        derivs = w0.derivatives(*point, order=order)
        values, first, second = derivs.values, derivs.first, derivs.second
        poisson_part = np.einsum("grs,rgd,sdmn->mn", first, first, second)
        contraction = np.einsum("sgmr,rdns,gd->mn", second, second, values)
        # Antisymmetric part only
        contraction = (contraction - contraction.T) / 2.0
        return np.asarray(poisson_part / 48.0 - contraction / 24.0)

    @staticmethod
    def omega2_blocks(gauge_field: GaugeField, theta: float, point: tuple[float, float]) -> BlockComponents:
        """
        Evaluate ω₂ block by block in terms of d, B and P^n_j = d (δ^n_j − θ ε^{nk} ∂_k B_j).

        Every block is Op(ω₀^{μν}) plus a contraction, where
        Op = (θ²/24) [½ (∂₂d)² ∂₁² − ∂₁d ∂₂d ∂₁∂₂ + ½ (∂₁d)² ∂₂²] acts on the entry that follows it.

        Args:
            gauge_field (GaugeField): The correction fields, expanded to order 3.
            theta (float): The noncommutativity scale.
            point (tuple[float, float]): The position.

        Returns:
            BlockComponents: The six independent components and their operator parts.
        """
        x, y = point
        bx, by = gauge_field(x, y, 3)
        d = structure_density(bx, by, theta)
        b2 = [[b.derivative(0), b.derivative(1)] for b in (bx, by)]
        d1, d2 = d.gradient()
        d_value = d.value

        def operator(entry: Jet2) -> float:
            return (theta**2 / 24.0) * (
                0.5 * d2**2 * entry.partial(2, 0) - d1 * d2 * entry.partial(1, 1) + 0.5 * d1**2 * entry.partial(0, 2)
            )

        # P[n][j] = {x^n, p_j}
        momenta = [
            [
                d * (float(n == j) - (b2[j][0] * EPSILON[n, 0] + b2[j][1] * EPSILON[n, 1]) * theta)
                for j in range(2)
            ]
            for n in range(2)
        ]
        pp_density = b2[0][0] * b2[1][1] - b2[1][0] * b2[0][1]

        components: dict[Pair, float] = {}
        operator_parts: dict[Pair, float] = {}

        top = d * theta
        operator_parts[1, 2] = operator(top)
        components[1, 2] = operator_parts[1, 2] + (theta**3 / 24.0) * d_value * (
            d.partial(2, 0) * d.partial(0, 2) - d.partial(1, 1) ** 2
        )

        for i, j in itertools.product(range(2), repeat=2):
            target = momenta[i][j]
            contraction = 0.0
            for m, n in itertools.product(range(2), repeat=2):
                if EPSILON[i, m] == 0.0:
                    continue
                contraction += EPSILON[i, m] * (
                    _second_partial(d, n, 0) * _second_partial(momenta[n][j], m, 1)
                    - _second_partial(d, n, 1) * _second_partial(momenta[n][j], m, 0)
                )
            pair = (i + 1, j + 3)
            operator_parts[pair] = operator(target)
            components[pair] = operator_parts[pair] + (theta**2 / 24.0) * d_value * contraction

        bottom = pp_density * d * theta
        contraction = 0.0
        for m, n in itertools.product(range(2), repeat=2):
            contraction += _second_partial(momenta[m][0], n, 0) * _second_partial(momenta[n][1], m, 1)
            contraction -= _second_partial(momenta[m][0], n, 1) * _second_partial(momenta[n][1], m, 0)
        operator_parts[3, 4] = operator(bottom)
        components[3, 4] = operator_parts[3, 4] - (theta / 24.0) * d_value * contraction

        return BlockComponents(components, operator_parts)

    # Alias of the block form
    omega2_appendix = omega2_blocks

    @staticmethod
    def star1_commutator(mu: int, g: ScalarField, w: BivectorField4, point: tuple[float, float]) -> float:
        """
        Return the coefficient of iħ in ξ^μ ⋆ g − g ⋆ ξ^μ at first order, ω^{μσ} ∂_σ g.

        With g = ω^{νλ} and the cyclic sum over (μ, ν, λ) taken, this is the jacobiator, so the order-ħ part
        of the operator Jacobi condition is the classical Jacobi identity.

        Args:
            mu (int): The phase coordinate, 1..4.
            g (ScalarField): A position-dependent function.
            w (BivectorField4): The bracket.
            point (tuple[float, float]): The position.

        Returns:
            float: Σ_{σ ∈ {1, 2}} ω^{μσ} ∂_σ g.
        """
        values = w.matrix(*point)
        gradient = g(point[0], point[1], 1).gradient()
        return float(values[mu - 1, 0] * gradient[0] + values[mu - 1, 1] * gradient[1])
