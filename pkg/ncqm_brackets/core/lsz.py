"""
The second-order LSZ model, its first-order rewriting and the split into external and internal sectors.

All quantities are evaluated at a single instant from positions and velocities; no equations of motion
are integrated.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import LszDomainError
from .symplectic import PhaseIndexing
from .taylor_jets import FloatArray

Vector2 = tuple[float, float]

EPSILON = PhaseIndexing.EPSILON


def _vec(pair: Vector2) -> FloatArray:
    return np.asarray(pair, dtype=np.float64)


def _wedge(left: Vector2 | FloatArray, right: Vector2 | FloatArray) -> float:
    """ε_{ij} a_i b_j."""
    return float(np.asarray(left, dtype=np.float64) @ EPSILON @ np.asarray(right, dtype=np.float64))


@dataclass(frozen=True)
class LszState:
    """Positions x, auxiliary velocities y, multipliers p and their time derivatives at one instant."""

    x: Vector2
    y: Vector2
    p: Vector2
    xdot: Vector2
    ydot: Vector2
    pdot: Vector2
    theta: float

    def replace(self, **changes: Vector2 | float) -> "LszState":
        """Return a copy with some fields changed."""
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return LszState(**values)  # type: ignore[arg-type]

    @staticmethod
    def random(rng: np.random.Generator, theta: float, scale: float = 3.0) -> "LszState":
        """
        Draw a state with every component uniform in [-scale, scale].

        Args:
            rng (np.random.Generator): The random source.
            theta (float): The noncommutativity scale.
            scale (float): Half-width of the sampling box.

        Returns:
            LszState: The sampled state.
        """
        draws = rng.uniform(-scale, scale, size=(6, 2))
        x, y, p, xdot, ydot, pdot = (tuple(float(v) for v in row) for row in draws)
        return LszState(x, y, p, xdot, ydot, pdot, theta)  # type: ignore[arg-type]


@dataclass(frozen=True)
class HpVariables:
    """External coordinates X and internal coordinates Q with their time derivatives."""

    X: Vector2
    Q: Vector2
    Xdot: Vector2
    Qdot: Vector2


class LszModel:
    """Lagrangians of the LSZ model in its three forms."""

    @staticmethod
    def lsz_lagrangian(xdot: Vector2, xddot: Vector2, theta: float) -> float:
        """L_LSZ = ẋ² / 2 + (θ/2) ε_{ij} ẋ_i ẍ_j."""
        velocity = _vec(xdot)
        return float(velocity @ velocity / 2.0 + theta / 2.0 * _wedge(velocity, xddot))

    @staticmethod
    def lagrangian_L0(s: LszState) -> float:
        """
        Evaluate the first-order form L⁽⁰⁾ = p_i (ẋ_i − y_i) + y_i² / 2 + (θ/2) ε_{ij} y_i ẏ_j.

        Args:
            s (LszState): The state.

        Returns:
            float: L⁽⁰⁾.
        """
        p, y = _vec(s.p), _vec(s.y)
        return float(p @ (_vec(s.xdot) - y) + y @ y / 2.0 + s.theta / 2.0 * _wedge(y, s.ydot))

    @staticmethod
    def hp_transform(s: LszState) -> HpVariables:
        """
        Change to X_i = x_i + θ ε_{ij} (y_j − p_j) and Q_i = θ (y_i − p_i).

        Args:
            s (LszState): The state.

        Returns:
            HpVariables: The new coordinates and their formal time derivatives.
        """
        gap = _vec(s.y) - _vec(s.p)
        gap_rate = _vec(s.ydot) - _vec(s.pdot)
        big_x = _vec(s.x) + s.theta * EPSILON @ gap
        big_xdot = _vec(s.xdot) + s.theta * EPSILON @ gap_rate
        return HpVariables(
            X=(float(big_x[0]), float(big_x[1])),
            Q=(float(s.theta * gap[0]), float(s.theta * gap[1])),
            Xdot=(float(big_xdot[0]), float(big_xdot[1])),
            Qdot=(float(s.theta * gap_rate[0]), float(s.theta * gap_rate[1])),
        )

    @staticmethod
    def external_lagrangian(s: LszState) -> float:
        """L_ext = p_i Ẋ_i + (θ/2) ε_{ij} p_i ṗ_j − p_i² / 2."""
        hp = LszModel.hp_transform(s)
        p = _vec(s.p)
        return float(p @ _vec(hp.Xdot) + s.theta / 2.0 * _wedge(p, s.pdot) - p @ p / 2.0)

    @staticmethod
    def internal_lagrangian(s: LszState) -> float:
        """
        L_int = (1/2θ) ε_{ij} Q_i Q̇_j + (1/2θ²) Q_i².

        Raises:
            LszDomainError: For θ = 0.
        """
        if s.theta == 0.0:
            raise LszDomainError("The internal Lagrangian is undefined at θ = 0")
        hp = LszModel.hp_transform(s)
        q = _vec(hp.Q)
        return float(_wedge(q, hp.Qdot) / (2.0 * s.theta) + q @ q / (2.0 * s.theta**2))

    @staticmethod
    def decomposition_residual(s: LszState) -> float:
        """
        Return L_ext + L_int − L⁽⁰⁾.

        The split holds up to the total derivative given by `boundary_term`.

        Raises:
            LszDomainError: For θ = 0.
        """
        return LszModel.external_lagrangian(s) + LszModel.internal_lagrangian(s) - LszModel.lagrangian_L0(s)

    @staticmethod
    def boundary_term(s: LszState) -> float:
        """(θ/2) d/dt (ε_{ij} p_i y_j) = (θ/2) ε_{ij} (ṗ_i y_j + p_i ẏ_j)."""
        return s.theta / 2.0 * (_wedge(s.pdot, s.y) + _wedge(s.p, s.ydot))
