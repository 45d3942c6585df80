"""Batch pipeline: profile, gauge field, ω₀ and ω₂ tables, and the verification tasks."""

import logging
from collections.abc import Callable
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd

from ..core.exceptions import NCQMError, SingularProfileError
from ..core.fields import Gauge, GaugeField, GaugeSolver
from ..core.jacobi import JacobiChecker, StructureConstants
from ..core.lsz import LszModel, LszState
from ..core.quantum import QuantumCorrection
from ..core.symplectic import BivectorField4, DiracBrackets, PhaseIndexing
from ..core.taylor_jets import FloatArray
from .report import TaskRecord, VerificationReport, write_table
from .run_config import GRID_TASKS, RunConfig

logger = logging.getLogger(__name__)

OMEGA_COLUMNS = ["x", "y", *(PhaseIndexing.column_name(pair) for pair in PhaseIndexing.INDEPENDENT_PAIRS)]
PROFILE_COLUMNS = ["x", "y", "d", "Bx", "By"]

# The α → 0 limit is exact up to rounding
GLOBAL_LIMIT_TOLERANCE = 1e-12
# Values of ω₂ below this are compared in absolute terms
OMEGA2_FLOOR = 1e-4
# First and second partials compared by the round trip
_DERIVATIVE_ORDERS = ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2))

Point = tuple[float, float]


def _upper(matrix: FloatArray) -> list[float]:
    return [float(matrix[mu - 1, nu - 1]) for mu, nu in PhaseIndexing.INDEPENDENT_PAIRS]


class Runner:
    """Executes the tasks of one run configuration and collects their records."""

    def __init__(self, config: RunConfig, output_dir: Path) -> None:
        self.config = config
        self.output_dir = output_dir
        self.profile = config.profile
        self.theta = config.profile.theta
        self.report = VerificationReport(config)
        self.gauge_field: GaugeField = GaugeSolver.solve(self.profile, config.gauge)
        self.constraints = DiracBrackets.build_constraints(self.gauge_field, self.theta)
        self.omega0 = DiracBrackets.omega0_by_inversion(self.constraints)

    def run(self) -> VerificationReport:
        """
        Run every requested task in dependency order and write the report.

        Returns:
            VerificationReport: The collected records.
        """
        self.output_dir.mkdir(parents=True, exist_ok=True)
        tasks = self.config.tasks
        logger.info("Running %s with %s-gauge profile %s", ", ".join(tasks), self.config.gauge.name, self.profile)

        grid_error: SingularProfileError | None = None
        if any(task in GRID_TASKS for task in tasks):
            try:
                self.profile.validate_on_grid(self.config.grid.xs, self.config.grid.ys)
            except SingularProfileError as error:
                logger.error("Profile rejected on the grid: %s", error)  # noqa: TRY400
                grid_error = error

        handlers: dict[str, Callable[[], list[TaskRecord]]] = {
            "omega0": self.task_omega0,
            "omega2": self.task_omega2,
            "jacobi": self.task_jacobi,
            "roundtrip": self.task_roundtrip,
            "counterexample": self.task_counterexample,
            "lsz": self.task_lsz,
            "limits": self.task_limits,
        }
        for task in tasks:
            tolerance = self._tolerance(task)
            if grid_error is not None and task in GRID_TASKS:
                self.report.add(TaskRecord.failure(task, tolerance, grid_error))
                continue
            try:
                records = handlers[task]()
            except NCQMError as error:
                records = [TaskRecord.failure(task, tolerance, error)]
            for record in records:
                self.report.add(record)

        self.report.write(self.output_dir)
        return self.report

    def _tolerance(self, task: str) -> float:
        tolerances = self.config.tolerances
        return {
            "omega0": tolerances.omega0_match,
            "omega2": tolerances.omega2_match,
            "jacobi": tolerances.jacobi,
            "roundtrip": tolerances.roundtrip,
            "counterexample": tolerances.counterexample,
            "lsz": tolerances.lsz,
            "limits": tolerances.limits,
        }[task]

    def _write(self, name: str, rows: list[list[float]], columns: list[str]) -> None:
        frame = pd.DataFrame(rows, columns=columns)
        self.report.checksums[name] = write_table(frame, self.output_dir / name)

    @staticmethod
    def _grid_max(points: list[Point], residual: Callable[[Point], float]) -> tuple[float, Point | None]:
        worst, worst_point = 0.0, None
        for point in points:
            value = residual(point)
            if worst_point is None or value > worst:
                worst, worst_point = value, point
        return worst, worst_point

    # Tasks

    def task_omega0(self) -> list[TaskRecord]:
        """Tabulate ω₀ and compare the inversion, closed-form and worked-example constructions."""
        closed = DiracBrackets.omega0_closed_form(self.gauge_field, self.theta)
        others = [closed]
        if self.profile.is_linear_example:
            others.append(DiracBrackets.omega0_example_forms(self.profile, self.config.gauge))
        rows: list[list[float]] = []

        def residual(point: Point) -> float:
            matrix = self.omega0.matrix(*point)
            rows.append([point[0], point[1], *_upper(matrix)])
            return max(float(np.abs(matrix - other.matrix(*point)).max()) for other in others)

        worst, worst_point = self._grid_max(self.config.grid.points(), residual)
        self._write("omega0.csv", rows, OMEGA_COLUMNS)
        return [TaskRecord("omega0", worst, self.config.tolerances.omega0_match, worst_point)]

    def task_omega2(self) -> list[TaskRecord]:
        """Tabulate ω₂ from the general formula and check it against the block-by-block form."""
        omega0 = DiracBrackets.omega0_closed_form(self.gauge_field, self.theta)
        order = self.config.jet_order
        rows: list[list[float]] = []
        antisymmetry = 0.0

        def residual(point: Point) -> float:
            nonlocal antisymmetry
            general = QuantumCorrection.omega2_general(omega0, point, order)
            antisymmetry = max(antisymmetry, float(np.abs(general + general.T).max()))
            rows.append([point[0], point[1], *_upper(general)])
            blocks = QuantumCorrection.omega2_blocks(self.gauge_field, self.theta, point).matrix()
            scale = np.maximum(np.abs(general), OMEGA2_FLOOR)
            return float((np.abs(blocks - general) / scale).max())

        worst, worst_point = self._grid_max(self.config.grid.points(), residual)
        self._write("omega2.csv", rows, OMEGA_COLUMNS)
        logger.debug("Largest |ω₂ + ω₂ᵀ| on the grid: %.3e", antisymmetry)
        return [TaskRecord("omega2", worst, self.config.tolerances.omega2_match, worst_point)]

    def task_jacobi(self) -> list[TaskRecord]:
        """Check the classical Jacobi identity of ω₀ on the grid."""
        grid = self.config.grid
        worst = JacobiChecker.grid_maximum(self.omega0, grid.xs, grid.ys)
        return [TaskRecord("jacobi", worst.value, self.config.tolerances.jacobi, worst.point)]

    def task_roundtrip(self) -> list[TaskRecord]:
        """Recover d from the solved B field and compare with the prescribed profile."""
        prescribed = GaugeSolver.d_from_profile(self.profile)
        recovered = GaugeSolver.d_from_B(self.gauge_field, self.theta)
        other_gauge = Gauge.CHI if self.config.gauge is Gauge.PHI else Gauge.PHI
        other_field = GaugeSolver.solve(self.profile, other_gauge)
        value_error = derivative_error = gauge_gap = 0.0
        value_point: Point | None = None
        derivative_point: Point | None = None
        for point in self.config.grid.points():
            expected, actual = prescribed(*point, 2), recovered(*point, 2)
            difference = np.abs(expected.coeffs - actual.coeffs)
            if value_point is None or difference[0, 0] > value_error:
                value_error, value_point = float(difference[0, 0]), point
            derivatives = max(abs(expected.partial(a, b) - actual.partial(a, b)) for a, b in _DERIVATIVE_ORDERS)
            if derivative_point is None or derivatives > derivative_error:
                derivative_error, derivative_point = derivatives, point
            mine, theirs = self.gauge_field(*point, 0), other_field(*point, 0)
            gauge_gap = max(gauge_gap, abs(mine[0].value - theirs[0].value), abs(mine[1].value - theirs[1].value))
        logger.info("Largest |B(%s) − B(%s)| on the grid: %.6g", self.config.gauge.name, other_gauge.name, gauge_gap)
        tolerances = self.config.tolerances
        return [
            TaskRecord("roundtrip", value_error, tolerances.roundtrip, value_point),
            TaskRecord("roundtrip.derivatives", derivative_error, tolerances.roundtrip_derivatives, derivative_point),
        ]

    def task_counterexample(self) -> list[TaskRecord]:
        """Reproduce the Jacobi obstruction of a linear coordinate algebra with canonical momenta."""
        tolerance = self.config.tolerances.counterexample
        worst = 0.0
        for k, value in ((1, 1.0), (1, 2.5), (2, -0.75)):
            constants = StructureConstants.single(k, value)
            violations = JacobiChecker.linear_counterexample(constants, tolerance=tolerance)
            worst = max(worst, float(np.abs(np.abs(violations) - np.abs(constants.table)).max()))
        return [TaskRecord("counterexample", worst, tolerance)]

    def task_lsz(self) -> list[TaskRecord]:
        """Check the substitution identity and the sector split of the LSZ model on random states."""
        rng = np.random.default_rng(self.config.seed)
        worst_split = worst_substitution = 0.0
        for _ in range(self.config.lsz_samples):
            state = LszState.random(rng, self.theta)
            on_shell = state.replace(y=state.xdot)
            substitution = abs(
                LszModel.lagrangian_L0(on_shell) - LszModel.lsz_lagrangian(on_shell.xdot, on_shell.ydot, self.theta)
            )
            split = abs(LszModel.decomposition_residual(state) - LszModel.boundary_term(state))
            worst_split, worst_substitution = max(worst_split, split), max(worst_substitution, substitution)
        tolerances = self.config.tolerances
        return [
            TaskRecord("lsz", worst_split, tolerances.lsz),
            TaskRecord("lsz.substitution", worst_substitution, tolerances.lsz_substitution),
        ]

    def task_limits(self) -> list[TaskRecord]:
        """Compare ω₀ with the canonical matrix at small θ and with the constant-θ matrix at α = 0."""
        commutative = replace(self.profile, theta=self.config.limit_theta)
        near_canonical = DiracBrackets.omega0_closed_form(
            GaugeSolver.solve(commutative, self.config.gauge), commutative.theta
        )
        canonical = BivectorField4.canonical().matrix(0.0, 0.0)
        global_profile = replace(self.profile, alpha=0.0)
        global_bracket = DiracBrackets.omega0_by_inversion(
            DiracBrackets.build_constraints(GaugeSolver.solve(global_profile, self.config.gauge), self.theta)
        )
        constant = DiracBrackets.constant_theta(self.theta).matrix(0.0, 0.0)
        points = self.config.grid.points()
        theta_gap, theta_point = self._grid_max(
            points, lambda point: float(np.abs(near_canonical.matrix(*point) - canonical).max())
        )
        alpha_gap, alpha_point = self._grid_max(
            points, lambda point: float(np.abs(global_bracket.matrix(*point) - constant).max())
        )
        return [
            TaskRecord("limits", theta_gap, self.config.tolerances.limits, theta_point),
            TaskRecord("limits.global", alpha_gap, GLOBAL_LIMIT_TOLERANCE, alpha_point),
        ]


def run(config: RunConfig, output_dir: Path) -> VerificationReport:
    """
    Execute a run configuration.

    Args:
        config (RunConfig): The validated configuration.
        output_dir (Path): Where tables and reports are written; created if missing.

    Returns:
        VerificationReport: The report, also written as report.json and report.txt.
    """
    return Runner(config, output_dir).run()


def write_profile_table(config: RunConfig, output_dir: Path) -> Path:
    """
    Tabulate d and the gauge field on the grid as profile.csv.

    Args:
        config (RunConfig): The configuration; only profile, gauge and grid are used.
        output_dir (Path): The destination directory.

    Returns:
        Path: The written file.
    """
    config.profile.validate_on_grid(config.grid.xs, config.grid.ys)
    output_dir.mkdir(parents=True, exist_ok=True)
    density = GaugeSolver.d_from_profile(config.profile)
    gauge_field = GaugeSolver.solve(config.profile, config.gauge)
    rows = []
    for x, y in config.grid.points():
        bx, by = gauge_field(x, y, 0)
        rows.append([x, y, density(x, y, 0).value, bx.value, by.value])
    path = output_dir / "profile.csv"
    write_table(pd.DataFrame(rows, columns=PROFILE_COLUMNS), path)
    return path
