from __future__ import annotations

import logging
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

if TYPE_CHECKING:
    from collections.abc import Callable

    import numpy.typing as npt

logger: logging.Logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE: float = 1e-10
DEFAULT_MAX_ITERATIONS: int = 1000


class ConjugateGradientResult(NamedTuple):
    solution: npt.NDArray[np.float64]
    iterations: int
    relative_residual: float


class ConjugateGradientStagnationError(ArithmeticError):
    def __init__(self, iterations: int, relative_residual: float) -> None:
        self.iterations: int = iterations
        self.relative_residual: float = relative_residual
        super().__init__(
            f"Conjugate gradient stagnated after {iterations} iterations "
            f"with relative residual {relative_residual:.3e}",
        )


def conjugate_gradient(
    matvec: Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]],
    rhs: npt.NDArray[np.float64],
    preconditioner: Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]]
    | None = None,
    x0: npt.NDArray[np.float64] | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> ConjugateGradientResult:
    """Preconditioned CG for a symmetric positive-definite operator.

    Stops when ||b - A x|| <= tolerance * ||b||.
    """
    rhs_norm: float = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return ConjugateGradientResult(np.zeros_like(rhs), 0, 0.0)

    solution: npt.NDArray[np.float64] = (
        np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=np.float64)
    )
    residual: npt.NDArray[np.float64] = rhs - matvec(solution)
    relative: float = float(np.linalg.norm(residual)) / rhs_norm
    if relative <= tolerance:
        return ConjugateGradientResult(solution, 0, relative)

    precondition: Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]] = (
        preconditioner if preconditioner is not None else (lambda r: r)
    )
    z: npt.NDArray[np.float64] = precondition(residual)
    direction: npt.NDArray[np.float64] = z.copy()
    rz: float = float(residual @ z)
    for iteration in range(1, max_iterations + 1):
        image: npt.NDArray[np.float64] = matvec(direction)
        curvature: float = float(direction @ image)
        if curvature <= 0.0:
            error_msg: str = (
                f"Operator is not positive definite along the search direction "
                f"(p^T A p = {curvature:.3e}) at iteration {iteration}"
            )
            raise ArithmeticError(error_msg)

        alpha: float = rz / curvature
        solution += alpha * direction
        residual -= alpha * image
        relative = float(np.linalg.norm(residual)) / rhs_norm
        if relative <= tolerance:
            logger.debug("CG converged in %d iterations (residual %.2e)", iteration, relative)
            return ConjugateGradientResult(solution, iteration, relative)

        z = precondition(residual)
        rz_next: float = float(residual @ z)
        direction = z + (rz_next / rz) * direction
        rz = rz_next

    raise ConjugateGradientStagnationError(max_iterations, relative)


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def _spd_matrix(n: int, seed: int) -> npt.NDArray[np.float64]:
    rng: np.random.Generator = np.random.default_rng(seed)
    factor: npt.NDArray[np.float64] = rng.standard_normal((n, n))
    return factor @ factor.T + n * np.eye(n)


def test_conjugate_gradient_matches_direct_solve() -> None:
    """CG reaches the dense solution to the requested relative residual."""
    matrix: npt.NDArray[np.float64] = _spd_matrix(60, 0)
    rhs: npt.NDArray[np.float64] = np.random.default_rng(1).standard_normal(60)
    result: ConjugateGradientResult = conjugate_gradient(lambda x: matrix @ x, rhs)
    assert result.relative_residual <= 1e-10
    np.testing.assert_allclose(result.solution, np.linalg.solve(matrix, rhs), atol=1e-8)


def test_jacobi_preconditioner_reduces_iterations() -> None:
    """A badly scaled diagonal converges faster with its inverse as preconditioner."""
    scales: npt.NDArray[np.float64] = np.logspace(0, 3, 80)
    matrix: npt.NDArray[np.float64] = np.diag(scales) + 0.1 * np.ones((80, 80))
    rhs: npt.NDArray[np.float64] = np.ones(80)
    plain: ConjugateGradientResult = conjugate_gradient(
        lambda x: matrix @ x,
        rhs,
        max_iterations=10_000,
    )
    jacobi: ConjugateGradientResult = conjugate_gradient(
        lambda x: matrix @ x,
        rhs,
        preconditioner=lambda r: r / np.diag(matrix),
    )
    assert jacobi.iterations < plain.iterations
    np.testing.assert_allclose(jacobi.solution, np.linalg.solve(matrix, rhs), rtol=1e-6)


def test_conjugate_gradient_shortcuts() -> None:
    """Zero right-hand side and an exact start return without iterating."""
    matrix: npt.NDArray[np.float64] = _spd_matrix(10, 2)
    zero: ConjugateGradientResult = conjugate_gradient(lambda x: matrix @ x, np.zeros(10))
    assert zero.iterations == 0
    assert not zero.solution.any()
    exact: npt.NDArray[np.float64] = np.arange(10.0)
    started: ConjugateGradientResult = conjugate_gradient(
        lambda x: matrix @ x,
        matrix @ exact,
        x0=exact,
    )
    assert started.iterations == 0


def test_conjugate_gradient_stagnation() -> None:
    """Exhausting the iteration budget raises with a residual report."""
    import pytest

    matrix: npt.NDArray[np.float64] = _spd_matrix(40, 3)
    with pytest.raises(ConjugateGradientStagnationError, match="relative residual") as exc_info:
        conjugate_gradient(lambda x: matrix @ x, np.ones(40), max_iterations=1)
    assert exc_info.value.iterations == 1
    assert exc_info.value.relative_residual > 1e-10


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
