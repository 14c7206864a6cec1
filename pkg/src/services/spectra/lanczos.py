"""Thick-restart block Lanczos with full reorthogonalisation for symmetric operators."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Literal, NamedTuple

import numpy as np

if TYPE_CHECKING:
    from collections.abc import Callable

    import numpy.typing as npt

logger: logging.Logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE: float = 1e-8
DEFAULT_MAX_RESTARTS: int = 1000
# candidate directions whose norm drops below this fraction after projection are deflated
DEFLATION_TOLERANCE: float = 1e-10
MIN_EXTRA_DIMENSIONS: int = 40


class LanczosResult(NamedTuple):
    values: npt.NDArray[np.float64]
    vectors: npt.NDArray[np.float64]
    restarts: int
    max_residual: float


class LanczosConvergenceError(ArithmeticError):
    def __init__(
        self,
        restarts: int,
        converged: int,
        wanted: int,
        max_residual: float,
    ) -> None:
        self.restarts: int = restarts
        self.converged: int = converged
        self.wanted: int = wanted
        self.max_residual: float = max_residual
        super().__init__(
            f"Lanczos did not converge after {restarts} restarts: "
            f"{converged}/{wanted} eigenpairs converged, "
            f"largest scaled residual {max_residual:.3e}",
        )


def _orthogonalize(
    vector: npt.NDArray[np.float64],
    basis: npt.NDArray[np.float64],
) -> npt.NDArray[np.float64]:
    # two passes of classical Gram-Schmidt
    for _ in range(2):
        vector = vector - basis @ (basis.T @ vector)
    return vector


def _dense_fallback(
    matvec: Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]],
    n: int,
    k: int,
) -> LanczosResult:
    matrix: npt.NDArray[np.float64] = matvec(np.eye(n))
    values, vectors = np.linalg.eigh(0.5 * (matrix + matrix.T))
    order: npt.NDArray[np.int64] = np.argsort(-values, kind="stable")[:k]
    return LanczosResult(
        values=values[order],
        vectors=vectors[:, order],
        restarts=0,
        max_residual=0.0,
    )


def block_lanczos(
    matvec: Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]],
    n: int,
    k: int,
    rng: np.random.Generator,
    which: Literal["largest", "smallest"] = "largest",
    tolerance: float = DEFAULT_TOLERANCE,
    max_restarts: int = DEFAULT_MAX_RESTARTS,
    subspace_dimension: int | None = None,
) -> LanczosResult:
    """k extreme eigenpairs of a symmetric operator given by a block matvec.

    Values are returned from the requested end inwards. A pair counts as
    converged when ||A x - theta x|| <= tolerance * max(1, |theta|).
    When the search subspace would cover the whole space the operator is
    materialised and diagonalised densely.
    """
    if not 1 <= k <= n:
        error_msg: str = f"Requested {k} eigenpairs of an operator of size {n}"
        raise ValueError(error_msg)

    if which == "smallest":
        flipped: LanczosResult = block_lanczos(
            lambda x: -matvec(x),
            n,
            k,
            rng,
            which="largest",
            tolerance=tolerance,
            max_restarts=max_restarts,
            subspace_dimension=subspace_dimension,
        )
        return flipped._replace(values=-flipped.values)

    block_size: int = k
    dimension: int = min(
        n,
        subspace_dimension or max(2 * k + block_size, k + MIN_EXTRA_DIMENSIONS),
    )
    if dimension >= n:
        logger.debug("Lanczos subspace covers n=%d; using dense eigh", n)
        return _dense_fallback(matvec, n, k)

    basis: npt.NDArray[np.float64] = np.empty((n, dimension))
    images: npt.NDArray[np.float64] = np.empty((n, dimension))
    filled: int = 0
    candidates: npt.NDArray[np.float64] = rng.standard_normal((n, block_size))
    max_scaled_residual: float = np.inf
    converged: npt.NDArray[np.bool_] = np.zeros(k, dtype=np.bool_)
    for restart in range(max_restarts + 1):
        while filled < dimension:
            start: int = filled
            for column in candidates.T:
                if filled >= dimension:
                    break
                scale: float = max(float(np.linalg.norm(column)), np.finfo(float).tiny)
                vector: npt.NDArray[np.float64] = _orthogonalize(column, basis[:, :filled])
                norm: float = float(np.linalg.norm(vector))
                while norm <= DEFLATION_TOLERANCE * scale:
                    replacement: npt.NDArray[np.float64] = rng.standard_normal(n)
                    scale = float(np.linalg.norm(replacement))
                    vector = _orthogonalize(replacement, basis[:, :filled])
                    norm = float(np.linalg.norm(vector))
                basis[:, filled] = vector / norm
                filled += 1
            images[:, start:filled] = matvec(basis[:, start:filled])
            candidates = images[:, start:filled]

        projected: npt.NDArray[np.float64] = basis.T @ images
        ritz_values, ritz_coordinates = np.linalg.eigh(0.5 * (projected + projected.T))
        order: npt.NDArray[np.int64] = np.argsort(-ritz_values, kind="stable")
        ritz_values = ritz_values[order]
        ritz_coordinates = ritz_coordinates[:, order]

        wanted: npt.NDArray[np.float64] = ritz_coordinates[:, :k]
        ritz_vectors: npt.NDArray[np.float64] = basis @ wanted
        residuals: npt.NDArray[np.float64] = images @ wanted - ritz_vectors * ritz_values[:k]
        scaled: npt.NDArray[np.float64] = np.linalg.norm(residuals, axis=0) / np.maximum(
            1.0,
            np.abs(ritz_values[:k]),
        )
        converged = scaled <= tolerance
        max_scaled_residual = float(scaled.max())
        if converged.all():
            logger.debug(
                "Lanczos converged: k=%d restarts=%d residual=%.2e",
                k,
                restart,
                max_scaled_residual,
            )
            return LanczosResult(
                values=ritz_values[:k],
                vectors=ritz_vectors,
                restarts=restart,
                max_residual=max_scaled_residual,
            )

        keep: int = min(dimension - block_size, k + (dimension - k) // 2)
        kept: npt.NDArray[np.float64] = ritz_coordinates[:, :keep]
        basis[:, :keep] = basis @ kept
        images[:, :keep] = images @ kept
        filled = keep
        candidates = residuals[:, ~converged]

    raise LanczosConvergenceError(
        restarts=max_restarts,
        converged=int(converged.sum()),
        wanted=k,
        max_residual=max_scaled_residual,
    )


# trunk-ignore-begin(ruff/PLR2004,ruff/S101)
def _random_symmetric(n: int, seed: int) -> npt.NDArray[np.float64]:
    rng: np.random.Generator = np.random.default_rng(seed)
    matrix: npt.NDArray[np.float64] = rng.standard_normal((n, n))
    return 0.5 * (matrix + matrix.T)


def test_block_lanczos_matches_dense_largest_and_smallest() -> None:
    """Extreme eigenvalues agree with numpy.linalg.eigh."""
    matrix: npt.NDArray[np.float64] = _random_symmetric(150, 0)
    expected: npt.NDArray[np.float64] = np.linalg.eigvalsh(matrix)
    largest: LanczosResult = block_lanczos(
        lambda x: matrix @ x,
        150,
        4,
        np.random.default_rng(1),
    )
    np.testing.assert_allclose(largest.values, expected[::-1][:4], atol=1e-7)
    smallest: LanczosResult = block_lanczos(
        lambda x: matrix @ x,
        150,
        3,
        np.random.default_rng(2),
        which="smallest",
    )
    np.testing.assert_allclose(smallest.values, expected[:3], atol=1e-7)
    residual = matrix @ smallest.vectors - smallest.vectors * smallest.values
    scale = np.maximum(1.0, np.abs(smallest.values))
    assert np.all(np.linalg.norm(residual, axis=0) <= 1.01e-8 * scale)


def test_block_lanczos_handles_repeated_eigenvalues() -> None:
    """A threefold top eigenvalue is resolved by the block."""
    rng: np.random.Generator = np.random.default_rng(5)
    q, _ = np.linalg.qr(rng.standard_normal((120, 120)))
    spectrum: npt.NDArray[np.float64] = np.linspace(0.0, 1.0, 120)
    spectrum[-3:] = 2.0
    matrix: npt.NDArray[np.float64] = (q * spectrum) @ q.T
    result: LanczosResult = block_lanczos(lambda x: matrix @ x, 120, 3, rng)
    np.testing.assert_allclose(result.values, [2.0, 2.0, 2.0], atol=1e-7)
    gram = result.vectors.T @ result.vectors
    np.testing.assert_allclose(gram, np.eye(3), atol=1e-8)


def test_block_lanczos_dense_fallback_for_small_operators() -> None:
    """Small operators are diagonalised directly."""
    matrix: npt.NDArray[np.float64] = np.diag([3.0, 1.0, 2.0])
    result: LanczosResult = block_lanczos(
        lambda x: matrix @ x,
        3,
        2,
        np.random.default_rng(0),
    )
    assert result.restarts == 0
    np.testing.assert_allclose(result.values, [3.0, 2.0])


def test_block_lanczos_reports_non_convergence() -> None:
    """Exhausted restarts raise LanczosConvergenceError with diagnostics."""
    import pytest

    matrix: npt.NDArray[np.float64] = _random_symmetric(200, 3)
    with pytest.raises(LanczosConvergenceError, match="did not converge") as exc_info:
        block_lanczos(
            lambda x: matrix @ x,
            200,
            2,
            np.random.default_rng(0),
            tolerance=1e-30,
            max_restarts=2,
        )
    assert exc_info.value.restarts == 2
    assert exc_info.value.wanted == 2


def test_block_lanczos_rejects_bad_k() -> None:
    """k must lie in [1, n]."""
    import pytest

    with pytest.raises(ValueError, match="Requested"):
        block_lanczos(lambda x: x, 5, 0, np.random.default_rng(0))


# trunk-ignore-end(ruff/PLR2004,ruff/S101)
