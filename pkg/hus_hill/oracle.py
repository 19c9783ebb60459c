"""
Extremal-ratio oracle: empirical lower bounds on the Hyers-Ulam constant

For each residual sign pattern σ ∈ {−1, +1}^H the oracle builds ψ with
residual σ (ε = 1) and zero initial values, then measures how close the
nearest exact solution can get: min over solutions x of sup |ψ − x|.
The largest such distance divided by K is the reported ratio.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from hus_hill import constants
from hus_hill.dynamics import perturb, simulate
from hus_hill.models import EquationSpec, Family, OracleEstimate, PeriodicCycle, ProfilePattern, ResidualProfile
from hus_hill.stability import build_equation, composite_constant
from hus_hill.utils import worker_count

logger = logging.getLogger("hus_hill.oracle")

CHUNK_SIZE = 1024
MAX_TERNARY_STEPS = 400


def _response_matrix(spec: EquationSpec, horizon: int) -> np.ndarray:
    """Columns are the trajectories driven by a unit residual at one index, zero initial values."""
    window = horizon + spec.order - 1
    columns = []
    for s in range(horizon):
        unit = tuple(1.0 if i == s else 0.0 for i in range(horizon))
        profile = ResidualProfile(epsilon=1.0, pattern=ProfilePattern.EXPLICIT, values=unit)
        columns.append(perturb(spec, profile, window=window, bounded=False).samples)
    return np.column_stack(columns)


def _solution_basis(spec: EquationSpec, horizon: int) -> np.ndarray:
    """Columns are the homogeneous solutions with unit initial vectors."""
    window = horizon + spec.order - 1
    basis = []
    for i in range(spec.order):
        initial = [1.0 if j == i else 0.0 for j in range(spec.order)]
        basis.append(simulate(spec, initial, window).samples)
    return np.column_stack(basis)


def _min_deviation_first_order(psi: np.ndarray, e: np.ndarray) -> np.ndarray:
    """
    min over c of sup_t |ψ(t) − c·e(t)| for each row of psi.

    The objective is convex in c and its minimum lies in [min ψ/e, max ψ/e],
    so a ternary search on that bracket converges to it.
    """
    quotient = psi / e
    lo = quotient.min(axis=1)
    hi = quotient.max(axis=1)

    def deviation(c: np.ndarray) -> np.ndarray:
        return np.max(np.abs(psi - c[:, None] * e), axis=1)

    for _ in range(MAX_TERNARY_STEPS):
        if np.max(hi - lo) <= constants.TERNARY_WIDTH:
            break
        left = lo + (hi - lo) / 3.0
        right = hi - (hi - lo) / 3.0
        keep_left = deviation(left) <= deviation(right)
        hi = np.where(keep_left, right, hi)
        lo = np.where(keep_left, lo, left)
    return deviation((lo + hi) / 2.0)


def _min_deviation_lp(psi: np.ndarray, basis: np.ndarray) -> float:
    """Chebyshev distance from ψ to the span of the basis, as a linear program."""
    rows, m = basis.shape
    ones = np.ones((rows, 1))
    a_ub = np.vstack([np.hstack([basis, -ones]), np.hstack([-basis, -ones])])
    b_ub = np.concatenate([psi, -psi])
    cost = np.zeros(m + 1)
    cost[-1] = 1.0
    bounds = [(None, None)] * m + [(0, None)]
    result = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not result.success:
        logger.warning(f"Chebyshev fit did not converge: {result.message}")
        return float("nan")
    return float(result.fun)


def sign_patterns(horizon: int, budget: int, seed: Optional[int]) -> Tuple[np.ndarray, bool]:
    """
    Sign patterns to evaluate, first entry fixed to +1 since σ and −σ give the same distance.

    Random patterns start with the all-plus and alternating ones; at most `budget` are returned.

    Returns:
        (patterns of shape (count, horizon), exhaustive)
    """
    if budget < 1:
        raise ValueError(f"Pattern budget must be positive, got {budget}")
    if 2**horizon <= budget:
        index = np.arange(2 ** (horizon - 1))
        bits = (index[:, None] >> np.arange(horizon - 1)) & 1
        patterns = np.hstack([np.ones((index.size, 1), dtype=int), 1 - 2 * bits])
        return patterns, True

    rng = np.random.default_rng(seed)
    random = rng.choice([-1, 1], size=(max(budget - 2, 0), horizon))
    random *= random[:, :1]
    fixed = np.array([np.ones(horizon, dtype=int), np.where(np.arange(horizon) % 2 == 0, 1, -1)])
    return np.vstack([fixed, random])[:budget], False


def _evaluate_chunk(
    patterns: np.ndarray, offset: int, response: np.ndarray, basis: np.ndarray
) -> Tuple[float, int]:
    """Best (distance, pattern index) in a chunk; ties go to the lowest index."""
    psi = patterns @ response.T
    if basis.shape[1] == 1:
        distances = _min_deviation_first_order(psi, basis[:, 0])
    else:
        distances = np.array([_min_deviation_lp(row, basis) for row in psi])
    distances = np.where(np.isnan(distances), -np.inf, distances)
    best = int(np.argmax(distances))
    return float(distances[best]), offset + best


def extremal_ratio_oracle(
    c: PeriodicCycle,
    family: Family,
    horizon: Optional[int] = None,
    budget: int = constants.DEFAULT_ORACLE_BUDGET,
    seed: Optional[int] = constants.DEFAULT_SEED,
    max_workers: Optional[int] = None,
) -> OracleEstimate:
    """
    Search residual sign patterns for the one hardest to track.

    Args:
        c: Base cycle
        family: Equation family
        horizon: Number of residuals per pattern, default 4·n
        budget: Exhaustive search when 2^horizon ≤ budget, otherwise this many seeded random patterns
        seed: Seed for random patterns
        max_workers: Worker threads, capped by HUS_HILL_THREADS

    Returns:
        OracleEstimate with the best ratio against the family constant

    Raises:
        NotStableError, DegenerateError: If the family constant is undefined
    """
    constant = composite_constant(c, family)
    if horizon is None:
        horizon = constants.DEFAULT_ORACLE_PERIODS * c.n
    if horizon < 1:
        raise ValueError(f"Oracle horizon must be positive, got {horizon}")

    spec = build_equation(family, c)
    response = _response_matrix(spec, horizon)
    basis = _solution_basis(spec, horizon)
    patterns, exhaustive = sign_patterns(horizon, budget, seed)

    chunks: List[Tuple[int, np.ndarray]] = [
        (start, patterns[start:start + CHUNK_SIZE]) for start in range(0, len(patterns), CHUNK_SIZE)
    ]
    workers = worker_count(max_workers)
    logger.debug(f"Oracle {family.value}: {len(patterns)} patterns in {len(chunks)} chunks on {workers} workers")

    results: List[Tuple[float, int]] = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_chunk = {
            executor.submit(_evaluate_chunk, chunk, start, response, basis): start for start, chunk in chunks
        }
        for future in as_completed(future_to_chunk):
            results.append(future.result())

    best_distance, best_index = max(results, key=lambda item: (item[0], -item[1]))
    estimate = OracleEstimate(
        best_ratio=best_distance / constant,
        best_pattern=tuple(int(s) for s in patterns[best_index]),
        horizon=horizon,
        exhaustive=exhaustive,
        patterns_evaluated=len(patterns),
        constant=constant,
    )
    logger.info(
        f"Oracle {family.value}: best ratio {estimate.best_ratio:.6f} over {len(patterns)} patterns "
        f"(exhaustive={exhaustive})"
    )
    return estimate
