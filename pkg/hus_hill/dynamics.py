"""
Simulation, residuals and ε-perturbed trajectories for the periodic h-difference equations

Every equation is written as L y(t) = f(t) with
L y = Δ^m y + a_{m−1}(t) Δ^{m−1} y + ... + a_0(t) y, where m is the order.
Higher-order families also factor into first-order stages (CASCADES),
which the bounded perturbation mode and the tracking module integrate
one stage at a time.
"""

import logging
import math
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from hus_hill import constants
from hus_hill.grid import WindowError, cycle_window, discrete_exponential, negate_cycle, window_slice
from hus_hill.models import EquationSpec, Family, PeriodicCycle, ResidualProfile, Sign, Trajectory
from hus_hill.stability import build_equation, k0_constant

logger = logging.getLogger("hus_hill.dynamics")


class DivergenceError(Exception):
    """A simulated sample exceeded the overflow limit."""
    pass


class Cascade(NamedTuple):
    """L_family ξ(t) = L_outer ψ(t + shift) with ψ(s) = L_inner ξ(s − shift)."""

    inner: Family
    outer: Family
    shift: int


CASCADES: Dict[Family, Cascade] = {
    Family.HILL: Cascade(inner=Family.FIRST_NONHOMOG, outer=Family.FIRST_HOMOG, shift=1),
    Family.HILL_NONHOMOG: Cascade(inner=Family.FIRST_NONHOMOG, outer=Family.FIRST_HOMOG, shift=1),
    Family.PQR: Cascade(inner=Family.FIRST_NONHOMOG, outer=Family.HILL, shift=2),
    Family.PQR2: Cascade(inner=Family.FIRST_HOMOG, outer=Family.HILL, shift=2),
    Family.PQR3: Cascade(inner=Family.HILL, outer=Family.FIRST_NONHOMOG, shift=2),
    Family.PQR4: Cascade(inner=Family.HILL, outer=Family.FIRST_HOMOG, shift=2),
}


def stage_families(family: Family) -> List[Family]:
    """First-order stages of a family, outer stage first."""
    if family.order == 1:
        return [family]
    cascade = CASCADES[family]
    return stage_families(cascade.outer) + stage_families(cascade.inner)


def effective_cycle(c: PeriodicCycle, family: Family) -> PeriodicCycle:
    """Cycle whose discrete exponential solves the homogeneous first-order equation."""
    return negate_cycle(c) if family.sign is Sign.PLUS else c


def expanding_stages(spec: EquationSpec) -> List[Family]:
    """First-order stages of `spec` with |e(nh)| > 1, where forward recursion grows."""
    c = spec.base_cycle
    return [
        stage for stage in stage_families(spec.family)
        if abs(discrete_exponential(effective_cycle(c, stage), c.n)) > 1.0 + constants.UNIT_MODULUS_TOL
    ]


def lower_coefficients(spec: EquationSpec, start: int, length: int) -> np.ndarray:
    """
    Coefficients a_0..a_{m−1} at grid indices start..start+length−1.

    Returns:
        Array of shape (m, length)
    """
    if spec.order == 1:
        lam = cycle_window(spec.coefficients[0], start, length)
        return np.array([-lam if spec.family.sign is Sign.MINUS else lam])
    if spec.order == 2:
        c = cycle_window(spec.coefficients[0], start, length)
        return np.array([c, np.zeros(length)])
    p, q, r = (cycle_window(cycle, start, length) for cycle in spec.coefficients)
    return np.array([r, q, p])


def recurrence_weights(spec: EquationSpec, start: int, length: int) -> np.ndarray:
    """
    Weights w with y(t+m) = Σ_i w_i(t) y(t+i) + h^m (f(t) + r(t)).

    Returns:
        Array of shape (length, m)
    """
    m, h = spec.order, spec.h
    coeffs = np.vstack([lower_coefficients(spec, start, length), np.ones(length)])
    beta = np.zeros((m + 1, length))
    for i in range(m + 1):
        for j in range(i, m + 1):
            beta[i] += coeffs[j] * math.comb(j, i) * (-1) ** (j - i) / h**j
    return (-beta[:m] * h**m).T


def forcing_values(spec: EquationSpec, start: int, length: int) -> np.ndarray:
    """
    f at grid indices start..start+length−1, zero without forcing.

    Raises:
        WindowError: If the forcing does not cover the indices
    """
    if spec.forcing is None:
        return np.zeros(length)
    return window_slice(spec.forcing, start, length)


def apply_operator(spec: EquationSpec, samples: np.ndarray, start: int = 0) -> np.ndarray:
    """
    L y at grid indices start..start+len(samples)−m−1.

    Raises:
        WindowError: If the samples are too short for the order
    """
    m, h = spec.order, spec.h
    length = len(samples) - m
    if length < 1:
        raise WindowError(f"Need at least {m + 1} samples for order {m}, got {len(samples)}")
    coeffs = lower_coefficients(spec, start, length)
    result = np.diff(samples, n=m)[:length] / h**m
    for j in range(m):
        result = result + coeffs[j] * np.diff(samples, n=j)[:length] / h**j
    return result


def residual(spec: EquationSpec, tr: Trajectory) -> Trajectory:
    """
    Pointwise residual L y − f of a trajectory.

    Raises:
        WindowError: If the trajectory is too short, or the forcing does not cover it
    """
    lhs = apply_operator(spec, tr.samples, tr.start)
    return Trajectory(h=tr.h, start=tr.start, samples=lhs - forcing_values(spec, tr.start, lhs.size))


def _advance(spec: EquationSpec, initial: Sequence[float], start: int, drive: np.ndarray) -> np.ndarray:
    m, h = spec.order, spec.h
    steps = drive.size
    weights = recurrence_weights(spec, start, steps)
    y = np.zeros(steps + m)
    y[:m] = initial
    scale = h**m
    for k in range(steps):
        value = float(weights[k] @ y[k:k + m]) + scale * drive[k]
        if not abs(value) <= constants.OVERFLOW_LIMIT:
            raise DivergenceError(
                f"Sample at index {start + k + m} reached {value:.3g}; window too long for this cycle"
            )
        y[k + m] = value
    return y


def simulate(
    spec: EquationSpec,
    initial: Sequence[float],
    window: int,
    start: int = 0,
) -> Trajectory:
    """
    Forward-iterate L y = f from m initial values.

    Args:
        spec: Equation to iterate
        initial: y(start)..y(start+m−1)
        window: Number of steps M; the trajectory has M+1 samples
        start: Grid index of the first sample

    Raises:
        ValueError: If the initial values or window do not match the order
        DivergenceError: If a sample exceeds the overflow limit
    """
    m = spec.order
    if len(initial) != m:
        raise ValueError(f"{spec.family.value} needs {m} initial values, got {len(initial)}")
    if window < m:
        raise ValueError(f"Window of {window} steps is shorter than the order {m}")
    drive = forcing_values(spec, start, window + 1 - m)
    return Trajectory(h=spec.h, start=start, samples=_advance(spec, initial, start, drive))


def simulate_first_order(
    c: PeriodicCycle, sign: Sign, forcing: Optional[Trajectory], y0: float, window: int
) -> Trajectory:
    """x(t+h) = (1+hλ)x(t) for sign '−'; y(t+h) = (1−hλ)y(t) + h f(t) for sign '+'."""
    return simulate(build_equation(Family.for_sign(sign), c, forcing), [y0], window)


def simulate_hill(
    c: PeriodicCycle, forcing: Optional[Trajectory], y0: float, y1: float, window: int
) -> Trajectory:
    """y(t+2h) = 2y(t+h) − y(t) − h² c(t) y(t) + h² f(t)."""
    family = Family.HILL if forcing is None else Family.HILL_NONHOMOG
    return simulate(build_equation(family, c, forcing), [y0, y1], window)


def simulate_third(
    c: PeriodicCycle,
    family: Family,
    y0: float,
    y1: float,
    y2: float,
    window: int,
    forcing: Optional[Trajectory] = None,
) -> Trajectory:
    if family.order != 3:
        raise ValueError(f"{family.value} is not a third-order family")
    return simulate(build_equation(family, c, forcing), [y0, y1, y2], window)


def solve_first_order_stable(
    family: Family, c: PeriodicCycle, drive: np.ndarray, start: int, anchor: float
) -> np.ndarray:
    """
    Solve a first-order stage L y = drive in its stable direction.

    Runs forward from y(start) = anchor when |e(nh)| < 1 and backward from
    y(end) = anchor when |e(nh)| > 1, so the result stays within
    K₀·sup|drive| of the anchored homogeneous solution.

    Returns:
        len(drive) + 1 samples starting at grid index `start`

    Raises:
        NotStableError, DegenerateError: If the stage has no stability constant
    """
    k0_constant(effective_cycle(c, family))
    h = c.h
    lam = cycle_window(c, start, drive.size)
    alpha = 1.0 + h * lam if family.sign is Sign.MINUS else 1.0 - h * lam
    e = discrete_exponential(effective_cycle(c, family), c.n)

    y = np.zeros(drive.size + 1)
    if abs(e) < 1.0:
        y[0] = anchor
        for k in range(drive.size):
            y[k + 1] = alpha[k] * y[k] + h * drive[k]
    else:
        y[-1] = anchor
        for k in range(drive.size - 1, -1, -1):
            y[k] = (y[k + 1] - h * drive[k]) / alpha[k]
    return y


def solve_bounded(
    family: Family, c: PeriodicCycle, drive: np.ndarray, start: int, anchors: List[float]
) -> np.ndarray:
    """
    Bounded solution of L y = drive, built stage by stage through CASCADES.

    Anchors are consumed outer stage first, one per first-order stage.

    Returns:
        len(drive) + order samples starting at grid index `start`
    """
    if family.order == 1:
        return solve_first_order_stable(family, c, drive, start, anchors.pop(0))
    cascade = CASCADES[family]
    psi = solve_bounded(cascade.outer, c, drive, start + cascade.shift, anchors)
    return solve_bounded(cascade.inner, c, psi, start, anchors)


def perturb(
    spec: EquationSpec,
    profile: ResidualProfile,
    initial: Optional[Sequence[float]] = None,
    window: Optional[int] = None,
    bounded: Optional[bool] = None,
    start: int = 0,
) -> Trajectory:
    """
    Trajectory whose residual under `spec` is the realized profile.

    Args:
        spec: Target equation
        profile: Residual profile, realized over the window
        initial: Initial values (forward mode) or stage anchors (bounded mode); zeros by default
        window: Number of steps M, default 64·n
        bounded: Integrate each first-order stage in its stable direction; None selects it
            whenever a stage expands, where forward recursion loses the profile to rounding
        start: Grid index of the first sample

    Raises:
        DivergenceError: If forward integration overflows
        NotStableError, DegenerateError: In bounded mode, if a stage is not stable
    """
    m = spec.order
    window = window if window is not None else constants.DEFAULT_WINDOW_PERIODS * spec.base_cycle.n
    values = list(initial) if initial is not None else [0.0] * m
    if window < m:
        raise ValueError(f"Window of {window} steps is shorter than the order {m}")
    if len(values) != m:
        raise ValueError(f"{spec.family.value} needs {m} initial values, got {len(values)}")

    count = window + 1 - m
    drive = forcing_values(spec, start, count) + profile.realize(count)

    if bounded is None:
        bounded = bool(expanding_stages(spec))
    if not bounded:
        samples = _advance(spec, values, start, drive)
    else:
        samples = solve_bounded(spec.family, spec.base_cycle, drive, start, values)
        if not np.all(np.abs(samples) <= constants.OVERFLOW_LIMIT):
            raise DivergenceError("Bounded perturbation overflowed")

    logger.debug(
        f"Perturbed {spec.family.value} over {window} steps "
        f"(profile={profile.pattern.value}, eps={profile.epsilon:g}, bounded={bounded})"
    )
    return Trajectory(h=spec.h, start=start, samples=samples)


def monodromy_matrix(spec: EquationSpec) -> np.ndarray:
    """Product of the companion matrices over one period of n steps."""
    m, n = spec.order, spec.base_cycle.n
    weights = recurrence_weights(spec, 0, n)
    monodromy = np.eye(m)
    for k in range(n):
        companion = np.zeros((m, m))
        companion[:-1, 1:] = np.eye(m - 1)
        companion[-1] = weights[k]
        monodromy = companion @ monodromy
    return monodromy


def floquet_multipliers(spec: EquationSpec) -> np.ndarray:
    """Eigenvalues of the monodromy matrix, sorted by real part."""
    values = np.linalg.eigvals(monodromy_matrix(spec))
    return values[np.argsort(values.real, kind="stable")]


def expected_multipliers(spec: EquationSpec) -> np.ndarray:
    """Multipliers predicted by the factor chain: e_λ(nh) per '−' stage, e_{−λ}(nh) per '+' stage."""
    c = spec.base_cycle
    values = np.array(
        [discrete_exponential(effective_cycle(c, stage), c.n) for stage in stage_families(spec.family)]
    )
    return np.sort(values)
