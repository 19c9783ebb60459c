"""
Tracking solutions: exact solutions near ε-approximate trajectories

A first-order stage writes d = ψ − x, so d solves the homogeneous equation
driven by the residual of ψ. d is integrated from d = 0 forward when the
stage contracts (|e(nh)| < 1) and backward from the window end when it
expands, which keeps sup|d| ≤ K₀·ε on the window. Higher-order families
run their CASCADES: track ψ = L_inner ξ against the outer stage to get x,
then track ξ against L_inner η = x to get the exact solution η.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from hus_hill import constants
from hus_hill.dynamics import (
    CASCADES,
    apply_operator,
    effective_cycle,
    forcing_values,
    solve_first_order_stable,
)
from hus_hill.grid import cycle_window, discrete_exponential
from hus_hill.models import EquationSpec, Family, PeriodicCycle, Sign, Trajectory, TrackingResult
from hus_hill.stability import build_equation, k0_constant, s_sums

logger = logging.getLogger("hus_hill.tracking")


class InconclusiveError(Exception):
    """The window is too short for an expanding tail, or rounding swamps the residual."""
    pass


def _check_remainder(family: Family, c: PeriodicCycle, start: int, length: int, eps: float, k0: float) -> None:
    """
    Bound the part of an expanding stage's tracking solution beyond the window.

    The tail left out at the window start is at most
    ε·h·S_{end mod n}·|e| / ((|e| − 1)·|∏ α over the window|).

    Raises:
        InconclusiveError: If that bound exceeds REMAINDER_FRACTION · K₀ · ε
    """
    if eps == 0.0:
        return
    eff = effective_cycle(c, family)
    e = abs(discrete_exponential(eff, c.n))
    end = start + length - 1
    alpha = 1.0 + c.h * cycle_window(eff, start, length - 1)
    log_tail = math.log(eps * c.h * s_sums(eff).values[end % c.n] * e / (e - 1.0))
    remainder = math.exp(log_tail - float(np.sum(np.log(np.abs(alpha)))))
    logger.debug(f"Expanding stage {family.value}: window tail bound {remainder:.3g}")
    if remainder > constants.REMAINDER_FRACTION * k0 * eps:
        raise InconclusiveError(
            f"Tail bound {remainder:.3g} exceeds {constants.REMAINDER_FRACTION:g}·K₀·ε = "
            f"{constants.REMAINDER_FRACTION * k0 * eps:.3g}; use a longer window"
        )


def _track_stage(
    family: Family, c: PeriodicCycle, drive: np.ndarray, xi: np.ndarray, start: int, check_remainder: bool
) -> Tuple[np.ndarray, float]:
    """Exact solution of L_family y = drive near xi, and the constant it is certified with."""
    if family.order == 1:
        k0 = k0_constant(effective_cycle(c, family))
        r = apply_operator(build_equation(family, c), xi, start) - drive
        eps = float(np.max(np.abs(r)))
        if eps == 0.0:
            return xi.copy(), k0
        d = solve_first_order_stable(family, c, r, start, 0.0)
        if check_remainder and abs(discrete_exponential(effective_cycle(c, family), c.n)) > 1.0:
            _check_remainder(family, c, start, xi.size, eps, k0)
        return xi - d, k0

    cascade = CASCADES[family]
    psi = apply_operator(build_equation(cascade.inner, c), xi, start)
    x, k_outer = _track_stage(cascade.outer, c, drive, psi, start + cascade.shift, check_remainder)
    eta, k_inner = _track_stage(cascade.inner, c, x, xi, start, check_remainder)
    logger.debug(
        f"{family.value} cascade: outer {cascade.outer.value} K={k_outer:g}, inner {cascade.inner.value} K={k_inner:g}"
    )
    return eta, k_outer * k_inner


def track(spec: EquationSpec, trajectory: Trajectory, check_remainder: bool = True) -> TrackingResult:
    """
    Exact solution of `spec` near an approximate trajectory.

    Args:
        spec: Target equation
        trajectory: ε-approximate solution; ε is its sup residual
        check_remainder: Raise InconclusiveError when an expanding stage's tail is not negligible

    Returns:
        TrackingResult with the exact solution on the same window

    Raises:
        NotStableError, DegenerateError: If a needed constant is undefined
        InconclusiveError: If the window is too short for an expanding stage, or the exact
            solution misses RESIDUAL_TOL (forward-built trajectories of expanding cycles)
        WindowError: If the trajectory is too short for the order
    """
    xi = trajectory.samples
    m = spec.order
    drive = forcing_values(spec, trajectory.start, len(trajectory) - m)
    eps = float(np.max(np.abs(apply_operator(spec, xi, trajectory.start) - drive)))

    exact, constant = _track_stage(spec.family, spec.base_cycle, drive, xi, trajectory.start, check_remainder)
    exact_residual = float(np.max(np.abs(apply_operator(spec, exact, trajectory.start) - drive)))
    exact_scale = max(1.0, float(np.max(np.abs(exact)))) * max(1.0, spec.h ** -m)
    if exact_residual > constants.RESIDUAL_TOL * exact_scale:
        raise InconclusiveError(
            f"Exact solution residual {exact_residual:.3g} exceeds {constants.RESIDUAL_TOL:g}·scale = "
            f"{constants.RESIDUAL_TOL * exact_scale:.3g}; rounding swamps the residual, build the trajectory "
            f"in bounded mode"
        )
    deviation = float(np.max(np.abs(xi - exact)))
    certified = constant * eps
    ratio: Optional[float] = deviation / certified if certified > 0 else None

    logger.info(f"Tracked {spec.family.value} over {len(trajectory) - 1} steps: deviation={deviation:.3g} bound={certified:.3g}")
    return TrackingResult(
        exact=Trajectory(h=trajectory.h, start=trajectory.start, samples=exact),
        sup_deviation=deviation,
        certified_bound=certified,
        ratio=ratio,
        window=len(trajectory) - 1,
        epsilon=eps,
        constant=constant,
        exact_residual=exact_residual,
    )


def track_first_order(
    c: PeriodicCycle, sign: Sign, forcing: Optional[Trajectory], psi: Trajectory
) -> TrackingResult:
    return track(build_equation(Family.for_sign(sign), c, forcing), psi)


def track_hill(c: PeriodicCycle, forcing: Optional[Trajectory], xi: Trajectory) -> TrackingResult:
    family = Family.HILL if forcing is None else Family.HILL_NONHOMOG
    return track(build_equation(family, c, forcing), xi)


def track_third(
    c: PeriodicCycle, family: Family, xi: Trajectory, forcing: Optional[Trajectory] = None
) -> TrackingResult:
    if family.order != 3:
        raise ValueError(f"{family.value} is not a third-order family")
    return track(build_equation(family, c, forcing), xi)


def cascade_residual_identity_check(c: PeriodicCycle, family: Family, xi: Trajectory) -> float:
    """
    Max |L_family ξ(t) − L_outer ψ(t + shift)| with ψ(s) = L_inner ξ(s − shift).

    Holds for any sequence ξ, not only near-solutions.

    Raises:
        ValueError: For first-order families, which have no cascade
        WindowError: If ξ is too short for the order
    """
    if family.order == 1:
        raise ValueError(f"{family.value} has no cascade")
    cascade = CASCADES[family]
    lhs = apply_operator(build_equation(family, c), xi.samples, xi.start)
    psi = apply_operator(build_equation(cascade.inner, c), xi.samples, xi.start)
    rhs = apply_operator(build_equation(cascade.outer, c), psi, xi.start + cascade.shift)
    return float(np.max(np.abs(lhs - rhs)))
