"""
Uniform grid primitives: periodic coefficients, forward differences and the discrete exponential
"""

import numpy as np

from hus_hill.models import PeriodicCycle, Trajectory


class WindowError(Exception):
    """Index outside a trajectory window, or a window too short for the operation."""
    pass


def coefficient_at(c: PeriodicCycle, t: int) -> float:
    """λ at grid index t."""
    return c.values[t % c.n]


def cycle_window(c: PeriodicCycle, start: int, length: int) -> np.ndarray:
    """λ at grid indices start..start+length−1."""
    return np.take(c.as_array(), np.arange(start, start + length), mode="wrap")


def sample(tr: Trajectory, t: int) -> float:
    """
    Value of a trajectory at grid index t.

    Raises:
        WindowError: If t is outside the window
    """
    if t < tr.start or t > tr.end:
        raise WindowError(f"Index {t} outside window [{tr.start}, {tr.end}]")
    return float(tr.samples[t - tr.start])


def window_slice(tr: Trajectory, start: int, length: int) -> np.ndarray:
    """
    Samples at grid indices start..start+length−1.

    Raises:
        WindowError: If any index is outside the window
    """
    if length < 0 or start < tr.start or start + length - 1 > tr.end:
        raise WindowError(
            f"Indices [{start}, {start + length - 1}] outside window [{tr.start}, {tr.end}]"
        )
    offset = start - tr.start
    return tr.samples[offset:offset + length]


def delta_power(tr: Trajectory, t: int, order: int) -> float:
    """
    order-th forward h-difference of a trajectory at grid index t.

    Raises:
        WindowError: If t..t+order is not inside the window
    """
    values = window_slice(tr, t, order + 1)
    return float(np.diff(values, n=order)[0] / tr.h ** order) if order else float(values[0])


def delta_h(tr: Trajectory, t: int) -> float:
    """Δ_h x(t) = (x(t+h) − x(t)) / h."""
    return delta_power(tr, t, 1)


def delta2_h(tr: Trajectory, t: int) -> float:
    return delta_power(tr, t, 2)


def delta3_h(tr: Trajectory, t: int) -> float:
    return delta_power(tr, t, 3)


def discrete_exponential(c: PeriodicCycle, t: int) -> float:
    """
    e_λ(t) = ∏_{k<t} (1 + hλ_k); the empty product is 1.

    Zero factors are allowed here, callers that need an invertible
    exponential check for them.
    """
    result = 1.0
    for k in range(t):
        result *= 1.0 + c.h * coefficient_at(c, k)
    return result


def exponential_series(c: PeriodicCycle, length: int, start: int = 0) -> np.ndarray:
    """e_λ(t)/e_λ(start) for t = start..start+length−1, as a running product."""
    factors = 1.0 + c.h * cycle_window(c, start, length - 1)
    return np.concatenate(([1.0], np.cumprod(factors)))


def negate_cycle(c: PeriodicCycle) -> PeriodicCycle:
    """The cycle −λ with the same step size and period."""
    return PeriodicCycle(h=c.h, values=tuple(-v for v in c.values), check_minimal=c.check_minimal)


def shift_cycle(c: PeriodicCycle, shift: int) -> np.ndarray:
    """Values λ_{k+shift} for k = 0..n−1."""
    return np.roll(c.as_array(), -shift)
