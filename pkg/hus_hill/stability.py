"""
S-sums, Hyers-Ulam stability constants and coefficient builders

K₀(λ) = h|e_λ(nh)| / |1 − |e_λ(nh)|| · max S_k(λ) is the first-order constant;
composite constants of the higher-order families are products of K₀(λ) and
K₀(−λ) with the powers given by Family.constant_powers.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from hus_hill import constants
from hus_hill.grid import discrete_exponential, negate_cycle, shift_cycle
from hus_hill.models import (
    EquationSpec,
    Family,
    PeriodicCycle,
    SSums,
    StabilityReport,
    Trajectory,
    Verdict,
)
from hus_hill.utils import minimal_period

logger = logging.getLogger("hus_hill.stability")


class StabilityError(Exception):
    """Base class for cycles that admit no Hyers-Ulam stability constant."""
    pass


class NotStableError(StabilityError):
    """|e(nh)| = 1 within tolerance; the equation is not Hyers-Ulam stable."""
    pass


class DegenerateError(StabilityError):
    """A factor 1 ± hλ_k vanishes, or e(nh) = 0."""
    pass


def _factors(c: PeriodicCycle) -> np.ndarray:
    return 1.0 + c.h * c.as_array()


def has_zero_factor(c: PeriodicCycle) -> bool:
    return bool(np.any(np.abs(_factors(c)) <= constants.ZERO_FACTOR_TOL))


def is_unit_modulus(e: float) -> bool:
    return abs(abs(e) - 1.0) <= constants.UNIT_MODULUS_TOL


def s_sums(c: PeriodicCycle) -> SSums:
    """
    All n S-sums of a cycle.

    Term j of S_k is 1 / ∏_{i=0}^{j} |1 + hλ_{(k+i) mod n}|, j = 0..n−1.
    The argmax is the lowest index within rounding of the maximum.

    Raises:
        DegenerateError: If some factor 1 + hλ_k vanishes
    """
    if has_zero_factor(c):
        raise DegenerateError(f"Zero factor 1 + hλ_k in cycle {list(c.values)} with h={c.h}")

    factors = np.abs(_factors(c))
    values = tuple(float(np.sum(1.0 / np.cumprod(np.roll(factors, -k)))) for k in range(c.n))

    arr = np.asarray(values)
    peak = float(arr.max())
    near = np.flatnonzero(arr >= peak * (1.0 - 1e-12))
    return SSums(values=values, argmax_index=int(near[0]), tie=bool(near.size > 1))


def k0_constant(c: PeriodicCycle) -> float:
    """
    First-order Hyers-Ulam constant K₀(λ) of Δx − λx = 0.

    K₀(−λ) is k0_constant(negate_cycle(c)).

    Raises:
        DegenerateError: On a zero factor or e_λ(nh) = 0
        NotStableError: If |e_λ(nh)| = 1 within tolerance
    """
    sums = s_sums(c)
    e = discrete_exponential(c, c.n)
    if abs(e) <= constants.ZERO_FACTOR_TOL:
        raise DegenerateError(f"e(nh) = 0 for cycle {list(c.values)} with h={c.h}")
    if is_unit_modulus(e):
        raise NotStableError(f"|e(nh)| = {abs(e):.17g} is 1 within tolerance for cycle {list(c.values)}")
    return c.h * abs(e) / abs(1.0 - abs(e)) * sums.max


def _side(c: PeriodicCycle) -> Tuple[Optional[SSums], Optional[float], bool, bool]:
    """(sums, K₀, zero factor, unit modulus) for one sign of the cycle."""
    if has_zero_factor(c):
        return None, None, True, False
    sums = s_sums(c)
    e = discrete_exponential(c, c.n)
    if abs(e) <= constants.ZERO_FACTOR_TOL:
        return sums, None, True, False
    if is_unit_modulus(e):
        return sums, None, False, True
    return sums, c.h * abs(e) / abs(1.0 - abs(e)) * sums.max, False, False


def selected_sums_label(family: Family, s_pos: Optional[SSums], s_neg: Optional[SSums]) -> Optional[str]:
    """Label such as "S2(lambda)*S1(-lambda)" naming the sums in the composite constant."""
    pos, neg = family.constant_powers
    parts: List[str] = []
    for power, sums, name in ((pos, s_pos, "lambda"), (neg, s_neg, "-lambda")):
        if not power:
            continue
        if sums is None:
            return None
        part = f"S{sums.argmax_index}({name})"
        parts.append(part if power == 1 else f"{part}^{power}")
    return "*".join(parts)


def stability_report(c: PeriodicCycle, family: Family = Family.HILL) -> StabilityReport:
    """
    Verdict, S-sums and constants for a cycle under an equation family.

    Only the signs the family's constant needs decide the verdict; a zero
    factor takes precedence over unit modulus. Never raises for a bad cycle,
    the verdict carries the outcome.
    """
    negated = negate_cycle(c)
    e_pos = discrete_exponential(c, c.n)
    e_neg = discrete_exponential(negated, c.n)
    s_pos, k0_pos, zero_pos, unit_pos = _side(c)
    s_neg, k0_neg, zero_neg, unit_neg = _side(negated)

    pos, neg = family.constant_powers
    zero = (pos and zero_pos) or (neg and zero_neg)
    unit = (pos and unit_pos) or (neg and unit_neg)
    if zero:
        verdict = Verdict.DEGENERATE
    elif unit:
        verdict = Verdict.NOT_STABLE
    else:
        verdict = Verdict.STABLE

    # present only when both K₀ are, even for first-order families
    composite = None
    if verdict is Verdict.STABLE and k0_pos is not None and k0_neg is not None:
        composite = k0_pos**pos * k0_neg**neg

    notes: List[str] = []
    if not c.is_minimal:
        notes.append(f"cycle repeats with period {minimal_period(c.values)} < n={c.n}")

    report = StabilityReport(
        cycle=c,
        family=family,
        e_pos=e_pos,
        e_neg=e_neg,
        s_pos=s_pos,
        s_neg=s_neg,
        k0_pos=k0_pos,
        k0_neg=k0_neg,
        composite=composite,
        verdict=verdict,
        minimal_pos=k0_pos is not None and abs(e_pos) > 1.0,
        minimal_neg=k0_neg is not None and abs(e_neg) > 1.0,
        selected_sums=selected_sums_label(family, s_pos, s_neg),
        coefficient_period=coefficient_period(c, family),
        notes=notes,
    )
    if report.coefficient_period is not None and report.coefficient_period < c.n:
        message = f"derived coefficients repeat with period {report.coefficient_period} < n={c.n}"
        report.notes.append(message)
        logger.warning(f"{message}; keeping period {c.n}")

    logger.debug(f"Report for {family.value} {list(c.values)}: verdict={verdict.value} composite={composite}")
    return report


def hill_coefficient_cycle(c: PeriodicCycle) -> PeriodicCycle:
    """
    Hill coefficient Δ_hλ(t) − λ(t)λ(t+h) as an n-periodic cycle.

    Returns:
        Cycle with k-th value (λ_{k+1} − λ_k)/h − λ_k λ_{k+1}
    """
    lam = c.as_array()
    nxt = shift_cycle(c, 1)
    return PeriodicCycle.relaxed(c.h, (nxt - lam) / c.h - lam * nxt)


def third_order_coefficients(
    c: PeriodicCycle, family: Family
) -> Tuple[PeriodicCycle, PeriodicCycle, PeriodicCycle]:
    """
    Coefficient cycles (p, q, r) of Δ³y + pΔ²y + qΔy + ry = 0 for a third-order family.

    Args:
        c: Base cycle λ
        family: One of PQR, PQR2, PQR3, PQR4

    Returns:
        Three n-periodic cycles

    Raises:
        ValueError: If the family is not third order
    """
    h = c.h
    l0, l1, l2, l3 = (shift_cycle(c, j) for j in range(4))
    d0 = (l1 - l0) / h
    d1 = (l2 - l1) / h
    d2 = (l3 - l2) / h
    dd0 = (l2 - 2.0 * l1 + l0) / h**2

    if family is Family.PQR:
        p, q, r = l2, 2.0 * d1 + d2 - l2 * l3, dd0 + l0 * d2 - l0 * l2 * l3
    elif family is Family.PQR2:
        p, q, r = -l2, -2.0 * d1 + d2 - l2 * l3, -dd0 - l0 * d2 + l0 * l2 * l3
    elif family is Family.PQR3:
        p, q, r = l2, d1 - l1 * l2, dd0 - l0 * d1 - l0 * l1 * l2
    elif family is Family.PQR4:
        p, q, r = -l2, d1 - l1 * l2, dd0 - l1 * d1 - (l1 + l2) * d0 + l0 * l1 * l2
    else:
        raise ValueError(f"{family.value} is not a third-order family")

    return (
        PeriodicCycle.relaxed(h, p),
        PeriodicCycle.relaxed(h, q),
        PeriodicCycle.relaxed(h, r),
    )


def derived_coefficients(c: PeriodicCycle, family: Family) -> Tuple[PeriodicCycle, ...]:
    if family.order == 1:
        return (c,)
    if family.order == 2:
        return (hill_coefficient_cycle(c),)
    return third_order_coefficients(c, family)


def coefficient_period(c: PeriodicCycle, family: Family) -> int:
    """Minimal common period of the family's derived coefficient cycles."""
    cycles = derived_coefficients(c, family)
    periods = [minimal_period(cycle.values, tol=1e-12) for cycle in cycles]
    return int(np.lcm.reduce(periods))


def composite_constant(c: PeriodicCycle, family: Family) -> float:
    """
    Hyers-Ulam constant K of a family: K₀(λ)^a · K₀(−λ)^b with (a, b) = family.constant_powers.

    Raises:
        DegenerateError: On a zero factor of a needed sign
        NotStableError: On unit modulus of a needed sign
    """
    pos, neg = family.constant_powers
    result = 1.0
    if pos:
        result *= k0_constant(c) ** pos
    if neg:
        result *= k0_constant(negate_cycle(c)) ** neg
    return result


def build_equation(family: Family, c: PeriodicCycle, forcing: Optional[Trajectory] = None) -> EquationSpec:
    """EquationSpec of a family over a base cycle."""
    return EquationSpec(family=family, base_cycle=c, coefficients=derived_coefficients(c, family), forcing=forcing)
