"""
Data models for periodic cycles, trajectories, stability reports and tracking results
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from hus_hill import constants
from hus_hill.utils import minimal_period


class Sign(Enum):
    """Sign of the first-order equation.

    MINUS is the homogeneous equation Δx − λx = 0, PLUS is Δy + λy = f.
    """

    MINUS = "-"
    PLUS = "+"


class Family(Enum):
    """Equation family, fixing order, coefficients and the composite constant."""

    FIRST_HOMOG = "FirstHomog"
    FIRST_NONHOMOG = "FirstNonhomog"
    HILL = "Hill"
    HILL_NONHOMOG = "HillNonhomog"
    PQR = "PQR"
    PQR2 = "PQR2"
    PQR3 = "PQR3"
    PQR4 = "PQR4"

    @classmethod
    def from_string(cls, name: str) -> "Family":
        """
        Look up a family by name, ignoring case.

        Raises:
            ValueError: If the name is not a known family
        """
        for member in cls:
            if member.value.lower() == name.strip().lower():
                return member
        known = ", ".join(m.value for m in cls)
        raise ValueError(f"Unknown family '{name}' (expected one of: {known})")

    @property
    def order(self) -> int:
        if self in (Family.FIRST_HOMOG, Family.FIRST_NONHOMOG):
            return 1
        if self in (Family.HILL, Family.HILL_NONHOMOG):
            return 2
        return 3

    @property
    def sign(self) -> Optional[Sign]:
        """Sign of a first-order family, None otherwise."""
        if self is Family.FIRST_HOMOG:
            return Sign.MINUS
        if self is Family.FIRST_NONHOMOG:
            return Sign.PLUS
        return None

    @property
    def constant_powers(self) -> Tuple[int, int]:
        """Exponents (a, b) of the composite constant K₀(λ)^a · K₀(−λ)^b."""
        return _CONSTANT_POWERS[self]

    @classmethod
    def for_sign(cls, sign: Sign) -> "Family":
        return cls.FIRST_HOMOG if sign is Sign.MINUS else cls.FIRST_NONHOMOG


_CONSTANT_POWERS = {
    Family.FIRST_HOMOG: (1, 0),
    Family.FIRST_NONHOMOG: (0, 1),
    Family.HILL: (1, 1),
    Family.HILL_NONHOMOG: (1, 1),
    Family.PQR: (1, 2),
    Family.PQR3: (1, 2),
    Family.PQR2: (2, 1),
    Family.PQR4: (2, 1),
}


class Verdict(Enum):
    STABLE = "Stable"
    NOT_STABLE = "NotStable_UnitModulus"
    DEGENERATE = "Degenerate_ZeroFactor"


class ProfilePattern(Enum):
    CONSTANT_PLUS = "constant_plus"
    CONSTANT_MINUS = "constant_minus"
    ALTERNATING = "alternating"
    RANDOM_UNIFORM = "random_uniform"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class PeriodicCycle:
    """
    Periodic coefficient λ on the grid {0, h, 2h, ...}.

    Attributes:
        h: Step size, positive and finite
        values: Cycle values λ₀..λ_{n−1}
        check_minimal: Reject cycles whose values repeat with a proper divisor of n
    """

    h: float
    values: Tuple[float, ...]
    check_minimal: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not math.isfinite(self.h) or self.h <= 0:
            raise ValueError(f"Step size must be positive and finite, got {self.h}")
        if not self.values:
            raise ValueError("Cycle must have at least one value")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError(f"Cycle values must be finite: {self.values}")
        if self.check_minimal and not self.is_minimal:
            raise ValueError(
                f"Cycle {list(self.values)} repeats with period {minimal_period(self.values)}, "
                f"not its length {self.n}"
            )

    @classmethod
    def relaxed(cls, h: float, values: Any) -> "PeriodicCycle":
        """Build a cycle without the minimal-period check."""
        return cls(h=h, values=tuple(values), check_minimal=False)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def omega(self) -> float:
        """Period in time units."""
        return self.n * self.h

    @property
    def is_minimal(self) -> bool:
        return minimal_period(self.values) == self.n

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def to_dict(self) -> Dict[str, Any]:
        return {"h": self.h, "values": list(self.values), "n": self.n}


@dataclass(eq=False)
class Trajectory:
    """
    Real sequence on a finite window of the grid.

    Attributes:
        h: Step size
        start: Grid index of the first sample
        samples: Values at start, start+1, ...
    """

    h: float
    start: int
    samples: np.ndarray

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise ValueError("Trajectory needs a non-empty one-dimensional sample array")
        if self.start < 0:
            raise ValueError(f"Trajectory start index must be nonnegative, got {self.start}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("Trajectory samples must be finite")

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def end(self) -> int:
        """Grid index of the last sample."""
        return self.start + len(self) - 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.end + 1)

    @property
    def times(self) -> np.ndarray:
        return self.indices * self.h

    @property
    def scale(self) -> float:
        """max(1, sup |samples|), the reference for relative tolerances."""
        return max(1.0, float(np.max(np.abs(self.samples))))

    def to_dict(self) -> Dict[str, Any]:
        return {"h": self.h, "start": self.start, "samples": self.samples.tolist()}


@dataclass(frozen=True)
class SSums:
    """
    The n S-sums of a cycle with the index of the largest one.

    Attributes:
        values: S₀..S_{n−1}
        argmax_index: Lowest index attaining the maximum
        tie: Whether another index attains the maximum within rounding
    """

    values: Tuple[float, ...]
    argmax_index: int
    tie: bool = False

    @property
    def max(self) -> float:
        return self.values[self.argmax_index]

    def to_dict(self) -> Dict[str, Any]:
        return {"values": list(self.values), "argmax_index": self.argmax_index, "tie": self.tie}


@dataclass
class StabilityReport:
    """
    Verdict and constants for one cycle under one equation family.

    Attributes:
        cycle: Analysed cycle
        family: Family whose composite constant is reported
        e_pos: e_λ(nh)
        e_neg: e_{−λ}(nh)
        s_pos: S-sums of λ, None when a factor 1 + hλ_k vanishes
        s_neg: S-sums of −λ, None when a factor 1 − hλ_k vanishes
        k0_pos: K₀(λ) when defined
        k0_neg: K₀(−λ) when defined
        composite: Family constant, present only when k0_pos and k0_neg both are
        verdict: Overall verdict for the family
        minimal_pos: K₀(λ) is the minimum constant (|e_λ(nh)| > 1)
        minimal_neg: K₀(−λ) is the minimum constant (|e_{−λ}(nh)| > 1)
        selected_sums: Label of the maximizing sums entering the composite
        coefficient_period: Minimal common period of the derived coefficients
        notes: Diagnostics collected while building the report
    """

    cycle: PeriodicCycle
    family: Family
    e_pos: float
    e_neg: float
    s_pos: Optional[SSums]
    s_neg: Optional[SSums]
    k0_pos: Optional[float]
    k0_neg: Optional[float]
    composite: Optional[float]
    verdict: Verdict
    minimal_pos: bool = False
    minimal_neg: bool = False
    selected_sums: Optional[str] = None
    coefficient_period: Optional[int] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cycle": self.cycle.to_dict(),
            "family": self.family.value,
            "e_pos": self.e_pos,
            "e_neg": self.e_neg,
            "s_pos": self.s_pos.to_dict() if self.s_pos else None,
            "s_neg": self.s_neg.to_dict() if self.s_neg else None,
            "k0_pos": self.k0_pos,
            "k0_neg": self.k0_neg,
            "composite": self.composite,
            "verdict": self.verdict.value,
            "minimal_pos": self.minimal_pos,
            "minimal_neg": self.minimal_neg,
            "selected_sums": self.selected_sums,
            "coefficient_period": self.coefficient_period,
            "notes": list(self.notes),
        }


@dataclass
class EquationSpec:
    """
    A concrete equation: family, base cycle, derived coefficients and forcing.

    Attributes:
        family: Equation family
        base_cycle: The cycle λ the coefficients are derived from
        coefficients: (λ,) for first order, (c,) for Hill, (p, q, r) for third order
        forcing: Right-hand side f, zero when None
    """

    family: Family
    base_cycle: PeriodicCycle
    coefficients: Tuple[PeriodicCycle, ...]
    forcing: Optional[Trajectory] = None

    def __post_init__(self) -> None:
        expected = 3 if self.family.order == 3 else 1
        if len(self.coefficients) != expected:
            raise ValueError(
                f"{self.family.value} needs {expected} coefficient cycle(s), got {len(self.coefficients)}"
            )
        for cycle in self.coefficients:
            if self.base_cycle.n % cycle.n:
                raise ValueError(f"Coefficient period {cycle.n} does not divide {self.base_cycle.n}")

    @property
    def order(self) -> int:
        return self.family.order

    @property
    def h(self) -> float:
        return self.base_cycle.h


@dataclass(frozen=True)
class ResidualProfile:
    """
    Residual sequence injected when building an ε-approximate trajectory.

    Attributes:
        epsilon: Bound on every residual value
        pattern: Shape of the sequence
        values: Explicit residuals, repeated cyclically (pattern EXPLICIT only)
        seed: Seed for RANDOM_UNIFORM
    """

    epsilon: float
    pattern: ProfilePattern = ProfilePattern.RANDOM_UNIFORM
    values: Optional[Tuple[float, ...]] = None
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.epsilon) or self.epsilon < 0:
            raise ValueError(f"epsilon must be finite and nonnegative, got {self.epsilon}")
        if self.pattern is ProfilePattern.EXPLICIT:
            if not self.values:
                raise ValueError("Explicit residual profile needs values")
            bound = self.epsilon * (1 + 1e-12)
            if any(abs(v) > bound for v in self.values):
                raise ValueError(f"Explicit residuals must lie in [-{self.epsilon}, {self.epsilon}]")

    def realize(self, length: int) -> np.ndarray:
        """Residual values r(0..length−1)."""
        eps = self.epsilon
        if self.pattern is ProfilePattern.CONSTANT_PLUS:
            return np.full(length, eps)
        if self.pattern is ProfilePattern.CONSTANT_MINUS:
            return np.full(length, -eps)
        if self.pattern is ProfilePattern.ALTERNATING:
            return eps * np.where(np.arange(length) % 2 == 0, 1.0, -1.0)
        if self.pattern is ProfilePattern.EXPLICIT:
            assert self.values is not None
            return np.resize(np.asarray(self.values, dtype=float), length)
        rng = np.random.default_rng(self.seed)
        return rng.uniform(-eps, eps, size=length)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "pattern": self.pattern.value,
            "values": list(self.values) if self.values else None,
            "seed": self.seed,
        }


@dataclass
class TrackingResult:
    """
    Exact solution found near an ε-approximate trajectory.

    Attributes:
        exact: The exact solution on the input window
        sup_deviation: sup |input − exact|
        certified_bound: K·ε
        ratio: sup_deviation / (K·ε), None when K·ε is zero
        window: Number of steps in the window
        epsilon: Sup residual of the input
        constant: Stability constant K of the family
        exact_residual: Sup residual of the exact solution
    """

    exact: Trajectory
    sup_deviation: float
    certified_bound: float
    ratio: Optional[float]
    window: int
    epsilon: float
    constant: float
    exact_residual: float = 0.0

    @property
    def within_bound(self) -> bool:
        return self.sup_deviation <= self.certified_bound * (1 + constants.TRACKING_SLACK)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sup_deviation": self.sup_deviation,
            "certified_bound": self.certified_bound,
            "ratio": self.ratio,
            "window": self.window,
            "epsilon": self.epsilon,
            "constant": self.constant,
            "exact_residual": self.exact_residual,
            "within_bound": self.within_bound,
        }


@dataclass
class OracleEstimate:
    """
    Best deviation ratio found over residual sign patterns.

    Attributes:
        best_ratio: Largest min-over-solutions deviation divided by K·ε
        best_pattern: Sign pattern (+1/−1 per residual) achieving it
        horizon: Number of residuals in each pattern
        exhaustive: Whether every pattern was evaluated
        patterns_evaluated: Number of patterns evaluated
        constant: Stability constant K the ratios are measured against
    """

    best_ratio: float
    best_pattern: Tuple[int, ...]
    horizon: int
    exhaustive: bool
    patterns_evaluated: int = 0
    constant: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "best_ratio": self.best_ratio,
            "best_pattern": list(self.best_pattern),
            "horizon": self.horizon,
            "exhaustive": self.exhaustive,
            "patterns_evaluated": self.patterns_evaluated,
            "constant": self.constant,
        }
