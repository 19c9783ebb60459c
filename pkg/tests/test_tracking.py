import math

import numpy as np
import pytest

from hus_hill import constants
from hus_hill.dynamics import perturb, simulate
from hus_hill.models import Family, PeriodicCycle, ProfilePattern, ResidualProfile, Sign, Trajectory
from hus_hill.stability import NotStableError, build_equation, composite_constant
from hus_hill.tracking import (
    InconclusiveError,
    cascade_residual_identity_check,
    track,
    track_first_order,
    track_hill,
    track_third,
)

from conftest import SOUNDNESS_CONFIGS, THIRD_ORDER, TRACKED_FAMILIES, make_cycle

EPSILON = 1e-3
RANDOM_PROFILES = 200


def _profiles():
    yield ResidualProfile(epsilon=EPSILON, pattern=ProfilePattern.CONSTANT_PLUS)
    yield ResidualProfile(epsilon=EPSILON, pattern=ProfilePattern.CONSTANT_MINUS)
    yield ResidualProfile(epsilon=EPSILON, pattern=ProfilePattern.ALTERNATING)
    for seed in range(RANDOM_PROFILES):
        yield ResidualProfile(epsilon=EPSILON, pattern=ProfilePattern.RANDOM_UNIFORM, seed=seed)


class TestSoundness:
    @pytest.mark.parametrize("values,h", SOUNDNESS_CONFIGS)
    @pytest.mark.parametrize("family", TRACKED_FAMILIES)
    def test_deviation_within_certified_bound(self, values, h, family):
        c = make_cycle(values, h)
        spec = build_equation(family, c)
        rng = np.random.default_rng(7)
        for profile in _profiles():
            anchors = list(rng.uniform(-1.0, 1.0, size=spec.order))
            xi = perturb(spec, profile, initial=anchors, bounded=True)
            result = track(spec, xi)
            assert result.within_bound, (profile, result.sup_deviation, result.certified_bound)
            assert result.exact_residual <= 1e-9 * max(1.0, result.exact.scale) / h**spec.order

    @pytest.mark.parametrize("values,h", SOUNDNESS_CONFIGS)
    @pytest.mark.parametrize("family", TRACKED_FAMILIES)
    def test_default_perturbation_within_bound(self, values, h, family):
        spec = build_equation(family, make_cycle(values, h))
        for pattern in (ProfilePattern.CONSTANT_PLUS, ProfilePattern.ALTERNATING, ProfilePattern.RANDOM_UNIFORM):
            xi = perturb(spec, ResidualProfile(epsilon=EPSILON, pattern=pattern, seed=30))
            result = track(spec, xi)
            assert result.epsilon <= EPSILON * (1 + 1e-6)
            assert result.within_bound, (pattern, result.sup_deviation, result.certified_bound)


class TestTrackExactness:
    @pytest.mark.parametrize("family", TRACKED_FAMILIES)
    def test_exact_solution_is_fixed(self, family, pi_cycle):
        spec = build_equation(family, pi_cycle)
        xi = simulate(spec, [1.0, 0.0, -1.0][: spec.order], 40)
        result = track(spec, xi)
        assert result.sup_deviation <= 1e-9 * xi.scale

    def test_zero_residual_has_no_ratio(self, small_cycle):
        spec = build_equation(Family.HILL, small_cycle)
        xi = Trajectory(h=1.0, start=0, samples=np.zeros(30))
        result = track(spec, xi)
        assert result.sup_deviation == 0.0
        assert result.ratio is None

    def test_exact_residual_vanishes(self, pi_cycle):
        spec = build_equation(Family.PQR3, pi_cycle)
        xi = perturb(spec, ResidualProfile(epsilon=EPSILON, seed=4), bounded=True)
        result = track(spec, xi)
        assert result.exact_residual <= 1e-8
        assert len(result.exact) == len(xi)

    def test_residual_above_tolerance_is_inconclusive(self, monkeypatch, pi_cycle):
        spec = build_equation(Family.PQR3, pi_cycle)
        xi = perturb(spec, ResidualProfile(epsilon=EPSILON, seed=4), bounded=True)
        # no exact solution can meet a negative tolerance
        monkeypatch.setattr(constants, "RESIDUAL_TOL", -1.0)
        with pytest.raises(InconclusiveError):
            track(spec, xi)


class TestFirstOrder:
    def test_constant_cycle_is_sharp(self):
        lam, h = 0.5, 1.0
        c = make_cycle((lam,), h)
        spec = build_equation(Family.FIRST_HOMOG, c)
        psi = perturb(spec, ResidualProfile(epsilon=EPSILON, pattern=ProfilePattern.CONSTANT_PLUS), bounded=True)
        result = track_first_order(c, Sign.MINUS, None, psi)
        assert result.constant == pytest.approx(1 / lam)
        assert result.ratio == pytest.approx(1.0, abs=1e-3)

    def test_small_cycle_bound(self, small_cycle):
        spec = build_equation(Family.FIRST_HOMOG, small_cycle)
        for seed in range(50):
            psi = perturb(spec, ResidualProfile(epsilon=EPSILON, seed=seed), initial=[0.3])
            result = track_first_order(small_cycle, Sign.MINUS, None, psi)
            assert result.constant == pytest.approx(16.0)
            assert result.within_bound

    def test_forcing(self, small_cycle):
        forcing = Trajectory(h=1.0, start=0, samples=np.sin(np.arange(200.0)))
        spec = build_equation(Family.FIRST_NONHOMOG, small_cycle, forcing)
        psi = perturb(spec, ResidualProfile(epsilon=EPSILON, seed=2), initial=[1.0], window=150)
        result = track_first_order(small_cycle, Sign.PLUS, forcing, psi)
        assert result.constant == pytest.approx(14.0)
        assert result.within_bound
        assert result.epsilon <= EPSILON * (1 + 1e-9)

    def test_inconclusive_short_window(self):
        c = make_cycle((0.01,), 1.0)
        spec = build_equation(Family.FIRST_HOMOG, c)
        psi = perturb(spec, ResidualProfile(epsilon=EPSILON, pattern=ProfilePattern.CONSTANT_PLUS), window=10)
        with pytest.raises(InconclusiveError):
            track(spec, psi)
        assert track(spec, psi, check_remainder=False).within_bound

    def test_not_stable(self):
        a = math.sqrt(2.0)
        c = make_cycle((0.0, a, -a), 1.0)
        xi = Trajectory(h=1.0, start=0, samples=np.linspace(0.0, 1.0, 20))
        with pytest.raises(NotStableError):
            track_hill(c, None, xi)


class TestHill:
    @pytest.mark.parametrize("lam", [0.2, 0.5, 0.9])
    def test_constant_cycle(self, lam):
        c = make_cycle((lam,), 1.0)
        spec = build_equation(Family.HILL, c)
        xi = perturb(spec, ResidualProfile(epsilon=EPSILON, seed=1), bounded=True)
        result = track_hill(c, None, xi)
        assert result.constant == pytest.approx(1 / lam**2)
        assert result.within_bound

    def test_small_cycle_constant(self, small_cycle):
        spec = build_equation(Family.HILL, small_cycle)
        xi = perturb(spec, ResidualProfile(epsilon=EPSILON, pattern=ProfilePattern.ALTERNATING), bounded=True)
        result = track_hill(small_cycle, None, xi)
        assert result.constant == pytest.approx(224.0)
        assert result.within_bound

    def test_forcing(self, pi_cycle):
        forcing = Trajectory(h=pi_cycle.h, start=0, samples=np.cos(np.arange(300.0)))
        spec = build_equation(Family.HILL_NONHOMOG, pi_cycle, forcing)
        xi = perturb(spec, ResidualProfile(epsilon=EPSILON, seed=5), window=128, bounded=True)
        result = track_hill(pi_cycle, forcing, xi)
        assert result.within_bound
        assert result.constant == pytest.approx(composite_constant(pi_cycle, Family.HILL))


class TestThirdOrder:
    def test_pi_cycle_constant(self, pi_cycle):
        h, pi = pi_cycle.h, math.pi
        expected = 2 * (1 + h * pi) * (2 - h * pi) ** 2 / (pi**3 * (3 + 2 * h * pi) * (3 - 2 * h * pi) ** 2)
        spec = build_equation(Family.PQR, pi_cycle)
        xi = perturb(spec, ResidualProfile(epsilon=EPSILON, seed=0), bounded=True)
        result = track_third(pi_cycle, Family.PQR, xi)
        assert result.constant == pytest.approx(expected, rel=1e-10)
        assert result.within_bound

    @pytest.mark.parametrize("family", THIRD_ORDER)
    def test_constant_cycle(self, family):
        lam = 0.4
        c = make_cycle((lam,), 1.0)
        spec = build_equation(family, c)
        xi = perturb(spec, ResidualProfile(epsilon=EPSILON, seed=8), bounded=True)
        result = track_third(c, family, xi)
        assert result.constant == pytest.approx(1 / lam**3)
        assert result.within_bound

    def test_rejects_hill(self, pi_cycle):
        xi = Trajectory(h=pi_cycle.h, start=0, samples=np.zeros(10))
        with pytest.raises(ValueError):
            track_third(pi_cycle, Family.HILL, xi)


class TestCascadeIdentity:
    @pytest.mark.parametrize("family", [Family.HILL] + THIRD_ORDER)
    @pytest.mark.parametrize(
        "cycle",
        [
            PeriodicCycle(h=0.5, values=(0.3, -0.7, 1.1)),
            PeriodicCycle(h=0.25, values=(math.pi, 2 * math.pi)),
            PeriodicCycle(h=1.0, values=(0.0, 0.5, -0.5)),
        ],
    )
    def test_identity_holds_for_any_sequence(self, family, cycle):
        rng = np.random.default_rng(11)
        for _ in range(100):
            start = int(rng.integers(0, 5))
            xi = Trajectory(h=cycle.h, start=start, samples=rng.uniform(-1.0, 1.0, size=25))
            discrepancy = cascade_residual_identity_check(cycle, family, xi)
            assert discrepancy <= 1e-10 * xi.scale / cycle.h**family.order

    def test_first_order_has_no_cascade(self, small_cycle):
        xi = Trajectory(h=1.0, start=0, samples=np.zeros(10))
        with pytest.raises(ValueError):
            cascade_residual_identity_check(small_cycle, Family.FIRST_HOMOG, xi)
