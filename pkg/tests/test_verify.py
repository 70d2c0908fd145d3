"""Tests for the landing experiments and their report plumbing.

The desk instances here have closed-form or previously frozen oracles:
kappa = -2 keeps an attracting real fixed point (so the landing claims
apply), kappa = -1 is the parabolic with fixed point 0, and the period-2
wake rooted at 1 + pi i has characteristic addresses (|0,1), (|1,0)
whose rays co-land on the symmetry line Im kappa = pi.
"""

import json
import math

import pytest

from exporay.address import ExternalAddress as A
from exporay.address import enumerate_periodic
from exporay.parameter import find_characteristic_rays
from exporay.verify import (
    ExperimentReport,
    PathCrossesRay,
    verify_holomorphic_motion,
    verify_theorem1,
    verify_theorem2,
    verify_wake_persistence,
)

PI = math.pi
ZERO = A.parse("|0")


@pytest.fixture(scope="module")
def wake2():
    return find_characteristic_rays(1.5 + PI * 1j, 2, m_max=3, threads=4)


class TestTheorem1:
    def test_attracting_parameter_all_small_addresses(self):
        rep = verify_theorem1(-2.0, enumerate_periodic(2, 1), threads=4)
        assert rep.verdict == "pass"
        assert rep.exit_code() == 0
        assert len(rep.cases) == 9
        for c in rep.cases:
            assert c["outcome"] == "landed"
            assert c["stability"] == "repelling"
            assert c["ok"] is True
            assert c["matched_distance"] < 1e-6

    def test_parabolic_landing_at_zero(self):
        rep = verify_theorem1(-1.0, [ZERO])
        assert rep.verdict == "pass"
        c = rep.cases[0]
        assert c["stability"] == "indifferent"
        assert c["parabolic"] == [0, 1]
        assert abs(complex(*c["landing"])) < 1e-9
        assert c["multiplier"] == pytest.approx([1.0, 0.0], abs=1e-9)

    def test_rejects_preperiodic_address(self):
        with pytest.raises(ValueError):
            verify_theorem1(-2.0, [A.parse("1|0")])

    def test_escaping_parameter_is_inconclusive(self):
        # the nonescaping hypothesis fails, so nothing can pass or fail
        rep = verify_theorem1(50.0, [ZERO])
        assert rep.verdict == "inconclusive"
        assert rep.exit_code() == 3
        assert any("escaping_suspected" in n for n in rep.notes)


class TestTheorem2:
    def test_fixed_points_with_one_allowed_exception(self):
        rep = verify_theorem2(-2.0, 1, (-5.0, 5.0, -10.0, 10.0), 1, threads=4)
        assert rep.verdict == "pass"
        tally = rep.cases[-1]
        assert tally == {
            "orbits_found": 4,
            "covered": 3,
            "uncovered_repelling": 0,
            "uncovered_nonrepelling": 1,
        }
        orbit_cases = [c for c in rep.cases if "orbit" in c]
        lone = [c for c in orbit_cases if not c["covered"]]
        assert len(lone) == 1
        assert lone[0]["stability"] == "attracting"
        zero_case = next(c for c in orbit_cases if c["matched_address"] == "|0")
        assert zero_case["distance"] < 1e-6
        assert complex(*zero_case["orbit"][0]).real == pytest.approx(
            1.1461932206205825, abs=1e-9
        )

    def test_period_two_full_coverage(self):
        rep = verify_theorem2(-2.0, 2, (-6.0, 6.0, -10.0, 10.0), 2, threads=4)
        assert rep.verdict == "pass"
        tally = rep.cases[-1]
        assert tally["orbits_found"] == 4
        assert tally["covered"] == 4
        assert tally["uncovered_repelling"] == 0
        orbit_cases = [c for c in rep.cases if "orbit" in c]
        # mutual-nearest matching gives each orbit its own address
        matched = [c["matched_address"] for c in orbit_cases]
        assert len(set(matched)) == 4
        assert all(c["distance"] < 1e-6 for c in orbit_cases)
        assert all(c["period"] == 2 for c in orbit_cases)

    def test_zero_entry_bound_hints_at_widening(self):
        rep = verify_theorem2(-2.0, 2, (-6.0, 6.0, -10.0, 10.0), 0, threads=4)
        assert rep.verdict == "inconclusive"
        assert rep.exit_code() == 3
        assert any("widen the entry bound M (currently 0)" in n for n in rep.notes)
        tally = rep.cases[-1]
        assert tally["covered"] == 0
        assert tally["uncovered_repelling"] == 4

    def test_inputs_recorded(self):
        rep = verify_theorem2(-2.0, 1, (-5.0, 5.0, -10.0, 10.0), 1)
        assert rep.inputs["n"] == 1
        assert rep.inputs["M"] == 1
        assert rep.inputs["box"] == [-5.0, 5.0, -10.0, 10.0]
        assert rep.tolerances["match_tol"] == 1e-6


class TestHolomorphicMotion:
    def test_vertical_path_agrees_with_newton(self):
        path = [-2.0 + 0.3j * i / 9 for i in range(10)]
        rep = verify_holomorphic_motion(path, ZERO, threads=4)
        assert rep.verdict == "pass"
        point_cases = rep.cases[:-1]
        assert len(point_cases) == 10
        gaps = [c["newton_gap"] for c in point_cases if "newton_gap" in c]
        assert len(gaps) == 9
        assert max(gaps) < 1e-8
        assert all(c["continuity_ok"] for c in point_cases[1:])
        assert max(c["move_over_step"] for c in point_cases[1:]) < 1.0

    def test_cauchy_riemann_residual_is_tiny(self):
        path = [-2.0 + 0.3j * i / 9 for i in range(10)]
        rep = verify_holomorphic_motion(path, ZERO, threads=4)
        cr = rep.cases[-1]
        assert cr["cr_grid_step"] == 1e-3
        assert cr["cr_max_residual"] < 1e-9  # far under the 1e-7 gate
        assert cr["cr_threshold"] == pytest.approx(1e-7)

    def test_real_path_follows_real_fixed_point(self):
        path = [-2.0 - 1.0 * i / 9 for i in range(10)]
        rep = verify_holomorphic_motion(path, ZERO, threads=4)
        assert rep.verdict == "pass"
        zs = [complex(*c["landing"]) for c in rep.cases[:-1]]
        assert all(abs(z.imag) < 1e-9 for z in zs)
        # repelling real fixed point of e^z + kappa grows as kappa drops
        assert all(b.real > a.real for a, b in zip(zs, zs[1:]))
        assert zs[0].real == pytest.approx(1.1461932206205825, abs=1e-9)

    def test_degenerate_path_trivially_passes(self):
        rep = verify_holomorphic_motion([-2.0 + 0j], ZERO)
        assert rep.verdict == "pass"
        assert len(rep.cases) == 2  # one landing plus the grid summary

    def test_path_on_ray_rejected(self):
        # the zero-address parameter ray runs along the real axis right
        # of the landing parameter -1, so a point just off axis is too close
        with pytest.raises(PathCrossesRay) as info:
            verify_holomorphic_motion([5.0 + 1e-4j], ZERO)
        assert info.value.distance < 1e-3
        assert info.value.kappa == 5.0 + 1e-4j

    def test_rejects_preperiodic_address(self):
        with pytest.raises(ValueError):
            verify_holomorphic_motion([-2.0], A.parse("1|0"))

    def test_rejects_empty_path(self):
        with pytest.raises(ValueError):
            verify_holomorphic_motion([], ZERO)


class TestWakePersistence:
    def test_colanding_along_the_symmetry_line(self, wake2):
        probes = [a + PI * 1j for a in (1.05, 1.2, 1.35, 1.5, 1.6)]
        rep = verify_wake_persistence(wake2, probes, wake2.char_addresses,
                                      threads=4)
        assert rep.verdict == "pass"
        for c in rep.cases:
            assert c["outcome"] == "landed"
            assert c["coland_distance"] < 1e-9
        gaps = [c["continuation_gap"] for c in rep.cases if "continuation_gap" in c]
        assert len(gaps) == 4
        assert max(gaps) < 1e-8

    def test_perturbed_root_keeps_colanding(self, wake2):
        rep = verify_wake_persistence(wake2, [wake2.root.kappa + 0.01],
                                      wake2.char_addresses)
        assert rep.verdict == "pass"
        assert rep.cases[0]["coland_distance"] < 1e-9

    def test_outside_probe_reported_not_tested(self, wake2):
        rep = verify_wake_persistence(wake2, [-10.0 + 0j, 1.5 + PI * 1j],
                                      wake2.char_addresses)
        assert rep.verdict == "inconclusive"
        assert rep.cases[0]["outcome"] == "precondition_violated"
        assert rep.cases[0]["membership"] == "outside"
        assert rep.cases[1]["outcome"] == "landed"
        assert any("precondition" in n for n in rep.notes)

    def test_off_axis_probe_is_inconclusive(self, wake2):
        # the finite-depth chase cannot settle there; the honest verdict
        # is a budget limitation, never a co-landing failure
        rep = verify_wake_persistence(wake2, [1.5 + (PI + 0.3) * 1j],
                                      wake2.char_addresses)
        assert rep.verdict == "inconclusive"
        assert rep.cases[0]["outcome"] == "inconclusive"

    def test_rejects_nonperiodic_pair(self, wake2):
        with pytest.raises(ValueError):
            verify_wake_persistence(wake2, [1.5 + PI * 1j],
                                    (A.parse("1|0"), A.parse("|0,1")))

    def test_rejects_empty_probes(self, wake2):
        with pytest.raises(ValueError):
            verify_wake_persistence(wake2, [], wake2.char_addresses)


class TestReportPlumbing:
    def test_exit_codes(self):
        base = dict(experiment="x", inputs={}, tolerances={}, cases=())
        assert ExperimentReport(**base, verdict="pass").exit_code() == 0
        assert ExperimentReport(**base, verdict="fail").exit_code() == 2
        assert ExperimentReport(**base, verdict="inconclusive").exit_code() == 3

    def test_wall_time_excluded_from_comparison(self):
        base = dict(experiment="x", inputs={"a": 1}, tolerances={},
                    cases=(), verdict="pass")
        a = ExperimentReport(**base, wall_time=0.5)
        b = ExperimentReport(**base, wall_time=99.0)
        assert a == b
        assert a.comparable() == b.comparable()
        assert "wall_time" not in a.comparable()
        assert a.as_dict()["wall_time"] == 0.5

    def test_reruns_are_identical(self):
        a = verify_theorem1(-2.0, enumerate_periodic(1, 1), threads=1)
        b = verify_theorem1(-2.0, enumerate_periodic(1, 1), threads=4)
        assert a == b
        assert a.comparable() == b.comparable()

    def test_json_round_trip(self):
        rep = verify_theorem1(-2.0, [ZERO])
        d = json.loads(rep.as_json())
        assert d["verdict"] == "pass"
        assert d["experiment"] == "thm1"
        assert d["cases"][0]["address"] == "|0"
        assert isinstance(d["wall_time"], float)

    def test_text_summary(self):
        rep = verify_theorem1(-2.0, [ZERO])
        text = rep.text_summary()
        assert text.splitlines()[0] == "experiment: thm1"
        assert "verdict: PASS" in text
        assert "|0" in text
