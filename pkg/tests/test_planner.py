import math

import pytest

from vib2move.contact import ObjectModel
from vib2move.harness import PlantEnv, default_patch, state_from_relative
from vib2move.planner import (
    OrientationLimitError,
    PiState,
    PlannerConfig,
    PlanningProblem,
    SingularityError,
    check_reachability,
    pi_update,
    plan_and_execute,
    primitive_reorient,
    subgoal_centering,
    subgoal_orientation,
    subgoal_positioning,
)
from vib2move.se2 import PoseSE2, relative_pose, transform_point, wrap_angle

from conftest import state_with_contact_at


@pytest.fixture
def config():
    return PlannerConfig()


class TestReorientPrimitive:
    def test_noop_at_current_theta(self, paper_patch):
        st = state_with_contact_at(paper_patch, (0.01, 0.02), theta_o=0.2)
        out = primitive_reorient(st, st.finger_pose_w.theta)
        assert out.finger_pose_w == st.finger_pose_w
        assert out.object_pose_w == st.object_pose_w

    def test_relative_pose_preserved_bit_identical(self, paper_patch):
        st = state_with_contact_at(paper_patch, (0.01, 0.02), theta_o=0.2)
        rel0 = relative_pose(st.finger_pose_w, st.object_pose_w)
        out = primitive_reorient(st, st.finger_pose_w.theta + 0.3)
        rel1 = relative_pose(out.finger_pose_w, out.object_pose_w)
        assert rel1.x == pytest.approx(rel0.x, abs=1e-15)
        assert rel1.y == pytest.approx(rel0.y, abs=1e-15)
        assert rel1.theta == pytest.approx(rel0.theta, abs=1e-15)

    def test_com_moves_on_circle_about_fingertip(self, paper_patch, plate):
        st = state_with_contact_at(paper_patch, (0.015, 0.025), theta_o=0.1)
        tcp = st.finger_pose_w.position
        com0 = transform_point(st.object_pose_w, plate.com_offset)
        d0 = math.hypot(com0[0] - tcp[0], com0[1] - tcp[1])
        out = primitive_reorient(st, 0.9)
        com1 = transform_point(out.object_pose_w, plate.com_offset)
        d1 = math.hypot(com1[0] - tcp[0], com1[1] - tcp[1])
        assert d1 == pytest.approx(d0, abs=1e-12)
        assert out.finger_pose_w.position == tcp

    def test_limit_violation_raises(self, paper_patch):
        st = state_with_contact_at(paper_patch, (0.01, 0.02))
        with pytest.raises(OrientationLimitError):
            primitive_reorient(st, 1.6, limits=(-1.2, 1.5))


class TestSubgoals:
    def test_centering_noop_when_com_above(self, paper_patch, plate):
        st = state_with_contact_at(paper_patch, (0.0, -0.03))  # com straight above
        assert subgoal_centering(st, plate) == pytest.approx(st.finger_pose_w.theta, abs=1e-12)

    def test_centering_rotates_bearing_to_vertical(self, paper_patch, plate):
        # com at bearing 45 deg from the contact: rotate by +45 deg
        st = state_with_contact_at(paper_patch, (-0.02 / math.sqrt(2) * 1, -0.02 / math.sqrt(2)))
        target = subgoal_centering(st, plate)
        assert target == pytest.approx(st.finger_pose_w.theta + math.pi / 4, abs=1e-12)

    def test_centering_antipodal_flips_half_turn(self, paper_patch, plate):
        st = state_with_contact_at(paper_patch, (0.0, 0.03))  # com straight below
        target = subgoal_centering(st, plate)
        assert abs(wrap_angle(target - st.finger_pose_w.theta)) == pytest.approx(math.pi, abs=1e-12)

    def test_centering_singularity(self, paper_patch, plate):
        st = state_with_contact_at(paper_patch, (0.0, 1e-9))
        with pytest.raises(SingularityError):
            subgoal_centering(st, plate)

    def test_positioning_aligns_goal_over_contact(self, paper_patch, plate):
        st = state_with_contact_at(paper_patch, (0.0, 0.0))
        goal = PoseSE2(0.01, 0.005, 0.4)
        target = subgoal_positioning(st, plate, goal)
        out = primitive_reorient(st, target)
        from vib2move.se2 import compose

        goal_w = compose(out.object_pose_w, goal)
        f = out.finger_pose_w
        bearing = math.atan2(goal_w.y - f.y, goal_w.x - f.x)
        assert bearing == pytest.approx(math.pi / 2, abs=1e-9)

    def test_orientation_lever_sign_follows_error(self, paper_patch, plate):
        # positive orientation error needs the com left of vertical so the
        # induced rotation lowers the relative angle, and mirrored for
        # negative error
        st = state_with_contact_at(paper_patch, (0.01, 0.03), theta_o=0.0)
        for err_sign in (+1.0, -1.0):
            goal_theta = relative_pose(st.finger_pose_w, st.object_pose_w).theta - err_sign * math.radians(10)
            target = subgoal_orientation(st, plate, goal_theta, lever_angle=0.3, side="below")
            out = primitive_reorient(st, target)
            pc = transform_point(out.finger_pose_w, paper_patch.pressure_center_offset)
            com = transform_point(out.object_pose_w, plate.com_offset)
            assert math.copysign(1.0, com[0] - pc[0]) == -err_sign

    def test_orientation_needs_a_lever(self, paper_patch, plate):
        st = state_with_contact_at(paper_patch, (0.0, 1e-9))
        with pytest.raises(SingularityError):
            subgoal_orientation(st, plate, 0.3)


class TestPiUpdate:
    def test_zero_error_is_stable(self):
        pi = PiState()
        for _ in range(10):
            pi = pi_update(pi, (0.0, 0.0), (0.5, 0.1), r0=0.015)
        assert pi.pressure_center_estimate == (0.0, 0.0)

    def test_integral_action_on_constant_bias(self):
        # hand-computed discrete PI response to e = (1 mm, 0):
        # estimates 0.6, 1.3, 2.1 mm after 1..3 updates
        pi = PiState()
        expected = [0.0006, 0.0013, 0.0021]
        for want in expected:
            pi = pi_update(pi, (0.001, 0.0), (0.5, 0.1), r0=0.015)
            assert pi.pressure_center_estimate[0] == pytest.approx(want, rel=1e-12)
        assert pi.pressure_center_estimate[1] == 0.0

    def test_estimate_clamped_inside_patch(self):
        pi = PiState()
        for _ in range(100):
            pi = pi_update(pi, (0.01, 0.0), (0.5, 0.1), r0=0.015)
        assert math.hypot(*pi.pressure_center_estimate) <= 0.95 * 0.015 + 1e-12


class TestPlanExecution:
    def _problem(self, goal=PoseSE2(0.010, 0.005, math.radians(22.9))):
        obj = ObjectModel(mass=0.09, extents=(0.09, 0.15), com_offset=(0.0225, -0.0167))
        patch = default_patch()
        rel0 = PoseSE2(0.024, -0.045, 0.0)
        return PlanningProblem(goal, obj, patch), rel0

    def test_goal_equal_initial_is_immediate(self, config):
        obj = ObjectModel(mass=0.09, extents=(0.09, 0.15))
        patch = default_patch()
        rel0 = PoseSE2(0.004, -0.028, 0.1)
        env = PlantEnv(state_from_relative(rel0, patch), obj)
        result = plan_and_execute(PlanningProblem(rel0, obj, patch), env, config)
        assert [a.kind for a in result.actions] == ["observe"]
        assert result.final_error[0] < 1e-9

    def test_three_stage_plan_converges(self, config):
        problem, rel0 = self._problem()
        env = PlantEnv(state_from_relative(rel0, problem.patch), problem.obj)
        result = plan_and_execute(problem, env, config)
        assert result.final_error[0] < config.r_error
        assert result.final_error[1] < config.r_theta_error
        stages = {a.stage for a in result.actions if a.kind == "pulse"}
        assert stages == {1, 2, 3}

    def test_primitive_contracts_on_every_action(self, config):
        problem, rel0 = self._problem()
        env = PlantEnv(state_from_relative(rel0, problem.patch), problem.obj)
        plan_and_execute(problem, env, config)
        assert len(env.trace) > 6
        for rec in env.trace:
            if rec["kind"] == "reorient":
                b, a = rec["rel_before"], rec["rel_after"]
                assert a.x == pytest.approx(b.x, abs=1e-12)
                assert a.y == pytest.approx(b.y, abs=1e-12)
                assert wrap_angle(a.theta - b.theta) == pytest.approx(0.0, abs=1e-12)
            else:
                assert rec["finger_after"] == rec["finger_before"]

    def test_stage1_distance_non_increasing(self, config):
        problem, rel0 = self._problem()
        env = PlantEnv(state_from_relative(rel0, problem.patch), problem.obj)
        result = plan_and_execute(problem, env, config)
        run = [a.residual for a in result.actions if a.kind == "observe" and a.stage == 1]
        for earlier, later in zip(run, run[1:]):
            assert later <= earlier + 1e-9

    def test_stage3_position_drift_bounded(self, config):
        problem, rel0 = self._problem()
        env = PlantEnv(state_from_relative(rel0, problem.patch), problem.obj)
        result = plan_and_execute(problem, env, config)
        # position error after stage 2 vs final: rotation costs at most the
        # configured drift allowance, well under 2 * r_error
        assert result.final_error[0] < 2.0 * config.r_error

    def test_unreachable_goal_rejected_up_front(self, config):
        obj = ObjectModel(mass=0.09, extents=(0.09, 0.15))
        patch = default_patch()
        rel0 = PoseSE2(0.0, -0.025, 0.0)
        # goal straight below the center: positioning would need an
        # upside-down finger
        problem = PlanningProblem(PoseSE2(0.0, -0.035, 0.0), obj, patch)
        state = state_from_relative(rel0, patch)
        with pytest.raises(OrientationLimitError):
            check_reachability(state.finger_pose_w, state.object_pose_w, problem, config)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PlannerConfig(r_error=1e-6)
        with pytest.raises(ValueError):
            PlannerConfig(finger_orientation_limits=(1.0, -1.0))
        with pytest.raises(ValueError):
            PlannerConfig(lever_angle_stage3=2.0)
