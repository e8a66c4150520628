import math

import numpy as np
import pytest

import quadtrain as qt


def test_chain_matches_foot_position():
    angles = qt.LegJointAngles(0.1, -0.4, 0.9)
    T = qt.leg_chain_transform(qt.LegId.FL, angles)
    assert T.shape == (4, 4)
    np.testing.assert_allclose(T[3], [0, 0, 0, 1])
    np.testing.assert_allclose(T[:3, :3] @ T[:3, :3].T, np.eye(3), atol=1e-12)


def test_ik_round_trip():
    angles = qt.LegJointAngles(0.05, 0.3, 1.1)
    foot = qt.foot_position_hip_frame(qt.LegId.BR, angles)
    solved, clamped = qt.leg_inverse_kinematics(qt.LegId.BR, foot)
    assert not clamped
    back = qt.foot_position_hip_frame(qt.LegId.BR, solved)
    np.testing.assert_allclose(back, foot, atol=1e-9)


def test_contact_threshold_is_strict():
    assert qt.contact_from_force([0.0, 0.0, 0.5], 0.5) == 0
    assert qt.contact_from_force([0.0, 0.0, 0.51], 0.5) == 1
    with pytest.raises(qt.ConfigError):
        qt.contact_from_force([0.0, 0.0, 1.0], 0.0)


def test_reward_substitution():
    assert qt.step_reward(0.02, 0.01, -0.02, [0.05, -0.03, 0.02]) == pytest.approx(-0.283, abs=1e-12)


def test_swing_apex_equals_clearance():
    p = qt.GaitParams()
    apex = qt.foot_trajectory(p.duty_factor + 0.5 * (1 - p.duty_factor), p)
    assert apex[2] == pytest.approx(p.clearance_height, abs=1e-12)


def test_observation_dims_and_zero_policy_action():
    w = qt.World()
    w.step_standing()
    for tag, dim in zip(qt.VARIANTS, (12, 16, 24)):
        v = qt.variant_from_tag(tag)
        assert qt.observation_dim(v) == dim
        obs = w.observation(v)
        assert obs.shape == (dim,)
        a = qt.act(qt.PolicyMatrix(v), obs)
        assert a["clearance"] == pytest.approx(0.03)
        assert all(np.allclose(d, 0.0) for d in a["deltas"])


def test_policy_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    p = qt.PolicyMatrix(qt.ObservationVariant.IMU_FORCE, rng.normal(size=(24, 14)))
    path = str(tmp_path / "p.txt")
    qt.save_policy(p, path)
    assert qt.load_policy(path) == p
    assert open(path).readline().split() == ["24", "14", "imu_force"]


def test_bad_policy_shape_rejected():
    with pytest.raises(qt.ContractViolation):
        qt.PolicyMatrix(qt.ObservationVariant.IMU, np.zeros((16, 14)))


def test_verify_grf_flat_and_incline():
    flat = qt.verify_grf(0.0)
    assert flat["status"] == "pass"
    assert abs(flat["resultant"] - 28.6) / 28.6 < 0.05
    inc = qt.verify_grf(5.0)
    assert abs(inc["tilt_deg"] - 5.0) <= 0.5
    with pytest.raises(qt.DomainError):
        qt.verify_grf(60.0)


def test_train_and_evaluate_are_deterministic():
    p1, c1 = qt.train("imu", epochs=2, seed=3, episode_steps=200)
    p2, c2 = qt.train("imu", epochs=2, seed=3, episode_steps=200, jobs=2)
    assert p1 == p2 and c1 == c2
    assert len(c1) == 2 and all(math.isfinite(v) for v in c1)
    rows = qt.evaluate_survival([p1], terrain_height=0.0, episodes=2, seed=4, max_steps=300)
    assert len(rows) == 2
    assert all(r[4] in ("fell", "reached_goal", "timed_out") for r in rows)
