#include <stdexcept>

#include "doctest.h"
#include "frlab/config.hpp"

using namespace frlab;

TEST_CASE("defaults match the published tables") {
  Config c;
  CHECK(c.rewards.w_orientation == -0.5);
  CHECK(c.rewards.w_upright == 6.0);
  CHECK(c.rewards.w_posture == 4.0);
  CHECK(c.rewards.w_feet_contact == 0.3);
  CHECK(c.rewards.w_body_contact == -0.2);
  CHECK(c.rewards.w_knee_force == -1.0e-2);
  CHECK(c.rewards.w_body_bias == -0.1);
  CHECK(c.rewards.w_position_limits == -1.0);
  CHECK(c.rewards.w_ang_vel_limit == -0.1);
  CHECK(c.rewards.w_joint_acc == -2.5e-6);
  CHECK(c.rewards.w_joint_vel == -1.0e-2);
  CHECK(c.rewards.w_action_smooth == -0.01);
  CHECK(c.rewards.w_torque == -5.0e-4);
  CHECK(c.train.episode_length == 350);
  CHECK(c.sim.control_dt == 0.02);
  CHECK(c.sim.dt_physics() == doctest::Approx(0.005));
  CHECK(c.morphology.payload.lo == -2.0);
  CHECK(c.morphology.payload.hi == 2.0);
}

TEST_CASE("round trip through JSON keeps values") {
  Config c;
  c.train.envs = 17;
  c.ppo.lr = 1.25e-4;
  c.rewards.eps_gauss = 0.3;
  Config d = Config::from_json_text(c.to_json_text());
  CHECK(d.train.envs == 17);
  CHECK(d.ppo.lr == 1.25e-4);
  CHECK(d.rewards.eps_gauss == 0.3);
}

TEST_CASE("unknown keys are rejected with their path") {
  CHECK_THROWS_WITH_AS(Config::from_json_text("{\"nope\": 1}"),
                       doctest::Contains("unknown key"), std::runtime_error);
  CHECK_THROWS_WITH_AS(Config::from_json_text("{\"sim\": {\"gravityy\": 9.8}}"),
                       doctest::Contains("sim.gravityy"), std::runtime_error);
}

TEST_CASE("partial configs keep defaults elsewhere") {
  Config c = Config::from_json_text("{\"train\": {\"envs\": 8}}");
  CHECK(c.train.envs == 8);
  CHECK(c.train.episode_length == 350);
  CHECK(c.rewards.w_upright == 6.0);
}

TEST_CASE("type errors are reported") {
  CHECK_THROWS(Config::from_json_text("{\"train\": {\"envs\": \"many\"}}"));
  CHECK_THROWS(Config::from_json_text("{\"morphology\": {\"kp\": [1, 2, 3]}}"));
}
