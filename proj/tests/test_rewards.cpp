#include <cmath>

#include "doctest.h"
#include "frlab/rewards.hpp"

using namespace frlab;

namespace {
Vec12 stand() { return standing_pose({0.0, 0.8, -1.5}); }
}  // namespace

TEST_CASE("orientation terms at the upright identity") {
  RewardConfig cfg;
  auto t = r_orientation(Eigen::Vector3d(0, 0, -1), stand(), stand(), cfg);
  CHECK(t[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t[1] == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(t[2] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(t[0] + t[1] + t[2] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("orientation terms when supine") {
  RewardConfig cfg;
  auto t = r_orientation(Eigen::Vector3d(0, 0, 1), stand(), stand(), cfg);
  CHECK(t[1] == doctest::Approx(6.0 * std::exp(-2.0 / (cfg.eps_gauss * cfg.eps_gauss))));
  CHECK(t[1] < 1e-10);
  CHECK(t[2] == 0.0);  // posture bonus gated off
}

TEST_CASE("orientation terms when side-lying") {
  RewardConfig cfg;  // eps_gauss = 0.25
  auto t = r_orientation(Eigen::Vector3d(0, 1, 0), stand(), stand(), cfg);
  CHECK(t[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(t[1] == doctest::Approx(6.0 * std::exp(-8.0)).epsilon(1e-9));
  CHECK(t[1] == doctest::Approx(2.0128e-3).epsilon(1e-3));
}

TEST_CASE("contact terms") {
  RewardConfig cfg;
  auto four = r_contact({true, true, true, true}, false, cfg);
  CHECK(four[0] == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(four[1] == 0.0);

  auto airborne = r_contact({false, false, false, false}, false, cfg);
  CHECK(airborne[0] + airborne[1] == 0.0);

  auto mixed = r_contact({true, false, true, false}, true, cfg);
  CHECK(mixed[0] + mixed[1] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("stability terms") {
  RewardConfig cfg;
  std::array<Eigen::Vector2d, 4> zero{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(),
                                      Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
  auto none = r_stability(zero, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), cfg);
  CHECK(none[0] == 0.0);
  CHECK(none[1] == 0.0);

  std::array<Eigen::Vector2d, 4> forces{Eigen::Vector2d(30, 0), Eigen::Vector2d(0, 20),
                                        Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
  auto loaded = r_stability(forces, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), cfg);
  CHECK(loaded[0] == doctest::Approx(-0.5).epsilon(1e-12));

  auto drifted =
      r_stability(zero, Eigen::Vector2d(5.0, 0.0), Eigen::Vector2d::Zero(), cfg);
  CHECK(drifted[1] == doctest::Approx(-0.4).epsilon(1e-12));  // clipped at 4 m
}

TEST_CASE("motion constraint terms") {
  RewardConfig cfg;
  Vec12 zero = Vec12::Zero();
  Vec12 lower = Vec12::Constant(-1.0), upper = Vec12::Constant(1.0);
  auto quiet = r_motion(zero, zero, zero, zero, zero, zero, lower, upper, cfg);
  for (double v : quiet) CHECK(v == 0.0);

  Vec12 q = zero;
  q[2] = 1.5;
  q[7] = -1.2;
  auto violated = r_motion(q, zero, zero, zero, zero, zero, lower, upper, cfg);
  CHECK(violated[0] == doctest::Approx(-2.0).epsilon(1e-12));

  Vec12 qd = Vec12::Constant(1.0);
  auto fast = r_motion(zero, qd, zero, zero, zero, zero, lower, upper, cfg);
  CHECK(fast[1] == doctest::Approx(-0.1 * 12 * 0.2).epsilon(1e-12));
  CHECK(fast[3] == doctest::Approx(-0.01 * 12).epsilon(1e-12));
}

TEST_CASE("composite total is the exact sum and the upright ideal scores 11.2") {
  RewardConfig cfg;
  RewardInputs in;
  in.gravity = Eigen::Vector3d(0, 0, -1);
  in.q = stand();
  in.q_stand = stand();
  in.qd.setZero();
  in.qdd.setZero();
  in.tau.setZero();
  in.action.setZero();
  in.prev_action.setZero();
  in.q_lower = Vec12::Constant(-3.0);
  in.q_upper = Vec12::Constant(3.5);
  in.feet_contact = {true, true, true, true};
  RewardBreakdown b = compute_rewards(in, cfg);
  CHECK(b.total == doctest::Approx(11.2).epsilon(1e-12));

  double sum = 0.0;
  for (double t : b.terms()) sum += t;
  CHECK(b.total == sum);  // exact additivity

  RewardBreakdown zeroed;
  CHECK(total(zeroed) == 0.0);

  // removing one term shifts the total by exactly that term
  RewardBreakdown c = b;
  double without = b.total - b.feet_contact;
  c.feet_contact = 0.0;
  CHECK(total(c) == doctest::Approx(without).epsilon(1e-15));
}

TEST_CASE("upright gaussian peaks uniquely at g_z = -1 and decays monotonically") {
  RewardConfig cfg;
  Vec12 q = stand();
  double best = -1e9;
  double best_gz = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    double theta = M_PI * i / 2000.0;  // polar angle sweep over unit gravity
    Eigen::Vector3d g(std::sin(theta), 0.0, -std::cos(theta));
    auto t = r_orientation(g, q, q, cfg);
    if (t[1] > best) {
      best = t[1];
      best_gz = g.z();
    }
  }
  CHECK(best_gz == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(best == doctest::Approx(6.0).epsilon(1e-9));

  double prev = 7.0;
  for (double gz1 = 0.0; gz1 <= 2.0; gz1 += 0.01) {
    Eigen::Vector3d g(0, std::sqrt(std::max(0.0, 1 - (gz1 - 1) * (gz1 - 1))), gz1 - 1.0);
    auto t = r_orientation(g.normalized(), q, q, cfg);
    CHECK(t[1] < prev);
    prev = t[1];
  }
}

TEST_CASE("sign discipline and clip bounds hold for random inputs") {
  RewardConfig cfg;
  Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    std::array<bool, 4> feet;
    for (auto& f : feet) f = rng.uniform() < 0.5;
    bool body = rng.uniform() < 0.5;
    auto con = r_contact(feet, body, cfg);
    CHECK(con[0] >= 0.0);
    CHECK(con[0] <= 1.2);
    CHECK(con[1] >= -0.2);

    Eigen::Vector2d cur(rng.uniform(-10, 10), rng.uniform(-10, 10));
    std::array<Eigen::Vector2d, 4> zero{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(),
                                        Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
    auto stab = r_stability(zero, cur, Eigen::Vector2d::Zero(), cfg);
    CHECK(stab[1] <= 0.0);
    CHECK(stab[1] >= -0.4);
  }
}

TEST_CASE("optional dt scaling multiplies every term") {
  RewardConfig cfg;
  cfg.scale_by_dt = true;
  RewardInputs in;
  in.gravity = Eigen::Vector3d(0, 0, -1);
  in.q = stand();
  in.q_stand = stand();
  in.q_lower = Vec12::Constant(-3.0);
  in.q_upper = Vec12::Constant(3.5);
  in.qd.setZero();
  in.qdd.setZero();
  in.tau.setZero();
  in.action.setZero();
  in.prev_action.setZero();
  in.feet_contact = {true, true, true, true};
  in.dt = 0.02;
  RewardBreakdown b = compute_rewards(in, cfg);
  CHECK(b.total == doctest::Approx(11.2 * 0.02).epsilon(1e-12));
}
