#include <set>

#include "doctest.h"
#include "frlab/morphology.hpp"

using namespace frlab;

namespace {
MorphologySpec midpoint_spec(const MorphologyConfig& cfg) {
  MorphologySpec s;
  s.trunk_mass = cfg.trunk_mass.mid();
  s.trunk_length = cfg.trunk_length.mid();
  s.trunk_width = cfg.trunk_width.mid();
  s.trunk_height = cfg.trunk_height.mid();
  s.hip_mass = cfg.hip_mass.mid();
  s.hip_length = cfg.hip_length.mid();
  s.thigh_mass = cfg.thigh_mass.mid();
  s.thigh_length = cfg.thigh_length.mid();
  s.thigh_width = cfg.thigh_width.mid();
  s.thigh_height = cfg.thigh_height.mid();
  s.calf_mass = cfg.calf_mass.mid();
  s.calf_length = cfg.calf_length.mid();
  s.calf_width = cfg.calf_width.mid();
  s.calf_height = cfg.calf_height.mid();
  for (int leg = 0; leg < 4; ++leg)
    for (int j = 0; j < 3; ++j) {
      s.joint_limits_lower[3 * leg + j] = cfg.joint_lower[j];
      s.joint_limits_upper[3 * leg + j] = cfg.joint_upper[j];
    }
  s.torque_limit = cfg.torque_limit;
  s.foot_radius = cfg.foot_radius;
  return s;
}
}  // namespace

TEST_CASE("sampled morphologies stay inside the randomization table") {
  MorphologyConfig cfg;
  Rng rng(42);
  for (int i = 0; i < 10000; ++i) {
    MorphologySpec s = sample_morphology(rng, cfg);
    CHECK(s.trunk_mass >= 4.0);
    CHECK(s.trunk_mass <= 28.0);
    CHECK(s.calf_width >= 0.016);
    CHECK(s.calf_width <= 0.020);
    CHECK(!validate(s, cfg).has_value());
  }
}

TEST_CASE("sampling is a pure function of the seed") {
  MorphologyConfig cfg;
  Rng a(7), b(7);
  MorphologySpec sa = sample_morphology(a, cfg);
  MorphologySpec sb = sample_morphology(b, cfg);
  CHECK(sa.trunk_mass == sb.trunk_mass);
  CHECK(sa.calf_height == sb.calf_height);
  CHECK(sa.thigh_length == sb.thigh_length);
  Rng c(8);
  MorphologySpec sc = sample_morphology(c, cfg);
  CHECK(sa.trunk_mass != sc.trunk_mass);
}

TEST_CASE("thigh length draws cover at least 95% of their range") {
  MorphologyConfig cfg;
  Rng rng(3);
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 100000; ++i) {
    MorphologySpec s = sample_morphology(rng, cfg);
    lo = std::min(lo, s.thigh_length);
    hi = std::max(hi, s.thigh_length);
  }
  CHECK(lo >= 0.21);
  CHECK(hi <= 0.35);
  CHECK((hi - lo) / (0.35 - 0.21) >= 0.95);
}

TEST_CASE("control randomization ranges") {
  MorphologyConfig cfg;
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    ControlRandomization c = sample_control_randomization(rng, cfg);
    for (int j = 0; j < 12; ++j) {
      CHECK(c.kp[j] >= 20.0);
      CHECK(c.kp[j] <= 80.0);
      CHECK(c.kd[j] >= 0.6);
      CHECK(c.kd[j] <= 2.0);
      CHECK(c.motor_strength[j] >= 0.9);
      CHECK(c.motor_strength[j] <= 1.1);
    }
    CHECK(c.payload >= -2.0);
    CHECK(c.payload <= 2.0);
    CHECK(std::abs(c.com_shift[0]) <= 0.05);
  }
  Rng a(5), b(5);
  ControlRandomization ca = sample_control_randomization(a, cfg);
  ControlRandomization cb = sample_control_randomization(b, cfg);
  CHECK(ca.kp == cb.kp);
  CHECK(ca.payload == cb.payload);
}

TEST_CASE("mass vector extraction and payload composition") {
  MorphologyConfig cfg;
  MorphologySpec s = midpoint_spec(cfg);
  s.trunk_mass = 6.0;
  s.hip_mass = 0.5;
  s.thigh_mass = 1.0;
  s.calf_mass = 0.2;
  Vec4 m0 = mass_vector(s, 0.0);
  CHECK(m0[0] == 6.0);
  CHECK(m0[1] == 0.5);
  CHECK(m0[2] == 1.0);
  CHECK(m0[3] == 0.2);
  Vec4 m2 = mass_vector(s, 2.0);
  CHECK(m2[0] == 8.0);
  CHECK(m2[1] == 0.5);
  CHECK(m2[2] == 1.0);
  CHECK(m2[3] == 0.2);

  MorphologySpec mid = midpoint_spec(cfg);
  Vec4 mm = mass_vector(mid, 0.5);
  CHECK(mm[0] == doctest::Approx(16.5).epsilon(1e-12));
  CHECK(mm[1] == doctest::Approx(0.495).epsilon(1e-12));
  CHECK(mm[2] == doctest::Approx(2.3).epsilon(1e-12));
  CHECK(mm[3] == doctest::Approx(0.48).epsilon(1e-12));
}

TEST_CASE("mass vector is linear in payload") {
  MorphologyConfig cfg;
  Rng rng(19);
  MorphologySpec s = sample_morphology(rng, cfg);
  for (double a : {-1.0, 0.0, 0.7}) {
    double b = 1.3;
    Vec4 diff = mass_vector(s, a + b) - mass_vector(s, a);
    CHECK(diff[0] == doctest::Approx(b).epsilon(1e-12));
    CHECK(diff[1] == 0.0);
    CHECK(diff[2] == 0.0);
    CHECK(diff[3] == 0.0);
  }
}

TEST_CASE("validate reports the offending field") {
  MorphologyConfig cfg;
  MorphologySpec s = midpoint_spec(cfg);
  CHECK(!validate(s, cfg).has_value());

  s.trunk_mass = 3.0;
  auto err = validate(s, cfg);
  REQUIRE(err.has_value());
  CHECK(err->find("trunk_mass") != std::string::npos);

  s = midpoint_spec(cfg);
  s.calf_width = 0.021;
  err = validate(s, cfg);
  REQUIRE(err.has_value());
  CHECK(err->find("calf_width") != std::string::npos);

  s = midpoint_spec(cfg);
  s.joint_limits_lower[2] = s.joint_limits_upper[2] + 0.1;
  CHECK(validate(s, cfg).has_value());
}

TEST_CASE("mass normalization is zero at midpoints and unit at bounds") {
  MorphologyConfig cfg;
  Vec4 mid(16.0, 0.495, 2.3, 0.48);
  Vec4 n = normalize_mass_vector(mid, cfg);
  for (int i = 0; i < 4; ++i) CHECK(n[i] == doctest::Approx(0.0).epsilon(1e-12));
  Vec4 hi(28.0, 0.69, 4.0, 0.86);
  n = normalize_mass_vector(hi, cfg);
  for (int i = 0; i < 4; ++i) CHECK(n[i] == doctest::Approx(1.0).epsilon(1e-9));
}
