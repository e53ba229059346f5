#include <cmath>

#include "doctest.h"
#include "frlab/observation.hpp"

using namespace frlab;

TEST_CASE("proprioceptive observation layout and gravity projection") {
  SimState s;
  s.base_ang_vel = Eigen::Vector3d(0.1, -0.2, 0.3);
  s.q = Vec12::Constant(0.5);
  s.qd = Vec12::Constant(-0.25);
  Vec12 prev = Vec12::Constant(0.125);
  VecXf o = build_o(s, prev);
  REQUIRE(o.size() == 42);
  // upright identity orientation
  CHECK(o[3] == doctest::Approx(0.0));
  CHECK(o[4] == doctest::Approx(0.0));
  CHECK(o[5] == doctest::Approx(-1.0));
  CHECK(o[0] == doctest::Approx(0.1));
  CHECK(o[6] == doctest::Approx(0.5));
  CHECK(o[18] == doctest::Approx(-0.25));
  CHECK(o[30] == doctest::Approx(0.125));

  s.base_quat = Eigen::Quaterniond(Eigen::AngleAxisd(M_PI, Eigen::Vector3d::UnitX()));
  o = build_o(s, prev);
  CHECK(o[5] == doctest::Approx(1.0));  // supine: ventral side up
  Eigen::Vector3d g = s.projected_gravity();
  CHECK(g.norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("history window pads, orders and evicts") {
  ObsHistory h;
  VecXf first = VecXf::Constant(kObsDim, 1.0f);
  h.reset(first);
  for (int i = 0; i < kHistoryLen; ++i) CHECK(h.frame(i) == first);

  for (int k = 2; k <= 5; ++k) h.push(VecXf::Constant(kObsDim, static_cast<float>(k)));
  for (int i = 0; i < kHistoryLen; ++i) CHECK(h.frame(i)[0] == doctest::Approx(i + 1.0f));

  h.push(VecXf::Constant(kObsDim, 6.0f));
  CHECK(h.frame(0)[0] == doctest::Approx(2.0f));  // oldest evicted
  CHECK(h.frame(4)[0] == doctest::Approx(6.0f));

  VecXf flat = h.flat();
  REQUIRE(flat.size() == 210);
  CHECK(flat[0] == doctest::Approx(2.0f));
  CHECK(flat[4 * kObsDim] == doctest::Approx(6.0f));
}

TEST_CASE("policy input is a pure concatenation with fixed boundaries") {
  VecXf o = VecXf::LinSpaced(kObsDim, 0.0f, 41.0f);
  Eigen::Vector4f m(100, 101, 102, 103);
  VecXf c = VecXf::LinSpaced(kContactDim, 200.0f, 212.0f);
  VecXf z = VecXf::LinSpaced(kLatentDim, 300.0f, 315.0f);
  VecXf p = build_p(o, m, c, z);
  REQUIRE(p.size() == 75);
  CHECK(p[41] == doctest::Approx(41.0f));
  CHECK(p[42] == doctest::Approx(100.0f));  // mass slot starts
  CHECK(p[46] == doctest::Approx(200.0f));  // contact slot starts
  CHECK(p[59] == doctest::Approx(300.0f));  // latent slot starts
  CHECK(p.segment(0, 42) == o);
  CHECK(p.segment(42, 4) == m.matrix());
  CHECK(p.segment(46, 13) == c);
  CHECK(p.segment(59, 16) == z);

  // ablation: zero predictor outputs leave [o, 0...0]
  VecXf p0 = build_p(o, Eigen::Vector4f::Zero(), VecXf::Zero(13), VecXf::Zero(16));
  CHECK(p0.segment(42, 33).cwiseAbs().maxCoeff() == 0.0f);
  CHECK(p0.size() == 75);
}

TEST_CASE("height scan on flat terrain and clipping") {
  TerrainConfig tcfg;
  ObservationConfig ocfg;
  Heightfield flat = generate_terrain(TerrainFamily::Flat, 1, 1, tcfg);
  SimState s;
  s.base_pos = Eigen::Vector3d(0.3, -0.2, 0.3);
  s.base_quat = Eigen::Quaterniond(Eigen::AngleAxisd(0.7, Eigen::Vector3d::UnitZ()));
  VecXf scan = height_scan(flat, s, ocfg);
  REQUIRE(scan.size() == 187);
  for (int i = 0; i < scan.size(); ++i) CHECK(scan[i] == doctest::Approx(0.3f));

  Heightfield pit = flat;
  pit.grid.setConstant(-2.0);
  scan = height_scan(pit, s, ocfg);
  for (int i = 0; i < scan.size(); ++i) CHECK(scan[i] == doctest::Approx(1.0f));  // clipped
}

TEST_CASE("privileged state concatenation recovers all slices") {
  VecXf o = VecXf::Random(kObsDim);
  VecXf scan = VecXf::Random(kScanDim);
  Eigen::Vector4f mass(11, 12, 13, 14);
  VecXf kpd = VecXf::Random(24);
  Eigen::Vector2f com(0.01f, -0.02f);
  VecXf flags = VecXf::Zero(kContactDim);
  Eigen::Vector4f forces = Eigen::Vector4f::Zero();
  VecXf s = build_s(o, scan, mass, kpd, com, flags, forces, 0.9f);
  REQUIRE(s.size() == 277);
  CHECK(s.segment(0, 42) == o);
  CHECK(s.segment(42, 187) == scan);
  CHECK(s.segment(229, 4) == mass.matrix());
  CHECK(s.segment(233, 24) == kpd);
  CHECK(s[257] == doctest::Approx(0.01f));
  CHECK(s.segment(259, 13).cwiseAbs().maxCoeff() == 0.0f);  // airborne: no contacts
  CHECK(s.segment(272, 4).cwiseAbs().maxCoeff() == 0.0f);
  CHECK(s[276] == doctest::Approx(0.9f));
}

TEST_CASE("normalizer converges on constant streams and is affine when frozen") {
  Normalizer n(3);
  Eigen::MatrixXf rows(50, 3);
  rows.setConstant(4.0f);
  for (int i = 0; i < 20; ++i) n.update(rows);
  VecXf x = VecXf::Constant(3, 4.0f);
  CHECK(n.normalize(x).cwiseAbs().maxCoeff() < 1e-3f);

  n.set_frozen(true);
  VecXf a = VecXf::Constant(3, 7.0f);
  VecXf r1 = n.normalize(a);
  n.update(rows);  // ignored while frozen
  VecXf r2 = n.normalize(a);
  CHECK(r1 == r2);
}

TEST_CASE("running mean matches the brute-force mean") {
  Rng rng(5);
  Normalizer n(2);
  std::vector<float> all0, all1;
  for (int batch = 0; batch < 20; ++batch) {
    Eigen::MatrixXf rows(37, 2);
    for (int i = 0; i < rows.rows(); ++i) {
      rows(i, 0) = static_cast<float>(rng.uniform(-3.0, 5.0));
      rows(i, 1) = static_cast<float>(rng.normal());
      all0.push_back(rows(i, 0));
      all1.push_back(rows(i, 1));
    }
    n.update(rows);
  }
  double m0 = 0, m1 = 0;
  for (float v : all0) m0 += v;
  for (float v : all1) m1 += v;
  m0 /= all0.size();
  m1 /= all1.size();
  CHECK(n.mean()[0] == doctest::Approx(m0).epsilon(1e-3));
  CHECK(n.mean()[1] == doctest::Approx(m1).epsilon(1e-3));
  double v0 = 0;
  for (float v : all0) v0 += (v - m0) * (v - m0);
  v0 /= all0.size();
  CHECK(n.var()[0] == doctest::Approx(v0).epsilon(1e-3));
}

TEST_CASE("observation noise respects per-channel magnitudes") {
  ObservationConfig cfg;
  Rng rng(9);
  VecXf o = VecXf::Zero(kObsDim);
  for (int trial = 0; trial < 200; ++trial) {
    VecXf noisy = o;
    apply_obs_noise(noisy, rng, cfg);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(noisy[i]) <= cfg.noise_ang_vel);
    for (int i = 3; i < 6; ++i) CHECK(std::abs(noisy[i]) <= cfg.noise_gravity);
    for (int i = 6; i < 18; ++i) CHECK(std::abs(noisy[i]) <= cfg.noise_q);
    for (int i = 18; i < 30; ++i) CHECK(std::abs(noisy[i]) <= cfg.noise_qd);
    for (int i = 30; i < 42; ++i) CHECK(noisy[i] == 0.0f);  // previous action untouched
  }
}
