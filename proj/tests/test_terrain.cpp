#include <cmath>

#include "doctest.h"
#include "frlab/terrain.hpp"

using namespace frlab;

TEST_CASE("flat family is zero everywhere") {
  TerrainConfig cfg;
  Heightfield hf = generate_terrain(TerrainFamily::Flat, 5, 1, cfg);
  CHECK(hf.height_at(0.0, 0.0) == 0.0);
  CHECK(hf.height_at(1.234, -2.345) == 0.0);
  CHECK(hf.height_at(100.0, 100.0) == 0.0);  // clamped outside
}

TEST_CASE("rough level 1 amplitude stays at or below 0.025 m") {
  TerrainConfig cfg;
  Heightfield hf = generate_terrain(TerrainFamily::Rough, 1, 9, cfg);
  CHECK(hf.grid.cwiseAbs().maxCoeff() <= 0.025 + 1e-12);
}

TEST_CASE("slope level 10 inclines at 40 degrees") {
  TerrainConfig cfg;
  Heightfield hf = generate_terrain(TerrainFamily::Slope, 10, 9, cfg);
  double rise = hf.height_at(1.0, 0.0) - hf.height_at(0.0, 0.0);
  CHECK(rise == doctest::Approx(std::tan(40.0 * M_PI / 180.0)).epsilon(1e-6));
}

TEST_CASE("bilinear interpolation identities") {
  Heightfield hf;
  hf.origin = Eigen::Vector2d(0.0, 0.0);
  hf.cell_size = 1.0;
  hf.grid.setZero(3, 3);
  hf.grid(1, 1) = 0.2;
  CHECK(hf.height_at(1.0, 1.0) == doctest::Approx(0.2));
  CHECK(hf.height_at(0.0, 2.0) == doctest::Approx(0.0));
  // midpoint between nodes (1,1)=0.2 and (1,2)=0 along y
  CHECK(hf.height_at(1.0, 1.5) == doctest::Approx(0.1));
  // midpoint between (1,1)=0.2 and (2,1)=0 along x
  CHECK(hf.height_at(1.5, 1.0) == doctest::Approx(0.1));
}

TEST_CASE("generation is pure in family, level and seed") {
  TerrainConfig cfg;
  Heightfield a = generate_terrain(TerrainFamily::DiscreteStones, 7, 123, cfg);
  Heightfield b = generate_terrain(TerrainFamily::DiscreteStones, 7, 123, cfg);
  CHECK(a.grid == b.grid);
  Heightfield c = generate_terrain(TerrainFamily::DiscreteStones, 7, 124, cfg);
  CHECK(a.grid != c.grid);
}

TEST_CASE("invalid level is rejected") {
  TerrainConfig cfg;
  CHECK_THROWS(generate_terrain(TerrainFamily::Rough, 0, 1, cfg));
  CHECK_THROWS(generate_terrain(TerrainFamily::Rough, 11, 1, cfg));
}

namespace {

// Family-specific difficulty scalar measured from the generated field.
double difficulty_scalar(TerrainFamily f, const Heightfield& hf) {
  switch (f) {
    case TerrainFamily::Rough:
      return hf.grid.cwiseAbs().maxCoeff();
    case TerrainFamily::Slope:
      return hf.height_at(1.0, 0.0) - hf.height_at(0.0, 0.0);
    case TerrainFamily::Stairs:
      return -hf.grid.minCoeff();  // deeper outer steps
    case TerrainFamily::DiscreteStones:
      return hf.grid.maxCoeff();
    case TerrainFamily::Gaps: {
      // longest trench run along x at y = 0
      int best = 0, run = 0;
      for (int i = 0; i < hf.grid.rows(); ++i) {
        if (hf.grid(i, hf.grid.cols() / 2) < -0.1) {
          run++;
          best = std::max(best, run);
        } else {
          run = 0;
        }
      }
      return best;
    }
    case TerrainFamily::Beams: {
      // narrowness of the beam containing y = 0 (at x = 0)
      int j0 = static_cast<int>(hf.grid.cols()) / 2;
      int i0 = static_cast<int>(hf.grid.rows()) / 2;
      int width = 0;
      for (int j = j0; j < hf.grid.cols() && hf.grid(i0, j) >= -0.01; ++j) width++;
      for (int j = j0 - 1; j >= 0 && hf.grid(i0, j) >= -0.01; --j) width++;
      return -width;
    }
    default:
      return 0.0;
  }
}

}  // namespace

TEST_CASE("difficulty scalars are nondecreasing in level") {
  TerrainConfig cfg;
  for (TerrainFamily f : {TerrainFamily::Rough, TerrainFamily::Slope, TerrainFamily::Stairs,
                          TerrainFamily::DiscreteStones, TerrainFamily::Gaps,
                          TerrainFamily::Beams}) {
    double prev = -1e18;
    for (int level = 1; level <= 10; ++level) {
      Heightfield hf = generate_terrain(f, level, 5, cfg);
      double d = difficulty_scalar(f, hf);
      CHECK_MESSAGE(d >= prev - 1e-9, to_string(f) << " level " << level);
      prev = d;
    }
  }
}

TEST_CASE("every family keeps solid ground at the spawn center") {
  TerrainConfig cfg;
  for (TerrainFamily f : {TerrainFamily::Rough, TerrainFamily::Slope, TerrainFamily::Stairs,
                          TerrainFamily::DiscreteStones, TerrainFamily::Gaps,
                          TerrainFamily::Beams}) {
    for (int level : {1, 5, 10}) {
      Heightfield hf = generate_terrain(f, level, 31, cfg);
      CHECK(std::isfinite(hf.height_at(0.0, 0.0)));
      if (f == TerrainFamily::Gaps || f == TerrainFamily::Beams)
        CHECK(hf.height_at(0.0, 0.0) >= -1e-9);
    }
  }
}

TEST_CASE("curriculum promotion, demotion and floor") {
  Rng rng(1);
  CurriculumState cs;
  cs.level = 3;
  CurriculumState up = update_level(cs, true, 0.5, rng);
  CHECK(up.level == 4);
  CHECK(up.promotions == 1);

  cs.level = 1;
  CurriculumState down = update_level(cs, false, 0.0, rng);
  CHECK(down.level == 1);
  CHECK(down.demotions == 1);

  cs.level = 5;
  CurriculumState stay = update_level(cs, true, 1.5, rng);  // success but drifted
  CHECK(stay.level == 5);
}

TEST_CASE("promotion at the cap resamples roughly uniformly") {
  Rng rng(77);
  CurriculumState cs;
  cs.level = 10;
  int counts[10] = {0};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    CurriculumState next = update_level(cs, true, 0.2, rng);
    CHECK(next.level >= 1);
    CHECK(next.level <= 10);
    counts[next.level - 1]++;
  }
  double chi2 = 0.0;
  for (int k = 0; k < 10; ++k) {
    double expected = n / 10.0;
    chi2 += (counts[k] - expected) * (counts[k] - expected) / expected;
  }
  CHECK(chi2 < 27.88);  // chi-square critical value, 9 dof, p = 0.001
}

TEST_CASE("levels never leave [1, 10] under random outcomes") {
  Rng rng(5);
  CurriculumState cs;
  for (int i = 0; i < 5000; ++i) {
    bool success = rng.uniform() < 0.5;
    cs = update_level(cs, success, rng.uniform(0.0, 2.0), rng);
    CHECK(cs.level >= 1);
    CHECK(cs.level <= 10);
  }
}
