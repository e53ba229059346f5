#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "frlab/config.hpp"
#include "frlab/rng.hpp"

namespace frlab {

enum class TerrainFamily {
  Flat,  // debug family, all heights zero
  Rough,
  Slope,
  Stairs,
  DiscreteStones,
  Gaps,
  Beams,
};

const char* to_string(TerrainFamily f);
TerrainFamily terrain_family_from_string(const std::string& s);

/// Regular-grid heightfield centered on the origin. Immutable after
/// generation; the spawn region is the area around (0, 0).
struct Heightfield {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();  // world position of node (0,0)
  double cell_size = 0.05;
  Eigen::MatrixXd grid;  // rows index x, cols index y
  TerrainFamily family = TerrainFamily::Flat;
  int level = 1;

  /// Bilinear interpolation; queries outside the field clamp to the border.
  double height_at(double x, double y) const;
  /// Outward surface normal from central differences of height_at.
  Eigen::Vector3d normal_at(double x, double y) const;
  /// Max node height within an axis-aligned box, for spawn placement.
  double max_height_in(double x0, double y0, double x1, double y1) const;
};

/// Deterministic in (family, level, seed). Level must be in [1, 10].
Heightfield generate_terrain(TerrainFamily family, int level, uint64_t seed,
                             const TerrainConfig& cfg);

/// Per-environment curriculum bookkeeping.
struct CurriculumState {
  TerrainFamily family = TerrainFamily::Rough;
  int level = 1;
  int promotions = 0;
  int demotions = 0;
};

/// Promote on success with small displacement, demote on failure, resample
/// uniformly at the cap to retain level coverage.
CurriculumState update_level(const CurriculumState& cs, bool episode_success,
                             double displacement, Rng& rng);

}  // namespace frlab
