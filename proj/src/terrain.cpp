#include "frlab/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace frlab {

const char* to_string(TerrainFamily f) {
  switch (f) {
    case TerrainFamily::Flat: return "Flat";
    case TerrainFamily::Rough: return "Rough";
    case TerrainFamily::Slope: return "Slope";
    case TerrainFamily::Stairs: return "Stairs";
    case TerrainFamily::DiscreteStones: return "DiscreteStones";
    case TerrainFamily::Gaps: return "Gaps";
    case TerrainFamily::Beams: return "Beams";
  }
  return "?";
}

TerrainFamily terrain_family_from_string(const std::string& s) {
  if (s == "Flat") return TerrainFamily::Flat;
  if (s == "Rough") return TerrainFamily::Rough;
  if (s == "Slope") return TerrainFamily::Slope;
  if (s == "Stairs") return TerrainFamily::Stairs;
  if (s == "DiscreteStones") return TerrainFamily::DiscreteStones;
  if (s == "Gaps") return TerrainFamily::Gaps;
  if (s == "Beams") return TerrainFamily::Beams;
  throw std::runtime_error("unknown terrain family: " + s);
}

double Heightfield::height_at(double x, double y) const {
  const int rows = static_cast<int>(grid.rows());
  const int cols = static_cast<int>(grid.cols());
  double fx = (x - origin[0]) / cell_size;
  double fy = (y - origin[1]) / cell_size;
  fx = std::clamp(fx, 0.0, static_cast<double>(rows - 1));
  fy = std::clamp(fy, 0.0, static_cast<double>(cols - 1));
  int i0 = std::min(static_cast<int>(fx), rows - 2);
  int j0 = std::min(static_cast<int>(fy), cols - 2);
  i0 = std::max(i0, 0);
  j0 = std::max(j0, 0);
  double tx = fx - i0;
  double ty = fy - j0;
  double h00 = grid(i0, j0);
  double h10 = grid(i0 + 1, j0);
  double h01 = grid(i0, j0 + 1);
  double h11 = grid(i0 + 1, j0 + 1);
  return (1 - tx) * ((1 - ty) * h00 + ty * h01) + tx * ((1 - ty) * h10 + ty * h11);
}

Eigen::Vector3d Heightfield::normal_at(double x, double y) const {
  const double eps = 0.5 * cell_size;
  double dhdx = (height_at(x + eps, y) - height_at(x - eps, y)) / (2 * eps);
  double dhdy = (height_at(x, y + eps) - height_at(x, y - eps)) / (2 * eps);
  Eigen::Vector3d n(-dhdx, -dhdy, 1.0);
  return n.normalized();
}

double Heightfield::max_height_in(double x0, double y0, double x1, double y1) const {
  const int rows = static_cast<int>(grid.rows());
  const int cols = static_cast<int>(grid.cols());
  int i0 = std::clamp(static_cast<int>(std::floor((x0 - origin[0]) / cell_size)), 0, rows - 1);
  int i1 = std::clamp(static_cast<int>(std::ceil((x1 - origin[0]) / cell_size)), 0, rows - 1);
  int j0 = std::clamp(static_cast<int>(std::floor((y0 - origin[1]) / cell_size)), 0, cols - 1);
  int j1 = std::clamp(static_cast<int>(std::ceil((y1 - origin[1]) / cell_size)), 0, cols - 1);
  double m = grid(i0, j0);
  for (int i = i0; i <= i1; ++i)
    for (int j = j0; j <= j1; ++j) m = std::max(m, grid(i, j));
  return m;
}

namespace {

// Coarse value-noise lattice upsampled bilinearly onto the grid; values stay
// inside [-amplitude, amplitude].
void fill_rough(Heightfield& hf, double amplitude, Rng& rng) {
  const int rows = static_cast<int>(hf.grid.rows());
  const int cols = static_cast<int>(hf.grid.cols());
  const double lattice_spacing = 0.2;
  const int step = std::max(1, static_cast<int>(std::round(lattice_spacing / hf.cell_size)));
  const int lr = rows / step + 2;
  const int lc = cols / step + 2;
  Eigen::MatrixXd lattice(lr, lc);
  for (int i = 0; i < lr; ++i)
    for (int j = 0; j < lc; ++j) lattice(i, j) = rng.uniform(-amplitude, amplitude);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      double fi = static_cast<double>(i) / step;
      double fj = static_cast<double>(j) / step;
      int i0 = static_cast<int>(fi);
      int j0 = static_cast<int>(fj);
      double ti = fi - i0;
      double tj = fj - j0;
      hf.grid(i, j) = (1 - ti) * ((1 - tj) * lattice(i0, j0) + tj * lattice(i0, j0 + 1)) +
                      ti * ((1 - tj) * lattice(i0 + 1, j0) + tj * lattice(i0 + 1, j0 + 1));
    }
  }
}

void fill_slope(Heightfield& hf, double angle_deg) {
  const double slope = std::tan(angle_deg * M_PI / 180.0);
  for (int i = 0; i < hf.grid.rows(); ++i) {
    double x = hf.origin[0] + i * hf.cell_size;
    for (int j = 0; j < hf.grid.cols(); ++j) hf.grid(i, j) = slope * x;
  }
}

// Pyramid stairs descending outward from a small flat top platform.
void fill_stairs(Heightfield& hf, double step_height, double tread, Rng& rng) {
  const double top_flat = 0.45 + rng.uniform(0.0, 0.1);
  for (int i = 0; i < hf.grid.rows(); ++i) {
    double x = hf.origin[0] + i * hf.cell_size;
    for (int j = 0; j < hf.grid.cols(); ++j) {
      double y = hf.origin[1] + j * hf.cell_size;
      double d = std::max(std::abs(x), std::abs(y));
      int k = d <= top_flat ? 0 : 1 + static_cast<int>((d - top_flat) / tread);
      hf.grid(i, j) = -step_height * k;
    }
  }
}

// Raised rectangular blocks on flat ground; density and height grow with level.
void fill_stones(Heightfield& hf, double height, double density, Rng& rng) {
  hf.grid.setZero();
  const double block = 0.35;
  const int bs = std::max(1, static_cast<int>(std::round(block / hf.cell_size)));
  const int nbi = static_cast<int>(hf.grid.rows()) / bs;
  const int nbj = static_cast<int>(hf.grid.cols()) / bs;
  for (int bi = 0; bi < nbi; ++bi) {
    for (int bj = 0; bj < nbj; ++bj) {
      bool raised = rng.uniform() < density;
      double h = raised ? height * rng.uniform(0.5, 1.0) : 0.0;
      if (!raised) continue;
      // leave a one-cell margin so stones stay discrete
      for (int i = bi * bs + 1; i < (bi + 1) * bs; ++i)
        for (int j = bj * bs + 1; j < (bj + 1) * bs; ++j)
          if (i < hf.grid.rows() && j < hf.grid.cols()) hf.grid(i, j) = h;
    }
  }
}

// Platforms separated by trenches running along y; the center platform is
// kept solid for spawning.
void fill_gaps(Heightfield& hf, double gap_width, Rng& rng) {
  hf.grid.setZero();
  const double depth = -0.5;
  const double half_extent = -hf.origin[0];
  for (int dir = -1; dir <= 1; dir += 2) {
    double x = 0.55 + rng.uniform(0.0, 0.3);
    while (x < half_extent) {
      double g0 = dir * x;
      double g1 = dir * (x + gap_width);
      double lo = std::min(g0, g1);
      double hi = std::max(g0, g1);
      for (int i = 0; i < hf.grid.rows(); ++i) {
        double px = hf.origin[0] + i * hf.cell_size;
        if (px > lo && px < hi)
          for (int j = 0; j < hf.grid.cols(); ++j) hf.grid(i, j) = depth;
      }
      x += gap_width + rng.uniform(0.6, 1.2);
    }
  }
}

// Parallel beams along x with constant-width drops between them; one beam is
// centered on y = 0.
void fill_beams(Heightfield& hf, double beam_width, double gap, double drop) {
  const double pitch = beam_width + gap;
  for (int j = 0; j < hf.grid.cols(); ++j) {
    double y = hf.origin[1] + j * hf.cell_size;
    double phase = std::fmod(std::fmod(y + beam_width / 2, pitch) + pitch, pitch);
    bool on_beam = phase <= beam_width;
    for (int i = 0; i < hf.grid.rows(); ++i) hf.grid(i, j) = on_beam ? 0.0 : -drop;
  }
}

}  // namespace

Heightfield generate_terrain(TerrainFamily family, int level, uint64_t seed,
                             const TerrainConfig& cfg) {
  if (level < 1 || level > 10) throw std::invalid_argument("terrain level must be in [1, 10]");
  Heightfield hf;
  hf.family = family;
  hf.level = level;
  hf.cell_size = cfg.cell_size;
  const int n = static_cast<int>(std::round(cfg.extent / cfg.cell_size)) + 1;
  hf.origin = Eigen::Vector2d(-cfg.extent / 2, -cfg.extent / 2);
  hf.grid.setZero(n, n);
  const double t = (level - 1) / 9.0;
  Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<uint64_t>(family) * 16 + level)));
  switch (family) {
    case TerrainFamily::Flat:
      break;
    case TerrainFamily::Rough:
      fill_rough(hf, cfg.rough_amplitude.at(t), rng);
      break;
    case TerrainFamily::Slope:
      fill_slope(hf, cfg.slope_angle_deg.at(t));
      break;
    case TerrainFamily::Stairs:
      fill_stairs(hf, cfg.stair_height.at(t), cfg.stair_tread, rng);
      break;
    case TerrainFamily::DiscreteStones:
      fill_stones(hf, cfg.stone_height.at(t), cfg.stone_density.at(t), rng);
      break;
    case TerrainFamily::Gaps:
      fill_gaps(hf, cfg.gap_width.at(t), rng);
      break;
    case TerrainFamily::Beams:
      fill_beams(hf, cfg.beam_width.at(t), cfg.beam_gap, cfg.beam_drop);
      break;
  }
  return hf;
}

CurriculumState update_level(const CurriculumState& cs, bool episode_success,
                             double displacement, Rng& rng) {
  CurriculumState out = cs;
  if (episode_success && displacement < 1.0) {
    out.promotions++;
    if (cs.level >= 10) {
      out.level = 1 + static_cast<int>(rng.uniform_int(10));
    } else {
      out.level = cs.level + 1;
    }
  } else if (!episode_success) {
    out.demotions++;
    out.level = std::max(1, cs.level - 1);
  }
  return out;
}

}  // namespace frlab
