#pragma once

#include <array>
#include <cmath>

#include "acsim/random.hpp"

namespace acsim::geom {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

inline double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

inline constexpr int kNumCells = 7;
using CellId = int;

/// Center positions of a 7-cell hexagonal cluster. Cell 0 sits at the origin,
/// cell k (k = 1..6) at distance `isd` and angle 30° + (k-1)·60°.
std::array<Vec2, kNumCells> cell_centers(double isd);

/// Hexagonal 7-cell layout wrapped onto a torus.
///
/// Cells are base-station-centred hexagons with flat edges facing the
/// neighbours. The fundamental domain is the union of the seven hexagons;
/// `wrap_offsets()[0]` is the identity and entries 1..6 are the cluster
/// lattice vectors of length isd·√7 that tile the plane with copies of it.
class CellLayout {
 public:
  explicit CellLayout(double inter_site_distance = 400.0, double bs_height = 25.0);

  double inter_site_distance() const { return isd_; }
  double bs_height() const { return bs_height_; }
  const std::array<Vec2, kNumCells>& centers() const { return centers_; }
  const std::array<Vec2, kNumCells>& wrap_offsets() const { return wrap_offsets_; }

  /// Nearest cell under wraparound; ties go to the lowest index.
  CellId nearest_cell(Vec2 p) const;

  /// Maps any planar point to its representative in the fundamental domain.
  Vec2 fold(Vec2 p) const;

  bool in_domain(Vec2 p, double tol = 1e-9) const;

  /// Point-in-hexagon test for the (unwrapped) hexagon of `cell`.
  bool in_cell(Vec2 p, CellId cell, double tol = 1e-9) const;

  Vec2 sample_in_cell(CellId cell, Rng& rng) const;
  Vec2 sample_in_domain(Rng& rng) const;

 private:
  double isd_;
  double bs_height_;
  std::array<Vec2, kNumCells> centers_;
  std::array<Vec2, kNumCells> wrap_offsets_;
  Vec2 basis0_;
  Vec2 basis1_;
};

/// Minimum over the seven wrap images of `b` of the planar distance to `a`.
double wrapped_distance_2d(Vec2 a, Vec2 b, const CellLayout& layout);

/// Planar displacement from `b` to the nearest wrap image of `a`.
Vec2 wrapped_delta(Vec2 a, Vec2 b, const CellLayout& layout);

double d3d(Vec2 ue_pos, double ue_height, CellId bs, const CellLayout& layout);

struct Trajectory {
  Vec2 origin;
  Vec2 direction{1.0, 0.0};
  double speed = 1.0;
  double start_time = 0.0;

  /// Validates unit direction and speed ∈ [1, 5]; throws std::invalid_argument.
  static Trajectory make(Vec2 origin, Vec2 direction, double speed, double start_time,
                         double speed_min = 1.0, double speed_max = 5.0);

  double travelled(double t) const { return speed * (t - start_time); }
};

/// Position at time `t`, folded back into the fundamental domain.
Vec2 position_at(const Trajectory& traj, double t, const CellLayout& layout);

}  // namespace acsim::geom
