#include "acsim/geom.hpp"

#include <limits>
#include <numbers>
#include <stdexcept>

namespace acsim::geom {

namespace {

Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

constexpr double kDeg = std::numbers::pi / 180.0;

// Edge normals of a flat-sided hexagon with apothem along 30°, 90°, 150°.
constexpr double kHalfSqrt3 = 0.86602540378443864676;
constexpr Vec2 kEdgeNormals[3] = {{kHalfSqrt3, 0.5}, {0.0, 1.0}, {-kHalfSqrt3, 0.5}};

double norm2(Vec2 v) { return v.x * v.x + v.y * v.y; }

}  // namespace

std::array<Vec2, kNumCells> cell_centers(double isd) {
  if (!(isd > 0.0)) throw std::invalid_argument("cell_centers: inter-site distance must be positive");
  std::array<Vec2, kNumCells> out{};
  out[0] = {0.0, 0.0};
  for (int k = 0; k < 6; ++k) {
    const double a = (30.0 + 60.0 * k) * kDeg;
    out[k + 1] = {isd * std::cos(a), isd * std::sin(a)};
  }
  return out;
}

CellLayout::CellLayout(double inter_site_distance, double bs_height)
    : isd_(inter_site_distance), bs_height_(bs_height), centers_(cell_centers(inter_site_distance)) {
  if (!(bs_height > 0.0)) throw std::invalid_argument("CellLayout: bs_height must be positive");
  // (2,1) step on the hexagonal lattice: 2·u(30°) + u(90°) = isd·(√3, 2).
  basis0_ = {isd_ * std::sqrt(3.0), 2.0 * isd_};
  basis1_ = rotate(basis0_, 60.0 * kDeg);
  wrap_offsets_[0] = {0.0, 0.0};
  for (int k = 0; k < 6; ++k) wrap_offsets_[k + 1] = rotate(basis0_, 60.0 * k * kDeg);
}

CellId CellLayout::nearest_cell(Vec2 p) const {
  CellId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (CellId c = 0; c < kNumCells; ++c) {
    const double d = wrapped_distance_2d(p, centers_[c], *this);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

Vec2 CellLayout::fold(Vec2 p) const {
  // Lattice coordinates of p in (basis0_, basis1_).
  const double det = basis0_.x * basis1_.y - basis0_.y * basis1_.x;
  const double a = (p.x * basis1_.y - p.y * basis1_.x) / det;
  const double b = (basis0_.x * p.y - basis0_.y * p.x) / det;
  const long a0 = std::lround(a);
  const long b0 = std::lround(b);

  auto nearest_center_dist = [this](Vec2 q) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : centers_) d = std::min(d, norm2(q - c));
    return d;
  };

  Vec2 best = p;
  double best_d = std::numeric_limits<double>::infinity();
  for (long da = -2; da <= 2; ++da) {
    for (long db = -2; db <= 2; ++db) {
      const double na = static_cast<double>(a0 + da);
      const double nb = static_cast<double>(b0 + db);
      const Vec2 q = p - (na * basis0_ + nb * basis1_);
      const double d = nearest_center_dist(q);
      if (d < best_d) {
        best_d = d;
        best = q;
      }
    }
  }
  return best;
}

bool CellLayout::in_domain(Vec2 p, double tol) const {
  for (CellId c = 0; c < kNumCells; ++c) {
    if (in_cell(p, c, tol)) return true;
  }
  return false;
}

bool CellLayout::in_cell(Vec2 p, CellId cell, double tol) const {
  if (cell < 0 || cell >= kNumCells) throw std::out_of_range("in_cell: invalid cell index");
  const Vec2 d = p - centers_[cell];
  const double apothem = 0.5 * isd_;
  for (const Vec2& n : kEdgeNormals) {
    if (std::abs(dot(d, n)) > apothem + tol) return false;
  }
  return true;
}

Vec2 CellLayout::sample_in_cell(CellId cell, Rng& rng) const {
  if (cell < 0 || cell >= kNumCells) throw std::out_of_range("sample_in_cell: invalid cell index");
  const double circumradius = isd_ / std::sqrt(3.0);
  std::uniform_real_distribution<double> ux(-circumradius, circumradius);
  std::uniform_real_distribution<double> uy(-0.5 * isd_, 0.5 * isd_);
  for (;;) {
    const Vec2 p = centers_[cell] + Vec2{ux(rng), uy(rng)};
    if (in_cell(p, cell, 0.0)) return p;
  }
}

Vec2 CellLayout::sample_in_domain(Rng& rng) const {
  const double extent = isd_ + isd_ / std::sqrt(3.0);
  std::uniform_real_distribution<double> u(-extent, extent);
  for (;;) {
    const Vec2 p{u(rng), u(rng)};
    if (in_domain(p, 0.0)) return p;
  }
}

Vec2 wrapped_delta(Vec2 a, Vec2 b, const CellLayout& layout) {
  Vec2 best = a - b;
  double best_d = norm2(best);
  for (int k = 1; k < kNumCells; ++k) {
    const Vec2 d = a - (b + layout.wrap_offsets()[k]);
    const double n = norm2(d);
    if (n < best_d) {
      best_d = n;
      best = d;
    }
  }
  return best;
}

double wrapped_distance_2d(Vec2 a, Vec2 b, const CellLayout& layout) {
  return norm(wrapped_delta(a, b, layout));
}

double d3d(Vec2 ue_pos, double ue_height, CellId bs, const CellLayout& layout) {
  if (bs < 0 || bs >= kNumCells) throw std::out_of_range("d3d: invalid base station index");
  const double d2 = wrapped_distance_2d(ue_pos, layout.centers()[bs], layout);
  const double dh = layout.bs_height() - ue_height;
  return std::sqrt(d2 * d2 + dh * dh);
}

Trajectory Trajectory::make(Vec2 origin, Vec2 direction, double speed, double start_time,
                            double speed_min, double speed_max) {
  if (std::abs(norm(direction) - 1.0) > 1e-9)
    throw std::invalid_argument("Trajectory: direction must have unit norm");
  if (!(speed >= speed_min && speed <= speed_max))
    throw std::invalid_argument("Trajectory: speed outside the configured range");
  return Trajectory{origin, direction, speed, start_time};
}

Vec2 position_at(const Trajectory& traj, double t, const CellLayout& layout) {
  if (t < traj.start_time) throw std::invalid_argument("position_at: t precedes the trajectory start");
  const Vec2 p = traj.origin + (traj.speed * (t - traj.start_time)) * traj.direction;
  if (layout.in_domain(p)) return p;
  return layout.fold(p);
}

}  // namespace acsim::geom
