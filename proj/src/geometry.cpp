#include "cst/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <thread>

#include "cst/binio.hpp"
#include "cst/errors.hpp"

namespace cst {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kDropThresholdCm = 1e-12;

}  // namespace

bool RoIGrid::contains(const Vec2& p) const {
  if (square_roi) {
    const double h = grid_half_extent();
    return std::abs(p.x()) <= h && std::abs(p.y()) <= h;
  }
  return contains_with_margin(p, 0.0);
}

bool RoIGrid::contains_with_margin(const Vec2& p, double margin) const {
  const double a = apothem() - margin;
  const double ax = std::abs(p.x());
  const double ay = std::abs(p.y());
  return ax <= a && ay <= a && ax + ay <= a * std::numbers::sqrt2;
}

bool RoIGrid::cell_at(const Vec2& p, int& row, int& col) const {
  const double h = grid_half_extent();
  col = static_cast<int>(std::floor((p.x() + h) / pixel_pitch_cm));
  row = static_cast<int>(std::floor((h - p.y()) / pixel_pitch_cm));
  return col >= 0 && col < grid_cols && row >= 0 && row < grid_rows;
}

int RoIGrid::pixel_at(const Vec2& p) const {
  int row, col;
  if (!cell_at(p, row, col)) return -1;
  return active_index[static_cast<std::size_t>(row) * grid_cols + col];
}

Vec2 RoIGrid::cell_center(int row, int col) const {
  const double h = grid_half_extent();
  return Vec2(-h + (col + 0.5) * pixel_pitch_cm, h - (row + 0.5) * pixel_pitch_cm);
}

std::pair<SensorLayout, std::vector<Beam>> build_layout(const RunConfig& config) {
  const int Q = config.geom_num_views;
  const int R = config.geom_beams_per_view;
  if (Q < 1) throw ConfigError("num_views must be >= 1");
  if (R < 2) throw ConfigError("beams_per_view must be >= 2");
  if (static_cast<long long>(Q) * R > (1 << 20)) throw ConfigError("Q*R too large");
  if (config.geom_beam_spacing_cm <= 0.0) throw ConfigError("beam spacing must be > 0");
  if (config.geom_beam_span_cm <= 0.0) throw ConfigError("beam span must be > 0");
  if (config.geom_view_angles_deg.size() != static_cast<std::size_t>(Q))
    throw ConfigError("view_angles_deg length must equal num_views");
  for (std::size_t i = 0; i < config.geom_view_angles_deg.size(); ++i) {
    const double a = config.geom_view_angles_deg[i];
    if (a < 0.0 || a >= 180.0) throw ConfigError("view angles must lie in [0, 180)");
    if (i > 0 && a <= config.geom_view_angles_deg[i - 1])
      throw ConfigError("view angles must be strictly increasing");
  }

  SensorLayout layout;
  layout.num_views = Q;
  layout.beams_per_view = R;
  layout.view_angles_deg = config.geom_view_angles_deg;
  layout.beam_spacing_cm = config.geom_beam_spacing_cm;
  layout.beam_span_cm = config.geom_beam_span_cm;

  std::vector<Beam> beams;
  beams.reserve(static_cast<std::size_t>(Q) * R);
  const double half_span = 0.5 * layout.beam_span_cm;
  for (int q = 0; q < Q; ++q) {
    const double theta = layout.view_angles_deg[q] * kDegToRad;
    const Vec2 dir(std::cos(theta), std::sin(theta));
    const Vec2 perp(-std::sin(theta), std::cos(theta));
    for (int r = 0; r < R; ++r) {
      const double offset = (r - 0.5 * (R - 1)) * layout.beam_spacing_cm;
      const Vec2 center = offset * perp;
      Beam b;
      b.index = q * R + r;
      b.view = q;
      b.within_view = r;
      b.emitter = center - half_span * dir;
      b.receiver = center + half_span * dir;
      beams.push_back(b);
    }
  }
  return {layout, beams};
}

RoIGrid build_grid(const RunConfig& config) {
  if (config.geom_octagon_side_cm <= 0.0) throw ConfigError("octagon side must be > 0");
  if (config.geom_pixel_pitch_cm <= 0.0) throw ConfigError("pixel pitch must be > 0");

  RoIGrid grid;
  grid.octagon_side_cm = config.geom_octagon_side_cm;
  grid.pixel_pitch_cm = config.geom_pixel_pitch_cm;
  grid.square_roi = config.geom_square_roi;

  const double span = grid.width_across_flats();
  if (grid.pixel_pitch_cm > span * (1.0 + 1e-12))
    throw ConfigError("pixel pitch exceeds the octagon span");

  const int cells = std::max(1, static_cast<int>(std::ceil(span / grid.pixel_pitch_cm - 1e-12)));
  grid.grid_rows = cells;
  grid.grid_cols = cells;
  grid.active_index.assign(static_cast<std::size_t>(cells) * cells, -1);

  for (int row = 0; row < cells; ++row) {
    for (int col = 0; col < cells; ++col) {
      const Vec2 c = grid.cell_center(row, col);
      if (grid.square_roi || grid.contains(c)) {
        grid.active_index[static_cast<std::size_t>(row) * cells + col] = grid.active_count++;
        grid.pixel_centers.push_back(c);
      }
    }
  }
  return grid;
}

namespace {

/// Traverses one beam through the bounding grid and emits (pixel, length)
/// pairs sorted by pixel index. Crossing parameters with the grid lines are
/// collected, sorted, and each interval is attributed to the cell containing
/// its midpoint; zero-length intervals vanish, which realises the half-open
/// tie-breaking at corners.
std::vector<std::pair<int, double>> trace_beam(const Beam& beam, const RoIGrid& grid) {
  std::vector<std::pair<int, double>> row;
  const Vec2 d = beam.receiver - beam.emitter;
  const double len = d.norm();
  if (len <= 0.0) return row;

  const double h = grid.grid_half_extent();
  double t0 = 0.0, t1 = 1.0;
  // Liang-Barsky clip of [0,1] against the bounding square.
  for (int axis = 0; axis < 2; ++axis) {
    const double p = d[axis];
    const double o = beam.emitter[axis];
    if (p == 0.0) {
      if (o < -h || o > h) return row;
      continue;
    }
    double ta = (-h - o) / p;
    double tb = (h - o) / p;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t1 <= t0) return row;

  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(grid.grid_cols + grid.grid_rows + 2));
  ts.push_back(t0);
  ts.push_back(t1);
  for (int axis = 0; axis < 2; ++axis) {
    const double p = d[axis];
    if (p == 0.0) continue;
    const double o = beam.emitter[axis];
    const int lines = (axis == 0 ? grid.grid_cols : grid.grid_rows) + 1;
    for (int k = 0; k <= lines - 1; ++k) {
      const double coord = -h + k * grid.pixel_pitch_cm;
      const double t = (coord - o) / p;
      if (t > t0 && t < t1) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());

  std::vector<std::pair<int, double>> hits;
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const double ta = ts[k], tb = ts[k + 1];
    const double seg = (tb - ta) * len;
    if (seg <= kDropThresholdCm) continue;
    const double tm = 0.5 * (ta + tb);
    const Vec2 p = beam.emitter + tm * d;
    const int j = grid.pixel_at(p);
    if (j >= 0) hits.emplace_back(j, seg);
  }
  std::sort(hits.begin(), hits.end());
  for (const auto& [j, seg] : hits) {
    if (!row.empty() && row.back().first == j)
      row.back().second += seg;
    else
      row.emplace_back(j, seg);
  }
  row.erase(std::remove_if(row.begin(), row.end(),
                           [](const auto& e) { return e.second <= kDropThresholdCm; }),
            row.end());
  return row;
}

}  // namespace

SensitivityMatrix build_sensitivity_matrix(const SensorLayout& layout,
                                           const std::vector<Beam>& beams,
                                           const RoIGrid& grid, int threads) {
  const int M = layout.beam_count();
  if (static_cast<int>(beams.size()) != M)
    throw ConfigError("beam list does not match layout");

  std::vector<std::vector<std::pair<int, double>>> rows(beams.size());
  auto work = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) rows[i] = trace_beam(beams[i], grid);
  };
  if (threads <= 1) {
    work(0, M);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (M + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(M, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  SensitivityMatrix L(M, grid.active_count);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < M; ++i) {
    if (rows[i].empty())
      std::cerr << "warning: beam " << i << " does not intersect the RoI (all-zero row)\n";
    for (const auto& [j, v] : rows[i]) triplets.emplace_back(i, j, v);
  }
  L.setFromTriplets(triplets.begin(), triplets.end());
  L.makeCompressed();
  return L;
}

std::vector<int> beam_rotation_permutation(const SensorLayout& layout) {
  std::vector<int> perm(static_cast<std::size_t>(layout.beam_count()));
  const int R = layout.beams_per_view;
  for (int q = 0; q < layout.num_views; ++q)
    for (int r = 0; r < R; ++r) perm[q * R + r] = q * R + (R - 1 - r);
  return perm;
}

std::vector<int> pixel_rotation_permutation(const RoIGrid& grid) {
  std::vector<int> perm(static_cast<std::size_t>(grid.active_count), -1);
  for (int row = 0; row < grid.grid_rows; ++row) {
    for (int col = 0; col < grid.grid_cols; ++col) {
      const int j = grid.active_index[static_cast<std::size_t>(row) * grid.grid_cols + col];
      if (j < 0) continue;
      const int rrow = grid.grid_rows - 1 - row;
      const int rcol = grid.grid_cols - 1 - col;
      const int k = grid.active_index[static_cast<std::size_t>(rrow) * grid.grid_cols + rcol];
      if (k < 0)
        throw NumericError("active mask is not symmetric under 180-degree rotation");
      perm[static_cast<std::size_t>(j)] = k;
    }
  }
  return perm;
}

void write_sensitivity_matrix(const std::string& path, const SensitivityMatrix& L) {
  BinWriter w(path);
  w.magic("CSTL");
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(L.rows()));
  w.u32(static_cast<std::uint32_t>(L.cols()));
  for (int i = 0; i < L.rows(); ++i) {
    std::uint32_t count = 0;
    for (SensitivityMatrix::InnerIterator it(L, i); it; ++it) ++count;
    w.u32(count);
    for (SensitivityMatrix::InnerIterator it(L, i); it; ++it) {
      w.u32(static_cast<std::uint32_t>(it.col()));
      w.f64(it.value());
    }
  }
  w.close();
}

SensitivityMatrix read_sensitivity_matrix(const std::string& path) {
  BinReader r(path);
  r.expect_magic("CSTL");
  const auto version = r.u16();
  if (version != 1) throw IoError("unsupported CSTL version");
  const auto M = r.u32();
  const auto N = r.u32();
  SensitivityMatrix L(M, N);
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::uint32_t i = 0; i < M; ++i) {
    const auto count = r.u32();
    for (std::uint32_t k = 0; k < count; ++k) {
      const auto j = r.u32();
      const double v = r.f64();
      if (j >= N) throw IoError("column index out of range in " + path);
      triplets.emplace_back(i, j, v);
    }
  }
  L.setFromTriplets(triplets.begin(), triplets.end());
  L.makeCompressed();
  return L;
}

void write_sensitivity_csv(const std::string& path, const SensitivityMatrix& L) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "beam,pixel,length_cm\n";
  char buf[64];
  for (int i = 0; i < L.rows(); ++i) {
    for (SensitivityMatrix::InnerIterator it(L, i); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", i,
                    static_cast<int>(it.col()), it.value());
      out << buf;
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

Sha256::Digest geometry_digest(const SensorLayout& layout, const RoIGrid& grid,
                               const SensitivityMatrix& L) {
  Sha256 h;
  auto add_u32 = [&h](std::uint32_t v) { h.update(&v, 4); };
  auto add_f64 = [&h](double v) { h.update(&v, 8); };
  add_u32(static_cast<std::uint32_t>(layout.num_views));
  add_u32(static_cast<std::uint32_t>(layout.beams_per_view));
  for (double a : layout.view_angles_deg) add_f64(a);
  add_f64(layout.beam_spacing_cm);
  add_f64(layout.beam_span_cm);
  add_f64(grid.octagon_side_cm);
  add_f64(grid.pixel_pitch_cm);
  add_u32(grid.square_roi ? 1u : 0u);
  add_u32(static_cast<std::uint32_t>(grid.active_count));
  for (int i = 0; i < L.rows(); ++i) {
    for (SensitivityMatrix::InnerIterator it(L, i); it; ++it) {
      add_u32(static_cast<std::uint32_t>(it.col()));
      add_f64(it.value());
    }
  }
  return h.finish();
}

}  // namespace cst
