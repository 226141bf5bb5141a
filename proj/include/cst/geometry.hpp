#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "cst/config.hpp"
#include "cst/sha256.hpp"

namespace cst {

using Vec2 = Eigen::Vector2d;

/// One laser beam as a directed segment from emitter to receiver.
struct Beam {
  int index = 0;       // 0-based flat index q * R + r
  int view = 0;        // q
  int within_view = 0; // r, ordered by increasing perpendicular offset
  Vec2 emitter = Vec2::Zero();
  Vec2 receiver = Vec2::Zero();

  double length() const { return (receiver - emitter).norm(); }
};

/// Parallel-beam sensor: Q angular views, R equispaced beams per view.
struct SensorLayout {
  int num_views = 0;                   // Q
  int beams_per_view = 0;              // R
  std::vector<double> view_angles_deg; // length Q, strictly increasing in [0, 180)
  double beam_spacing_cm = 0.0;
  double beam_span_cm = 0.0;

  int beam_count() const { return num_views * beams_per_view; }  // M
};

/// Octagonal region of interest discretised into square pixels.
///
/// The octagon is regular, centred at the origin, oriented with two sides
/// perpendicular to the 0-degree view direction (flat facing each default
/// view). A bounding grid of `grid_rows` x `grid_cols` square cells covers
/// it; a cell is active iff its centre lies inside the octagon or on its
/// boundary. Active cells are enumerated row-major (row 0 at the top,
/// i.e. largest y), and that enumeration defines pixel indices 0..N-1.
struct RoIGrid {
  double octagon_side_cm = 0.0;
  double pixel_pitch_cm = 0.0;
  bool square_roi = false;  // debug mode: bounding square instead of octagon
  int grid_rows = 0;
  int grid_cols = 0;
  std::vector<int> active_index;       // rows*cols entries, -1 = inactive
  std::vector<Vec2> pixel_centers;     // length N, cm
  int active_count = 0;                // N

  /// Apothem (centre-to-flat distance) of the octagon in cm.
  double apothem() const { return 0.5 * octagon_side_cm * (1.0 + std::numbers::sqrt2); }
  /// Width across flats, equal to the bounding-box side of the octagon.
  double width_across_flats() const { return 2.0 * apothem(); }
  /// Physical half-extent of the bounding grid.
  double grid_half_extent() const { return 0.5 * grid_cols * pixel_pitch_cm; }

  /// Boundary-inclusive point-in-RoI test (half-plane form).
  bool contains(const Vec2& p) const;
  /// Same test against the octagon shrunk by `margin` cm (apothem reduced).
  bool contains_with_margin(const Vec2& p, double margin) const;

  /// Pixel index at a physical point, or -1 (outside grid or inactive).
  int pixel_at(const Vec2& p) const;
  /// Grid cell of a physical point; false if outside the bounding grid.
  bool cell_at(const Vec2& p, int& row, int& col) const;
  Vec2 cell_center(int row, int col) const;
};

/// Sensitivity matrix L: entry (i, j) is the path length in cm of beam i
/// through pixel j. Row-major sparse storage.
using SensitivityMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Builds the sensor layout and its beams. Beam r within view q is offset by
/// (r - (R-1)/2) * spacing perpendicular to the view direction, so the beam
/// array is symmetric about the origin and invariant under 180-degree
/// rotation. Throws ConfigError on invalid parameters.
std::pair<SensorLayout, std::vector<Beam>> build_layout(const RunConfig& config);

/// Builds the pixelised region of interest. Throws ConfigError if the pitch
/// exceeds the octagon span.
RoIGrid build_grid(const RunConfig& config);

/// Exact per-pixel path lengths by parametric traversal of the bounding
/// grid, masked to active pixels. Entries below 1e-12 cm are dropped.
/// A beam that misses the RoI entirely produces an all-zero row and a
/// warning on stderr. `threads` > 1 splits the work per beam; the result is
/// identical to the sequential build.
SensitivityMatrix build_sensitivity_matrix(const SensorLayout& layout,
                                           const std::vector<Beam>& beams,
                                           const RoIGrid& grid,
                                           int threads = 1);

/// Beam permutation induced by rotating the plane 180 degrees about the RoI
/// centre: perm[i] is the index of the beam whose line is the rotated image
/// of beam i's line (same view, reversed within-view order).
std::vector<int> beam_rotation_permutation(const SensorLayout& layout);

/// Pixel permutation induced by the same rotation: perm[j] is the index of
/// the active pixel centred at the negated centre of pixel j.
std::vector<int> pixel_rotation_permutation(const RoIGrid& grid);

/// Digest over the serialised matrix file content; identifies the geometry
/// everywhere downstream.
Sha256::Digest geometry_digest(const SensorLayout& layout, const RoIGrid& grid,
                               const SensitivityMatrix& L);

/// "CSTL" binary container and CSV export (see README for the layout).
void write_sensitivity_matrix(const std::string& path, const SensitivityMatrix& L);
SensitivityMatrix read_sensitivity_matrix(const std::string& path);
void write_sensitivity_csv(const std::string& path, const SensitivityMatrix& L);

}  // namespace cst
