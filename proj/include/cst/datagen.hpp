#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "cst/config.hpp"
#include "cst/geometry.hpp"
#include "cst/rng.hpp"
#include "cst/spectroscopy.hpp"

namespace cst {

/// The sampled parameters of one synthetic phantom: D Gaussian
/// inhomogeneities with shared centres and scale factors across the
/// concentration and temperature fields. One width sigma_T and one ratio
/// rho = sigma_X / sigma_T per phantom.
struct PhantomParams {
  int num_blobs = 1;                     // D in {1, 2, 3}
  std::vector<Vec2> centers;             // length D, cm
  std::vector<double> scales;            // xi_d ~ U(0.7, 1)
  double sigma_t_cm = 1.0;
  double rho = 1.0;                      // sigma_X = rho * sigma_T
  double sigma_x_cm() const { return rho * sigma_t_cm; }
};

struct FieldBounds {
  double x_min = 0.01, x_max = 0.12;
  double t_min = 318.0, t_max = 1300.0;
};

FieldBounds bounds_from_config(const RunConfig& config);

/// Per-beam, per-frequency standardisation statistics (population form,
/// divisor E over the training + validation pool).
struct StandardizationStats {
  Eigen::VectorXd mean_nu1, std_nu1;  // length M
  Eigen::VectorXd mean_nu2, std_nu2;
};

/// A generated dataset: fields, raw (unstandardised) projections, split
/// sizes, and the identity of the geometry that produced it. Examples are
/// stored train block first, then validation, then test.
struct Dataset {
  std::vector<FieldPair> fields;
  std::vector<ProjectionPair> projections;  // raw path-integrated absorbances
  int count_train = 0, count_val = 0, count_test = 0;
  std::uint64_t seed = 0;
  Sha256::Digest geometry_digest{};
  double smooth_p95_nu1 = 0.0;  // 95th percentile over examples of the max
  double smooth_p95_nu2 = 0.0;  // within-view adjacent-beam |difference|

  int total() const { return count_train + count_val + count_test; }
  int train_begin() const { return 0; }
  int val_begin() const { return count_train; }
  int test_begin() const { return count_train + count_val; }
};

/// Draws one blob centre uniformly over points at least one pixel inside
/// the octagon, and a width sigma_T uniform over
/// [sigma_frac_lo, sigma_frac_hi] x (width across flats).
std::pair<Vec2, double> sample_center_and_width(Rng& rng, const RoIGrid& grid,
                                                const RunConfig& config);

/// Samples one phantom: D ~ U{1,2,3}, then centre/width, extra centres,
/// scales, and rho, in that order from the stream.
PhantomParams sample_phantom_params(Rng& rng, const RoIGrid& grid,
                                    const RunConfig& config);

/// Evaluates the Gaussian-sum fields of a phantom at the pixel centres.
FieldPair evaluate_phantom(const PhantomParams& params, const FieldBounds& bounds,
                           const RoIGrid& grid, double pressure_atm);

/// Convenience: params + evaluation from one stream.
FieldPair sample_phantom(Rng& rng, const RoIGrid& grid, const RunConfig& config);

/// Generates the full dataset: per-example streams derived from
/// (seed, example index), noise-free projections, seeded shuffle into
/// splits. `threads` parallelises across examples with identical results.
Dataset build_dataset(const RunConfig& config, const RoIGrid& grid,
                      const SensitivityMatrix& L, const TransitionPair& specs,
                      std::uint64_t seed, int threads = 1);

/// Population mean/std per beam over the training + validation block.
/// Throws NumericError if any beam has zero spread.
StandardizationStats compute_standardization(const Dataset& dataset);

/// (A - mu) / sigma per beam and frequency.
ProjectionPair standardize(const ProjectionPair& raw, const StandardizationStats& stats);

/// Additive zero-mean Gaussian noise per beam with standard deviation
/// RMS(A over the M beams of that frequency) / 10^(snr_db / 20), applied to
/// raw projections. An infinite snr_db returns the input unchanged.
ProjectionPair add_noise(const ProjectionPair& raw, double snr_db, Rng& rng);

/// "CSTD" binary container plus key=value manifest sidecar (path + ".manifest").
void write_dataset(const std::string& path, const Dataset& dataset);
Dataset read_dataset(const std::string& path);
void write_dataset_manifest(const std::string& path, const Dataset& dataset,
                            const RunConfig& config);

/// Per-example CSV export (pixel index, x, y, concentration, temperature).
void write_example_csv(const std::string& path, const RoIGrid& grid,
                       const Eigen::VectorXd& concentration,
                       const Eigen::VectorXd& temperature);

}  // namespace cst
