#pragma once

#include <Eigen/Core>

namespace cst {

/// The two rearrangements of a projection pair that feed the network.
///
/// centro: 2Q x R plane; rows 0..Q-1 hold A_nu1 reshaped row-major to
/// (Q, R), rows Q..2Q-1 hold A_nu2 reshaped the same way with the row order
/// reversed. smooth_nu1/nu2: (R/F) x (Q F) planes, one per frequency, where
/// F is the least prime factor of R; view j's R entries are reshaped
/// row-major to (R/F, F) and placed in columns F j .. F (j+1) - 1, so
/// horizontally adjacent cells always come from adjacent beams of one view.
/// Every cell is exactly one input entry; no arithmetic is applied.
struct HeatmapPair {
  Eigen::MatrixXd centro;      // 2Q x R
  Eigen::MatrixXd smooth_nu1;  // R/F x Q*F, channel 0
  Eigen::MatrixXd smooth_nu2;  // R/F x Q*F, channel 1
};

/// Smallest prime dividing r. Throws ConfigError for r < 2.
int least_prime_factor(int r);

/// Builds both heatmaps from the two length-M projection vectors, M = Q R.
/// Throws CompatError on dimension mismatch.
HeatmapPair build_heatmaps(const Eigen::VectorXd& a1, const Eigen::VectorXd& a2,
                           int num_views, int beams_per_view);

/// Exact inverse of the rearrangement.
void invert_heatmaps(const HeatmapPair& maps, int num_views, int beams_per_view,
                     Eigen::VectorXd& a1, Eigen::VectorXd& a2);

}  // namespace cst
