#include "cst/heatmaps.hpp"

#include "cst/errors.hpp"

namespace cst {

int least_prime_factor(int r) {
  if (r < 2) throw ConfigError("least prime factor requires an argument >= 2");
  for (int p = 2; p * p <= r; ++p)
    if (r % p == 0) return p;
  return r;
}

HeatmapPair build_heatmaps(const Eigen::VectorXd& a1, const Eigen::VectorXd& a2,
                           int num_views, int beams_per_view) {
  const int Q = num_views;
  const int R = beams_per_view;
  const Eigen::Index M = static_cast<Eigen::Index>(Q) * R;
  if (a1.size() != M || a2.size() != M)
    throw CompatError("projection length does not equal Q*R");
  const int F = least_prime_factor(R);

  HeatmapPair maps;
  maps.centro.resize(2 * Q, R);
  for (int q = 0; q < Q; ++q)
    for (int r = 0; r < R; ++r) {
      maps.centro(q, r) = a1[q * R + r];
      maps.centro(Q + q, r) = a2[(Q - 1 - q) * R + r];
    }

  const int rows = R / F;
  maps.smooth_nu1.resize(rows, Q * F);
  maps.smooth_nu2.resize(rows, Q * F);
  for (int j = 0; j < Q; ++j)
    for (int u = 0; u < rows; ++u)
      for (int v = 0; v < F; ++v) {
        maps.smooth_nu1(u, F * j + v) = a1[j * R + u * F + v];
        maps.smooth_nu2(u, F * j + v) = a2[j * R + u * F + v];
      }
  return maps;
}

void invert_heatmaps(const HeatmapPair& maps, int num_views, int beams_per_view,
                     Eigen::VectorXd& a1, Eigen::VectorXd& a2) {
  const int Q = num_views;
  const int R = beams_per_view;
  if (maps.centro.rows() != 2 * Q || maps.centro.cols() != R)
    throw CompatError("heatmap dimensions do not match Q, R");
  a1.resize(static_cast<Eigen::Index>(Q) * R);
  a2.resize(static_cast<Eigen::Index>(Q) * R);
  for (int q = 0; q < Q; ++q)
    for (int r = 0; r < R; ++r) {
      a1[q * R + r] = maps.centro(q, r);
      a2[(Q - 1 - q) * R + r] = maps.centro(Q + q, r);
    }
}

}  // namespace cst
