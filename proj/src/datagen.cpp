#include "cst/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "cst/binio.hpp"
#include "cst/errors.hpp"

namespace cst {

FieldBounds bounds_from_config(const RunConfig& config) {
  return {config.data_x_min, config.data_x_max, config.data_t_min, config.data_t_max};
}

std::pair<Vec2, double> sample_center_and_width(Rng& rng, const RoIGrid& grid,
                                                const RunConfig& config) {
  const double margin = grid.pixel_pitch_cm;
  const double a = grid.apothem() - margin;
  if (a <= 0.0) throw ConfigError("octagon too small for the blob-centre margin");
  Vec2 center;
  do {
    center.x() = rng.uniform(-a, a);
    center.y() = rng.uniform(-a, a);
  } while (!grid.contains_with_margin(center, margin));
  const double width = grid.width_across_flats() *
                       rng.uniform(config.data_sigma_frac_lo, config.data_sigma_frac_hi);
  return {center, width};
}

PhantomParams sample_phantom_params(Rng& rng, const RoIGrid& grid,
                                    const RunConfig& config) {
  PhantomParams params;
  params.num_blobs = 1 + static_cast<int>(rng.uniform_int(3));
  auto [center, width] = sample_center_and_width(rng, grid, config);
  params.centers.push_back(center);
  params.sigma_t_cm = width;
  const double margin = grid.pixel_pitch_cm;
  for (int d = 1; d < params.num_blobs; ++d) {
    Vec2 c;
    do {
      c.x() = rng.uniform(-(grid.apothem() - margin), grid.apothem() - margin);
      c.y() = rng.uniform(-(grid.apothem() - margin), grid.apothem() - margin);
    } while (!grid.contains_with_margin(c, margin));
    params.centers.push_back(c);
  }
  for (int d = 0; d < params.num_blobs; ++d)
    params.scales.push_back(rng.uniform(0.7, 1.0));
  params.rho = rng.uniform(1.0 / 3.0, 1.0);
  return params;
}

FieldPair evaluate_phantom(const PhantomParams& params, const FieldBounds& bounds,
                           const RoIGrid& grid, double pressure_atm) {
  const int n = grid.active_count;
  FieldPair fields;
  fields.concentration = Eigen::VectorXd::Constant(n, bounds.x_min);
  fields.temperature = Eigen::VectorXd::Constant(n, bounds.t_min);
  fields.pressure_atm = pressure_atm;
  const double sx2 = params.sigma_x_cm() * params.sigma_x_cm();
  const double st2 = params.sigma_t_cm * params.sigma_t_cm;
  for (int d = 0; d < params.num_blobs; ++d) {
    const Vec2& c = params.centers[static_cast<std::size_t>(d)];
    const double xi = params.scales[static_cast<std::size_t>(d)];
    for (int j = 0; j < n; ++j) {
      const double r2 = (grid.pixel_centers[static_cast<std::size_t>(j)] - c).squaredNorm();
      fields.concentration[j] += xi * (bounds.x_max - bounds.x_min) * std::exp(-r2 / sx2);
      fields.temperature[j] += xi * (bounds.t_max - bounds.t_min) * std::exp(-r2 / st2);
    }
  }
  return fields;
}

FieldPair sample_phantom(Rng& rng, const RoIGrid& grid, const RunConfig& config) {
  const PhantomParams params = sample_phantom_params(rng, grid, config);
  return evaluate_phantom(params, bounds_from_config(config), grid,
                          config.spect_pressure_atm);
}

namespace {

/// Max within-view adjacent-beam absolute difference of one projection.
double max_adjacent_difference(const Eigen::VectorXd& a, int num_views,
                               int beams_per_view) {
  double worst = 0.0;
  for (int q = 0; q < num_views; ++q)
    for (int r = 1; r < beams_per_view; ++r)
      worst = std::max(worst, std::abs(a[q * beams_per_view + r] -
                                       a[q * beams_per_view + r - 1]));
  return worst;
}

double percentile95(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(0.95 * (v.size() - 1) + 0.5);
  return v[std::min(idx, v.size() - 1)];
}

}  // namespace

Dataset build_dataset(const RunConfig& config, const RoIGrid& grid,
                      const SensitivityMatrix& L, const TransitionPair& specs,
                      std::uint64_t seed, int threads) {
  const int total = config.data_count_train + config.data_count_val + config.data_count_test;
  const int num_views = config.geom_num_views;
  const int beams_per_view = config.geom_beams_per_view;
  if (L.rows() != static_cast<Eigen::Index>(num_views) * beams_per_view)
    throw CompatError("sensitivity matrix row count does not match the layout");
  if (L.cols() != grid.active_count)
    throw CompatError("sensitivity matrix column count does not match the grid");

  std::vector<FieldPair> fields(static_cast<std::size_t>(total));
  std::vector<ProjectionPair> projections(static_cast<std::size_t>(total));
  auto generate = [&](int begin, int end) {
    for (int e = begin; e < end; ++e) {
      Rng stream = Rng::stream(seed, static_cast<std::uint64_t>(e));
      fields[static_cast<std::size_t>(e)] = sample_phantom(stream, grid, config);
      projections[static_cast<std::size_t>(e)] =
          forward(fields[static_cast<std::size_t>(e)], L, specs);
    }
  };
  if (threads <= 1) {
    generate(0, total);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (total + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(total, begin + chunk);
      if (begin < end) pool.emplace_back(generate, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  // Shuffle examples into the train/val/test blocks with a dedicated stream.
  std::vector<std::uint32_t> order(static_cast<std::size_t>(total));
  Rng shuffler = Rng::stream(seed, 0x73706c6974ULL);  // "split"
  shuffler.shuffle(order.data(), order.size());

  Dataset dataset;
  dataset.count_train = config.data_count_train;
  dataset.count_val = config.data_count_val;
  dataset.count_test = config.data_count_test;
  dataset.seed = seed;
  dataset.fields.reserve(static_cast<std::size_t>(total));
  dataset.projections.reserve(static_cast<std::size_t>(total));
  for (int e = 0; e < total; ++e) {
    dataset.fields.push_back(std::move(fields[order[static_cast<std::size_t>(e)]]));
    dataset.projections.push_back(std::move(projections[order[static_cast<std::size_t>(e)]]));
  }

  std::vector<double> diffs1, diffs2;
  diffs1.reserve(dataset.projections.size());
  diffs2.reserve(dataset.projections.size());
  for (const auto& p : dataset.projections) {
    diffs1.push_back(max_adjacent_difference(p.nu1, num_views, beams_per_view));
    diffs2.push_back(max_adjacent_difference(p.nu2, num_views, beams_per_view));
  }
  dataset.smooth_p95_nu1 = percentile95(std::move(diffs1));
  dataset.smooth_p95_nu2 = percentile95(std::move(diffs2));
  return dataset;
}

StandardizationStats compute_standardization(const Dataset& dataset) {
  const int pool = dataset.count_train + dataset.count_val;
  if (pool < 2) throw NumericError("standardisation pool needs at least two examples");
  const Eigen::Index m = dataset.projections.front().nu1.size();
  StandardizationStats stats;
  stats.mean_nu1 = Eigen::VectorXd::Zero(m);
  stats.mean_nu2 = Eigen::VectorXd::Zero(m);
  stats.std_nu1 = Eigen::VectorXd::Zero(m);
  stats.std_nu2 = Eigen::VectorXd::Zero(m);
  for (int e = 0; e < pool; ++e) {
    stats.mean_nu1 += dataset.projections[static_cast<std::size_t>(e)].nu1;
    stats.mean_nu2 += dataset.projections[static_cast<std::size_t>(e)].nu2;
  }
  stats.mean_nu1 /= pool;
  stats.mean_nu2 /= pool;
  for (int e = 0; e < pool; ++e) {
    stats.std_nu1 += (dataset.projections[static_cast<std::size_t>(e)].nu1 - stats.mean_nu1)
                         .cwiseAbs2();
    stats.std_nu2 += (dataset.projections[static_cast<std::size_t>(e)].nu2 - stats.mean_nu2)
                         .cwiseAbs2();
  }
  stats.std_nu1 = (stats.std_nu1 / pool).cwiseSqrt();
  stats.std_nu2 = (stats.std_nu2 / pool).cwiseSqrt();
  if ((stats.std_nu1.array() <= 0.0).any() || (stats.std_nu2.array() <= 0.0).any())
    throw NumericError("a beam has zero spread over the training+validation pool");
  return stats;
}

ProjectionPair standardize(const ProjectionPair& raw, const StandardizationStats& stats) {
  return {(raw.nu1 - stats.mean_nu1).cwiseQuotient(stats.std_nu1),
          (raw.nu2 - stats.mean_nu2).cwiseQuotient(stats.std_nu2)};
}

ProjectionPair add_noise(const ProjectionPair& raw, double snr_db, Rng& rng) {
  if (std::isinf(snr_db)) return raw;
  if (!std::isfinite(snr_db)) throw NumericError("snr_db must be finite or +inf");
  const double scale = std::pow(10.0, -snr_db / 20.0);
  ProjectionPair noisy = raw;
  const double rms1 = std::sqrt(raw.nu1.squaredNorm() / raw.nu1.size());
  const double rms2 = std::sqrt(raw.nu2.squaredNorm() / raw.nu2.size());
  for (Eigen::Index i = 0; i < raw.nu1.size(); ++i) noisy.nu1[i] += rms1 * scale * rng.normal();
  for (Eigen::Index i = 0; i < raw.nu2.size(); ++i) noisy.nu2[i] += rms2 * scale * rng.normal();
  return noisy;
}

void write_dataset(const std::string& path, const Dataset& dataset) {
  const Eigen::Index m = dataset.projections.empty() ? 0 : dataset.projections.front().nu1.size();
  const Eigen::Index n = dataset.fields.empty() ? 0 : dataset.fields.front().concentration.size();
  BinWriter w(path);
  w.magic("CSTD");
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(m));
  w.u32(static_cast<std::uint32_t>(n));
  w.u32(static_cast<std::uint32_t>(dataset.count_train));
  w.u32(static_cast<std::uint32_t>(dataset.count_val));
  w.u32(static_cast<std::uint32_t>(dataset.count_test));
  w.u64(dataset.seed);
  w.bytes(dataset.geometry_digest.data(), dataset.geometry_digest.size());
  w.f64(dataset.smooth_p95_nu1);
  w.f64(dataset.smooth_p95_nu2);
  std::vector<float> buf(static_cast<std::size_t>(n));
  for (int e = 0; e < dataset.total(); ++e) {
    const auto& f = dataset.fields[static_cast<std::size_t>(e)];
    const auto& p = dataset.projections[static_cast<std::size_t>(e)];
    for (Eigen::Index j = 0; j < n; ++j) buf[static_cast<std::size_t>(j)] = static_cast<float>(f.concentration[j]);
    w.f32_array(buf.data(), buf.size());
    for (Eigen::Index j = 0; j < n; ++j) buf[static_cast<std::size_t>(j)] = static_cast<float>(f.temperature[j]);
    w.f32_array(buf.data(), buf.size());
    w.f64_array(p.nu1.data(), static_cast<std::size_t>(m));
    w.f64_array(p.nu2.data(), static_cast<std::size_t>(m));
  }
  w.close();
}

Dataset read_dataset(const std::string& path) {
  BinReader r(path);
  r.expect_magic("CSTD");
  if (r.u16() != 1) throw IoError("unsupported CSTD version");
  const auto m = r.u32();
  const auto n = r.u32();
  Dataset dataset;
  dataset.count_train = static_cast<int>(r.u32());
  dataset.count_val = static_cast<int>(r.u32());
  dataset.count_test = static_cast<int>(r.u32());
  dataset.seed = r.u64();
  r.bytes(dataset.geometry_digest.data(), dataset.geometry_digest.size());
  dataset.smooth_p95_nu1 = r.f64();
  dataset.smooth_p95_nu2 = r.f64();
  const int total = dataset.total();
  dataset.fields.resize(static_cast<std::size_t>(total));
  dataset.projections.resize(static_cast<std::size_t>(total));
  std::vector<float> buf(static_cast<std::size_t>(n));
  for (int e = 0; e < total; ++e) {
    auto& f = dataset.fields[static_cast<std::size_t>(e)];
    auto& p = dataset.projections[static_cast<std::size_t>(e)];
    f.concentration.resize(n);
    f.temperature.resize(n);
    r.f32_array(buf.data(), buf.size());
    for (std::uint32_t j = 0; j < n; ++j) f.concentration[j] = buf[j];
    r.f32_array(buf.data(), buf.size());
    for (std::uint32_t j = 0; j < n; ++j) f.temperature[j] = buf[j];
    p.nu1.resize(m);
    p.nu2.resize(m);
    r.f64_array(p.nu1.data(), m);
    r.f64_array(p.nu2.data(), m);
  }
  if (!r.at_eof()) throw IoError("trailing bytes in dataset file: " + path);
  return dataset;
}

void write_dataset_manifest(const std::string& path, const Dataset& dataset,
                            const RunConfig& config) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  char buf[128];
  auto kv = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.17g\n", key, v);
    out << buf;
  };
  out << "count_train = " << dataset.count_train << "\n";
  out << "count_val = " << dataset.count_val << "\n";
  out << "count_test = " << dataset.count_test << "\n";
  out << "seed = " << dataset.seed << "\n";
  out << "geometry_digest = " << Sha256::hex(dataset.geometry_digest) << "\n";
  kv("x_min", config.data_x_min);
  kv("x_max", config.data_x_max);
  kv("t_min", config.data_t_min);
  kv("t_max", config.data_t_max);
  kv("sigma_frac_lo", config.data_sigma_frac_lo);
  kv("sigma_frac_hi", config.data_sigma_frac_hi);
  out << "blob_count_choices = 1,2,3\n";
  out << "center_rule = uniform over points >= 1 pixel inside the octagon\n";
  out << "scale_rule = xi ~ U(0.7, 1); rho ~ U(1/3, 1)\n";
  kv("smooth_p95_nu1", dataset.smooth_p95_nu1);
  kv("smooth_p95_nu2", dataset.smooth_p95_nu2);
  if (!out) throw IoError("write failed: " + path);
}

void write_example_csv(const std::string& path, const RoIGrid& grid,
                       const Eigen::VectorXd& concentration,
                       const Eigen::VectorXd& temperature) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "pixel,x_cm,y_cm,concentration,temperature_k\n";
  char buf[160];
  for (int j = 0; j < grid.active_count; ++j) {
    const Vec2& c = grid.pixel_centers[static_cast<std::size_t>(j)];
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.17g,%.17g\n", j, c.x(), c.y(),
                  concentration[j], temperature[j]);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace cst
