#pragma once

#include <string>
#include <vector>

#include "cst/sha256.hpp"

namespace cst {

/// Resolved run configuration: the union of all module settings.
///
/// Parsed from a key=value text file (one pair per line, '#' comments),
/// optionally overridden from the command line. Unknown keys are rejected.
/// Every run writes a canonical snapshot of the resolved config next to its
/// outputs; the snapshot re-parses to an identical config.
struct RunConfig {
  // geometry
  int geom_num_views = 4;
  int geom_beams_per_view = 8;
  std::vector<double> geom_view_angles_deg = {0.0, 45.0, 90.0, 135.0};
  double geom_beam_spacing_cm = 1.80;
  double geom_beam_span_cm = 36.76;
  double geom_octagon_side_cm = 12.60;
  double geom_pixel_pitch_cm = 0.766;
  bool geom_square_roi = false;

  // spectroscopy (sref/epp defaults are self-consistent placeholders, not
  // database values; see README)
  double spect_nu1 = 7185.6;
  double spect_nu2 = 7444.36;
  double spect_sref1 = 1.0;
  double spect_sref2 = 1.0;
  double spect_epp1 = 1045.0;
  double spect_epp2 = 1774.0;
  double spect_tref = 296.0;
  double spect_m = 1.5;
  double spect_pressure_atm = 1.0;

  // dataset
  double data_x_min = 0.01;
  double data_x_max = 0.12;
  double data_t_min = 318.0;
  double data_t_max = 1300.0;
  int data_count_train = 13440;
  int data_count_val = 5760;
  int data_count_test = 27;
  double data_sigma_frac_lo = 0.08;
  double data_sigma_frac_hi = 0.25;
  bool data_noise_augment = false;
  double data_noise_augment_snr_db = 35.0;

  // network
  std::vector<int> net_conv_filters = {64, 128, 256};
  int net_smooth_filters = 64;
  std::vector<int> net_decoder_widths = {8192, 4096, 2048};

  // training
  double train_tau = 0.5;
  double train_lr = 1e-3;
  double train_weight_decay = 2e-6;
  int train_epochs = 350;
  int train_batch_size = 64;
  int train_ensemble = 3;

  // evaluation
  std::vector<double> eval_snr_db = {20, 25, 30, 35, 40, 45};
  int eval_noise_draws = 10;
  std::string eval_ie_denominator = "true";  // "true" or "reconstructed"

  /// Applies one "key=value" assignment. Throws ConfigError on unknown key
  /// or malformed value.
  void set(const std::string& key, const std::string& value);

  /// Canonical text form: all keys, sorted, shortest round-trip numerals.
  std::string snapshot() const;

  Sha256::Digest digest() const { return Sha256::of(snapshot()); }

  /// Validates cross-field invariants (bounds ordered, counts positive, ...).
  /// Throws ConfigError.
  void validate() const;
};

/// Parses a config file and applies overrides ("key=value" strings) on top.
RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides = {});

/// Parses config text (without a file).
RunConfig parse_config(const std::string& text);

}  // namespace cst
