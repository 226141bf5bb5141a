#include "cst/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cst/errors.hpp"

namespace cst {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + s + "'");
  }
}

int parse_int(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": '" + s + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("bad boolean value for " + key + ": '" + s + "'");
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& part : split_commas(s)) out.push_back(parse_double(key, part));
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& s) {
  std::vector<int> out;
  for (const auto& part : split_commas(s)) out.push_back(parse_int(key, part));
  return out;
}

template <typename T, typename Fmt>
std::string format_list(const std::vector<T>& v, Fmt fmt) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt(v[i]);
  }
  return s;
}

struct KeyEntry {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::map<std::string, KeyEntry>& key_table() {
  static const std::map<std::string, KeyEntry> table = [] {
    std::map<std::string, KeyEntry> t;
    auto add_double = [&t](const std::string& k, double RunConfig::* f) {
      t[k] = {[k, f](RunConfig& c, const std::string& s) { c.*f = parse_double(k, s); },
              [f](const RunConfig& c) { return format_double(c.*f); }};
    };
    auto add_int = [&t](const std::string& k, int RunConfig::* f) {
      t[k] = {[k, f](RunConfig& c, const std::string& s) { c.*f = parse_int(k, s); },
              [f](const RunConfig& c) { return std::to_string(c.*f); }};
    };
    auto add_bool = [&t](const std::string& k, bool RunConfig::* f) {
      t[k] = {[k, f](RunConfig& c, const std::string& s) { c.*f = parse_bool(k, s); },
              [f](const RunConfig& c) { return c.*f ? "true" : "false"; }};
    };
    auto add_dlist = [&t](const std::string& k, std::vector<double> RunConfig::* f) {
      t[k] = {[k, f](RunConfig& c, const std::string& s) { c.*f = parse_double_list(k, s); },
              [f](const RunConfig& c) { return format_list(c.*f, format_double); }};
    };
    auto add_ilist = [&t](const std::string& k, std::vector<int> RunConfig::* f) {
      t[k] = {[k, f](RunConfig& c, const std::string& s) { c.*f = parse_int_list(k, s); },
              [f](const RunConfig& c) {
                return format_list(c.*f, [](int v) { return std::to_string(v); });
              }};
    };

    add_int("geom.num_views", &RunConfig::geom_num_views);
    add_int("geom.beams_per_view", &RunConfig::geom_beams_per_view);
    add_dlist("geom.view_angles_deg", &RunConfig::geom_view_angles_deg);
    add_double("geom.beam_spacing_cm", &RunConfig::geom_beam_spacing_cm);
    add_double("geom.beam_span_cm", &RunConfig::geom_beam_span_cm);
    add_double("geom.octagon_side_cm", &RunConfig::geom_octagon_side_cm);
    add_double("geom.pixel_pitch_cm", &RunConfig::geom_pixel_pitch_cm);
    add_bool("geom.square_roi", &RunConfig::geom_square_roi);

    add_double("spect.nu1", &RunConfig::spect_nu1);
    add_double("spect.nu2", &RunConfig::spect_nu2);
    add_double("spect.sref1", &RunConfig::spect_sref1);
    add_double("spect.sref2", &RunConfig::spect_sref2);
    add_double("spect.epp1", &RunConfig::spect_epp1);
    add_double("spect.epp2", &RunConfig::spect_epp2);
    add_double("spect.tref", &RunConfig::spect_tref);
    add_double("spect.m", &RunConfig::spect_m);
    add_double("spect.pressure_atm", &RunConfig::spect_pressure_atm);

    add_double("data.x_min", &RunConfig::data_x_min);
    add_double("data.x_max", &RunConfig::data_x_max);
    add_double("data.t_min", &RunConfig::data_t_min);
    add_double("data.t_max", &RunConfig::data_t_max);
    add_int("data.count_train", &RunConfig::data_count_train);
    add_int("data.count_val", &RunConfig::data_count_val);
    add_int("data.count_test", &RunConfig::data_count_test);
    add_double("data.sigma_frac_lo", &RunConfig::data_sigma_frac_lo);
    add_double("data.sigma_frac_hi", &RunConfig::data_sigma_frac_hi);
    add_bool("data.noise_augment", &RunConfig::data_noise_augment);
    add_double("data.noise_augment_snr_db", &RunConfig::data_noise_augment_snr_db);

    add_ilist("net.conv_filters", &RunConfig::net_conv_filters);
    add_int("net.smooth_filters", &RunConfig::net_smooth_filters);
    add_ilist("net.decoder_widths", &RunConfig::net_decoder_widths);

    add_double("train.tau", &RunConfig::train_tau);
    add_double("train.lr", &RunConfig::train_lr);
    add_double("train.weight_decay", &RunConfig::train_weight_decay);
    add_int("train.epochs", &RunConfig::train_epochs);
    add_int("train.batch_size", &RunConfig::train_batch_size);
    add_int("train.ensemble", &RunConfig::train_ensemble);

    add_dlist("eval.snr_db", &RunConfig::eval_snr_db);
    add_int("eval.noise_draws", &RunConfig::eval_noise_draws);
    t["eval.ie_denominator"] = {
        [](RunConfig& c, const std::string& s) {
          if (s != "true" && s != "reconstructed")
            throw ConfigError("eval.ie_denominator must be 'true' or 'reconstructed'");
          c.eval_ie_denominator = s;
        },
        [](const RunConfig& c) { return c.eval_ie_denominator; }};
    return t;
  }();
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto& table = key_table();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key: '" + key + "'");
  it->second.set(*this, value);
}

std::string RunConfig::snapshot() const {
  std::string out;
  for (const auto& [key, entry] : key_table()) {
    out += key;
    out += " = ";
    out += entry.get(*this);
    out += '\n';
  }
  return out;
}

void RunConfig::validate() const {
  if (geom_num_views < 1) throw ConfigError("geom.num_views must be >= 1");
  if (geom_beams_per_view < 2) throw ConfigError("geom.beams_per_view must be >= 2");
  if (static_cast<long long>(geom_num_views) * geom_beams_per_view > (1 << 20))
    throw ConfigError("beam count Q*R too large");
  if (geom_view_angles_deg.size() != static_cast<std::size_t>(geom_num_views))
    throw ConfigError("geom.view_angles_deg length must equal geom.num_views");
  for (std::size_t i = 0; i < geom_view_angles_deg.size(); ++i) {
    const double a = geom_view_angles_deg[i];
    if (a < 0.0 || a >= 180.0)
      throw ConfigError("view angles must lie in [0, 180)");
    if (i > 0 && a <= geom_view_angles_deg[i - 1])
      throw ConfigError("view angles must be strictly increasing");
  }
  if (geom_beam_spacing_cm <= 0.0) throw ConfigError("geom.beam_spacing_cm must be > 0");
  if (geom_beam_span_cm <= 0.0) throw ConfigError("geom.beam_span_cm must be > 0");
  if (geom_octagon_side_cm <= 0.0) throw ConfigError("geom.octagon_side_cm must be > 0");
  if (geom_pixel_pitch_cm <= 0.0) throw ConfigError("geom.pixel_pitch_cm must be > 0");

  if (spect_sref1 <= 0.0 || spect_sref2 <= 0.0) throw ConfigError("sref must be > 0");
  if (spect_tref <= 0.0) throw ConfigError("spect.tref must be > 0");

  if (!(data_x_min < data_x_max)) throw ConfigError("data.x_min must be < data.x_max");
  if (!(data_t_min < data_t_max)) throw ConfigError("data.t_min must be < data.t_max");
  if (data_x_min < 0.0 || data_x_max > 1.0)
    throw ConfigError("molar fraction bounds must lie in [0, 1]");
  if (data_t_min <= 0.0) throw ConfigError("data.t_min must be > 0");
  if (data_count_train < 1 || data_count_val < 1 || data_count_test < 1)
    throw ConfigError("split counts must be >= 1");
  if (!(data_sigma_frac_lo > 0.0 && data_sigma_frac_lo <= data_sigma_frac_hi))
    throw ConfigError("sigma_frac bounds must satisfy 0 < lo <= hi");

  if (net_conv_filters.empty()) throw ConfigError("net.conv_filters must be non-empty");
  for (int f : net_conv_filters)
    if (f < 1) throw ConfigError("conv filter counts must be >= 1");
  if (net_smooth_filters < 1) throw ConfigError("net.smooth_filters must be >= 1");
  for (int w : net_decoder_widths)
    if (w < 1) throw ConfigError("decoder widths must be >= 1");

  if (train_tau < 0.0 || train_tau > 1.0) throw ConfigError("train.tau must be in [0, 1]");
  if (train_epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (train_batch_size < 2) throw ConfigError("train.batch_size must be >= 2");
  if (train_ensemble < 1) throw ConfigError("train.ensemble must be >= 1");
  if (eval_noise_draws < 1) throw ConfigError("eval.noise_draws must be >= 1");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_config(ss.str());
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override must be key=value: '" + ov + "'");
    cfg.set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

}  // namespace cst
