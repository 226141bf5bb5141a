#include "cst/spectroscopy.hpp"

#include <cmath>

#include "cst/errors.hpp"

namespace cst {

namespace {
constexpr double kSecondRadiationConstant = 1.4387769;  // cm K
}

TransitionPair transitions_from_config(const RunConfig& config) {
  TransitionPair pair;
  pair.nu1 = {config.spect_nu1, config.spect_sref1, config.spect_epp1,
              config.spect_tref, config.spect_m};
  pair.nu2 = {config.spect_nu2, config.spect_sref2, config.spect_epp2,
              config.spect_tref, config.spect_m};
  return pair;
}

double line_strength(const TransitionSpec& spec, double temperature_k) {
  if (!(temperature_k > 0.0)) throw ConfigError("temperature must be > 0 K");
  const double ratio = spec.t_ref / temperature_k;
  const double boltzmann = std::exp(-kSecondRadiationConstant * spec.lower_state_energy *
                                    (1.0 / temperature_k - 1.0 / spec.t_ref));
  return spec.s_ref * std::pow(ratio, spec.partition_exponent) * boltzmann;
}

Eigen::VectorXd absorbance_density(const FieldPair& fields, const TransitionSpec& spec) {
  const Eigen::Index n = fields.concentration.size();
  if (fields.temperature.size() != n)
    throw CompatError("field pair has mismatched lengths");
  Eigen::VectorXd density(n);
  for (Eigen::Index j = 0; j < n; ++j)
    density[j] = fields.pressure_atm * fields.concentration[j] *
                 line_strength(spec, fields.temperature[j]);
  return density;
}

Eigen::VectorXd project(const SensitivityMatrix& L, const Eigen::VectorXd& density) {
  if (L.cols() != density.size())
    throw CompatError("sensitivity matrix and density vector dimensions disagree");
  return L * density;
}

ProjectionPair forward(const FieldPair& fields, const SensitivityMatrix& L,
                       const TransitionPair& specs) {
  return {project(L, absorbance_density(fields, specs.nu1)),
          project(L, absorbance_density(fields, specs.nu2))};
}

}  // namespace cst
