#pragma once

#include <Eigen/Core>

#include "cst/config.hpp"
#include "cst/geometry.hpp"

namespace cst {

/// One absorption transition with the parameters of the two-parameter
/// line-strength scaling law.
struct TransitionSpec {
  double frequency = 0.0;       // nu, cm^-1
  double s_ref = 1.0;           // line strength at t_ref, cm^-2 atm^-1
  double lower_state_energy = 0.0;  // E'', cm^-1
  double t_ref = 296.0;         // K
  double partition_exponent = 1.5;  // m
};

/// The two transitions of a run, in input order (nu1, nu2).
struct TransitionPair {
  TransitionSpec nu1;
  TransitionSpec nu2;
};

TransitionPair transitions_from_config(const RunConfig& config);

/// Per-pixel concentration and temperature fields over the N active pixels.
struct FieldPair {
  Eigen::VectorXd concentration;  // molar fraction, [0, 1]
  Eigen::VectorXd temperature;    // K, > 0
  double pressure_atm = 1.0;      // uniform
};

/// Path-integrated absorbance per beam at the two frequencies.
struct ProjectionPair {
  Eigen::VectorXd nu1;  // length M
  Eigen::VectorXd nu2;  // length M
};

/// Line strength at temperature T:
///   S(T) = S_ref (T_ref/T)^m exp(-c2 E'' (1/T - 1/T_ref)),
/// with c2 the second radiation constant, 1.4387769 cm K. Throws ConfigError
/// for non-positive T.
double line_strength(const TransitionSpec& spec, double temperature_k);

/// Elementwise absorbance density a_j = P X_j S(T_j) over the pixels.
Eigen::VectorXd absorbance_density(const FieldPair& fields, const TransitionSpec& spec);

/// Path integration A = L a. Throws CompatError on dimension mismatch.
Eigen::VectorXd project(const SensitivityMatrix& L, const Eigen::VectorXd& density);

/// Full forward model at both frequencies.
ProjectionPair forward(const FieldPair& fields, const SensitivityMatrix& L,
                       const TransitionPair& specs);

}  // namespace cst
