#ifndef UCMPC_SCENARIO_HPP_
#define UCMPC_SCENARIO_HPP_

#include <optional>
#include <string>
#include <vector>

#include "ucmpc/sim.hpp"

namespace ucmpc {

/// Expected-value block for the tighten report (all optional).
struct ExpectedValues {
  std::optional<Vec> rho_tilde;
  double rho_tilde_tol = 0.02;
  std::optional<Vec> rho_ua;
  double rho_ua_tol = 0.05;
  std::optional<Vec> rho_tilde_u;
  double rho_tilde_u_tol = 0.1;
  std::optional<Vec> x_n_upper;
  double x_n_tol = 0.02;
  std::optional<Vec> u_n_upper;
  double u_n_tol = 0.1;
};

struct Scenario {
  std::string plant_name;  // "f16" or "custom"
  PlantSpec plant;
  std::string uncertainty_name;  // "f16", "f16_matched_only", "zero"
  UncertaintySpec uncertainty;
  L1Config l1;
  AlgorithmOptions tightening;
  MpcConfig mpc;
  SimConfig sim;
  double rpi_dt_s = 0.01;
  double rpi_tol = 1e-9;
  std::vector<Variant> variants;
  std::string output_dir = "out";
  ExpectedValues expected;
  std::string resolved_json;  // canonical echo of the parsed config
};

/// Parses and validates a scenario file; throws std::runtime_error with the
/// offending field on failure.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

/// Built-in default scenario matching the flight-control case study.
std::string f16_default_config_json();

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& s);

/// Serialization helpers for the result files.
std::string tightening_to_json(const TighteningResult& r);
std::string verdict_to_json(const Verdict& v);

}  // namespace ucmpc

#endif
