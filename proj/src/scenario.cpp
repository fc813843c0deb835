#include "ucmpc/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ucmpc/f16.hpp"

namespace ucmpc {

using nlohmann::json;

namespace {

Vec to_vec(const json& j, const char* field) {
  if (!j.is_array()) {
    throw std::runtime_error(std::string("config: ") + field +
                             " must be an array");
  }
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

Mat to_mat(const json& j, const char* field) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw std::runtime_error(std::string("config: ") + field +
                             " must be a matrix (array of arrays)");
  }
  Mat m(j.size(), j[0].size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != j[0].size()) {
      throw std::runtime_error(std::string("config: ragged matrix in ") +
                               field);
    }
    for (std::size_t c = 0; c < j[r].size(); ++c) {
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json box_to_json(const HyperRect& b) {
  return json{{"lower", vec_to_json(b.lower())},
              {"upper", vec_to_json(b.upper())}};
}

double get_or(const json& j, const char* key, double dflt) {
  return j.contains(key) ? j.at(key).get<double>() : dflt;
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::UC: return "uc";
    case Variant::Vanilla: return "vanilla";
    case Variant::Tube: return "tube";
  }
  return "?";
}

Variant variant_from_name(const std::string& s) {
  if (s == "uc") return Variant::UC;
  if (s == "vanilla") return Variant::Vanilla;
  if (s == "tube") return Variant::Tube;
  throw std::runtime_error("config: unknown variant '" + s +
                           "' (expected uc|vanilla|tube)");
}

std::string f16_default_config_json() {
  return R"({
  "plant": "f16",
  "uncertainty": "f16",
  "l1": {
    "Ae_diag": -10.0,
    "bandwidths_rad_s": [200.0, 200.0],
    "gamma1": 0.02,
    "T_theory_s": 1e-7,
    "T_sim_s": 1e-4
  },
  "tightening": { "scale_offdiag": 0.01, "tol": 1e-4 },
  "mpc": {
    "horizon_s": 0.2,
    "dt_s": 0.01,
    "update_period_s": 0.01,
    "weight_tracking": 100.0,
    "weight_effort": 0.001,
    "weight_rate": 0.01,
    "soft_penalty": 1e6
  },
  "sim": {
    "dt_plant_s": 1e-4,
    "dt_l1_s": 1e-4,
    "dt_ctrl_s": 0.01,
    "t_end_s": 15.0,
    "reference_deg": [
      { "until_s": 7.5, "value": [9.0, 6.5] },
      { "until_s": 1e30, "value": [0.0, 0.0] }
    ]
  },
  "tube": { "rpi_dt_s": 0.01, "rpi_tol": 1e-9 },
  "variants": ["uc", "vanilla", "tube"],
  "output_dir": "out",
  "expected": {
    "rho_tilde": [0.08, 0.84, 0.09],
    "rho_tilde_tol": 0.02,
    "rho_ua": [4.34, 1.65],
    "rho_ua_tol": 0.05,
    "rho_tilde_u": [6.01, 3.83],
    "rho_tilde_u_tol": 0.1,
    "X_n_upper": [9.92, 99.17, 3.91],
    "X_n_tol": 0.02,
    "U_n_upper": [18.98, 18.16],
    "U_n_tol": 0.1
  }
})";
}

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("config: JSON parse error: ") +
                             e.what());
  }

  Scenario sc;
  // plant
  if (!j.contains("plant")) throw std::runtime_error("config: missing plant");
  if (j["plant"].is_string()) {
    sc.plant_name = j["plant"].get<std::string>();
    if (sc.plant_name != "f16") {
      throw std::runtime_error("config: unknown built-in plant '" +
                               sc.plant_name + "'");
    }
    sc.plant = f16_plant();
  } else {
    sc.plant_name = "custom";
    const auto& p = j["plant"];
    sc.plant.A = to_mat(p.at("A"), "plant.A");
    sc.plant.B = to_mat(p.at("B"), "plant.B");
    sc.plant.B_u = to_mat(p.at("B_u"), "plant.B_u");
    sc.plant.C = to_mat(p.at("C"), "plant.C");
    sc.plant.K_x = to_mat(p.at("K_x"), "plant.K_x");
    sc.plant.X = HyperRect(to_vec(p.at("X_lower"), "plant.X_lower"),
                           to_vec(p.at("X_upper"), "plant.X_upper"));
    sc.plant.U = HyperRect(to_vec(p.at("U_lower"), "plant.U_lower"),
                           to_vec(p.at("U_upper"), "plant.U_upper"));
    sc.plant.X0 = HyperRect::inf_ball(p.at("X0_radius").get<double>(),
                                      sc.plant.A.rows());
  }
  sc.plant.validate();

  // uncertainty
  sc.uncertainty_name =
      j.contains("uncertainty") ? j["uncertainty"].get<std::string>() : "zero";
  if (sc.uncertainty_name == "f16") {
    sc.uncertainty = f16_uncertainty(true);
  } else if (sc.uncertainty_name == "f16_matched_only") {
    sc.uncertainty = f16_uncertainty(false);
  } else if (sc.uncertainty_name == "zero") {
    sc.uncertainty = zero_uncertainty(sc.plant.B.cols());
  } else {
    throw std::runtime_error("config: unknown uncertainty '" +
                             sc.uncertainty_name + "'");
  }
  if (sc.uncertainty.channels() != sc.plant.B.cols()) {
    throw std::runtime_error("config: uncertainty channel count mismatch");
  }

  // l1
  const json l1 = j.contains("l1") ? j["l1"] : json::object();
  const auto n = sc.plant.A.rows();
  if (l1.contains("Ae")) {
    sc.l1.A_e = to_mat(l1["Ae"], "l1.Ae");
  } else {
    sc.l1.A_e = get_or(l1, "Ae_diag", -10.0) * Mat::Identity(n, n);
  }
  sc.l1.filter_bandwidths =
      l1.contains("bandwidths_rad_s")
          ? to_vec(l1["bandwidths_rad_s"], "l1.bandwidths_rad_s")
          : Vec::Constant(sc.plant.B.cols(), 200.0);
  sc.l1.gamma1 = get_or(l1, "gamma1", 0.02);
  sc.l1.T_theory_s = get_or(l1, "T_theory_s", 1e-7);
  sc.l1.T_sim_s = get_or(l1, "T_sim_s", 1e-4);
  sc.l1.validate();

  // tightening options
  const json tj = j.contains("tightening") ? j["tightening"] : json::object();
  sc.tightening.scale_offdiag = get_or(tj, "scale_offdiag", 0.01);
  sc.tightening.tol = get_or(tj, "tol", 1e-4);
  sc.tightening.norm_tol = get_or(tj, "norm_tol", 1e-6);
  if (tj.contains("u_opt_bound_override")) {
    sc.tightening.u_opt_bound_override =
        tj["u_opt_bound_override"].get<double>();
  }

  // mpc
  const json mj = j.contains("mpc") ? j["mpc"] : json::object();
  sc.mpc.horizon_s = get_or(mj, "horizon_s", 0.2);
  sc.mpc.dt_s = get_or(mj, "dt_s", 0.01);
  sc.mpc.update_period_s = get_or(mj, "update_period_s", 0.01);
  sc.mpc.weight_tracking = get_or(mj, "weight_tracking", 100.0);
  sc.mpc.weight_effort = get_or(mj, "weight_effort", 1e-3);
  sc.mpc.weight_rate = get_or(mj, "weight_rate", 1e-2);
  sc.mpc.soft_penalty = get_or(mj, "soft_penalty", 1e6);
  sc.mpc.qp_tol = get_or(mj, "qp_tol", 1e-7);
  sc.mpc.validate();

  // sim
  const json sj = j.contains("sim") ? j["sim"] : json::object();
  sc.sim.dt_plant_s = get_or(sj, "dt_plant_s", 1e-4);
  sc.sim.dt_l1_s = get_or(sj, "dt_l1_s", sc.sim.dt_plant_s);
  sc.sim.dt_ctrl_s = get_or(sj, "dt_ctrl_s", sc.mpc.update_period_s);
  sc.sim.t_end_s = get_or(sj, "t_end_s", 15.0);
  if (!sj.contains("reference_deg")) {
    throw std::runtime_error("config: sim.reference_deg is required");
  }
  for (const auto& seg : sj["reference_deg"]) {
    sc.sim.reference.segments.push_back(
        {seg.at("until_s").get<double>(), to_vec(seg.at("value"), "value")});
  }
  sc.sim.validate();

  // tube
  const json tb = j.contains("tube") ? j["tube"] : json::object();
  sc.rpi_dt_s = get_or(tb, "rpi_dt_s", 0.01);
  sc.rpi_tol = get_or(tb, "rpi_tol", 1e-9);

  if (j.contains("variants")) {
    for (const auto& v : j["variants"]) {
      sc.variants.push_back(variant_from_name(v.get<std::string>()));
    }
  }
  sc.output_dir =
      j.contains("output_dir") ? j["output_dir"].get<std::string>() : "out";

  if (j.contains("expected")) {
    const auto& e = j["expected"];
    auto opt_vec = [&](const char* key) -> std::optional<Vec> {
      if (!e.contains(key)) return std::nullopt;
      return to_vec(e[key], key);
    };
    sc.expected.rho_tilde = opt_vec("rho_tilde");
    sc.expected.rho_tilde_tol = get_or(e, "rho_tilde_tol", 0.02);
    sc.expected.rho_ua = opt_vec("rho_ua");
    sc.expected.rho_ua_tol = get_or(e, "rho_ua_tol", 0.05);
    sc.expected.rho_tilde_u = opt_vec("rho_tilde_u");
    sc.expected.rho_tilde_u_tol = get_or(e, "rho_tilde_u_tol", 0.1);
    sc.expected.x_n_upper = opt_vec("X_n_upper");
    sc.expected.x_n_tol = get_or(e, "X_n_tol", 0.02);
    sc.expected.u_n_upper = opt_vec("U_n_upper");
    sc.expected.u_n_tol = get_or(e, "U_n_tol", 0.1);
  }

  sc.resolved_json = j.dump(2);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scenario(ss.str());
}

std::string tightening_to_json(const TighteningResult& r) {
  json j;
  j["rho_r"] = r.rho_r;
  j["u_opt_bound"] = r.u_opt_bound;
  j["rho_check"] = vec_to_json(r.rho_check);
  j["rho"] = vec_to_json(r.rho);
  j["rho_tilde"] = vec_to_json(r.rho_tilde);
  j["rho_ua"] = vec_to_json(r.rho_ua);
  j["rho_tilde_u"] = vec_to_json(r.rho_tilde_u);
  j["gamma0"] = r.gamma0_val;
  j["gamma2"] = r.gamma2_val;
  j["T_final_s"] = r.T_final;
  j["filter_bandwidths_rad_s"] = vec_to_json(r.filter_bandwidths_final);
  j["X_r"] = box_to_json(r.X_r);
  j["X_a"] = box_to_json(r.X_a);
  j["X_tilde"] = box_to_json(r.X_tilde);
  j["U_tilde"] = box_to_json(r.U_tilde);
  j["U_a"] = box_to_json(r.U_a);
  j["X_n"] = box_to_json(r.X_n);
  j["U_n"] = box_to_json(r.U_n);
  json audit = json::array();
  for (const auto& a : r.audit) {
    audit.push_back(
        {{"name", a.name}, {"lhs", a.lhs}, {"rhs", a.rhs}, {"ok", a.ok}});
  }
  j["audit"] = audit;
  return j.dump(2);
}

std::string verdict_to_json(const Verdict& v) {
  json j;
  json checks = json::array();
  for (const auto& c : v.checks) {
    checks.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"worst_margin", c.worst_margin},
                      {"worst_time_s", c.worst_time},
                      {"violations", c.violations}});
  }
  j["checks"] = checks;
  j["tracking_rms"] = vec_to_json(v.tracking_rms);
  j["all_pass"] = v.all_pass();
  return j.dump(2);
}

}  // namespace ucmpc
