#include "qoed/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "qoed/error.hpp"

namespace qoed {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

double parse_double(const std::string& value, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("config",
                "line " + std::to_string(line) + ": expected a number, got '" +
                    value + "'");
  }
}

long parse_long(const std::string& value, int line) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("config",
                "line " + std::to_string(line) + ": expected an integer, got '" +
                    value + "'");
  }
}

bool parse_bool(const std::string& value, int line) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw Error("config",
              "line " + std::to_string(line) + ": expected a boolean, got '" +
                  value + "'");
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  seeds.resize(25);
  for (int i = 0; i < 25; ++i) seeds[i] = static_cast<std::uint64_t>(i);
}

std::vector<double> default_true_phi(const std::string& model_name) {
  if (model_name == "linear_gaussian") return {0.9, 0.2};
  if (model_name == "push2d") return {1.2, 0.4};
  if (model_name == "nuisance_coupled") return {0.8, 0.6, 0.25, -0.1};
  throw Error("unknown-model", "no model named '" + model_name + "'");
}

std::shared_ptr<DynamicsModel> ExperimentConfig::make_configured_model() const {
  std::shared_ptr<DynamicsModel> model;
  if (sigma >= 0.0) {
    model = make_model(model_name, sigma);
  } else if (model_name == "linear_gaussian") {
    model = std::make_shared<LinearGaussian1D>();
  } else if (model_name == "push2d") {
    model = std::make_shared<Push2D>();
  } else if (model_name == "nuisance_coupled") {
    model = std::make_shared<NuisanceCoupled>();
  } else {
    throw Error("unknown-model", "no model named '" + model_name + "'");
  }
  if (!param_lo.empty() || !param_hi.empty()) {
    Eigen::VectorXd lo = model->param_lo();
    Eigen::VectorXd hi = model->param_hi();
    if (!param_lo.empty()) {
      if (static_cast<int>(param_lo.size()) != model->param_dim()) {
        throw Error("config", "param_lo has wrong dimension for " + model_name);
      }
      lo = Eigen::Map<const Eigen::VectorXd>(param_lo.data(), param_lo.size());
    }
    if (!param_hi.empty()) {
      if (static_cast<int>(param_hi.size()) != model->param_dim()) {
        throw Error("config", "param_hi has wrong dimension for " + model_name);
      }
      hi = Eigen::Map<const Eigen::VectorXd>(param_hi.data(), param_hi.size());
    }
    model->override_param_bounds(lo, hi);
  }
  return model;
}

TrueSystem ExperimentConfig::make_true_system() const {
  TrueSystem truth;
  truth.model = make_configured_model();
  const std::vector<double> phi =
      phi_true.empty() ? default_true_phi(model_name) : phi_true;
  if (static_cast<int>(phi.size()) != truth.model->param_dim()) {
    throw Error("config", "phi_true has wrong dimension for " + model_name);
  }
  truth.phi = Eigen::Map<const Eigen::VectorXd>(phi.data(), phi.size());
  if (!truth.model->phi_in_bounds(truth.phi)) {
    throw Error("config", "phi_true outside the model parameter box");
  }
  truth.s0 = Eigen::VectorXd::Zero(truth.model->state_dim());
  return truth;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  bool seeds_set = false;

  while (std::getline(ss, raw)) {
    ++line_no;
    std::string line = raw;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config", "line " + std::to_string(line_no) +
                                ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error("config", "line " + std::to_string(line_no) +
                                ": empty key or value");
    }

    if (key == "model") {
      cfg.model_name = value;
    } else if (key == "sigma") {
      cfg.sigma = parse_double(value, line_no);
    } else if (key == "phi_true") {
      cfg.phi_true.clear();
      for (const std::string& item : split_list(value)) {
        cfg.phi_true.push_back(parse_double(item, line_no));
      }
    } else if (key == "param_lo") {
      cfg.param_lo.clear();
      for (const std::string& item : split_list(value)) {
        cfg.param_lo.push_back(parse_double(item, line_no));
      }
    } else if (key == "param_hi") {
      cfg.param_hi.clear();
      for (const std::string& item : split_list(value)) {
        cfg.param_hi.push_back(parse_double(item, line_no));
      }
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const std::string& item : split_list(value)) {
        cfg.methods.push_back(objective_kind_from_string(item));
      }
      if (cfg.methods.empty()) {
        throw Error("config", "line " + std::to_string(line_no) +
                                  ": methods list is empty");
      }
    } else if (key == "seeds") {
      const long n = parse_long(value, line_no);
      if (n < 1) {
        throw Error("config", "line " + std::to_string(line_no) +
                                  ": need at least one seed");
      }
      cfg.seeds.clear();
      for (long i = 0; i < n; ++i) cfg.seeds.push_back(i);
      seeds_set = true;
    } else if (key == "seed_list") {
      cfg.seeds.clear();
      for (const std::string& item : split_list(value)) {
        cfg.seeds.push_back(static_cast<std::uint64_t>(parse_long(item, line_no)));
      }
      if (cfg.seeds.empty()) {
        throw Error("config", "line " + std::to_string(line_no) +
                                  ": seed_list is empty");
      }
      seeds_set = true;
    } else if (key == "delta_eig") {
      cfg.exploration.thresholds.delta_eig = parse_double(value, line_no);
    } else if (key == "alpha_eig") {
      cfg.exploration.thresholds.alpha_eig = parse_double(value, line_no);
    } else if (key == "delta_cos") {
      cfg.exploration.thresholds.delta_cos = parse_double(value, line_no);
    } else if (key == "eps") {
      cfg.exploration.thresholds.eps =
          value == "auto" ? -1.0 : parse_double(value, line_no);
    } else if (key == "budget") {
      cfg.exploration.thresholds.budget =
          static_cast<int>(parse_long(value, line_no));
    } else if (key == "alpha") {
      cfg.exploration.alpha = parse_double(value, line_no);
    } else if (key == "horizon_seconds") {
      cfg.exploration.horizon_seconds = parse_double(value, line_no);
    } else if (key == "dt") {
      cfg.exploration.dt = parse_double(value, line_no);
    } else if (key == "gamma") {
      cfg.exploration.gamma = parse_double(value, line_no);
    } else if (key == "delta_var") {
      cfg.exploration.delta_var = parse_double(value, line_no);
    } else if (key == "delta_dyn") {
      cfg.exploration.delta_dyn = parse_double(value, line_no);
    } else if (key == "max_rounds") {
      cfg.exploration.max_rounds = static_cast<int>(parse_long(value, line_no));
    } else if (key == "design_iterations") {
      cfg.exploration.design_iterations =
          static_cast<int>(parse_long(value, line_no));
    } else if (key == "design_samples") {
      cfg.exploration.design_samples =
          static_cast<int>(parse_long(value, line_no));
    } else if (key == "design_init_std_frac") {
      cfg.exploration.design_init_std_frac = parse_double(value, line_no);
    } else if (key == "design_elite_fraction") {
      cfg.exploration.design_elite_fraction = parse_double(value, line_no);
    } else if (key == "bonus_samples") {
      cfg.exploration.bonus_samples =
          static_cast<int>(parse_long(value, line_no));
    } else if (key == "belief_fim_samples") {
      cfg.exploration.belief_fim_samples =
          static_cast<int>(parse_long(value, line_no));
    } else if (key == "eval_pairs") {
      cfg.exploration.eval_pairs = static_cast<int>(parse_long(value, line_no));
    } else if (key == "average_bonus_over_belief") {
      cfg.exploration.average_bonus_over_belief = parse_bool(value, line_no);
    } else if (key == "cem_iterations") {
      cfg.cem.iterations = static_cast<int>(parse_long(value, line_no));
    } else if (key == "cem_samples") {
      cfg.cem.samples_per_iter = static_cast<int>(parse_long(value, line_no));
    } else if (key == "cem_elite_fraction") {
      cfg.cem.elite_fraction = parse_double(value, line_no);
    } else if (key == "cem_variance_floor") {
      cfg.cem.variance_floor = parse_double(value, line_no);
    } else if (key == "rollouts_per_candidate") {
      cfg.cem.rollouts_per_candidate =
          static_cast<int>(parse_long(value, line_no));
    } else if (key == "out") {
      cfg.out = value;
    } else {
      throw Error("config", "line " + std::to_string(line_no) +
                                ": unknown key '" + key + "'");
    }
  }

  if (!seeds_set && cfg.seeds.empty()) {
    throw Error("config", "at least one seed is required");
  }
  if (cfg.exploration.thresholds.delta_eig <= 0.0 ||
      cfg.exploration.thresholds.alpha_eig <= 0.0 ||
      cfg.exploration.thresholds.delta_cos <= 0.0) {
    throw Error("config", "thresholds must be positive");
  }
  if (cfg.exploration.horizon_seconds <= 0.0 || cfg.exploration.dt <= 0.0 ||
      cfg.exploration.delta_var <= 0.0 || cfg.exploration.delta_dyn <= 0.0 ||
      cfg.exploration.max_rounds < 1 || cfg.exploration.alpha < 0.0) {
    throw Error("config", "exploration settings must be positive");
  }
  if (!(cfg.exploration.gamma > 0.0) || cfg.exploration.gamma > 1.0) {
    throw Error("config", "gamma must lie in (0, 1]");
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("config", "cannot open config file '" + path + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace qoed
