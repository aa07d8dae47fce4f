#ifndef QOED_CONFIG_HPP_
#define QOED_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "qoed/design.hpp"

namespace qoed {

// One experiment description: model, methods, seeds, thresholds, optimizer
// budgets, output location. Parsed from a plain-text key = value file
// (see docs/config.md) and overridable from CLI flags.
struct ExperimentConfig {
  std::string model_name = "nuisance_coupled";
  double sigma = -1.0;  // < 0: model default
  std::vector<double> phi_true;  // empty: per-model reference truth
  std::vector<double> param_lo;  // empty: model default box
  std::vector<double> param_hi;

  std::vector<ObjectiveKind> methods = {
      ObjectiveKind::kBoed, ObjectiveKind::kAgnostic, ObjectiveKind::kQoed};
  std::vector<std::uint64_t> seeds;  // default 25 seeds, 0..24

  CemConfig cem;
  ExplorationConfig exploration;
  std::string out = "qoed_out";

  ExperimentConfig();

  std::shared_ptr<DynamicsModel> make_configured_model() const;
  TrueSystem make_true_system() const;
};

// Reference hidden parameters for each shipped model.
std::vector<double> default_true_phi(const std::string& model_name);

// Errors: "config" with a line-tagged message on any syntax or key problem.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace qoed

#endif  // QOED_CONFIG_HPP_
