// qoed: information-objective experiment harness.
//
// Subcommands:
//   bonus   - run the bonus pipeline on a scores/trajectory file
//   bench   - objective comparison over seeds (CSV + JSON)
//   verify  - identity/bound/counterexample verification suite
//   sweep   - threshold robustness grid (CSV)
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qoed/bench.hpp"
#include "qoed/config.hpp"
#include "qoed/error.hpp"
#include "qoed/report.hpp"
#include "qoed/verify.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> n_seeds;
  std::optional<std::string> method;
  std::optional<std::string> out;
  std::optional<double> delta_eig;
  std::optional<double> alpha_eig;
  std::optional<double> delta_cos;
  std::optional<double> eps;
  std::optional<int> max_rounds;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config file");
  cmd->add_option("--seed", flags.seed, "single seed (replaces the seed list)");
  cmd->add_option("--seeds", flags.n_seeds, "number of seeds 0..N-1");
  cmd->add_option("--method", flags.method,
                  "objective kind: boed | agnostic | qoed");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--delta-eig", flags.delta_eig, "eigenvalue threshold");
  cmd->add_option("--alpha-eig", flags.alpha_eig,
                  "relative eigenvalue threshold");
  cmd->add_option("--delta-cos", flags.delta_cos, "row cosine threshold");
  cmd->add_option("--eps", flags.eps, "Schur stabilization (-1: scale-aware)");
  cmd->add_option("--max-rounds", flags.max_rounds, "exploration round cap");
}

qoed::ExperimentConfig resolve_config(const CommonFlags& flags) {
  qoed::ExperimentConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = qoed::load_config_file(flags.config_path);
  }
  if (flags.seed) cfg.seeds = {*flags.seed};
  if (flags.n_seeds) {
    cfg.seeds.clear();
    for (long i = 0; i < *flags.n_seeds; ++i) cfg.seeds.push_back(i);
  }
  if (flags.method) {
    cfg.methods = {qoed::objective_kind_from_string(*flags.method)};
  }
  if (flags.out) cfg.out = *flags.out;
  if (flags.delta_eig) cfg.exploration.thresholds.delta_eig = *flags.delta_eig;
  if (flags.alpha_eig) cfg.exploration.thresholds.alpha_eig = *flags.alpha_eig;
  if (flags.delta_cos) cfg.exploration.thresholds.delta_cos = *flags.delta_cos;
  if (flags.eps) cfg.exploration.thresholds.eps = *flags.eps;
  if (flags.max_rounds) cfg.exploration.max_rounds = *flags.max_rounds;
  if (cfg.seeds.empty()) {
    throw qoed::Error("config", "at least one seed is required");
  }
  return cfg;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? "."
                                          : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw qoed::Error("config", "cannot write '" + path.string() + "'");
  }
  out << content;
}

// Scores from {"scores": [[...], ...]} or a trajectory replayed through the
// configured model at phi (config truth by default).
std::vector<qoed::ScoreSample> load_scores(const std::string& path,
                                           const qoed::ExperimentConfig& cfg) {
  std::ifstream in(path);
  if (!in) {
    throw qoed::Error("config", "cannot open input file '" + path + "'");
  }
  nlohmann::json j;
  in >> j;

  std::vector<qoed::ScoreSample> scores;
  if (j.contains("scores")) {
    for (const auto& row : j.at("scores")) {
      Eigen::VectorXd g(row.size());
      for (std::size_t i = 0; i < row.size(); ++i) g(i) = row[i].get<double>();
      scores.push_back(g);
    }
    return scores;
  }
  if (j.contains("trajectory")) {
    const auto model = cfg.make_configured_model();
    const auto& jt = j.at("trajectory");
    qoed::Trajectory traj;
    for (const auto& row : jt.at("states")) {
      Eigen::VectorXd s(row.size());
      for (std::size_t i = 0; i < row.size(); ++i) s(i) = row[i].get<double>();
      traj.states.push_back(s);
    }
    for (const auto& row : jt.at("actions")) {
      Eigen::VectorXd a(row.size());
      for (std::size_t i = 0; i < row.size(); ++i) a(i) = row[i].get<double>();
      traj.actions.push_back(a);
    }
    Eigen::VectorXd phi;
    if (j.contains("phi")) {
      const auto& jphi = j.at("phi");
      phi.resize(jphi.size());
      for (std::size_t i = 0; i < jphi.size(); ++i) phi(i) = jphi[i].get<double>();
    } else {
      phi = cfg.make_true_system().phi;
    }
    scores.push_back(model->trajectory_score(traj, phi));
    return scores;
  }
  throw qoed::Error("config",
                    "input needs a 'scores' array or a 'trajectory' object");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher-information experiment design harness"};
  app.require_subcommand(1);

  CommonFlags bonus_flags, bench_flags, verify_flags, sweep_flags;
  std::string bonus_input;

  CLI::App* bonus = app.add_subcommand(
      "bonus", "information bonus and selection for a scores/trajectory file");
  add_common_flags(bonus, bonus_flags);
  bonus->add_option("input", bonus_input, "JSON input file")->required();

  CLI::App* bench = app.add_subcommand(
      "bench", "objective comparison across methods and seeds");
  add_common_flags(bench, bench_flags);

  CLI::App* verify = app.add_subcommand(
      "verify", "identity, bound and counterexample verification suite");
  add_common_flags(verify, verify_flags);

  CLI::App* sweep =
      app.add_subcommand("sweep", "threshold robustness grid (QOED/Agnostic)");
  add_common_flags(sweep, sweep_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (bonus->parsed()) {
      const qoed::ExperimentConfig cfg = resolve_config(bonus_flags);
      const auto scores = load_scores(bonus_input, cfg);
      qoed::BonusConfig thresholds = cfg.exploration.thresholds;
      const qoed::BonusResult result = qoed::qoed_bonus(scores, thresholds);
      std::cout << qoed::bonus_json(result);
      return 0;
    }

    if (bench->parsed()) {
      const qoed::ExperimentConfig cfg = resolve_config(bench_flags);
      const qoed::BenchResult result = qoed::run_bench(cfg);
      const std::filesystem::path dir(cfg.out);
      write_file(dir / "comparison.csv", qoed::comparison_csv(result));
      write_file(dir / "comparison.json", qoed::comparison_json(result));
      for (const qoed::MethodAggregate& agg : result.aggregates()) {
        std::cout << to_string(agg.method) << ": param_rmse_x100 "
                  << qoed::format_number(agg.param_mean) << " +- "
                  << qoed::format_number(agg.param_std) << ", dyn_rmse_x100 "
                  << qoed::format_number(agg.dyn_mean) << " +- "
                  << qoed::format_number(agg.dyn_std) << "\n";
      }
      std::cout << "wrote " << (dir / "comparison.csv").string() << " and "
                << (dir / "comparison.json").string() << "\n";
      return 0;
    }

    if (verify->parsed()) {
      const qoed::ExperimentConfig cfg = resolve_config(verify_flags);
      const auto results = qoed::run_verification(cfg.seeds.front());
      const int failures = qoed::print_check_results(std::cout, results);
      return failures == 0 ? 0 : 1;
    }

    if (sweep->parsed()) {
      const qoed::ExperimentConfig cfg = resolve_config(sweep_flags);
      const auto cells = qoed::run_sweep(cfg);
      const std::filesystem::path dir(cfg.out);
      write_file(dir / "sweep.csv", qoed::sweep_csv(cells));
      std::cout << "wrote " << (dir / "sweep.csv").string() << " ("
                << cells.size() << " cells)\n";
      return 0;
    }
  } catch (const qoed::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == "config" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
