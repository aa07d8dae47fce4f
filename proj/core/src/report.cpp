#include "qoed/report.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace qoed {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += "\"";
  return out;
}

namespace {

json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

std::string report_json(const ExplorationReport& report, std::uint64_t seed) {
  json j;
  j["method"] = to_string(report.kind);
  j["seed"] = seed;
  j["terminated_early"] = report.terminated_early;
  j["phi_final"] = vector_to_json(report.phi_final);
  j["rounds"] = json::array();
  for (const RoundRecord& r : report.rounds) {
    json round;
    round["round"] = r.round;
    round["phi_hat"] = vector_to_json(r.phi_hat);
    round["belief_trace"] = r.belief_trace;
    round["bonus"] = r.bonus;
    round["boed"] = r.boed;
    round["agnostic"] = r.agnostic;
    round["qoed"] = r.qoed;
    round["eta"] = number_or_null(r.eta);
    round["beta"] = number_or_null(r.beta);
    round["rho"] = number_or_null(r.rho);
    round["rmse_x100"] = r.rmse_x100();
    round["param_rmse_x100"] = r.param_rmse_x100();
    round["selected_k"] = r.selected_k;
    j["rounds"].push_back(round);
  }
  return j.dump(2) + "\n";
}

std::string bonus_json(const BonusResult& result) {
  json j;
  j["bonus"] = result.bonus;
  j["k"] = result.selection.k;
  j["o"] = result.split.observable_idx;
  j["threshold_used"] = result.split.threshold_used;
  json eigs = json::array();
  for (int i = 0; i < result.decomp.eigenvalues.size(); ++i) {
    eigs.push_back(result.decomp.eigenvalues(i));
  }
  j["eigenvalues"] = eigs;
  j["objective_value"] = result.selection.objective_value;
  json rej = json::array();
  for (const auto& [idx, reason] : result.selection.rejected) {
    rej.push_back({{"index", idx}, {"reason", to_string(reason)}});
  }
  j["rejected"] = rej;
  return j.dump(2) + "\n";
}

}  // namespace qoed
