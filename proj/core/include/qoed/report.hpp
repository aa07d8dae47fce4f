#ifndef QOED_REPORT_HPP_
#define QOED_REPORT_HPP_

#include <string>
#include <vector>

#include "qoed/design.hpp"
#include "qoed/objectives.hpp"

namespace qoed {

// JSON text for one exploration run (schema in docs/output-schema.md).
std::string report_json(const ExplorationReport& report, std::uint64_t seed);

// JSON text for a bonus pipeline result: bonus, k, o, eigenvalues,
// rejections.
std::string bonus_json(const BonusResult& result);

// Deterministic number formatting shared by every emitter (%.10g, "nan"
// for NaN), so identical runs produce byte-identical files.
std::string format_number(double v);

// Minimal RFC-4180 quoting: fields containing comma, quote or newline are
// quoted with doubled inner quotes.
std::string csv_escape(const std::string& field);

}  // namespace qoed

#endif  // QOED_REPORT_HPP_
