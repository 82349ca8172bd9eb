#pragma once

#include "nlspde/bounds.hpp"
#include "nlspde/ensemble.hpp"
#include "nlspde/verify.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace nlspde {

using Json = nlohmann::ordered_json;

/// Non-finite numbers become null so the output stays valid JSON.
Json number(double v);

Json to_json(const PathRecord& record);
/// One compact JSON object per line, fields in a fixed order.
void write_jsonl(std::ostream& out, const std::vector<PathRecord>& records);

/// One row per checkpoint, %.17g numbers.
void write_stats_csv(std::ostream& out, const EnsembleStats& stats);
Json to_json(const EnsembleStats& stats);

Json to_json(const BoundsReport& report);
/// Aligned two-column text table.
std::string render_table(const BoundsReport& report);

Json to_json(const CheckReport& report);
Json to_json(const std::vector<CheckReport>& reports);
std::string render_table(const std::vector<CheckReport>& reports);

/// %.17g
std::string format_number(double v);

}  // namespace nlspde
