#pragma once

// Serialization of run results: CSV for continuation records, JSON (schema v1)
// for everything, and gnuplot-ready two-column profile tables.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvtorus/config.hpp"

namespace curvtorus {

using Json = nlohmann::ordered_json;

// Header plus one row per record; columns are the record fields in declared
// order. blowup_point is "x;y" or empty.
std::string records_csv(const std::vector<ContinuationRecord>& records);
std::string format_number(double v);

Json metadata(const RunConfig& cfg, const std::string& command);

Json to_json(const MinimizeResult& r);
Json to_json(const ContinuationRecord& r);
Json to_json(const RecordDiagnostics& d);
Json to_json(const SweepSummary& s);
Json to_json(const BetaPrimeEstimate& b);
Json to_json(const ComparisonFn& c);
Json to_json(const AlphaResult& a);
Json to_json(const EpsilonStar& e);
Json to_json(const MonotonicityProbe& m);
Json to_json(const BubbleReport& b, bool with_profile = true);
Json to_json(const DichotomyResult& d);
Json to_json(const LambdaMaxSummary& s);
Json to_json(const Problem& p);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);
// profile_ray<k>.dat (radius, w_n) per ray and profile_model.dat (radius, model).
void write_profile_tables(const std::filesystem::path& dir, const BubbleReport& b);

}  // namespace curvtorus
