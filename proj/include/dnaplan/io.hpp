#pragma once

// File formats. Readers accept nlohmann JSON; writers go through dump_stable,
// which fixes field order and prints every double with 17 significant digits
// so outputs are byte-reproducible and round-trip exactly.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnaplan/diagnostics.hpp"
#include "dnaplan/dna.hpp"
#include "dnaplan/flow_sim.hpp"
#include "dnaplan/graph.hpp"
#include "dnaplan/oracle.hpp"
#include "dnaplan/predictor.hpp"

namespace dnaplan::io {

using Json = nlohmann::ordered_json;

/// Two-space indented JSON, doubles as %.17g, trailing newline.
std::string dump_stable(const Json& j);
std::string format_double(double x);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& contents);
Json read_json(const std::filesystem::path& p);

// DNA profile: {"grid": [...], "values": [...], "meta": {...}} or CSV "t,c".
// Grids whose maximum exceeds 1 are rescaled into [0, 1].
DnaProfile dna_from_json(const Json& j);
Json dna_to_json(const DnaProfile& dna);
DnaProfile dna_from_csv(const std::string& text);
/// Dispatches on extension (.csv) or content.
DnaProfile load_dna(const std::filesystem::path& p);

Json schedule_to_json(const Schedule& s, const Json& source);
Json adaptive_to_json(const AdaptivePlanResult& r, const Json& source);
Json oracle_to_json(const oracle::OracleResult& r, const DnaProfile& dna);

struct ScheduleFile {
  std::vector<double> timesteps;
  double total_cost = 0.0;
};
ScheduleFile schedule_from_json(const Json& j);

Json params_to_json(const predictor::RegressorParams& p);
predictor::RegressorParams params_from_json(const Json& j);

std::vector<predictor::Sample> dataset_from_json(const Json& j);
Json dataset_to_json(const std::vector<predictor::Sample>& data, std::span<const double> grid);

flow::SimScenario scenario_from_json(const Json& j);
Json scenario_to_json(const flow::SimScenario& s);
std::string rollout_to_csv(const flow::RolloutReport& r);

Json report_to_json(const diagnostics::StabilityReport& r);
std::string gains_to_csv(const diagnostics::GainSeries& g);

}  // namespace dnaplan::io
