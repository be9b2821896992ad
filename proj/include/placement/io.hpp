#pragma once

#include <string>

#include "json.hpp"

#include "placement/likelihood.hpp"
#include "placement/policy.hpp"
#include "placement/types.hpp"

namespace placement::io {

using json = nlohmann::json;

// Market directory: students.csv, jobs.csv, offers.csv, config.json.
// The latent record is written separately (oracle.json) and never read by
// estimation paths. params.json lives alongside when produced by `generate`.
void save_market(const Market& m, const std::string& dir);
Market load_market(const std::string& dir); // validates invariants

void save_oracle(const OracleRecord& o, const std::string& path);
OracleRecord load_oracle(const std::string& path);

void save_params(const ParameterSet& p, const CovariateLayout& layout, const std::string& path);
ParameterSet load_params(const std::string& path);

json config_to_json(const MarketConfig& c);
MarketConfig market_config_from_json(const json& j);
MarketConfig load_market_config(const std::string& path); // reads "market" section or whole file

EstimationConfig estimation_config_from_json(const json& j);
PolicySpec policy_spec_from_json(const json& j);

json read_json_file(const std::string& path);
void write_json_file(const json& j, const std::string& path);

// FNV-1a over the canonical dump; used in provenance headers.
std::string config_hash(const json& j);

} // namespace placement::io
