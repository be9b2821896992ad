#pragma once

#include <cstdint>
#include <string>

#include "placement/estimate.hpp"
#include "placement/policy.hpp"
#include "placement/stages.hpp"

namespace placement::report {

// Seed + config hash stamped as a comment header on every emitted table.
struct Provenance {
    std::uint64_t seed = 0;
    std::string config_hash;
};

void write_stage_gaps(const StageGapResult& r, const Provenance& prov, const std::string& path);

// wtp_student.csv / wtp_employer.csv plus aligned text renditions.
void write_wtp_tables(const std::vector<WtpRow>& student, const std::vector<WtpRow>& employer,
                      const Provenance& prov, const std::string& dir);

void write_policy(const PolicyReport& r, const Provenance& prov, const std::string& dir);

void write_moments(const MomentsTable& t, const Provenance& prov, const std::string& path);

void write_estimation(const EstimationResult& r, const CovariateLayout& layout,
                      const Provenance& prov, const std::string& dir, double avg_salary);

} // namespace placement::report
