#include "placement/types.hpp"

#include <cmath>

namespace placement {

const char* to_string(Caste c) {
    return c == Caste::Advantaged ? "advantaged" : "disadvantaged";
}

const char* to_string(Degree d) {
    switch (d) {
        case Degree::BTech: return "btech";
        case Degree::DualDegree: return "dual";
        case Degree::MTech: return "mtech";
        case Degree::MS: return "ms";
    }
    return "?";
}

const char* to_string(Sector s) {
    switch (s) {
        case Sector::Technology: return "technology";
        case Sector::Consulting: return "consulting";
        case Sector::Manufacturing: return "manufacturing";
    }
    return "?";
}

Caste parse_caste(const std::string& s) {
    if (s == "advantaged") return Caste::Advantaged;
    if (s == "disadvantaged") return Caste::Disadvantaged;
    throw validation_error("unknown caste '" + s + "'");
}

Degree parse_degree(const std::string& s) {
    if (s == "btech") return Degree::BTech;
    if (s == "dual") return Degree::DualDegree;
    if (s == "mtech") return Degree::MTech;
    if (s == "ms") return Degree::MS;
    throw validation_error("unknown degree '" + s + "'");
}

Sector parse_sector(const std::string& s) {
    if (s == "technology") return Sector::Technology;
    if (s == "consulting") return Sector::Consulting;
    if (s == "manufacturing") return Sector::Manufacturing;
    throw validation_error("unknown sector '" + s + "'");
}

void MarketConfig::validate() const {
    auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (students < 1) throw config_error("students must be >= 1");
    if (jobs < 1) throw config_error("jobs must be >= 1");
    if (days < 1) throw config_error("days must be >= 1");
    if (years < 1) throw config_error("years must be >= 1");
    if (!in01(caste_share_disadvantaged))
        throw config_error("caste_share_disadvantaged must be in [0,1]");
    if (static_cast<int>(degree_shares.size()) != kNumDegrees)
        throw config_error("degree_shares must have 4 entries");
    double tot = 0;
    for (double s : degree_shares) {
        if (s < 0) throw config_error("degree_shares must be nonnegative");
        tot += s;
    }
    if (std::abs(tot - 1.0) > 1e-9) throw config_error("degree_shares must sum to 1");
    if (static_cast<int>(sector_shares.size()) != kNumSectors ||
        static_cast<int>(sector_log_wage_mean.size()) != kNumSectors)
        throw config_error("sector settings must have 3 entries");
    tot = 0;
    for (double s : sector_shares) {
        if (s < 0) throw config_error("sector_shares must be nonnegative");
        tot += s;
    }
    if (std::abs(tot - 1.0) > 1e-9) throw config_error("sector_shares must sum to 1");
    for (double p : amenity_prevalence)
        if (!in01(p)) throw config_error("amenity_prevalence entries must be in [0,1]");
    if (!amenity_names.empty() && amenity_names.size() != amenity_prevalence.size())
        throw config_error("amenity_names length must match amenity_prevalence");
    if (!in01(application_rate)) throw config_error("application_rate must be in [0,1]");
    if (!in01(stage_pass_rate)) throw config_error("stage_pass_rate must be in [0,1]");
    if (!in01(client_facing_rate)) throw config_error("client_facing_rate must be in [0,1]");
    if (wage_firm_sd < 0 || wage_year_sd < 0 || cutoff_noise_sd < 0 || score_sd <= 0)
        throw config_error("scale parameters must be nonnegative (score_sd > 0)");
    if (n_experience < 0) throw config_error("n_experience must be >= 0");
    if (majors < 1) throw config_error("majors must be >= 1");
}

void Market::validate() const {
    if (students.empty()) throw validation_error("no students");
    if (postings.empty()) throw validation_error("no postings");
    if (offers.size() != students.size())
        throw validation_error("offer records do not align with students");
    const int P = n_postings();
    for (const auto& j : postings) {
        if (j.interview_day < 1)
            throw validation_error("posting " + std::to_string(j.id) + ": interview_day < 1");
        if (!(j.hiring_cap >= 0))
            throw validation_error("posting " + std::to_string(j.id) + ": hiring_cap < 0");
        if (!std::isfinite(j.log_wage))
            throw validation_error("posting " + std::to_string(j.id) + ": wage not finite");
        if (j.amenities.size() != postings.front().amenities.size())
            throw validation_error("posting " + std::to_string(j.id) + ": ragged amenity vector");
    }
    for (std::size_t i = 0; i < students.size(); ++i) {
        const auto& s = students[i];
        const auto& o = offers[i];
        if (static_cast<int>(s.applications.size()) != P ||
            static_cast<int>(o.z.size()) != P || s.stage_flags.size() != s.applications.size())
            throw validation_error("student " + std::to_string(s.id) + ": vector lengths disagree");
        for (double v : {s.gpa, s.entrance_score, s.grade10, s.grade12})
            if (!std::isfinite(v))
                throw validation_error("student " + std::to_string(s.id) + ": non-finite score");
        int offer_day = 0;
        for (int p = 0; p < P; ++p) {
            if (o.z[p] && !s.applications[p])
                throw validation_error("student " + std::to_string(s.id) + ": offer from posting " +
                                       std::to_string(p) + " without an application");
            if (o.z[p] && config.offers_gated_by_interview && !s.stage_flags[p].passed_debate)
                throw validation_error("student " + std::to_string(s.id) + ": offer from posting " +
                                       std::to_string(p) + " without surviving to interviews");
            if (s.applications[p] && postings[p].year != s.year)
                throw validation_error("student " + std::to_string(s.id) +
                                       ": application outside own cohort year");
            if (o.z[p]) {
                const int d = postings[p].interview_day;
                if (offer_day == 0) offer_day = d;
                if (d != offer_day)
                    throw validation_error("student " + std::to_string(s.id) +
                                           ": offers span two interview days");
            }
        }
        if (offer_day != o.offer_day)
            throw validation_error("student " + std::to_string(s.id) + ": offer_day mismatch");
        if (o.chosen != kOutside) {
            if (o.chosen < 0 || o.chosen >= P || !o.z[o.chosen])
                throw validation_error("student " + std::to_string(s.id) +
                                       ": chose a posting that made no offer");
        }
    }
}

} // namespace placement
