#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "placement/common.hpp"

namespace placement {

enum class Caste : std::uint8_t { Advantaged = 0, Disadvantaged = 1 };
enum class Degree : std::uint8_t { BTech = 0, DualDegree = 1, MTech = 2, MS = 3 };
enum class Sector : std::uint8_t { Technology = 0, Consulting = 1, Manufacturing = 2 };

constexpr int kNumDegrees = 4;
constexpr int kNumSectors = 3;

const char* to_string(Caste c);
const char* to_string(Degree d);
const char* to_string(Sector s);
Caste parse_caste(const std::string& s);
Degree parse_degree(const std::string& s);
Sector parse_sector(const std::string& s);

// Screening trajectory of one (student, posting) pair. Flags are nested:
// a student cannot pass the written test without passing application reading.
struct StageFlags {
    bool passed_reading = false;
    bool passed_written = false;
    bool passed_debate = false;

    bool operator==(const StageFlags&) const = default;
};

struct Student {
    int id = 0;
    int year = 0; // placement cohort; interacts only with same-year postings
    Caste caste = Caste::Advantaged;
    Degree degree = Degree::BTech;
    int major = 0;
    double gpa = 0.0;
    double entrance_score = 0.0; // standardized, higher is better
    double grade10 = 0.0;
    double grade12 = 0.0;
    std::vector<double> experience;
    // Latent productivity/interest term. Lives only in the oracle record,
    // never in the observed CSVs; NaN when the market was loaded from disk.
    double q = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::uint8_t> applications; // A_i over all postings
    std::vector<StageFlags> stage_flags;    // aligned with applications

    bool disadvantaged() const { return caste == Caste::Disadvantaged; }
};

// A posting: one job designation within a firm in one recruitment year.
// The hiring cutoff attaches to `firm` (shared across years) and lives in
// ParameterSet, not here.
struct Job {
    int id = 0;   // posting id, dense 0..P-1
    int firm = 0; // firm-designation identity, dense 0..J-1
    std::string designation = "analyst";
    int year = 0;
    Sector sector = Sector::Technology;
    double log_wage = 0.0;
    std::vector<std::uint8_t> amenities;
    bool client_facing = false;
    int interview_day = 1; // >= 1
    double hiring_cap = 0.0;
};

// Realized screening outcome of one student: offers share a single interview
// day (an offer ends participation), and the chosen option comes from
// {outside} + offered postings.
struct OfferVector {
    std::vector<std::uint8_t> z; // over postings
    int offer_day = 0;           // 0 when no offers arrived
    int chosen = kOutside;       // posting id, or kOutside

    bool operator==(const OfferVector&) const = default;
};

struct MarketConfig {
    int students = 400;
    int jobs = 10; // firms; each posts once per year
    int days = 4;  // interview days per year
    int years = 1;
    std::uint64_t seed = 1;

    double caste_share_disadvantaged = 0.5;
    std::vector<double> degree_shares = {0.4, 0.3, 0.2, 0.1};
    int majors = 5;
    int n_experience = 2;

    // Covariate moments. Scores are on a common SD=1 scale; gaps are the
    // advantaged-minus-disadvantaged mean differences in SD units.
    double entrance_gap_sd = 0.6;
    double gpa_gap_sd = 0.3;
    double grade_gap_sd = 0.0;
    double score_sd = 1.0;

    std::vector<double> amenity_prevalence = {0.35, 0.25, 0.40};
    std::vector<std::string> amenity_names = {"signing_bonus", "rsu", "metro"};
    std::vector<double> sector_shares = {0.45, 0.25, 0.30};
    std::vector<double> sector_log_wage_mean = {10.95, 11.05, 10.80};
    double wage_firm_sd = 0.15;
    // Within-firm across-year wage variation; this is what identifies the
    // employer wage coefficient once cutoffs soak up firm heterogeneity.
    double wage_year_sd = 0.10;
    double client_facing_rate = 0.15;

    double application_rate = 1.0;

    // Pre-interview screening. Pass rates are per stage and caste-neutral
    // unless stage_pass_caste_gap shifts the disadvantaged rate down.
    double stage_pass_rate = 0.65;
    double stage_pass_caste_gap = 0.0;
    double stage_skill_slope = 0.25;
    // Offers only reach students who survived to the interview stage of that
    // posting, keeping the stage sets nested. Turning this off makes the
    // screening flags live covariates instead of a hard gate.
    bool offers_gated_by_interview = true;

    // Cutoff construction: k*_f = mean systematic employer utility
    // + cutoff_offset + cutoff_wage_slope * (mean firm wage - market mean)
    // + Normal(0, cutoff_noise_sd).
    double cutoff_offset = 2.2;
    double cutoff_wage_slope = 1.2;
    double cutoff_noise_sd = 0.25;

    void validate() const; // throws config_error
};

// All structural coefficients. Block layouts are fixed by CovariateLayout;
// `cutoffs` is indexed by firm.
struct ParameterSet {
    Eigen::VectorXd beta;  // student utility, caste interactions X_ij
    Eigen::VectorXd psi;   // non-pecuniary bundle NP_j
    double tau = 1.0;      // student log-wage coefficient
    Eigen::VectorXd gamma; // q x amenity loadings
    Eigen::VectorXd alpha; // employer covariates S_ij
    double eta = 0.0;      // disadvantaged-caste coefficient
    double phi = 1.0;      // employer log-wage coefficient
    double delta = 0.0;    // employer q loading
    double sigma_q = 0.0;  // SD of latent q, >= 0
    std::vector<double> cutoffs;
};

struct Market {
    MarketConfig config; // provenance; counts mirror the vectors below
    std::vector<Student> students;
    std::vector<Job> postings;
    std::vector<OfferVector> offers; // aligned with students
    int n_firms = 0;

    int n_students() const { return static_cast<int>(students.size()); }
    int n_postings() const { return static_cast<int>(postings.size()); }
    void validate() const; // throws validation_error
};

// Simulation-time latents, kept out of the observed schema so estimation
// code cannot touch them. Test and diagnostics use only.
struct OracleRecord {
    std::vector<double> q;                    // per student
    std::vector<std::vector<double>> mu;      // [student][posting], NaN if not applied
    std::vector<std::vector<double>> eps;     // [student][posting], NaN if not applied
    std::vector<double> eps_outside;          // per student
};

} // namespace placement
