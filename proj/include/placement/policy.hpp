#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "placement/hiring.hpp"
#include "placement/types.hpp"

namespace placement {

// ---- Willingness-to-pay conversions -------------------------------------------

struct Wtp {
    double percent = 0.0; // percent of average salary (e.g. 6.489 = +6.489%)
    double dollars = 0.0;
};

// Student side: the salary increase equivalent to one unit of the amenity,
// percent = exp(coef/tau) - 1.
Wtp wtp_student(double coef, double tau, double avg_salary);

// Employer side: the per-hire subsidy offsetting the attribute,
// percent = 1 - exp(-|coef|/phi).
Wtp wtp_employer(double coef, double phi, double avg_salary);

// Delta-method standard errors assuming independent coefficient and wage-
// coefficient estimates. Returned in the same units as Wtp.
Wtp wtp_student_se(double coef, double se_coef, double tau, double se_tau, double avg_salary);
Wtp wtp_employer_se(double coef, double se_coef, double phi, double se_phi, double avg_salary);

struct WtpRow {
    std::string name;
    double estimate = 0.0, se = 0.0;
    double dollars = 0.0, dollars_se = 0.0;
    double percent = 0.0, percent_se = 0.0;
};
std::vector<WtpRow> wtp_student_table(const ParameterSet& p, const CovariateLayout& layout,
                                      const std::map<std::string, double>* se,
                                      double avg_salary);
std::vector<WtpRow> wtp_employer_table(const ParameterSet& p, const CovariateLayout& layout,
                                       const std::map<std::string, double>* se,
                                       double avg_salary);

// ---- Counterfactual policies ----------------------------------------------------

enum class PolicyKind { Subsidy, PreCollegeIntervention, Quota };
enum class DemandRegime { PerfectlyElastic, PerfectlyInelastic };
const char* to_string(PolicyKind k);
const char* to_string(DemandRegime r);

struct PolicySpec {
    PolicyKind kind = PolicyKind::Subsidy;
    DemandRegime regime = DemandRegime::PerfectlyElastic; // ignored for Quota
    // Employer-utility units; default offsets the caste coefficient exactly.
    std::optional<double> subsidy_size;
    double quota_ratio = 0.5;
    std::optional<double> external_cost_per_sd; // dollars per student-SD of test scores
    int q_draws = 100;
    int sim_reps = 300;
    std::uint64_t seed = 99;

    void validate() const;
};

struct PolicyOutcome {
    double unemployment_adv = 0, unemployment_dis = 0, unemployment_all = 0;
    double hires_adv = 0, hires_dis = 0, total_hires = 0;
    double total_offers = 0;
    double earnings_gap = 0; // disadvantaged minus advantaged mean log accepted salary
    std::vector<double> expected_hires_by_firm; // analytic, at the scenario cutoffs
    std::vector<double> offers_by_firm;         // simulated averages
};

struct PolicyReport {
    PolicyKind kind = PolicyKind::Subsidy;
    DemandRegime regime = DemandRegime::PerfectlyElastic;
    PolicyOutcome baseline, policy;
    double n_advantaged = 0, n_disadvantaged = 0;
    double avg_salary = 0;

    double subsidy_size = 0.0;              // employer-utility units
    double subsidy_pct_of_salary = 0.0;     // via the employer conversion
    double caste_penalty_pct = 0.0;

    // Pre-college intervention extras.
    double subsidy_equivalent_utility = 0.0;
    double subsidy_equivalent_pct = 0.0;
    double mean_score_shift_sd = 0.0;
    double total_score_shift_sd = 0.0;
    double ks_distance = 0.0;

    std::vector<double> quota_cutoff_adv, quota_cutoff_dis;
    std::vector<int> exempted_firms;

    bool converged = true;
    std::vector<std::string> notes;
};

PolicyReport apply_subsidy(const Market& m, const ParameterSet& p, const PolicySpec& spec);
PolicyReport apply_precollege(const Market& m, const ParameterSet& p, const PolicySpec& spec);
PolicyReport apply_quota(const Market& m, const ParameterSet& p, const PolicySpec& spec);
PolicyReport apply_policy(const Market& m, const ParameterSet& p, const PolicySpec& spec);

struct CostEffectivenessReport {
    double subsidy_cost_per_hire = 0.0;
    double precollege_cost_per_hire = 0.0;
    double ratio = 0.0; // precollege / subsidy
    bool subsidy_dominates_2x = false;
    bool degenerate = false; // zero diversity gain on a path
    std::vector<std::string> assumptions;
};

// Requires the user-supplied direct cost of raising test scores by one SD;
// refuses without it.
CostEffectivenessReport cost_effectiveness(const PolicyReport& subsidy,
                                           const PolicyReport& precollege,
                                           std::optional<double> external_cost_per_sd);

// ---- Model fit -------------------------------------------------------------------

struct MomentsTable {
    struct Row {
        std::string name;
        double data = 0.0;
        double model = 0.0;
        double model_sd = 0.0; // across replications
    };
    std::vector<Row> rows;
    int replications = 0;
};

MomentsTable compute_moments(const Market& m, const ParameterSet& p, int replications,
                             std::uint64_t seed);

double average_salary(const Market& m);

} // namespace placement
