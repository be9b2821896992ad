#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "placement/choice.hpp"
#include "placement/layout.hpp"
#include "placement/types.hpp"

namespace placement {

// Match-specific shocks: one standard logistic draw per (student, posting),
// observable to the job but not the student.
struct MatchShocks {
    std::vector<std::vector<double>> mu; // [student][posting]; NaN where unused
};

// Systematic employer utility (mu excluded): S'alpha + disadv*eta - w*phi + q*delta.
// The cutoff is not subtracted here. Requires s.q.
double employer_utility(const Student& s, const Job& j, const StageFlags& f,
                        const ParameterSet& p, const CovariateLayout& layout);
// Convenience overload pulling flags off the student record.
double employer_utility(const Student& s, const Job& j, const ParameterSet& p,
                        const CovariateLayout& layout);

// Pr(mu > k* - systematic) = logistic acceptance probability of the job
// taking this student.
double acceptance_probability(const Student& s, const Job& j, const ParameterSet& p,
                              const CovariateLayout& layout);

// ---- Offer-vector probabilities ---------------------------------------------

// Probability of a day-k offer pattern given day-k applications, conditional
// on eligibility. Vectors are aligned slices over the day's postings.
double day_offer_probability(const std::vector<double>& pi,
                             const std::vector<std::uint8_t>& z,
                             const std::vector<std::uint8_t>& a);

// A student's offer-realization problem: applied postings with acceptance
// probabilities and interview days.
struct StudentOfferProblem {
    std::vector<double> pi;
    std::vector<int> day;
};

// f(Z|A) under the eligibility recursion: no offers on days before the offer
// day, the observed pattern on the offer day; the all-zero vector multiplies
// the no-offer terms over every day. Z entries align with the problem vectors.
double offer_vector_probability(const StudentOfferProblem& prob,
                                const std::vector<std::uint8_t>& z);

// Optional distribution over complete interview-day allocations. Default is
// degenerate at the observed allocation.
struct DayAssignment {
    struct Alternative {
        double prob = 1.0;
        std::vector<int> day; // per applied posting
    };
    std::vector<Alternative> alternatives;
};

double offer_vector_probability(const std::vector<double>& pi, const DayAssignment& days,
                                const std::vector<std::uint8_t>& z);

// Market-level wrappers (use the student's own q and stage flags).
StudentOfferProblem build_offer_problem(const Student& s, const Market& m,
                                        const ParameterSet& p, const CovariateLayout& layout,
                                        std::vector<int>* applied_postings = nullptr);
double offer_vector_probability(const Student& s, const Market& m, const ParameterSet& p,
                                const CovariateLayout& layout);

// ---- Realized offer simulation ----------------------------------------------

// Day loop with exit-on-offer: each day every posting offers to eligible
// applicants whose employer utility clears the firm cutoff; students holding
// at least one offer choose (possibly the outside option) and exit.
std::vector<OfferVector> simulate_offers(const Market& m, const ParameterSet& p,
                                         const CovariateLayout& layout,
                                         const MatchShocks& mu,
                                         const std::vector<ChoiceShocks>& eps);

// ---- Analytic expected-hires engine ------------------------------------------

// Expected accepted hires and cutoff solving under consistent beliefs: each
// job takes rivals' current cutoffs as given, integrates over its own match
// shocks, rival offers, choice shocks, and (optionally) latent q.
class HiringModel {
public:
    struct Options {
        enum class QMode { OracleQ, Integrate };
        QMode q_mode = QMode::Integrate;
        int q_draws = 100;
        std::uint64_t seed = 2025;
        int rival_enum_limit = 14; // same-day rival subsets enumerated exactly
    };

    HiringModel(const Market& m, const ParameterSet& p, const CovariateLayout& layout,
                Options opt);

    int n_firms() const { return n_firms_; }

    // Additive employer-utility adjustment per (student, posting); empty = none.
    void set_adjustment(const std::vector<std::vector<double>>* adj) { adjustment_ = adj; }

    void set_cutoffs(const std::vector<double>& both);
    void set_cutoffs(const std::vector<double>& adv, const std::vector<double>& dis);
    const std::vector<double>& cutoffs(Caste c) const {
        return c == Caste::Advantaged ? cut_adv_ : cut_dis_;
    }

    // Expected accepted hires of one firm (summed over its postings and,
    // under Integrate, averaged over q draws) at the current cutoffs.
    double expected_hires(int firm) const;
    // Expected hires by applicant caste at the current cutoffs.
    double expected_hires(int firm, Caste c) const;
    // All firms at once (one cache build per day).
    std::vector<double> expected_hires_all() const;
    std::vector<double> expected_hires_all(Caste c) const;
    // Expected cohort value E[sum of V over accepted hires] at current cutoffs.
    double expected_cohort_value(int firm) const;

    // Smallest k with expected hires <= target, holding every other cutoff
    // fixed. Returns kHireAllCutoff when the constraint is slack at -inf.
    double solve_cutoff(int firm, double target) const;

    struct SolveReport {
        bool converged = true;
        int sweeps = 0;
    };

    // Re-solve every firm's (single) cutoff day-sequentially so expected hires
    // match per-firm targets. Firms within a day iterate to a joint fixed point.
    SolveReport solve_inelastic(const std::vector<double>& targets);

    struct QuotaReport {
        std::vector<int> exempted_firms; // one-caste applicant pools
        bool converged = true;
        int sweeps = 0;
    };

    // Two cutoffs per firm: disadvantaged expected hires = ratio/(1-ratio) x
    // advantaged expected hires, and the hire-share-weighted marginal utility
    // (the cutoff pair itself) equals the firm's marginal cost.
    QuotaReport solve_quota(double ratio, const std::vector<double>& marginal_cost);

    struct SimulatedOutcomes {
        double unemployment_adv = 0, unemployment_dis = 0, unemployment_all = 0;
        double hires_adv = 0, hires_dis = 0, total_hires = 0, total_offers = 0;
        std::vector<double> offers_by_firm;
        std::vector<double> hires_by_firm;
        double offer_share_sector[kNumSectors] = {0, 0, 0};
        double choice_share_sector[kNumSectors] = {0, 0, 0};
        double mean_log_salary_adv = 0, mean_log_salary_dis = 0;
        double earnings_gap = 0; // disadvantaged minus advantaged mean log accepted salary
        int replications = 0;
    };

    // Monte-Carlo realization of the day process at the current cutoffs and
    // adjustment. Replications own independent substreams, so results are
    // identical for any thread count.
    SimulatedOutcomes simulate(int reps, std::uint64_t seed) const;

private:
    struct Pair { // one (student, applied posting)
        int student;
        int posting;
        int firm;
        int day;
        double emp_base; // S'alpha + disadv*eta - w*phi (no q, cutoff, adjustment)
        double u_base;   // x'beta + np'psi + w*tau
        double qload_stu;
    };

    double pair_emp(const Pair& pr, double q) const;
    double pi_at(const Pair& pr, double q, double cutoff) const;
    double cutoff_for(const Pair& pr) const;

    // Flat caches at current cutoffs for day-d work. `upto_day` fills
    // eligibility with days < d; accept terms cover day-d pairs.
    struct DayCache {
        int day = 0;
        std::vector<double> elig;    // [student * R + r]
        std::vector<double> accept;  // [pair_index_in_day * R + r]
        std::vector<double> emp;     // systematic + q*delta + adjustment, same indexing
        std::vector<int> pair_ids;   // global pair indices on this day
        std::vector<int> pair_offset_by_firm_begin, pair_offset_by_firm_end;
    };
    void build_day_cache(int day, DayCache& cache) const;
    double expected_hires_from_cache(const DayCache& c, int firm, double k, int caste_filter) const;

    const Market& m_;
    const ParameterSet& p_;
    const CovariateLayout& layout_;
    Options opt_;
    int n_firms_ = 0;
    int n_days_ = 0;
    int R_ = 1;

    std::vector<Pair> pairs_;
    std::vector<std::vector<int>> pairs_by_student_;
    std::vector<std::vector<int>> pairs_by_firm_;
    std::vector<std::vector<int>> firms_by_day_; // day -> firm list (1-based day index)
    std::vector<double> qdraws_;                 // [student * R + r]
    std::vector<double> cut_adv_, cut_dis_;
    const std::vector<std::vector<double>>* adjustment_ = nullptr;

    double adj_for(int student, int posting) const;
};

} // namespace placement
