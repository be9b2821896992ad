#pragma once

#include <cstdint>
#include <vector>

#include "placement/layout.hpp"
#include "placement/types.hpp"

namespace placement {

// Per-student job-acceptance shocks: one T1EV draw per posting plus one for
// the outside option. Drawn once per simulation replication.
struct ChoiceShocks {
    std::vector<double> eps; // per posting; NaN where never used
    double eps_outside = 0.0;
};

// Systematic student utility (shock excluded). The outside option is
// normalized to 0. Requires s.q to be present.
double student_utility(const Student& s, const Job& j, const ParameterSet& p,
                       const CovariateLayout& layout);

// Softmax over option utilities; strictly positive, sums to 1, and invariant
// to adding a constant to every entry.
std::vector<double> logit_probs(const std::vector<double>& utilities);

// Multinomial choice probabilities over the offer set O(Z) = {outside} + offers.
struct ChoiceProbabilities {
    double outside = 1.0;
    std::vector<int> postings;      // ascending posting ids
    std::vector<double> prob;       // aligned with postings
};
ChoiceProbabilities choice_probability(const Student& s, const std::vector<int>& offered,
                                       const Market& m, const ParameterSet& p,
                                       const CovariateLayout& layout);

// Utility-maximizing option given realized shocks. Ties break toward the
// lowest posting id. Returns kOutside when that wins (or offers are empty).
int choose(const Student& s, const OfferVector& offers, const ChoiceShocks& shocks,
           const Market& m, const ParameterSet& p, const CovariateLayout& layout);

// ---- Application portfolios ------------------------------------------------

struct PortfolioOptions {
    double application_cost = 0.0;
    // Softmax temperature on marginal values when selecting the next job to
    // add; 0 keeps the hard argmax.
    double temperature = 0.0;
    std::uint64_t seed = 1;
    int exact_limit = 15;  // enumerate f(Z|A) exactly up to this many applications
    int mc_draws = 20000;  // Monte-Carlo fallback above exact_limit
};

struct PortfolioResult {
    std::vector<std::uint8_t> applications; // over the candidate list
    double value = 0.0;
    int evaluations = 0;
    bool first_order_ok = false; // adjacent add/drop conditions verified
};

// Expected value of an application set: E[max utility over realized offers
// and the outside option] under the day-structured offer distribution, minus
// per-application costs. `pi` holds this student's acceptance probability at
// each candidate posting.
double portfolio_value(const std::vector<std::uint8_t>& applications,
                       const std::vector<double>& utilities,
                       const std::vector<double>& pi, const std::vector<int>& day,
                       const PortfolioOptions& opt);

// Greedy job-by-job search: repeatedly add the job with the best positive
// marginal value (at most J(J+1)/2 value evaluations), then verify that no
// adjacent add/drop deviation improves.
PortfolioResult optimize_portfolio(const Student& s, const std::vector<const Job*>& candidates,
                                   const std::vector<double>& pi, const ParameterSet& p,
                                   const CovariateLayout& layout, const PortfolioOptions& opt);

} // namespace placement
