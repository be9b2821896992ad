#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "placement/types.hpp"

namespace placement::oracle {

// Exhaustive distribution of the day process: walk interview days in order,
// enumerate every offer pattern on the first day that produces one, stop
// there. Deliberately independent of the closed-form recursion it validates.
// Keys are full offer patterns aligned with pi/day; includes the all-zero key.
std::map<std::vector<std::uint8_t>, double> enumerate_offer_distribution(
    const std::vector<double>& pi, const std::vector<int>& day);

// Report of the cutoff-rule optimality check on one applicant pool with
// realized values and acceptance probabilities.
struct CutoffOptimalityReport {
    bool optimal = false;
    bool degenerate_tie = false;
    double cutoff = 0.0;
    double expected_size = 0.0;
    double expected_value = 0.0;
    long rules_checked = 0;
    std::string note;
};

// Exhaustively verifies that offering to the top-valued applicants (while
// expected size fits the target) weakly dominates every deterministic rule of
// equal or smaller expected size, and that no pairwise exchange deviation
// improves the expected cohort value. Pools are capped at 12 students; this
// is a test-scale oracle, not a production path.
CutoffOptimalityReport verify_cutoff_optimality(const std::vector<double>& value,
                                                const std::vector<double>& accept_prob,
                                                double target_expected_size);

// Brute-force portfolio search over all 2^J application vectors. Shares the
// value function with the greedy optimizer; the value function itself is
// validated separately against direct simulation.
std::vector<std::uint8_t> brute_force_portfolio(const std::vector<double>& utilities,
                                                const std::vector<double>& pi,
                                                const std::vector<int>& day,
                                                double application_cost);

} // namespace placement::oracle
