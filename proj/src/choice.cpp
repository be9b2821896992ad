#include "placement/choice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "placement/rng.hpp"

namespace placement {

namespace {
constexpr double kEulerGamma = 0.57721566490153286;

// E[max(eps0, max_j u_j + eps_j)] under iid T1EV shocks.
double inclusive_value(const std::vector<double>& utils, const std::vector<int>& members) {
    if (members.empty()) return kEulerGamma;
    double m = 0.0; // outside utility
    for (int j : members) m = std::max(m, utils[j]);
    double acc = std::exp(-m);
    for (int j : members) acc += std::exp(utils[j] - m);
    return kEulerGamma + m + std::log(acc);
}
} // namespace

double student_utility(const Student& s, const Job& j, const ParameterSet& p,
                       const CovariateLayout& layout) {
    if (std::isnan(s.q))
        throw config_error("student_utility: latent q missing on student " + std::to_string(s.id));
    Eigen::VectorXd np = layout.np(j);
    Eigen::VectorXd x = layout.x(s, j);
    double qload = 1.0;
    for (int m = 0; m < layout.gamma_dim(); ++m) qload += p.gamma[m] * np[m];
    return x.dot(p.beta) + np.dot(p.psi) + j.log_wage * p.tau + s.q * qload;
}

std::vector<double> logit_probs(const std::vector<double>& utilities) {
    double m = -std::numeric_limits<double>::infinity();
    for (double u : utilities) m = std::max(m, u);
    double denom = 0.0;
    std::vector<double> out(utilities.size());
    for (std::size_t i = 0; i < utilities.size(); ++i) {
        out[i] = std::exp(utilities[i] - m);
        denom += out[i];
    }
    for (double& v : out) v /= denom;
    return out;
}

ChoiceProbabilities choice_probability(const Student& s, const std::vector<int>& offered,
                                       const Market& m, const ParameterSet& p,
                                       const CovariateLayout& layout) {
    ChoiceProbabilities r;
    r.postings = offered;
    std::sort(r.postings.begin(), r.postings.end());
    std::vector<double> utils;
    utils.reserve(r.postings.size() + 1);
    utils.push_back(0.0); // outside option
    for (int pid : r.postings) utils.push_back(student_utility(s, m.postings[pid], p, layout));
    auto probs = logit_probs(utils);
    r.outside = probs[0];
    r.prob.assign(probs.begin() + 1, probs.end());
    return r;
}

int choose(const Student& s, const OfferVector& offers, const ChoiceShocks& shocks,
           const Market& m, const ParameterSet& p, const CovariateLayout& layout) {
    int best = kOutside;
    double best_u = shocks.eps_outside; // outside systematic utility is 0
    for (int pid = 0; pid < static_cast<int>(offers.z.size()); ++pid) {
        if (!offers.z[pid]) continue;
        const double u = student_utility(s, m.postings[pid], p, layout) + shocks.eps[pid];
        if (u > best_u) {
            best_u = u;
            best = pid;
        }
    }
    return best;
}

double portfolio_value(const std::vector<std::uint8_t>& applications,
                       const std::vector<double>& utilities,
                       const std::vector<double>& pi, const std::vector<int>& day,
                       const PortfolioOptions& opt) {
    const int n = static_cast<int>(applications.size());
    std::vector<int> applied;
    for (int j = 0; j < n; ++j)
        if (applications[j]) applied.push_back(j);

    const double cost = opt.application_cost * static_cast<double>(applied.size());
    if (applied.empty()) return kEulerGamma - cost;

    // Group by interview day, ascending.
    std::vector<int> days;
    for (int j : applied) days.push_back(day[j]);
    std::sort(days.begin(), days.end());
    days.erase(std::unique(days.begin(), days.end()), days.end());

    if (static_cast<int>(applied.size()) <= opt.exact_limit) {
        double value = 0.0;
        double none_so_far = 1.0;
        std::vector<int> members;
        for (int d : days) {
            std::vector<int> todays;
            for (int j : applied)
                if (day[j] == d) todays.push_back(j);
            const int nd = static_cast<int>(todays.size());
            double p_none = 1.0;
            for (int j : todays) p_none *= 1.0 - pi[j];
            for (unsigned mask = 1; mask < (1u << nd); ++mask) {
                double pr = 1.0;
                members.clear();
                for (int b = 0; b < nd; ++b) {
                    if (mask & (1u << b)) {
                        pr *= pi[todays[b]];
                        members.push_back(todays[b]);
                    } else {
                        pr *= 1.0 - pi[todays[b]];
                    }
                }
                value += none_so_far * pr * inclusive_value(utilities, members);
            }
            none_so_far *= p_none;
        }
        value += none_so_far * kEulerGamma;
        return value - cost;
    }

    // Monte-Carlo fallback for large portfolios.
    rng::Stream g(opt.seed, 0xf01107u);
    double acc = 0.0;
    std::vector<int> members;
    for (int r = 0; r < opt.mc_draws; ++r) {
        members.clear();
        for (int d : days) {
            for (int j : applied)
                if (day[j] == d && g.bernoulli(pi[j])) members.push_back(j);
            if (!members.empty()) break;
        }
        acc += inclusive_value(utilities, members);
    }
    return acc / static_cast<double>(opt.mc_draws) - cost;
}

PortfolioResult optimize_portfolio(const Student& s, const std::vector<const Job*>& candidates,
                                   const std::vector<double>& pi, const ParameterSet& p,
                                   const CovariateLayout& layout, const PortfolioOptions& opt) {
    const int n = static_cast<int>(candidates.size());
    std::vector<double> utils(n), days(n);
    std::vector<int> day(n);
    for (int j = 0; j < n; ++j) {
        utils[j] = student_utility(s, *candidates[j], p, layout);
        day[j] = candidates[j]->interview_day;
    }

    PortfolioResult res;
    res.applications.assign(n, 0);
    auto value = [&](const std::vector<std::uint8_t>& a) {
        ++res.evaluations;
        return portfolio_value(a, utils, pi, day, opt);
    };

    rng::Stream g(opt.seed, 0x5e1ec7u);
    double cur = value(res.applications);

    // Forward greedy: find the first job to apply to, then the second, ...
    // (at most n + (n-1) + ... + 1 value evaluations).
    for (int round = 0; round < n; ++round) {
        std::vector<int> cand;
        std::vector<double> vals;
        for (int j = 0; j < n; ++j) {
            if (res.applications[j]) continue;
            res.applications[j] = 1;
            const double v = value(res.applications);
            res.applications[j] = 0;
            if (v - cur > 1e-14) {
                cand.push_back(j);
                vals.push_back(v);
            }
        }
        if (cand.empty()) break;
        std::size_t pick = 0;
        for (std::size_t i = 1; i < cand.size(); ++i)
            if (vals[i] > vals[pick]) pick = i;
        if (opt.temperature > 0.0) {
            // Logit-kernel smoothing over the improving additions.
            std::vector<double> scaled(vals.size());
            for (std::size_t i = 0; i < vals.size(); ++i)
                scaled[i] = (vals[i] - cur) / opt.temperature;
            auto probs = logit_probs(scaled);
            double u = g.uniform(), acc = 0.0;
            for (std::size_t i = 0; i < probs.size(); ++i) {
                acc += probs[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
        }
        res.applications[cand[pick]] = 1;
        cur = vals[pick];
    }

    // Polish until no adjacent add/drop improves (greedy already satisfies
    // this except in knife-edge cases).
    for (int pass = 0; pass < 4 * n; ++pass) {
        int best = -1;
        double best_v = cur;
        for (int j = 0; j < n; ++j) {
            res.applications[j] ^= 1;
            const double v = value(res.applications);
            res.applications[j] ^= 1;
            if (v > best_v + 1e-12) {
                best_v = v;
                best = j;
            }
        }
        if (best < 0) break;
        res.applications[best] ^= 1;
        cur = best_v;
    }

    res.first_order_ok = true;
    for (int j = 0; j < n && res.first_order_ok; ++j) {
        res.applications[j] ^= 1;
        const double v = value(res.applications);
        res.applications[j] ^= 1;
        if (v > cur + 1e-12) res.first_order_ok = false;
    }
    res.value = cur;
    return res;
}

} // namespace placement
