#include <cmath>

#include "doctest.h"

#include "placement/choice.hpp"
#include "placement/generate.hpp"
#include "placement/hiring.hpp"
#include "placement/oracle.hpp"
#include "placement/rng.hpp"

using namespace placement;

namespace {

struct Fixture {
    CovariateLayout layout{3, 2, {"signing_bonus", "rsu", "metro"}};
    ParameterSet params;
    Student student;
    Job job;

    Fixture() {
        params.beta = Eigen::VectorXd::Zero(layout.beta_dim());
        params.psi = Eigen::VectorXd::Zero(layout.np_dim());
        params.gamma = Eigen::VectorXd::Zero(layout.gamma_dim());
        params.alpha = Eigen::VectorXd::Zero(layout.s_dim());
        params.tau = 0.0;
        params.cutoffs = {0.0};
        student.q = 0.0;
        student.experience = {0.0, 0.0};
        job.amenities = {0, 0, 0};
        job.sector = Sector::Manufacturing;
        job.log_wage = 0.0;
    }
};

} // namespace

TEST_CASE("student utility: zero parameters give zero utility") {
    Fixture f;
    CHECK(student_utility(f.student, f.job, f.params, f.layout) == 0.0);
}

TEST_CASE("student utility reproduces the published signing-bonus case") {
    // One amenity flag on, its coefficient 0.156, wage coefficient 2.482 with
    // zero wage, everything else off: utility is exactly the coefficient.
    Fixture f;
    f.params.psi[0] = 0.156;
    f.params.tau = 2.482;
    f.job.amenities = {1, 0, 0};
    CHECK(student_utility(f.student, f.job, f.params, f.layout) == doctest::Approx(0.156));
}

TEST_CASE("shifting q with zero gamma moves all job utilities equally") {
    Fixture f;
    f.params.psi[0] = 0.3;
    f.params.tau = 1.0;
    Job j2 = f.job;
    j2.log_wage = 0.7;
    const double u1a = student_utility(f.student, f.job, f.params, f.layout);
    const double u2a = student_utility(f.student, j2, f.params, f.layout);
    f.student.q = 2.0;
    const double u1b = student_utility(f.student, f.job, f.params, f.layout);
    const double u2b = student_utility(f.student, j2, f.params, f.layout);
    CHECK(u1b - u1a == doctest::Approx(u2b - u2a));
    CHECK((u1a < u2a) == (u1b < u2b));
}

TEST_CASE("logit probabilities: closed forms and invariances") {
    auto p = logit_probs({0.0, 0.0});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));

    // utilities (1, 0) plus outside 0 -> (e, 1, 1)/(e+2)
    auto p3 = logit_probs({0.0, 1.0, 0.0});
    const double e = std::exp(1.0);
    CHECK(p3[0] == doctest::Approx(1.0 / (e + 2)));
    CHECK(p3[1] == doctest::Approx(e / (e + 2)));
    CHECK(p3[2] == doctest::Approx(1.0 / (e + 2)));

    // sums to one and is shift-invariant
    rng::Stream g(99);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> u(1 + g.uniform_int(6));
        for (auto& v : u) v = g.normal(0, 3);
        auto probs = logit_probs(u);
        double tot = 0;
        for (double v : probs) tot += v;
        CHECK(std::abs(tot - 1.0) < 1e-12);
        std::vector<double> shifted = u;
        for (auto& v : shifted) v += 17.25;
        auto probs2 = logit_probs(shifted);
        for (std::size_t k = 0; k < u.size(); ++k)
            CHECK(probs[k] == doctest::Approx(probs2[k]).epsilon(1e-12));
        for (double v : probs) CHECK(v > 0.0);
    }
}

TEST_CASE("choice probabilities match a Monte-Carlo shock oracle") {
    MarketConfig cfg;
    cfg.students = 4;
    cfg.jobs = 3;
    cfg.days = 2;
    cfg.years = 1;
    cfg.seed = 3;
    auto gen = generate_market(cfg);
    const auto layout = layout_for(cfg);
    Student& s = gen.market.students[0];
    std::vector<int> offered = {0, 1, 2};
    auto probs = choice_probability(s, offered, gen.market, gen.params, layout);

    // simulate the T1EV shocks directly
    const int draws = 200000;
    rng::Stream g(1234);
    std::vector<int> count(4, 0);
    std::vector<double> u(3);
    for (int k = 0; k < 3; ++k)
        u[k] = student_utility(s, gen.market.postings[offered[k]], gen.params, layout);
    for (int d = 0; d < draws; ++d) {
        double best = g.gumbel();
        int arg = -1;
        for (int k = 0; k < 3; ++k) {
            const double v = u[k] + g.gumbel();
            if (v > best) {
                best = v;
                arg = k;
            }
        }
        count[arg + 1]++;
    }
    auto band = [&](double p) { return 3.0 * std::sqrt(p * (1 - p) / draws); };
    CHECK(std::abs(count[0] / double(draws) - probs.outside) < band(probs.outside) + 1e-9);
    for (int k = 0; k < 3; ++k)
        CHECK(std::abs(count[k + 1] / double(draws) - probs.prob[k]) <
              band(probs.prob[k]) + 1e-9);
}

TEST_CASE("choose: forced outside option and dominance") {
    Fixture f;
    Market m;
    m.postings.push_back(f.job);
    m.postings[0].id = 0;

    OfferVector ov;
    ov.z = {0};
    ChoiceShocks sh;
    sh.eps = {0.0};
    sh.eps_outside = 0.3;
    CHECK(choose(f.student, ov, sh, m, f.params, f.layout) == kOutside);

    ov.z = {1};
    f.params.psi[0] = 500.0; // dominant utility
    m.postings[0].amenities = {1, 0, 0};
    CHECK(choose(f.student, ov, sh, m, f.params, f.layout) == 0);
}

TEST_CASE("choose distribution converges to choice_probability") {
    MarketConfig cfg;
    cfg.students = 2;
    cfg.jobs = 2;
    cfg.days = 1;
    cfg.years = 1;
    cfg.seed = 8;
    auto gen = generate_market(cfg);
    const auto layout = layout_for(cfg);
    Student& s = gen.market.students[1];
    OfferVector ov;
    ov.z = {1, 1};
    auto probs = choice_probability(s, {0, 1}, gen.market, gen.params, layout);

    const int draws = 100000;
    rng::Stream g(77);
    ChoiceShocks sh;
    sh.eps.resize(2);
    std::vector<int> count(3, 0);
    for (int d = 0; d < draws; ++d) {
        sh.eps[0] = g.gumbel();
        sh.eps[1] = g.gumbel();
        sh.eps_outside = g.gumbel();
        const int c = choose(s, ov, sh, gen.market, gen.params, layout);
        count[c == kOutside ? 0 : c + 1]++;
    }
    auto band = [&](double p) { return 3.0 * std::sqrt(p * (1 - p) / draws); };
    CHECK(std::abs(count[0] / double(draws) - probs.outside) < band(probs.outside) + 1e-9);
    CHECK(std::abs(count[1] / double(draws) - probs.prob[0]) < band(probs.prob[0]) + 1e-9);
    CHECK(std::abs(count[2] / double(draws) - probs.prob[1]) < band(probs.prob[1]) + 1e-9);
}

TEST_CASE("portfolio value agrees with direct simulation of the day process") {
    std::vector<double> utils = {1.2, 0.4, -0.3, 2.0};
    std::vector<double> pi = {0.5, 0.3, 0.8, 0.15};
    std::vector<int> day = {1, 1, 2, 3};
    std::vector<std::uint8_t> apps = {1, 1, 0, 1};
    PortfolioOptions opt;
    opt.application_cost = 0.05;
    const double exact = portfolio_value(apps, utils, pi, day, opt);

    rng::Stream g(4242);
    const int draws = 400000;
    double acc = 0;
    for (int d = 0; d < draws; ++d) {
        double best = g.gumbel();
        bool any = false;
        for (int dd = 1; dd <= 3 && !any; ++dd) {
            for (int j = 0; j < 4; ++j) {
                if (!apps[j] || day[j] != dd) continue;
                if (g.bernoulli(pi[j])) {
                    any = true;
                    best = std::max(best, utils[j] + g.gumbel());
                }
            }
        }
        acc += best;
    }
    const double mc = acc / draws - opt.application_cost * 3;
    CHECK(std::abs(exact - mc) < 0.01);
}

TEST_CASE("free applications make the full portfolio optimal") {
    MarketConfig cfg;
    cfg.students = 2;
    cfg.jobs = 6;
    cfg.days = 3;
    cfg.years = 1;
    cfg.seed = 21;
    auto gen = generate_market(cfg);
    const auto layout = layout_for(cfg);
    const Student& s = gen.market.students[0];
    std::vector<const Job*> cands;
    std::vector<double> pi;
    for (const auto& j : gen.market.postings) {
        cands.push_back(&j);
        pi.push_back(acceptance_probability(s, j, gen.params, layout));
    }
    PortfolioOptions opt; // zero cost
    auto res = optimize_portfolio(s, cands, pi, gen.params, layout, opt);
    CHECK(res.first_order_ok);
    for (auto a : res.applications) CHECK(a == 1);
}

TEST_CASE("prohibitive application costs empty the portfolio") {
    Fixture f;
    std::vector<Job> jobs(3, f.job);
    std::vector<const Job*> cands;
    for (auto& j : jobs) cands.push_back(&j);
    std::vector<double> pi = {0.5, 0.5, 0.5};
    PortfolioOptions opt;
    opt.application_cost = 1e6;
    auto res = optimize_portfolio(f.student, cands, pi, f.params, f.layout, opt);
    for (auto a : res.applications) CHECK(a == 0);
    CHECK(res.first_order_ok);
}

TEST_CASE("greedy portfolio equals exhaustive search at J=4") {
    rng::Stream g(5150);
    for (int t = 0; t < 25; ++t) {
        std::vector<double> utils(4), pi(4);
        std::vector<int> day(4);
        for (int j = 0; j < 4; ++j) {
            utils[j] = g.normal(0.5, 1.0);
            pi[j] = g.uniform(0.05, 0.9);
            day[j] = 1 + g.uniform_int(3);
        }
        const double cost = g.uniform(0.0, 0.25);
        auto best = oracle::brute_force_portfolio(utils, pi, day, cost);

        // drive the greedy optimizer through the same value function
        Fixture f;
        std::vector<Job> jobs(4, f.job);
        for (int j = 0; j < 4; ++j) {
            jobs[j].log_wage = utils[j]; // tau=1 maps utilities through wages
            jobs[j].interview_day = day[j];
        }
        f.params.tau = 1.0;
        std::vector<const Job*> cands;
        for (auto& j : jobs) cands.push_back(&j);
        PortfolioOptions opt;
        opt.application_cost = cost;
        auto res = optimize_portfolio(f.student, cands, pi, f.params, f.layout, opt);
        CHECK(res.first_order_ok);
        CHECK(res.applications == best);
        CHECK(res.evaluations <= 4 * 5 / 2 + 1 + 3 * (4 + 1) * 4); // greedy + polish budget
    }
}
