#include <cmath>

#include "doctest.h"

#include "placement/estimate.hpp"
#include "placement/generate.hpp"
#include "placement/hiring.hpp"
#include "placement/mathutil.hpp"
#include "placement/rng.hpp"

using namespace placement;

namespace {
GenerationResult tiny_market(std::uint64_t seed, int n = 200, int jobs = 5, int days = 2,
                             int years = 1) {
    MarketConfig cfg;
    cfg.students = n;
    cfg.jobs = jobs;
    cfg.days = days;
    cfg.years = years;
    cfg.seed = seed;
    return generate_market(cfg, recovery_parameters(layout_for(cfg)));
}
} // namespace

TEST_CASE("degenerate likelihood: no applications means L = 1") {
    auto gen = tiny_market(3, 50, 4, 2);
    // strip one student's applications and offers
    Market m = gen.market;
    auto& s = m.students[0];
    std::fill(s.applications.begin(), s.applications.end(), 0);
    std::fill(s.stage_flags.begin(), s.stage_flags.end(), StageFlags{});
    std::fill(m.offers[0].z.begin(), m.offers[0].z.end(), 0);
    m.offers[0].offer_day = 0;
    m.offers[0].chosen = kOutside;

    EstimationConfig cfg;
    cfg.r_draws = 16;
    ParameterSet p = gen.params;
    p.sigma_q = 0.0;
    LikelihoodModel model(m, layout_for(m.config), cfg, p);
    std::vector<double> ll;
    model.per_student(model.pack(p), ll, nullptr);
    CHECK(ll[0] == doctest::Approx(0.0)); // log 1
    for (double v : ll) CHECK(v <= 1e-12); // log-likelihoods never exceed 0
}

TEST_CASE("sigma_q = 0: single application closed form") {
    auto gen = tiny_market(5, 30, 3, 1);
    Market m = gen.market;
    const auto layout = layout_for(m.config);
    ParameterSet p = gen.params;
    p.sigma_q = 0.0;

    // restrict student 0 to one application with an accepted offer
    int keep = -1;
    for (int pid = 0; pid < m.n_postings(); ++pid)
        if (m.offers[0].z[pid]) keep = pid;
    if (keep < 0) {
        for (int pid = 0; pid < m.n_postings(); ++pid)
            if (m.students[0].applications[pid]) keep = pid;
        m.offers[0].z[keep] = 1;
        m.offers[0].offer_day = m.postings[keep].interview_day;
    }
    for (int pid = 0; pid < m.n_postings(); ++pid) {
        if (pid == keep) continue;
        m.students[0].applications[pid] = 0;
        m.students[0].stage_flags[pid] = StageFlags{};
        m.offers[0].z[pid] = 0;
    }
    m.offers[0].offer_day = m.postings[keep].interview_day;
    m.offers[0].chosen = keep;
    m.validate();

    EstimationConfig cfg;
    cfg.r_draws = 8;
    LikelihoodModel model(m, layout, cfg, p);
    std::vector<double> ll;
    model.per_student(model.pack(p), ll, nullptr);

    Student probe = m.students[0];
    probe.q = 0.0;
    const double pi = acceptance_probability(probe, m.postings[keep], p, layout);
    const double u = student_utility(probe, m.postings[keep], p, layout);
    const double hand = std::log(pi) + u - std::log(1.0 + std::exp(u));
    CHECK(ll[0] == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("simulated likelihood converges to Gauss-Hermite quadrature") {
    auto gen = tiny_market(7, 40, 4, 2);
    const auto layout = layout_for(gen.market.config);
    const ParameterSet& p = gen.params; // sigma_q = 0.25
    REQUIRE(p.sigma_q > 0);

    // quadrature oracle for one student's likelihood, 64 Hermite nodes built
    // by Newton iteration on the Hermite polynomial recurrence
    const int nq = 64;
    std::vector<double> node(nq), weight(nq);
    {
        // Golub-Welsch via symmetric tridiagonal eigen-decomposition
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(nq, nq);
        for (int k = 1; k < nq; ++k) {
            const double b = std::sqrt(k / 2.0);
            J(k, k - 1) = b;
            J(k - 1, k) = b;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
        for (int k = 0; k < nq; ++k) {
            node[k] = es.eigenvalues()[k];
            const double v0 = es.eigenvectors()(0, k);
            weight[k] = v0 * v0; // weights normalized to sum 1 for N(0,1/sqrt 2)...
        }
    }

    // likelihood of student i at latent q: f(Z|A,q) * P(choice|q)
    auto like_at_q = [&](int i, double q) {
        const Market& m = gen.market;
        Student s = m.students[i];
        s.q = q;
        double val = 1.0;
        const auto& ov = m.offers[i];
        std::vector<int> offered;
        for (int pid = 0; pid < m.n_postings(); ++pid) {
            if (!s.applications[pid]) continue;
            const Job& j = m.postings[pid];
            const bool active = ov.offer_day == 0 || j.interview_day <= ov.offer_day;
            if (!active) continue;
            const double pi = acceptance_probability(s, j, p, layout);
            val *= ov.z[pid] ? pi : 1.0 - pi;
        }
        for (int pid = 0; pid < m.n_postings(); ++pid)
            if (ov.z[pid]) offered.push_back(pid);
        if (!offered.empty()) {
            double denom = 1.0;
            double chosen_eu = ov.chosen == kOutside ? 1.0 : 0.0;
            for (int pid : offered) {
                const double eu = std::exp(student_utility(s, m.postings[pid], p, layout));
                denom += eu;
                if (pid == ov.chosen) chosen_eu = eu;
            }
            val *= chosen_eu / denom;
        }
        return val;
    };

    // Hermite rule for E[g(q)], q ~ N(0, sigma^2): sum w_k g(sqrt(2) sigma x_k)
    auto quad_loglik = [&](int i) {
        double acc = 0.0;
        for (int k = 0; k < nq; ++k)
            acc += weight[k] * like_at_q(i, std::sqrt(2.0) * p.sigma_q * node[k]);
        return std::log(acc);
    };

    EstimationConfig cfg;
    cfg.r_draws = 20000;
    cfg.seed = 99;
    LikelihoodModel model(gen.market, layout, cfg, p);
    std::vector<double> ll;
    model.per_student(model.pack(p), ll, nullptr);

    for (int i = 0; i < 10; ++i) {
        const double lq = quad_loglik(i);
        CHECK(std::abs(ll[i] - lq) / std::abs(lq) < 1e-4);
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    auto gen = tiny_market(11, 120, 5, 2, 2);
    const auto layout = layout_for(gen.market.config);
    EstimationConfig cfg;
    cfg.r_draws = 30;
    cfg.seed = 5;
    LikelihoodModel model(gen.market, layout, cfg, gen.params);

    rng::Stream g(17);
    Eigen::VectorXd x0 = model.pack(gen.params);
    for (int t = 0; t < 10; ++t) {
        Eigen::VectorXd x = x0;
        for (int k = 0; k < x.size(); ++k) x[k] += 0.08 * g.normal();
        Eigen::VectorXd ga;
        model.eval(x, &ga);
        Eigen::VectorXd gf = finite_difference_gradient(
            [&](const Eigen::VectorXd& xx) { return model.eval(xx, nullptr); }, x, 1e-6);
        CHECK((ga - gf).norm() / std::max(1e-12, ga.norm()) < 1e-4);
    }
}

TEST_CASE("finite differences: quadratic exactness and error order") {
    auto f = [](const Eigen::VectorXd& x) { return 3.0 * x[0] * x[0] - 2.0 * x[0] * x[1]; };
    Eigen::VectorXd x(2);
    x << 1.5, -0.5;
    Eigen::VectorXd g = finite_difference_gradient(f, x, 1e-5);
    CHECK(g[0] == doctest::Approx(6 * 1.5 + 1.0).epsilon(1e-9));
    CHECK(g[1] == doctest::Approx(-3.0).epsilon(1e-9));

    auto cub = [](const Eigen::VectorXd& v) { return v[0] * v[0] * v[0] * v[0]; };
    Eigen::VectorXd xx(1);
    xx << 1.0;
    const double e1 = std::abs(finite_difference_gradient(cub, xx, 1e-3)[0] - 4.0);
    const double e2 = std::abs(finite_difference_gradient(cub, xx, 5e-4)[0] - 4.0);
    CHECK(e2 < e1 / 3.0); // roughly quartered when the step halves
}

TEST_CASE("objective is deterministic and thread-stable") {
    auto gen = tiny_market(13, 150, 5, 2, 2);
    const auto layout = layout_for(gen.market.config);
    EstimationConfig cfg;
    cfg.r_draws = 25;
    LikelihoodModel model(gen.market, layout, cfg, gen.params);
    Eigen::VectorXd x = model.pack(gen.params);
    Eigen::VectorXd g1, g2, g3;
    par::set_threads(1);
    const double f1 = model.eval(x, &g1, par::Exec::Parallel);
    par::set_threads(2);
    const double f2 = model.eval(x, &g2, par::Exec::Parallel);
    const double f3 = model.eval(x, &g3, par::Exec::Serial);
    CHECK(f1 == f2);
    CHECK(g1 == g2);
    CHECK(f1 == f3);
    CHECK(g1 == g3);
}

TEST_CASE("eta is flagged unidentified without caste variation") {
    auto gen = tiny_market(19, 60, 4, 2);
    Market m = gen.market;
    for (auto& s : m.students) s.caste = Caste::Advantaged;
    EstimationConfig cfg;
    cfg.r_draws = 4;
    LikelihoodModel model(m, layout_for(m.config), cfg, gen.params);
    bool found = false;
    for (const auto& n : model.notes())
        if (n.find("eta unidentified") != std::string::npos) found = true;
    CHECK(found);
    for (const auto& n : model.free_names()) CHECK(n != "eta");
}

TEST_CASE("firms with zero observed offers get boundary cutoffs, not parameters") {
    auto gen = tiny_market(23, 60, 4, 2);
    Market m = gen.market;
    // erase all offers from firm 0
    for (int i = 0; i < m.n_students(); ++i) {
        for (int pid = 0; pid < m.n_postings(); ++pid) {
            if (m.postings[pid].firm != 0) continue;
            if (m.offers[i].z[pid]) {
                if (m.offers[i].chosen == pid) m.offers[i].chosen = kOutside;
                m.offers[i].z[pid] = 0;
            }
        }
        int day = 0;
        for (int pid = 0; pid < m.n_postings(); ++pid)
            if (m.offers[i].z[pid]) day = day == 0 ? m.postings[pid].interview_day : day;
        m.offers[i].offer_day = day;
    }
    EstimationConfig cfg;
    cfg.r_draws = 4;
    LikelihoodModel model(m, layout_for(m.config), cfg, gen.params);
    for (const auto& n : model.free_names()) CHECK(n != "cutoff:firm_0");
    ParameterSet p = model.unpack(model.pack(gen.params));
    CHECK(p.cutoffs[0] == 60.0);
}
