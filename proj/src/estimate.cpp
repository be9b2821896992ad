#include "placement/estimate.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "placement/lbfgs.hpp"
#include "placement/mathutil.hpp"

namespace placement {

double EstimationResult::se_of(const std::string& name) const {
    auto it = se_by_name.find(name);
    if (it == se_by_name.end()) throw config_error("no standard error for '" + name + "'");
    return it->second;
}

double EstimationResult::estimate_of(const std::string& name) const {
    auto it = estimate_by_name.find(name);
    if (it == estimate_by_name.end()) throw config_error("no estimate named '" + name + "'");
    return it->second;
}

ParameterSet default_start(const Market& m, const CovariateLayout& layout) {
    ParameterSet p;
    p.beta = Eigen::VectorXd::Zero(layout.beta_dim());
    p.psi = Eigen::VectorXd::Zero(layout.np_dim());
    p.tau = 1.0;
    p.gamma = Eigen::VectorXd::Zero(layout.gamma_dim());
    p.alpha = Eigen::VectorXd::Zero(layout.s_dim());
    p.eta = 0.0;
    p.phi = 1.0;
    p.delta = 0.1;
    p.sigma_q = 0.1;

    // Cutoffs from per-firm offer rates: with neutral coefficients the
    // employer index is -w*phi, so k = -mean(w) - logit(rate) matches the
    // observed rate at the start point.
    std::vector<double> offers(m.n_firms, 0.0), apps(m.n_firms, 0.0), wsum(m.n_firms, 0.0);
    for (int i = 0; i < m.n_students(); ++i) {
        for (int pid = 0; pid < m.n_postings(); ++pid) {
            if (!m.students[i].applications[pid]) continue;
            const int f = m.postings[pid].firm;
            apps[f] += 1.0;
            wsum[f] += m.postings[pid].log_wage;
            if (m.offers[i].z[pid]) offers[f] += 1.0;
        }
    }
    p.cutoffs.resize(m.n_firms);
    for (int f = 0; f < m.n_firms; ++f) {
        const double napps = std::max(apps[f], 1.0);
        const double rate = std::min(std::max(offers[f] / napps, 0.5 / napps), 1.0 - 0.5 / napps);
        const double wbar = apps[f] > 0 ? wsum[f] / apps[f] : 0.0;
        p.cutoffs[f] = -wbar * p.phi + std::log((1.0 - rate) / rate);
    }
    return p;
}

EstimationResult msl_estimate(const Market& m, const EstimationConfig& cfg) {
    return msl_estimate(m, cfg, default_start(m, CovariateLayout::from_market(m)));
}

EstimationResult msl_estimate(const Market& m, const EstimationConfig& cfg,
                              const ParameterSet& start) {
    const CovariateLayout layout = CovariateLayout::from_market(m);
    LikelihoodModel model(m, layout, cfg, start);

    opt::Options oo;
    oo.max_iterations = cfg.max_iterations;
    oo.grad_tol = cfg.gradient_tolerance;
    oo.verbose = cfg.verbose;

    auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        Eigen::VectorXd grad;
        const double f = model.eval(x, &grad, par::Exec::Parallel);
        g = -grad;
        return -f;
    };

    opt::Result r = opt::minimize(objective, model.pack(start), oo);

    EstimationResult res;
    res.theta_free = r.x;
    res.theta = model.unpack(r.x);
    res.free_names = model.free_names();
    res.log_likelihood = -r.f;
    res.converged = r.converged;
    res.iterations = r.iterations;
    res.evaluations = r.evaluations;
    res.grad_norm = r.grad_norm;
    res.notes = model.notes();
    if (!res.converged)
        res.notes.push_back("optimizer stopped before reaching the gradient tolerance");

    for (int k = 0; k < model.n_free(); ++k)
        res.estimate_by_name[res.free_names[k]] =
            res.free_names[k] == "sigma_q" ? std::exp(r.x[k]) : r.x[k];

    standard_errors(res, model);
    return res;
}

void standard_errors(EstimationResult& res, const LikelihoodModel& model) {
    const int N = model.n_students();
    const int K = model.n_free();
    std::vector<double> loglik;
    Eigen::MatrixXd scores;
    model.per_student(res.theta_free, loglik, &scores);
    res.student_loglik = loglik;

    // Information identity: H-hat = average outer product of scores.
    Eigen::MatrixXd H = scores.transpose() * scores / static_cast<double>(N);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    const double smin = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
    res.opg_condition = smin > 0 ? smax / smin : std::numeric_limits<double>::infinity();
    res.opg_pseudo_inverse = !(res.opg_condition < 1e12);
    if (res.opg_pseudo_inverse)
        res.notes.push_back("OPG matrix ill-conditioned (cond " +
                            std::to_string(res.opg_condition) + "); pseudo-inverse used");

    Eigen::VectorXd inv_sv(sv.size());
    for (int k = 0; k < sv.size(); ++k)
        inv_sv[k] = sv[k] > smax * 1e-14 ? 1.0 / sv[k] : 0.0;
    Eigen::MatrixXd Hinv = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();

    res.vcov_free = Hinv / static_cast<double>(N);
    res.se_free.resize(K);
    for (int k = 0; k < K; ++k)
        res.se_free[k] = std::sqrt(std::max(0.0, res.vcov_free(k, k)));

    res.se_by_name.clear();
    for (int k = 0; k < K; ++k) {
        const std::string& name = res.free_names[k];
        if (name == "sigma_q") {
            // Free coordinate is log sigma; delta method back to natural units.
            res.sigma_q_se_natural = res.theta.sigma_q * res.se_free[k];
            res.se_by_name[name] = res.sigma_q_se_natural;
        } else {
            res.se_by_name[name] = res.se_free[k];
        }
    }
}

} // namespace placement
