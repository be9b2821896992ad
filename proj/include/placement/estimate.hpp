#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "placement/likelihood.hpp"

namespace placement {

struct EstimationResult {
    ParameterSet theta;
    Eigen::VectorXd theta_free; // free coordinates (sigma_q on log scale)
    std::vector<std::string> free_names;
    double log_likelihood = 0.0; // mean log simulated likelihood
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
    double grad_norm = 0.0;
    Eigen::VectorXd se_free;
    Eigen::MatrixXd vcov_free;
    double opg_condition = 0.0;
    bool opg_pseudo_inverse = false;
    std::vector<double> student_loglik;
    std::vector<std::string> notes;

    // SEs keyed by free-coordinate name; sigma_q additionally reported in
    // natural units via the delta method.
    std::map<std::string, double> se_by_name;
    double sigma_q_se_natural = 0.0;

    double se_of(const std::string& name) const;
    double estimate_of(const std::string& name) const;
    std::map<std::string, double> estimate_by_name;
};

// Moment-matched starting values: neutral coefficient blocks plus cutoffs
// initialized from observed per-firm offer rates.
ParameterSet default_start(const Market& m, const CovariateLayout& layout);

// Maximum simulated likelihood with information-identity standard errors.
EstimationResult msl_estimate(const Market& m, const EstimationConfig& cfg,
                              const ParameterSet& start);
EstimationResult msl_estimate(const Market& m, const EstimationConfig& cfg);

// Information-identity (outer product of per-student scores) standard errors
// at res.theta_free; fills the SE fields of res.
void standard_errors(EstimationResult& res, const LikelihoodModel& model);

} // namespace placement
