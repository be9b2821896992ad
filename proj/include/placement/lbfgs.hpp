#pragma once

#include <functional>

#include <Eigen/Core>

namespace placement::opt {

struct Options {
    int max_iterations = 400;
    double grad_tol = 1e-5; // on the max-norm of the gradient
    int history = 8;
    int max_line_search = 40;
    double c1 = 1e-4;
    double c2 = 0.9;
    bool verbose = false;
};

struct Result {
    Eigen::VectorXd x;
    double f = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

// f(x) with gradient written into g.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& g)>;

// Limited-memory BFGS with a strong-Wolfe line search. Deterministic given
// the objective; accepted iterates never increase f.
Result minimize(const Objective& f, Eigen::VectorXd x0, const Options& opt);

} // namespace placement::opt
