#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "placement/common.hpp"

namespace placement {

struct OlsResult {
    Eigen::VectorXd beta;
    Eigen::VectorXd se; // heteroskedasticity-robust (HC1)
    double r2 = 0.0;
    long n = 0;
    int k = 0;
};

// Least squares via column-pivoted QR with HC1 robust standard errors.
// Throws validation_error naming the collinear columns on rank deficiency.
OlsResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
              const std::vector<std::string>& column_names = {});

} // namespace placement
