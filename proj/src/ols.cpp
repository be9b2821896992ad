#include "placement/ols.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace placement {

OlsResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
              const std::vector<std::string>& column_names) {
    const long n = X.rows();
    const int k = static_cast<int>(X.cols());
    if (y.size() != n) throw config_error("ols: X and y disagree on rows");
    if (n < k) throw validation_error("ols: fewer rows than columns");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
        // The trailing pivots are the columns a full-rank basis rejects.
        std::string cols;
        const auto& perm = qr.colsPermutation().indices();
        for (int j = qr.rank(); j < k; ++j) {
            const int c = perm[j];
            if (!cols.empty()) cols += ", ";
            cols += column_names.empty() ? "col" + std::to_string(c) : column_names[c];
        }
        throw validation_error("ols: design matrix is rank deficient (collinear: " + cols + ")");
    }

    OlsResult r;
    r.n = n;
    r.k = k;
    r.beta = qr.solve(y);

    Eigen::VectorXd resid = y - X * r.beta;
    const double ybar = y.mean();
    const double tss = (y.array() - ybar).square().sum();
    const double rss = resid.squaredNorm();
    r.r2 = tss > 0 ? 1.0 - rss / tss : 1.0;

    // HC1: (X'X)^-1 X' diag(e^2) X (X'X)^-1 * n/(n-k)
    Eigen::MatrixXd xtx_inv = (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd meat = X.transpose() * resid.array().square().matrix().asDiagonal() * X;
    Eigen::MatrixXd V = xtx_inv * meat * xtx_inv * (static_cast<double>(n) / (n - k));
    r.se.resize(k);
    for (int j = 0; j < k; ++j) r.se[j] = std::sqrt(std::max(0.0, V(j, j)));
    return r;
}

} // namespace placement
