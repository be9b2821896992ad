#include "placement/layout.hpp"

#include <cstring>

#include "placement/common.hpp"

namespace placement {

CovariateLayout::CovariateLayout(int n_amenities, int n_experience,
                                 std::vector<std::string> amenity_names)
    : n_amenities_(n_amenities),
      n_experience_(n_experience),
      amenity_names_(std::move(amenity_names)) {
    if (amenity_names_.empty()) {
        for (int m = 0; m < n_amenities_; ++m)
            amenity_names_.push_back("amenity_" + std::to_string(m));
    }
    np_names_ = amenity_names_;
    np_names_.push_back("tech");
    np_names_.push_back("consulting");
    for (const auto& n : np_names_) beta_names_.push_back("disadv_x_" + n);
    beta_names_.push_back("disadv_x_log_wage");
    for (int m = 0; m < n_amenities_; ++m)
        gamma_names_.push_back("gamma_" + amenity_names_[m]);
    s_names_ = {"entrance_score", "gpa", "grade10", "grade12"};
    for (int e = 0; e < n_experience_; ++e)
        s_names_.push_back("experience_" + std::to_string(e));
    s_names_.push_back("passed_reading");
    s_names_.push_back("passed_written");
    s_names_.push_back("passed_debate");
    s_names_.push_back("deg_dual");
    s_names_.push_back("deg_mtech");
    s_names_.push_back("deg_ms");
}

CovariateLayout CovariateLayout::from_market(const Market& m) {
    int n_am = m.postings.empty() ? static_cast<int>(m.config.amenity_prevalence.size())
                                  : static_cast<int>(m.postings.front().amenities.size());
    int n_exp = m.students.empty() ? m.config.n_experience
                                   : static_cast<int>(m.students.front().experience.size());
    return CovariateLayout(n_am, n_exp, m.config.amenity_names);
}

void CovariateLayout::build_np(const Job& j, double* out) const {
    for (int m = 0; m < n_amenities_; ++m) out[m] = j.amenities[m] ? 1.0 : 0.0;
    out[n_amenities_] = j.sector == Sector::Technology ? 1.0 : 0.0;
    out[n_amenities_ + 1] = j.sector == Sector::Consulting ? 1.0 : 0.0;
}

void CovariateLayout::build_x(const Student& s, const Job& j, double* out) const {
    if (!s.disadvantaged()) {
        std::memset(out, 0, sizeof(double) * static_cast<std::size_t>(beta_dim()));
        return;
    }
    build_np(j, out);
    out[np_dim()] = j.log_wage;
}

void CovariateLayout::build_s(const Student& s, const StageFlags& f, double* out) const {
    int k = 0;
    out[k++] = s.entrance_score;
    out[k++] = s.gpa;
    out[k++] = s.grade10;
    out[k++] = s.grade12;
    for (int e = 0; e < n_experience_; ++e) out[k++] = s.experience[e];
    out[k++] = f.passed_reading ? 1.0 : 0.0;
    out[k++] = f.passed_written ? 1.0 : 0.0;
    out[k++] = f.passed_debate ? 1.0 : 0.0;
    out[k++] = s.degree == Degree::DualDegree ? 1.0 : 0.0;
    out[k++] = s.degree == Degree::MTech ? 1.0 : 0.0;
    out[k++] = s.degree == Degree::MS ? 1.0 : 0.0;
}

Eigen::VectorXd CovariateLayout::np(const Job& j) const {
    Eigen::VectorXd v(np_dim());
    build_np(j, v.data());
    return v;
}

Eigen::VectorXd CovariateLayout::x(const Student& s, const Job& j) const {
    Eigen::VectorXd v(beta_dim());
    build_x(s, j, v.data());
    return v;
}

Eigen::VectorXd CovariateLayout::s_vec(const Student& s, const StageFlags& f) const {
    Eigen::VectorXd v(s_dim());
    build_s(s, f, v.data());
    return v;
}

void CovariateLayout::check(const ParameterSet& p, int n_firms) const {
    auto bad = [](const std::string& what, long got, long want) {
        throw config_error("parameter block '" + what + "' has length " +
                           std::to_string(got) + ", layout requires " +
                           std::to_string(want));
    };
    if (p.beta.size() != beta_dim()) bad("beta", p.beta.size(), beta_dim());
    if (p.psi.size() != np_dim()) bad("psi", p.psi.size(), np_dim());
    if (p.gamma.size() != gamma_dim()) bad("gamma", p.gamma.size(), gamma_dim());
    if (p.alpha.size() != s_dim()) bad("alpha", p.alpha.size(), s_dim());
    if (static_cast<int>(p.cutoffs.size()) != n_firms)
        bad("cutoffs", static_cast<long>(p.cutoffs.size()), n_firms);
    if (p.sigma_q < 0.0) throw config_error("sigma_q must be nonnegative");
}

} // namespace placement
