#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "placement/types.hpp"

namespace placement {

// Fixed covariate layout shared by generation, estimation, and policy code.
//
//   NP_j  = [amenity flags..., tech, consulting]
//   X_ij  = Disadv_i x [NP_j, log_wage]          (caste interactions)
//   S_ij  = [entrance, gpa, grade10, grade12, experience...,
//            passed_reading, passed_written, passed_debate,
//            dual, mtech, ms]
//
// gamma loads q on the amenity flags only (not the sector dummies).
class CovariateLayout {
public:
    CovariateLayout() = default;
    CovariateLayout(int n_amenities, int n_experience,
                    std::vector<std::string> amenity_names = {});

    static CovariateLayout from_market(const Market& m);

    int n_amenities() const { return n_amenities_; }
    int n_experience() const { return n_experience_; }
    int np_dim() const { return n_amenities_ + 2; }
    int beta_dim() const { return np_dim() + 1; }
    int gamma_dim() const { return n_amenities_; }
    int s_dim() const { return 4 + n_experience_ + 3 + 3; }

    void build_np(const Job& j, double* out) const;
    void build_x(const Student& s, const Job& j, double* out) const;
    void build_s(const Student& s, const StageFlags& f, double* out) const;

    Eigen::VectorXd np(const Job& j) const;
    Eigen::VectorXd x(const Student& s, const Job& j) const;
    Eigen::VectorXd s_vec(const Student& s, const StageFlags& f) const;

    const std::vector<std::string>& np_names() const { return np_names_; }
    const std::vector<std::string>& beta_names() const { return beta_names_; }
    const std::vector<std::string>& gamma_names() const { return gamma_names_; }
    const std::vector<std::string>& s_names() const { return s_names_; }
    const std::vector<std::string>& amenity_names() const { return amenity_names_; }

    // Throws config_error when a block's length disagrees with this layout.
    void check(const ParameterSet& p, int n_firms) const;

private:
    int n_amenities_ = 0;
    int n_experience_ = 0;
    std::vector<std::string> amenity_names_;
    std::vector<std::string> np_names_;
    std::vector<std::string> beta_names_;
    std::vector<std::string> gamma_names_;
    std::vector<std::string> s_names_;
};

} // namespace placement
