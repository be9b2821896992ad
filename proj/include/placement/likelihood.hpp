#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "placement/layout.hpp"
#include "placement/parallel.hpp"
#include "placement/types.hpp"

namespace placement {

struct EstimationConfig {
    int r_draws = 300; // simulation draws per student
    int max_iterations = 500;
    double gradient_tolerance = 2e-5;
    double fd_step = 1e-6; // central-difference step for gradient checks
    std::uint64_t seed = 7;
    // Blocks held at their starting values: any of beta, psi, tau, gamma,
    // alpha, eta, phi, delta, sigma_q, cutoffs.
    std::vector<std::string> fix_blocks;
    bool verbose = false;

    void validate() const;
};

// Mean simulated log-likelihood of observed offers and choices, integrating
// the latent q over R common-random-number draws fixed per student. The
// objective is a smooth deterministic function of the parameters given the
// seed.
class LikelihoodModel {
public:
    LikelihoodModel(const Market& m, const CovariateLayout& layout, const EstimationConfig& cfg,
                    const ParameterSet& start);

    int n_free() const { return static_cast<int>(free_slots_.size()); }
    const std::vector<std::string>& free_names() const { return free_names_; }
    const std::vector<std::string>& notes() const { return notes_; }
    int n_students() const { return static_cast<int>(students_.size()); }
    const CovariateLayout& layout() const { return layout_; }
    const EstimationConfig& config() const { return cfg_; }

    // sigma_q travels on the log scale inside the free vector.
    Eigen::VectorXd pack(const ParameterSet& p) const;
    ParameterSet unpack(const Eigen::VectorXd& free) const;

    // Mean log-likelihood over students; fills the gradient when non-null.
    // Exec::Serial is the reference loop; Exec::Parallel distributes students
    // over threads and reduces pairwise, so results are independent of the
    // thread count.
    double eval(const Eigen::VectorXd& free, Eigen::VectorXd* grad,
                par::Exec mode = par::Exec::Parallel) const;

    // Per-student log L-hat and (optionally) score vectors in free coordinates.
    void per_student(const Eigen::VectorXd& free, std::vector<double>& loglik,
                     Eigen::MatrixXd* scores, par::Exec mode = par::Exec::Parallel) const;

private:
    struct StudentData {
        std::uint8_t disadv = 0;
        int n_apps = 0;
        std::vector<int> firm;
        std::vector<double> w;
        std::vector<std::uint8_t> z;
        std::vector<std::uint8_t> active; // day <= offer day (all when no offer)
        std::vector<double> s_mat;        // n_apps x s_dim
        std::vector<double> x_mat;        // n_apps x beta_dim
        std::vector<double> np_mat;       // n_apps x np_dim
        std::vector<int> offer_idx;       // into the app list
        int chosen_offer = -1;            // index into offer_idx, -1 = outside
        std::vector<double> qdraw;        // R standard-normal CRN draws
    };

    struct Workspace {
        std::vector<double> logl_r, pi_buf, pc_buf, emp_c, u_off, qload_off;
        std::vector<double> grad_full;
    };

    // theta in full coordinates (sigma slot = log sigma). Returns log L-hat_i;
    // adds the student's score into ws.grad_full when want_grad.
    double eval_student(const StudentData& sd, const double* theta, bool want_grad,
                        Workspace& ws) const;

    int total_dim() const { return total_dim_; }
    void run(const Eigen::VectorXd& free, std::vector<double>& loglik, Eigen::MatrixXd* scores,
             par::Exec mode) const;

    const CovariateLayout layout_;
    EstimationConfig cfg_;
    int n_firms_ = 0;
    int total_dim_ = 0;
    int R_ = 1;

    // Block offsets in full coordinates.
    int off_beta_, off_psi_, off_tau_, off_gamma_, off_alpha_, off_eta_, off_phi_, off_delta_,
        off_lsig_, off_cut_;

    std::vector<StudentData> students_;
    Eigen::VectorXd start_full_;   // start values in full coordinates
    std::vector<int> free_slots_;  // full-coordinate index per free coordinate
    std::vector<std::string> free_names_;
    std::vector<std::string> notes_;
};

// Central finite differences of a scalar function.
Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double step);

} // namespace placement
