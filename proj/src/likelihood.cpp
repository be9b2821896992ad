#include "placement/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "placement/mathutil.hpp"
#include "placement/rng.hpp"

namespace placement {

void EstimationConfig::validate() const {
    if (r_draws < 1) throw config_error("r_draws must be >= 1");
    if (max_iterations < 1) throw config_error("max_iterations must be >= 1");
    if (gradient_tolerance <= 0 || fd_step <= 0)
        throw config_error("tolerances must be positive");
    static const std::set<std::string> known = {"beta",  "psi", "tau",   "gamma",   "alpha",
                                                "eta",   "phi", "delta", "sigma_q", "cutoffs"};
    for (const auto& b : fix_blocks)
        if (!known.count(b)) throw config_error("unknown fix block '" + b + "'");
}

LikelihoodModel::LikelihoodModel(const Market& m, const CovariateLayout& layout,
                                 const EstimationConfig& cfg, const ParameterSet& start)
    : layout_(layout), cfg_(cfg) {
    cfg_.validate();
    m.validate();
    n_firms_ = m.n_firms;
    layout_.check(start, n_firms_);
    R_ = cfg_.r_draws;

    const int bd = layout_.beta_dim(), pd = layout_.np_dim(), gd = layout_.gamma_dim(),
              ad = layout_.s_dim();
    off_beta_ = 0;
    off_psi_ = off_beta_ + bd;
    off_tau_ = off_psi_ + pd;
    off_gamma_ = off_tau_ + 1;
    off_alpha_ = off_gamma_ + gd;
    off_eta_ = off_alpha_ + ad;
    off_phi_ = off_eta_ + 1;
    off_delta_ = off_phi_ + 1;
    off_lsig_ = off_delta_ + 1;
    off_cut_ = off_lsig_ + 1;
    total_dim_ = off_cut_ + n_firms_;

    start_full_.resize(total_dim_);
    for (int k = 0; k < bd; ++k) start_full_[off_beta_ + k] = start.beta[k];
    for (int k = 0; k < pd; ++k) start_full_[off_psi_ + k] = start.psi[k];
    start_full_[off_tau_] = start.tau;
    for (int k = 0; k < gd; ++k) start_full_[off_gamma_ + k] = start.gamma[k];
    for (int k = 0; k < ad; ++k) start_full_[off_alpha_ + k] = start.alpha[k];
    start_full_[off_eta_] = start.eta;
    start_full_[off_phi_] = start.phi;
    start_full_[off_delta_] = start.delta;
    start_full_[off_lsig_] = std::log(std::max(start.sigma_q, 1e-8));
    for (int f = 0; f < n_firms_; ++f) start_full_[off_cut_ + f] = start.cutoffs[f];

    // --- Per-student data ---------------------------------------------------
    const int N = m.n_students();
    students_.resize(N);
    bool any_adv = false, any_dis = false;
    std::vector<long> firm_offers(n_firms_, 0), firm_apps(n_firms_, 0);
    const bool gated = m.config.offers_gated_by_interview;
    for (int i = 0; i < N; ++i) {
        const Student& s = m.students[i];
        const OfferVector& ov = m.offers[i];
        StudentData& sd = students_[i];
        sd.disadv = s.disadvantaged() ? 1 : 0;
        (sd.disadv ? any_dis : any_adv) = true;
        for (int pid = 0; pid < m.n_postings(); ++pid) {
            if (!s.applications[pid]) continue;
            // under interview gating, pairs that never reached interviews are
            // mechanical zeros and carry no information
            if (gated && !s.stage_flags[pid].passed_debate) continue;
            const Job& j = m.postings[pid];
            const int a = sd.n_apps++;
            sd.firm.push_back(j.firm);
            sd.w.push_back(j.log_wage);
            sd.z.push_back(ov.z[pid]);
            const bool act = ov.offer_day == 0 || j.interview_day <= ov.offer_day;
            sd.active.push_back(act ? 1 : 0);
            sd.s_mat.resize(static_cast<std::size_t>(sd.n_apps) * ad);
            sd.x_mat.resize(static_cast<std::size_t>(sd.n_apps) * bd);
            sd.np_mat.resize(static_cast<std::size_t>(sd.n_apps) * pd);
            layout_.build_s(s, s.stage_flags[pid], &sd.s_mat[static_cast<std::size_t>(a) * ad]);
            layout_.build_x(s, j, &sd.x_mat[static_cast<std::size_t>(a) * bd]);
            layout_.build_np(j, &sd.np_mat[static_cast<std::size_t>(a) * pd]);
            firm_apps[j.firm]++;
            if (ov.z[pid]) {
                firm_offers[j.firm]++;
                if (ov.chosen == pid) sd.chosen_offer = static_cast<int>(sd.offer_idx.size());
                sd.offer_idx.push_back(a);
            }
        }
        if (ov.chosen != kOutside && sd.chosen_offer < 0)
            throw validation_error("student " + std::to_string(s.id) +
                                   ": chosen job not in the offer set");
        sd.qdraw.resize(R_);
    }
    // CRN draws: one substream per student, fixed across all evaluations.
    for (int i = 0; i < N; ++i) {
        rng::Stream g(cfg_.seed, 0xcafe0000ull + static_cast<std::uint64_t>(i));
        for (int r = 0; r < R_; ++r) students_[i].qdraw[r] = g.normal();
    }

    // --- Degenerate covariate columns -----------------------------------------
    // A column with no variation across the estimation sample cannot separate
    // from the job cutoffs (employer side) or carries no signal (choice side);
    // such coordinates are held at their starting values.
    std::set<int> degenerate_slots;
    {
        const int ad2 = layout_.s_dim(), bd2 = layout_.beta_dim(), pd2 = layout_.np_dim();
        std::vector<double> smin(ad2, 1e300), smax(ad2, -1e300);
        std::vector<double> xabs(bd2, 0.0), npabs(pd2, 0.0);
        long n_pairs = 0;
        for (const auto& sd : students_) {
            for (int a = 0; a < sd.n_apps; ++a) {
                ++n_pairs;
                for (int k = 0; k < ad2; ++k) {
                    const double v = sd.s_mat[static_cast<std::size_t>(a) * ad2 + k];
                    smin[k] = std::min(smin[k], v);
                    smax[k] = std::max(smax[k], v);
                }
                for (int k = 0; k < bd2; ++k)
                    xabs[k] = std::max(xabs[k],
                                       std::abs(sd.x_mat[static_cast<std::size_t>(a) * bd2 + k]));
                for (int k = 0; k < pd2; ++k)
                    npabs[k] = std::max(npabs[k],
                                        std::abs(sd.np_mat[static_cast<std::size_t>(a) * pd2 + k]));
            }
        }
        if (n_pairs > 0) {
            for (int k = 0; k < ad2; ++k) {
                if (smax[k] - smin[k] < 1e-12) {
                    degenerate_slots.insert(off_alpha_ + k);
                    notes_.push_back("alpha:" + layout_.s_names()[k] +
                                     " constant across the estimation sample; held at start value");
                }
            }
            for (int k = 0; k < bd2; ++k) {
                if (xabs[k] < 1e-12) degenerate_slots.insert(off_beta_ + k);
            }
            for (int k = 0; k < pd2; ++k) {
                if (npabs[k] < 1e-12) {
                    degenerate_slots.insert(off_psi_ + k);
                    if (k < layout_.gamma_dim()) degenerate_slots.insert(off_gamma_ + k);
                }
            }
        }
    }

    // --- Free-parameter map ---------------------------------------------------
    std::set<std::string> fixed(cfg_.fix_blocks.begin(), cfg_.fix_blocks.end());
    if (!(any_adv && any_dis) && !fixed.count("eta")) {
        fixed.insert("eta");
        notes_.push_back("eta unidentified: no caste variation; held at start value");
    }
    std::vector<char> cut_fixed(n_firms_, 0);
    for (int f = 0; f < n_firms_; ++f) {
        if (firm_offers[f] == 0) {
            cut_fixed[f] = 1;
            start_full_[off_cut_ + f] = 60.0; // hire-none boundary
            if (firm_apps[f] > 0)
                notes_.push_back("cutoff for firm " + std::to_string(f) +
                                 " profiled at the hire-none boundary (no observed offers)");
        }
    }

    auto add_block = [&](const std::string& name, int off, int len,
                         const std::vector<std::string>& names) {
        if (fixed.count(name)) return;
        for (int k = 0; k < len; ++k) {
            if (degenerate_slots.count(off + k)) continue;
            free_slots_.push_back(off + k);
            free_names_.push_back(names.empty() ? name : name + ":" + names[k]);
        }
    };
    add_block("beta", off_beta_, bd, layout_.beta_names());
    add_block("psi", off_psi_, pd, layout_.np_names());
    add_block("tau", off_tau_, 1, {});
    add_block("gamma", off_gamma_, gd, layout_.gamma_names());
    add_block("alpha", off_alpha_, ad, layout_.s_names());
    add_block("eta", off_eta_, 1, {});
    add_block("phi", off_phi_, 1, {});
    add_block("delta", off_delta_, 1, {});
    add_block("sigma_q", off_lsig_, 1, {}); // log scale
    if (!fixed.count("cutoffs")) {
        for (int f = 0; f < n_firms_; ++f) {
            if (cut_fixed[f]) continue;
            free_slots_.push_back(off_cut_ + f);
            free_names_.push_back("cutoff:firm_" + std::to_string(f));
        }
    }
}

Eigen::VectorXd LikelihoodModel::pack(const ParameterSet& p) const {
    layout_.check(p, n_firms_);
    Eigen::VectorXd full = start_full_;
    const int bd = layout_.beta_dim(), pd = layout_.np_dim(), gd = layout_.gamma_dim(),
              ad = layout_.s_dim();
    for (int k = 0; k < bd; ++k) full[off_beta_ + k] = p.beta[k];
    for (int k = 0; k < pd; ++k) full[off_psi_ + k] = p.psi[k];
    full[off_tau_] = p.tau;
    for (int k = 0; k < gd; ++k) full[off_gamma_ + k] = p.gamma[k];
    for (int k = 0; k < ad; ++k) full[off_alpha_ + k] = p.alpha[k];
    full[off_eta_] = p.eta;
    full[off_phi_] = p.phi;
    full[off_delta_] = p.delta;
    full[off_lsig_] = std::log(std::max(p.sigma_q, 1e-8));
    for (int f = 0; f < n_firms_; ++f) full[off_cut_ + f] = p.cutoffs[f];
    Eigen::VectorXd v(n_free());
    for (int k = 0; k < n_free(); ++k) v[k] = full[free_slots_[k]];
    return v;
}

ParameterSet LikelihoodModel::unpack(const Eigen::VectorXd& free) const {
    Eigen::VectorXd full = start_full_;
    for (int k = 0; k < n_free(); ++k) full[free_slots_[k]] = free[k];
    ParameterSet p;
    const int bd = layout_.beta_dim(), pd = layout_.np_dim(), gd = layout_.gamma_dim(),
              ad = layout_.s_dim();
    p.beta = full.segment(off_beta_, bd);
    p.psi = full.segment(off_psi_, pd);
    p.tau = full[off_tau_];
    p.gamma = full.segment(off_gamma_, gd);
    p.alpha = full.segment(off_alpha_, ad);
    p.eta = full[off_eta_];
    p.phi = full[off_phi_];
    p.delta = full[off_delta_];
    p.sigma_q = std::exp(full[off_lsig_]);
    p.cutoffs.resize(n_firms_);
    for (int f = 0; f < n_firms_; ++f) p.cutoffs[f] = full[off_cut_ + f];
    return p;
}

double LikelihoodModel::eval_student(const StudentData& sd, const double* th, bool want_grad,
                                     Workspace& ws) const {
    const int bd = layout_.beta_dim(), pd = layout_.np_dim(), gd = layout_.gamma_dim(),
              ad = layout_.s_dim();
    const int na = sd.n_apps;
    const int no = static_cast<int>(sd.offer_idx.size());
    const double sigma = std::exp(th[off_lsig_]);
    const double delta = th[off_delta_];
    const double tau = th[off_tau_];
    const double phi = th[off_phi_];
    const double eta = th[off_eta_];

    // Draw-independent pieces per application.
    ws.emp_c.resize(na);
    for (int a = 0; a < na; ++a) {
        const double* srow = &sd.s_mat[static_cast<std::size_t>(a) * ad];
        double c = sd.disadv ? eta : 0.0;
        for (int k = 0; k < ad; ++k) c += srow[k] * th[off_alpha_ + k];
        c -= sd.w[a] * phi;
        c -= th[off_cut_ + sd.firm[a]];
        ws.emp_c[a] = c;
    }
    ws.u_off.resize(no);
    ws.qload_off.resize(no);
    for (int o = 0; o < no; ++o) {
        const int a = sd.offer_idx[o];
        const double* xrow = &sd.x_mat[static_cast<std::size_t>(a) * bd];
        const double* nprow = &sd.np_mat[static_cast<std::size_t>(a) * pd];
        double u = sd.w[a] * tau;
        for (int k = 0; k < bd; ++k) u += xrow[k] * th[off_beta_ + k];
        for (int k = 0; k < pd; ++k) u += nprow[k] * th[off_psi_ + k];
        ws.u_off[o] = u;
        double qload = 1.0;
        for (int k = 0; k < gd; ++k) qload += th[off_gamma_ + k] * nprow[k];
        ws.qload_off[o] = qload;
    }

    // Pass 1: per-draw log-likelihoods, storing probabilities for the
    // gradient pass.
    ws.logl_r.resize(R_);
    ws.pi_buf.assign(static_cast<std::size_t>(R_) * na, 0.0);
    ws.pc_buf.assign(static_cast<std::size_t>(R_) * no, 0.0);
    double lmax = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < R_; ++r) {
        const double q = sigma * sd.qdraw[r];
        double logf = 0.0;
        double* pi_row = &ws.pi_buf[static_cast<std::size_t>(r) * na];
        for (int a = 0; a < na; ++a) {
            if (!sd.active[a]) continue;
            const double t = ws.emp_c[a] + q * delta;
            const double pi = sigmoid(t);
            pi_row[a] = pi;
            logf += sd.z[a] ? log_sigmoid(t) : log_sigmoid(-t);
        }
        double logp = 0.0;
        if (no > 0) {
            double umax = 0.0;
            for (int o = 0; o < no; ++o) umax = std::max(umax, ws.u_off[o] + q * ws.qload_off[o]);
            double denom = std::exp(-umax);
            double* pc_row = &ws.pc_buf[static_cast<std::size_t>(r) * no];
            for (int o = 0; o < no; ++o) {
                pc_row[o] = std::exp(ws.u_off[o] + q * ws.qload_off[o] - umax);
                denom += pc_row[o];
            }
            for (int o = 0; o < no; ++o) pc_row[o] /= denom;
            const double logden = umax + std::log(denom);
            logp = sd.chosen_offer >= 0
                       ? ws.u_off[sd.chosen_offer] + q * ws.qload_off[sd.chosen_offer] - logden
                       : -logden;
        }
        ws.logl_r[r] = logf + logp;
        lmax = std::max(lmax, ws.logl_r[r]);
    }
    double sumexp = 0.0;
    for (int r = 0; r < R_; ++r) sumexp += std::exp(ws.logl_r[r] - lmax);
    const double loglik = lmax + std::log(sumexp) - std::log(static_cast<double>(R_));

    if (!want_grad) return loglik;

    // Pass 2: weighted score accumulation.
    double* g = ws.grad_full.data();
    for (int r = 0; r < R_; ++r) {
        const double wr = std::exp(ws.logl_r[r] - lmax) / sumexp;
        if (wr == 0.0) continue;
        const double q = sigma * sd.qdraw[r];
        const double* pi_row = &ws.pi_buf[static_cast<std::size_t>(r) * na];
        double dlog_sig = 0.0; // d logL_r / d log(sigma)
        for (int a = 0; a < na; ++a) {
            if (!sd.active[a]) continue;
            const double resid = (sd.z[a] ? 1.0 : 0.0) - pi_row[a];
            const double wresid = wr * resid;
            const double* srow = &sd.s_mat[static_cast<std::size_t>(a) * ad];
            for (int k = 0; k < ad; ++k) g[off_alpha_ + k] += wresid * srow[k];
            if (sd.disadv) g[off_eta_] += wresid;
            g[off_phi_] -= wresid * sd.w[a];
            g[off_delta_] += wresid * q;
            g[off_cut_ + sd.firm[a]] -= wresid;
            dlog_sig += resid * q * delta;
        }
        if (no > 0) {
            const double* pc_row = &ws.pc_buf[static_cast<std::size_t>(r) * no];
            for (int o = 0; o < no; ++o) {
                const double resid = (o == sd.chosen_offer ? 1.0 : 0.0) - pc_row[o];
                const double wresid = wr * resid;
                const int a = sd.offer_idx[o];
                const double* xrow = &sd.x_mat[static_cast<std::size_t>(a) * bd];
                const double* nprow = &sd.np_mat[static_cast<std::size_t>(a) * pd];
                for (int k = 0; k < bd; ++k) g[off_beta_ + k] += wresid * xrow[k];
                for (int k = 0; k < pd; ++k) g[off_psi_ + k] += wresid * nprow[k];
                g[off_tau_] += wresid * sd.w[a];
                for (int k = 0; k < gd; ++k) g[off_gamma_ + k] += wresid * q * nprow[k];
                dlog_sig += resid * q * ws.qload_off[o];
            }
        }
        g[off_lsig_] += wr * dlog_sig;
    }
    return loglik;
}

void LikelihoodModel::run(const Eigen::VectorXd& free, std::vector<double>& loglik,
                          Eigen::MatrixXd* scores, par::Exec mode) const {
    Eigen::VectorXd full = start_full_;
    for (int k = 0; k < n_free(); ++k) full[free_slots_[k]] = free[k];
    const int N = n_students();
    loglik.assign(N, 0.0);
    if (scores) scores->setZero(N, n_free());
    const bool want_grad = scores != nullptr;
    const double* th = full.data();

#ifdef _OPENMP
#pragma omp parallel if (mode == par::Exec::Parallel)
#endif
    {
        Workspace ws;
        ws.grad_full.assign(total_dim_, 0.0);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (int i = 0; i < N; ++i) {
            if (want_grad) std::fill(ws.grad_full.begin(), ws.grad_full.end(), 0.0);
            loglik[i] = eval_student(students_[i], th, want_grad, ws);
            if (want_grad)
                for (int k = 0; k < n_free(); ++k)
                    (*scores)(i, k) = ws.grad_full[free_slots_[k]];
        }
    }
}

double LikelihoodModel::eval(const Eigen::VectorXd& free, Eigen::VectorXd* grad,
                             par::Exec mode) const {
    std::vector<double> loglik;
    Eigen::MatrixXd scores;
    run(free, loglik, grad ? &scores : nullptr, mode);
    const int N = n_students();
    const double mean_ll = par::pairwise_sum(loglik) / N;
    if (grad) {
        grad->resize(n_free());
        std::vector<double> col(N);
        for (int k = 0; k < n_free(); ++k) {
            for (int i = 0; i < N; ++i) col[i] = scores(i, k);
            (*grad)[k] = par::pairwise_sum(col) / N;
        }
    }
    return mean_ll;
}

void LikelihoodModel::per_student(const Eigen::VectorXd& free, std::vector<double>& loglik,
                                  Eigen::MatrixXd* scores, par::Exec mode) const {
    run(free, loglik, scores, mode);
}

Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double step) {
    if (step <= 0) throw config_error("finite_difference_gradient: step must be positive");
    Eigen::VectorXd g(x.size()), xp = x;
    for (int k = 0; k < x.size(); ++k) {
        const double h = step * std::max(1.0, std::abs(x[k]));
        xp[k] = x[k] + h;
        const double fp = f(xp);
        xp[k] = x[k] - h;
        const double fm = f(xp);
        xp[k] = x[k];
        g[k] = (fp - fm) / (2.0 * h);
    }
    return g;
}

} // namespace placement
