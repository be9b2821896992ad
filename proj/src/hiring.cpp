#include "placement/hiring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "placement/mathutil.hpp"
#include "placement/parallel.hpp"
#include "placement/rng.hpp"

namespace placement {

double employer_utility(const Student& s, const Job& j, const StageFlags& f,
                        const ParameterSet& p, const CovariateLayout& layout) {
    if (std::isnan(s.q))
        throw config_error("employer_utility: latent q missing on student " + std::to_string(s.id));
    Eigen::VectorXd sv = layout.s_vec(s, f);
    const double caste_term = s.disadvantaged() ? p.eta : 0.0;
    return sv.dot(p.alpha) + caste_term - j.log_wage * p.phi + s.q * p.delta;
}

double employer_utility(const Student& s, const Job& j, const ParameterSet& p,
                        const CovariateLayout& layout) {
    StageFlags f;
    if (j.id >= 0 && j.id < static_cast<int>(s.stage_flags.size())) f = s.stage_flags[j.id];
    return employer_utility(s, j, f, p, layout);
}

double acceptance_probability(const Student& s, const Job& j, const ParameterSet& p,
                              const CovariateLayout& layout) {
    if (j.firm < 0 || j.firm >= static_cast<int>(p.cutoffs.size()))
        throw config_error("acceptance_probability: no cutoff for firm " + std::to_string(j.firm));
    return sigmoid(employer_utility(s, j, p, layout) - p.cutoffs[j.firm]);
}

double day_offer_probability(const std::vector<double>& pi, const std::vector<std::uint8_t>& z,
                             const std::vector<std::uint8_t>& a) {
    if (pi.size() != z.size() || z.size() != a.size())
        throw config_error("day_offer_probability: misaligned inputs");
    double prob = 1.0;
    for (std::size_t j = 0; j < pi.size(); ++j) {
        if (z[j] && !a[j])
            throw validation_error("day_offer_probability: offer without application");
        if (a[j])
            prob *= z[j] ? pi[j] : 1.0 - pi[j];
        // non-applied postings contribute (1 - A)(1 - Z) = 1
    }
    return prob;
}

double offer_vector_probability(const StudentOfferProblem& prob,
                                const std::vector<std::uint8_t>& z) {
    const std::size_t n = prob.pi.size();
    if (prob.day.size() != n || z.size() != n)
        throw config_error("offer_vector_probability: misaligned inputs");

    int offer_day = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!z[j]) continue;
        if (offer_day == 0) offer_day = prob.day[j];
        if (prob.day[j] != offer_day)
            throw validation_error("offer_vector_probability: offers span two interview days");
    }

    // Probability of no day-d offer, and of the observed day-d pattern.
    auto day_none = [&](int d) {
        double v = 1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (prob.day[j] == d) v *= 1.0 - prob.pi[j];
        return v;
    };
    auto day_pattern = [&](int d) {
        double v = 1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (prob.day[j] == d) v *= z[j] ? prob.pi[j] : 1.0 - prob.pi[j];
        return v;
    };

    int max_day = 0;
    for (std::size_t j = 0; j < n; ++j) max_day = std::max(max_day, prob.day[j]);

    if (offer_day == 0) {
        double v = 1.0;
        for (int d = 1; d <= max_day; ++d) v *= day_none(d);
        return v;
    }
    double v = 1.0;
    for (int d = 1; d < offer_day; ++d) v *= day_none(d);
    return v * day_pattern(offer_day);
}

double offer_vector_probability(const std::vector<double>& pi, const DayAssignment& days,
                                const std::vector<std::uint8_t>& z) {
    if (days.alternatives.empty())
        throw config_error("offer_vector_probability: empty day assignment");
    double total = 0.0, mass = 0.0;
    for (const auto& alt : days.alternatives) {
        StudentOfferProblem prob{pi, alt.day};
        total += alt.prob * offer_vector_probability(prob, z);
        mass += alt.prob;
    }
    if (std::abs(mass - 1.0) > 1e-9)
        throw config_error("offer_vector_probability: day-assignment probabilities sum to " +
                           std::to_string(mass));
    return total;
}

StudentOfferProblem build_offer_problem(const Student& s, const Market& m,
                                        const ParameterSet& p, const CovariateLayout& layout,
                                        std::vector<int>* applied_postings) {
    StudentOfferProblem prob;
    for (int pid = 0; pid < m.n_postings(); ++pid) {
        if (!s.applications[pid]) continue;
        if (m.config.offers_gated_by_interview && !s.stage_flags[pid].passed_debate) continue;
        prob.pi.push_back(acceptance_probability(s, m.postings[pid], p, layout));
        prob.day.push_back(m.postings[pid].interview_day);
        if (applied_postings) applied_postings->push_back(pid);
    }
    return prob;
}

double offer_vector_probability(const Student& s, const Market& m, const ParameterSet& p,
                                const CovariateLayout& layout) {
    std::vector<int> applied;
    StudentOfferProblem prob = build_offer_problem(s, m, p, layout, &applied);
    std::vector<std::uint8_t> z(applied.size(), 0);
    const auto& off = m.offers[s.id];
    for (std::size_t k = 0; k < applied.size(); ++k) z[k] = off.z[applied[k]];
    return offer_vector_probability(prob, z);
}

std::vector<OfferVector> simulate_offers(const Market& m, const ParameterSet& p,
                                         const CovariateLayout& layout,
                                         const MatchShocks& mu,
                                         const std::vector<ChoiceShocks>& eps) {
    const int N = m.n_students();
    const int P = m.n_postings();
    std::vector<OfferVector> out(N);

    int max_day = 0;
    for (const auto& j : m.postings) max_day = std::max(max_day, j.interview_day);

    const bool gated = m.config.offers_gated_by_interview;
    par::for_each_index(N, par::Exec::Parallel, [&](int i) {
        const Student& s = m.students[i];
        OfferVector ov;
        ov.z.assign(P, 0);
        for (int d = 1; d <= max_day && ov.offer_day == 0; ++d) {
            for (int pid = 0; pid < P; ++pid) {
                if (!s.applications[pid]) continue;
                if (gated && !s.stage_flags[pid].passed_debate) continue;
                const Job& j = m.postings[pid];
                if (j.interview_day != d) continue;
                const double v = employer_utility(s, j, s.stage_flags[pid], p, layout) +
                                 mu.mu[i][pid];
                if (j.firm >= static_cast<int>(p.cutoffs.size()))
                    throw config_error("simulate_offers: missing cutoff for firm " +
                                       std::to_string(j.firm));
                if (v > p.cutoffs[j.firm]) {
                    ov.z[pid] = 1;
                    ov.offer_day = d;
                }
            }
        }
        ov.chosen = ov.offer_day == 0 ? kOutside : choose(s, ov, eps[i], m, p, layout);
        out[i] = std::move(ov);
    });
    return out;
}

// ---- HiringModel --------------------------------------------------------------

HiringModel::HiringModel(const Market& m, const ParameterSet& p, const CovariateLayout& layout,
                         Options opt)
    : m_(m), p_(p), layout_(layout), opt_(opt) {
    n_firms_ = static_cast<int>(p_.cutoffs.size());
    layout_.check(p_, n_firms_);
    const int N = m_.n_students();

    for (const auto& j : m_.postings) {
        n_days_ = std::max(n_days_, j.interview_day);
        if (j.firm < 0 || j.firm >= n_firms_)
            throw config_error("HiringModel: posting " + std::to_string(j.id) +
                               " references firm without cutoff");
    }

    pairs_by_student_.resize(N);
    pairs_by_firm_.resize(n_firms_);
    firms_by_day_.assign(n_days_ + 1, {});

    std::vector<double> npv(layout_.np_dim()), xv(layout_.beta_dim()), sv(layout_.s_dim());
    const bool gated = m_.config.offers_gated_by_interview;
    for (int i = 0; i < N; ++i) {
        const Student& s = m_.students[i];
        for (int pid = 0; pid < m_.n_postings(); ++pid) {
            if (!s.applications[pid]) continue;
            if (gated && !s.stage_flags[pid].passed_debate) continue;
            const Job& j = m_.postings[pid];
            Pair pr;
            pr.student = i;
            pr.posting = pid;
            pr.firm = j.firm;
            pr.day = j.interview_day;
            layout_.build_s(s, s.stage_flags[pid], sv.data());
            double se = 0;
            for (int k = 0; k < layout_.s_dim(); ++k) se += sv[k] * p_.alpha[k];
            pr.emp_base = se + (s.disadvantaged() ? p_.eta : 0.0) - j.log_wage * p_.phi;
            layout_.build_np(j, npv.data());
            layout_.build_x(s, j, xv.data());
            double ue = j.log_wage * p_.tau;
            for (int k = 0; k < layout_.np_dim(); ++k) ue += npv[k] * p_.psi[k];
            for (int k = 0; k < layout_.beta_dim(); ++k) ue += xv[k] * p_.beta[k];
            pr.u_base = ue;
            double qload = 1.0;
            for (int k = 0; k < layout_.gamma_dim(); ++k) qload += p_.gamma[k] * npv[k];
            pr.qload_stu = qload;
            pairs_by_student_[i].push_back(static_cast<int>(pairs_.size()));
            pairs_by_firm_[pr.firm].push_back(static_cast<int>(pairs_.size()));
            pairs_.push_back(pr);
        }
    }

    for (int f = 0; f < n_firms_; ++f) {
        int day = -1;
        for (int idx : pairs_by_firm_[f]) {
            if (day < 0) day = pairs_[idx].day;
            if (pairs_[idx].day != day)
                throw config_error("HiringModel: firm " + std::to_string(f) +
                                   " interviews on multiple days");
        }
        if (day >= 1) firms_by_day_[day].push_back(f);
    }

    R_ = opt_.q_mode == Options::QMode::OracleQ ? 1 : std::max(1, opt_.q_draws);
    qdraws_.resize(static_cast<std::size_t>(N) * R_);
    if (opt_.q_mode == Options::QMode::OracleQ) {
        for (int i = 0; i < N; ++i) {
            if (std::isnan(m_.students[i].q))
                throw config_error("HiringModel: oracle q mode but q missing on student " +
                                   std::to_string(m_.students[i].id));
            qdraws_[i] = m_.students[i].q;
        }
    } else {
        for (int i = 0; i < N; ++i) {
            rng::Stream g(opt_.seed, 0x9d0 + static_cast<std::uint64_t>(i));
            for (int r = 0; r < R_; ++r)
                qdraws_[static_cast<std::size_t>(i) * R_ + r] = p_.sigma_q * g.normal();
        }
    }

    cut_adv_ = p_.cutoffs;
    cut_dis_ = p_.cutoffs;
}

double HiringModel::adj_for(int student, int posting) const {
    if (!adjustment_) return 0.0;
    return (*adjustment_)[student][posting];
}

double HiringModel::cutoff_for(const Pair& pr) const {
    return m_.students[pr.student].disadvantaged() ? cut_dis_[pr.firm] : cut_adv_[pr.firm];
}

void HiringModel::set_cutoffs(const std::vector<double>& both) {
    if (static_cast<int>(both.size()) != n_firms_)
        throw config_error("set_cutoffs: wrong length");
    cut_adv_ = both;
    cut_dis_ = both;
}

void HiringModel::set_cutoffs(const std::vector<double>& adv, const std::vector<double>& dis) {
    if (static_cast<int>(adv.size()) != n_firms_ || static_cast<int>(dis.size()) != n_firms_)
        throw config_error("set_cutoffs: wrong length");
    cut_adv_ = adv;
    cut_dis_ = dis;
}

void HiringModel::build_day_cache(int day, DayCache& cache) const {
    const int N = m_.n_students();
    cache.day = day;

    // Eligibility: no offer on any earlier day, at current cutoffs.
    cache.elig.assign(static_cast<std::size_t>(N) * R_, 1.0);
    par::for_each_index(N, par::Exec::Parallel, [&](int i) {
        for (int idx : pairs_by_student_[i]) {
            const Pair& pr = pairs_[idx];
            if (pr.day >= day) continue;
            const double k = cutoff_for(pr);
            const double adj = adj_for(pr.student, pr.posting);
            for (int r = 0; r < R_; ++r) {
                const double q = qdraws_[static_cast<std::size_t>(i) * R_ + r];
                cache.elig[static_cast<std::size_t>(i) * R_ + r] *=
                    1.0 - sigmoid(pr.emp_base + q * p_.delta + adj - k);
            }
        }
    });

    // Day pairs grouped by firm.
    cache.pair_ids.clear();
    for (int f : firms_by_day_[day])
        for (int idx : pairs_by_firm_[f]) cache.pair_ids.push_back(idx);
    cache.pair_offset_by_firm_begin.assign(n_firms_, 0);
    cache.pair_offset_by_firm_end.assign(n_firms_, 0);
    {
        std::size_t pos = 0;
        for (int f : firms_by_day_[day]) {
            cache.pair_offset_by_firm_begin[f] = static_cast<int>(pos);
            pos += pairs_by_firm_[f].size();
            cache.pair_offset_by_firm_end[f] = static_cast<int>(pos);
        }
    }
    const std::size_t npairs = cache.pair_ids.size();
    cache.emp.assign(npairs * R_, 0.0);
    cache.accept.assign(npairs * R_, 0.0);

    // Map global pair index -> slot in this cache.
    std::vector<int> slot_of(pairs_.size(), -1);
    for (std::size_t s = 0; s < npairs; ++s) slot_of[cache.pair_ids[s]] = static_cast<int>(s);

    par::for_each_index(N, par::Exec::Parallel, [&](int i) {
        // This student's postings on `day`.
        std::vector<int> local;
        for (int idx : pairs_by_student_[i])
            if (pairs_[idx].day == day) local.push_back(idx);
        if (local.empty()) return;
        const int mloc = static_cast<int>(local.size());
        if (mloc - 1 > opt_.rival_enum_limit)
            throw config_error("HiringModel: " + std::to_string(mloc) +
                               " same-day applications exceed the exact enumeration limit");
        std::vector<double> pi(mloc), eu(mloc), emp(mloc);
        for (int r = 0; r < R_; ++r) {
            const double q = qdraws_[static_cast<std::size_t>(i) * R_ + r];
            double umax = 0.0;
            for (int l = 0; l < mloc; ++l) {
                const Pair& pr = pairs_[local[l]];
                emp[l] = pr.emp_base + q * p_.delta + adj_for(pr.student, pr.posting);
                pi[l] = sigmoid(emp[l] - cutoff_for(pr));
                const double u = pr.u_base + q * pr.qload_stu;
                eu[l] = u;
                umax = std::max(umax, u);
            }
            for (int l = 0; l < mloc; ++l) eu[l] = std::exp(eu[l] - umax);
            const double eout = std::exp(-umax);

            for (int l = 0; l < mloc; ++l) {
                // P(student picks this posting | it makes an offer), over rival
                // same-day offers and choice shocks.
                double acc = 0.0;
                const int nriv = mloc - 1;
                for (unsigned mask = 0; mask < (1u << nriv); ++mask) {
                    double prob = 1.0, denom = eout + eu[l];
                    int b = 0;
                    for (int t = 0; t < mloc; ++t) {
                        if (t == l) continue;
                        if (mask & (1u << b)) {
                            prob *= pi[t];
                            denom += eu[t];
                        } else {
                            prob *= 1.0 - pi[t];
                        }
                        ++b;
                    }
                    acc += prob * eu[l] / denom;
                }
                const int slot = slot_of[local[l]];
                cache.emp[static_cast<std::size_t>(slot) * R_ + r] = emp[l];
                cache.accept[static_cast<std::size_t>(slot) * R_ + r] = acc;
            }
        }
    });
}

double HiringModel::expected_hires_from_cache(const DayCache& c, int firm, double k,
                                              int caste_filter) const {
    const int b = c.pair_offset_by_firm_begin[firm];
    const int e = c.pair_offset_by_firm_end[firm];
    if (b == e) return 0.0;
    std::vector<double> terms(static_cast<std::size_t>(e - b) * R_, 0.0);
    for (int s = b; s < e; ++s) {
        const Pair& pr = pairs_[c.pair_ids[s]];
        const bool dis = m_.students[pr.student].disadvantaged();
        if (caste_filter == 0 && dis) continue;
        if (caste_filter == 1 && !dis) continue;
        const std::size_t emp_off = static_cast<std::size_t>(s) * R_;
        const std::size_t elig_off = static_cast<std::size_t>(pr.student) * R_;
        const std::size_t term_off = static_cast<std::size_t>(s - b) * R_;
        for (int r = 0; r < R_; ++r)
            terms[term_off + r] =
                c.elig[elig_off + r] * sigmoid(c.emp[emp_off + r] - k) * c.accept[emp_off + r];
    }
    return par::pairwise_sum(terms) / static_cast<double>(R_);
}

double HiringModel::expected_hires(int firm) const {
    return expected_hires(firm, Caste::Advantaged) + expected_hires(firm, Caste::Disadvantaged);
}

double HiringModel::expected_hires(int firm, Caste caste) const {
    if (pairs_by_firm_[firm].empty()) return 0.0;
    DayCache cache;
    build_day_cache(pairs_[pairs_by_firm_[firm].front()].day, cache);
    const double k = caste == Caste::Advantaged ? cut_adv_[firm] : cut_dis_[firm];
    return expected_hires_from_cache(cache, firm, k, caste == Caste::Advantaged ? 0 : 1);
}

double HiringModel::expected_cohort_value(int firm) const {
    if (pairs_by_firm_[firm].empty()) return 0.0;
    DayCache cache;
    build_day_cache(pairs_[pairs_by_firm_[firm].front()].day, cache);
    const int b = cache.pair_offset_by_firm_begin[firm];
    const int e = cache.pair_offset_by_firm_end[firm];
    std::vector<double> terms(static_cast<std::size_t>(e - b) * R_, 0.0);
    for (int s = b; s < e; ++s) {
        const Pair& pr = pairs_[cache.pair_ids[s]];
        const double k = cutoff_for(pr);
        const std::size_t emp_off = static_cast<std::size_t>(s) * R_;
        const std::size_t elig_off = static_cast<std::size_t>(pr.student) * R_;
        for (int r = 0; r < R_; ++r) {
            const double c = cache.emp[emp_off + r];
            // E[(c + mu) 1{c + mu > k}] = k * sigmoid(c - k) + log(1 + exp(c - k))
            const double ev = k * sigmoid(c - k) + log1pexp(c - k);
            terms[static_cast<std::size_t>(s - b) * R_ + r] =
                cache.elig[elig_off + r] * cache.accept[emp_off + r] * ev;
        }
    }
    return par::pairwise_sum(terms) / static_cast<double>(R_);
}

namespace {
struct Bracket {
    double lo, hi;
};

Bracket emp_bracket(const std::vector<double>& emp, int b, int e, int R, double pad) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t t = static_cast<std::size_t>(b) * R; t < static_cast<std::size_t>(e) * R; ++t) {
        lo = std::min(lo, emp[t]);
        hi = std::max(hi, emp[t]);
    }
    return {lo - pad, hi + pad};
}
} // namespace

double HiringModel::solve_cutoff(int firm, double target) const {
    if (target < 0.0) throw config_error("solve_cutoff: negative target");
    if (pairs_by_firm_[firm].empty()) return kHireAllCutoff;
    DayCache cache;
    build_day_cache(pairs_[pairs_by_firm_[firm].front()].day, cache);

    auto E = [&](double k) { return expected_hires_from_cache(cache, firm, k, -1); };
    const Bracket br = emp_bracket(cache.emp, cache.pair_offset_by_firm_begin[firm],
                                   cache.pair_offset_by_firm_end[firm], R_, 40.0);
    double e_max = E(br.lo);
    if (e_max <= target + 1e-12) return kHireAllCutoff;

    double lo = br.lo, hi = br.hi;
    double e_lo = e_max, e_hi = E(hi);
    for (int it = 0; it < 200; ++it) {
        if (e_lo - e_hi <= 1e-9 && hi - lo <= 1e-9) break;
        const double mid = 0.5 * (lo + hi);
        const double em = E(mid);
        if (em <= target) {
            hi = mid;
            e_hi = em;
        } else {
            lo = mid;
            e_lo = em;
        }
    }
    return hi;
}

HiringModel::SolveReport HiringModel::solve_inelastic(const std::vector<double>& targets) {
    if (static_cast<int>(targets.size()) != n_firms_)
        throw config_error("solve_inelastic: targets length mismatch");
    SolveReport rep;
    DayCache cache;
    for (int d = 1; d <= n_days_; ++d) {
        if (firms_by_day_[d].empty()) continue;
        for (int sweep = 0; sweep < 100; ++sweep) {
            ++rep.sweeps;
            build_day_cache(d, cache);
            double max_change = 0.0;
            std::vector<double> newk(firms_by_day_[d].size());
            const int nf = static_cast<int>(firms_by_day_[d].size());
            par::for_each_index(nf, par::Exec::Parallel, [&](int fi) {
                const int f = firms_by_day_[d][fi];
                const double target = targets[f];
                auto E = [&](double k) { return expected_hires_from_cache(cache, f, k, -1); };
                const int b = cache.pair_offset_by_firm_begin[f];
                const int e = cache.pair_offset_by_firm_end[f];
                if (b == e || target < 0) {
                    newk[fi] = kHireAllCutoff;
                    return;
                }
                const Bracket br = emp_bracket(cache.emp, b, e, R_, 40.0);
                if (E(br.lo) <= target + 1e-12) {
                    newk[fi] = kHireAllCutoff;
                    return;
                }
                double lo = br.lo, hi = br.hi;
                double e_lo = E(lo), e_hi = E(hi);
                for (int it = 0; it < 200; ++it) {
                    if (e_lo - e_hi <= 1e-10 && hi - lo <= 1e-11) break;
                    const double mid = 0.5 * (lo + hi);
                    const double em = E(mid);
                    if (em <= target) {
                        hi = mid;
                        e_hi = em;
                    } else {
                        lo = mid;
                        e_lo = em;
                    }
                }
                newk[fi] = hi;
            });
            for (int fi = 0; fi < nf; ++fi) {
                const int f = firms_by_day_[d][fi];
                const double old_a = cut_adv_[f];
                max_change = std::max(max_change, std::abs(newk[fi] - old_a));
                cut_adv_[f] = newk[fi];
                cut_dis_[f] = newk[fi];
            }
            if (max_change < 1e-10) break;
            if (sweep == 99) rep.converged = false;
        }
    }
    return rep;
}

std::vector<double> HiringModel::expected_hires_all() const {
    std::vector<double> adv = expected_hires_all(Caste::Advantaged);
    std::vector<double> dis = expected_hires_all(Caste::Disadvantaged);
    for (int f = 0; f < n_firms_; ++f) adv[f] += dis[f];
    return adv;
}

std::vector<double> HiringModel::expected_hires_all(Caste caste) const {
    std::vector<double> out(n_firms_, 0.0);
    DayCache cache;
    for (int d = 1; d <= n_days_; ++d) {
        if (firms_by_day_[d].empty()) continue;
        build_day_cache(d, cache);
        for (int f : firms_by_day_[d]) {
            const double k = caste == Caste::Advantaged ? cut_adv_[f] : cut_dis_[f];
            out[f] = expected_hires_from_cache(cache, f, k, caste == Caste::Advantaged ? 0 : 1);
        }
    }
    return out;
}

HiringModel::SimulatedOutcomes HiringModel::simulate(int reps, std::uint64_t seed) const {
    const int N = m_.n_students();
    const bool draw_q = opt_.q_mode == Options::QMode::Integrate;

    // Per-replication statistics; reduced pairwise afterwards so the result
    // does not depend on thread count.
    const int n_base = 11 + 2 * kNumSectors;
    const int n_stats = n_base + 2 * n_firms_;
    std::vector<double> stats(static_cast<std::size_t>(reps) * n_stats, 0.0);

    par::for_each_index(reps, par::Exec::Parallel, [&](int rep) {
        double* st = &stats[static_cast<std::size_t>(rep) * n_stats];
        std::vector<int> offered;
        for (int i = 0; i < N; ++i) {
            // One substream per (replication, student): a student's draws do
            // not depend on other students' realizations, so students whose
            // probabilities a policy leaves untouched realize identical paths.
            rng::Stream g(seed, (static_cast<std::uint64_t>(rep) << 32) |
                                    static_cast<std::uint64_t>(i));
            const double q = draw_q ? p_.sigma_q * g.normal() : qdraws_[i];
            const Student& s = m_.students[i];
            const bool dis = s.disadvantaged();
            offered.clear();
            for (int d = 1; d <= n_days_ && offered.empty(); ++d) {
                for (int idx : pairs_by_student_[i]) {
                    const Pair& pr = pairs_[idx];
                    if (pr.day != d) continue;
                    const double pi = sigmoid(pr.emp_base + q * p_.delta +
                                              adj_for(pr.student, pr.posting) - cutoff_for(pr));
                    if (g.bernoulli(pi)) offered.push_back(idx);
                }
            }

            st[dis ? 1 : 0] += 1.0; // cohort size by caste
            st[2] += static_cast<double>(offered.size());
            for (int idx : offered) {
                st[n_base + pairs_[idx].firm] += 1.0;
                st[11 + static_cast<int>(m_.postings[pairs_[idx].posting].sector)] += 1.0;
            }

            int chosen = kOutside;
            if (!offered.empty()) {
                double best = g.gumbel(); // outside option, utility 0
                for (int idx : offered) {
                    const Pair& pr = pairs_[idx];
                    const double u = pr.u_base + q * pr.qload_stu + g.gumbel();
                    if (u > best) {
                        best = u;
                        chosen = pr.posting;
                    }
                }
            }
            if (chosen == kOutside) {
                st[dis ? 4 : 3] += 1.0; // unemployed by caste
            } else {
                st[dis ? 6 : 5] += 1.0; // hired by caste
                st[dis ? 8 : 7] += m_.postings[chosen].log_wage;
                st[11 + kNumSectors + static_cast<int>(m_.postings[chosen].sector)] += 1.0;
                st[n_base + n_firms_ + m_.postings[chosen].firm] += 1.0;
            }
        }
    });

    // Column-wise deterministic reduction.
    std::vector<double> col(reps);
    auto reduce = [&](int c) {
        for (int r = 0; r < reps; ++r) col[r] = stats[static_cast<std::size_t>(r) * n_stats + c];
        return par::pairwise_sum(col);
    };

    SimulatedOutcomes o;
    o.replications = reps;
    const double n_adv = reduce(0), n_dis = reduce(1);
    o.total_offers = reduce(2) / reps;
    const double un_adv = reduce(3), un_dis = reduce(4);
    const double hi_adv = reduce(5), hi_dis = reduce(6);
    const double lw_adv = reduce(7), lw_dis = reduce(8);
    o.unemployment_adv = n_adv > 0 ? un_adv / n_adv : 0.0;
    o.unemployment_dis = n_dis > 0 ? un_dis / n_dis : 0.0;
    o.unemployment_all = (un_adv + un_dis) / (n_adv + n_dis);
    o.hires_adv = hi_adv / reps;
    o.hires_dis = hi_dis / reps;
    o.total_hires = o.hires_adv + o.hires_dis;
    o.mean_log_salary_adv = hi_adv > 0 ? lw_adv / hi_adv : 0.0;
    o.mean_log_salary_dis = hi_dis > 0 ? lw_dis / hi_dis : 0.0;
    o.earnings_gap = (hi_adv > 0 && hi_dis > 0) ? o.mean_log_salary_dis - o.mean_log_salary_adv
                                                : 0.0;
    double off_tot = 0, cho_tot = 0;
    double off_s[kNumSectors], cho_s[kNumSectors];
    for (int s = 0; s < kNumSectors; ++s) {
        off_s[s] = reduce(11 + s);
        cho_s[s] = reduce(11 + kNumSectors + s);
        off_tot += off_s[s];
        cho_tot += cho_s[s];
    }
    for (int s = 0; s < kNumSectors; ++s) {
        o.offer_share_sector[s] = off_tot > 0 ? off_s[s] / off_tot : 0.0;
        o.choice_share_sector[s] = cho_tot > 0 ? cho_s[s] / cho_tot : 0.0;
    }
    o.offers_by_firm.resize(n_firms_);
    o.hires_by_firm.resize(n_firms_);
    for (int f = 0; f < n_firms_; ++f) {
        o.offers_by_firm[f] = reduce(n_base + f) / reps;
        o.hires_by_firm[f] = reduce(n_base + n_firms_ + f) / reps;
    }
    return o;
}

HiringModel::QuotaReport HiringModel::solve_quota(double ratio,
                                                  const std::vector<double>& marginal_cost) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw config_error("solve_quota: ratio must be in (0,1)");
    if (static_cast<int>(marginal_cost.size()) != n_firms_)
        throw config_error("solve_quota: marginal_cost length mismatch");
    QuotaReport rep;

    // Firms with a one-caste applicant pool keep their baseline cutoff.
    std::vector<char> exempt(n_firms_, 0);
    for (int f = 0; f < n_firms_; ++f) {
        bool has_adv = false, has_dis = false;
        for (int idx : pairs_by_firm_[f]) {
            if (m_.students[pairs_[idx].student].disadvantaged())
                has_dis = true;
            else
                has_adv = true;
        }
        if (!(has_adv && has_dis)) {
            exempt[f] = 1;
            if (!pairs_by_firm_[f].empty()) rep.exempted_firms.push_back(f);
        }
    }

    const double rho = ratio;
    DayCache cache;
    for (int d = 1; d <= n_days_; ++d) {
        if (firms_by_day_[d].empty()) continue;
        for (int sweep = 0; sweep < 100; ++sweep) {
            ++rep.sweeps;
            build_day_cache(d, cache);
            double max_change = 0.0;
            const int nf = static_cast<int>(firms_by_day_[d].size());
            std::vector<double> new_a(nf), new_d(nf);
            par::for_each_index(nf, par::Exec::Parallel, [&](int fi) {
                const int f = firms_by_day_[d][fi];
                new_a[fi] = cut_adv_[f];
                new_d[fi] = cut_dis_[f];
                if (exempt[f]) return;
                const double mc = marginal_cost[f];
                auto EA = [&](double k) { return expected_hires_from_cache(cache, f, k, 0); };
                auto ED = [&](double k) { return expected_hires_from_cache(cache, f, k, 1); };
                // Hires balance E_D = rho/(1-rho) E_A with the marginal-utility
                // condition (1-rho) k_A + rho k_D = mc tying the two cutoffs.
                auto kd_of = [&](double ka) { return (mc - (1.0 - rho) * ka) / rho; };
                auto h = [&](double ka) {
                    return ED(kd_of(ka)) - rho / (1.0 - rho) * EA(ka);
                };
                const int b = cache.pair_offset_by_firm_begin[f];
                const int e = cache.pair_offset_by_firm_end[f];
                Bracket br = emp_bracket(cache.emp, b, e, R_, 60.0);
                // widen until h brackets a root (h is increasing in ka)
                double lo = br.lo, hi = br.hi;
                for (int g = 0; g < 60 && h(lo) > 0.0; ++g) lo -= 60.0;
                for (int g = 0; g < 60 && h(hi) < 0.0; ++g) hi += 60.0;
                for (int it = 0; it < 200; ++it) {
                    if (hi - lo <= 1e-11) break;
                    const double mid = 0.5 * (lo + hi);
                    if (h(mid) >= 0.0)
                        hi = mid;
                    else
                        lo = mid;
                }
                new_a[fi] = hi;
                new_d[fi] = kd_of(hi);
            });
            for (int fi = 0; fi < nf; ++fi) {
                const int f = firms_by_day_[d][fi];
                max_change = std::max(max_change,
                                      std::max(std::abs(new_a[fi] - cut_adv_[f]),
                                               std::abs(new_d[fi] - cut_dis_[f])));
                cut_adv_[f] = new_a[fi];
                cut_dis_[f] = new_d[fi];
            }
            if (max_change < 1e-10) break;
            if (sweep == 99) rep.converged = false;
        }
    }
    return rep;
}

} // namespace placement
