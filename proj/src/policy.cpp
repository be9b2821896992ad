#include "placement/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "placement/generate.hpp"
#include "placement/parallel.hpp"
#include "placement/rng.hpp"

namespace placement {

Wtp wtp_student(double coef, double tau, double avg_salary) {
    if (!(tau > 0)) throw config_error("wtp_student: tau must be positive");
    Wtp w;
    const double frac = std::exp(coef / tau) - 1.0;
    w.percent = 100.0 * frac;
    w.dollars = frac * avg_salary;
    return w;
}

Wtp wtp_employer(double coef, double phi, double avg_salary) {
    if (!(phi > 0)) throw config_error("wtp_employer: phi must be positive");
    Wtp w;
    if (coef == 0.0) return w;
    const double frac = 1.0 - std::exp(-std::abs(coef) / phi);
    w.percent = 100.0 * frac;
    w.dollars = frac * avg_salary;
    return w;
}

Wtp wtp_student_se(double coef, double se_coef, double tau, double se_tau, double avg_salary) {
    if (!(tau > 0)) throw config_error("wtp_student_se: tau must be positive");
    const double e = std::exp(coef / tau);
    const double dc = e / tau;
    const double dt = -coef * e / (tau * tau);
    const double se_frac = std::hypot(dc * se_coef, dt * se_tau);
    return {100.0 * se_frac, se_frac * avg_salary};
}

Wtp wtp_employer_se(double coef, double se_coef, double phi, double se_phi, double avg_salary) {
    if (!(phi > 0)) throw config_error("wtp_employer_se: phi must be positive");
    const double a = std::abs(coef);
    const double e = std::exp(-a / phi);
    const double dc = e / phi;
    const double dp = -a * e / (phi * phi);
    const double se_frac = std::hypot(dc * se_coef, dp * se_phi);
    return {100.0 * se_frac, se_frac * avg_salary};
}

namespace {
double se_or_zero(const std::map<std::string, double>* se, const std::string& name) {
    if (!se) return 0.0;
    auto it = se->find(name);
    return it == se->end() ? 0.0 : it->second;
}
} // namespace

std::vector<WtpRow> wtp_student_table(const ParameterSet& p, const CovariateLayout& layout,
                                      const std::map<std::string, double>* se,
                                      double avg_salary) {
    std::vector<WtpRow> rows;
    const double tau_se = se_or_zero(se, "tau");
    {
        WtpRow r;
        r.name = "log_salary_tau";
        r.estimate = p.tau;
        r.se = tau_se;
        rows.push_back(r);
    }
    for (int k = 0; k < layout.np_dim(); ++k) {
        WtpRow r;
        r.name = layout.np_names()[k];
        r.estimate = p.psi[k];
        r.se = se_or_zero(se, "psi:" + r.name);
        Wtp v = wtp_student(r.estimate, p.tau, avg_salary);
        Wtp s = wtp_student_se(r.estimate, r.se, p.tau, tau_se, avg_salary);
        r.percent = v.percent;
        r.dollars = v.dollars;
        r.percent_se = s.percent;
        r.dollars_se = s.dollars;
        rows.push_back(r);
    }
    for (int k = 0; k < layout.beta_dim(); ++k) {
        WtpRow r;
        r.name = layout.beta_names()[k];
        r.estimate = p.beta[k];
        r.se = se_or_zero(se, "beta:" + r.name);
        if (r.name != "disadv_x_log_wage") {
            Wtp v = wtp_student(r.estimate, p.tau, avg_salary);
            Wtp s = wtp_student_se(r.estimate, r.se, p.tau, tau_se, avg_salary);
            r.percent = v.percent;
            r.dollars = v.dollars;
            r.percent_se = s.percent;
            r.dollars_se = s.dollars;
        }
        rows.push_back(r);
    }
    return rows;
}

std::vector<WtpRow> wtp_employer_table(const ParameterSet& p, const CovariateLayout& layout,
                                       const std::map<std::string, double>* se,
                                       double avg_salary) {
    std::vector<WtpRow> rows;
    const double phi_se = se_or_zero(se, "phi");
    {
        WtpRow r;
        r.name = "log_salary_phi";
        r.estimate = p.phi;
        r.se = phi_se;
        rows.push_back(r);
    }
    {
        WtpRow r;
        r.name = "disadv_caste_eta";
        r.estimate = p.eta;
        r.se = se_or_zero(se, "eta");
        Wtp v = wtp_employer(r.estimate, p.phi, avg_salary);
        Wtp s = wtp_employer_se(r.estimate, r.se, p.phi, phi_se, avg_salary);
        r.percent = v.percent;
        r.dollars = v.dollars;
        r.percent_se = s.percent;
        r.dollars_se = s.dollars;
        rows.push_back(r);
    }
    for (int k = 0; k < layout.s_dim(); ++k) {
        WtpRow r;
        r.name = layout.s_names()[k];
        r.estimate = p.alpha[k];
        r.se = se_or_zero(se, "alpha:" + r.name);
        Wtp v = wtp_employer(r.estimate, p.phi, avg_salary);
        Wtp s = wtp_employer_se(r.estimate, r.se, p.phi, phi_se, avg_salary);
        r.percent = v.percent;
        r.dollars = v.dollars;
        r.percent_se = s.percent;
        r.dollars_se = s.dollars;
        rows.push_back(r);
    }
    return rows;
}

const char* to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::Subsidy: return "subsidy";
        case PolicyKind::PreCollegeIntervention: return "precollege";
        case PolicyKind::Quota: return "quota";
    }
    return "?";
}

const char* to_string(DemandRegime r) {
    return r == DemandRegime::PerfectlyElastic ? "elastic" : "inelastic";
}

void PolicySpec::validate() const {
    if (!(quota_ratio > 0.0 && quota_ratio < 1.0))
        throw config_error("quota_ratio must be in (0,1)");
    if (subsidy_size && *subsidy_size < 0)
        throw config_error("subsidy_size must be nonnegative");
    if (external_cost_per_sd && *external_cost_per_sd <= 0)
        throw config_error("external_cost_per_sd must be positive");
    if (q_draws < 1 || sim_reps < 1) throw config_error("q_draws and sim_reps must be >= 1");
}

double average_salary(const Market& m) {
    double acc = 0.0;
    for (const auto& j : m.postings) acc += std::exp(j.log_wage);
    return acc / static_cast<double>(m.n_postings());
}

namespace {

HiringModel::Options model_options(const PolicySpec& spec) {
    HiringModel::Options o;
    o.q_mode = HiringModel::Options::QMode::Integrate;
    o.q_draws = spec.q_draws;
    o.seed = spec.seed;
    return o;
}

PolicyOutcome measure(const HiringModel& model, const PolicySpec& spec) {
    PolicyOutcome o;
    o.expected_hires_by_firm = model.expected_hires_all();
    auto sim = model.simulate(spec.sim_reps, spec.seed + 0x5151);
    o.unemployment_adv = sim.unemployment_adv;
    o.unemployment_dis = sim.unemployment_dis;
    o.unemployment_all = sim.unemployment_all;
    o.hires_adv = sim.hires_adv;
    o.hires_dis = sim.hires_dis;
    o.total_hires = sim.total_hires;
    o.total_offers = sim.total_offers;
    o.earnings_gap = sim.earnings_gap;
    o.offers_by_firm = sim.offers_by_firm;
    return o;
}

void fill_counts(PolicyReport& rep, const Market& m) {
    for (const auto& s : m.students)
        (s.disadvantaged() ? rep.n_disadvantaged : rep.n_advantaged) += 1.0;
    rep.avg_salary = average_salary(m);
}

} // namespace

PolicyReport apply_subsidy(const Market& m, const ParameterSet& p, const PolicySpec& spec) {
    spec.validate();
    const CovariateLayout layout = CovariateLayout::from_market(m);
    layout.check(p, m.n_firms);

    PolicyReport rep;
    rep.kind = PolicyKind::Subsidy;
    rep.regime = spec.regime;
    fill_counts(rep, m);

    double s = spec.subsidy_size ? *spec.subsidy_size : -p.eta;
    if (s < 0) {
        rep.notes.push_back("caste coefficient is nonnegative; subsidy clamped to zero");
        s = 0.0;
    }
    rep.subsidy_size = s;
    rep.subsidy_pct_of_salary = wtp_employer(s, p.phi, rep.avg_salary).percent;
    rep.caste_penalty_pct = wtp_employer(p.eta, p.phi, rep.avg_salary).percent;

    HiringModel model(m, p, layout, model_options(spec));
    rep.baseline = measure(model, spec);

    std::vector<std::vector<double>> adj(m.n_students(),
                                         std::vector<double>(m.n_postings(), 0.0));
    for (int i = 0; i < m.n_students(); ++i)
        if (m.students[i].disadvantaged())
            std::fill(adj[i].begin(), adj[i].end(), s);
    model.set_adjustment(&adj);

    if (spec.regime == DemandRegime::PerfectlyInelastic) {
        std::vector<double> targets(m.n_firms);
        for (int f = 0; f < m.n_firms; ++f) targets[f] = rep.baseline.expected_hires_by_firm[f];
        auto sr = model.solve_inelastic(targets);
        rep.converged = sr.converged;
    }
    rep.policy = measure(model, spec);
    return rep;
}

PolicyReport apply_precollege(const Market& m, const ParameterSet& p, const PolicySpec& spec) {
    spec.validate();
    const CovariateLayout layout = CovariateLayout::from_market(m);
    layout.check(p, m.n_firms);

    PolicyReport rep;
    rep.kind = PolicyKind::PreCollegeIntervention;
    rep.regime = spec.regime;
    fill_counts(rep, m);
    rep.caste_penalty_pct = wtp_employer(p.eta, p.phi, rep.avg_salary).percent;

    // Quantile-map disadvantaged entrance scores onto the advantaged
    // empirical distribution, within degree.
    Market shifted = m;
    double total_shift = 0.0;
    int n_dis_total = 0;
    for (int d = 0; d < kNumDegrees; ++d) {
        std::vector<int> adv, dis;
        for (int i = 0; i < m.n_students(); ++i) {
            if (static_cast<int>(m.students[i].degree) != d) continue;
            (m.students[i].disadvantaged() ? dis : adv).push_back(i);
        }
        if (dis.empty()) continue;
        if (adv.empty()) {
            rep.notes.push_back("degree " + std::string(to_string(static_cast<Degree>(d))) +
                                " has one caste only; skipped");
            continue;
        }
        std::vector<double> adv_scores;
        for (int i : adv) adv_scores.push_back(m.students[i].entrance_score);
        std::sort(adv_scores.begin(), adv_scores.end());
        std::vector<int> order = dis;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return m.students[a].entrance_score < m.students[b].entrance_score;
        });
        const int nd = static_cast<int>(order.size());
        const int na = static_cast<int>(adv_scores.size());
        for (int r = 0; r < nd; ++r) {
            // Empirical quantile with linear interpolation between order stats.
            const double pos = (r + 0.5) / nd * (na - 1);
            const int lo = std::min(static_cast<int>(pos), na - 2 < 0 ? 0 : na - 2);
            const double fr = std::min(1.0, std::max(0.0, pos - lo));
            const double mapped = na == 1 ? adv_scores[0]
                                          : adv_scores[lo] * (1 - fr) + adv_scores[lo + 1] * fr;
            const int i = order[r];
            total_shift += std::abs(mapped - m.students[i].entrance_score);
            shifted.students[i].entrance_score = mapped;
            ++n_dis_total;
        }
    }
    rep.total_score_shift_sd = total_shift / m.config.score_sd;
    rep.mean_score_shift_sd = n_dis_total > 0 ? rep.total_score_shift_sd / n_dis_total : 0.0;

    // Kolmogorov-Smirnov distance between pooled caste score distributions
    // after the shift.
    {
        std::vector<double> a, d;
        for (const auto& s : shifted.students)
            (s.disadvantaged() ? d : a).push_back(s.entrance_score);
        std::sort(a.begin(), a.end());
        std::sort(d.begin(), d.end());
        double ks = 0.0;
        std::size_t ia = 0, id = 0;
        while (ia < a.size() && id < d.size()) {
            if (a[ia] <= d[id])
                ++ia;
            else
                ++id;
            ks = std::max(ks, std::abs(static_cast<double>(ia) / a.size() -
                                       static_cast<double>(id) / d.size()));
        }
        rep.ks_distance = ks;
    }

    // Model-implied subsidy equivalent: mean employer-utility gain of
    // disadvantaged students from the score shift.
    {
        double gain = 0.0;
        int cnt = 0;
        StageFlags nf;
        for (int i = 0; i < m.n_students(); ++i) {
            if (!m.students[i].disadvantaged()) continue;
            Eigen::VectorXd s_old = layout.s_vec(m.students[i], nf);
            Eigen::VectorXd s_new = layout.s_vec(shifted.students[i], nf);
            gain += (s_new - s_old).dot(p.alpha);
            ++cnt;
        }
        rep.subsidy_equivalent_utility = cnt > 0 ? gain / cnt : 0.0;
        rep.subsidy_equivalent_pct =
            wtp_employer(rep.subsidy_equivalent_utility, p.phi, rep.avg_salary).percent;
    }

    HiringModel base_model(m, p, layout, model_options(spec));
    rep.baseline = measure(base_model, spec);

    HiringModel pol_model(shifted, p, layout, model_options(spec));
    if (spec.regime == DemandRegime::PerfectlyInelastic) {
        std::vector<double> targets = rep.baseline.expected_hires_by_firm;
        auto sr = pol_model.solve_inelastic(targets);
        rep.converged = sr.converged;
    }
    rep.policy = measure(pol_model, spec);
    return rep;
}

PolicyReport apply_quota(const Market& m, const ParameterSet& p, const PolicySpec& spec) {
    spec.validate();
    const CovariateLayout layout = CovariateLayout::from_market(m);
    layout.check(p, m.n_firms);

    PolicyReport rep;
    rep.kind = PolicyKind::Quota;
    fill_counts(rep, m);
    rep.caste_penalty_pct = wtp_employer(p.eta, p.phi, rep.avg_salary).percent;

    HiringModel model(m, p, layout, model_options(spec));
    rep.baseline = measure(model, spec);

    auto qr = model.solve_quota(spec.quota_ratio, p.cutoffs);
    rep.converged = qr.converged;
    rep.exempted_firms = qr.exempted_firms;
    for (int f : qr.exempted_firms)
        rep.notes.push_back("firm " + std::to_string(f) +
                            " exempted from the quota: one-caste applicant pool");
    rep.quota_cutoff_adv = model.cutoffs(Caste::Advantaged);
    rep.quota_cutoff_dis = model.cutoffs(Caste::Disadvantaged);
    rep.policy = measure(model, spec);
    return rep;
}

PolicyReport apply_policy(const Market& m, const ParameterSet& p, const PolicySpec& spec) {
    switch (spec.kind) {
        case PolicyKind::Subsidy: return apply_subsidy(m, p, spec);
        case PolicyKind::PreCollegeIntervention: return apply_precollege(m, p, spec);
        case PolicyKind::Quota: return apply_quota(m, p, spec);
    }
    throw config_error("unknown policy kind");
}

CostEffectivenessReport cost_effectiveness(const PolicyReport& subsidy,
                                           const PolicyReport& precollege,
                                           std::optional<double> external_cost_per_sd) {
    if (!external_cost_per_sd)
        throw config_error(
            "cost_effectiveness: external cost per SD of test scores must be supplied");
    if (*external_cost_per_sd <= 0)
        throw config_error("cost_effectiveness: external cost must be positive");

    CostEffectivenessReport r;
    r.assumptions = {"costs scale linearly with test-score changes",
                     "students can be perfectly targeted",
                     "test-score changes do not fade out"};

    const double gain_s = subsidy.policy.hires_dis - subsidy.baseline.hires_dis;
    const double gain_p = precollege.policy.hires_dis - precollege.baseline.hires_dis;
    const double cost_s =
        subsidy.subsidy_pct_of_salary / 100.0 * subsidy.avg_salary * subsidy.policy.hires_dis;
    const double cost_p = *external_cost_per_sd * precollege.total_score_shift_sd;

    if (gain_s <= 0 || gain_p <= 0) {
        r.degenerate = true;
        r.subsidy_cost_per_hire = gain_s > 0 ? cost_s / gain_s : 0.0;
        r.precollege_cost_per_hire = gain_p > 0 ? cost_p / gain_p : 0.0;
        r.ratio = std::numeric_limits<double>::infinity();
        return r;
    }
    r.subsidy_cost_per_hire = cost_s / gain_s;
    r.precollege_cost_per_hire = cost_p / gain_p;
    r.ratio = r.precollege_cost_per_hire / r.subsidy_cost_per_hire;
    r.subsidy_dominates_2x = r.ratio >= 2.0;
    return r;
}

MomentsTable compute_moments(const Market& m, const ParameterSet& p, int replications,
                             std::uint64_t seed) {
    if (replications < 1) throw config_error("compute_moments: replications must be >= 1");
    const CovariateLayout layout = CovariateLayout::from_market(m);
    HiringModel::Options opts;
    opts.q_mode = HiringModel::Options::QMode::Integrate;
    opts.q_draws = 1; // q redrawn inside each simulation replication
    opts.seed = seed;
    HiringModel model(m, p, layout, opts);

    // Data moments.
    double offers_sector[kNumSectors] = {0, 0, 0};
    double choice_sector[kNumSectors] = {0, 0, 0};
    double unemployed = 0, employed_adv = 0, employed_dis = 0;
    double lw_adv = 0, lw_dis = 0;
    for (int i = 0; i < m.n_students(); ++i) {
        const auto& ov = m.offers[i];
        for (int pid = 0; pid < m.n_postings(); ++pid)
            if (ov.z[pid]) offers_sector[static_cast<int>(m.postings[pid].sector)] += 1;
        if (ov.chosen == kOutside) {
            unemployed += 1;
        } else {
            choice_sector[static_cast<int>(m.postings[ov.chosen].sector)] += 1;
            const bool dis = m.students[i].disadvantaged();
            (dis ? employed_dis : employed_adv) += 1;
            (dis ? lw_dis : lw_adv) += m.postings[ov.chosen].log_wage;
        }
    }
    const double tot_off = offers_sector[0] + offers_sector[1] + offers_sector[2];
    const double tot_cho = choice_sector[0] + choice_sector[1] + choice_sector[2];
    const double data_gap = (employed_adv > 0 && employed_dis > 0)
                                ? lw_dis / employed_dis - lw_adv / employed_adv
                                : 0.0;

    // Model moments: each replication redraws q, match shocks, and choice
    // shocks for every observation, then moments are averaged.
    const int n_mom = 2 * kNumSectors + 2;
    std::vector<double> acc(n_mom, 0.0), acc2(n_mom, 0.0);
    for (int r = 0; r < replications; ++r) {
        auto sim = model.simulate(1, rng::substream_seed(seed, 0xaaa + r));
        std::vector<double> v(n_mom);
        for (int s = 0; s < kNumSectors; ++s) {
            v[s] = sim.offer_share_sector[s];
            v[kNumSectors + s] = sim.choice_share_sector[s];
        }
        v[2 * kNumSectors] = sim.unemployment_all;
        v[2 * kNumSectors + 1] = sim.earnings_gap;
        for (int k = 0; k < n_mom; ++k) {
            acc[k] += v[k];
            acc2[k] += v[k] * v[k];
        }
    }

    MomentsTable t;
    t.replications = replications;
    auto push = [&](const std::string& name, double data, int k) {
        MomentsTable::Row row;
        row.name = name;
        row.data = data;
        row.model = acc[k] / replications;
        const double var = acc2[k] / replications - row.model * row.model;
        row.model_sd = std::sqrt(std::max(0.0, var));
        t.rows.push_back(row);
    };
    for (int s = 0; s < kNumSectors; ++s)
        push(std::string("offer_share_") + to_string(static_cast<Sector>(s)),
             tot_off > 0 ? offers_sector[s] / tot_off : 0.0, s);
    for (int s = 0; s < kNumSectors; ++s)
        push(std::string("choice_share_") + to_string(static_cast<Sector>(s)),
             tot_cho > 0 ? choice_sector[s] / tot_cho : 0.0, kNumSectors + s);
    push("unemployment", unemployed / m.n_students(), 2 * kNumSectors);
    push("earnings_gap", data_gap, 2 * kNumSectors + 1);
    return t;
}

} // namespace placement
