#include "placement/generate.hpp"

#include <algorithm>
#include <cmath>

#include "placement/hiring.hpp"
#include "placement/rng.hpp"

namespace placement {

CovariateLayout layout_for(const MarketConfig& config) {
    return CovariateLayout(static_cast<int>(config.amenity_prevalence.size()),
                           config.n_experience, config.amenity_names);
}

namespace {

// Coefficient defaults keyed by covariate name; anything unnamed gets the
// fallback. Keeps the calibration readable next to the layout definition.
double named(const std::string& name, std::initializer_list<std::pair<const char*, double>> table,
             double fallback) {
    for (const auto& [k, v] : table)
        if (name == k) return v;
    return fallback;
}

ParameterSet base_parameters(const CovariateLayout& L) {
    ParameterSet p;
    p.beta.resize(L.beta_dim());
    for (int k = 0; k < L.beta_dim(); ++k)
        p.beta[k] = named(L.beta_names()[k],
                          {{"disadv_x_signing_bonus", -0.026},
                           {"disadv_x_rsu", -0.012},
                           {"disadv_x_metro", 0.015},
                           {"disadv_x_tech", -0.046},
                           {"disadv_x_consulting", 0.016},
                           {"disadv_x_log_wage", -0.013}},
                          0.0);
    p.psi.resize(L.np_dim());
    for (int k = 0; k < L.np_dim(); ++k)
        p.psi[k] = named(L.np_names()[k],
                         {{"signing_bonus", 0.156},
                          {"rsu", 0.124},
                          {"metro", 0.045},
                          {"tech", 0.078},
                          {"consulting", 0.087}},
                         0.05);
    p.tau = 2.482;
    p.gamma.resize(L.gamma_dim());
    for (int k = 0; k < L.gamma_dim(); ++k)
        p.gamma[k] = named(L.amenity_names()[k],
                           {{"signing_bonus", 0.217}, {"rsu", 0.487}, {"metro", 0.0}}, 0.2);
    p.alpha.resize(L.s_dim());
    for (int k = 0; k < L.s_dim(); ++k)
        p.alpha[k] = named(L.s_names()[k],
                           {{"entrance_score", 0.020},
                            {"gpa", 0.077},
                            {"grade10", 0.010},
                            {"grade12", 0.010},
                            {"experience_0", 0.020},
                            {"experience_1", 0.010},
                            // screening gates the offer pipeline instead of
                            // shifting utilities; the columns stay available
                            // for ungated configurations
                            {"passed_reading", 0.0},
                            {"passed_written", 0.0},
                            {"passed_debate", 0.0},
                            {"deg_dual", 0.039},
                            {"deg_mtech", 0.203},
                            {"deg_ms", 0.182}},
                           0.01);
    p.eta = -0.093;
    p.phi = 1.893;
    p.delta = 0.512;
    p.sigma_q = 0.042;
    return p;
}

} // namespace

ParameterSet default_parameters(const CovariateLayout& layout) { return base_parameters(layout); }

ParameterSet recovery_parameters(const CovariateLayout& layout) {
    ParameterSet p = base_parameters(layout);
    p.sigma_q = 0.25;
    p.delta = 0.5;
    return p;
}

GenerationResult generate_market(const MarketConfig& config) {
    return generate_market(config, default_parameters(layout_for(config)));
}

GenerationResult generate_market(const MarketConfig& config, const ParameterSet& params_in) {
    config.validate();
    const CovariateLayout L = layout_for(config);
    if (!params_in.cutoffs.empty() &&
        static_cast<int>(params_in.cutoffs.size()) != config.jobs)
        throw config_error("generate_market: cutoff vector does not match job count");
    {
        ParameterSet probe = params_in;
        probe.cutoffs.assign(config.jobs, 0.0);
        L.check(probe, config.jobs);
    }

    GenerationResult out;
    out.params = params_in;
    Market& m = out.market;
    m.config = config;
    m.n_firms = config.jobs;
    const std::uint64_t seed = config.seed;

    // --- Firms and postings -------------------------------------------------
    rng::Stream gj(seed, 0x10b5);
    const int J = config.jobs;
    std::vector<double> firm_wage(J);
    std::vector<int> firm_day(J);
    std::vector<Sector> firm_sector(J);
    for (int f = 0; f < J; ++f) {
        const double u = gj.uniform();
        int s = 0;
        double acc = 0.0;
        for (; s < kNumSectors - 1; ++s) {
            acc += config.sector_shares[s];
            if (u < acc) break;
        }
        firm_sector[f] = static_cast<Sector>(s);
        firm_wage[f] = gj.normal(config.sector_log_wage_mean[s], config.wage_firm_sd);
        firm_day[f] = 1 + gj.uniform_int(config.days);
    }
    const int n_am = L.n_amenities();
    for (int y = 0; y < config.years; ++y) {
        for (int f = 0; f < J; ++f) {
            Job j;
            j.id = static_cast<int>(m.postings.size());
            j.firm = f;
            j.year = y;
            j.sector = firm_sector[f];
            j.log_wage = firm_wage[f] + gj.normal(0.0, config.wage_year_sd);
            j.interview_day = firm_day[f];
            j.client_facing = gj.bernoulli(config.client_facing_rate);
            j.amenities.resize(n_am);
            for (int a = 0; a < n_am; ++a)
                j.amenities[a] = gj.bernoulli(config.amenity_prevalence[a]) ? 1 : 0;
            m.postings.push_back(std::move(j));
        }
    }
    const int P = m.n_postings();

    // --- Students ------------------------------------------------------------
    rng::Stream gs(seed, 0x57d);
    const int N = config.students;
    m.students.resize(N);
    out.oracle.q.resize(N);
    for (int i = 0; i < N; ++i) {
        Student& s = m.students[i];
        s.id = i;
        s.year = i % config.years;
        s.caste = gs.bernoulli(config.caste_share_disadvantaged) ? Caste::Disadvantaged
                                                                 : Caste::Advantaged;
        {
            const double u = gs.uniform();
            int d = 0;
            double acc = 0.0;
            for (; d < kNumDegrees - 1; ++d) {
                acc += config.degree_shares[d];
                if (u < acc) break;
            }
            s.degree = static_cast<Degree>(d);
        }
        s.major = gs.uniform_int(config.majors);
        const double dis = s.disadvantaged() ? 1.0 : 0.0;
        // Gaps are centered so the pooled mean stays near zero.
        const double sh = config.caste_share_disadvantaged;
        auto gapped = [&](double gap) {
            const double mean = (1.0 - dis) * gap * sh - dis * gap * (1.0 - sh);
            return gs.normal(mean, config.score_sd);
        };
        s.entrance_score = gapped(config.entrance_gap_sd);
        s.gpa = gapped(config.gpa_gap_sd);
        s.grade10 = gapped(config.grade_gap_sd);
        s.grade12 = gapped(config.grade_gap_sd);
        s.experience.resize(config.n_experience);
        for (double& e : s.experience) e = gs.normal();
        s.q = params_in.sigma_q * gs.normal();
        out.oracle.q[i] = s.q;

        s.applications.assign(P, 0);
        s.stage_flags.assign(P, StageFlags{});
        for (int pid = 0; pid < P; ++pid) {
            if (m.postings[pid].year != s.year) continue;
            if (config.application_rate >= 1.0 || gs.bernoulli(config.application_rate))
                s.applications[pid] = 1;
        }
    }

    // --- Screening flags -----------------------------------------------------
    rng::Stream gf(seed, 0xf1a6);
    for (int i = 0; i < N; ++i) {
        Student& s = m.students[i];
        const double skill = config.stage_skill_slope * 0.5 * (s.gpa + s.entrance_score);
        const double caste_shift = s.disadvantaged() ? -config.stage_pass_caste_gap : 0.0;
        const double base = std::log(config.stage_pass_rate / (1.0 - config.stage_pass_rate));
        const double pass_p = 1.0 / (1.0 + std::exp(-(base + skill + caste_shift)));
        for (int pid = 0; pid < P; ++pid) {
            if (!s.applications[pid]) continue;
            StageFlags& f = s.stage_flags[pid];
            f.passed_reading = gf.bernoulli(pass_p);
            f.passed_written = f.passed_reading && gf.bernoulli(pass_p);
            f.passed_debate = f.passed_written && gf.bernoulli(pass_p);
        }
    }

    // --- Cutoffs ---------------------------------------------------------------
    out.params.cutoffs = params_in.cutoffs;
    if (out.params.cutoffs.empty()) {
        // Center on the mean systematic employer utility so the offset knob is
        // interpretable as a log-odds shift of the typical acceptance rate.
        double mean_syst = 0.0;
        long cnt = 0;
        for (int i = 0; i < N; ++i) {
            const Student& s = m.students[i];
            for (int pid = 0; pid < P; ++pid) {
                if (!s.applications[pid]) continue;
                mean_syst += employer_utility(s, m.postings[pid], s.stage_flags[pid], out.params, L);
                ++cnt;
            }
        }
        mean_syst = cnt > 0 ? mean_syst / static_cast<double>(cnt) : 0.0;
        double wage_mean = 0.0;
        for (int f = 0; f < J; ++f) wage_mean += firm_wage[f];
        wage_mean /= J;
        rng::Stream gc(seed, 0xc0ff);
        out.params.cutoffs.resize(J);
        for (int f = 0; f < J; ++f)
            out.params.cutoffs[f] = mean_syst + config.cutoff_offset +
                                    config.cutoff_wage_slope * (firm_wage[f] - wage_mean) +
                                    gc.normal(0.0, config.cutoff_noise_sd);
    }

    // --- Shocks and realization ------------------------------------------------
    rng::Stream gm(seed, 0x3a7c);
    MatchShocks mu;
    mu.mu.assign(N, std::vector<double>(P, std::numeric_limits<double>::quiet_NaN()));
    std::vector<ChoiceShocks> eps(N);
    out.oracle.eps_outside.resize(N);
    for (int i = 0; i < N; ++i) {
        eps[i].eps.assign(P, std::numeric_limits<double>::quiet_NaN());
        for (int pid = 0; pid < P; ++pid) {
            if (!m.students[i].applications[pid]) continue;
            mu.mu[i][pid] = gm.logistic();
            eps[i].eps[pid] = gm.gumbel();
        }
        eps[i].eps_outside = gm.gumbel();
        out.oracle.eps_outside[i] = eps[i].eps_outside;
    }
    out.oracle.mu = mu.mu;
    out.oracle.eps.resize(N);
    for (int i = 0; i < N; ++i) out.oracle.eps[i] = eps[i].eps;

    m.offers = simulate_offers(m, out.params, L, mu, eps);

    // Expected hires at the realized cutoffs define each posting's cap record.
    {
        HiringModel::Options ho;
        ho.q_mode = HiringModel::Options::QMode::OracleQ;
        HiringModel model(m, out.params, L, ho);
        std::vector<double> eh = model.expected_hires_all();
        std::vector<int> postings_per_firm(J, 0);
        for (const auto& j : m.postings) postings_per_firm[j.firm]++;
        for (auto& j : m.postings)
            j.hiring_cap = eh[j.firm] / std::max(1, postings_per_firm[j.firm]);
    }

    m.validate();
    return out;
}

} // namespace placement
