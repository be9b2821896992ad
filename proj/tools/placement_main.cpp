#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "placement/estimate.hpp"
#include "placement/generate.hpp"
#include "placement/io.hpp"
#include "placement/lbfgs.hpp"
#include "placement/oracle.hpp"
#include "placement/parallel.hpp"
#include "placement/report.hpp"
#include "placement/rng.hpp"

namespace fs = std::filesystem;
using namespace placement;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;

struct GlobalOpts {
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string config_path;
    std::string out_dir = "out";
    int threads = 0;
};

io::json load_config(const GlobalOpts& g) {
    if (g.config_path.empty()) return io::json::object();
    return io::read_json_file(g.config_path);
}

report::Provenance provenance(const GlobalOpts& g, const io::json& cfg, std::uint64_t seed) {
    report::Provenance p;
    p.seed = seed;
    p.config_hash = io::config_hash(cfg);
    return p;
}

int cmd_generate(const GlobalOpts& g, const std::string& params_path) {
    io::json cfg = load_config(g);
    MarketConfig mc = cfg.contains("market") ? io::market_config_from_json(cfg["market"])
                                             : MarketConfig{};
    if (g.seed_given) mc.seed = g.seed;
    mc.validate();

    GenerationResult res;
    if (!params_path.empty()) {
        res = generate_market(mc, io::load_params(params_path));
    } else {
        res = generate_market(mc);
    }
    fs::create_directories(g.out_dir);
    io::save_market(res.market, g.out_dir);
    io::save_params(res.params, layout_for(mc), g.out_dir + "/params.json");
    io::save_oracle(res.oracle, g.out_dir + "/oracle.json");
    std::printf("generated market: %d students, %d postings (%d firms), %d days, %d years\n",
                res.market.n_students(), res.market.n_postings(), res.market.n_firms, mc.days,
                mc.years);
    std::printf("wrote %s/{students,jobs,offers}.csv, params.json, oracle.json\n",
                g.out_dir.c_str());
    return kExitOk;
}

int cmd_simulate(const GlobalOpts& g, const std::string& market_dir,
                 const std::string& params_path, int replications) {
    io::json cfg = load_config(g);
    Market m = io::load_market(market_dir);
    ParameterSet p = io::load_params(params_path.empty() ? market_dir + "/params.json"
                                                         : params_path);
    const std::uint64_t seed = g.seed_given ? g.seed : m.config.seed;
    MomentsTable t = compute_moments(m, p, replications, seed);
    fs::create_directories(g.out_dir);
    report::write_moments(t, provenance(g, cfg, seed), g.out_dir + "/moments.csv");
    std::printf("%-28s %10s %10s %10s\n", "moment", "data", "model", "model_sd");
    for (const auto& r : t.rows)
        std::printf("%-28s %10.4f %10.4f %10.4f\n", r.name.c_str(), r.data, r.model, r.model_sd);
    return kExitOk;
}

int cmd_estimate(const GlobalOpts& g, const std::string& market_dir,
                 const std::string& start_path) {
    io::json cfg = load_config(g);
    Market m = io::load_market(market_dir);
    EstimationConfig ec = io::estimation_config_from_json(cfg);
    if (g.seed_given) ec.seed = g.seed;

    EstimationResult res;
    if (!start_path.empty())
        res = msl_estimate(m, ec, io::load_params(start_path));
    else
        res = msl_estimate(m, ec);

    const CovariateLayout layout = CovariateLayout::from_market(m);
    fs::create_directories(g.out_dir);
    report::write_estimation(res, layout, provenance(g, cfg, ec.seed), g.out_dir,
                             average_salary(m));
    std::printf("mean log-likelihood %.6f after %d iterations (%d evaluations), |g|=%.2e\n",
                res.log_likelihood, res.iterations, res.evaluations, res.grad_norm);
    for (const auto& n : res.notes) std::printf("note: %s\n", n.c_str());
    std::printf("wrote %s/estimate.json, params_hat.json, wtp tables\n", g.out_dir.c_str());
    if (!res.converged) {
        std::fprintf(stderr, "estimate did not reach the gradient tolerance\n");
        return kExitNonConvergence;
    }
    return kExitOk;
}

int cmd_decompose(const GlobalOpts& g, const std::string& market_dir) {
    io::json cfg = load_config(g);
    Market m = io::load_market(market_dir);
    RegressionSpec spec;
    if (cfg.contains("decompose")) {
        const auto& d = cfg["decompose"];
        if (d.contains("poly_degree")) spec.poly_degree = d["poly_degree"].get<int>();
        if (d.contains("full_interactions"))
            spec.full_interactions = d["full_interactions"].get<bool>();
        if (d.contains("sector")) spec.sector = parse_sector(d["sector"].get<std::string>());
        if (d.contains("client_facing")) spec.client_facing = d["client_facing"].get<bool>();
    }
    StageGapResult r = stage_gap(m, spec);
    fs::create_directories(g.out_dir);
    report::write_stage_gaps(r, provenance(g, cfg, m.config.seed), g.out_dir + "/stage_gaps.csv");
    std::printf("%-22s %12s %10s %8s\n", "stage", "beta_disadv", "se", "n");
    for (const auto& row : r.rows) {
        if (row.skipped)
            std::printf("%-22s %12s\n", to_string(row.stage), "(skipped)");
        else
            std::printf("%-22s %12.4f %10.4f %8ld\n", to_string(row.stage), row.beta, row.se,
                        row.n);
    }
    return kExitOk;
}

int cmd_counterfactual(const GlobalOpts& g, const std::string& market_dir,
                       const std::string& params_path, const std::string& policy_path) {
    io::json cfg = load_config(g);
    Market m = io::load_market(market_dir);
    ParameterSet p = io::load_params(params_path.empty() ? market_dir + "/params.json"
                                                         : params_path);
    PolicySpec spec;
    if (!policy_path.empty())
        spec = io::policy_spec_from_json(io::read_json_file(policy_path));
    else if (cfg.contains("policy"))
        spec = io::policy_spec_from_json(cfg);
    else
        throw config_error("counterfactual: provide --policy or a policy section in --config");
    if (g.seed_given) spec.seed = g.seed;

    PolicyReport rep = apply_policy(m, p, spec);
    fs::create_directories(g.out_dir);
    report::write_policy(rep, provenance(g, cfg, spec.seed), g.out_dir);
    std::printf("policy %s%s%s\n", to_string(rep.kind),
                rep.kind != PolicyKind::Quota ? " / " : "",
                rep.kind != PolicyKind::Quota ? to_string(rep.regime) : "");
    std::printf("unemployment adv %.1f%% -> %.1f%%, dis %.1f%% -> %.1f%%, hires %.1f -> %.1f\n",
                100 * rep.baseline.unemployment_adv, 100 * rep.policy.unemployment_adv,
                100 * rep.baseline.unemployment_dis, 100 * rep.policy.unemployment_dis,
                rep.baseline.total_hires, rep.policy.total_hires);
    if (spec.kind == PolicyKind::PreCollegeIntervention)
        std::printf("subsidy equivalent: %.3f%% of salary (caste penalty %.3f%%)\n",
                    rep.subsidy_equivalent_pct, rep.caste_penalty_pct);
    std::printf("wrote %s/policy_report.json\n", g.out_dir.c_str());
    if (!rep.converged) {
        std::fprintf(stderr, "cutoff solver did not converge\n");
        return kExitNonConvergence;
    }
    return kExitOk;
}

int cmd_wtp(const GlobalOpts& g, const std::string& params_path, double avg_salary) {
    io::json cfg = load_config(g);
    ParameterSet p = io::load_params(params_path);
    const int n_am = static_cast<int>(p.gamma.size());
    const int n_exp = static_cast<int>(p.alpha.size()) - 4 - 3 - 3;
    CovariateLayout layout(n_am, n_exp);
    PolicySpec dummy;
    fs::create_directories(g.out_dir);
    auto student = wtp_student_table(p, layout, nullptr, avg_salary);
    auto employer = wtp_employer_table(p, layout, nullptr, avg_salary);
    report::write_wtp_tables(student, employer, provenance(g, cfg, g.seed), g.out_dir);
    (void)dummy;
    std::printf("student-side WTP (avg salary $%.2f)\n", avg_salary);
    for (const auto& r : student)
        std::printf("  %-26s %9.4f -> %+9.3f%%  $%+.2f\n", r.name.c_str(), r.estimate, r.percent,
                    r.dollars);
    std::printf("employer-side WTP\n");
    for (const auto& r : employer)
        std::printf("  %-26s %9.4f -> %+9.3f%%  $%+.2f\n", r.name.c_str(), r.estimate, r.percent,
                    r.dollars);
    return kExitOk;
}

int cmd_verify(const GlobalOpts& g);

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Day-sequenced campus placement market: synthetic generation, maximum simulated "
        "likelihood estimation, stage decompositions, and policy counterfactuals"};
    app.require_subcommand(1);

    GlobalOpts g;
    auto* seed_opt =
        app.add_option("--seed", g.seed, "Master seed (overrides config seeds)");
    app.add_option("--config", g.config_path, "JSON configuration file");
    app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "OpenMP thread count (0 = runtime default)");

    std::string market_dir, params_path, start_path, policy_path;
    int replications = 300;
    double avg_salary = 56767.29;

    auto* c_gen = app.add_subcommand("generate", "Synthesize a market from a config");
    c_gen->add_option("--params", params_path, "Structural parameters JSON (optional)");

    auto* c_sim = app.add_subcommand("simulate", "Simulate model moments on a market");
    c_sim->add_option("--market", market_dir, "Market directory")->required();
    c_sim->add_option("--params", params_path, "Parameters JSON (default: market dir)");
    c_sim->add_option("--replications", replications, "Simulation replications")
        ->capture_default_str();

    auto* c_est = app.add_subcommand("estimate", "Maximum simulated likelihood estimation");
    c_est->add_option("--market", market_dir, "Market directory")->required();
    c_est->add_option("--start", start_path, "Starting parameters JSON (optional)");

    auto* c_dec = app.add_subcommand("decompose", "Stage-wise earnings-gap regressions");
    c_dec->add_option("--market", market_dir, "Market directory")->required();

    auto* c_cf = app.add_subcommand("counterfactual", "Run a policy counterfactual");
    c_cf->add_option("--market", market_dir, "Market directory")->required();
    c_cf->add_option("--params", params_path, "Parameters JSON (default: market dir)");
    c_cf->add_option("--policy", policy_path, "Policy spec JSON");

    auto* c_wtp = app.add_subcommand("wtp", "Willingness-to-pay tables from parameters");
    c_wtp->add_option("--params", params_path, "Parameters JSON")->required();
    c_wtp->add_option("--avg-salary", avg_salary, "Average annual salary in dollars")
        ->capture_default_str();

    app.add_subcommand("verify", "Run the built-in oracle suites");

    CLI11_PARSE(app, argc, argv);
    g.seed_given = seed_opt->count() > 0;
    if (!g.seed_given) g.seed = 42;
    par::set_threads(g.threads);

    try {
        if (app.got_subcommand("generate")) return cmd_generate(g, params_path);
        if (app.got_subcommand("simulate"))
            return cmd_simulate(g, market_dir, params_path, replications);
        if (app.got_subcommand("estimate")) return cmd_estimate(g, market_dir, start_path);
        if (app.got_subcommand("decompose")) return cmd_decompose(g, market_dir);
        if (app.got_subcommand("counterfactual"))
            return cmd_counterfactual(g, market_dir, params_path, policy_path);
        if (app.got_subcommand("wtp")) return cmd_wtp(g, params_path, avg_salary);
        if (app.got_subcommand("verify")) return cmd_verify(g);
    } catch (const validation_error& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return kExitValidation;
    } catch (const config_error& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}

namespace {

int cmd_verify(const GlobalOpts& g) {
    const std::uint64_t seed = g.seed;
    int failures = 0;
    auto check = [&](const char* name, bool ok, const std::string& detail = "") {
        std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name, detail.empty() ? "" : ": ",
                    detail.c_str());
        if (!ok) ++failures;
    };

    // Offer-probability normalization and agreement with enumeration.
    double worst_norm = 0, worst_diff = 0;
    {
        rng::Stream gg(seed, 0x7e57);
        for (int t = 0; t < 100; ++t) {
            const int n = 1 + gg.uniform_int(10);
            const int days = 1 + gg.uniform_int(4);
            StudentOfferProblem prob;
            for (int j = 0; j < n; ++j) {
                prob.pi.push_back(gg.uniform(0.02, 0.98));
                prob.day.push_back(1 + gg.uniform_int(days));
            }
            auto dist = oracle::enumerate_offer_distribution(prob.pi, prob.day);
            double total = 0;
            for (const auto& [z, pref] : dist) {
                const double f = offer_vector_probability(prob, z);
                worst_diff = std::max(worst_diff, std::abs(f - pref));
                total += f;
            }
            worst_norm = std::max(worst_norm, std::abs(total - 1.0));
        }
        check("offer-probability normalization (100 random instances)", worst_norm < 1e-10,
              "max |sum-1| = " + std::to_string(worst_norm));
        check("offer-probability matches exhaustive enumeration", worst_diff < 1e-12,
              "max |diff| = " + std::to_string(worst_diff));
    }

    // Cutoff-rule dominance over deterministic rules.
    {
        rng::Stream gg(seed, 0xc001);
        bool all_ok = true;
        for (int t = 0; t < 100 && all_ok; ++t) {
            const int n = 8;
            std::vector<double> v(n), pa(n);
            for (int i = 0; i < n; ++i) {
                v[i] = 0.05 + std::abs(gg.normal(1.0, 0.7));
                pa[i] = gg.uniform(0.05, 0.95);
            }
            double total = 0;
            for (double x : pa) total += x;
            auto rep = oracle::verify_cutoff_optimality(v, pa, gg.uniform(0.3, 0.8) * total);
            all_ok = all_ok && rep.optimal;
        }
        check("cutoff rule dominates all deterministic rules (100 pools)", all_ok);
    }

    // MSL gradient against central finite differences on a small market.
    {
        MarketConfig mc;
        mc.students = 150;
        mc.jobs = 6;
        mc.days = 3;
        mc.years = 2;
        mc.seed = seed;
        auto gen = generate_market(mc, recovery_parameters(layout_for(mc)));
        EstimationConfig ec;
        ec.r_draws = 40;
        ec.seed = seed + 1;
        LikelihoodModel model(gen.market, layout_for(mc), ec, gen.params);
        Eigen::VectorXd x0 = model.pack(gen.params);
        rng::Stream gg(seed, 0x92ad);
        double worst = 0;
        for (int t = 0; t < 3; ++t) {
            Eigen::VectorXd x = x0;
            for (int k = 0; k < x.size(); ++k) x[k] += 0.05 * gg.normal();
            Eigen::VectorXd ga;
            model.eval(x, &ga);
            Eigen::VectorXd gf = finite_difference_gradient(
                [&](const Eigen::VectorXd& xx) { return model.eval(xx, nullptr); }, x, 1e-6);
            worst = std::max(worst, (ga - gf).norm() / std::max(1e-12, ga.norm()));
        }
        check("MSL gradient matches finite differences", worst < 1e-4,
              "max rel err = " + std::to_string(worst));

        // Thread-stability of the objective.
        Eigen::VectorXd g1, g2;
        par::set_threads(1);
        const double f1 = model.eval(x0, &g1);
        par::set_threads(2);
        const double f2 = model.eval(x0, &g2);
        par::set_threads(g.threads);
        check("objective bit-stable across thread counts", f1 == f2 && g1 == g2);
    }

    std::printf("%s\n", failures == 0 ? "all checks passed" : "some checks FAILED");
    return failures == 0 ? kExitOk : 1;
}

} // namespace
