#include "placement/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "placement/csv.hpp"
#include "placement/io.hpp"

namespace placement::report {

namespace {

void stamp(csv::Writer& w, const Provenance& prov) {
    w.comment("seed=" + std::to_string(prov.seed) + " config=" + prov.config_hash);
}

std::string fixed(double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return std::string(buf);
}

void write_wtp_csv(const std::vector<WtpRow>& rows, const Provenance& prov,
                   const std::string& path) {
    csv::Writer w(path);
    stamp(w, prov);
    w.row({"parameter", "estimate", "se", "compensation_usd", "se_usd", "compensation_pct",
           "se_pct"});
    for (const auto& r : rows)
        w.row({r.name, csv::fmt(r.estimate), csv::fmt(r.se), csv::fmt(r.dollars),
               csv::fmt(r.dollars_se), csv::fmt(r.percent), csv::fmt(r.percent_se)});
    w.close();
}

void write_wtp_txt(const std::vector<WtpRow>& rows, const std::string& title,
                   const Provenance& prov, const std::string& path) {
    std::ofstream out(path);
    out << "# seed=" << prov.seed << " config=" << prov.config_hash << "\n";
    out << title << "\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-28s %10s %10s %12s %12s %10s %10s\n", "Parameter",
                  "Estimate", "SE", "Comp($)", "SE($)", "Comp(%)", "SE(%)");
    out << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-28s %10.4f %10.4f %12.3f %12.3f %10.3f %10.3f\n",
                      r.name.c_str(), r.estimate, r.se, r.dollars, r.dollars_se, r.percent,
                      r.percent_se);
        out << buf;
    }
}

} // namespace

void write_stage_gaps(const StageGapResult& r, const Provenance& prov, const std::string& path) {
    csv::Writer w(path);
    stamp(w, prov);
    w.row({"stage", "beta_disadvantaged", "se", "ci_lo", "ci_hi", "n", "skipped"});
    for (const auto& row : r.rows)
        w.row({to_string(row.stage), csv::fmt(row.beta), csv::fmt(row.se), csv::fmt(row.ci_lo),
               csv::fmt(row.ci_hi), std::to_string(row.n), row.skipped ? "1" : "0"});
    w.close();
}

void write_wtp_tables(const std::vector<WtpRow>& student, const std::vector<WtpRow>& employer,
                      const Provenance& prov, const std::string& dir) {
    write_wtp_csv(student, prov, dir + "/wtp_student.csv");
    write_wtp_csv(employer, prov, dir + "/wtp_employer.csv");
    write_wtp_txt(student, "Student willingness to pay for job characteristics", prov,
                  dir + "/wtp_student.txt");
    write_wtp_txt(employer, "Employer willingness to pay for student characteristics", prov,
                  dir + "/wtp_employer.txt");
}

void write_policy(const PolicyReport& r, const Provenance& prov, const std::string& dir) {
    io::json j;
    j["policy"] = to_string(r.kind);
    if (r.kind != PolicyKind::Quota) j["regime"] = to_string(r.regime);
    j["provenance"] = {{"seed", prov.seed}, {"config", prov.config_hash}};
    auto out = [&](const PolicyOutcome& o) {
        io::json s;
        s["unemployment_advantaged"] = o.unemployment_adv;
        s["unemployment_disadvantaged"] = o.unemployment_dis;
        s["unemployment_overall"] = o.unemployment_all;
        s["hires_advantaged"] = o.hires_adv;
        s["hires_disadvantaged"] = o.hires_dis;
        s["total_hires"] = o.total_hires;
        s["total_offers"] = o.total_offers;
        s["earnings_gap"] = o.earnings_gap;
        s["expected_hires_by_firm"] = o.expected_hires_by_firm;
        s["offers_by_firm"] = o.offers_by_firm;
        return s;
    };
    j["baseline"] = out(r.baseline);
    j["policy_outcome"] = out(r.policy);
    j["changes"] = {
        {"unemployment_advantaged_pct",
         r.baseline.unemployment_adv > 0
             ? 100.0 * (r.policy.unemployment_adv / r.baseline.unemployment_adv - 1.0)
             : 0.0},
        {"unemployment_disadvantaged_pct",
         r.baseline.unemployment_dis > 0
             ? 100.0 * (r.policy.unemployment_dis / r.baseline.unemployment_dis - 1.0)
             : 0.0},
        {"total_hires_pct",
         r.baseline.total_hires > 0
             ? 100.0 * (r.policy.total_hires / r.baseline.total_hires - 1.0)
             : 0.0},
        {"earnings_gap_before", r.baseline.earnings_gap},
        {"earnings_gap_after", r.policy.earnings_gap}};
    j["subsidy_size_utility"] = r.subsidy_size;
    j["subsidy_pct_of_salary"] = r.subsidy_pct_of_salary;
    j["caste_penalty_pct"] = r.caste_penalty_pct;
    j["subsidy_equivalent_utility"] = r.subsidy_equivalent_utility;
    j["subsidy_equivalent_pct"] = r.subsidy_equivalent_pct;
    j["mean_score_shift_sd"] = r.mean_score_shift_sd;
    j["total_score_shift_sd"] = r.total_score_shift_sd;
    j["ks_distance"] = r.ks_distance;
    j["exempted_firms"] = r.exempted_firms;
    if (!r.quota_cutoff_adv.empty()) {
        j["quota_cutoff_advantaged"] = r.quota_cutoff_adv;
        j["quota_cutoff_disadvantaged"] = r.quota_cutoff_dis;
    }
    j["converged"] = r.converged;
    j["notes"] = r.notes;
    io::write_json_file(j, dir + "/policy_report.json");

    std::ofstream out_txt(dir + "/policy_table.txt");
    out_txt << "# seed=" << prov.seed << " config=" << prov.config_hash << "\n";
    out_txt << "Policy: " << to_string(r.kind);
    if (r.kind != PolicyKind::Quota) out_txt << " (" << to_string(r.regime) << " demand)";
    out_txt << "\n\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-12s %12s %12s %12s %12s %12s\n", "", "Unemp(Adv)",
                  "Unemp(Dis)", "Unemp(All)", "TotalHires", "EarnGap");
    out_txt << buf;
    auto line = [&](const char* name, const PolicyOutcome& o) {
        std::snprintf(buf, sizeof(buf), "%-12s %11.1f%% %11.1f%% %11.1f%% %12.2f %12.4f\n", name,
                      100 * o.unemployment_adv, 100 * o.unemployment_dis,
                      100 * o.unemployment_all, o.total_hires, o.earnings_gap);
        out_txt << buf;
    };
    line("baseline", r.baseline);
    line("policy", r.policy);
    std::snprintf(buf, sizeof(buf),
                  "\nDelta unemployment: advantaged %+.1f%%, disadvantaged %+.1f%%; "
                  "total hires %+.2f (%+.1f%%)\n",
                  100 * (r.policy.unemployment_adv - r.baseline.unemployment_adv),
                  100 * (r.policy.unemployment_dis - r.baseline.unemployment_dis),
                  r.policy.total_hires - r.baseline.total_hires,
                  r.baseline.total_hires > 0
                      ? 100.0 * (r.policy.total_hires / r.baseline.total_hires - 1.0)
                      : 0.0);
    out_txt << buf;
}

void write_moments(const MomentsTable& t, const Provenance& prov, const std::string& path) {
    csv::Writer w(path);
    stamp(w, prov);
    w.comment("replications=" + std::to_string(t.replications));
    w.row({"moment", "data", "model", "model_sd"});
    for (const auto& r : t.rows)
        w.row({r.name, csv::fmt(r.data), csv::fmt(r.model), csv::fmt(r.model_sd)});
    w.close();
}

void write_estimation(const EstimationResult& r, const CovariateLayout& layout,
                      const Provenance& prov, const std::string& dir, double avg_salary) {
    io::json j;
    j["provenance"] = {{"seed", prov.seed}, {"config", prov.config_hash}};
    j["log_likelihood"] = r.log_likelihood;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["evaluations"] = r.evaluations;
    j["grad_norm"] = r.grad_norm;
    j["notes"] = r.notes;
    j["opg_condition"] = r.opg_condition;
    j["opg_pseudo_inverse"] = r.opg_pseudo_inverse;
    io::json est = io::json::object(), se = io::json::object();
    for (std::size_t k = 0; k < r.free_names.size(); ++k) {
        est[r.free_names[k]] = r.free_names[k] == "sigma_q" ? r.theta.sigma_q : r.theta_free[k];
        se[r.free_names[k]] = r.se_by_name.at(r.free_names[k]);
    }
    j["estimates"] = est;
    j["standard_errors"] = se;
    io::write_json_file(j, dir + "/estimate.json");

    io::save_params(r.theta, layout, dir + "/params_hat.json");

    auto student = wtp_student_table(r.theta, layout, &r.se_by_name, avg_salary);
    auto employer = wtp_employer_table(r.theta, layout, &r.se_by_name, avg_salary);
    write_wtp_tables(student, employer, prov, dir);

    // per-student likelihood contributions
    csv::Writer w(dir + "/student_loglik.csv");
    stamp(w, prov);
    w.row({"student_id", "loglik"});
    for (std::size_t i = 0; i < r.student_loglik.size(); ++i)
        w.row({std::to_string(i), csv::fmt(r.student_loglik[i])});
    w.close();
}

} // namespace placement::report
