#include "placement/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "placement/csv.hpp"
#include "placement/generate.hpp"

namespace placement::io {

namespace fs = std::filesystem;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw validation_error("parse error in '" + path + "': " + e.what());
    }
    return j;
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

std::string config_hash(const json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// ---- MarketConfig ---------------------------------------------------------------

json config_to_json(const MarketConfig& c) {
    json j;
    j["students"] = c.students;
    j["jobs"] = c.jobs;
    j["days"] = c.days;
    j["years"] = c.years;
    j["seed"] = c.seed;
    j["caste_share_disadvantaged"] = c.caste_share_disadvantaged;
    j["degree_shares"] = c.degree_shares;
    j["majors"] = c.majors;
    j["n_experience"] = c.n_experience;
    j["entrance_gap_sd"] = c.entrance_gap_sd;
    j["gpa_gap_sd"] = c.gpa_gap_sd;
    j["grade_gap_sd"] = c.grade_gap_sd;
    j["score_sd"] = c.score_sd;
    j["amenity_prevalence"] = c.amenity_prevalence;
    j["amenity_names"] = c.amenity_names;
    j["sector_shares"] = c.sector_shares;
    j["sector_log_wage_mean"] = c.sector_log_wage_mean;
    j["wage_firm_sd"] = c.wage_firm_sd;
    j["wage_year_sd"] = c.wage_year_sd;
    j["client_facing_rate"] = c.client_facing_rate;
    j["application_rate"] = c.application_rate;
    j["stage_pass_rate"] = c.stage_pass_rate;
    j["stage_pass_caste_gap"] = c.stage_pass_caste_gap;
    j["stage_skill_slope"] = c.stage_skill_slope;
    j["offers_gated_by_interview"] = c.offers_gated_by_interview;
    j["cutoff_offset"] = c.cutoff_offset;
    j["cutoff_wage_slope"] = c.cutoff_wage_slope;
    j["cutoff_noise_sd"] = c.cutoff_noise_sd;
    return j;
}

namespace {
template <class T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}
} // namespace

MarketConfig market_config_from_json(const json& j) {
    MarketConfig c;
    get_if(j, "students", c.students);
    get_if(j, "jobs", c.jobs);
    get_if(j, "days", c.days);
    get_if(j, "years", c.years);
    get_if(j, "seed", c.seed);
    get_if(j, "caste_share_disadvantaged", c.caste_share_disadvantaged);
    get_if(j, "degree_shares", c.degree_shares);
    get_if(j, "majors", c.majors);
    get_if(j, "n_experience", c.n_experience);
    get_if(j, "entrance_gap_sd", c.entrance_gap_sd);
    get_if(j, "gpa_gap_sd", c.gpa_gap_sd);
    get_if(j, "grade_gap_sd", c.grade_gap_sd);
    get_if(j, "score_sd", c.score_sd);
    get_if(j, "amenity_prevalence", c.amenity_prevalence);
    get_if(j, "amenity_names", c.amenity_names);
    get_if(j, "sector_shares", c.sector_shares);
    get_if(j, "sector_log_wage_mean", c.sector_log_wage_mean);
    get_if(j, "wage_firm_sd", c.wage_firm_sd);
    get_if(j, "wage_year_sd", c.wage_year_sd);
    get_if(j, "client_facing_rate", c.client_facing_rate);
    get_if(j, "application_rate", c.application_rate);
    get_if(j, "stage_pass_rate", c.stage_pass_rate);
    get_if(j, "stage_pass_caste_gap", c.stage_pass_caste_gap);
    get_if(j, "stage_skill_slope", c.stage_skill_slope);
    get_if(j, "offers_gated_by_interview", c.offers_gated_by_interview);
    get_if(j, "cutoff_offset", c.cutoff_offset);
    get_if(j, "cutoff_wage_slope", c.cutoff_wage_slope);
    get_if(j, "cutoff_noise_sd", c.cutoff_noise_sd);
    c.validate();
    return c;
}

MarketConfig load_market_config(const std::string& path) {
    json j = read_json_file(path);
    if (j.contains("market")) return market_config_from_json(j["market"]);
    return market_config_from_json(j);
}

EstimationConfig estimation_config_from_json(const json& in) {
    const json& j = in.contains("estimation") ? in.at("estimation") : in;
    EstimationConfig c;
    get_if(j, "r_draws", c.r_draws);
    get_if(j, "max_iterations", c.max_iterations);
    get_if(j, "gradient_tolerance", c.gradient_tolerance);
    get_if(j, "fd_step", c.fd_step);
    get_if(j, "seed", c.seed);
    get_if(j, "fix_blocks", c.fix_blocks);
    get_if(j, "verbose", c.verbose);
    c.validate();
    return c;
}

PolicySpec policy_spec_from_json(const json& in) {
    const json& j = in.contains("policy") ? in.at("policy") : in;
    PolicySpec s;
    if (j.contains("kind")) {
        const std::string k = j.at("kind").get<std::string>();
        if (k == "subsidy")
            s.kind = PolicyKind::Subsidy;
        else if (k == "precollege")
            s.kind = PolicyKind::PreCollegeIntervention;
        else if (k == "quota")
            s.kind = PolicyKind::Quota;
        else
            throw config_error("unknown policy kind '" + k + "'");
    }
    if (j.contains("regime")) {
        const std::string r = j.at("regime").get<std::string>();
        if (r == "elastic")
            s.regime = DemandRegime::PerfectlyElastic;
        else if (r == "inelastic")
            s.regime = DemandRegime::PerfectlyInelastic;
        else
            throw config_error("unknown demand regime '" + r + "'");
    }
    if (j.contains("subsidy_size")) s.subsidy_size = j.at("subsidy_size").get<double>();
    get_if(j, "quota_ratio", s.quota_ratio);
    if (j.contains("external_cost_per_sd"))
        s.external_cost_per_sd = j.at("external_cost_per_sd").get<double>();
    get_if(j, "q_draws", s.q_draws);
    get_if(j, "sim_reps", s.sim_reps);
    get_if(j, "seed", s.seed);
    s.validate();
    return s;
}

// ---- ParameterSet -----------------------------------------------------------------

namespace {
json block_to_json(const Eigen::VectorXd& v, const std::vector<std::string>& names) {
    json j;
    j["names"] = names;
    std::vector<double> vals(v.data(), v.data() + v.size());
    j["values"] = vals;
    return j;
}

Eigen::VectorXd block_from_json(const json& j, const std::string& what) {
    if (!j.contains("values")) throw validation_error("parameter block '" + what + "' lacks values");
    const auto vals = j.at("values").get<std::vector<double>>();
    Eigen::VectorXd v(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
    return v;
}
} // namespace

void save_params(const ParameterSet& p, const CovariateLayout& layout, const std::string& path) {
    json j;
    j["beta"] = block_to_json(p.beta, layout.beta_names());
    j["psi"] = block_to_json(p.psi, layout.np_names());
    j["gamma"] = block_to_json(p.gamma, layout.gamma_names());
    j["alpha"] = block_to_json(p.alpha, layout.s_names());
    j["tau"] = p.tau;
    j["eta"] = p.eta;
    j["phi"] = p.phi;
    j["delta"] = p.delta;
    j["sigma_q"] = p.sigma_q;
    json cuts;
    for (std::size_t f = 0; f < p.cutoffs.size(); ++f)
        cuts[std::to_string(f)] = p.cutoffs[f];
    j["cutoffs"] = cuts;
    write_json_file(j, path);
}

ParameterSet load_params(const std::string& path) {
    json j = read_json_file(path);
    ParameterSet p;
    p.beta = block_from_json(j.at("beta"), "beta");
    p.psi = block_from_json(j.at("psi"), "psi");
    p.gamma = block_from_json(j.at("gamma"), "gamma");
    p.alpha = block_from_json(j.at("alpha"), "alpha");
    p.tau = j.at("tau").get<double>();
    p.eta = j.at("eta").get<double>();
    p.phi = j.at("phi").get<double>();
    p.delta = j.at("delta").get<double>();
    p.sigma_q = j.at("sigma_q").get<double>();
    if (p.sigma_q < 0) throw validation_error("params: sigma_q must be nonnegative");
    const json& cuts = j.at("cutoffs");
    p.cutoffs.assign(cuts.size(), 0.0);
    for (auto it = cuts.begin(); it != cuts.end(); ++it) {
        const std::size_t f = std::stoul(it.key());
        if (f >= p.cutoffs.size())
            throw validation_error("params: cutoff key '" + it.key() + "' out of range");
        p.cutoffs[f] = it.value().get<double>();
    }
    return p;
}

// ---- Market -----------------------------------------------------------------------

void save_market(const Market& m, const std::string& dir) {
    fs::create_directories(dir);
    const int n_firms = m.n_firms;

    {
        csv::Writer w(dir + "/students.csv");
        std::vector<std::string> h = {"id",  "year",    "caste",          "degree",
                                      "major", "gpa",   "entrance_score", "grade10",
                                      "grade12"};
        const int nexp = m.students.empty() ? 0 : static_cast<int>(m.students[0].experience.size());
        for (int e = 0; e < nexp; ++e) h.push_back("experience_" + std::to_string(e));
        for (int f = 0; f < n_firms; ++f) {
            h.push_back("read_f" + std::to_string(f));
            h.push_back("written_f" + std::to_string(f));
            h.push_back("debate_f" + std::to_string(f));
        }
        w.row(h);
        std::vector<std::string> r;
        for (const auto& s : m.students) {
            r = {std::to_string(s.id), std::to_string(s.year), to_string(s.caste),
                 to_string(s.degree), std::to_string(s.major), csv::fmt(s.gpa),
                 csv::fmt(s.entrance_score), csv::fmt(s.grade10), csv::fmt(s.grade12)};
            for (double e : s.experience) r.push_back(csv::fmt(e));
            // stage flags attach to the student's applied posting of each firm
            std::vector<StageFlags> by_firm(n_firms);
            for (int pid = 0; pid < m.n_postings(); ++pid)
                if (s.applications[pid]) by_firm[m.postings[pid].firm] = s.stage_flags[pid];
            for (int f = 0; f < n_firms; ++f) {
                r.push_back(by_firm[f].passed_reading ? "1" : "0");
                r.push_back(by_firm[f].passed_written ? "1" : "0");
                r.push_back(by_firm[f].passed_debate ? "1" : "0");
            }
            w.row(r);
        }
        w.close();
    }

    {
        csv::Writer w(dir + "/jobs.csv");
        std::vector<std::string> h = {"id",       "firm", "designation", "year", "sector",
                                      "log_wage", "day",  "cap",         "client_facing"};
        const auto n_am = m.postings.empty() ? 0 : m.postings[0].amenities.size();
        for (std::size_t a = 0; a < n_am; ++a) {
            const std::string nm = a < m.config.amenity_names.size()
                                       ? m.config.amenity_names[a]
                                       : "amenity_" + std::to_string(a);
            h.push_back("amenity_" + nm);
        }
        w.row(h);
        for (const auto& j : m.postings) {
            std::vector<std::string> r = {std::to_string(j.id),       std::to_string(j.firm),
                                          j.designation,              std::to_string(j.year),
                                          to_string(j.sector),        csv::fmt(j.log_wage),
                                          std::to_string(j.interview_day), csv::fmt(j.hiring_cap),
                                          j.client_facing ? "1" : "0"};
            for (auto a : j.amenities) r.push_back(a ? "1" : "0");
            w.row(r);
        }
        w.close();
    }

    {
        csv::Writer w(dir + "/offers.csv");
        w.row({"student_id", "job_id", "applied", "offered", "chosen"});
        for (std::size_t i = 0; i < m.students.size(); ++i) {
            const auto& s = m.students[i];
            const auto& ov = m.offers[i];
            for (int pid = 0; pid < m.n_postings(); ++pid) {
                if (!s.applications[pid]) continue;
                w.row({std::to_string(s.id), std::to_string(pid), "1",
                       ov.z[pid] ? "1" : "0", ov.chosen == pid ? "1" : "0"});
            }
        }
        w.close();
    }

    write_json_file(config_to_json(m.config), dir + "/config.json");
}

Market load_market(const std::string& dir) {
    Market m;
    m.config = market_config_from_json(read_json_file(dir + "/config.json"));

    // Jobs first: the posting count sizes the per-student vectors.
    {
        csv::Table t = csv::read(dir + "/jobs.csv");
        if (t.rows.empty()) throw validation_error(dir + "/jobs.csv: no postings");
        const int c_id = t.col("id"), c_firm = t.col("firm"), c_des = t.col("designation"),
                  c_year = t.col("year"), c_sec = t.col("sector"), c_w = t.col("log_wage"),
                  c_day = t.col("day"), c_cap = t.col("cap"), c_cf = t.col("client_facing");
        std::vector<int> amenity_cols;
        for (std::size_t c = 0; c < t.header.size(); ++c)
            if (t.header[c].rfind("amenity_", 0) == 0) amenity_cols.push_back(static_cast<int>(c));
        m.postings.resize(t.rows.size());
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            Job j;
            j.id = static_cast<int>(csv::parse_long(t, r, c_id));
            if (j.id != static_cast<int>(r))
                throw validation_error("jobs.csv: posting ids must be dense and ordered (row " +
                                       std::to_string(r + 2) + ")");
            j.firm = static_cast<int>(csv::parse_long(t, r, c_firm));
            j.designation = t.rows[r][c_des];
            j.year = static_cast<int>(csv::parse_long(t, r, c_year));
            j.sector = parse_sector(t.rows[r][c_sec]);
            j.log_wage = csv::parse_double(t, r, c_w);
            j.interview_day = static_cast<int>(csv::parse_long(t, r, c_day));
            j.hiring_cap = csv::parse_double(t, r, c_cap);
            j.client_facing = csv::parse_long(t, r, c_cf) != 0;
            for (int c : amenity_cols)
                j.amenities.push_back(csv::parse_long(t, r, c) != 0 ? 1 : 0);
            m.n_firms = std::max(m.n_firms, j.firm + 1);
            m.postings[r] = std::move(j);
        }
    }
    const int P = m.n_postings();

    {
        csv::Table t = csv::read(dir + "/students.csv");
        if (t.rows.empty()) throw validation_error(dir + "/students.csv: no students");
        const int c_id = t.col("id"), c_year = t.col("year"), c_caste = t.col("caste"),
                  c_deg = t.col("degree"), c_major = t.col("major"), c_gpa = t.col("gpa"),
                  c_ent = t.col("entrance_score"), c_g10 = t.col("grade10"),
                  c_g12 = t.col("grade12");
        std::vector<int> exp_cols;
        for (std::size_t c = 0; c < t.header.size(); ++c)
            if (t.header[c].rfind("experience_", 0) == 0) exp_cols.push_back(static_cast<int>(c));
        std::vector<std::array<int, 3>> flag_cols(m.n_firms, {-1, -1, -1});
        for (int f = 0; f < m.n_firms; ++f) {
            const std::string suf = "_f" + std::to_string(f);
            if (t.has_col("read" + suf)) flag_cols[f][0] = t.col("read" + suf);
            if (t.has_col("written" + suf)) flag_cols[f][1] = t.col("written" + suf);
            if (t.has_col("debate" + suf)) flag_cols[f][2] = t.col("debate" + suf);
        }
        m.students.resize(t.rows.size());
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            Student s;
            s.id = static_cast<int>(csv::parse_long(t, r, c_id));
            if (s.id != static_cast<int>(r))
                throw validation_error("students.csv: ids must be dense and ordered (row " +
                                       std::to_string(r + 2) + ")");
            s.year = static_cast<int>(csv::parse_long(t, r, c_year));
            s.caste = parse_caste(t.rows[r][c_caste]);
            s.degree = parse_degree(t.rows[r][c_deg]);
            s.major = static_cast<int>(csv::parse_long(t, r, c_major));
            s.gpa = csv::parse_double(t, r, c_gpa);
            s.entrance_score = csv::parse_double(t, r, c_ent);
            s.grade10 = csv::parse_double(t, r, c_g10);
            s.grade12 = csv::parse_double(t, r, c_g12);
            for (int c : exp_cols) s.experience.push_back(csv::parse_double(t, r, c));
            s.applications.assign(P, 0);
            s.stage_flags.assign(P, StageFlags{});
            // flags are attached to applied postings below, once offers.csv
            // tells us the application set
            for (int pid = 0; pid < P; ++pid) {
                const int f = m.postings[pid].firm;
                StageFlags fl;
                if (flag_cols[f][0] >= 0) fl.passed_reading = csv::parse_long(t, r, flag_cols[f][0]) != 0;
                if (flag_cols[f][1] >= 0) fl.passed_written = csv::parse_long(t, r, flag_cols[f][1]) != 0;
                if (flag_cols[f][2] >= 0) fl.passed_debate = csv::parse_long(t, r, flag_cols[f][2]) != 0;
                if (m.postings[pid].year == s.year) s.stage_flags[pid] = fl;
            }
            m.students[r] = std::move(s);
        }
    }
    const int N = m.n_students();
    m.offers.assign(N, OfferVector{});
    for (auto& ov : m.offers) ov.z.assign(P, 0);

    {
        csv::Table t = csv::read(dir + "/offers.csv");
        const int c_sid = t.col("student_id"), c_jid = t.col("job_id"), c_app = t.col("applied"),
                  c_off = t.col("offered"), c_cho = t.col("chosen");
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            const long sid = csv::parse_long(t, r, c_sid);
            const long jid = csv::parse_long(t, r, c_jid);
            if (sid < 0 || sid >= N)
                throw validation_error("offers.csv row " + std::to_string(r + 2) +
                                       ": unknown student_id");
            if (jid < 0 || jid >= P)
                throw validation_error("offers.csv row " + std::to_string(r + 2) +
                                       ": unknown job_id");
            const bool applied = csv::parse_long(t, r, c_app) != 0;
            const bool offered = csv::parse_long(t, r, c_off) != 0;
            const bool chosen = csv::parse_long(t, r, c_cho) != 0;
            if (applied) m.students[sid].applications[jid] = 1;
            if (offered) {
                m.offers[sid].z[jid] = 1;
                const int d = m.postings[jid].interview_day;
                if (m.offers[sid].offer_day == 0) m.offers[sid].offer_day = d;
            }
            if (chosen) {
                if (m.offers[sid].chosen != kOutside)
                    throw validation_error("offers.csv row " + std::to_string(r + 2) +
                                           ": student chose two jobs");
                m.offers[sid].chosen = static_cast<int>(jid);
            }
        }
        // offer_day must be the day shared by all offers; recompute cleanly
        for (int i = 0; i < N; ++i) {
            int day = 0;
            for (int pid = 0; pid < P; ++pid)
                if (m.offers[i].z[pid]) {
                    const int d = m.postings[pid].interview_day;
                    if (day == 0) day = d;
                    else day = std::min(day, d);
                }
            m.offers[i].offer_day = day;
        }
        // clear stage flags on postings the student never applied to, so the
        // in-memory record matches the generator's convention
        for (int i = 0; i < N; ++i)
            for (int pid = 0; pid < P; ++pid)
                if (!m.students[i].applications[pid]) m.students[i].stage_flags[pid] = StageFlags{};
    }

    m.validate();
    return m;
}

// ---- Oracle record -------------------------------------------------------------

void save_oracle(const OracleRecord& o, const std::string& path) {
    json j;
    j["q"] = o.q;
    j["eps_outside"] = o.eps_outside;
    json mu = json::array(), eps = json::array();
    for (std::size_t i = 0; i < o.mu.size(); ++i) {
        for (std::size_t p = 0; p < o.mu[i].size(); ++p) {
            if (std::isnan(o.mu[i][p])) continue;
            mu.push_back({i, p, o.mu[i][p]});
            eps.push_back({i, p, o.eps[i][p]});
        }
    }
    j["mu"] = mu;
    j["eps"] = eps;
    write_json_file(j, path);
}

OracleRecord load_oracle(const std::string& path) {
    json j = read_json_file(path);
    OracleRecord o;
    o.q = j.at("q").get<std::vector<double>>();
    o.eps_outside = j.at("eps_outside").get<std::vector<double>>();
    const std::size_t n = o.q.size();
    o.mu.assign(n, {});
    o.eps.assign(n, {});
    auto fill = [&](const json& arr, std::vector<std::vector<double>>& dst) {
        std::size_t maxp = 0;
        for (const auto& e : arr) maxp = std::max(maxp, e.at(1).get<std::size_t>() + 1);
        for (auto& row : dst) row.assign(maxp, std::numeric_limits<double>::quiet_NaN());
        for (const auto& e : arr)
            dst[e.at(0).get<std::size_t>()][e.at(1).get<std::size_t>()] = e.at(2).get<double>();
    };
    fill(j.at("mu"), o.mu);
    fill(j.at("eps"), o.eps);
    return o;
}

} // namespace placement::io
