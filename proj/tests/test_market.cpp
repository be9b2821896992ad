#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "placement/generate.hpp"
#include "placement/io.hpp"

using namespace placement;
namespace fs = std::filesystem;

namespace {
MarketConfig small_config(std::uint64_t seed = 42) {
    MarketConfig c;
    c.students = 100;
    c.jobs = 10;
    c.days = 3;
    c.years = 2;
    c.seed = seed;
    return c;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}
} // namespace

TEST_CASE("generation is a pure function of config, params, seed") {
    auto a = generate_market(small_config());
    auto b = generate_market(small_config());
    CHECK(a.market.n_students() == 100);
    CHECK(a.market.n_postings() == 20);
    // byte-identical via the serializer
    fs::create_directories("tmp_det");
    io::save_market(a.market, "tmp_det/a");
    io::save_market(b.market, "tmp_det/b");
    for (const char* f : {"/students.csv", "/jobs.csv", "/offers.csv"})
        CHECK(read_file(std::string("tmp_det/a") + f) == read_file(std::string("tmp_det/b") + f));
    CHECK(a.oracle.q == b.oracle.q);
    CHECK(a.params.cutoffs == b.params.cutoffs);
    fs::remove_all("tmp_det");

    auto c = generate_market(small_config(43));
    CHECK(c.oracle.q != a.oracle.q);
}

TEST_CASE("generated covariates match configured moments") {
    MarketConfig cfg;
    cfg.students = 20000;
    cfg.jobs = 4;
    cfg.days = 2;
    cfg.years = 1;
    cfg.seed = 7;
    cfg.entrance_gap_sd = 0.6;
    auto gen = generate_market(cfg);

    double sum_a = 0, sum_d = 0;
    int n_a = 0, n_d = 0;
    for (const auto& s : gen.market.students) {
        if (s.disadvantaged()) {
            sum_d += s.entrance_score;
            ++n_d;
        } else {
            sum_a += s.entrance_score;
            ++n_a;
        }
    }
    const double gap = sum_a / n_a - sum_d / n_d;
    const double tol = 3.0 / std::sqrt(static_cast<double>(cfg.students));
    CHECK(std::abs(gap - 0.6) < tol);

    // caste share
    const double share = static_cast<double>(n_d) / cfg.students;
    CHECK(std::abs(share - 0.5) < tol);
}

TEST_CASE("offer realizations respect the one-day rule and applications") {
    auto gen = generate_market(small_config(11));
    gen.market.validate(); // throws on violation
    for (int i = 0; i < gen.market.n_students(); ++i) {
        const auto& ov = gen.market.offers[i];
        int day = 0;
        for (int p = 0; p < gen.market.n_postings(); ++p) {
            if (!ov.z[p]) continue;
            CHECK(gen.market.students[i].applications[p] == 1);
            if (day == 0) day = gen.market.postings[p].interview_day;
            CHECK(gen.market.postings[p].interview_day == day);
        }
    }
}

TEST_CASE("no caste penalty and no heterogeneity equalizes offer rates") {
    MarketConfig cfg;
    cfg.students = 30000;
    cfg.jobs = 8;
    cfg.days = 2;
    cfg.years = 1;
    cfg.seed = 5;
    cfg.entrance_gap_sd = 0;
    cfg.gpa_gap_sd = 0;
    auto layout = layout_for(cfg);
    ParameterSet p = default_parameters(layout);
    p.eta = 0.0;
    p.sigma_q = 0.0;
    auto gen = generate_market(cfg, p);

    double off_a = 0, off_d = 0, n_a = 0, n_d = 0;
    for (int i = 0; i < gen.market.n_students(); ++i) {
        const bool dis = gen.market.students[i].disadvantaged();
        (dis ? n_d : n_a) += 1;
        for (int pid = 0; pid < gen.market.n_postings(); ++pid)
            if (gen.market.offers[i].z[pid]) (dis ? off_d : off_a) += 1;
    }
    const double rate_a = off_a / n_a, rate_d = off_d / n_d;
    CHECK(std::abs(rate_a - rate_d) < 3.0 * std::sqrt(rate_a / n_a + rate_d / n_d));
}

TEST_CASE("market round-trips through the CSV schemas") {
    auto gen = generate_market(small_config(17));
    io::save_market(gen.market, "tmp_rt");
    Market back = io::load_market("tmp_rt");
    REQUIRE(back.n_students() == gen.market.n_students());
    REQUIRE(back.n_postings() == gen.market.n_postings());
    for (int i = 0; i < back.n_students(); ++i) {
        const auto& a = gen.market.students[i];
        const auto& b = back.students[i];
        CHECK(a.caste == b.caste);
        CHECK(a.degree == b.degree);
        CHECK(a.year == b.year);
        CHECK(a.gpa == b.gpa);
        CHECK(a.entrance_score == b.entrance_score);
        CHECK(a.experience == b.experience);
        CHECK(a.applications == b.applications);
        CHECK(a.stage_flags == b.stage_flags);
        CHECK(std::isnan(b.q)); // latents never enter the observed schema
        CHECK(gen.market.offers[i] == back.offers[i]);
    }
    for (int p = 0; p < back.n_postings(); ++p) {
        CHECK(gen.market.postings[p].log_wage == back.postings[p].log_wage);
        CHECK(gen.market.postings[p].amenities == back.postings[p].amenities);
        CHECK(gen.market.postings[p].interview_day == back.postings[p].interview_day);
        CHECK(gen.market.postings[p].firm == back.postings[p].firm);
    }
    // oracle record round-trip
    io::save_oracle(gen.oracle, "tmp_rt/oracle.json");
    OracleRecord orc = io::load_oracle("tmp_rt/oracle.json");
    CHECK(orc.q == gen.oracle.q);
    fs::remove_all("tmp_rt");
}

TEST_CASE("offer without application fails validation on load") {
    auto gen = generate_market(small_config(19));
    io::save_market(gen.market, "tmp_bad");
    // append an offer row for a non-applied posting
    {
        // find a (student, posting) pair with no application in the student's year
        int sid = -1, pid = -1;
        for (int i = 0; i < gen.market.n_students() && sid < 0; ++i)
            for (int p = 0; p < gen.market.n_postings(); ++p)
                if (!gen.market.students[i].applications[p]) {
                    sid = i;
                    pid = p;
                    break;
                }
        REQUIRE(sid >= 0);
        std::ofstream out("tmp_bad/offers.csv", std::ios::app);
        out << sid << "," << pid << ",0,1,0\n";
    }
    CHECK_THROWS_AS(io::load_market("tmp_bad"), validation_error);
    fs::remove_all("tmp_bad");
}

TEST_CASE("empty student file is rejected") {
    auto gen = generate_market(small_config(23));
    io::save_market(gen.market, "tmp_empty");
    {
        csv::Table t = csv::read("tmp_empty/students.csv");
        std::ofstream out("tmp_empty/students.csv");
        for (std::size_t i = 0; i < t.header.size(); ++i)
            out << (i ? "," : "") << t.header[i];
        out << "\n";
    }
    CHECK_THROWS_WITH_AS(io::load_market("tmp_empty"),
                         doctest::Contains("no students"), validation_error);
    fs::remove_all("tmp_empty");
}

TEST_CASE("params round-trip through JSON") {
    auto layout = layout_for(small_config());
    ParameterSet p = default_parameters(layout);
    p.cutoffs = {-1.5, 2.25, 0.0, 1e-17, -3.5, 0.125, 9.75, -0.625, 4.5, 1.0};
    io::save_params(p, layout, "tmp_params.json");
    ParameterSet q = io::load_params("tmp_params.json");
    CHECK(q.tau == p.tau);
    CHECK(q.eta == p.eta);
    CHECK(q.cutoffs == p.cutoffs);
    CHECK(q.beta == p.beta);
    CHECK(q.alpha == p.alpha);
    fs::remove("tmp_params.json");
}

TEST_CASE("config validation rejects bad settings") {
    MarketConfig c = small_config();
    c.students = 0;
    CHECK_THROWS_AS(c.validate(), config_error);
    c = small_config();
    c.caste_share_disadvantaged = 1.5;
    CHECK_THROWS_AS(c.validate(), config_error);
    c = small_config();
    c.degree_shares = {0.5, 0.5, 0.5, 0.5};
    CHECK_THROWS_AS(c.validate(), config_error);
}

TEST_CASE("dimension mismatch between params and config is a configuration error") {
    MarketConfig cfg = small_config();
    ParameterSet p = default_parameters(layout_for(cfg));
    p.alpha.resize(3);
    CHECK_THROWS_AS(generate_market(cfg, p), config_error);
}
