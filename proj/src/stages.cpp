#include "placement/stages.hpp"

#include <algorithm>
#include <cmath>

namespace placement {

const char* to_string(Stage s) {
    switch (s) {
        case Stage::Application: return "application";
        case Stage::AptitudeTests: return "aptitude_tests";
        case Stage::GroupDebates: return "group_debates";
        case Stage::PersonalInterviews: return "personal_interviews";
        case Stage::Offers: return "offers";
        case Stage::AcceptedOffers: return "accepted_offers";
    }
    return "?";
}

std::vector<int> stage_set(const Market& m, int student, Stage stage) {
    const Student& s = m.students[student];
    const OfferVector& ov = m.offers[student];
    std::vector<int> out;
    for (int pid = 0; pid < m.n_postings(); ++pid) {
        if (!s.applications[pid]) continue;
        const StageFlags& f = s.stage_flags[pid];
        bool in = false;
        switch (stage) {
            case Stage::Application: in = true; break;
            case Stage::AptitudeTests: in = f.passed_reading; break;
            case Stage::GroupDebates: in = f.passed_written; break;
            case Stage::PersonalInterviews: in = f.passed_debate; break;
            case Stage::Offers: in = ov.z[pid]; break;
            case Stage::AcceptedOffers: in = ov.chosen == pid; break;
        }
        if (in) out.push_back(pid);
    }
    return out;
}

StageOutcome stage_outcome(const Market& m, int student) {
    StageOutcome o;
    for (int st = 0; st < kNumStages; ++st) {
        const auto set = stage_set(m, student, static_cast<Stage>(st));
        o.set_size[st] = static_cast<int>(set.size());
        if (set.empty()) {
            o.avg_salary[st] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        double acc = 0.0;
        for (int pid : set) acc += std::exp(m.postings[pid].log_wage);
        o.avg_salary[st] = acc / static_cast<double>(set.size());
    }
    return o;
}

namespace {

// Control columns: standardized scores and experience, expanded per spec.
void control_row(const Student& s, const RegressionSpec& spec, std::vector<double>& out) {
    std::vector<double> lin = {s.gpa, s.entrance_score, s.grade10, s.grade12};
    for (double e : s.experience) lin.push_back(e);
    out.clear();
    for (double v : lin) out.push_back(v);
    if (spec.poly_degree >= 2 || spec.full_interactions)
        for (double v : lin) out.push_back(v * v);
    if (spec.poly_degree >= 3)
        for (double v : lin) out.push_back(v * v * v);
    if (spec.full_interactions)
        for (std::size_t a = 0; a < lin.size(); ++a)
            for (std::size_t b = a + 1; b < lin.size(); ++b) out.push_back(lin[a] * lin[b]);
    // degree dummies (base: btech)
    out.push_back(s.degree == Degree::DualDegree ? 1.0 : 0.0);
    out.push_back(s.degree == Degree::MTech ? 1.0 : 0.0);
    out.push_back(s.degree == Degree::MS ? 1.0 : 0.0);
}

bool passes_filter(const Market& m, int student, const RegressionSpec& spec) {
    if (!spec.sector && !spec.client_facing) return true;
    // Job-level filters restrict the sample by the student's application mix:
    // a student is kept when any applied posting matches.
    const Student& s = m.students[student];
    for (int pid = 0; pid < m.n_postings(); ++pid) {
        if (!s.applications[pid]) continue;
        const Job& j = m.postings[pid];
        if (spec.sector && j.sector != *spec.sector) continue;
        if (spec.client_facing && j.client_facing != *spec.client_facing) continue;
        return true;
    }
    return false;
}

} // namespace

StageGapResult stage_gap(const Market& m, const RegressionSpec& spec) {
    StageGapResult res;
    const int N = m.n_students();

    std::vector<StageOutcome> outcomes(N);
    for (int i = 0; i < N; ++i) outcomes[i] = stage_outcome(m, i);

    std::vector<double> controls;
    for (int st = 0; st < kNumStages; ++st) {
        StageGapResult::Row row;
        row.stage = static_cast<Stage>(st);

        std::vector<int> sample;
        for (int i = 0; i < N; ++i) {
            if (!std::isfinite(outcomes[i].avg_salary[st])) continue;
            if (!passes_filter(m, i, spec)) continue;
            sample.push_back(i);
        }
        control_row(m.students[0], spec, controls);
        const int k = 2 + static_cast<int>(controls.size());
        if (static_cast<int>(sample.size()) < k + 2) {
            row.skipped = true;
            res.rows.push_back(row);
            continue;
        }

        Eigen::MatrixXd X(sample.size(), k);
        Eigen::VectorXd y(sample.size());
        for (std::size_t r = 0; r < sample.size(); ++r) {
            const Student& s = m.students[sample[r]];
            X(r, 0) = 1.0;
            X(r, 1) = s.disadvantaged() ? 1.0 : 0.0;
            control_row(s, spec, controls);
            for (std::size_t c = 0; c < controls.size(); ++c) X(r, 2 + c) = controls[c];
            y(r) = std::log(outcomes[sample[r]].avg_salary[st]);
        }
        OlsResult fit = ols(X, y);
        row.beta = fit.beta[1];
        row.se = fit.se[1];
        row.ci_lo = row.beta - 1.959963984540054 * row.se;
        row.ci_hi = row.beta + 1.959963984540054 * row.se;
        row.n = static_cast<long>(sample.size());
        res.rows.push_back(row);
    }
    return res;
}

} // namespace placement
