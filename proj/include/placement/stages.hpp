#pragma once

#include <optional>
#include <string>
#include <vector>

#include "placement/ols.hpp"
#include "placement/types.hpp"

namespace placement {

// Successive job-search stages. A student's stage set holds the postings
// still in contention; sets are nested by construction.
enum class Stage {
    Application = 0,
    AptitudeTests = 1,
    GroupDebates = 2,
    PersonalInterviews = 3,
    Offers = 4,
    AcceptedOffers = 5
};
constexpr int kNumStages = 6;
const char* to_string(Stage s);

std::vector<int> stage_set(const Market& m, int student, Stage stage);

// Average salary (levels, then logged by the regression) of the stage set.
struct StageOutcome {
    double avg_salary[kNumStages];  // NaN when the stage set is empty
    int set_size[kNumStages];
};
StageOutcome stage_outcome(const Market& m, int student);

struct RegressionSpec {
    // 1 = linear controls, 2 = quadratic, 3 = cubic; full_interactions adds
    // all pairwise products of the linear terms to the quadratic set.
    int poly_degree = 1;
    bool full_interactions = false;
    std::optional<Sector> sector;        // restrict to students whose accepted
    std::optional<bool> client_facing;   // job matches (job-level filters)
};

struct StageGapResult {
    struct Row {
        Stage stage;
        double beta = 0.0; // coefficient on the disadvantaged indicator
        double se = 0.0;
        double ci_lo = 0.0, ci_hi = 0.0; // 95%
        long n = 0;
        bool skipped = false;
    };
    std::vector<Row> rows;
};

// Log average stage salary regressed on the caste indicator plus controls,
// one regression per stage.
StageGapResult stage_gap(const Market& m, const RegressionSpec& spec);

} // namespace placement
