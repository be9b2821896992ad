#pragma once

#include <stdexcept>
#include <string>

namespace placement {

// Input data violates the data contract (bad file, impossible offer, ...).
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration or parameter set is internally inconsistent.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sentinel for the outside option (unemployment). Posting ids are >= 0.
constexpr int kOutside = -1;

// Cutoff sentinel for an unconstrained job: every applicant clears it.
constexpr double kHireAllCutoff = -1e300;

} // namespace placement
