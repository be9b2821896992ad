#pragma once

#include "placement/layout.hpp"
#include "placement/types.hpp"

namespace placement {

struct GenerationResult {
    Market market;
    OracleRecord oracle;
    ParameterSet params; // as used, with cutoffs filled in
};

// Structural coefficients calibrated to the published estimates (employer
// coefficients, WTP-relevant blocks, q loadings). Cutoffs are left empty;
// generate_market fills them from the config rule unless the caller supplies
// them.
ParameterSet default_parameters(const CovariateLayout& layout);

// Variant with a stronger latent factor, convenient for recovery studies
// where sigma_q should be clearly identified.
ParameterSet recovery_parameters(const CovariateLayout& layout);

CovariateLayout layout_for(const MarketConfig& config);

// Synthesizes a full market: covariates, applications, screening flags,
// wages, cutoffs, then realizes offers day by day through the cutoff rule and
// choices through the utility maximization. Pure function of
// (config, params, config.seed); latents land in the oracle record.
GenerationResult generate_market(const MarketConfig& config, const ParameterSet& params);

// Convenience: default parameters for this config.
GenerationResult generate_market(const MarketConfig& config);

} // namespace placement
