#pragma once

#include <vector>

#include "mmot/network.hpp"
#include "mmot/sinkhorn.hpp"
#include "mmot/tensor.hpp"

namespace mmot {

// Residual below which the rank-1 term is dropped.
inline constexpr double kZeroResidual = 1e-14;

// Scale each mode down to at most its target, then add the rank-1 term that
// restores the missing mass. A must be strictly positive.
DenseTensor round_dense(const DenseTensor& a, const std::vector<Vector>& targets);

struct StructuredRounding {
  Scalings scalings;
  Rank1Correction correction;
};

// Same procedure on an implicit plan: the diagonal scalings are folded into
// the gammas and the rank-1 term is returned separately. The returned
// scalings have no fixed modes.
StructuredRounding round_structured(MarginalOracle& oracle, const Scalings& s,
                                    const std::vector<Vector>& targets);

}  // namespace mmot
