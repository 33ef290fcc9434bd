#pragma once

#include <span>

#include "mapfree/solvers/essential.h"

namespace mapfree {

// First-order geometric distance of a match to the epipolar constraint, in
// normalized image units (square root of the Sampson distance).
double SampsonError(const EssentialMatrix& e, const NormalizedMatch& m);

// Levenberg-Marquardt on the essential manifold minimizing the summed
// squared Sampson error over `matches`. Returns `e` unchanged for fewer
// than five matches.
EssentialMatrix RefineEssentialSampson(const EssentialMatrix& e,
                                       std::span<const NormalizedMatch> matches,
                                       int max_iterations = 20);

}  // namespace mapfree
