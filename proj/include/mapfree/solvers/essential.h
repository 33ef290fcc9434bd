#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mapfree/geometry/pose.h"
#include "mapfree/geometry/rotation.h"

namespace mapfree {

// A 2D-2D match in intrinsics-normalized coordinates,
// (pixel - principal point) / focal.
struct NormalizedMatch {
  Eigen::Vector2d ref;
  Eigen::Vector2d query;
};

// Essential matrix E with query_hᵀ * E * ref_h = 0, defined up to scale.
// Solver outputs are normalized to unit Frobenius norm.
struct EssentialMatrix {
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Zero();

  // Rank 2 with two equal non-zero singular values, within `tolerance`
  // relative to the largest singular value.
  bool SatisfiesInvariants(double tolerance = 1e-6) const;

  // E = [t]x R for x_query = R x_ref + t.
  static EssentialMatrix FromMotion(const Rotation& r,
                                    const Eigen::Vector3d& t);
};

// Rotation plus unit-norm translation direction.
struct RelativeMotion {
  Rotation rotation;
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();

  Pose ToPose(double scale = 1.0) const {
    return {rotation, scale * direction};
  }
};

// Minimal solver for exactly five matches. Returns up to ten real
// solutions; an empty list for numerically degenerate samples. Throws
// InvalidParameterError if the sample size is not five.
std::vector<EssentialMatrix> EssentialFivePoint(
    std::span<const NormalizedMatch> sample);

// Linear solver for eight or more matches with Hartley normalization,
// projected onto the essential manifold. Throws DegenerateSampleError when
// the design matrix has a null space of dimension larger than one, which
// includes all-coplanar scenes.
EssentialMatrix EssentialEightPoint(std::span<const NormalizedMatch> sample);

// The four (R, ±t̂) decompositions of E.
std::array<RelativeMotion, 4> EssentialCandidates(const EssentialMatrix& e);

// Picks the decomposition that places the most matches in front of both
// cameras. Ties go to the larger mean depth margin. Throws CheiralityError
// when no candidate has any point in front of both cameras.
RelativeMotion DecomposeEssential(const EssentialMatrix& e,
                                  std::span<const NormalizedMatch> matches);

struct MidpointTriangulation {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();  // reference frame
  bool well_conditioned = true;  // false for near-parallel rays
};

// Midpoint of the shortest segment between the two viewing rays, in the
// reference camera frame. Throws DegenerateSampleError for a zero baseline.
MidpointTriangulation TriangulateMidpoint(const Pose& relative,
                                          const NormalizedMatch& m);

}  // namespace mapfree
