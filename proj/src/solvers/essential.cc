#include "mapfree/solvers/essential.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "mapfree/error.h"
#include "mapfree/solvers/polynomial.h"

namespace mapfree {
namespace {

// Monomials in (x, y, z) of total degree <= 3, in the column order used for
// the 10x20 constraint matrix: the first ten are eliminated by Gauss-Jordan,
// the last ten are x*{z², z, 1}, y*{z², z, 1}, {z³, z², z, 1}.
constexpr int kNumMonomials = 20;
constexpr int kMonomialExponents[kNumMonomials][3] = {
    {3, 0, 0}, {0, 3, 0}, {2, 1, 0}, {1, 2, 0}, {2, 0, 1},
    {2, 0, 0}, {0, 2, 1}, {0, 2, 0}, {1, 1, 1}, {1, 1, 0},
    {1, 0, 2}, {1, 0, 1}, {1, 0, 0}, {0, 1, 2}, {0, 1, 1},
    {0, 1, 0}, {0, 0, 3}, {0, 0, 2}, {0, 0, 1}, {0, 0, 0}};

struct MonomialTable {
  int index[4][4][4];
  constexpr MonomialTable() : index() {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) index[a][b][c] = -1;
    for (int i = 0; i < kNumMonomials; ++i) {
      index[kMonomialExponents[i][0]][kMonomialExponents[i][1]]
           [kMonomialExponents[i][2]] = i;
    }
  }
};
constexpr MonomialTable kMonomials;

// Dense trivariate polynomial of total degree <= 3.
struct Poly3 {
  std::array<double, kNumMonomials> c{};

  Poly3 operator+(const Poly3& o) const {
    Poly3 r;
    for (int i = 0; i < kNumMonomials; ++i) r.c[i] = c[i] + o.c[i];
    return r;
  }
  Poly3 operator-(const Poly3& o) const {
    Poly3 r;
    for (int i = 0; i < kNumMonomials; ++i) r.c[i] = c[i] - o.c[i];
    return r;
  }
  Poly3 operator*(double s) const {
    Poly3 r;
    for (int i = 0; i < kNumMonomials; ++i) r.c[i] = c[i] * s;
    return r;
  }
  Poly3 operator*(const Poly3& o) const {
    Poly3 r;
    for (int i = 0; i < kNumMonomials; ++i) {
      if (c[i] == 0.0) continue;
      const int* ei = kMonomialExponents[i];
      for (int j = 0; j < kNumMonomials; ++j) {
        if (o.c[j] == 0.0) continue;
        const int* ej = kMonomialExponents[j];
        const int a = ei[0] + ej[0], b = ei[1] + ej[1], d = ei[2] + ej[2];
        // Products above degree 3 never arise in the constraints below.
        if (a + b + d > 3) continue;
        r.c[kMonomials.index[a][b][d]] += c[i] * o.c[j];
      }
    }
    return r;
  }
};

using PolyMat3 = std::array<std::array<Poly3, 3>, 3>;

PolyMat3 Multiply(const PolyMat3& a, const PolyMat3& b) {
  PolyMat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] = r[i][j] + a[i][k] * b[k][j];
  return r;
}

// Univariate pieces of an eliminated row: row = x*px(z) + y*py(z) + p1(z).
struct RowInZ {
  Polynomial px, py, p1;
};

RowInZ SplitRow(const Eigen::Matrix<double, 10, 10>& rest, int row) {
  const auto r = [&](int col) { return rest(row, col - 10); };
  return {Polynomial({r(12), r(11), r(10)}), Polynomial({r(15), r(14), r(13)}),
          Polynomial({r(19), r(18), r(17), r(16)})};
}

RowInZ EliminateLeading(const RowInZ& upper, const RowInZ& lower) {
  const Polynomial z({0.0, 1.0});
  return {upper.px - z * lower.px, upper.py - z * lower.py,
          upper.p1 - z * lower.p1};
}

Eigen::Matrix3d ToMatrix(const Eigen::Matrix<double, 9, 1>& e) {
  Eigen::Matrix3d m;
  m << e(0), e(1), e(2), e(3), e(4), e(5), e(6), e(7), e(8);
  return m;
}

Eigen::Matrix<double, 1, 9> EpipolarRow(const NormalizedMatch& m) {
  const Eigen::Vector3d r = m.ref.homogeneous();
  const Eigen::Vector3d q = m.query.homogeneous();
  Eigen::Matrix<double, 1, 9> row;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) row(3 * i + j) = q(i) * r(j);
  return row;
}

double EpipolarResidual(const Eigen::Matrix3d& e, const NormalizedMatch& m) {
  return std::abs(m.query.homogeneous().dot(e * m.ref.homogeneous()));
}

Eigen::Matrix3d CrossMatrix(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

}  // namespace

bool EssentialMatrix::SatisfiesInvariants(double tolerance) const {
  if (!matrix.allFinite()) return false;
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(matrix);
  const Eigen::Vector3d s = svd.singularValues();
  if (!(s(0) > 0.0)) return false;
  return s(2) < tolerance * s(0) && (s(0) - s(1)) <= tolerance * s(0);
}

EssentialMatrix EssentialMatrix::FromMotion(const Rotation& r,
                                            const Eigen::Vector3d& t) {
  return {CrossMatrix(t) * r.matrix()};
}

std::vector<EssentialMatrix> EssentialFivePoint(
    std::span<const NormalizedMatch> sample) {
  if (sample.size() != 5) {
    throw InvalidParameterError("five-point solver needs exactly 5 matches");
  }

  Eigen::Matrix<double, 5, 9> design;
  for (int i = 0; i < 5; ++i) design.row(i) = EpipolarRow(sample[i]);
  if (!design.allFinite()) return {};

  // Four-dimensional null space E = x X + y Y + z Z + W.
  const Eigen::JacobiSVD<Eigen::Matrix<double, 5, 9>> svd(design,
                                                          Eigen::ComputeFullV);
  const Eigen::Matrix<double, 9, 9>& v = svd.matrixV();
  const Eigen::VectorXd& sv = svd.singularValues();
  if (!(sv(4) > 1e-12 * sv(0))) return {};

  PolyMat3 e;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int k = 3 * i + j;
      Poly3& p = e[i][j];
      p.c[kMonomials.index[1][0][0]] = v(k, 5);
      p.c[kMonomials.index[0][1][0]] = v(k, 6);
      p.c[kMonomials.index[0][0][1]] = v(k, 7);
      p.c[kMonomials.index[0][0][0]] = v(k, 8);
    }
  }

  // det(E) = 0 and 2 E Eᵀ E - tr(E Eᵀ) E = 0.
  PolyMat3 et;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) et[i][j] = e[j][i];
  const PolyMat3 eet = Multiply(e, et);
  const Poly3 trace = eet[0][0] + eet[1][1] + eet[2][2];
  const PolyMat3 eete = Multiply(eet, e);

  Eigen::Matrix<double, 10, 20> constraints;
  const Poly3 det =
      e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1]) -
      e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0]) +
      e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
  for (int c = 0; c < kNumMonomials; ++c) constraints(0, c) = det.c[c];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Poly3 p = eete[i][j] * 2.0 - trace * e[i][j];
      for (int c = 0; c < kNumMonomials; ++c)
        constraints(1 + 3 * i + j, c) = p.c[c];
    }
  }

  // Gauss-Jordan on the first ten columns.
  const Eigen::Matrix<double, 10, 10> lead = constraints.leftCols<10>();
  const Eigen::FullPivLU<Eigen::Matrix<double, 10, 10>> lu(lead);
  if (!lu.isInvertible()) return {};
  const Eigen::Matrix<double, 10, 10> rest =
      lu.solve(constraints.rightCols<10>());
  if (!rest.allFinite()) return {};

  // Rows led by x²z, x², y²z, y², xyz, xy.
  const RowInZ k = EliminateLeading(SplitRow(rest, 4), SplitRow(rest, 5));
  const RowInZ l = EliminateLeading(SplitRow(rest, 6), SplitRow(rest, 7));
  const RowInZ m = EliminateLeading(SplitRow(rest, 8), SplitRow(rest, 9));

  // B(z) [x y 1]ᵀ = 0 has a solution iff det B(z) = 0 (degree 10 in z).
  const Polynomial det_b =
      k.px * (l.py * m.p1 - l.p1 * m.py) -
      k.py * (l.px * m.p1 - l.p1 * m.px) +
      k.p1 * (l.px * m.py - l.py * m.px);

  std::vector<EssentialMatrix> solutions;
  for (const double z : RealRoots(det_b, 1e-10)) {
    const Eigen::Vector3d rk(k.px(z), k.py(z), k.p1(z));
    const Eigen::Vector3d rl(l.px(z), l.py(z), l.p1(z));
    const Eigen::Vector3d rm(m.px(z), m.py(z), m.p1(z));
    Eigen::Vector3d xy1 = rk.cross(rl);
    for (const Eigen::Vector3d& c : {rk.cross(rm), rl.cross(rm)}) {
      if (c.norm() > xy1.norm()) xy1 = c;
    }
    if (std::abs(xy1.z()) < std::numeric_limits<double>::epsilon() *
                                xy1.norm()) {
      continue;
    }
    const double x = xy1.x() / xy1.z();
    const double y = xy1.y() / xy1.z();
    const Eigen::Matrix<double, 9, 1> vec =
        x * v.col(5) + y * v.col(6) + z * v.col(7) + v.col(8);
    EssentialMatrix candidate{ToMatrix(vec.normalized())};
    if (!candidate.SatisfiesInvariants()) continue;
    bool satisfies_sample = true;
    for (const NormalizedMatch& s : sample) {
      if (EpipolarResidual(candidate.matrix, s) > 1e-8) {
        satisfies_sample = false;
        break;
      }
    }
    if (satisfies_sample) solutions.push_back(candidate);
  }
  return solutions;
}

EssentialMatrix EssentialEightPoint(std::span<const NormalizedMatch> sample) {
  const std::size_t n = sample.size();
  if (n < 8) {
    throw InvalidParameterError("eight-point solver needs at least 8 matches");
  }

  // Hartley normalization of both point sets.
  const auto normalizer = [&](bool query) {
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const NormalizedMatch& m : sample) centroid += query ? m.query : m.ref;
    centroid /= static_cast<double>(n);
    double mean_dist = 0.0;
    for (const NormalizedMatch& m : sample)
      mean_dist += ((query ? m.query : m.ref) - centroid).norm();
    mean_dist /= static_cast<double>(n);
    if (!(mean_dist > 0.0)) {
      throw DegenerateSampleError("eight-point: coincident points");
    }
    const double s = std::sqrt(2.0) / mean_dist;
    Eigen::Matrix3d t;
    t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
    return t;
  };
  const Eigen::Matrix3d t_ref = normalizer(false);
  const Eigen::Matrix3d t_query = normalizer(true);

  Eigen::MatrixXd design(std::max<std::size_t>(n, 9), 9);
  design.setZero();
  for (std::size_t i = 0; i < n; ++i) {
    const NormalizedMatch normalized{
        (t_ref * sample[i].ref.homogeneous()).hnormalized(),
        (t_query * sample[i].query.homogeneous()).hnormalized()};
    design.row(static_cast<Eigen::Index>(i)) = EpipolarRow(normalized);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (!(sv(7) > 1e-8 * sv(0))) {
    throw DegenerateSampleError(
        "eight-point: design matrix null space is not one-dimensional");
  }
  const Eigen::Matrix<double, 9, 1> f = svd.matrixV().col(8);
  const Eigen::Matrix3d e =
      t_query.transpose() * ToMatrix(f) * t_ref;

  const Eigen::JacobiSVD<Eigen::Matrix3d> esvd(
      e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d projected = esvd.matrixU() *
                                    Eigen::Vector3d(1, 1, 0).asDiagonal() *
                                    esvd.matrixV().transpose();
  return {projected.normalized()};
}

std::array<RelativeMotion, 4> EssentialCandidates(const EssentialMatrix& e) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      e.matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  if (u.determinant() < 0) u *= -1.0;
  if (v.determinant() < 0) v *= -1.0;
  Eigen::Matrix3d w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Rotation r1(u * w * v.transpose());
  const Rotation r2(u * w.transpose() * v.transpose());
  const Eigen::Vector3d t = u.col(2).normalized();
  return {RelativeMotion{r1, t}, RelativeMotion{r1, -t},
          RelativeMotion{r2, t}, RelativeMotion{r2, -t}};
}

RelativeMotion DecomposeEssential(const EssentialMatrix& e,
                                  std::span<const NormalizedMatch> matches) {
  if (matches.empty()) {
    throw InvalidParameterError("decomposition needs at least one match");
  }
  const std::array<RelativeMotion, 4> candidates = EssentialCandidates(e);
  int best = -1;
  std::size_t best_count = 0;
  double best_margin = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < 4; ++c) {
    const Pose pose = candidates[c].ToPose();
    std::size_t count = 0;
    double margin = 0.0;
    for (const NormalizedMatch& m : matches) {
      const Eigen::Vector3d p = TriangulateMidpoint(pose, m).point;
      const double depth_ref = p.z();
      const double depth_query = pose.Apply(p).z();
      if (depth_ref > 0.0 && depth_query > 0.0) ++count;
      margin += std::min(depth_ref, depth_query);
    }
    margin /= static_cast<double>(matches.size());
    if (count > best_count || (count == best_count && count > 0 &&
                               margin > best_margin)) {
      best = c;
      best_count = count;
      best_margin = margin;
    }
  }
  if (best < 0) {
    throw CheiralityError("no decomposition places points in front");
  }
  return candidates[best];
}

MidpointTriangulation TriangulateMidpoint(const Pose& relative,
                                          const NormalizedMatch& m) {
  const Eigen::Vector3d c2 = CameraCenter(relative);
  if (!(c2.norm() > 1e-12)) {
    throw DegenerateSampleError("triangulation with zero baseline");
  }
  const Eigen::Vector3d d1 = m.ref.homogeneous();
  const Eigen::Vector3d d2 =
      relative.rotation.matrix().transpose() * m.query.homogeneous();
  const Eigen::Vector3d w0 = -c2;
  const double a = d1.dot(d1), b = d1.dot(d2), c = d2.dot(d2);
  const double d = d1.dot(w0), e = d2.dot(w0);
  const double denom = a * c - b * b;

  MidpointTriangulation result;
  double s = 0.0, u = 0.0;
  if (denom > 1e-12 * a * c) {
    s = (b * e - c * d) / denom;
    u = (a * e - b * d) / denom;
  } else {
    result.well_conditioned = false;
    u = e / c;
  }
  result.point = 0.5 * (s * d1 + (c2 + u * d2));
  return result;
}

}  // namespace mapfree
