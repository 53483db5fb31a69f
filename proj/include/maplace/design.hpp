// SPDX-License-Identifier: Apache-2.0
//
// Placement distributions on [-a, a], the three-point optimum on {-a, 0, a},
// and the finite-N geometries built from it (plus the baseline arrays).
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "maplace/crb.hpp"
#include "maplace/errors.hpp"
#include "maplace/geometry.hpp"

namespace maplace {

/// Probability mass over distinct candidate locations in [-a, a], sorted by location.
template <typename Scalar>
class PlacementDistribution {
 public:
  PlacementDistribution(VectorX<Scalar> support, VectorX<Scalar> weights, Scalar half_aperture)
      : support_(std::move(support)), weights_(std::move(weights)), half_aperture_(half_aperture) {
    if (!(half_aperture_ > 0)) fail(ErrorCode::InvalidArgument, "half aperture must be positive");
    if (support_.size() == 0 || support_.size() != weights_.size())
      fail(ErrorCode::InvalidArgument, "support and weights must be nonempty and of equal length");
    if ((weights_.array() < 0).any()) fail(ErrorCode::InvalidArgument, "weights must be nonnegative");
    if (std::abs(weights_.sum() - 1) > Scalar(1e-12)) fail(ErrorCode::InvalidArgument, "weights must sum to 1");
    if ((support_.array().abs() > half_aperture_ * (1 + Scalar(1e-12))).any())
      fail(ErrorCode::InvalidArgument, "support must lie in [-a, a]");

    std::vector<Eigen::Index> order(std::size_t(support_.size()));
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return support_[i] < support_[j]; });
    VectorX<Scalar> s(support_.size()), w(weights_.size());
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      s[k] = support_[order[std::size_t(k)]];
      w[k] = weights_[order[std::size_t(k)]];
      if (k > 0 && !(s[k] > s[k - 1])) fail(ErrorCode::InvalidArgument, "support points must be distinct");
    }
    support_ = std::move(s);
    weights_ = std::move(w);
  }

  /// Empirical distribution of an array: mass 1/N on every antenna.
  static PlacementDistribution from_array(const ArrayGeometry<Scalar>& array) {
    return {array.positions(), VectorX<Scalar>::Constant(array.size(), Scalar(1) / Scalar(array.size())),
            array.half_aperture()};
  }

  const VectorX<Scalar>& support() const { return support_; }
  const VectorX<Scalar>& weights() const { return weights_; }
  Scalar half_aperture() const { return half_aperture_; }

  /// E[X^k].
  Scalar raw_moment(int k) const { return weights_.dot(support_.array().pow(Scalar(k)).matrix()); }
  Scalar m2() const { return weights_.dot(support_.array().square().matrix()); }
  Scalar m4() const { return weights_.dot(support_.array().square().square().matrix()); }

  MomentMatrix<Scalar> moments() const {
    const VectorX<Scalar> x2 = support_.array().square().matrix();
    const VectorX<Scalar> dx = (support_.array() - weights_.dot(support_)).matrix();
    const VectorX<Scalar> dx2 = (x2.array() - weights_.dot(x2)).matrix();
    return {weights_.dot(dx.cwiseProduct(dx)), weights_.dot(dx.cwiseProduct(dx2)),
            weights_.dot(dx2.cwiseProduct(dx2))};
  }

  bool is_symmetric(Scalar rel_tol = Scalar(1e-12)) const {
    const Eigen::Index n = support_.size();
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::abs(support_[k] + support_[n - 1 - k]) > rel_tol * half_aperture_) return false;
      if (std::abs(weights_[k] - weights_[n - 1 - k]) > rel_tol) return false;
    }
    return true;
  }

 private:
  VectorX<Scalar> support_;
  VectorX<Scalar> weights_;
  Scalar half_aperture_;
};

/// Mixture of w and its reflection: w_sym(z) = (w(z) + w(-z)) / 2.
///
/// Points whose mirror images agree to 1e-12 a are merged onto one exact
/// +/- pair so that odd moments cancel.
template <typename Scalar>
PlacementDistribution<Scalar> symmetrize(const PlacementDistribution<Scalar>& dist) {
  const Scalar tol = Scalar(1e-12) * dist.half_aperture();
  std::vector<std::pair<Scalar, Scalar>> magnitudes;  // |z|, total mass at +/-|z|
  for (Eigen::Index k = 0; k < dist.support().size(); ++k) {
    const Scalar m = std::abs(dist.support()[k]);
    auto it = std::find_if(magnitudes.begin(), magnitudes.end(),
                           [&](const auto& e) { return std::abs(e.first - m) <= tol; });
    if (it == magnitudes.end())
      magnitudes.emplace_back(m, dist.weights()[k]);
    else
      it->second += dist.weights()[k];
  }
  std::vector<Scalar> support, weights;
  for (const auto& [m, w] : magnitudes) {
    if (m <= tol) {
      support.push_back(Scalar(0));
      weights.push_back(w);
    } else {
      support.push_back(m);
      weights.push_back(w / 2);
      support.push_back(-m);
      weights.push_back(w / 2);
    }
  }
  using Map = Eigen::Map<const VectorX<Scalar>>;
  return {Map(support.data(), Eigen::Index(support.size())), Map(weights.data(), Eigen::Index(weights.size())),
          dist.half_aperture()};
}

/// 256 (a / lambda)^2 = 4 d_R,max^2 / a^2.
template <typename Scalar>
Scalar gamma_param(Scalar half_aperture, Scalar wavelength) {
  const Scalar ratio = half_aperture / wavelength;
  return 256 * ratio * ratio;
}

/// Minimiser of 1/q + gamma/(q(1-q)) on (0, 1]:
///   q* = 1 + gamma - sqrt(gamma (1 + gamma)),
/// evaluated in the cancellation-free form (1+gamma) / (1+gamma + sqrt(gamma(1+gamma))).
template <typename Scalar>
Scalar optimal_q(Scalar gamma) {
  if (!(gamma >= 0)) fail(ErrorCode::InvalidArgument, "gamma must be nonnegative");
  const Scalar s = 1 + gamma;
  return s / (s + std::sqrt(gamma * s));
}

/// Masses (q/2, 1-q, q/2) on {-a, 0, a}.
template <typename Scalar>
struct ThreePointDesign {
  Scalar half_aperture;
  Scalar edge_mass;

  Scalar var_x() const { return edge_mass * half_aperture * half_aperture; }
  Scalar var_x2() const {
    const Scalar a2 = half_aperture * half_aperture;
    return edge_mass * (1 - edge_mass) * a2 * a2;
  }
  MomentMatrix<Scalar> moments() const { return {var_x(), Scalar(0), var_x2()}; }

  PlacementDistribution<Scalar> distribution() const {
    VectorX<Scalar> s(3), w(3);
    s << -half_aperture, 0, half_aperture;
    w << edge_mass / 2, 1 - edge_mass, edge_mass / 2;
    return {s, w, half_aperture};
  }
};

/// Optimal three-point design; `asymptotic` pins q = 1/2, i.e. masses (0.25, 0.5, 0.25).
template <typename Scalar>
ThreePointDesign<Scalar> three_point_design(Scalar half_aperture, Scalar wavelength, bool asymptotic = false) {
  if (!(half_aperture > 0) || !(wavelength > 0))
    fail(ErrorCode::InvalidArgument, "half aperture and wavelength must be positive");
  return {half_aperture, asymptotic ? Scalar(0.5) : optimal_q(gamma_param(half_aperture, wavelength))};
}

/// Moment-matching three-point measure on {-s, 0, s}: s = sqrt(m4/m2), edge mass m2^2/m4.
template <typename Scalar>
PlacementDistribution<Scalar> tchakaloff_reduce(const PlacementDistribution<Scalar>& dist) {
  if (!dist.is_symmetric(Scalar(1e-9))) fail(ErrorCode::InvalidArgument, "tchakaloff_reduce needs a symmetric input");
  const Scalar a = dist.half_aperture();
  const Scalar m2 = dist.m2();
  const Scalar m4 = dist.m4();
  if (!(m2 > 0)) fail(ErrorCode::InvalidArgument, "second moment must be positive");
  Scalar s = std::sqrt(m4 / m2);
  if (s > a * (1 + Scalar(1e-12)))
    fail(ErrorCode::SupportOverflow, "sqrt(m4/m2) exceeds the half aperture");
  s = std::min(s, a);  // rounding only
  // centre mass 1 - m2^2/m4 = Var(X^2)/m4, taken from the centred variance
  const Scalar center = std::clamp(dist.moments().var_x2() / m4, Scalar(0), Scalar(1));
  const Scalar q = 1 - center;

  std::vector<Scalar> support{-s, s}, weights{q / 2, q / 2};
  if (center > 0) {
    support.insert(support.begin() + 1, Scalar(0));
    weights.insert(weights.begin() + 1, center);
  }
  using Map = Eigen::Map<const VectorX<Scalar>>;
  return {Map(support.data(), Eigen::Index(support.size())), Map(weights.data(), Eigen::Index(weights.size())), a};
}

struct ClusterSizes {
  long left;
  long center;
  long right;
};

/// round(edge_fraction N) antennas per edge, the rest at the centre. Rounds half away from zero.
inline ClusterSizes deployment_clusters(long n, double edge_fraction = 0.25) {
  if (n < 3) fail(ErrorCode::InvalidArgument, "discrete deployment needs at least three antennas");
  if (!(edge_fraction >= 0 && edge_fraction <= 0.5)) fail(ErrorCode::InvalidArgument, "edge fraction must lie in [0, 1/2]");
  const long side = std::lround(edge_fraction * double(n));
  return {side, n - 2 * side, side};
}

namespace detail {

template <typename Scalar>
void require_fits(long n, Scalar half_aperture, Scalar wavelength) {
  if (!(half_aperture > 0) || !(wavelength > 0))
    fail(ErrorCode::InvalidArgument, "half aperture and wavelength must be positive");
  if (Scalar(n - 1) * wavelength / 2 > 2 * half_aperture * (1 + Scalar(1e-12)))
    fail(ErrorCode::InfeasibleAperture,
         std::to_string(n) + " antennas at lambda/2 spacing do not fit in the aperture");
}

template <typename Scalar>
ArrayGeometry<Scalar> make_array(std::vector<Scalar> positions, Scalar half_aperture, Scalar wavelength) {
  std::sort(positions.begin(), positions.end());
  return ArrayGeometry<Scalar>(positions, half_aperture, wavelength);
}

}  // namespace detail

/// Three clusters at lambda/2 pitch: edge clusters anchored at -a and +a growing
/// inward, centre cluster symmetric about 0 (one element at 0 when odd,
/// straddling 0 at +/- lambda/4 when even).
template <typename Scalar>
ArrayGeometry<Scalar> discrete_deployment(long n, Scalar half_aperture, Scalar wavelength,
                                          double edge_fraction = 0.25) {
  const ClusterSizes c = deployment_clusters(n, edge_fraction);
  detail::require_fits(n, half_aperture, wavelength);
  const Scalar a = half_aperture;
  const Scalar d = wavelength / 2;
  const Scalar slack = Scalar(1e-9) * wavelength;

  const Scalar edge_inner = -a + Scalar(c.left - 1) * d;
  const Scalar center_outer = Scalar(c.center - 1) * d / 2;
  if (c.center > 0 && c.left > 0 && -center_outer - edge_inner < d - slack)
    fail(ErrorCode::InfeasibleAperture, "edge and centre clusters overlap");
  if (c.center == 0 && c.left > 0 && -2 * edge_inner < d - slack)
    fail(ErrorCode::InfeasibleAperture, "edge clusters overlap");
  if (center_outer > a) fail(ErrorCode::InfeasibleAperture, "centre cluster exceeds the aperture");

  std::vector<Scalar> x;
  x.reserve(std::size_t(n));
  for (long k = 0; k < c.left; ++k) {
    x.push_back(-a + Scalar(k) * d);
    x.push_back(a - Scalar(k) * d);
  }
  for (long k = 0; k < c.center; ++k) x.push_back((Scalar(2 * k) - Scalar(c.center - 1)) * d / 2);
  return detail::make_array(std::move(x), a, wavelength);
}

/// Half-wavelength ULA centred in the aperture.
template <typename Scalar>
ArrayGeometry<Scalar> baseline_ula(long n, Scalar wavelength, Scalar half_aperture) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "an array needs at least two antennas");
  detail::require_fits(n, half_aperture, wavelength);
  std::vector<Scalar> x;
  for (long k = 0; k < n; ++k) x.push_back((Scalar(2 * k) - Scalar(n - 1)) * wavelength / 4);
  return detail::make_array(std::move(x), half_aperture, wavelength);
}

/// Uniform array stretched over [-a, a].
template <typename Scalar>
ArrayGeometry<Scalar> baseline_sparse_ula(long n, Scalar half_aperture, Scalar wavelength) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "an array needs at least two antennas");
  if (!(half_aperture > 0) || !(wavelength > 0))
    fail(ErrorCode::InvalidArgument, "half aperture and wavelength must be positive");
  const Scalar pitch = 2 * half_aperture / Scalar(n - 1);
  if (pitch < wavelength / 2 * (1 - Scalar(1e-12)))
    fail(ErrorCode::SpacingViolation, "stretched pitch is below lambda/2");
  std::vector<Scalar> x;
  for (long k = 0; k < n; ++k) x.push_back(half_aperture * (Scalar(2 * k) - Scalar(n - 1)) / Scalar(n - 1));
  return detail::make_array(std::move(x), half_aperture, wavelength);
}

/// Two lambda/2-pitch clusters anchored at -a and +a; an odd extra antenna joins the left cluster.
template <typename Scalar>
ArrayGeometry<Scalar> baseline_two_edge(long n, Scalar half_aperture, Scalar wavelength) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "an array needs at least two antennas");
  detail::require_fits(n, half_aperture, wavelength);
  const long left = (n + 1) / 2;
  const long right = n / 2;
  const Scalar a = half_aperture;
  const Scalar d = wavelength / 2;
  const Scalar left_inner = -a + Scalar(left - 1) * d;
  const Scalar right_inner = a - Scalar(right - 1) * d;
  if (right_inner - left_inner < d * (1 - Scalar(1e-9)))
    fail(ErrorCode::InfeasibleAperture, "edge clusters overlap");
  std::vector<Scalar> x;
  for (long k = 0; k < left; ++k) x.push_back(-a + Scalar(k) * d);
  for (long k = 0; k < right; ++k) x.push_back(a - Scalar(k) * d);
  return detail::make_array(std::move(x), a, wavelength);
}

using PlacementDistributiond = PlacementDistribution<double>;
using ThreePointDesignd = ThreePointDesign<double>;

}  // namespace maplace
