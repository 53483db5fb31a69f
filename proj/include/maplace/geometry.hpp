// SPDX-License-Identifier: Apache-2.0
//
// Linear array geometry, source coordinates and the radiating near-field
// region bounded by the Fresnel and Rayleigh distances.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "maplace/errors.hpp"

namespace maplace {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Antenna coordinates on the x-axis, strictly increasing, inside [-a, a].
template <typename Scalar>
class ArrayGeometry {
 public:
  ArrayGeometry(VectorX<Scalar> positions, Scalar half_aperture, Scalar wavelength)
      : positions_(std::move(positions)), half_aperture_(half_aperture), wavelength_(wavelength) {
    if (!(half_aperture_ > 0) || !(wavelength_ > 0))
      fail(ErrorCode::InvalidArgument, "half aperture and wavelength must be positive");
    if (positions_.size() < 2)
      fail(ErrorCode::InvalidArgument, "an array needs at least two antennas");
    const Scalar slack = Scalar(1e-12) * half_aperture_;
    for (Eigen::Index n = 0; n < positions_.size(); ++n) {
      if (!std::isfinite(static_cast<double>(positions_[n])) || std::abs(positions_[n]) > half_aperture_ + slack)
        fail(ErrorCode::InvalidArgument, "antenna " + std::to_string(n) + " lies outside [-a, a]");
      if (n > 0 && !(positions_[n] > positions_[n - 1]))
        fail(ErrorCode::InvalidArgument, "antenna positions must be strictly increasing");
    }
  }

  ArrayGeometry(const std::vector<Scalar>& positions, Scalar half_aperture, Scalar wavelength)
      : ArrayGeometry(Eigen::Map<const VectorX<Scalar>>(positions.data(), Eigen::Index(positions.size())),
                      half_aperture, wavelength) {}

  const VectorX<Scalar>& positions() const { return positions_; }
  Scalar half_aperture() const { return half_aperture_; }
  Scalar aperture() const { return 2 * half_aperture_; }
  Scalar wavelength() const { return wavelength_; }
  Eigen::Index size() const { return positions_.size(); }

  /// Smallest gap between adjacent antennas.
  Scalar min_spacing() const {
    return (positions_.tail(size() - 1) - positions_.head(size() - 1)).minCoeff();
  }

  /// Index of the first adjacent pair closer than `spacing`, or -1.
  Eigen::Index first_spacing_violation(Scalar spacing, Scalar rel_tol = Scalar(1e-9)) const {
    for (Eigen::Index n = 1; n < size(); ++n)
      if (positions_[n] - positions_[n - 1] < spacing * (1 - rel_tol)) return n - 1;
    return -1;
  }

 private:
  VectorX<Scalar> positions_;
  Scalar half_aperture_;
  Scalar wavelength_;
};

/// Source location stored in polar form (u = cos(theta), r).
template <typename Scalar>
class SourcePosition {
 public:
  SourcePosition(Scalar u, Scalar r) : u_(u), r_(r) {
    if (!(std::abs(u_) < 1)) fail(ErrorCode::DomainError, "|u| must be strictly below 1");
    if (!(r_ > 0)) fail(ErrorCode::DomainError, "range must be positive");
  }

  Scalar u() const { return u_; }
  Scalar r() const { return r_; }
  Scalar p1() const { return r_ * u_; }
  Scalar p2() const { return r_ * std::sqrt(1 - u_ * u_); }

  bool operator==(const SourcePosition&) const = default;

 private:
  Scalar u_;
  Scalar r_;
};

template <typename Scalar>
Scalar effective_aperture(Scalar half_aperture, Scalar u) {
  return 2 * half_aperture * std::sqrt(std::max(Scalar(0), 1 - u * u));
}

/// 2 D_eff^2 / lambda, i.e. the broadside Rayleigh distance scaled by (1 - u^2).
template <typename Scalar>
Scalar rayleigh_distance(Scalar half_aperture, Scalar wavelength, Scalar u) {
  const Scalar d = 2 * half_aperture;
  return 2 * d * d * std::max(Scalar(0), 1 - u * u) / wavelength;
}

template <typename Scalar>
Scalar fresnel_distance(Scalar half_aperture, Scalar wavelength, Scalar u) {
  const Scalar d_eff = effective_aperture(half_aperture, u);
  return Scalar(0.62) * std::sqrt(d_eff * d_eff * d_eff / wavelength);
}

template <typename Scalar>
Scalar exact_distance(Scalar x, const SourcePosition<Scalar>& source) {
  const Scalar r = source.r();
  return std::sqrt(r * r - 2 * r * source.u() * x + x * x);
}

/// Fresnel-approximated array manifold with the common range phase removed.
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> steering_vector(const ArrayGeometry<Scalar>& array,
                                                                      const SourcePosition<Scalar>& source) {
  const Scalar k = 2 * std::numbers::pi_v<Scalar> / array.wavelength();
  const Scalar u = source.u();
  const Scalar curvature = (1 - u * u) / (2 * source.r());
  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> out(array.size());
  for (Eigen::Index n = 0; n < array.size(); ++n) {
    const Scalar x = array.positions()[n];
    out[n] = std::polar(Scalar(1), k * (u * x - curvature * x * x));
  }
  return out;
}

template <typename Scalar>
std::pair<Scalar, Scalar> polar_to_cartesian(Scalar u, Scalar r) {
  const SourcePosition<Scalar> s(u, r);
  return {s.p1(), s.p2()};
}

template <typename Scalar>
std::pair<Scalar, Scalar> cartesian_to_polar(Scalar p1, Scalar p2) {
  if (!(p2 > 0)) fail(ErrorCode::DomainError, "source must lie strictly in front of the array (p2 > 0)");
  const Scalar r = std::hypot(p1, p2);
  return {p1 / r, r};
}

/// Fresnel-to-Rayleigh region of an aperture, with |u| capped at u_max.
template <typename Scalar>
class NearFieldRegion {
 public:
  NearFieldRegion(Scalar half_aperture, Scalar wavelength, Scalar u_max = Scalar(0.999))
      : half_aperture_(half_aperture), wavelength_(wavelength), u_max_(u_max) {
    if (!(half_aperture_ > 0) || !(wavelength_ > 0))
      fail(ErrorCode::InvalidArgument, "half aperture and wavelength must be positive");
    if (!(u_max_ >= 0 && u_max_ < 1)) fail(ErrorCode::InvalidArgument, "u_max must lie in [0, 1)");
    if (!admissible(Scalar(0)))
      fail(ErrorCode::InvalidArgument, "aperture too small: Fresnel distance exceeds Rayleigh distance at broadside");
  }

  Scalar half_aperture() const { return half_aperture_; }
  Scalar wavelength() const { return wavelength_; }
  Scalar u_max() const { return u_max_; }

  Scalar fresnel(Scalar u) const { return fresnel_distance(half_aperture_, wavelength_, u); }
  Scalar rayleigh(Scalar u) const { return rayleigh_distance(half_aperture_, wavelength_, u); }
  Scalar max_rayleigh() const { return rayleigh(Scalar(0)); }

  /// Angular samples with an empty radial interval are not part of the region.
  bool admissible(Scalar u) const { return std::abs(u) <= u_max_ && fresnel(u) < rayleigh(u); }

  bool contains(const SourcePosition<Scalar>& s) const {
    return admissible(s.u()) && fresnel(s.u()) <= s.r() && s.r() <= rayleigh(s.u());
  }

 private:
  Scalar half_aperture_;
  Scalar wavelength_;
  Scalar u_max_;
};

template <typename Scalar>
bool region_contains(const NearFieldRegion<Scalar>& region, const SourcePosition<Scalar>& source) {
  return region.contains(source);
}

using ArrayGeometryd = ArrayGeometry<double>;
using SourcePositiond = SourcePosition<double>;
using NearFieldRegiond = NearFieldRegion<double>;

}  // namespace maplace
