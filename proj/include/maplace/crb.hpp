// SPDX-License-Identifier: Apache-2.0
//
// Closed-form polar CRBs and the squared position error bound (SPEB), both for
// explicit antenna arrays and for placement distributions described by their
// second-order moment matrix.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>

#include "maplace/errors.hpp"
#include "maplace/geometry.hpp"

namespace maplace {

/// Scalar constants that make up kappa = sigma^2 lambda^2 / (8 pi^2 T P N |beta|^2).
template <typename Scalar>
struct SensingParams {
  Scalar wavelength;
  long snapshots;
  Scalar transmit_power;
  Scalar noise_power;
  Scalar channel_gain_sq;
  long antennas;

  /// Only P|beta|^2/sigma^2 enters kappa, so the SNR is carried in the channel gain.
  static SensingParams from_snr_db(Scalar wavelength, long snapshots, Scalar snr_db, long antennas) {
    SensingParams p{wavelength, snapshots, Scalar(1), Scalar(1), std::pow(Scalar(10), snr_db / 10), antennas};
    p.validate();
    return p;
  }

  void validate() const {
    if (!(wavelength > 0) || snapshots <= 0 || !(transmit_power > 0) || !(noise_power > 0) ||
        !(channel_gain_sq > 0) || antennas <= 0)
      fail(ErrorCode::InvalidArgument, "sensing parameters must all be strictly positive");
  }
};

template <typename Scalar>
Scalar kappa(const SensingParams<Scalar>& p) {
  p.validate();
  const Scalar pi = std::numbers::pi_v<Scalar>;
  return p.noise_power * p.wavelength * p.wavelength /
         (8 * pi * pi * Scalar(p.snapshots) * p.transmit_power * Scalar(p.antennas) * p.channel_gain_sq);
}

/// Covariance of (X, X^2): [[Var(X), Cov(X, X^2)], [Cov(X, X^2), Var(X^2)]].
template <typename Scalar>
class MomentMatrix {
 public:
  using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

  MomentMatrix(Scalar var_x, Scalar cov_x_x2, Scalar var_x2) {
    if (!(var_x >= 0) || !(var_x2 >= 0)) fail(ErrorCode::InvalidArgument, "variances must be nonnegative");
    if (cov_x_x2 * cov_x_x2 > var_x * var_x2 * (1 + Scalar(1e-9)) + std::numeric_limits<Scalar>::min())
      fail(ErrorCode::InvalidArgument, "moment matrix violates Cauchy-Schwarz");
    sigma_ << var_x, cov_x_x2, cov_x_x2, var_x2;
  }

  Scalar var_x() const { return sigma_(0, 0); }
  Scalar cov_x_x2() const { return sigma_(0, 1); }
  Scalar var_x2() const { return sigma_(1, 1); }
  const Matrix2& matrix() const { return sigma_; }

  Scalar determinant() const { return var_x() * var_x2() - cov_x_x2() * cov_x_x2(); }

  MomentMatrix scaled(Scalar c) const { return {c * var_x(), c * cov_x_x2(), c * var_x2()}; }

 private:
  Matrix2 sigma_;
};

/// G1(x), G2(x, x~) and G1(x~) of an array, evaluated with centred sums.
template <typename Scalar>
MomentMatrix<Scalar> sample_moments(const ArrayGeometry<Scalar>& array) {
  const auto& x = array.positions();
  const VectorX<Scalar> x2 = x.array().square().matrix();
  const VectorX<Scalar> dx = (x.array() - x.mean()).matrix();
  const VectorX<Scalar> dx2 = (x2.array() - x2.mean()).matrix();
  const Scalar n = Scalar(x.size());
  return {dx.squaredNorm() / n, dx.dot(dx2) / n, dx2.squaredNorm() / n};
}

namespace detail {

inline constexpr double kEndfireTolerance = 1e-9;
inline constexpr double kDegeneracyTolerance = 1e-14;

template <typename Scalar>
Scalar checked_sin2(Scalar u) {
  const Scalar s2 = 1 - u * u;
  if (s2 < Scalar(kEndfireTolerance)) fail(ErrorCode::EndfireSingularity, "1 - u^2 below 1e-9");
  return s2;
}

// Throws DegenerateGeometry unless G1(x)G1(x~) - G2^2 clears 1e-14 a^6.
template <typename Scalar>
Scalar checked_denominator(const MomentMatrix<Scalar>& m, Scalar half_aperture) {
  const Scalar den = m.determinant();
  const Scalar a2 = half_aperture * half_aperture;
  if (!(den > Scalar(kDegeneracyTolerance) * a2 * a2 * a2))
    fail(ErrorCode::DegenerateGeometry, "G1(x) G1(x~) - G2^2 vanishes for this array");
  return den;
}

/// Precomputed array moments for repeated SPEB evaluation over many sources.
template <typename Scalar>
struct ArraySpeb {
  Scalar kappa;
  Scalar g1x, g2, g1xt, den;

  ArraySpeb(const MomentMatrix<Scalar>& m, Scalar half_aperture, Scalar kappa_value)
      : kappa(kappa_value), g1x(m.var_x()), g2(m.cov_x_x2()), g1xt(m.var_x2()),
        den(checked_denominator(m, half_aperture)) {}

  Scalar crb_u() const { return kappa * g1xt / den; }

  Scalar crb_r(Scalar u, Scalar r) const {
    const Scalar s2 = checked_sin2(u);
    const Scalar num = 4 * r * r * r * r * g1x + 8 * u * r * r * r * g2 + 4 * u * u * r * r * g1xt;
    return kappa * num / (s2 * s2 * den);
  }

  Scalar speb(Scalar u, Scalar r) const {
    const Scalar s2 = checked_sin2(u);
    return r * r / s2 * crb_u() + crb_r(u, r);
  }
};

template <typename Scalar>
void check_antenna_count(const ArrayGeometry<Scalar>& array, const SensingParams<Scalar>& params) {
  if (params.antennas != array.size())
    fail(ErrorCode::InvalidArgument, "sensing parameters were built for a different antenna count");
}

}  // namespace detail

template <typename Scalar>
Scalar crb_u(const ArrayGeometry<Scalar>& array, Scalar kappa_value) {
  return detail::ArraySpeb<Scalar>(sample_moments(array), array.half_aperture(), kappa_value).crb_u();
}

template <typename Scalar>
Scalar crb_r(const ArrayGeometry<Scalar>& array, Scalar kappa_value, const SourcePosition<Scalar>& source) {
  return detail::ArraySpeb<Scalar>(sample_moments(array), array.half_aperture(), kappa_value)
      .crb_r(source.u(), source.r());
}

/// SPEB = r^2/(1-u^2) CRB_u + CRB_r, the trace of the Cartesian CRB.
template <typename Scalar>
Scalar speb(const ArrayGeometry<Scalar>& array, Scalar kappa_value, const SourcePosition<Scalar>& source) {
  return detail::ArraySpeb<Scalar>(sample_moments(array), array.half_aperture(), kappa_value)
      .speb(source.u(), source.r());
}

template <typename Scalar>
Scalar crb_u(const ArrayGeometry<Scalar>& array, const SensingParams<Scalar>& params) {
  detail::check_antenna_count(array, params);
  return crb_u(array, kappa(params));
}

template <typename Scalar>
Scalar crb_r(const ArrayGeometry<Scalar>& array, const SensingParams<Scalar>& params,
             const SourcePosition<Scalar>& source) {
  detail::check_antenna_count(array, params);
  return crb_r(array, kappa(params), source);
}

template <typename Scalar>
Scalar speb(const ArrayGeometry<Scalar>& array, const SensingParams<Scalar>& params,
            const SourcePosition<Scalar>& source) {
  detail::check_antenna_count(array, params);
  return speb(array, kappa(params), source);
}

namespace detail {

/// Inverted moment matrix, reused across sources.
template <typename Scalar>
struct DistributionSpeb {
  Scalar kappa;
  Eigen::Matrix<Scalar, 2, 2> inverse;

  DistributionSpeb(const MomentMatrix<Scalar>& moments, Scalar kappa_value) : kappa(kappa_value) {
    if (!(moments.var_x() > 0) || !(moments.var_x2() > 0) ||
        !(moments.determinant() > Scalar(kDegeneracyTolerance) * moments.var_x() * moments.var_x2()))
      fail(ErrorCode::SingularMoments, "moment matrix is not invertible");
    inverse = moments.matrix().inverse();
  }

  Scalar speb(Scalar u, Scalar r) const {
    const Scalar s2 = checked_sin2(u);
    const Eigen::Matrix<Scalar, 2, 1> v(2 * u * r, -2 * r * r);
    return kappa * (r * r / s2 * inverse(0, 0) + v.dot(inverse * v) / (s2 * s2));
  }
};

}  // namespace detail

/// SPEB of a placement distribution as the quadratic functional
///   kappa [ r^2/(1-u^2) e1' S^-1 e1 + v' S^-1 v / (1-u^2)^2 ],  v = (2ur, -2r^2),
/// with S the moment matrix.
template <typename Scalar>
Scalar speb_distribution(const MomentMatrix<Scalar>& moments, Scalar kappa_value,
                         const SourcePosition<Scalar>& source) {
  return detail::DistributionSpeb<Scalar>(moments, kappa_value).speb(source.u(), source.r());
}

template <typename Scalar>
Scalar speb_distribution(const MomentMatrix<Scalar>& moments, const SensingParams<Scalar>& params,
                         const SourcePosition<Scalar>& source) {
  return speb_distribution(moments, kappa(params), source);
}

using SensingParamsd = SensingParams<double>;
using MomentMatrixd = MomentMatrix<double>;

}  // namespace maplace
