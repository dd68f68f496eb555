#pragma once

namespace dvpp::tol {

/// Roots with |Re| <= hurwitz are marginal: neither stable nor strictly RHP.
inline constexpr double hurwitz = 1e-9;

/// Pole/zero pairs cancel only when |p - z| < cancellation * max(1, |p|).
inline constexpr double cancellation = 1e-8;

/// Eigenvalues closer than this (relative) are merged into one multiple root.
/// A double root computed from a companion matrix scatters by ~sqrt(eps).
inline constexpr double root_cluster = 1e-5;

/// Leading/constant coefficients below chop * max|coeff| are treated as zero.
inline constexpr double chop = 1e-13;

/// Imaginary parts below this (relative) are snapped to the real axis.
inline constexpr double real_axis = 1e-9;

}  // namespace dvpp::tol
