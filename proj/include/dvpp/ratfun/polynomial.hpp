#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>

#include "dvpp/ratfun/tolerances.hpp"

namespace dvpp {

/// Real polynomial in s, coefficients stored in ascending powers
/// (coeffs()[k] multiplies s^k). The zero polynomial has no coefficients.
template <typename Scalar>
class Polynomial {
 public:
  using Coeffs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Complex = std::complex<Scalar>;

  Polynomial() = default;
  explicit Polynomial(Coeffs coeffs) : coeffs_(std::move(coeffs)) { trim(); }
  Polynomial(std::initializer_list<Scalar> ascending)
      : coeffs_(static_cast<Eigen::Index>(ascending.size())) {
    std::copy(ascending.begin(), ascending.end(), coeffs_.data());
    trim();
  }

  static Polynomial constant(Scalar c) { return Polynomial{c}; }
  static Polynomial s() { return Polynomial{Scalar(0), Scalar(1)}; }

  /// a*s + b
  static Polynomial linear(Scalar a, Scalar b) { return Polynomial{b, a}; }

  const Coeffs& coeffs() const { return coeffs_; }
  Scalar operator[](Eigen::Index k) const {
    return k < coeffs_.size() ? coeffs_[k] : Scalar(0);
  }

  bool is_zero() const { return coeffs_.size() == 0; }
  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  Scalar leading() const { return is_zero() ? Scalar(0) : coeffs_[coeffs_.size() - 1]; }

  Scalar max_abs_coeff() const {
    return is_zero() ? Scalar(0) : coeffs_.cwiseAbs().maxCoeff();
  }

  /// Number of factors of s, i.e. leading zeros in the ascending coefficients.
  int origin_multiplicity() const {
    int k = 0;
    while (k < coeffs_.size() && coeffs_[k] == Scalar(0)) ++k;
    return is_zero() ? 0 : k;
  }

  Scalar operator()(Scalar x) const {
    Scalar acc(0);
    for (Eigen::Index k = coeffs_.size() - 1; k >= 0; --k) acc = acc * x + coeffs_[k];
    return acc;
  }

  Complex operator()(Complex x) const {
    Complex acc(0);
    for (Eigen::Index k = coeffs_.size() - 1; k >= 0; --k) acc = acc * x + coeffs_[k];
    return acc;
  }

  /// sum_k |c_k| |x|^k, the scale against which evaluation round-off is judged.
  Scalar magnitude_bound(Scalar abs_x) const {
    Scalar acc(0);
    for (Eigen::Index k = coeffs_.size() - 1; k >= 0; --k)
      acc = acc * abs_x + std::abs(coeffs_[k]);
    return acc;
  }

  Polynomial derivative() const {
    if (coeffs_.size() <= 1) return {};
    Coeffs d(coeffs_.size() - 1);
    for (Eigen::Index k = 1; k < coeffs_.size(); ++k) d[k - 1] = Scalar(k) * coeffs_[k];
    return Polynomial(std::move(d));
  }

  /// Divide out s^k (exact when the k lowest coefficients are zero).
  Polynomial shift_down(int k) const {
    if (k <= 0 || is_zero()) return *this;
    if (k > degree()) return {};
    return Polynomial(Coeffs(coeffs_.tail(coeffs_.size() - k)));
  }

  /// Zero leading and constant coefficients that are round-off relative to
  /// the largest coefficient. Interior coefficients are never touched.
  Polynomial chopped(Scalar rel = Scalar(tol::chop)) const {
    if (is_zero()) return {};
    Coeffs c = coeffs_;
    const Scalar thresh = rel * c.cwiseAbs().maxCoeff();
    if (std::abs(c[0]) <= thresh) c[0] = Scalar(0);
    Eigen::Index n = c.size();
    while (n > 0 && std::abs(c[n - 1]) <= thresh) --n;
    return Polynomial(Coeffs(c.head(n)));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    const Eigen::Index n = std::max(a.coeffs_.size(), b.coeffs_.size());
    Coeffs c = Coeffs::Zero(n);
    c.head(a.coeffs_.size()) += a.coeffs_;
    c.head(b.coeffs_.size()) += b.coeffs_;
    return Polynomial(std::move(c));
  }

  friend Polynomial operator-(const Polynomial& a) { return Polynomial(Coeffs(-a.coeffs_)); }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    Coeffs c = Coeffs::Zero(a.coeffs_.size() + b.coeffs_.size() - 1);
    for (Eigen::Index i = 0; i < a.coeffs_.size(); ++i)
      c.segment(i, b.coeffs_.size()) += a.coeffs_[i] * b.coeffs_;
    return Polynomial(std::move(c));
  }

  friend Polynomial operator*(Scalar k, const Polynomial& p) {
    if (k == Scalar(0)) return {};
    return Polynomial(Coeffs(k * p.coeffs_));
  }
  friend Polynomial operator*(const Polynomial& p, Scalar k) { return k * p; }
  friend Polynomial operator/(const Polynomial& p, Scalar k) { return (Scalar(1) / k) * p; }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.coeffs_.size() == b.coeffs_.size() && a.coeffs_ == b.coeffs_;
  }

  /// Polynomial with the given real roots and leading coefficient.
  template <typename Range>
  static Polynomial from_real_roots(const Range& roots, Scalar lead = Scalar(1)) {
    Polynomial p = constant(lead);
    for (Scalar r : roots) p = p * linear(Scalar(1), -r);
    return p;
  }

 private:
  void trim() {
    Eigen::Index n = coeffs_.size();
    while (n > 0 && coeffs_[n - 1] == Scalar(0)) --n;
    if (n != coeffs_.size()) coeffs_.conservativeResize(n);
  }

  Coeffs coeffs_;
};

/// Quotient of p / (s - r) by synthetic division; the remainder is dropped.
/// Forward recurrence for |r| <= 1, backward otherwise, so the deflation is
/// stable for both small and large roots.
template <typename Scalar>
Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> deflate(
    const Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>& a, std::complex<Scalar> r) {
  using CVec = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
  const Eigen::Index n = a.size() - 1;
  if (n <= 0) return CVec();
  CVec q(n);
  if (std::abs(r) <= Scalar(1)) {
    q[n - 1] = a[n];
    for (Eigen::Index k = n - 1; k >= 1; --k) q[k - 1] = a[k] + r * q[k];
  } else {
    q[0] = -a[0] / r;
    for (Eigen::Index k = 1; k < n; ++k) q[k] = (q[k - 1] - a[k]) / r;
  }
  return q;
}

/// Remove the factor (s - r), or (s - r)(s - conj r) for complex r, from p.
template <typename Scalar>
Polynomial<Scalar> deflate(const Polynomial<Scalar>& p, std::complex<Scalar> r) {
  using CVec = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
  if (p.degree() < 1) return p;
  CVec a = p.coeffs().template cast<std::complex<Scalar>>();
  const bool pair = std::abs(r.imag()) > Scalar(0);
  a = deflate<Scalar>(a, r);
  if (pair && a.size() > 1) a = deflate<Scalar>(a, std::conj(r));
  return Polynomial<Scalar>(typename Polynomial<Scalar>::Coeffs(a.real()));
}

}  // namespace dvpp
