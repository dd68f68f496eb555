#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "dvpp/error.hpp"
#include "dvpp/ratfun/polynomial.hpp"
#include "dvpp/ratfun/roots.hpp"
#include "dvpp/ratfun/tolerances.hpp"

namespace dvpp {

/// num(s)/den(s) in normalized form: den is monic, common factors of s are
/// divided out, and the zero function is 0/1. Construction never cancels
/// other common roots; the arithmetic operators do (see cancel_common_roots).
template <typename Scalar>
class RationalFunction {
 public:
  using Poly = Polynomial<Scalar>;
  using Complex = std::complex<Scalar>;

  RationalFunction() : num_(), den_(Poly::constant(Scalar(1))) {}
  RationalFunction(Scalar k) : num_(Poly::constant(k)), den_(Poly::constant(Scalar(1))) {}
  RationalFunction(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
    normalize();
  }

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }

  bool is_zero() const { return num_.is_zero(); }
  bool is_proper() const { return num_.degree() <= den_.degree(); }
  bool is_strictly_proper() const { return num_.degree() < den_.degree(); }
  /// Relative degree deg(den) - deg(num); negative when improper.
  int relative_degree() const { return den_.degree() - std::max(num_.degree(), 0); }

  Complex operator()(Complex s) const { return num_(s) / den_(s); }
  Scalar operator()(Scalar s) const { return num_(s) / den_(s); }

 private:
  void normalize() {
    if (den_.is_zero())
      throw Error(ErrorCode::DivisionByZeroTF, "denominator is the zero polynomial");
    num_ = num_.chopped();
    den_ = den_.chopped();
    if (num_.is_zero()) {
      den_ = Poly::constant(Scalar(1));
      return;
    }
    const int common = std::min(num_.origin_multiplicity(), den_.origin_multiplicity());
    num_ = num_.shift_down(common);
    den_ = den_.shift_down(common);
    const Scalar lead = den_.leading();
    num_ = num_ / lead;
    den_ = den_ / lead;
  }

  Poly num_;
  Poly den_;
};

using Complexd = std::complex<double>;

// ---------------------------------------------------------------------------
// Roots and classification

template <typename Scalar>
RootSet<Scalar> poles(const RationalFunction<Scalar>& a) {
  return find_roots(a.den());
}

template <typename Scalar>
RootSet<Scalar> zeros(const RationalFunction<Scalar>& a) {
  return find_roots(a.num());
}

/// All poles strictly left of -eps. Marginal poles make this false.
template <typename Scalar>
bool is_stable(const RationalFunction<Scalar>& a) {
  return poles(a).all_in(HalfPlane::Left);
}

/// Stable and no zero with Re > +eps. Zeros at the origin are admitted as
/// the minimum-phase boundary.
template <typename Scalar>
bool is_minimum_phase(const RationalFunction<Scalar>& a) {
  if (!is_stable(a)) return false;
  return zeros(a).in(HalfPlane::Right).empty();
}

// ---------------------------------------------------------------------------
// Cancellation

namespace detail {

template <typename Scalar>
bool roots_coincide(std::complex<Scalar> p, std::complex<Scalar> z) {
  return std::abs(p - z) < Scalar(tol::cancellation) * std::max(Scalar(1), std::abs(p));
}

/// Factors (as root + count) that appear in both root sets within the
/// cancellation tolerance. Complex pairs are reported once, by the member
/// with positive imaginary part.
template <typename Scalar>
std::vector<Root<Scalar>> shared_factors(const RootSet<Scalar>& a, const RootSet<Scalar>& b) {
  std::vector<Root<Scalar>> out;
  std::vector<int> left;
  for (const auto& r : b) left.push_back(r.multiplicity);
  for (const auto& ra : a) {
    if (ra.value.imag() < Scalar(0)) continue;
    for (std::size_t j = 0; j < b.roots().size(); ++j) {
      const auto& rb = b.roots()[j];
      if (left[j] == 0 || rb.value.imag() < Scalar(0)) continue;
      if (!roots_coincide(rb.value, ra.value)) continue;
      const int m = std::min(ra.multiplicity, left[j]);
      left[j] -= m;
      out.push_back({rb.value, m});
      break;
    }
  }
  return out;
}

template <typename Scalar>
Polynomial<Scalar> remove_factors(Polynomial<Scalar> p, const std::vector<Root<Scalar>>& f) {
  for (const auto& r : f)
    for (int k = 0; k < r.multiplicity; ++k) p = deflate(p, r.value);
  return p;
}

}  // namespace detail

/// Build num/den and divide out every root shared by num and den within the
/// cancellation tolerance.
template <typename Scalar>
RationalFunction<Scalar> cancel_common_roots(const Polynomial<Scalar>& num,
                                             const Polynomial<Scalar>& den) {
  RationalFunction<Scalar> raw(num, den);
  if (raw.is_zero() || raw.num().degree() < 1 || raw.den().degree() < 1) return raw;
  if (raw.num().degree() == raw.den().degree()) {
    // num = k den: every root is shared, and deflation would only add noise.
    const Scalar k = raw.num().leading() / raw.den().leading();
    const Polynomial<Scalar> diff = raw.num() - k * raw.den();
    if (diff.is_zero() || diff.max_abs_coeff() <= Scalar(tol::chop) * raw.num().max_abs_coeff())
      return RationalFunction<Scalar>(k);
  }
  const auto shared = detail::shared_factors(find_roots(raw.num()), find_roots(raw.den()));
  if (shared.empty()) return raw;
  return RationalFunction<Scalar>(detail::remove_factors(raw.num(), shared),
                                  detail::remove_factors(raw.den(), shared));
}

template <typename Scalar>
RationalFunction<Scalar> minimal(const RationalFunction<Scalar>& a) {
  return cancel_common_roots(a.num(), a.den());
}

// ---------------------------------------------------------------------------
// Algebra

template <typename Scalar>
RationalFunction<Scalar> operator+(const RationalFunction<Scalar>& a,
                                   const RationalFunction<Scalar>& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.den() == b.den()) return cancel_common_roots(a.num() + b.num(), a.den());
  // Sum over the least common denominator so shared poles are not squared.
  const auto shared = detail::shared_factors(find_roots(a.den()), find_roots(b.den()));
  const auto a_rest = detail::remove_factors(a.den(), shared);
  const auto b_rest = detail::remove_factors(b.den(), shared);
  return cancel_common_roots(a.num() * b_rest + b.num() * a_rest, a.den() * b_rest);
}

template <typename Scalar>
RationalFunction<Scalar> operator-(const RationalFunction<Scalar>& a) {
  return RationalFunction<Scalar>(-a.num(), a.den());
}

template <typename Scalar>
RationalFunction<Scalar> operator-(const RationalFunction<Scalar>& a,
                                   const RationalFunction<Scalar>& b) {
  return a + (-b);
}

template <typename Scalar>
RationalFunction<Scalar> operator*(const RationalFunction<Scalar>& a,
                                   const RationalFunction<Scalar>& b) {
  if (a.is_zero() || b.is_zero()) return {};
  return cancel_common_roots(a.num() * b.num(), a.den() * b.den());
}

template <typename Scalar>
RationalFunction<Scalar> reciprocal(const RationalFunction<Scalar>& a) {
  if (a.is_zero()) throw Error(ErrorCode::DivisionByZeroTF, "reciprocal of the zero function");
  return RationalFunction<Scalar>(a.den(), a.num());
}

template <typename Scalar>
RationalFunction<Scalar> operator/(const RationalFunction<Scalar>& a,
                                   const RationalFunction<Scalar>& b) {
  if (b.is_zero()) throw Error(ErrorCode::DivisionByZeroTF, "divisor numerator is zero");
  if (a.is_zero()) return {};
  return cancel_common_roots(a.num() * b.den(), a.den() * b.num());
}

template <typename Scalar>
RationalFunction<Scalar> operator*(Scalar k, const RationalFunction<Scalar>& a) {
  return RationalFunction<Scalar>(k * a.num(), a.den());
}

template <typename Scalar>
RationalFunction<Scalar> operator*(const RationalFunction<Scalar>& a, Scalar k) {
  return k * a;
}

/// Coefficient-wise agreement of two normalized functions.
template <typename Scalar>
Scalar coefficient_distance(const RationalFunction<Scalar>& a,
                            const RationalFunction<Scalar>& b) {
  auto dist = [](const Polynomial<Scalar>& p, const Polynomial<Scalar>& q) {
    Scalar worst(0);
    const int n = std::max(p.degree(), q.degree());
    for (int k = 0; k <= n; ++k) worst = std::max(worst, std::abs(p[k] - q[k]));
    return worst;
  };
  return std::max(dist(a.num(), b.num()), dist(a.den(), b.den()));
}

// ---------------------------------------------------------------------------
// Evaluation

/// a(j*omega) for each omega > 0.
template <typename Scalar>
std::vector<std::complex<Scalar>> freq_response(const RationalFunction<Scalar>& a,
                                                std::span<const Scalar> omegas) {
  std::vector<std::complex<Scalar>> out;
  out.reserve(omegas.size());
  for (Scalar w : omegas) {
    const std::complex<Scalar> jw(0, w);
    const std::complex<Scalar> d = a.den()(jw);
    const Scalar scale = a.den().magnitude_bound(std::abs(w));
    if (std::abs(d) <= Scalar(64) * std::numeric_limits<Scalar>::epsilon() * scale)
      throw Error(ErrorCode::EvaluationAtPole, "denominator vanishes at omega = " + std::to_string(double(w)));
    out.push_back(a.num()(jw) / d);
  }
  return out;
}

template <typename Scalar>
std::complex<Scalar> freq_response(const RationalFunction<Scalar>& a, Scalar omega) {
  const Scalar w[1] = {omega};
  return freq_response(a, std::span<const Scalar>(w, 1)).front();
}

template <typename Scalar>
Scalar dc_gain(const RationalFunction<Scalar>& a) {
  if (a.den()[0] == Scalar(0)) throw Error(ErrorCode::PoleAtOrigin, "dc gain undefined");
  return a.num()[0] / a.den()[0];
}

/// lim a(s) as s -> infinity; zero for strictly proper functions.
template <typename Scalar>
Scalar hf_gain(const RationalFunction<Scalar>& a) {
  if (!a.is_proper()) throw Error(ErrorCode::ImproperTF, "high-frequency gain of improper function");
  if (a.num().degree() < a.den().degree()) return Scalar(0);
  return a.num().leading() / a.den().leading();
}

/// Smallest omega with |L(j omega)| = 1, located on a log grid and refined
/// by bisection in log(omega) to the requested relative tolerance.
template <typename Scalar>
Scalar crossover_frequency(const RationalFunction<Scalar>& loop, Scalar lo = Scalar(1e-6),
                           Scalar hi = Scalar(1e6), Scalar rel_tol = Scalar(1e-6)) {
  auto excess = [&](Scalar w) { return std::abs(freq_response(loop, w)) - Scalar(1); };
  const int points = 2000;
  const Scalar step = std::log(hi / lo) / Scalar(points);
  Scalar prev_w = lo;
  Scalar prev_e = excess(lo);
  for (int i = 1; i <= points; ++i) {
    const Scalar w = lo * std::exp(step * Scalar(i));
    const Scalar e = excess(w);
    if (e == Scalar(0)) return w;
    if ((prev_e > 0) != (e > 0)) {
      Scalar a = prev_w, b = w;
      const bool rising = e > 0;
      while (b / a - Scalar(1) > rel_tol) {
        const Scalar mid = std::sqrt(a * b);
        if ((excess(mid) > 0) == rising)
          b = mid;
        else
          a = mid;
      }
      return std::sqrt(a * b);
    }
    prev_w = w;
    prev_e = e;
  }
  throw Error(ErrorCode::NoCrossover, "|L(jw)| does not cross 1 on the search interval");
}

using RationalTF = RationalFunction<double>;
using Poly = Polynomial<double>;

}  // namespace dvpp
