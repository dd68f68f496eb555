#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "dvpp/error.hpp"
#include "dvpp/ratfun/polynomial.hpp"
#include "dvpp/ratfun/tolerances.hpp"

namespace dvpp {

enum class HalfPlane { Left, Marginal, Right };

template <typename Scalar>
HalfPlane classify(std::complex<Scalar> root, Scalar eps = Scalar(tol::hurwitz)) {
  if (root.real() < -eps) return HalfPlane::Left;
  if (root.real() > eps) return HalfPlane::Right;
  return HalfPlane::Marginal;
}

template <typename Scalar>
struct Root {
  std::complex<Scalar> value;
  int multiplicity = 1;
};

/// Roots of a real polynomial with multiplicities. Complex roots always appear
/// together with their exact conjugate.
template <typename Scalar>
class RootSet {
 public:
  using Complex = std::complex<Scalar>;

  RootSet() = default;
  explicit RootSet(std::vector<Root<Scalar>> roots) : roots_(std::move(roots)) {}

  const std::vector<Root<Scalar>>& roots() const { return roots_; }
  bool empty() const { return roots_.empty(); }
  auto begin() const { return roots_.begin(); }
  auto end() const { return roots_.end(); }

  /// Total count including multiplicity.
  int count() const {
    int n = 0;
    for (const auto& r : roots_) n += r.multiplicity;
    return n;
  }

  /// Every root repeated by its multiplicity.
  std::vector<Complex> expanded() const {
    std::vector<Complex> out;
    for (const auto& r : roots_)
      for (int k = 0; k < r.multiplicity; ++k) out.push_back(r.value);
    return out;
  }

  RootSet in(HalfPlane side, Scalar eps = Scalar(tol::hurwitz)) const {
    std::vector<Root<Scalar>> out;
    for (const auto& r : roots_)
      if (classify(r.value, eps) == side) out.push_back(r);
    return RootSet(std::move(out));
  }

  bool all_in(HalfPlane side, Scalar eps = Scalar(tol::hurwitz)) const {
    return std::all_of(roots_.begin(), roots_.end(),
                       [&](const auto& r) { return classify(r.value, eps) == side; });
  }

  /// Largest |z - conj(z')| over all roots paired with their nearest conjugate.
  Scalar conjugate_defect() const {
    Scalar worst(0);
    for (const auto& r : roots_) {
      Scalar best = std::numeric_limits<Scalar>::infinity();
      for (const auto& s : roots_) best = std::min(best, std::abs(r.value - std::conj(s.value)));
      worst = std::max(worst, best);
    }
    return worst;
  }

 private:
  std::vector<Root<Scalar>> roots_;
};

namespace detail {

/// Parlett-Reinsch balancing with power-of-two scale factors. Returns the
/// diagonal d with balanced = diag(d)^-1 * A * diag(d).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> balance(
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a) {
  const Eigen::Index n = a.rows();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Ones(n);
  const Scalar gamma(0.95);
  bool changed = true;
  for (int sweep = 0; changed && sweep < 100; ++sweep) {
    changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar c = a.col(i).cwiseAbs().sum() - std::abs(a(i, i));
      const Scalar r = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
      if (c == Scalar(0) || r == Scalar(0)) continue;
      int e = 0;
      std::frexp(static_cast<double>(r / c), &e);
      e /= 2;
      if (e == 0) continue;
      const Scalar f = std::ldexp(Scalar(1), e);
      if (c * f + r / f < gamma * (c + r)) {
        a.col(i) *= f;
        a.row(i) /= f;
        d[i] *= f;
        changed = true;
      }
    }
  }
  return d;
}

template <typename Scalar>
std::complex<Scalar> newton_polish(const Polynomial<Scalar>& p, const Polynomial<Scalar>& dp,
                                   std::complex<Scalar> z) {
  std::complex<Scalar> pz = p(z);
  for (int it = 0; it < 40 && std::abs(pz) > Scalar(0); ++it) {
    const std::complex<Scalar> dpz = dp(z);
    if (std::abs(dpz) == Scalar(0)) break;
    const std::complex<Scalar> step = pz / dpz;
    const std::complex<Scalar> candidate = z - step;
    const std::complex<Scalar> pc = p(candidate);
    if (!(std::abs(pc) < std::abs(pz))) break;
    z = candidate;
    pz = pc;
    if (std::abs(step) <= 4 * std::numeric_limits<Scalar>::epsilon() * std::abs(z)) break;
  }
  return z;
}

/// Group nearby estimates into multiple roots located at the cluster centroid
/// (the centroid of a perturbed multiple root is far better conditioned than
/// its members), then make the set exactly conjugate-symmetric.
template <typename Scalar>
std::vector<Root<Scalar>> cluster_and_symmetrize(std::vector<std::complex<Scalar>> est) {
  using Complex = std::complex<Scalar>;
  std::sort(est.begin(), est.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::vector<bool> used(est.size(), false);
  std::vector<Root<Scalar>> clusters;
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (used[i]) continue;
    const Scalar radius = Scalar(tol::root_cluster) * std::max(Scalar(1), std::abs(est[i]));
    Complex sum = est[i];
    int m = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < est.size(); ++j) {
      if (!used[j] && std::abs(est[j] - est[i]) < radius) {
        used[j] = true;
        sum += est[j];
        ++m;
      }
    }
    clusters.push_back({sum / Scalar(m), m});
  }

  // Conjugate pairing.
  std::vector<Root<Scalar>> out;
  std::vector<bool> paired(clusters.size(), false);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (paired[i]) continue;
    Complex z = clusters[i].value;
    const Scalar scale = std::max(Scalar(1), std::abs(z));
    if (std::abs(z.imag()) <= Scalar(tol::real_axis) * scale) {
      paired[i] = true;
      out.push_back({Complex(z.real(), 0), clusters[i].multiplicity});
      continue;
    }
    std::size_t best = clusters.size();
    Scalar best_d = std::numeric_limits<Scalar>::infinity();
    for (std::size_t j = 0; j < clusters.size(); ++j) {
      if (j == i || paired[j]) continue;
      const Scalar d = std::abs(clusters[j].value - std::conj(z));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    paired[i] = true;
    if (best == clusters.size()) {
      // Lone complex cluster: cannot occur for real coefficients except
      // through gross ill-conditioning; keep it on the real axis.
      out.push_back({Complex(z.real(), 0), clusters[i].multiplicity});
      continue;
    }
    paired[best] = true;
    const Complex w = clusters[best].value;
    const Scalar re = (z.real() + w.real()) / 2;
    const Scalar im = std::abs(z.imag() - w.imag()) / 2;
    const int m = std::min(clusters[i].multiplicity, clusters[best].multiplicity);
    out.push_back({Complex(re, im), m});
    out.push_back({Complex(re, -im), m});
  }
  std::sort(out.begin(), out.end(), [](const Root<Scalar>& a, const Root<Scalar>& b) {
    return a.value.real() != b.value.real() ? a.value.real() < b.value.real()
                                            : a.value.imag() < b.value.imag();
  });
  return out;
}

/// Re-impose exact conjugate symmetry after members of a pair were polished
/// independently; pairs are adjacent after cluster_and_symmetrize.
template <typename Scalar>
void restore_conjugates(std::vector<Root<Scalar>>& roots) {
  for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
    auto& a = roots[i].value;
    auto& b = roots[i + 1].value;
    if (a.imag() != Scalar(0) && b.imag() != Scalar(0) && (a.imag() > 0) != (b.imag() > 0)) {
      const Scalar re = (a.real() + b.real()) / 2;
      const Scalar im = (std::abs(a.imag()) + std::abs(b.imag())) / 2;
      a = {re, a.imag() < 0 ? -im : im};
      b = {re, b.imag() < 0 ? -im : im};
      ++i;
    }
  }
}

}  // namespace detail

/// All roots of p: exact zeros at the origin are split off first, the rest
/// come from the eigenvalues of the balanced companion matrix followed by
/// Newton polishing.
template <typename Scalar>
RootSet<Scalar> find_roots(const Polynomial<Scalar>& p) {
  using Complex = std::complex<Scalar>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (p.degree() <= 0) return {};

  const int at_origin = p.origin_multiplicity();
  const Polynomial<Scalar> q = p.shift_down(at_origin);
  const int n = q.degree();

  std::vector<Complex> est;
  if (n == 1) {
    est.push_back(Complex(-q[0] / q[1], 0));
  } else if (n > 1) {
    Matrix companion = Matrix::Zero(n, n);
    companion.diagonal(-1).setOnes();
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -q[i] / q.leading();
    detail::balance(companion);
    Eigen::EigenSolver<Matrix> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
      throw Error(ErrorCode::ConvergenceFailure, "companion eigenvalue iteration did not converge");
    for (int i = 0; i < n; ++i) est.push_back(Complex(solver.eigenvalues()[i]));
  }

  // Cluster the raw estimates, then polish each distinct root. A root of
  // multiplicity m is a simple root of the (m-1)-th derivative.
  std::vector<Root<Scalar>> roots = detail::cluster_and_symmetrize(std::move(est));
  if (n > 1) {
    for (auto& r : roots) {
      Polynomial<Scalar> f = q;
      for (int k = 1; k < r.multiplicity; ++k) f = f.derivative();
      const Complex z = detail::newton_polish(f, f.derivative(), r.value);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw Error(ErrorCode::ConvergenceFailure, "root refinement produced a non-finite value");
      r.value = r.value.imag() == Scalar(0) ? Complex(z.real(), 0) : z;
    }
    detail::restore_conjugates(roots);
  }
  if (at_origin > 0) {
    auto it = std::find_if(roots.begin(), roots.end(),
                           [](const Root<Scalar>& r) { return r.value == Complex(0); });
    if (it != roots.end())
      it->multiplicity += at_origin;
    else
      roots.insert(roots.begin(), {Complex(0), at_origin});
  }
  return RootSet<Scalar>(std::move(roots));
}

}  // namespace dvpp
