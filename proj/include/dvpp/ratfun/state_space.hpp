#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>

#include "dvpp/error.hpp"
#include "dvpp/ratfun/rational.hpp"

namespace dvpp {

/// Single-input single-output realization x' = A x + B u, y = C x + D u.
template <typename Scalar>
struct StateSpace {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  Matrix A;
  Vector B;
  RowVector C;
  Scalar D = Scalar(0);

  Eigen::Index order() const { return A.rows(); }
};

/// Controllable canonical form of a proper transfer function, balanced by a
/// diagonal power-of-two similarity so the companion coefficients are not
/// spread over many decades.
template <typename Scalar>
StateSpace<Scalar> realize(const RationalFunction<Scalar>& tf) {
  if (!tf.is_proper()) throw Error(ErrorCode::ImproperTF, "cannot realize an improper function");
  const auto& den = tf.den();  // monic
  const int n = den.degree();
  StateSpace<Scalar> ss;
  ss.D = tf.num().degree() == n ? tf.num()[n] : Scalar(0);
  ss.A = StateSpace<Scalar>::Matrix::Zero(n, n);
  ss.B = StateSpace<Scalar>::Vector::Zero(n);
  ss.C = StateSpace<Scalar>::RowVector::Zero(n);
  if (n == 0) return ss;
  ss.A.diagonal(1).setOnes();
  for (int k = 0; k < n; ++k) {
    ss.A(n - 1, k) = -den[k];
    ss.C(k) = tf.num()[k] - ss.D * den[k];
  }
  ss.B(n - 1) = Scalar(1);
  const auto d = detail::balance(ss.A);
  ss.B = ss.B.cwiseQuotient(d);
  ss.C = ss.C.cwiseProduct(d.transpose());
  return ss;
}

/// Uniformly sampled trace.
template <typename Scalar>
struct TimeSeries {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> t;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y;
};

inline constexpr double kOverflowGuard = 1e12;

/// Number of samples on [0, t_end] with spacing dt, endpoints included.
inline Eigen::Index sample_count(double t_end, double dt) {
  return static_cast<Eigen::Index>(std::llround(t_end / dt)) + 1;
}

/// One classical RK4 step of x' = A x + b u with u held over the step.
template <typename Scalar>
void rk4_step(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
              const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b, Scalar u, Scalar dt,
              Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Vector k1 = A * x + b * u;
  const Vector k2 = A * (x + dt / 2 * k1) + b * u;
  const Vector k3 = A * (x + dt / 2 * k2) + b * u;
  const Vector k4 = A * (x + dt * k3) + b * u;
  x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

/// Response from rest to the input u(t), sampled on the RK4 grid.
template <typename Scalar>
TimeSeries<Scalar> simulate(const StateSpace<Scalar>& ss, const std::function<Scalar(Scalar)>& u,
                            Scalar t_end, Scalar dt) {
  if (!(dt > 0) || !(t_end >= 0))
    throw Error(ErrorCode::UnstableSimulation, "dt must be positive and t_end non-negative");
  const Eigen::Index n = sample_count(double(t_end), double(dt));
  TimeSeries<Scalar> out;
  out.t.resize(n);
  out.y.resize(n);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(ss.order());
  for (Eigen::Index k = 0; k < n; ++k) {
    const Scalar t = Scalar(k) * dt;
    const Scalar uk = u(t);
    out.t[k] = t;
    out.y[k] = (ss.order() > 0 ? Scalar(ss.C * x) : Scalar(0)) + ss.D * uk;
    if (k + 1 < n && ss.order() > 0) {
      rk4_step<Scalar>(ss.A, ss.B, uk, dt, x);
      if (!(x.norm() < Scalar(kOverflowGuard)))
        throw Error(ErrorCode::UnstableSimulation, "state norm exceeded overflow guard at t = " +
                                                       std::to_string(double(t)));
    }
  }
  return out;
}

/// Unit-step response y(t) of a proper transfer function.
template <typename Scalar>
TimeSeries<Scalar> step_response(const RationalFunction<Scalar>& tf, Scalar t_end = Scalar(60),
                                 Scalar dt = Scalar(1e-3)) {
  return simulate<Scalar>(realize(tf), [](Scalar) { return Scalar(1); }, t_end, dt);
}

}  // namespace dvpp
