#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "dvpp/plants.hpp"
#include "oracles.hpp"

using namespace dvpp;
using doctest::Approx;

namespace {

bool has_root_near(const RootSet<double>& rs, Complexd z, double tol) {
  for (const auto& r : rs)
    if (std::abs(r.value - z) < tol) return true;
  return false;
}

HydroParams hydro(double ty, double tw, double g0) {
  HydroParams p;
  p.servo_time_constant_s = ty;
  p.water_time_constant_s = tw;
  p.gate_opening = g0;
  p.rating_mva = 50;
  return p;
}

// RMS of (P_nl - P0) / dg - y_lin over the post-step window.
double linearization_error(const HydroParams& p, double dg, double dt, double t_end = 30.0) {
  const auto n = sample_count(t_end, dt);
  std::vector<double> cmd(static_cast<std::size_t>(n), p.gate_opening + dg);
  const auto nl = hydro_nonlinear_sim(p, cmd, dt);
  const auto lin = step_response(hydro_linear(p), t_end, dt);
  double acc = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double e = (nl.power[k] - p.gate_opening) / dg - lin.y[k];
    acc += e * e;
  }
  return std::sqrt(acc / double(n));
}

}  // namespace

TEST_CASE("hydro_linear") {
  SUBCASE("worked-example units") {
    const RationalTF h1 = hydro_linear(hydro(0.2, 1.25, 0.8));
    // 2(1 - s)/((s + 2)(0.2 s + 1)) = (10 - 10 s)/(s^2 + 7 s + 10)
    CHECK(coefficient_distance(h1, RationalTF(Poly{10, -10}, Poly{10, 7, 1})) < 1e-12);
    const RationalTF h2 = hydro_linear(hydro(0.2, 2.5, 0.8));
    // 2(0.5 - s)/((s + 1)(0.2 s + 1)) = (5 - 10 s)/(s^2 + 6 s + 5)
    CHECK(coefficient_distance(h2, RationalTF(Poly{5, -10}, Poly{5, 6, 1})) < 1e-12);
  }

  SUBCASE("Nordic bus-1 unit has its RHP zero at 1/(g0 Tw)") {
    const RationalTF h = hydro_linear(hydro(0.2, 0.7, 0.8));
    const auto rhp = zeros(h).in(HalfPlane::Right);
    REQUIRE(rhp.count() == 1);
    CHECK(rhp.roots()[0].value.real() == Approx(1 / 0.56).epsilon(1e-12));
  }

  SUBCASE("g0 = 0 is rejected") {
    try {
      (void)hydro_linear(hydro(0.2, 1.0, 0.0));
      FAIL("expected InvalidParams");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidParams);
    }
  }

  SUBCASE("property: dc gain one and a single RHP zero for any valid parameters") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ty(0.01, 2.0), tw(0.2, 5.0), g0(0.05, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
      const HydroParams p = hydro(ty(rng), tw(rng), g0(rng));
      const RationalTF h = hydro_linear(p);
      CHECK(dc_gain(h) == Approx(1).epsilon(1e-12));
      const auto rhp = zeros(h).in(HalfPlane::Right);
      REQUIRE(rhp.count() == 1);
      CHECK(std::abs(rhp.roots()[0].value - Complexd(p.rhp_zero(), 0)) < 1e-9 * p.rhp_zero());
    }
  }
}

TEST_CASE("battery_linear") {
  const RationalTF h = battery_linear({10, 20});
  CHECK(h.num().degree() == 0);
  CHECK(h.den().degree() == 0);
  CHECK(dc_gain(h) == 1.0);
  CHECK(is_minimum_phase(h));
  CHECK_THROWS_AS(battery_linear({0, 20}), Error);
}

TEST_CASE("wind_linear") {
  WindParams w;
  w.wind_speed_ms = 8;
  w.nominal_power_mw = 30;
  w.mpp_power_mw = 10;
  const RationalTF h8 = wind_linear(w);
  CHECK(coefficient_distance(h8, RationalTF(Poly{-0.0464, 1}, Poly{0.0464, 1})) < 1e-15);
  CHECK(dc_gain(h8) == -1.0);
  CHECK(hf_gain(h8) == 1.0);

  w.wind_speed_ms = 10;
  CHECK(w.rhp_zero() == Approx(0.058));

  w.zero_override = 0.048;
  CHECK(has_root_near(zeros(wind_linear(w)), {0.048, 0}, 1e-15));

  SUBCASE("all-pass on 1e-3 .. 1e3 rad/s") {
    std::vector<double> grid;
    for (int i = 0; i <= 600; ++i) grid.push_back(std::pow(10.0, -3 + 6.0 * i / 600));
    for (auto v : freq_response(h8, std::span<const double>(grid))) CHECK(std::abs(std::abs(v) - 1) < 1e-9);
  }

  SUBCASE("invalid parameters") {
    WindParams bad = w;
    bad.mpp_power_mw = 40;
    CHECK_THROWS_AS(wind_linear(bad), Error);
    bad = w;
    bad.wind_speed_ms = 0;
    CHECK_THROWS_AS(wind_linear(bad), Error);
  }
}

TEST_CASE("hydro_nonlinear_sim") {
  const HydroParams p = hydro(0.2, 1.25, 0.8);

  SUBCASE("constant gate holds the steady state") {
    std::vector<double> cmd(10001, p.gate_opening);
    const auto tr = hydro_nonlinear_sim(p, cmd, 1e-3);
    CHECK((tr.power.array() - p.gate_opening).abs().maxCoeff() < 1e-14);
  }

  SUBCASE("opening the gate first drops the power") {
    std::vector<double> cmd(5001, p.gate_opening + 0.05);
    const auto tr = hydro_nonlinear_sim(p, cmd, 1e-3);
    CHECK(tr.power.head(500).minCoeff() < p.gate_opening - 1e-3);
    CHECK(tr.power[tr.power.size() - 1] > p.gate_opening);
  }

  SUBCASE("a 1 % gate step follows the linear model within 5 % RMS over 30 s") {
    CHECK(linearization_error(p, 0.01, 1e-3) < 0.05);
    CHECK(linearization_error(hydro(0.2, 0.7, 0.8), 0.01, 1e-3) < 0.05);
    CHECK(linearization_error(hydro(0.2, 1.4, 0.8), -0.01, 1e-3) < 0.05);
  }

  SUBCASE("linearization error shrinks with the gate step and is insensitive to dt") {
    const double e1 = linearization_error(p, 0.01, 1e-3);
    const double e05 = linearization_error(p, 0.005, 1e-3);
    const double e01 = linearization_error(p, 0.001, 1e-3);
    CHECK(e05 < e1);
    CHECK(e01 < e05);
    const double d10 = linearization_error(p, 0.01, 10e-3);
    const double d5 = linearization_error(p, 0.01, 5e-3);
    const double d1 = linearization_error(p, 0.01, 1e-3);
    // The residual is the model nonlinearity, not integration error.
    CHECK(std::abs(d10 - d1) < 1e-6);
    CHECK(std::abs(d5 - d1) < 1e-6);
  }

  SUBCASE("out-of-range commands") {
    std::vector<double> cmd{0.8, 1.2};
    try {
      (void)hydro_nonlinear_sim(p, cmd, 1e-3);
      FAIL("expected GateOutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::GateOutOfRange);
    }
  }
}

TEST_CASE("energy_ledger") {
  SUBCASE("1 MW for an hour is 1000 kWh") {
    std::vector<double> p(3601, 1.0);
    const auto led = energy_ledger(p, 1.0);
    CHECK(led.final_kwh() == Approx(1000).epsilon(1e-12));
    CHECK(led.peak_mw == 1.0);
  }

  SUBCASE("zero trace") {
    std::vector<double> p(100, 0.0);
    const auto led = energy_ledger(p, 0.1);
    CHECK(led.final_kwh() == 0.0);
    CHECK(led.peak_mw == 0.0);
    CHECK(led.capacity_kwh() == 0.0);
  }

  SUBCASE("running integral agrees with an independent trapezoid") {
    std::vector<double> p;
    for (int k = 0; k < 2000; ++k) p.push_back(std::sin(0.01 * k) * 5 - 1);
    const auto led = energy_ledger(p, 0.01);
    const double ref = oracle::trapezoid(p, 0.01) * 1000 / 3600;
    CHECK(std::abs(led.final_kwh() - ref) <= 1e-9 * std::abs(ref));
    CHECK(led.peak_mw == Approx(6).epsilon(1e-3));
  }

  SUBCASE("empty trace") {
    try {
      (void)energy_ledger({}, 1.0);
      FAIL("expected EmptyTrace");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyTrace);
    }
  }
}
