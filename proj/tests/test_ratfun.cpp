#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dvpp/ratfun.hpp"
#include "oracles.hpp"

using namespace dvpp;
using doctest::Approx;

namespace {

RationalTF tf(std::initializer_list<double> num, std::initializer_list<double> den) {
  return RationalTF(Poly(num), Poly(den));
}

// 2(z - s)/(s + 2z) * 1/(Ty s + 1)
RationalTF hydro_eq19_first() { return tf({2, -2}, {2, 1}) * tf({1}, {1, 0.2}); }

bool has_root_near(const RootSet<double>& rs, Complexd z, double tol) {
  for (const auto& r : rs)
    if (std::abs(r.value - z) < tol) return true;
  return false;
}

}  // namespace

TEST_CASE("Polynomial basics") {
  Poly p{1, 2, 3};  // 1 + 2s + 3s^2
  CHECK(p.degree() == 2);
  CHECK(p(2.0) == Approx(17));
  CHECK(Poly{0, 0}.is_zero());
  CHECK(Poly{}.degree() == -1);
  CHECK((p * Poly{-1, 1}).degree() == 3);
  CHECK((p - p).is_zero());
  CHECK(p.derivative() == Poly{2, 6});
  CHECK(Poly{0, 0, 5}.origin_multiplicity() == 2);

  SUBCASE("deflation removes a known factor") {
    const Poly q = Poly{3, 1} * Poly{-0.5, 1} * Poly{20, 1};  // roots -3, 0.5, -20
    const Poly r = deflate(q, Complexd(-20, 0));
    CHECK(r.degree() == 2);
    CHECK(r[0] == Approx(-1.5));
    CHECK(r[1] == Approx(2.5));
    CHECK(r[2] == Approx(1));
  }
}

TEST_CASE("tf_add") {
  const RationalTF allpass = tf({1, -1}, {1, 1});

  SUBCASE("additive identity") {
    const RationalTF sum = allpass + RationalTF();
    CHECK(coefficient_distance(sum, allpass) == 0.0);
  }

  SUBCASE("two hydro DPFs sum to the NMP ratio") {
    const RationalTF c1 = 0.5 * tf({1, -1}, {1, 1});
    const RationalTF c2 = 0.5 * tf({0.5, -1}, {0.5, 1});
    const RationalTF sum = c1 + c2;
    // (-s + 1/sqrt2)(s + 1/sqrt2) / ((s+1)(s+0.5)) = (0.5 - s^2)/(s^2 + 1.5 s + 0.5)
    const RationalTF expected = tf({0.5, 0, -1}, {0.5, 1.5, 1});
    CHECK(coefficient_distance(sum, expected) < 1e-12);
  }

  SUBCASE("exact cancellation to unity") {
    const RationalTF sum = tf({0, 1}, {1, 1}) + tf({1}, {1, 1});
    CHECK(sum.num().degree() == 0);
    CHECK(sum.den().degree() == 0);
    CHECK(sum.num()[0] == Approx(1).epsilon(1e-14));
  }

  SUBCASE("shared poles are not squared") {
    const RationalTF a = tf({1}, {2, 3, 1});  // 1/((s+1)(s+2))
    const RationalTF b = tf({1}, {1, 1});
    CHECK((a + b).den().degree() == 2);
  }
}

TEST_CASE("tf_mul") {
  SUBCASE("multiplicative identity") {
    const RationalTF a = hydro_eq19_first();
    CHECK(coefficient_distance(a * RationalTF(1.0), a) < 1e-15);
  }

  SUBCASE("hydro factors compose to the worked-example plant") {
    const RationalTF h = hydro_eq19_first();
    // 2(1 - s) / ((s + 2)(0.2 s + 1)) = (10 - 10 s) / (s^2 + 7 s + 10)
    const RationalTF expected = tf({10, -10}, {10, 7, 1});
    CHECK(coefficient_distance(h, expected) < 1e-12);
    CHECK(dc_gain(h) == Approx(1));
  }

  SUBCASE("coincident RHP factors cancel") {
    const RationalTF prod = tf({-1, 1}, {1, 1}) * tf({1, 1}, {-1, 1});
    CHECK(prod.num().degree() == 0);
    CHECK(prod.den().degree() == 0);
    CHECK(prod.num()[0] == Approx(1));
  }
}

TEST_CASE("tf_div") {
  const RationalTF h = hydro_eq19_first();

  SUBCASE("a / a is one") {
    const RationalTF one = h / h;
    CHECK(one.num().degree() == 0);
    CHECK(one.den().degree() == 0);
    CHECK(one.num()[0] == Approx(1));
  }

  SUBCASE("naive inversion of the hydro plant keeps its RHP zero as a controller pole") {
    const RationalTF f = 20.0 * tf({1, 6.5}, {1, 19, 34});  // 20 (6.5s+1)/((2s+1)(17s+1))
    const RationalTF k = f / h;
    const auto z = zeros(k);
    const auto p = poles(k);
    CHECK(has_root_near(z, {-2, 0}, 1e-9));
    CHECK(has_root_near(z, {-5, 0}, 1e-9));
    CHECK(has_root_near(p, {1, 0}, 1e-9));
    CHECK_FALSE(p.in(HalfPlane::Right).empty());
    CHECK_FALSE(is_stable(k));
  }

  SUBCASE("one over a first-order lag") {
    const RationalTF r = RationalTF(1.0) / tf({1, 1}, {1});
    CHECK(coefficient_distance(r, tf({1}, {1, 1})) == 0.0);
  }

  SUBCASE("division by zero") {
    CHECK_THROWS_AS(h / RationalTF(), Error);
    try {
      (void)(h / RationalTF());
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DivisionByZeroTF);
    }
  }
}

TEST_CASE("poles and zeros") {
  SUBCASE("zeros of the two-hydro sum") {
    const RationalTF sum = 0.5 * tf({1, -1}, {1, 1}) + 0.5 * tf({0.5, -1}, {0.5, 1});
    const auto z = zeros(sum);
    CHECK(z.count() == 2);
    CHECK(has_root_near(z, {1 / std::numbers::sqrt2, 0}, 1e-9));
    CHECK(has_root_near(z, {-1 / std::numbers::sqrt2, 0}, 1e-9));
  }

  SUBCASE("poles of a factored lag pair") {
    const RationalTF a = RationalTF(Poly{1}, Poly{1, 2} * Poly{1, 17});
    const auto p = poles(a);
    CHECK(has_root_near(p, {-0.5, 0}, 1e-12));
    CHECK(has_root_near(p, {-1.0 / 17, 0}, 1e-12));
  }

  SUBCASE("battery DPF zeros include the origin") {
    const RationalTF c3 = RationalTF(Poly{0, 2} * Poly{0.75, 1}, Poly{1, 1} * Poly{0.5, 1});
    const auto z = zeros(c3);
    CHECK(z.count() == 2);
    CHECK(has_root_near(z, {0, 0}, 0.0 + 1e-15));
    CHECK(has_root_near(z, {-0.75, 0}, 1e-12));
  }

  SUBCASE("multiple roots are reported once with multiplicity") {
    const Poly p = Poly{1, 1} * Poly{1, 1} * Poly{2, 1};
    const auto r = find_roots(p);
    REQUIRE(r.roots().size() == 2);
    CHECK(r.count() == 3);
    for (const auto& root : r)
      if (root.multiplicity == 2) CHECK(std::abs(root.value - Complexd(-1, 0)) < 1e-9);
  }

  SUBCASE("complex pairs are exact conjugates") {
    const Poly p = Poly{5, 2, 1} * Poly{3, 1};  // -1 +- 2j, -3
    const auto r = find_roots(p);
    CHECK(r.conjugate_defect() == 0.0);
    CHECK(has_root_near(r, {-1, 2}, 1e-12));
  }

  SUBCASE("long double instantiation") {
    const Polynomial<long double> p = Polynomial<long double>{2, -3, 1};
    const auto r = find_roots(p);
    CHECK(r.count() == 2);
  }
}

TEST_CASE("stability and minimum phase") {
  const RationalTF h = hydro_eq19_first();
  CHECK(is_stable(h));
  CHECK_FALSE(is_minimum_phase(h));
  CHECK_FALSE(is_stable(tf({1}, {-1, 1})));

  const RationalTF c3 = RationalTF(Poly{0, 2} * Poly{0.75, 1}, Poly{1, 1} * Poly{0.5, 1});
  CHECK(is_stable(c3));
  CHECK(is_minimum_phase(c3));

  SUBCASE("a pole on the imaginary axis is marginal, not stable") {
    CHECK_FALSE(is_stable(tf({1}, {0, 1})));
    CHECK_FALSE(poles(tf({1}, {1, 0, 1})).in(HalfPlane::Marginal).empty());
  }
}

TEST_CASE("freq_response") {
  SUBCASE("first-order all-pass has unit magnitude") {
    const RationalTF b = tf({0.5, -1}, {0.5, 1});
    const std::vector<double> w{1e-3, 0.1, 0.5, 3, 1e3};
    for (auto v : freq_response(b, std::span<const double>(w))) CHECK(std::abs(v) == Approx(1));
  }

  SUBCASE("two-hydro sum tends to -1 at high frequency") {
    const RationalTF sum = 0.5 * tf({1, -1}, {1, 1}) + 0.5 * tf({0.5, -1}, {0.5, 1});
    const Complexd v = freq_response(sum, 1e5);
    CHECK(std::abs(v) == Approx(1).epsilon(1e-6));
    CHECK(std::abs(std::arg(v)) == Approx(std::numbers::pi).epsilon(1e-4));
  }

  SUBCASE("design filter has unity dc") {
    const RationalTF f = tf({1, 6.5}, {1, 19, 34});
    CHECK(std::abs(freq_response(f, 1e-8)) == Approx(1).epsilon(1e-6));
  }

  SUBCASE("evaluation at a pole") {
    CHECK_THROWS_AS(freq_response(tf({1}, {1, 0, 1}), 1.0), Error);
  }
}

TEST_CASE("dc and high-frequency gains") {
  const RationalTF ap = tf({1, -1}, {1, 1});
  CHECK(dc_gain(ap) == 1.0);
  CHECK(hf_gain(ap) == -1.0);
  const RationalTF blaschke = tf({0.5, -1}, {0.5, 1});
  CHECK(dc_gain(blaschke) == 1.0);
  CHECK(hf_gain(blaschke) == -1.0);
  const RationalTF c3 = RationalTF(Poly{0, 2} * Poly{0.75, 1}, Poly{1, 1} * Poly{0.5, 1});
  CHECK(dc_gain(c3) == 0.0);
  CHECK(hf_gain(c3) == Approx(2));

  CHECK(hf_gain(tf({1}, {1, 1})) == 0.0);
  CHECK_THROWS_AS(dc_gain(tf({1}, {0, 1})), Error);
  CHECK_THROWS_AS(hf_gain(tf({0, 0, 1}, {1, 1})), Error);
}

TEST_CASE("step_response") {
  SUBCASE("first-order lag matches the analytic solution") {
    const auto y = step_response(tf({1}, {1, 1}), 2.0, 1e-3);
    CHECK(y.y[1000] == Approx(1 - std::exp(-1.0)).epsilon(1e-6));
  }

  SUBCASE("hydro plant dips before settling at one") {
    const auto y = step_response(hydro_eq19_first(), 60.0, 1e-3);
    CHECK(y.y.minCoeff() < 0);
    CHECK(y.y[100] < 0);
    CHECK(y.y[y.y.size() - 1] == Approx(1).epsilon(1e-6));
  }

  SUBCASE("design filter against partial fractions") {
    const RationalTF f = tf({1, 6.5}, {1, 19, 34});
    const auto y = step_response(f, 60.0, 1e-3);
    const auto exact = [&](double t) {
      return oracle::step_from_partial_fractions(Poly{1, 6.5}, 34.0, {-0.5, -1.0 / 17}, t);
    };
    // Frozen from the residue formula: the filter is at 45.4 % after 5 s.
    CHECK(exact(5.0) == Approx(0.4537423285).epsilon(1e-9));
    CHECK(y.y[5000] == Approx(exact(5.0)).epsilon(1e-9));
    double worst = 0;
    for (Eigen::Index k = 0; k < y.t.size(); k += 250) worst = std::max(worst, std::abs(y.y[k] - exact(y.t[k])));
    CHECK(worst < 1e-9);
  }

  SUBCASE("improper and unstable inputs") {
    CHECK_THROWS_AS(step_response(tf({1, 1}, {1})), Error);
    try {
      (void)step_response(tf({1}, {-1, 1}), 60.0, 1e-3);
      FAIL("expected UnstableSimulation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnstableSimulation);
    }
  }
}

TEST_CASE("crossover_frequency") {
  CHECK(crossover_frequency(tf({3}, {0, 1})) == Approx(3).epsilon(1e-6));

  const RationalTF filter = tf({1, 6.5}, {1, 19, 34});
  auto loop_for = [&](double w_kin_gws) {
    const double m = 2 * w_kin_gws * 1000 / 50;
    return 3100.0 * filter * tf({1}, {400, m});
  };
  const double low = crossover_frequency(loop_for(110));
  const double high = crossover_frequency(loop_for(240));
  CHECK(low == Approx(0.26).epsilon(0.15));
  CHECK(high < low);
  CHECK_THROWS_AS(crossover_frequency(tf({0.5}, {1, 1})), Error);
}

TEST_CASE("property: poles of a product are the union of poles") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pole(0.05, 20.0), zero(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double p1 = pole(rng), p2 = pole(rng), p3 = pole(rng);
    const RationalTF a(Poly{-zero(rng), 1}, Poly{p1, 1} * Poly{p2, 1});
    const RationalTF b(Poly{1}, Poly{p3, 1});
    const auto all = poles(a * b);
    CHECK(all.count() == 3);
    for (double p : {p1, p2, p3}) CHECK(has_root_near(all, {-p, 0}, 1e-6 * std::max(1.0, p)));
  }
}

TEST_CASE("property: root sets are conjugate-closed") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> coeff(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    Poly::Coeffs c(7);
    for (int k = 0; k < 7; ++k) c[k] = coeff(rng);
    const auto r = find_roots(Poly(c));
    CHECK(r.count() == 6);
    CHECK(r.conjugate_defect() < 1e-9);
  }
}

TEST_CASE("property: Blaschke factors are all-pass") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> z(0.01, 10.0);
  std::vector<double> grid;
  for (int i = 0; i <= 120; ++i) grid.push_back(std::pow(10.0, -3 + 6.0 * i / 120));
  for (int trial = 0; trial < 100; ++trial) {
    const double z1 = z(rng), z2 = z(rng);
    const RationalTF b = tf({z1, -1}, {z1, 1}) * tf({z2, -1}, {z2, 1});
    for (auto v : freq_response(b, std::span<const double>(grid))) CHECK(std::abs(std::abs(v) - 1) < 1e-9);
  }
}

TEST_CASE("property: step end value equals dc gain") {
  std::mt19937_64 rng(5);
  // Separated poles and an LHP zero faster than the slowest pole keep the
  // slow residue bounded, so e^-8 decay lands inside the 0.5 % band.
  std::uniform_real_distribution<double> pole(0.2, 2.0), ratio(2.0, 10.0), unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double p1 = pole(rng), p2 = p1 * ratio(rng);
    const double z = p1 * (1.0 + 4.0 * unit(rng));
    const RationalTF a(Poly{z, 1}, Poly{p1, 1} * Poly{p2, 1});
    const double slowest = std::min(p1, p2);
    const double t_end = 8 / slowest;
    const auto y = step_response(a, t_end, 1e-3);
    const double dc = dc_gain(a);
    CHECK(std::abs(y.y[y.y.size() - 1] - dc) / std::abs(dc) < 5e-3);
  }
}
