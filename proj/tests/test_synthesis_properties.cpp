#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dvpp/plants.hpp"
#include "dvpp/synthesis.hpp"
#include "property_suites.hpp"

using namespace dvpp;

TEST_CASE("property: sum of two first-order all-pass factors has a real RHP zero between them") {
  std::mt19937_64 rng(props::kSeedAllPassPairs);
  for (int trial = 0; trial < props::kAllPassPairs; ++trial) {
    const std::string fail = props::all_pass_pair_trial(rng);
    CHECK_MESSAGE(fail.empty(), "trial " << trial << ": " << fail);
  }
}

TEST_CASE("property: a complement with Re c1 <= 1 is stable and minimum phase") {
  std::mt19937_64 rng(props::kSeedComplement);
  for (int trial = 0; trial < props::kComplements; ++trial) {
    const std::string fail = props::complement_trial(rng);
    CHECK_MESSAGE(fail.empty(), "trial " << trial << ": " << fail);
  }
}

TEST_CASE("property: over-weighted all-pass leaves a zero at z eps/(2+eps)") {
  for (int i = 1; i <= props::kEpsilonGrid; ++i) {
    const std::string fail = props::epsilon_trial(props::epsilon_at(i));
    CHECK_MESSAGE(fail.empty(), fail);
  }
}

TEST_CASE("property: participation factors vanish at their plant's RHP zeros") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> tw(0.3, 4.0), g0(0.3, 1.0), ty(0.05, 1.0), k(0.05, 1.0),
      vz(0.02, 0.2);
  const DesignTarget target = make_design_target(3100, 6.5, {2, 17});
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Participant> ps;
    const int n_hydro = 1 + trial % 3;
    double total = 0;
    for (int i = 0; i < n_hydro; ++i) {
      HydroParams h;
      h.servo_time_constant_s = ty(rng);
      h.water_time_constant_s = tw(rng);
      h.gate_opening = g0(rng);
      const double w = k(rng);
      total += w;
      ps.push_back({"h" + std::to_string(i), ReserveRole::FCR, hydro_linear(h), w, {}});
    }
    for (auto& p : ps) p.weight /= total;
    WindParams wind;
    wind.nominal_power_mw = 100;
    wind.mpp_power_mw = 50;
    wind.zero_override = vz(rng);
    ps.push_back({"w", ReserveRole::FFR, wind_linear(wind), 1.0, {}});

    auto fcr = fcr_dpfs(std::span<const Participant>(ps.data(), ps.size() - 1));
    DpfSet set{fcr, false};
    auto ffr = ffr_dpfs(std::span<const Participant>(ps.data() + ps.size() - 1, 1), set.sum());
    set.entries.push_back(ffr[0]);
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (const auto& z : zeros(ps[i].plant).in(HalfPlane::Right)) {
        const double v = std::abs(set.entries[i].dpf(z.value) * target.full()(z.value));
        CHECK_MESSAGE(v < 1e-9, "trial " << trial << " device " << ps[i].id);
      }

    const auto out = normalize_dpfs(set);
    if (!out.refused) {
      const RationalTF s = out.set.sum();
      CHECK(coefficient_distance(s, RationalTF(1.0)) < 1e-10);
    }
  }
}

TEST_CASE("property: normalization makes the sum identically one") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> logp(-1.5, 1.5), k(0.1, 1.0);
  int normalized = 0;
  for (int trial = 0; trial < 200; ++trial) {
    DpfSet set;
    const int n = 2 + trial % 3;
    for (int i = 0; i < n; ++i) {
      const double p = std::pow(10.0, logp(rng));
      const double zero = std::pow(10.0, logp(rng));
      // Sums of these are usually, not always, minimum phase; refusals are skipped.
      set.entries.push_back({"d" + std::to_string(i), ReserveRole::FCR, 1.0,
                             k(rng) * RationalTF(Poly{zero, 1}, Poly{p, 1})});
    }
    const auto out = normalize_dpfs(set);
    if (out.refused) continue;
    ++normalized;
    // Over the shared denominator the numerators add up to it.
    const Poly& den = out.set.entries[0].dpf.den();
    Poly num = Poly::constant(0.0);
    for (const auto& e : out.set.entries) {
      REQUIRE(e.dpf.den() == den);
      num = num + e.dpf.num();
    }
    CHECK((num - den).max_abs_coeff() < 1e-10);
    CHECK(coefficient_distance(out.set.sum(), RationalTF(1.0)) < 1e-10);
    for (const auto& e : out.set.entries) CHECK(is_stable(e.dpf));
    double dc = 0;
    for (const auto& e : out.set.entries) dc += dc_gain(e.dpf);
    CHECK(std::abs(dc - 1) < 1e-9);
  }
  CHECK(normalized > 100);
}
