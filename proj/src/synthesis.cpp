#include "dvpp/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dvpp {

namespace {

constexpr double kWeightTolerance = 1e-9;

std::string format_root(Complexd z) {
  std::ostringstream os;
  os.precision(6);
  os << z.real();
  if (z.imag() != 0) os << (z.imag() > 0 ? "+" : "-") << std::abs(z.imag()) << "j";
  return os.str();
}

Poly power(const Poly& p, int m) {
  Poly out = Poly::constant(1.0);
  for (int k = 0; k < m; ++k) out = out * p;
  return out;
}

void check_weights(std::span<const Participant> group, const char* label) {
  if (group.empty()) return;
  double total = 0;
  for (const auto& p : group) {
    if (!(p.weight >= 0))
      throw Error(ErrorCode::WeightsNotNormalized, p.id + ": weight must be >= 0");
    total += p.weight;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    std::ostringstream os;
    os.precision(12);
    os << label << " weights sum to " << total << ", expected 1";
    throw Error(ErrorCode::WeightsNotNormalized, os.str());
  }
}

void require_stable_plant(const Participant& p) {
  if (!is_stable(p.plant))
    throw Error(ErrorCode::UnstablePlant,
                p.id + ": plant has poles in the closed right half-plane; close a local "
                       "stabilizing loop first and pass the stabilized model");
}

RationalTF participant_blaschke(const Participant& p) {
  return blaschke_product(zeros(p.plant).in(HalfPlane::Right), p.blaschke_poles);
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> w(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    w[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, double(i) / (points - 1));
  return w;
}

struct CommonDenominator {
  Poly den;
  std::vector<Poly> multipliers;  ///< den / den_i
};

Poly from_roots(const std::vector<Root<double>>& roots, const std::vector<int>& mult) {
  Poly p = Poly::constant(1.0);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const Complexd z = roots[i].value;
    if (z.imag() < 0) continue;
    const Poly f = z.imag() == 0 ? Poly::linear(1.0, -z.real()) : Poly{std::norm(z), -2 * z.real(), 1.0};
    p = p * power(f, mult[i]);
  }
  return p;
}

// Least common denominator of monic denominators, from the union of their
// roots with the largest multiplicity seen.
CommonDenominator common_denominator(const std::vector<DpfEntry>& entries) {
  std::vector<RootSet<double>> each;
  std::vector<Root<double>> merged;
  for (const auto& e : entries) {
    each.push_back(find_roots(e.dpf.den()));
    for (const auto& r : each.back()) {
      auto it = std::find_if(merged.begin(), merged.end(), [&](const Root<double>& m) {
        return detail::roots_coincide(m.value, r.value);
      });
      if (it == merged.end())
        merged.push_back(r);
      else
        it->multiplicity = std::max(it->multiplicity, r.multiplicity);
    }
  }
  std::vector<int> full;
  for (const auto& m : merged) full.push_back(m.multiplicity);
  CommonDenominator cd{from_roots(merged, full), {}};
  for (const auto& rs : each) {
    std::vector<int> rest = full;
    for (const auto& r : rs)
      for (std::size_t j = 0; j < merged.size(); ++j)
        if (detail::roots_coincide(merged[j].value, r.value)) {
          rest[j] -= r.multiplicity;
          break;
        }
    cd.multipliers.push_back(from_roots(merged, rest));
  }
  return cd;
}

bool is_unity(const RationalTF& f) {
  return f.num().degree() == 0 && f.den().degree() == 0 &&
         std::abs(f.num()[0] / f.den()[0] - 1.0) < 1e-12;
}

}  // namespace

std::string_view to_string(ReserveRole role) { return role == ReserveRole::FCR ? "fcr" : "ffr"; }

std::string_view to_string(CancelledKind kind) {
  return kind == CancelledKind::PlantZero ? "zero" : "pole";
}

DesignTarget make_design_target(double droop_mw_per_hz, double zero_tc_s,
                                std::pair<double, double> pole_tcs_s) {
  if (!(droop_mw_per_hz > 0)) throw Error(ErrorCode::InvalidParams, "target.droop must be > 0");
  if (!(zero_tc_s >= 0)) throw Error(ErrorCode::InvalidParams, "target.zero_tc must be >= 0");
  if (!(pole_tcs_s.first > 0 && pole_tcs_s.second > 0))
    throw Error(ErrorCode::InvalidParams, "target.pole_tcs must be > 0");
  const Poly num = Poly::linear(zero_tc_s, 1.0);
  const Poly den = Poly::linear(pole_tcs_s.first, 1.0) * Poly::linear(pole_tcs_s.second, 1.0);
  return {droop_mw_per_hz, RationalTF(num, den)};
}

RationalTF blaschke_product(const RootSet<double>& rhp_zeros, std::span<const double> poles) {
  for (const auto& r : rhp_zeros)
    if (classify(r.value) != HalfPlane::Right)
      throw Error(ErrorCode::NotRHPZero, "Blaschke zero " + format_root(r.value) + " is not in the open RHP");
  const bool mirror = poles.empty();
  if (!mirror && static_cast<int>(poles.size()) != rhp_zeros.count())
    throw Error(ErrorCode::InvalidParams, "Blaschke factor needs one pole per RHP zero");

  Poly num = Poly::constant(1.0);
  Poly den = Poly::constant(1.0);
  for (const auto& r : rhp_zeros) {
    const Complexd z = r.value;
    if (z.imag() < 0) continue;
    if (z.imag() == 0) {
      num = num * power(Poly::linear(-1.0, z.real()), r.multiplicity);
      if (mirror) den = den * power(Poly::linear(1.0, z.real()), r.multiplicity);
    } else {
      const double mod2 = std::norm(z);
      // (z - s)(conj z - s) = s^2 - 2 Re z s + |z|^2
      num = num * power(Poly{mod2, -2 * z.real(), 1.0}, r.multiplicity);
      if (mirror) den = den * power(Poly{mod2, 2 * z.real(), 1.0}, r.multiplicity);
    }
  }
  if (!mirror) {
    for (double p : poles) {
      if (!(p > 0)) throw Error(ErrorCode::InvalidParams, "Blaschke poles must be > 0");
      den = den * Poly::linear(1.0, p);
    }
  }
  return RationalTF(num, den);
}

RationalTF DpfSet::sum() const {
  if (!entries.empty() && std::all_of(entries.begin(), entries.end(), [&](const DpfEntry& e) {
        return e.dpf.den() == entries.front().dpf.den();
      })) {
    Poly num = Poly::constant(0.0);
    for (const auto& e : entries) num = num + e.dpf.num();
    return cancel_common_roots(num, entries.front().dpf.den());
  }
  RationalTF total;
  for (const auto& e : entries) total = total + e.dpf;
  return total;
}

const DpfEntry* DpfSet::find(std::string_view id) const {
  for (const auto& e : entries)
    if (e.id == id) return &e;
  return nullptr;
}

std::vector<DpfEntry> fcr_dpfs(std::span<const Participant> fcr) {
  check_weights(fcr, "FCR");
  std::vector<DpfEntry> out;
  for (const auto& p : fcr) {
    require_stable_plant(p);
    const RationalTF b = participant_blaschke(p);
    const double b0 = b(0.0);
    out.push_back({p.id, ReserveRole::FCR, p.weight, (p.weight / b0) * b});
  }
  return out;
}

std::vector<DpfEntry> ffr_dpfs(std::span<const Participant> ffr, const RationalTF& fcr_sum) {
  check_weights(ffr, "FFR");
  const RationalTF remainder = RationalTF(1.0) - fcr_sum;
  std::vector<DpfEntry> out;
  for (const auto& p : ffr) {
    require_stable_plant(p);
    const RationalTF b = participant_blaschke(p);
    const double binf = hf_gain(b);
    out.push_back({p.id, ReserveRole::FFR, p.weight, (p.weight / binf) * b * remainder});
  }
  return out;
}

NormalizeOutcome normalize_dpfs(const DpfSet& set) {
  NormalizeOutcome outcome{set, false, {}};
  if (is_unity(set.sum())) {
    outcome.set.normalized = true;
    return outcome;
  }
  // Over a common denominator D, c_i = n_i / D and c_i' = n_i / sum_k n_k.
  // This keeps sum c_i' = 1 exact without cancelling D root by root.
  const CommonDenominator cd = common_denominator(set.entries);
  Poly total = Poly::constant(0.0);
  std::vector<Poly> nums;
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    nums.push_back(set.entries[i].dpf.num() * cd.multipliers[i]);
    total = total + nums.back();
  }
  total = total.chopped(tol::chop);

  std::string problem;
  if (total.is_zero()) {
    problem = " is identically zero";
  } else if (!std::all_of(set.entries.begin(), set.entries.end(),
                          [](const DpfEntry& e) { return is_stable(e.dpf); })) {
    problem = " is unstable";
  } else {
    std::vector<Complexd> offending;
    for (const auto& z : find_roots(total))
      if (classify(z.value) != HalfPlane::Left) offending.push_back(z.value);
    if (!offending.empty()) {
      problem = " has zeros at";
      for (auto z : offending) problem += " " + format_root(z);
      problem += "; dividing by it would destabilize the factors";
    }
  }
  if (!problem.empty()) {
    outcome.refused = true;
    outcome.diagnostic = std::string(to_string(ErrorCode::SumNotMinimumPhase)) +
                         ": sum of participation factors" + problem;
    return outcome;
  }
  for (std::size_t i = 0; i < nums.size(); ++i)
    outcome.set.entries[i].dpf = RationalTF(nums[i], total);
  outcome.set.normalized = true;
  return outcome;
}

std::vector<ControllerDesign> controllers_from_dpfs(const DpfSet& set, const DesignTarget& target,
                                                    std::span<const Participant> plants) {
  const RationalTF f = target.full();
  std::vector<ControllerDesign> out;
  for (const auto& e : set.entries) {
    auto it = std::find_if(plants.begin(), plants.end(),
                           [&](const Participant& p) { return p.id == e.id; });
    if (it == plants.end())
      throw Error(ErrorCode::InvalidParams, "no plant for participation factor '" + e.id + "'");
    ControllerDesign d{e.id, RationalTF(), {}};
    if (!e.dpf.is_zero()) {
      d.controller = (e.dpf * f) / it->plant;
      for (const auto& p : poles(d.controller))
        if (classify(p.value) != HalfPlane::Left)
          throw Error(ErrorCode::UnstableController,
                      e.id + ": controller pole at " + format_root(p.value) +
                          "; the participation factor must carry every RHP zero of the plant");
      const int excess = d.controller.num().degree() - d.controller.den().degree();
      if (excess > 0) {
        const Poly lag = Poly::linear(kRolloffTimeConstant, 1.0);
        d.controller = d.controller * RationalTF(Poly::constant(1.0), power(lag, excess));
        d.rolloff_poles.assign(static_cast<std::size_t>(excess), -1.0 / kRolloffTimeConstant);
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

MatchingReport matching_mismatch(const DpfSet& set, std::span<const double> omegas) {
  MatchingReport r;
  r.omega.assign(omegas.begin(), omegas.end());
  const auto resp = freq_response(set.sum(), omegas);
  bool matched = true;
  for (std::size_t i = 0; i < resp.size(); ++i) {
    const double m = std::abs(resp[i] - 1.0);
    r.mismatch.push_back(m);
    if (matched && m < kMatchingThreshold)
      r.matched_bandwidth = omegas[i];
    else
      matched = false;
  }
  return r;
}

StabilityReport internal_stability_check(std::span<const DeviceLoop> loops, const RationalTF& grid,
                                         const DesignTarget* target) {
  StabilityReport rep;
  const auto grid_rhp_zeros = zeros(grid).in(HalfPlane::Right);
  const auto grid_poles = poles(grid);
  const auto grid_zeros = zeros(grid);
  const auto peak_grid = log_grid(1e-4, 1e4, 400);

  RationalTF loop_sum;
  for (const auto& l : loops) {
    const RationalTF li = grid * l.plant * l.controller;
    loop_sum = loop_sum + li;

    // Unstable modes cancelled between K_i and H_i or G.
    auto flag = [&](const RootSet<double>& k_roots, const RootSet<double>& plant_roots,
                    CancelledKind kind) {
      for (const auto& kr : k_roots) {
        if (classify(kr.value) == HalfPlane::Left) continue;
        for (const auto& pr : plant_roots)
          if (detail::roots_coincide(pr.value, kr.value)) {
            rep.cancellations.push_back({l.id, pr.value, kind});
            break;
          }
      }
    };
    if (!l.controller.is_zero()) {
      const auto kp = poles(l.controller);
      const auto kz = zeros(l.controller);
      flag(kp, zeros(l.plant), CancelledKind::PlantZero);
      flag(kp, grid_zeros, CancelledKind::PlantZero);
      flag(kz, poles(l.plant), CancelledKind::PlantPole);
      flag(kz, grid_poles, CancelledKind::PlantPole);
    }

    // Interpolation at the RHP zeros of H_i and G.
    double fallback_scale = 0.0;
    if (!target) {
      const RationalTF hk = l.plant * l.controller;
      for (auto v : freq_response(hk, std::span<const double>(peak_grid)))
        fallback_scale = std::max(fallback_scale, std::abs(v));
    }
    std::vector<Complexd> points;
    for (const auto& z : zeros(l.plant).in(HalfPlane::Right)) points.push_back(z.value);
    for (const auto& z : grid_rhp_zeros) points.push_back(z.value);
    for (Complexd z : points) {
      const double residual = std::abs(li(z));
      const double scale = target ? std::abs(target->full()(z)) : fallback_scale;
      const double bound = kInterpolationTolerance * scale;
      if (!(residual < bound) && residual != 0.0)
        rep.interpolation_violations.push_back({l.id, z, residual, bound});
    }
  }

  // Poles of 1/(1 + L) are the roots of den(L) + num(L).
  const Poly char_poly = loop_sum.den() + loop_sum.num();
  const auto sp = find_roots(char_poly);
  rep.sensitivity_poles = sp.expanded();
  rep.sensitivity_stable = char_poly.degree() >= 0 && !char_poly.is_zero() &&
                           sp.all_in(HalfPlane::Left);
  rep.verdict =
      rep.sensitivity_stable && rep.cancellations.empty() && rep.interpolation_violations.empty();
  return rep;
}

RationalTF DvppDesign::aggregate(std::span<const Participant> plants) const {
  RationalTF total;
  for (const auto& c : controllers) {
    auto it = std::find_if(plants.begin(), plants.end(),
                           [&](const Participant& p) { return p.id == c.id; });
    if (it == plants.end())
      throw Error(ErrorCode::InvalidParams, "no plant for controller '" + c.id + "'");
    total = total + it->plant * c.controller;
  }
  return total;
}

DvppDesign synthesize(std::span<const Participant> participants, const DesignTarget& target) {
  std::vector<Participant> fcr, ffr;
  for (const auto& p : participants) (p.role == ReserveRole::FCR ? fcr : ffr).push_back(p);

  DvppDesign design;
  design.dpfs.entries = fcr_dpfs(fcr);
  if (!ffr.empty()) {
    const RationalTF fcr_sum = design.dpfs.sum();
    auto fast = ffr_dpfs(ffr, fcr_sum);
    design.dpfs.entries.insert(design.dpfs.entries.end(), fast.begin(), fast.end());
    auto outcome = normalize_dpfs(design.dpfs);
    design.dpfs = std::move(outcome.set);
    if (outcome.refused) design.normalization_diagnostic = std::move(outcome.diagnostic);
  } else {
    design.dpfs.normalized = is_unity(design.dpfs.sum());
  }
  design.controllers = controllers_from_dpfs(design.dpfs, target, participants);
  return design;
}

}  // namespace dvpp
