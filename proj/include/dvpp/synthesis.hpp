#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dvpp/ratfun.hpp"

namespace dvpp {

enum class ReserveRole { FCR, FFR };

std::string_view to_string(ReserveRole role);

/// Desired aggregate response to a frequency deviation:
/// F(s) = R * (Tz s + 1) / ((T1 s + 1)(T2 s + 1)), in MW/Hz.
struct DesignTarget {
  double droop_mw_per_hz = 0.0;
  RationalTF filter;  ///< unity dc gain, stable, minimum phase, proper

  RationalTF full() const { return droop_mw_per_hz * filter; }
};

DesignTarget make_design_target(double droop_mw_per_hz, double zero_tc_s,
                                std::pair<double, double> pole_tcs_s);

/// prod_j (z_j - s)/(s + p_j) over every RHP zero, counted with multiplicity.
/// An empty pole list selects p_j = z_j (all-pass). Explicit poles must be
/// positive reals, one per zero.
RationalTF blaschke_product(const RootSet<double>& rhp_zeros, std::span<const double> poles = {});

/// A device taking part in the virtual plant.
struct Participant {
  std::string id;
  ReserveRole role = ReserveRole::FCR;
  RationalTF plant;
  double weight = 0.0;
  /// Blaschke poles; empty means mirror the plant's RHP zeros.
  std::vector<double> blaschke_poles;
};

/// Dynamic participation factor c_i(s) of one device.
struct DpfEntry {
  std::string id;
  ReserveRole role = ReserveRole::FCR;
  double weight = 0.0;
  RationalTF dpf;
};

struct DpfSet {
  std::vector<DpfEntry> entries;
  bool normalized = false;

  RationalTF sum() const;
  const DpfEntry* find(std::string_view id) const;
};

/// Slow reserves: c_i = k_i B_i(s) / B_i(0). Weights must sum to one and
/// every plant must be stable.
std::vector<DpfEntry> fcr_dpfs(std::span<const Participant> fcr);

/// Fast reserves: c_i = k_i B_i(s) / B_i(inf) * (1 - fcr_sum).
std::vector<DpfEntry> ffr_dpfs(std::span<const Participant> ffr, const RationalTF& fcr_sum);

struct NormalizeOutcome {
  DpfSet set;
  bool refused = false;
  std::string diagnostic;
};

/// c_i' = c_i / sum_k c_k, which needs a stable minimum-phase sum. When the
/// sum is not, the input set comes back unchanged with refused = true.
NormalizeOutcome normalize_dpfs(const DpfSet& set);

struct ControllerDesign {
  std::string id;
  RationalTF controller;
  /// Poles of the roll-off added to make c_i F / H_i proper.
  std::vector<double> rolloff_poles;
};

inline constexpr double kRolloffTimeConstant = 10e-3;

/// K_i = c_i F / H_i, with a 1/(tau s + 1)^r roll-off appended when the
/// quotient is improper. Throws UnstableController when H_i's RHP zeros
/// are not carried by c_i.
std::vector<ControllerDesign> controllers_from_dpfs(const DpfSet& set, const DesignTarget& target,
                                                    std::span<const Participant> plants);

struct MatchingReport {
  std::vector<double> omega;
  std::vector<double> mismatch;  ///< |sum c_i(j omega) - 1|
  /// Largest grid frequency up to which every mismatch is below 1 %.
  double matched_bandwidth = 0.0;
};

inline constexpr double kMatchingThreshold = 0.01;

MatchingReport matching_mismatch(const DpfSet& set, std::span<const double> omegas);

// ---------------------------------------------------------------------------
// Internal stability

struct DeviceLoop {
  std::string id;
  RationalTF plant;
  RationalTF controller;
};

enum class CancelledKind { PlantZero, PlantPole };

std::string_view to_string(CancelledKind kind);

struct Cancellation {
  std::string id;
  Complexd root;
  CancelledKind kind = CancelledKind::PlantZero;
};

struct InterpolationViolation {
  std::string id;
  Complexd zero;
  double residual = 0.0;  ///< |L_i(z)|
  double bound = 0.0;
};

struct StabilityReport {
  bool sensitivity_stable = false;
  std::vector<Complexd> sensitivity_poles;
  std::vector<Cancellation> cancellations;
  std::vector<InterpolationViolation> interpolation_violations;
  bool verdict = false;
};

/// Relative interpolation bound: |L_i(z)| < kInterpolationTolerance * |F(z)|.
inline constexpr double kInterpolationTolerance = 1e-7;

/// Sensitivity stability of 1/(1 + sum G H_i K_i), interpolation at every RHP
/// zero of H_i and G, and RHP pole/zero cancellations between each K_i and
/// H_i or G. The target scales the interpolation bound; without one the
/// peak of |H_i K_i(j w)| over 1e-4 .. 1e4 rad/s is used instead of |F(z)|.
StabilityReport internal_stability_check(std::span<const DeviceLoop> loops, const RationalTF& grid,
                                         const DesignTarget* target = nullptr);

// ---------------------------------------------------------------------------
// Full design

struct DvppDesign {
  DpfSet dpfs;
  std::optional<std::string> normalization_diagnostic;
  std::vector<ControllerDesign> controllers;

  RationalTF aggregate(std::span<const Participant> plants) const;
};

/// FCR factors, then FFR factors on the remainder, then normalization when
/// the sum allows it, then controllers.
DvppDesign synthesize(std::span<const Participant> participants, const DesignTarget& target);

}  // namespace dvpp
