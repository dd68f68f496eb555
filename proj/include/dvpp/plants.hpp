#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <optional>
#include <span>
#include <string_view>
#include <variant>

#include "dvpp/ratfun.hpp"

namespace dvpp {

/// Hydro unit with servo-driven gate and an inelastic penstock.
struct HydroParams {
  double servo_time_constant_s = 0.2;
  double water_time_constant_s = 1.0;
  double gate_opening = 0.8;  ///< initial gate opening g0, per unit in (0, 1]
  double rating_mva = 0.0;

  /// Non-minimum-phase zero 1 / (g0 Tw) of the linearized turbine.
  double rhp_zero() const { return 1.0 / (gate_opening * water_time_constant_s); }
  void validate() const;
};

struct BatteryParams {
  double power_rating_mw = 1.0;
  double energy_capacity_kwh = 1.0;
  void validate() const;
};

/// Variable-speed wind turbine (or lumped park) at its maximum power point.
struct WindParams {
  double wind_speed_ms = 8.0;
  double nominal_power_mw = 1.0;
  double mpp_power_mw = 1.0;
  /// Replaces the speed-derived zero when set (e.g. a published rounded value).
  std::optional<double> zero_override;

  /// RHP zero of the stabilized turbine, 5.8e-3 * v rad/s unless overridden.
  double rhp_zero() const { return zero_override.value_or(5.8e-3 * wind_speed_ms); }
  void validate() const;
};

/// Ideal controllable power source, H(s) = 1.
struct IdealSource {
  double rating_mw = 0.0;
  void validate() const;
};

using PlantModel = std::variant<HydroParams, BatteryParams, WindParams, IdealSource>;

/// 2 (z - s)/(s + 2z) * 1/(Ty s + 1), z = 1/(g0 Tw). Per unit, dc gain 1.
RationalTF hydro_linear(const HydroParams& p);

/// Batteries are ideal power sources on frequency-control time scales.
RationalTF battery_linear(const BatteryParams& p);

/// (s - z)/(s + z): all-pass, dc gain -1, high-frequency gain +1.
RationalTF wind_linear(const WindParams& p);

RationalTF linear_model(const PlantModel& plant);
std::string_view plant_kind(const PlantModel& plant);
double rating_mw(const PlantModel& plant);
void validate(const PlantModel& plant);

// ---------------------------------------------------------------------------
// Large-signal hydro reference

struct HydroTrace {
  Eigen::VectorXd t;
  Eigen::VectorXd gate;
  Eigen::VectorXd flow;
  Eigen::VectorXd power;  ///< mechanical power, per unit
};

/// Per-unit penstock model driven through a first-order gate servo:
///   Ty g' = u - g,   Tw q' = 1 - (q/g)^2,   P = q (q/g)^2,
/// started at the steady state g = q = g0. The command is held over each
/// step of length dt (zero-order hold) and integrated with RK4.
HydroTrace hydro_nonlinear_sim(const HydroParams& p, std::span<const double> gate_command,
                               double dt);

// ---------------------------------------------------------------------------
// Energy bookkeeping

/// Running energy of a power trace. MW * s converts to kWh by 1000 / 3600.
struct EnergyLedger {
  Eigen::VectorXd t;
  Eigen::VectorXd power_mw;
  Eigen::VectorXd energy_kwh;  ///< trapezoidal running integral
  double peak_mw = 0.0;        ///< max |power|

  double final_kwh() const { return energy_kwh.size() ? energy_kwh[energy_kwh.size() - 1] : 0.0; }
  /// Storage swing needed to deliver the trace: max - min of the running energy.
  double capacity_kwh() const {
    return energy_kwh.size()
               ? std::max(0.0, energy_kwh.maxCoeff()) - std::min(0.0, energy_kwh.minCoeff())
               : 0.0;
  }
};

inline constexpr double kKwhPerMwSecond = 1000.0 / 3600.0;

EnergyLedger energy_ledger(std::span<const double> power_mw, double dt);

}  // namespace dvpp
