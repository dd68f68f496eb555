#include "dvpp/plants.hpp"

#include <cmath>
#include <string>

namespace dvpp {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidParams, what);
}

}  // namespace

void HydroParams::validate() const {
  require(servo_time_constant_s > 0, "HydroParams.servo_time_constant_s must be > 0");
  require(water_time_constant_s > 0, "HydroParams.water_time_constant_s must be > 0");
  require(gate_opening > 0 && gate_opening <= 1, "HydroParams.g_0 must lie in (0, 1]");
  require(rating_mva >= 0, "HydroParams.rating_mva must be >= 0");
}

void BatteryParams::validate() const {
  require(power_rating_mw > 0, "BatteryParams.power_rating_mw must be > 0");
  require(energy_capacity_kwh > 0, "BatteryParams.energy_capacity_kwh must be > 0");
}

void WindParams::validate() const {
  require(wind_speed_ms > 0, "WindParams.wind_speed_ms must be > 0");
  require(nominal_power_mw > 0, "WindParams.nominal_power_mw must be > 0");
  require(mpp_power_mw > 0 && mpp_power_mw <= nominal_power_mw,
          "WindParams.mpp_power_mw must lie in (0, nominal_power_mw]");
  require(!zero_override || *zero_override > 0, "WindParams.zero_override must be > 0");
}

void IdealSource::validate() const { require(rating_mw >= 0, "IdealSource.rating_mw must be >= 0"); }

RationalTF hydro_linear(const HydroParams& p) {
  p.validate();
  const double z = p.rhp_zero();
  const Poly num = 2.0 * Poly::linear(-1.0, z);
  const Poly den = Poly::linear(1.0, 2 * z) * Poly::linear(p.servo_time_constant_s, 1.0);
  return RationalTF(num, den);
}

RationalTF battery_linear(const BatteryParams& p) {
  p.validate();
  return RationalTF(1.0);
}

RationalTF wind_linear(const WindParams& p) {
  p.validate();
  const double z = p.rhp_zero();
  return RationalTF(Poly::linear(1.0, -z), Poly::linear(1.0, z));
}

RationalTF linear_model(const PlantModel& plant) {
  struct Visitor {
    RationalTF operator()(const HydroParams& p) const { return hydro_linear(p); }
    RationalTF operator()(const BatteryParams& p) const { return battery_linear(p); }
    RationalTF operator()(const WindParams& p) const { return wind_linear(p); }
    RationalTF operator()(const IdealSource& p) const {
      p.validate();
      return RationalTF(1.0);
    }
  };
  return std::visit(Visitor{}, plant);
}

std::string_view plant_kind(const PlantModel& plant) {
  constexpr std::string_view names[] = {"hydro", "battery", "wind", "ideal"};
  return names[plant.index()];
}

double rating_mw(const PlantModel& plant) {
  struct Visitor {
    double operator()(const HydroParams& p) const { return p.rating_mva; }
    double operator()(const BatteryParams& p) const { return p.power_rating_mw; }
    double operator()(const WindParams& p) const { return p.nominal_power_mw; }
    double operator()(const IdealSource& p) const { return p.rating_mw; }
  };
  return std::visit(Visitor{}, plant);
}

void validate(const PlantModel& plant) {
  std::visit([](const auto& p) { p.validate(); }, plant);
}

HydroTrace hydro_nonlinear_sim(const HydroParams& p, std::span<const double> gate_command,
                               double dt) {
  p.validate();
  if (!(dt > 0)) throw Error(ErrorCode::InvalidParams, "dt must be > 0");
  for (std::size_t k = 0; k < gate_command.size(); ++k) {
    const double u = gate_command[k];
    if (!(u >= 0.0 && u <= 1.0))
      throw Error(ErrorCode::GateOutOfRange,
                  "gate command " + std::to_string(u) + " at sample " + std::to_string(k));
  }

  const double ty = p.servo_time_constant_s;
  const double tw = p.water_time_constant_s;
  // Fully closed gate is a singularity of the flow equation.
  constexpr double kMinGate = 1e-9;
  auto rhs = [&](const Eigen::Vector2d& x, double u) {
    const double g = std::max(x[0], kMinGate);
    const double ratio = x[1] / g;
    return Eigen::Vector2d((u - x[0]) / ty, (1.0 - ratio * ratio) / tw);
  };
  auto power = [&](const Eigen::Vector2d& x) {
    const double ratio = x[1] / std::max(x[0], kMinGate);
    return x[1] * ratio * ratio;
  };

  const auto n = static_cast<Eigen::Index>(gate_command.size());
  HydroTrace out;
  out.t.resize(n);
  out.gate.resize(n);
  out.flow.resize(n);
  out.power.resize(n);
  Eigen::Vector2d x(p.gate_opening, p.gate_opening);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.t[k] = double(k) * dt;
    out.gate[k] = x[0];
    out.flow[k] = x[1];
    out.power[k] = power(x);
    if (k + 1 == n) break;
    const double u = gate_command[static_cast<std::size_t>(k)];
    const Eigen::Vector2d k1 = rhs(x, u);
    const Eigen::Vector2d k2 = rhs(x + dt / 2 * k1, u);
    const Eigen::Vector2d k3 = rhs(x + dt / 2 * k2, u);
    const Eigen::Vector2d k4 = rhs(x + dt * k3, u);
    x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return out;
}

EnergyLedger energy_ledger(std::span<const double> power_mw, double dt) {
  if (power_mw.empty()) throw Error(ErrorCode::EmptyTrace, "power trace has no samples");
  if (!(dt > 0)) throw Error(ErrorCode::InvalidParams, "dt must be > 0");
  const auto n = static_cast<Eigen::Index>(power_mw.size());
  EnergyLedger ledger;
  ledger.t.resize(n);
  ledger.power_mw = Eigen::Map<const Eigen::VectorXd>(power_mw.data(), n);
  ledger.energy_kwh.resize(n);
  double mws = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    ledger.t[k] = double(k) * dt;
    if (k > 0) mws += 0.5 * (ledger.power_mw[k - 1] + ledger.power_mw[k]) * dt;
    ledger.energy_kwh[k] = mws * kKwhPerMwSecond;
  }
  ledger.peak_mw = ledger.power_mw.cwiseAbs().maxCoeff();
  return ledger;
}

}  // namespace dvpp
