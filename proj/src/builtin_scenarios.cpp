#include <functional>
#include <map>

#include "dvpp/scenario_io.hpp"

namespace dvpp {

namespace {

HydroParams hydro(double ty, double tw, double g0, double mva) {
  HydroParams p;
  p.servo_time_constant_s = ty;
  p.water_time_constant_s = tw;
  p.gate_opening = g0;
  p.rating_mva = mva;
  return p;
}

WindParams wind(double v, double nominal, double mpp, std::optional<double> zero = std::nullopt) {
  WindParams p;
  p.wind_speed_ms = v;
  p.nominal_power_mw = nominal;
  p.mpp_power_mw = mpp;
  p.zero_override = zero;
  return p;
}

// Two 50 MVA hydro units driven open loop by a 1 Hz reference step.
GridScenario two_hydro_base(std::string name, std::string description) {
  GridScenario sc;
  sc.name = std::move(name);
  sc.description = std::move(description);
  sc.test = TestKind::ReferenceStep;
  sc.step_hz = 1.0;
  sc.fault_mw = 0.0;
  sc.pre_fault_hz = 50.0;
  sc.target = {20.0, 6.5, {2.0, 17.0}};
  sc.fleet = {
      {"hydro_1", 1, hydro(0.2, 1.25, 0.8, 50), ReserveRole::FCR, 0.5, {}},
      {"hydro_2", 1, hydro(0.2, 2.5, 0.8, 50), ReserveRole::FCR, 0.5, {}},
  };
  return sc;
}

GridScenario n5_base(std::string name, std::string description, double w_kin) {
  GridScenario sc;
  sc.name = std::move(name);
  sc.description = std::move(description);
  sc.kinetic_energy_gws = w_kin;
  return sc;
}

// The ideal 3100 MW/Hz target is split over buses 1-3 like the hydro FCR.
std::vector<FleetEntry> n5_ideal_fleet() {
  return {
      {"ideal_bus1", 1, IdealSource{}, ReserveRole::FCR, 0.6, {}},
      {"ideal_bus2", 2, IdealSource{}, ReserveRole::FCR, 0.3, {}},
      {"ideal_bus3", 3, IdealSource{}, ReserveRole::FCR, 0.1, {}},
  };
}

std::vector<FleetEntry> n5_hydro_fleet() {
  return {
      {"hydro_bus1", 1, hydro(0.2, 0.7, 0.8, 0), ReserveRole::FCR, 0.6, {}},
      {"hydro_bus2", 2, hydro(0.2, 1.4, 0.8, 0), ReserveRole::FCR, 0.3, {}},
      {"hydro_bus3", 3, hydro(0.2, 1.4, 0.8, 0), ReserveRole::FCR, 0.1, {}},
  };
}

const std::map<std::string, std::function<GridScenario()>, std::less<>>& registry() {
  static const std::map<std::string, std::function<GridScenario()>, std::less<>> r = {
      {"iva_two_hydro",
       [] {
         return two_hydro_base("iva_two_hydro", "Two hydro units sharing FCR, 1 Hz reference step");
       }},
      {"ivb_battery_hydro",
       [] {
         auto sc = two_hydro_base("ivb_battery_hydro",
                                  "Two hydro units with battery FFR, 1 Hz reference step");
         sc.fleet.push_back({"battery", 1, BatteryParams{10.0, 20.0}, ReserveRole::FFR, 1.0, {}});
         return sc;
       }},
      {"ivc_wind_hydro",
       [] {
         auto sc = two_hydro_base("ivc_wind_hydro",
                                  "Two hydro units with a 30 MW wind park as FFR, 1 Hz reference step");
         sc.fleet.push_back(
             {"wind", 1, wind(8.0, 30.0, 10.7, 0.048), ReserveRole::FFR, 1.0, {}});
         return sc;
       }},
      {"n5_low_inertia_ideal",
       [] {
         auto sc = n5_base("n5_low_inertia_ideal",
                           "Nordic 5-bus, 110 GWs, ideal actuation at buses 1-3, 1400 MW trip", 110);
         sc.fleet = n5_ideal_fleet();
         return sc;
       }},
      {"n5_high_inertia_ideal",
       [] {
         auto sc = n5_base("n5_high_inertia_ideal",
                           "Nordic 5-bus, 240 GWs, ideal actuation at buses 1-3, 1400 MW trip", 240);
         sc.fleet = n5_ideal_fleet();
         return sc;
       }},
      {"n5_low_inertia_hydro",
       [] {
         auto sc = n5_base("n5_low_inertia_hydro",
                           "Nordic 5-bus, 110 GWs, hydro FCR at buses 1-3, 1400 MW trip", 110);
         sc.fleet = n5_hydro_fleet();
         return sc;
       }},
      {"n5_low_inertia_wind_hydro",
       [] {
         auto sc = n5_base("n5_low_inertia_wind_hydro",
                           "Nordic 5-bus, 110 GWs, hydro FCR with wind FFR at buses 2 and 4", 110);
         sc.fleet = n5_hydro_fleet();
         sc.fleet.push_back({"wind_bus2", 2, wind(10.0, 500.0, 348.0), ReserveRole::FFR, 1.0 / 3.0, {}});
         sc.fleet.push_back({"wind_bus4", 4, wind(8.0, 1500.0, 534.0), ReserveRole::FFR, 2.0 / 3.0, {}});
         return sc;
       }},
  };
  return r;
}

}  // namespace

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& [name, make] : registry()) out.push_back(name);
  return out;
}

std::optional<GridScenario> builtin_scenario(std::string_view name) {
  const auto& r = registry();
  auto it = r.find(name);
  if (it == r.end()) return std::nullopt;
  return it->second();
}

}  // namespace dvpp
