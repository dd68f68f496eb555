#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dvpp/plants.hpp"
#include "dvpp/synthesis.hpp"

namespace dvpp {

struct FleetEntry {
  std::string id;
  int bus = 0;
  PlantModel plant;
  ReserveRole role = ReserveRole::FCR;
  double weight = 0.0;
  /// Blaschke poles for this device; empty mirrors the RHP zeros.
  std::vector<double> blaschke_poles;
};

struct TargetSpec {
  double droop_mw_per_hz = 3100.0;
  double zero_tc_s = 6.5;
  std::pair<double, double> pole_tcs_s{2.0, 17.0};
};

enum class TestKind {
  Fault,          ///< closed loop, loss of fault_mw at fault_time_s
  ReferenceStep,  ///< open loop, frequency deviation of -step_hz at fault_time_s
};

struct GridScenario {
  std::string name;
  std::string description;
  double nominal_hz = 50.0;
  double kinetic_energy_gws = 110.0;
  double damping_mw_per_hz = 400.0;
  double fault_mw = 1400.0;
  double pre_fault_hz = 49.9;
  double fault_time_s = 1.0;
  TestKind test = TestKind::Fault;
  double step_hz = 1.0;
  /// First-order lag on the measured frequency; none by default.
  std::optional<double> measurement_tc_s;
  TargetSpec target;
  std::vector<FleetEntry> fleet;

  /// M = 2 W_kin / f0 with W_kin in MWs, giving MW s / Hz.
  double inertia_mws_per_hz() const { return 2.0 * kinetic_energy_gws * 1000.0 / nominal_hz; }
  void validate() const;
};

DesignTarget design_target(const GridScenario& sc);
std::vector<Participant> participants(const GridScenario& sc);
DvppDesign design_scenario(const GridScenario& sc);
std::vector<DeviceLoop> device_loops(const GridScenario& sc, const DvppDesign& design);

/// G(s) = 1/(s M + D), MW in, Hz out.
RationalTF coi_plant(const GridScenario& sc);

/// Disturbance (MW) to frequency deviation (Hz): 1/(s M + D + F_ctl(s) Phi(s)),
/// Phi being the measurement filter when one is configured.
RationalTF disturbance_response(const GridScenario& sc, const RationalTF& f_ctl);

/// Named open loops: "des" (G F), "total" (G sum H_i K_i), one per device id,
/// and one per plant kind present ("hydro", "wind", ...).
std::vector<std::pair<std::string, RationalTF>> open_loops(const GridScenario& sc,
                                                           std::span<const DeviceLoop> loops);

struct SimOptions {
  double dt = 1e-3;
  double t_end = 60.0;
  /// Simulate even when the internal stability check fails.
  bool allow_unstable_design = false;
};

struct SimResult {
  Eigen::VectorXd t;
  Eigen::VectorXd freq_hz;
  std::vector<std::string> device_ids;
  std::vector<Eigen::VectorXd> device_mw;
  Eigen::VectorXd total_mw;
  Eigen::VectorXd p_des_mw;  ///< F (omega_ref - omega_hat), the ideal response
  double dt = 0.0;
  double fault_time_s = 0.0;
  double pre_fault_hz = 0.0;
};

/// Closed-loop fault or open-loop reference step, depending on sc.test.
/// Refuses (UnstableClosedLoop) when the design is not internally stable
/// unless options.allow_unstable_design is set.
SimResult run_fault(const GridScenario& sc, std::span<const DeviceLoop> loops,
                    const SimOptions& options = {});

struct ComplianceReport {
  double nadir_hz = 0.0;
  double steady_state_hz = 0.0;
  double settled_power_mw = 0.0;
  double t50_s = 0.0;    ///< after the fault
  double t_full_s = 0.0; ///< 95 % of settled power, after the fault
  bool pass_nadir = false;
  bool pass_t50 = false;
  bool pass_full = false;
  bool pass_steady = false;

  double nadir_deviation_hz(double pre_fault_hz) const { return pre_fault_hz - nadir_hz; }
  bool passed() const { return pass_nadir && pass_t50 && pass_full && pass_steady; }
};

inline constexpr double kMaxNadirDeviationHz = 1.0;
inline constexpr double kMaxT50S = 5.0;
inline constexpr double kMaxTFullS = 30.0;
inline constexpr double kFullActivation = 0.95;
inline constexpr double kSteadyDeviationHz = 0.4;
inline constexpr double kSteadyToleranceHz = 0.01;
inline constexpr double kMinPostFaultS = 40.0;
inline constexpr double kSettleWindowS = 5.0;

ComplianceReport fcrd_compliance(const SimResult& result, const GridScenario& sc);

struct BodeTable {
  std::vector<double> omega;
  std::vector<double> mag_db;
  std::vector<double> phase_deg;  ///< unwrapped
};

BodeTable bode_data(const RationalTF& loop, std::span<const double> omegas);

std::vector<double> log_space(double lo, double hi, int points);

}  // namespace dvpp
