#include "dvpp/coi_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace dvpp {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidScenario, what);
}

RationalTF measurement_filter(const GridScenario& sc) {
  if (!sc.measurement_tc_s) return RationalTF(1.0);
  return RationalTF(Poly::constant(1.0), Poly::linear(*sc.measurement_tc_s, 1.0));
}

// Linear map of the assembled state and input: value = row * x + feed * u.
struct Output {
  Eigen::RowVectorXd row;
  double feed = 0.0;
};

// Closed-loop (or open-loop) interconnection of the COI swing equation,
// optional measurement lag, every device as K_i followed by H_i, and the
// target F observing the same measured deviation.
struct Assembly {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  std::optional<Eigen::Index> freq_state;
  std::vector<Output> device;
  Output p_des;
};

// Adds a SISO block driven by `in`; returns its output map.
Output add_block(const StateSpace<double>& ss, const Output& in, Eigen::Index offset, Assembly& as) {
  const Eigen::Index n = ss.order();
  const Eigen::Index width = as.A.cols();
  Output out{Eigen::RowVectorXd::Zero(width), ss.D * in.feed};
  out.row = ss.D * in.row;
  if (n > 0) {
    as.A.block(offset, offset, n, n) += ss.A;
    as.A.middleRows(offset, n) += ss.B * in.row;
    as.B.segment(offset, n) += ss.B * in.feed;
    out.row.segment(offset, n) += ss.C;
  }
  return out;
}

Assembly assemble(const GridScenario& sc, std::span<const DeviceLoop> loops) {
  const bool closed = sc.test == TestKind::Fault;
  std::vector<StateSpace<double>> ks, hs;
  for (const auto& l : loops) {
    ks.push_back(realize(l.controller));
    hs.push_back(realize(l.plant));
  }
  const StateSpace<double> target = realize(design_target(sc).full());

  Eigen::Index n = (closed ? 1 : 0) + (sc.measurement_tc_s ? 1 : 0) + target.order();
  for (std::size_t i = 0; i < loops.size(); ++i) n += ks[i].order() + hs[i].order();

  Assembly as;
  as.A = Eigen::MatrixXd::Zero(n, n);
  as.B = Eigen::VectorXd::Zero(n);
  Eigen::Index next = 0;

  // Frequency deviation seen by the controllers.
  Output deviation{Eigen::RowVectorXd::Zero(n), 0.0};
  if (closed) {
    as.freq_state = next++;
    deviation.row[*as.freq_state] = 1.0;
  } else {
    deviation.feed = 1.0;  // the input is the deviation itself
  }
  Output measured = deviation;
  if (sc.measurement_tc_s) {
    const Eigen::Index m = next++;
    const double tau = *sc.measurement_tc_s;
    as.A.row(m) += deviation.row / tau;
    as.B[m] += deviation.feed / tau;
    as.A(m, m) -= 1.0 / tau;
    measured = {Eigen::RowVectorXd::Zero(n), 0.0};
    measured.row[m] = 1.0;
  }
  const Output error{-measured.row, -measured.feed};

  for (std::size_t i = 0; i < loops.size(); ++i) {
    const Output yk = add_block(ks[i], error, next, as);
    next += ks[i].order();
    as.device.push_back(add_block(hs[i], yk, next, as));
    next += hs[i].order();
  }
  as.p_des = add_block(target, error, next, as);
  next += target.order();

  if (closed) {
    // M df/dt = u - D df + sum P_i
    const double m = sc.inertia_mws_per_hz();
    const Eigen::Index f = *as.freq_state;
    as.A(f, f) -= sc.damping_mw_per_hz / m;
    as.B[f] += 1.0 / m;
    for (const auto& d : as.device) {
      as.A.row(f) += d.row / m;
      as.B[f] += d.feed / m;
    }
  }
  return as;
}

std::string describe(const StabilityReport& rep) {
  std::ostringstream os;
  os << "internal stability check failed:";
  if (!rep.sensitivity_stable) os << " sensitivity unstable;";
  for (const auto& c : rep.cancellations)
    os << " " << c.id << " cancels plant " << to_string(c.kind) << " at " << c.root.real() << ";";
  for (const auto& v : rep.interpolation_violations)
    os << " " << v.id << " |L(z)| = " << v.residual << " at z = " << v.zero.real() << ";";
  return os.str();
}

}  // namespace

void GridScenario::validate() const {
  require(nominal_hz > 0, "GridScenario.nominal_hz must be > 0");
  require(kinetic_energy_gws > 0, "GridScenario.kinetic_energy_gws must be > 0");
  require(damping_mw_per_hz >= 0, "GridScenario.damping_mw_per_hz must be >= 0");
  require(std::isfinite(fault_mw), "GridScenario.fault_mw must be finite");
  require(pre_fault_hz > 0, "GridScenario.pre_fault_hz must be > 0");
  require(fault_time_s >= 0, "GridScenario.fault_time_s must be >= 0");
  require(std::isfinite(step_hz), "GridScenario.step_hz must be finite");
  require(!measurement_tc_s || *measurement_tc_s > 0, "GridScenario.measurement_tc_s must be > 0");
  require(target.droop_mw_per_hz > 0, "TargetSpec.droop_mw_per_hz must be > 0");
  require(target.zero_tc_s >= 0, "TargetSpec.zero_tc_s must be >= 0");
  require(target.pole_tcs_s.first > 0 && target.pole_tcs_s.second > 0,
          "TargetSpec.pole_tcs_s must be > 0");
  require(!fleet.empty(), "GridScenario.fleet must not be empty");

  std::set<std::string> ids;
  double fcr = 0, ffr = 0;
  bool any_fcr = false, any_ffr = false;
  for (const auto& e : fleet) {
    require(!e.id.empty(), "FleetEntry.id must not be empty");
    require(ids.insert(e.id).second, "FleetEntry.id '" + e.id + "' is not unique");
    require(e.weight >= 0, "FleetEntry.weight of '" + e.id + "' must be >= 0");
    for (double p : e.blaschke_poles)
      require(p > 0, "FleetEntry.blaschke_poles of '" + e.id + "' must be > 0");
    dvpp::validate(e.plant);
    if (e.role == ReserveRole::FCR) {
      fcr += e.weight;
      any_fcr = true;
    } else {
      ffr += e.weight;
      any_ffr = true;
    }
  }
  require(!any_fcr || std::abs(fcr - 1) <= 1e-9, "FleetEntry.weight: FCR weights must sum to 1");
  require(!any_ffr || std::abs(ffr - 1) <= 1e-9, "FleetEntry.weight: FFR weights must sum to 1");
}

DesignTarget design_target(const GridScenario& sc) {
  return make_design_target(sc.target.droop_mw_per_hz, sc.target.zero_tc_s, sc.target.pole_tcs_s);
}

std::vector<Participant> participants(const GridScenario& sc) {
  std::vector<Participant> out;
  for (const auto& e : sc.fleet)
    out.push_back({e.id, e.role, linear_model(e.plant), e.weight, e.blaschke_poles});
  return out;
}

DvppDesign design_scenario(const GridScenario& sc) {
  return synthesize(participants(sc), design_target(sc));
}

std::vector<DeviceLoop> device_loops(const GridScenario& sc, const DvppDesign& design) {
  std::vector<DeviceLoop> out;
  for (const auto& e : sc.fleet) {
    auto it = std::find_if(design.controllers.begin(), design.controllers.end(),
                           [&](const ControllerDesign& c) { return c.id == e.id; });
    if (it == design.controllers.end())
      throw Error(ErrorCode::InvalidScenario, "no controller designed for '" + e.id + "'");
    out.push_back({e.id, linear_model(e.plant), it->controller});
  }
  return out;
}

RationalTF coi_plant(const GridScenario& sc) {
  require(sc.nominal_hz > 0 && sc.kinetic_energy_gws > 0, "GridScenario: inertia must be > 0");
  require(sc.damping_mw_per_hz >= 0, "GridScenario.damping_mw_per_hz must be >= 0");
  return RationalTF(Poly::constant(1.0), Poly::linear(sc.inertia_mws_per_hz(), sc.damping_mw_per_hz));
}

RationalTF disturbance_response(const GridScenario& sc, const RationalTF& f_ctl) {
  coi_plant(sc);  // validates M and D
  const Poly swing = Poly::linear(sc.inertia_mws_per_hz(), sc.damping_mw_per_hz);
  const RationalTF loop = f_ctl * measurement_filter(sc);
  // 1/(1/G + F Phi) = den / (den (s M + D) + num)
  const RationalTF t(loop.den(), loop.den() * swing + loop.num());
  if (!is_stable(t))
    throw Error(ErrorCode::UnstableClosedLoop, "disturbance response has closed-RHP poles");
  return t;
}

std::vector<std::pair<std::string, RationalTF>> open_loops(const GridScenario& sc,
                                                           std::span<const DeviceLoop> loops) {
  const RationalTF g = coi_plant(sc) * measurement_filter(sc);
  std::vector<std::pair<std::string, RationalTF>> out;
  out.emplace_back("des", g * design_target(sc).full());
  RationalTF total;
  std::vector<std::pair<std::string, RationalTF>> kinds;
  std::vector<std::pair<std::string, RationalTF>> devices;
  for (const auto& l : loops) {
    const RationalTF li = g * l.plant * l.controller;
    total = total + li;
    devices.emplace_back(l.id, li);
    auto fe = std::find_if(sc.fleet.begin(), sc.fleet.end(),
                           [&](const FleetEntry& e) { return e.id == l.id; });
    if (fe == sc.fleet.end()) continue;
    const std::string kind(plant_kind(fe->plant));
    auto k = std::find_if(kinds.begin(), kinds.end(), [&](const auto& p) { return p.first == kind; });
    if (k == kinds.end())
      kinds.emplace_back(kind, li);
    else
      k->second = k->second + li;
  }
  out.emplace_back("total", total);
  for (auto& k : kinds)
    if (std::none_of(devices.begin(), devices.end(), [&](const auto& d) { return d.first == k.first; }))
      out.push_back(std::move(k));
  for (auto& d : devices) out.push_back(std::move(d));
  return out;
}

SimResult run_fault(const GridScenario& sc, std::span<const DeviceLoop> loops,
                    const SimOptions& options) {
  sc.validate();
  if (!(options.dt > 0) || !(options.t_end > 0))
    throw Error(ErrorCode::InvalidParams, "dt and t_end must be > 0");
  const DesignTarget target = design_target(sc);
  if (!options.allow_unstable_design) {
    const auto rep = internal_stability_check(loops, coi_plant(sc), &target);
    if (!rep.verdict) throw Error(ErrorCode::UnstableClosedLoop, describe(rep));
  }

  const Assembly as = assemble(sc, loops);
  const Eigen::Index n = as.A.rows();
  const double h = options.dt;
  // Classical RK4 on x' = A x + B u with u held over the step, in closed form.
  const Eigen::MatrixXd ha = h * as.A;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd ha2 = ha * ha;
  const Eigen::MatrixXd ha3 = ha2 * ha;
  const Eigen::MatrixXd phi = I + ha + ha2 / 2 + ha3 / 6 + ha3 * ha / 24;
  const Eigen::VectorXd gamma = h * (I + ha / 2 + ha2 / 6 + ha3 / 24) * as.B;

  const bool closed = sc.test == TestKind::Fault;
  const double u_on = closed ? -sc.fault_mw : -sc.step_hz;
  const Eigen::Index samples = sample_count(options.t_end, h);
  const Eigen::Index k_fault = static_cast<Eigen::Index>(std::llround(sc.fault_time_s / h));

  SimResult r;
  r.dt = h;
  r.fault_time_s = sc.fault_time_s;
  r.pre_fault_hz = sc.pre_fault_hz;
  r.t.resize(samples);
  r.freq_hz.resize(samples);
  r.total_mw.resize(samples);
  r.p_des_mw.resize(samples);
  for (const auto& l : loops) {
    r.device_ids.push_back(l.id);
    r.device_mw.emplace_back(samples);
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < samples; ++k) {
    const double u = k >= k_fault ? u_on : 0.0;
    r.t[k] = double(k) * h;
    const double df = as.freq_state ? x[*as.freq_state] : u;
    r.freq_hz[k] = sc.pre_fault_hz + df;
    double total = 0;
    for (std::size_t i = 0; i < as.device.size(); ++i) {
      const double p = as.device[i].row.dot(x) + as.device[i].feed * u;
      r.device_mw[i][k] = p;
      total += p;
    }
    r.total_mw[k] = total;
    r.p_des_mw[k] = as.p_des.row.dot(x) + as.p_des.feed * u;
    if (k + 1 < samples) {
      x = phi * x + gamma * u;
      if (!(x.norm() < kOverflowGuard))
        throw Error(ErrorCode::UnstableSimulation,
                    "state norm exceeded overflow guard at t = " + std::to_string(r.t[k]));
    }
  }
  return r;
}

ComplianceReport fcrd_compliance(const SimResult& result, const GridScenario& sc) {
  const Eigen::Index n = result.t.size();
  if (n == 0 || result.t[n - 1] - result.fault_time_s < kMinPostFaultS - 1e-9)
    throw Error(ErrorCode::SimulationTooShort,
                "compliance needs at least 40 s of simulation after the fault");
  const Eigen::Index window =
      std::max<Eigen::Index>(1, std::min<Eigen::Index>(n, std::llround(kSettleWindowS / result.dt)));

  ComplianceReport c;
  c.nadir_hz = result.freq_hz.minCoeff();
  c.steady_state_hz = result.freq_hz.tail(window).mean();
  c.settled_power_mw = result.total_mw.tail(window).mean();

  const Eigen::Index k_fault = static_cast<Eigen::Index>(std::llround(result.fault_time_s / result.dt));
  auto first_reach = [&](double fraction) {
    const double level = fraction * c.settled_power_mw;
    for (Eigen::Index k = k_fault; k < n; ++k)
      if (c.settled_power_mw > 0 ? result.total_mw[k] >= level : result.total_mw[k] <= level)
        return result.t[k] - result.fault_time_s;
    return std::numeric_limits<double>::infinity();
  };
  if (std::abs(c.settled_power_mw) < 1e-9) {
    c.t50_s = c.t_full_s = 0.0;
  } else {
    c.t50_s = first_reach(0.5);
    c.t_full_s = first_reach(kFullActivation);
  }

  c.pass_nadir = c.nadir_deviation_hz(sc.pre_fault_hz) <= kMaxNadirDeviationHz;
  c.pass_t50 = c.t50_s <= kMaxT50S;
  c.pass_full = c.t_full_s <= kMaxTFullS;
  c.pass_steady = c.steady_state_hz >= sc.pre_fault_hz - kSteadyDeviationHz - kSteadyToleranceHz;
  return c;
}

BodeTable bode_data(const RationalTF& loop, std::span<const double> omegas) {
  BodeTable b;
  const auto resp = freq_response(loop, omegas);
  double prev = 0;
  for (std::size_t i = 0; i < resp.size(); ++i) {
    b.omega.push_back(omegas[i]);
    b.mag_db.push_back(20 * std::log10(std::abs(resp[i])));
    double ph = std::arg(resp[i]) * 180 / std::numbers::pi;
    if (i > 0) ph -= 360 * std::round((ph - prev) / 360);
    b.phase_deg.push_back(ph);
    prev = ph;
  }
  return b;
}

std::vector<double> log_space(double lo, double hi, int points) {
  std::vector<double> w;
  if (points == 1) w.push_back(lo);
  for (int i = 0; points > 1 && i < points; ++i)
    w.push_back(lo * std::pow(hi / lo, double(i) / (points - 1)));
  return w;
}

}  // namespace dvpp
