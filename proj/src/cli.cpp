#include "dvpp/cli.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "dvpp/scenario_io.hpp"

namespace dvpp {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string format_poly(const Poly& p) {
  if (p.is_zero()) return "0";
  std::string out;
  for (int k = p.degree(); k >= 0; --k) {
    const double c = p[k];
    if (c == 0) continue;
    const double a = std::abs(c);
    if (out.empty())
      out += c < 0 ? "-" : "";
    else
      out += c < 0 ? " - " : " + ";
    if (k == 0 || a != 1) out += num(a);
    if (k > 0) out += (k == 0 || a != 1 ? " " : "") + std::string("s") + (k > 1 ? "^" + std::to_string(k) : "");
  }
  return out;
}

std::string format_tf(const RationalTF& f) {
  if (f.den().degree() == 0) return format_poly(f.num() / f.den()[0]);
  return "(" + format_poly(f.num()) + ") / (" + format_poly(f.den()) + ")";
}

nlohmann::json tf_json(const RationalTF& f) {
  std::vector<double> n(f.num().coeffs().data(), f.num().coeffs().data() + f.num().coeffs().size());
  std::vector<double> d(f.den().coeffs().data(), f.den().coeffs().data() + f.den().coeffs().size());
  return {{"num_ascending", n}, {"den_ascending", d}};
}

std::string format_root(Complexd z) {
  return z.imag() == 0 ? num(z.real()) : num(z.real()) + (z.imag() > 0 ? "+" : "-") + num(std::abs(z.imag())) + "j";
}

void print_report(std::ostream& os, const StabilityReport& rep) {
  os << "internal stability\n";
  os << "  sensitivity stable: " << (rep.sensitivity_stable ? "yes" : "no") << "\n";
  if (rep.cancellations.empty()) os << "  RHP cancellations: none\n";
  for (const auto& c : rep.cancellations)
    os << "  RHP cancellation: " << c.id << " cancels plant " << to_string(c.kind) << " at "
       << format_root(c.root) << "\n";
  if (rep.interpolation_violations.empty()) os << "  interpolation: ok\n";
  for (const auto& v : rep.interpolation_violations)
    os << "  interpolation violated: " << v.id << " |L(z)| = " << num(v.residual) << " at z = "
       << format_root(v.zero) << " (bound " << num(v.bound) << ")\n";
  os << "  verdict: " << (rep.verdict ? "PASS" : "FAIL") << "\n";
}

void print_compliance(std::ostream& os, const ComplianceReport& c, const GridScenario& sc) {
  auto flag = [](bool ok) { return ok ? "pass" : "FAIL"; };
  os << "FCR-D compliance\n";
  os << "  nadir          " << num(c.nadir_hz) << " Hz (deviation " << num(c.nadir_deviation_hz(sc.pre_fault_hz))
     << " Hz, limit " << num(kMaxNadirDeviationHz) << ")  " << flag(c.pass_nadir) << "\n";
  os << "  steady state   " << num(c.steady_state_hz) << " Hz  " << flag(c.pass_steady) << "\n";
  os << "  50 % activated " << num(c.t50_s) << " s (limit " << num(kMaxT50S) << ")  " << flag(c.pass_t50) << "\n";
  os << "  fully active   " << num(c.t_full_s) << " s (limit " << num(kMaxTFullS) << ")  " << flag(c.pass_full) << "\n";
  os << "  verdict: " << (c.passed() ? "PASS" : "FAIL") << "\n";
}

StabilityReport stability(const GridScenario& sc, std::span<const DeviceLoop> loops) {
  const DesignTarget target = design_target(sc);
  return internal_stability_check(loops, coi_plant(sc), &target);
}

int cmd_scenario_list() {
  for (const auto& name : builtin_names()) {
    const auto sc = builtin_scenario(name);
    std::cout << name << "  " << sc->description << "\n";
  }
  return kExitOk;
}

int cmd_scenario_show(const std::string& which, const std::string& out) {
  const GridScenario sc = resolve_scenario(which);
  if (out.empty())
    std::cout << serialize_scenario(sc);
  else
    save_scenario(sc, out);
  return kExitOk;
}

int cmd_synthesize(const std::string& which, const std::string& out) {
  const GridScenario sc = resolve_scenario(which);
  const DvppDesign design = design_scenario(sc);
  const auto loops = device_loops(sc, design);
  const StabilityReport rep = stability(sc, loops);
  const auto match = matching_mismatch(design.dpfs, log_space(1e-3, 1e3, 601));

  std::ostream& os = std::cout;
  os << "scenario " << sc.name << " (" << hex(scenario_hash(sc)) << ")\n";
  os << "target F(s) = " << format_tf(design_target(sc).full()) << "\n";
  os << "participation factors" << (design.dpfs.normalized ? " (normalized)" : "") << "\n";
  for (const auto& e : design.dpfs.entries)
    os << "  " << e.id << " [" << to_string(e.role) << ", k = " << num(e.weight) << "]  c(s) = " << format_tf(e.dpf) << "\n";
  if (design.normalization_diagnostic) os << "  note: " << *design.normalization_diagnostic << "\n";
  os << "  matched up to " << num(match.matched_bandwidth) << " rad/s (|sum c - 1| < 1 %)\n";
  os << "controllers\n";
  for (const auto& c : design.controllers) {
    os << "  " << c.id << "  K(s) = " << format_tf(c.controller) << "\n";
    if (!c.rolloff_poles.empty())
      os << "    roll-off poles added at " << num(c.rolloff_poles.front()) << " (x" << c.rolloff_poles.size() << ")\n";
  }
  print_report(os, rep);

  if (!out.empty()) {
    nlohmann::json j;
    j["scenario"] = sc.name;
    j["scenario_hash"] = hex(scenario_hash(sc));
    j["normalized"] = design.dpfs.normalized;
    if (design.normalization_diagnostic) j["normalization_diagnostic"] = *design.normalization_diagnostic;
    for (const auto& e : design.dpfs.entries)
      j["dpfs"].push_back({{"id", e.id}, {"role", to_string(e.role)}, {"weight", e.weight}, {"c", tf_json(e.dpf)}});
    for (const auto& c : design.controllers)
      j["controllers"].push_back({{"id", c.id}, {"K", tf_json(c.controller)}, {"rolloff_poles", c.rolloff_poles}});
    j["stability"] = {{"sensitivity_stable", rep.sensitivity_stable},
                      {"cancellations", rep.cancellations.size()},
                      {"interpolation_violations", rep.interpolation_violations.size()},
                      {"verdict", rep.verdict}};
    write_text(out, j.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_simulate(const std::string& which, double dt, double t_end, std::string out_dir, bool force) {
  const GridScenario sc = resolve_scenario(which);
  const DvppDesign design = design_scenario(sc);
  const auto loops = device_loops(sc, design);
  const StabilityReport rep = stability(sc, loops);
  if (!rep.verdict && !force) {
    print_report(std::cerr, rep);
    std::cerr << "refusing to simulate an internally unstable design (use --allow-unstable)\n";
    return kExitFail;
  }
  SimOptions opt;
  opt.dt = dt;
  opt.t_end = t_end;
  opt.allow_unstable_design = true;
  const SimResult r = run_fault(sc, loops, opt);

  const std::filesystem::path dir = out_dir.empty() ? default_output_dir() : std::filesystem::path(out_dir);
  RunManifest m;
  m.scenario = sc.name;
  m.hash = scenario_hash(sc);
  m.dt = dt;
  m.t_end = t_end;
  m.stability_verdict = rep.verdict;

  const auto ts = dir / (sc.name + "_timeseries.csv");
  export_timeseries(r, ts);
  m.outputs.push_back(ts.string());

  if (sc.test == TestKind::Fault) {
    const ComplianceReport c = fcrd_compliance(r, sc);
    const auto cj = dir / (sc.name + "_compliance.json");
    write_text(cj, compliance_json(c, sc));
    m.outputs.push_back(cj.string());
    m.compliance = c;
    print_compliance(std::cout, c, sc);
  } else {
    nlohmann::json j = nlohmann::json::object();
    std::cout << "device energy over the run\n";
    for (std::size_t i = 0; i < r.device_ids.size(); ++i) {
      const auto led = energy_ledger(std::span<const double>(r.device_mw[i].data(), r.device_mw[i].size()), r.dt);
      j[r.device_ids[i]] = {{"peak_mw", led.peak_mw}, {"final_kwh", led.final_kwh()}, {"capacity_kwh", led.capacity_kwh()}};
      std::cout << "  " << r.device_ids[i] << "  peak " << num(led.peak_mw) << " MW, storage swing "
                << num(led.capacity_kwh()) << " kWh\n";
    }
    const auto ej = dir / (sc.name + "_energy.json");
    write_text(ej, j.dump(2) + "\n");
    m.outputs.push_back(ej.string());
  }
  const auto mj = dir / (sc.name + "_manifest.json");
  m.outputs.push_back(mj.string());
  write_text(mj, manifest_json(m, sc));
  for (const auto& o : m.outputs) std::cout << "wrote " << o << "\n";
  return kExitOk;
}

int cmd_bode(const std::string& which, const std::string& loop_name, const std::string& out,
             double w_min, double w_max, int points) {
  const GridScenario sc = resolve_scenario(which);
  const DvppDesign design = design_scenario(sc);
  const auto loops = device_loops(sc, design);
  const auto named = open_loops(sc, loops);
  auto it = std::find_if(named.begin(), named.end(), [&](const auto& p) { return p.first == loop_name; });
  if (it == named.end()) {
    std::cerr << "unknown loop '" << loop_name << "'; available:";
    for (const auto& p : named) std::cerr << " " << p.first;
    std::cerr << "\n";
    return kExitUsage;
  }
  const auto grid = log_space(w_min, w_max, points);
  const BodeTable table = bode_data(it->second, grid);
  if (out.empty()) {
    std::cout << "omega_rad_s,mag_db,phase_deg\n";
    char buf[96];
    for (std::size_t i = 0; i < table.omega.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", table.omega[i], table.mag_db[i], table.phase_deg[i]);
      std::cout << buf;
    }
  } else {
    export_bode(table, out);
    try {
      std::cerr << "crossover " << num(crossover_frequency(it->second)) << " rad/s\n";
    } catch (const Error&) {
      std::cerr << "no crossover on 1e-6 .. 1e6 rad/s\n";
    }
  }
  return kExitOk;
}

int cmd_check(const std::string& which) {
  const GridScenario sc = resolve_scenario(which);
  if (sc.test != TestKind::Fault) {
    std::cerr << "check needs a fault scenario; '" << sc.name << "' is a reference step\n";
    return kExitUsage;
  }
  const DvppDesign design = design_scenario(sc);
  const auto loops = device_loops(sc, design);
  const StabilityReport rep = stability(sc, loops);
  print_report(std::cout, rep);
  if (!rep.verdict) return kExitFail;
  const SimResult r = run_fault(sc, loops);
  const ComplianceReport c = fcrd_compliance(r, sc);
  print_compliance(std::cout, c, sc);
  return c.passed() ? kExitOk : kExitFail;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::IoError:
    case ErrorCode::InvalidScenario:
    case ErrorCode::InvalidParams:
    case ErrorCode::WeightsNotNormalized:
    case ErrorCode::SimulationTooShort:
      return kExitUsage;
    default:
      return kExitFail;
  }
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Dynamic virtual power plant design and frequency-response simulation", "dvpp"};
  app.require_subcommand(1);

  auto* scenario = app.add_subcommand("scenario", "Inspect scenarios");
  scenario->require_subcommand(1);
  auto* list = scenario->add_subcommand("list", "List built-in scenarios");
  std::string show_name, show_out;
  auto* show = scenario->add_subcommand("show", "Print a scenario as JSON");
  show->add_option("scenario", show_name, "Built-in name or JSON file")->required();
  show->add_option("--out", show_out, "Write to a file instead of stdout");

  std::string name, out, out_dir, loop = "total";
  double dt = 1e-3, t_end = 60.0, w_min = 1e-3, w_max = 1e2;
  int points = 400;
  bool force = false;

  auto* synth = app.add_subcommand("synthesize", "Participation factors, controllers, stability report");
  synth->add_option("scenario", name, "Built-in name or JSON file")->required();
  synth->add_option("--out", out, "Also write the design as JSON");

  auto* sim = app.add_subcommand("simulate", "Run the scenario and write CSV/JSON outputs");
  sim->add_option("scenario", name, "Built-in name or JSON file")->required();
  sim->add_option("--dt", dt, "Step size [s]")->check(CLI::PositiveNumber);
  sim->add_option("--t-end", t_end, "Horizon [s]")->check(CLI::PositiveNumber);
  sim->add_option("--out-dir", out_dir, "Output directory (default $DVPP_OUT_DIR or ./out)");
  sim->add_flag("--allow-unstable", force, "Simulate even if the internal stability check fails");

  auto* bode = app.add_subcommand("bode", "Open-loop frequency response as CSV");
  bode->add_option("scenario", name, "Built-in name or JSON file")->required();
  bode->add_option("--loop", loop, "des, total, a plant kind, or a device id");
  bode->add_option("--out", out, "CSV path (default stdout)");
  bode->add_option("--w-min", w_min, "Lowest frequency [rad/s]")->check(CLI::PositiveNumber);
  bode->add_option("--w-max", w_max, "Highest frequency [rad/s]")->check(CLI::PositiveNumber);
  bode->add_option("--points", points, "Grid points")->check(CLI::Range(0, 100000));

  auto* check = app.add_subcommand("check", "Exit 0 iff internally stable and FCR-D compliant");
  check->add_option("scenario", name, "Built-in name or JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*list) return cmd_scenario_list();
    if (*show) return cmd_scenario_show(show_name, show_out);
    if (*synth) return cmd_synthesize(name, out);
    if (*sim) return cmd_simulate(name, dt, t_end, out_dir, force);
    if (*bode) return cmd_bode(name, loop, out, w_min, w_max, points);
    if (*check) return cmd_check(name);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}

}  // namespace dvpp
