#include "dvpp/scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace dvpp {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ValidationError, where + ": " + what);
}

// Typed, path-aware view of one JSON object. Every key must be consumed
// through this class; anything else is reported as unknown.
class Object {
 public:
  Object(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_, "expected an object");
  }

  void only(std::initializer_list<std::string_view> keys) const {
    for (const auto& [k, v] : j_.items()) {
      bool known = false;
      for (auto allowed : keys) known = known || k == allowed;
      if (!known) invalid(at(k), "unknown field");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  double number(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_number()) invalid(at(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::optional<double> maybe_number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }
  int integer(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_number_integer()) invalid(at(key), "expected an integer");
    return v.get<int>();
  }
  std::string string(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_string()) invalid(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : fallback;
  }
  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    const json& v = get(key);
    if (!v.is_array()) invalid(at(key), "expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) invalid(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  Object child(const std::string& key) const { return Object(get(key), at(key)); }
  const json& array(const std::string& key) const {
    const json& v = get(key);
    if (!v.is_array()) invalid(at(key), "expected an array");
    return v;
  }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& get(const std::string& key) const {
    if (!j_.contains(key)) invalid(at(key), "missing required field");
    return j_.at(key);
  }

  const json& j_;
  std::string path_;
};

PlantModel read_plant(const Object& o) {
  const std::string type = o.string("type");
  if (type == "hydro") {
    o.only({"type", "servo_time_constant_s", "water_time_constant_s", "g_0", "rating_mva"});
    HydroParams p;
    p.servo_time_constant_s = o.number("servo_time_constant_s");
    p.water_time_constant_s = o.number("water_time_constant_s");
    p.gate_opening = o.number("g_0");
    p.rating_mva = o.number("rating_mva", 0.0);
    return p;
  }
  if (type == "battery") {
    o.only({"type", "power_rating_mw", "energy_capacity_kwh"});
    return BatteryParams{o.number("power_rating_mw"), o.number("energy_capacity_kwh")};
  }
  if (type == "wind") {
    o.only({"type", "wind_speed_ms", "nominal_power_mw", "mpp_power_mw", "zero_override"});
    WindParams p;
    p.wind_speed_ms = o.number("wind_speed_ms");
    p.nominal_power_mw = o.number("nominal_power_mw");
    p.mpp_power_mw = o.number("mpp_power_mw");
    p.zero_override = o.maybe_number("zero_override");
    return p;
  }
  if (type == "ideal") {
    o.only({"type", "rating_mw"});
    return IdealSource{o.number("rating_mw", 0.0)};
  }
  invalid(o.at("type"), "unknown plant type '" + type + "' (hydro, battery, wind, ideal)");
}

json write_plant(const PlantModel& plant) {
  struct Visitor {
    json operator()(const HydroParams& p) const {
      return {{"type", "hydro"},
              {"servo_time_constant_s", p.servo_time_constant_s},
              {"water_time_constant_s", p.water_time_constant_s},
              {"g_0", p.gate_opening},
              {"rating_mva", p.rating_mva}};
    }
    json operator()(const BatteryParams& p) const {
      return {{"type", "battery"},
              {"power_rating_mw", p.power_rating_mw},
              {"energy_capacity_kwh", p.energy_capacity_kwh}};
    }
    json operator()(const WindParams& p) const {
      json j = {{"type", "wind"},
                {"wind_speed_ms", p.wind_speed_ms},
                {"nominal_power_mw", p.nominal_power_mw},
                {"mpp_power_mw", p.mpp_power_mw}};
      if (p.zero_override) j["zero_override"] = *p.zero_override;
      return j;
    }
    json operator()(const IdealSource& p) const { return {{"type", "ideal"}, {"rating_mw", p.rating_mw}}; }
  };
  return std::visit(Visitor{}, plant);
}

GridScenario from_json(const json& root) {
  const Object top(root, "");
  top.only({"schema_version", "name", "description", "grid", "target", "test", "fleet"});
  const int version = top.integer("schema_version");
  if (version != kSchemaVersion)
    invalid("schema_version", "unsupported version " + std::to_string(version));

  GridScenario sc;
  sc.name = top.string("name");
  sc.description = top.string("description", "");

  const Object grid = top.child("grid");
  grid.only({"nominal_hz", "kinetic_energy_gws", "damping_mw_per_hz", "measurement_tc_s"});
  sc.nominal_hz = grid.number("nominal_hz");
  sc.kinetic_energy_gws = grid.number("kinetic_energy_gws");
  sc.damping_mw_per_hz = grid.number("damping_mw_per_hz");
  sc.measurement_tc_s = grid.maybe_number("measurement_tc_s");

  const Object target = top.child("target");
  target.only({"droop_mw_per_hz", "zero_tc_s", "pole_tcs_s"});
  sc.target.droop_mw_per_hz = target.number("droop_mw_per_hz");
  sc.target.zero_tc_s = target.number("zero_tc_s");
  const auto poles = target.numbers("pole_tcs_s");
  if (poles.size() != 2) invalid(target.at("pole_tcs_s"), "expected two time constants");
  sc.target.pole_tcs_s = {poles[0], poles[1]};

  const Object test = top.child("test");
  test.only({"kind", "fault_mw", "pre_fault_hz", "fault_time_s", "step_hz"});
  const std::string kind = test.string("kind");
  if (kind == "fault")
    sc.test = TestKind::Fault;
  else if (kind == "reference_step")
    sc.test = TestKind::ReferenceStep;
  else
    invalid(test.at("kind"), "expected 'fault' or 'reference_step'");
  sc.fault_mw = test.number("fault_mw", 0.0);
  sc.pre_fault_hz = test.number("pre_fault_hz");
  sc.fault_time_s = test.number("fault_time_s", 1.0);
  sc.step_hz = test.number("step_hz", 1.0);

  const json& fleet = top.array("fleet");
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const Object e(fleet[i], "fleet[" + std::to_string(i) + "]");
    e.only({"id", "bus", "role", "weight", "blaschke_poles", "plant"});
    FleetEntry f;
    f.id = e.string("id");
    f.bus = e.integer("bus");
    const std::string role = e.string("role");
    if (role == "fcr")
      f.role = ReserveRole::FCR;
    else if (role == "ffr")
      f.role = ReserveRole::FFR;
    else
      invalid(e.at("role"), "expected 'fcr' or 'ffr'");
    f.weight = e.number("weight");
    f.blaschke_poles = e.numbers("blaschke_poles");
    f.plant = read_plant(e.child("plant"));
    sc.fleet.push_back(std::move(f));
  }

  try {
    sc.validate();
  } catch (const Error& err) {
    throw Error(ErrorCode::ValidationError, err.what());
  }
  return sc;
}

json to_json(const GridScenario& sc) {
  json grid = {{"nominal_hz", sc.nominal_hz},
               {"kinetic_energy_gws", sc.kinetic_energy_gws},
               {"damping_mw_per_hz", sc.damping_mw_per_hz}};
  if (sc.measurement_tc_s) grid["measurement_tc_s"] = *sc.measurement_tc_s;
  json fleet = json::array();
  for (const auto& e : sc.fleet) {
    json j = {{"id", e.id},
              {"bus", e.bus},
              {"role", std::string(to_string(e.role))},
              {"weight", e.weight},
              {"plant", write_plant(e.plant)}};
    if (!e.blaschke_poles.empty()) j["blaschke_poles"] = e.blaschke_poles;
    fleet.push_back(std::move(j));
  }
  return {{"schema_version", kSchemaVersion},
          {"name", sc.name},
          {"description", sc.description},
          {"grid", grid},
          {"target",
           {{"droop_mw_per_hz", sc.target.droop_mw_per_hz},
            {"zero_tc_s", sc.target.zero_tc_s},
            {"pole_tcs_s", {sc.target.pole_tcs_s.first, sc.target.pole_tcs_s.second}}}},
          {"test",
           {{"kind", sc.test == TestKind::Fault ? "fault" : "reference_step"},
            {"fault_mw", sc.fault_mw},
            {"pre_fault_hz", sc.pre_fault_hz},
            {"fault_time_s", sc.fault_time_s},
            {"step_hz", sc.step_hz}}},
          {"fleet", fleet}};
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Infinite times (never reached) are written as null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) {
      std::error_code ec;  // a failure shows up when the file is opened
      std::filesystem::create_directories(path.parent_path(), ec);
    }
    f_ = std::fopen(path.string().c_str(), "w");
    if (!f_) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  ~CsvWriter() {
    if (f_) std::fclose(f_);
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) std::fputc(',', f_);
      std::fputs(cells[i].c_str(), f_);
    }
    std::fputc('\n', f_);
  }
  void close() {
    const bool bad = std::ferror(f_) != 0;
    const int rc = std::fclose(f_);
    f_ = nullptr;
    if (bad || rc != 0) throw Error(ErrorCode::IoError, "error writing " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::FILE* f_ = nullptr;
};

}  // namespace

GridScenario parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " +
                                           std::to_string(col) + ": malformed JSON");
  }
  return from_json(root);
}

std::string serialize_scenario(const GridScenario& sc) { return to_json(sc).dump(2) + "\n"; }

GridScenario load_scenario(const std::filesystem::path& path) {
  try {
    return parse_scenario(read_text(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::IoError) throw;
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_scenario(const GridScenario& sc, const std::filesystem::path& path) {
  write_text(path, serialize_scenario(sc));
}

GridScenario resolve_scenario(std::string_view name_or_path) {
  if (auto sc = builtin_scenario(name_or_path)) return *sc;
  const std::filesystem::path p{std::string(name_or_path)};
  if (!std::filesystem::exists(p))
    throw Error(ErrorCode::IoError, "'" + std::string(name_or_path) +
                                        "' is neither a built-in scenario nor a file");
  return load_scenario(p);
}

std::uint64_t scenario_hash(const GridScenario& sc) {
  const std::string canonical = to_json(sc).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string compliance_json(const ComplianceReport& c, const GridScenario& sc) {
  json j = {{"scenario", sc.name},
            {"nadir_hz", c.nadir_hz},
            {"nadir_deviation_hz", c.nadir_deviation_hz(sc.pre_fault_hz)},
            {"steady_state_hz", c.steady_state_hz},
            {"settled_power_mw", c.settled_power_mw},
            {"t50_s", number_or_null(c.t50_s)},
            {"t_full_s", number_or_null(c.t_full_s)},
            {"pass_nadir", c.pass_nadir},
            {"pass_t50", c.pass_t50},
            {"pass_full", c.pass_full},
            {"pass_steady", c.pass_steady},
            {"passed", c.passed()}};
  return j.dump(2) + "\n";
}

std::string manifest_json(const RunManifest& m, const GridScenario& sc) {
  json j = {{"scenario", m.scenario},
            {"scenario_hash", hex(m.hash)},
            {"dt_s", m.dt},
            {"t_end_s", m.t_end},
            {"outputs", m.outputs},
            {"stability_verdict", m.stability_verdict}};
  if (m.compliance) j["compliance"] = json::parse(compliance_json(*m.compliance, sc));
  return j.dump(2) + "\n";
}

void export_timeseries(const SimResult& r, const std::filesystem::path& path) {
  CsvWriter csv(path);
  std::vector<std::string> header{"t_s", "freq_hz", "p_des_mw"};
  header.insert(header.end(), r.device_ids.begin(), r.device_ids.end());
  csv.row(header);
  for (Eigen::Index k = 0; k < r.t.size(); ++k) {
    std::vector<std::string> cells{fmt(r.t[k]), fmt(r.freq_hz[k]), fmt(r.p_des_mw[k])};
    for (const auto& d : r.device_mw) cells.push_back(fmt(d[k]));
    csv.row(cells);
  }
  csv.close();
}

void export_bode(const BodeTable& b, const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.row({"omega_rad_s", "mag_db", "phase_deg"});
  for (std::size_t i = 0; i < b.omega.size(); ++i)
    csv.row({fmt(b.omega[i]), fmt(b.mag_db[i]), fmt(b.phase_deg[i])});
  csv.close();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "error writing " + path.string());
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("DVPP_OUT_DIR"); env && *env) return env;
  return "out";
}

}  // namespace dvpp
