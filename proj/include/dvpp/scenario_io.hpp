#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dvpp/coi_sim.hpp"

namespace dvpp {

inline constexpr int kSchemaVersion = 1;

/// Parses scenario JSON. Syntax errors raise ParseError with line and column;
/// unknown or ill-typed fields and violated invariants raise ValidationError.
GridScenario parse_scenario(std::string_view text);
std::string serialize_scenario(const GridScenario& sc);

GridScenario load_scenario(const std::filesystem::path& path);
void save_scenario(const GridScenario& sc, const std::filesystem::path& path);

std::vector<std::string> builtin_names();
std::optional<GridScenario> builtin_scenario(std::string_view name);

/// Built-in name first, then a path on disk.
GridScenario resolve_scenario(std::string_view name_or_path);

/// 64-bit FNV-1a of the canonical serialization.
std::uint64_t scenario_hash(const GridScenario& sc);
std::string hex(std::uint64_t v);

struct RunManifest {
  std::string scenario;
  std::uint64_t hash = 0;
  double dt = 0.0;
  double t_end = 0.0;
  std::vector<std::string> outputs;
  bool stability_verdict = false;
  std::optional<ComplianceReport> compliance;
};

std::string manifest_json(const RunManifest& m, const GridScenario& sc);
std::string compliance_json(const ComplianceReport& c, const GridScenario& sc);

/// t_s, freq_hz, p_des_mw, then one column per device id; %.9g.
void export_timeseries(const SimResult& r, const std::filesystem::path& path);
/// omega_rad_s, mag_db, phase_deg; %.9g.
void export_bode(const BodeTable& b, const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// $DVPP_OUT_DIR when set, otherwise ./out.
std::filesystem::path default_output_dir();

}  // namespace dvpp
