#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "gcon/analysis.hpp"
#include "gcon/lattice.hpp"
#include "gcon/transport.hpp"

namespace gcon {

inline constexpr const char* kVersion = "0.1.0";

enum class DeviceKind { ribbon, constriction };
enum class SweepKind { gate, field_fan, bias_map, disorder_ensemble };

std::string to_string(SweepKind k);

struct DeviceConfig {
  DeviceKind kind = DeviceKind::constriction;
  LatticeParams lattice;
  GeometrySpec geometry;     // constriction
  double ribbon_width_nm = 0;
  double ribbon_length_nm = 0;
  bool ribbon_metallic_snap = false;
  DisorderSpec disorder;
  double field_tesla = 0;
  std::optional<double> gauge_origin_y_nm;  // default: lead centre line
};

struct SweepConfig {
  SweepKind kind = SweepKind::gate;
  std::vector<double> gate_v;
  std::vector<double> field_t;   // field-fan
  std::vector<double> bias_v;    // bias-map
  std::vector<std::uint64_t> seeds;  // disorder-ensemble; empty = derived from seed_count
  int seed_count = 0;
  double alpha_f_per_m2 = 8e-6;
  double dirac_point_v = 0;
  double temperature_k = 0;
  double energy_step_ev = 0;  // bias-map interpolation grid; 0 = automatic
  TransportOptions transport;
};

struct AnalysisConfig {
  std::set<std::string> extractions;  // empty = everything the data supports
  double plateau_tolerance = kDefaultPlateauTolerance;
  double plateau_min_extent = kDefaultPlateauMinExtent;
  std::optional<double> length_nm;
  std::optional<double> width_nm;
  int plateau_index = 1;
  std::optional<double> energy_b_t;
  std::optional<double> energy_temperature_k;
  double g_factor = 2.0;
  std::optional<double> hbar_vf_ev_nm;  // overrides trace metadata for spacing -> width

  bool wants(const std::string& name) const { return extractions.empty() || extractions.count(name); }
};

struct OutputConfig {
  std::string directory = "out";
  bool csv = true;
  bool json = false;
};

struct RunConfig {
  DeviceConfig device;
  SweepConfig sweep;
  std::optional<AnalysisConfig> analysis;
  OutputConfig output;
  nlohmann::json document;  // normalized, defaults filled in
};

/// Names of all extractions accepted in analysis.extractions.
const std::vector<std::string>& extraction_names();

/// Every violation is collected; ValidationError::details() lists them with JSON paths.
RunConfig parse_config(const nlohmann::json& document);
RunConfig parse_config_text(const std::string& text);
AnalysisConfig parse_analysis_config(const nlohmann::json& section);

/// Device at the given field and disorder seed.
DeviceLattice build_device(const DeviceConfig& config, double b_tesla,
                           std::optional<std::uint64_t> seed = std::nullopt);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;  // 0 = hardware default
  bool write_config = false;  // also emit config.json (re-runnable with `sweep`)
};

struct RunResult {
  nlohmann::json manifest;
  std::filesystem::path out_dir;
  std::vector<std::string> warnings;
};

/// Runs the sweep, writes CSV/JSON outputs and manifest.json. On failure all
/// files written by this run are removed before the exception propagates.
RunResult run(const RunConfig& config, const RunOptions& options = {});

/// Inputs are CSV files or run directories (manifest.json is followed when present).
ExtractionReport analyze(const std::vector<std::filesystem::path>& inputs,
                         const AnalysisConfig& config);

/// Canned desk-scale configurations: "fig2", "fig3", "fig4".
nlohmann::json repro_config(const std::string& figure);

std::string sha256_hex(const std::string& data);

}  // namespace gcon
