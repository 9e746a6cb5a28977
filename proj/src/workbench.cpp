#include "gcon/workbench.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gcon/error.hpp"
#include "gcon/parallel.hpp"
#include "gcon/pipeline.hpp"

namespace gcon {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 15];
  }
  return out;
}

DeviceLattice build_device(const DeviceConfig& c, double b_tesla, std::optional<std::uint64_t> seed) {
  DeviceLattice lat =
      c.kind == DeviceKind::ribbon
          ? build_ribbon(c.lattice, c.geometry.edge_type, c.ribbon_width_nm, c.ribbon_length_nm,
                         RibbonOptions{c.ribbon_metallic_snap})
          : build_constriction(c.lattice, c.geometry);
  if (c.disorder.edge_removal_probability > 0) {
    DisorderSpec d = c.disorder;
    if (seed) d.rng_seed = *seed;
    const auto notes = lat.warnings;
    lat = apply_edge_disorder(lat, d);
    lat.warnings = notes;
  }
  if (b_tesla != 0) {
    double y0 = 0;
    if (c.gauge_origin_y_nm) {
      y0 = *c.gauge_origin_y_nm;
    } else {
      for (const auto& p : lat.left_lead.positions) y0 += p.y;
      y0 /= static_cast<double>(lat.left_lead.size());
    }
    lat = apply_peierls(lat, b_tesla, y0);
  }
  return lat;
}

namespace {

/// Files written by one run; removed again unless committed.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_);
      created_dir_ = true;
    }
    if (!fs::is_directory(dir_)) throw ValidationError(dir_.string() + " is not a directory");
  }
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : written_) fs::remove(dir_ / f, ec);
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }

  void write(const std::string& name, const std::string& content, const std::string& role,
             json extra = json::object()) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    written_.push_back(name);
    out << content;
    out.close();
    if (!out) throw Error("write failed for " + (dir_ / name).string());
    extra["path"] = name;
    extra["role"] = role;
    extra["sha256"] = sha256_hex(content);
    extra["bytes"] = content.size();
    entries_.push_back(extra);
  }

  void write_untracked(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    written_.push_back(name);
    out << content;
  }

  const json& entries() const { return entries_; }
  const fs::path& dir() const { return dir_; }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  bool created_dir_ = false;
  bool committed_ = false;
  std::vector<std::string> written_;
  json entries_ = json::array();
};

std::string trace_json(const ConductanceTrace& t) {
  json j = {{"gate_V", t.gate_v},
            {"G_2e2_over_h", t.conductance},
            {"flagged", std::vector<int>(t.flagged.begin(), t.flagged.end())},
            {"alpha_F_per_m2", t.alpha_f_per_m2},
            {"dirac_point_V", t.dirac_point_v},
            {"B_T", t.b_tesla},
            {"temperature_K", t.temperature_k},
            {"R_series_ohm", t.series_resistance_ohm},
            {"hbar_vF_eV_nm", t.hbar_vf_ev_nm},
            {"device_fingerprint", t.fingerprint}};
  return j.dump(1) + "\n";
}

std::string bias_map_json(const BiasMap& m) {
  json j = {{"gate_V", m.gate_v},
            {"bias_V", m.bias_v},
            {"Gdiff_2e2_over_h", m.g_diff},
            {"flagged", std::vector<int>(m.flagged.begin(), m.flagged.end())},
            {"alpha_F_per_m2", m.alpha_f_per_m2},
            {"dirac_point_V", m.dirac_point_v},
            {"B_T", m.b_tesla},
            {"hbar_vF_eV_nm", m.hbar_vf_ev_nm},
            {"device_fingerprint", m.fingerprint}};
  return j.dump(1) + "\n";
}

std::string number_tag(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

void note_warnings(std::vector<std::string>& out, const DeviceLattice& lat) {
  for (const auto& w : lat.warnings) {
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
  }
}

void note_flags(std::vector<std::string>& out, const std::string& what, std::size_t n, double window) {
  if (n == 0) return;
  out.push_back(what + ": " + std::to_string(n) + " gate points with |E_F| above " +
                number_tag(window * 1e3) + " meV (t'/3); values flagged");
}

struct Emitter {
  const RunConfig& config;
  OutputSet& out;
  std::vector<std::string>& warnings;

  void trace(const ConductanceTrace& t, const std::string& stem, const std::string& role,
             json extra = json::object()) {
    note_flags(warnings, stem, t.flagged_count(), t.validity_window_ev);
    // the CSV is always written: it is the analysis input
    out.write(stem + ".csv", trace_csv(t), role, extra);
    if (config.output.json) out.write(stem + ".json", trace_json(t), role + "-json", extra);
  }
};

std::string fan_csv(const std::vector<ConductanceTrace>& traces) {
  std::ostringstream os;
  os.precision(17);
  const auto& f = traces.front();
  os << "# alpha_F_per_m2 = " << f.alpha_f_per_m2 << '\n';
  os << "# dirac_point_V = " << f.dirac_point_v << '\n';
  os << "# temperature_K = " << f.temperature_k << '\n';
  os << "# hbar_vF_eV_nm = " << f.hbar_vf_ev_nm << '\n';
  os << "B_T,Vg_V,G_2e2_over_h\n";
  for (const auto& t : traces) {
    for (std::size_t k = 0; k < t.gate_v.size(); ++k) {
      os << t.b_tesla << ',' << t.gate_v[k] << ',' << t.conductance[k] << '\n';
    }
  }
  return os.str();
}

std::string ensemble_csv(const std::vector<ConductanceTrace>& traces,
                         const std::vector<std::uint64_t>& seeds) {
  std::ostringstream os;
  os.precision(17);
  const auto& f = traces.front();
  os << "# alpha_F_per_m2 = " << f.alpha_f_per_m2 << '\n';
  os << "# dirac_point_V = " << f.dirac_point_v << '\n';
  os << "# B_T = " << f.b_tesla << '\n';
  os << "# temperature_K = " << f.temperature_k << '\n';
  os << "# seeds =";
  for (auto s : seeds) os << ' ' << s;
  os << '\n';
  os << "Vg_V,G_mean_2e2_over_h,G_std_2e2_over_h\n";
  const double n = static_cast<double>(traces.size());
  for (std::size_t k = 0; k < f.gate_v.size(); ++k) {
    double mean = 0;
    for (const auto& t : traces) mean += t.conductance[k];
    mean /= n;
    double var = 0;
    for (const auto& t : traces) var += (t.conductance[k] - mean) * (t.conductance[k] - mean);
    const double sd = traces.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    os << f.gate_v[k] << ',' << mean << ',' << sd << '\n';
  }
  return os.str();
}

}  // namespace

RunResult run(const RunConfig& config, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = options.out_dir ? *options.out_dir : fs::path(config.output.directory);
  const int threads = options.threads > 0 ? options.threads : default_thread_count();
  const std::uint64_t base_seed = options.seed ? *options.seed : config.device.disorder.rng_seed;
  const auto& sw = config.sweep;
  TransportOptions topt = sw.transport;
  topt.threads = threads;

  OutputSet out(dir);
  RunResult result;
  result.out_dir = dir;
  Emitter emit{config, out, result.warnings};
  std::vector<std::uint64_t> seeds_used;
  const bool disordered = config.device.disorder.edge_removal_probability > 0;
  if (disordered) seeds_used.push_back(base_seed);

  auto system_at = [&](double b, std::uint64_t seed) {
    auto lat = build_device(config.device, b, seed);
    note_warnings(result.warnings, lat);
    return TransportSystem(lat, topt);
  };

  if (options.write_config) out.write("config.json", config.document.dump(2) + "\n", "config");

  switch (sw.kind) {
    case SweepKind::gate: {
      const auto sys = system_at(config.device.field_tesla, base_seed);
      emit.trace(conductance_vs_gate(sys, sw.gate_v, sw.alpha_f_per_m2, sw.dirac_point_v,
                                     sw.temperature_k),
                 "trace", "trace");
      break;
    }
    case SweepKind::field_fan: {
      std::vector<ConductanceTrace> traces;
      for (std::size_t k = 0; k < sw.field_t.size(); ++k) {
        const auto sys = system_at(sw.field_t[k], base_seed);
        traces.push_back(conductance_vs_gate(sys, sw.gate_v, sw.alpha_f_per_m2, sw.dirac_point_v,
                                             sw.temperature_k));
        char stem[64];
        std::snprintf(stem, sizeof stem, "trace_B%03zu", k);
        emit.trace(traces.back(), stem, "fan-trace", {{"B_T", sw.field_t[k]}});
      }
      out.write("fan.csv", fan_csv(traces), "fan");
      break;
    }
    case SweepKind::bias_map: {
      const auto sys = system_at(config.device.field_tesla, base_seed);
      const auto map = bias_map(sys, sw.gate_v, sw.bias_v, sw.alpha_f_per_m2, sw.dirac_point_v,
                                sw.energy_step_ev);
      note_flags(result.warnings, "bias_map",
                 static_cast<std::size_t>(std::count(map.flagged.begin(), map.flagged.end(), 1)),
                 map.validity_window_ev);
      out.write("bias_map.csv", bias_map_csv(map), "bias-map");
      if (config.output.json) out.write("bias_map.json", bias_map_json(map), "bias-map-json");
      emit.trace(conductance_vs_gate(sys, sw.gate_v, sw.alpha_f_per_m2, sw.dirac_point_v, 0.0),
                 "trace", "trace");
      break;
    }
    case SweepKind::disorder_ensemble: {
      std::vector<std::uint64_t> seeds = sw.seeds;
      if (seeds.empty()) {
        for (int k = 0; k < sw.seed_count; ++k) seeds.push_back(base_seed + static_cast<std::uint64_t>(k));
      }
      if (!disordered) result.warnings.push_back("disorder-ensemble with edge_removal_probability = 0");
      seeds_used = seeds;
      std::vector<ConductanceTrace> traces;
      for (auto seed : seeds) {
        const auto sys = system_at(config.device.field_tesla, seed);
        traces.push_back(conductance_vs_gate(sys, sw.gate_v, sw.alpha_f_per_m2, sw.dirac_point_v,
                                             sw.temperature_k));
        emit.trace(traces.back(), "trace_seed" + std::to_string(seed), "ensemble-trace",
                   {{"seed", seed}});
      }
      out.write("ensemble.csv", ensemble_csv(traces, seeds), "ensemble");
      break;
    }
  }

  if (config.analysis) {
    // analysis reads back the CSVs exactly as written
    InputSet in;
    for (const auto& e : out.entries()) {
      const auto role = e["role"].get<std::string>();
      if (!is_analysis_role(role)) continue;
      const auto path = dir / e["path"].get<std::string>();
      std::ifstream f(path, std::ios::binary);
      std::ostringstream text;
      text << f.rdbuf();
      in.add_csv(text.str(), path.string(), role);
      in.sources.push_back(e["path"].get<std::string>());
    }
    auto report = analyze_inputs(in, *config.analysis);
    for (const auto& w : report.warnings) result.warnings.push_back("analysis: " + w);
    out.write("report.json", report.to_json().dump(1) + "\n", "report");
  }

  const std::string config_text = config.document.dump();
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest;
  manifest["artifact"] = "gcon";
  manifest["version"] = kVersion;
  manifest["config_sha256"] = sha256_hex(config_text);
  manifest["config"] = config.document;
  manifest["sweep_kind"] = to_string(sw.kind);
  manifest["rng_seeds"] = seeds_used;
  manifest["threads"] = threads;
  manifest["wall_clock_s"] = wall;
  manifest["outputs"] = out.entries();
  manifest["warnings"] = result.warnings;
  out.write_untracked("manifest.json", manifest.dump(1) + "\n");
  out.commit();
  result.manifest = manifest;
  return result;
}

}  // namespace gcon
