// gcon: command-line front end for the graphene constriction workbench.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gcon/bands.hpp"
#include "gcon/error.hpp"
#include "gcon/workbench.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2, kStrictWarning = 3 };

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  bool strict = false;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App* app, bool needs_config) {
    auto* c = app->add_option("--config", config, "JSON configuration file");
    if (needs_config) c->required();
    app->add_option("--out", out, "Output directory (or report file for analyze)");
    seed_opt = app->add_option("--seed", seed, "Base RNG seed for edge disorder");
    app->add_option("--threads", threads, "Worker threads (default: all cores)")
        ->check(CLI::NonNegativeNumber);
    app->add_flag("--strict", strict, "Treat flagged warnings as errors (exit 3)");
  }

  std::optional<std::uint64_t> seed_override() const {
    return seed_opt && seed_opt->count() > 0 ? std::optional<std::uint64_t>(seed) : std::nullopt;
  }
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gcon::ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw gcon::ValidationError(path + ": malformed JSON: " + e.what());
  }
}

int finish(const std::vector<std::string>& warnings, bool strict) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return strict && !warnings.empty() ? kStrictWarning : kOk;
}

int run_sweep(const Common& c, std::optional<gcon::SweepKind> required) {
  auto cfg = gcon::parse_config(load_json(c.config));
  if (required && cfg.sweep.kind != *required) {
    throw gcon::ValidationError("sweep.kind must be " + gcon::to_string(*required) +
                                " for this subcommand");
  }
  gcon::RunOptions opts;
  if (!c.out.empty()) opts.out_dir = c.out;
  opts.seed = c.seed_override();
  opts.threads = c.threads;
  const auto res = gcon::run(cfg, opts);
  std::cout << "wrote " << res.manifest["outputs"].size() << " outputs + manifest.json to "
            << res.out_dir.string() << '\n';
  return finish(res.warnings, c.strict);
}

int run_build(const Common& c) {
  const auto cfg = gcon::parse_config(load_json(c.config));
  const auto lat = gcon::build_device(cfg.device, cfg.device.field_tesla, c.seed_override());
  const fs::path dir = c.out.empty() ? fs::path(cfg.output.directory) : fs::path(c.out);
  fs::create_directories(dir);
  std::ofstream(dir / "lattice.json") << gcon::export_json(lat) << '\n';
  std::cout << "sites " << lat.size() << ", slices " << lat.slice_count << ", fingerprint "
            << lat.fingerprint_hex() << " -> " << (dir / "lattice.json").string() << '\n';
  return finish(lat.warnings, c.strict);
}

int run_bands(const Common& c, int k_count, const std::vector<double>& energies_mev) {
  const auto cfg = gcon::parse_config(load_json(c.config));
  const auto lat = gcon::build_device(cfg.device, 0.0, c.seed_override());
  const auto bands = gcon::ribbon_bands(lat, k_count);
  const fs::path dir = c.out.empty() ? fs::path(cfg.output.directory) : fs::path(c.out);
  fs::create_directories(dir);
  std::ofstream(dir / "bands.csv") << gcon::bands_csv(bands);
  std::cout << bands.band_count() << " bands x " << k_count << " k points -> "
            << (dir / "bands.csv").string() << '\n';
  for (double e : energies_mev) {
    const auto m = gcon::count_propagating_modes(bands, e * 1e-3);
    std::cout << "E = " << e << " meV: " << m.count << " modes"
              << (m.ambiguous ? " (near a band edge)" : "") << '\n';
  }
  return finish(lat.warnings, c.strict);
}

int run_analyze(const Common& c, const std::vector<std::string>& inputs) {
  gcon::AnalysisConfig acfg;
  if (!c.config.empty()) {
    const auto doc = load_json(c.config);
    if (doc.is_object() && doc.contains("analysis")) {
      acfg = gcon::parse_analysis_config(doc["analysis"]);
    } else {
      acfg = gcon::parse_analysis_config(doc);
    }
  }
  std::vector<fs::path> paths(inputs.begin(), inputs.end());
  const auto report = gcon::analyze(paths, acfg);
  const auto text = report.to_json().dump(1) + "\n";
  if (c.out.empty()) {
    std::cout << text;
  } else {
    fs::path target = c.out;
    if (fs::is_directory(target)) target /= "report.json";
    std::ofstream(target) << text;
    std::cout << "report -> " << target.string() << '\n';
  }
  return finish(report.warnings, c.strict);
}

int run_repro(const Common& c, const std::string& figure) {
  const auto doc = gcon::repro_config(figure);
  auto cfg = gcon::parse_config(doc);
  gcon::RunOptions opts;
  opts.out_dir = c.out.empty() ? fs::path(cfg.output.directory) : fs::path(c.out);
  opts.seed = c.seed_override();
  opts.threads = c.threads;
  opts.write_config = true;
  const auto res = gcon::run(cfg, opts);
  std::cout << figure << ": " << res.manifest["outputs"].size() << " outputs in "
            << res.out_dir.string() << " (" << res.manifest["wall_clock_s"].get<double>()
            << " s)\n";
  return finish(res.warnings, c.strict);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tight-binding transport and analysis workbench for graphene constrictions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gcon::kVersion);

  Common build_c, bands_c, sweep_c, bias_c, analyze_c, repro_c;
  auto* build = app.add_subcommand("build", "Build the device lattice and export it as JSON");
  build_c.attach(build, true);
  auto* bands = app.add_subcommand("bands", "Band structure of the lead unit cell");
  bands_c.attach(bands, true);
  int k_count = 401;
  std::vector<double> mode_energies;
  bands->add_option("--k-count", k_count, "Number of k points")->check(CLI::Range(16, 100000));
  bands->add_option("--modes-at", mode_energies, "Print open-channel counts at these energies (meV)");
  auto* sweep = app.add_subcommand("sweep", "Run the configured sweep");
  sweep_c.attach(sweep, true);
  auto* bias = app.add_subcommand("bias-map", "Run a bias-map sweep");
  bias_c.attach(bias, true);
  auto* analyze = app.add_subcommand("analyze", "Extraction pipeline on CSVs or run directories");
  analyze_c.attach(analyze, false);
  std::vector<std::string> inputs;
  analyze->add_option("inputs", inputs, "CSV files or run directories")->required();
  auto* repro = app.add_subcommand("repro", "Canned desk-scale figure reproductions");
  repro_c.attach(repro, false);
  std::string figure;
  repro->add_option("figure", figure, "fig2, fig3 or fig4")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3", "fig4"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  try {
    if (*build) return run_build(build_c);
    if (*bands) return run_bands(bands_c, k_count, mode_energies);
    if (*sweep) return run_sweep(sweep_c, std::nullopt);
    if (*bias) return run_sweep(bias_c, gcon::SweepKind::bias_map);
    if (*analyze) return run_analyze(analyze_c, inputs);
    if (*repro) return run_repro(repro_c, figure);
  } catch (const gcon::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const gcon::PhysicsError& e) {
    std::cerr << "physics error: " << e.what() << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
