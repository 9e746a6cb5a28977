#include <algorithm>
#include <cmath>
#include <map>

#include "gcon/csv.hpp"
#include "gcon/error.hpp"
#include "gcon/pipeline.hpp"
#include "gcon/workbench.hpp"

namespace gcon {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

ConductanceTrace electron_side(const ConductanceTrace& tr) {
  ConductanceTrace out = tr;
  out.gate_v.clear();
  out.conductance.clear();
  out.flagged.clear();
  for (std::size_t k = 0; k < tr.gate_v.size(); ++k) {
    if (tr.gate_v[k] < tr.dirac_point_v) continue;
    out.gate_v.push_back(tr.gate_v[k]);
    out.conductance.push_back(tr.conductance[k]);
    out.flagged.push_back(k < tr.flagged.size() ? tr.flagged[k] : 0);
  }
  return out;
}

const Plateau* plateau_near(const PlateauSet& set, double value, double tol) {
  for (const auto& p : set.plateaus) {
    if (std::abs(p.mean - value) <= tol) return &p;
  }
  return nullptr;
}

void add_plateaus(ExtractionReport& r, const InputSet& in, const AnalysisConfig& cfg) {
  const auto& tr = in.primary().trace;
  const auto set = detect_plateaus(tr, cfg.plateau_tolerance, cfg.plateau_min_extent);
  r.plateaus = set.plateaus;
  r.set("plateau_count", Quantity::of(static_cast<double>(set.plateaus.size()), "1",
                                      "sliding flatness, tolerance " + fmt(cfg.plateau_tolerance) +
                                          ", min extent " + fmt(cfg.plateau_min_extent) + " of span"));
  std::vector<const IngestedTrace*> ensemble;
  for (const auto& t : in.traces) {
    if (t.role == "ensemble-trace") ensemble.push_back(&t.data);
  }
  if (ensemble.empty()) return;
  int kept = 0;
  for (const auto* t : ensemble) {
    const auto s = detect_plateaus(t->trace, cfg.plateau_tolerance, cfg.plateau_min_extent);
    if (plateau_near(s, 1.0, cfg.plateau_tolerance)) ++kept;
  }
  r.set("first_plateau_retention",
        Quantity::of(static_cast<double>(kept) / static_cast<double>(ensemble.size()), "1",
                     "fraction of " + std::to_string(ensemble.size()) +
                         " ensemble traces with a plateau at 1 x 2e^2/h"));
}

void add_width(ExtractionReport& r, const InputSet& in) {
  const std::string method = "least squares G = (2/pi) k_F W through origin";
  try {
    const auto fit = fit_width_semiclassical(in.primary().trace);
    r.set("width_semiclassical_nm",
          Quantity::of(fit.combined.value, "nm", method + ", both carriers", fit.combined.residual));
    auto side = [&](const char* name, const std::optional<FitValue>& f, const char* carrier) {
      if (f) {
        r.set(name, Quantity::of(f->value, "nm", method + ", " + carrier, f->residual));
      } else {
        r.set(name, Quantity::absent("nm", method + ", " + carrier, "fewer than 8 usable points"));
      }
    };
    side("width_semiclassical_electrons_nm", fit.electrons, "electrons");
    side("width_semiclassical_holes_nm", fit.holes, "holes");
  } catch (const ValidationError& e) {
    r.set("width_semiclassical_nm", Quantity::absent("nm", method, e.what()));
  }
}

void add_mfp(ExtractionReport& r, const InputSet& in, const AnalysisConfig& cfg) {
  const auto& p = in.primary();
  const auto length = cfg.length_nm ? cfg.length_nm : p.length_nm;
  const auto width = cfg.width_nm ? cfg.width_nm : p.width_nm;
  const std::string einstein = "Einstein relation lambda = sigma h / (2 e^2 k_F)";
  const std::string transmission = "lambda = (G / G_bal) L";
  if (!length || !width) {
    const char* why = "sample length and width unknown (L_nm / W_nm)";
    r.set("mfp_einstein_nm", Quantity::absent("nm", einstein, why));
    r.set("mfp_transmission_nm", Quantity::absent("nm", transmission, why));
    r.set("transmission_fraction", Quantity::absent("1", "G / G_bal", why));
    return;
  }
  r.mfp_vs_kf = mean_free_path(p.trace, *length, *width);
  if (r.mfp_vs_kf.empty()) {
    const char* why = "no points with k_F > 0";
    r.set("mfp_einstein_nm", Quantity::absent("nm", einstein, why));
    r.set("mfp_transmission_nm", Quantity::absent("nm", transmission, why));
    r.set("transmission_fraction", Quantity::absent("1", "G / G_bal", why));
    return;
  }
  double le = 0, lt = 0, tf = 0;
  std::size_t n = 0, inconsistent = 0;
  for (std::size_t k = 0; k < p.trace.gate_v.size(); ++k) {
    const auto c = gate_to_kf(p.trace.gate_v[k], p.trace.alpha_f_per_m2, p.trace.dirac_point_v);
    if (!(c.kf_per_m > 0) || !(p.trace.conductance[k] > 0)) continue;
    const auto t = transmission_fraction(p.trace.conductance[k], c.kf_per_m, *width, *length);
    le += mean_free_path(p.trace.conductance[k], c.kf_per_m, *length, *width);
    lt += t.lambda_nm;
    tf += t.fraction;
    if (t.inconsistent) ++inconsistent;
    ++n;
  }
  if (n == 0) {
    r.set("mfp_einstein_nm", Quantity::absent("nm", einstein, "no conducting points"));
    r.set("mfp_transmission_nm", Quantity::absent("nm", transmission, "no conducting points"));
    r.set("transmission_fraction", Quantity::absent("1", "G / G_bal", "no conducting points"));
    return;
  }
  const double dn = static_cast<double>(n);
  const std::string over = " (mean over " + std::to_string(n) + " points)";
  r.set("mfp_einstein_nm", Quantity::of(le / dn, "nm", einstein + over));
  r.set("mfp_transmission_nm", Quantity::of(lt / dn, "nm", transmission + over));
  r.set("transmission_fraction", Quantity::of(tf / dn, "1", "G / G_bal" + over));
  if (inconsistent > 0) {
    r.warnings.push_back(std::to_string(inconsistent) +
                         " points exceed the ballistic limit by more than 5% (inconsistent geometry)");
  }
}

void add_crossover(ExtractionReport& r, const InputSet& in, const AnalysisConfig& cfg) {
  const std::string method = "piecewise constant / linear-through-origin fit of plateau centre vs B";
  const double target = 2.0 * cfg.plateau_index - 1.0;
  std::vector<std::pair<double, double>> pts;
  double alpha = 0;
  for (const auto& t : in.traces) {
    if (t.role != "fan-trace") continue;
    const auto side = electron_side(t.data.trace);
    if (side.gate_v.size() < 2) continue;
    const auto set = detect_plateaus(side, cfg.plateau_tolerance, cfg.plateau_min_extent);
    if (const auto* p = plateau_near(set, target, cfg.plateau_tolerance)) {
      pts.emplace_back(side.b_tesla, p->center_v - side.dirac_point_v);
      alpha = side.alpha_f_per_m2;
    }
  }
  if (pts.size() < 8) {
    const std::string why = "needs plateau positions at >= 8 fields, found " + std::to_string(pts.size());
    r.set("crossover_B_T", Quantity::absent("T", method, why));
    r.set("width_crossover_nm", Quantity::absent("nm", "W = 2 hbar k_F / (e B*)", why));
    return;
  }
  const auto fit = crossover_width(pts, alpha, cfg.plateau_index);
  auto q = Quantity::of(fit.b_star_t, "T", method, fit.residual);
  auto w = Quantity::of(fit.width_nm, "nm", "W = 2 hbar k_F / (e B*), plateau " +
                                                std::to_string(cfg.plateau_index), fit.residual);
  if (fit.ambiguous) {
    q.note = w.note = "saturated and linear regimes not distinguishable";
    r.warnings.push_back("crossover fit ambiguous");
  }
  r.set("crossover_B_T", q);
  r.set("width_crossover_nm", w);
  r.set("crossover_kF_per_m", Quantity::of(fit.kf_per_m, "1/m", "gate_to_kf of saturated plateau centre"));
}

void add_capacitance(ExtractionReport& r, const InputSet& in, const AnalysisConfig& cfg) {
  const std::string method = "least squares n = nu e B / h vs V_g - V_D (electron side)";
  const InputSet::Trace* best = nullptr;
  for (const auto& t : in.traces) {
    if (t.data.trace.b_tesla > 0 && (!best || t.data.trace.b_tesla > best->data.trace.b_tesla)) {
      best = &t;
    }
  }
  if (!best) {
    r.set("alpha_F_per_m2", Quantity::absent("F/m^2", method, "no trace at finite field"));
    return;
  }
  const auto side = electron_side(best->data.trace);
  const auto set = detect_plateaus(side, cfg.plateau_tolerance, cfg.plateau_min_extent);
  std::vector<std::pair<double, double>> nu_vg;
  for (const auto& p : set.plateaus) {
    const double m = std::round(p.mean);
    if (m >= 1 && static_cast<long>(m) % 2 == 1 && std::abs(p.mean - m) <= cfg.plateau_tolerance) {
      nu_vg.emplace_back(2.0 * m, p.center_v);
    }
  }
  if (nu_vg.size() < 2) {
    r.set("alpha_F_per_m2", Quantity::absent("F/m^2", method,
                                             "fewer than 2 odd-integer plateaus at B = " +
                                                 fmt(side.b_tesla) + " T"));
    return;
  }
  const auto fit = extract_capacitance(nu_vg, side.b_tesla, side.dirac_point_v);
  r.set("alpha_F_per_m2", Quantity::of(fit.alpha_f_per_m2, "F/m^2",
                                       method + " at B = " + fmt(side.b_tesla) + " T",
                                       fit.residual));
}

void add_spacing(ExtractionReport& r, const InputSet& in, const AnalysisConfig& cfg) {
  const std::string method = "widest half plateau in gate vs |V_sd|";
  if (in.maps.empty()) {
    r.set("delta_E_meV", Quantity::absent("meV", method, "no bias map"));
    r.set("width_spacing_nm", Quantity::absent("nm", "W = hbar v_F pi / dE", "no bias map"));
    return;
  }
  const auto& map = in.maps.front().map;
  double hv = PhysicalConstants{}.hbar_vf_ev_nm();
  std::string source = "v_F = 1e6 m/s";
  if (cfg.hbar_vf_ev_nm) {
    hv = *cfg.hbar_vf_ev_nm;
    source = "configured hbar v_F";
  } else if (map.hbar_vf_ev_nm > 0) {
    hv = map.hbar_vf_ev_nm;
    source = "lattice hbar v_F from map metadata";
  }
  try {
    const auto s = subband_spacing_from_bias(map, hv, cfg.plateau_tolerance, cfg.plateau_min_extent);
    double step = 0;
    for (std::size_t k = 1; k < map.bias_v.size(); ++k) {
      step = std::max(step, std::abs(map.bias_v[k] - map.bias_v[k - 1]));
    }
    r.set("delta_E_meV", Quantity::of(s.delta_e_mev, "meV", method, step * 1e3));
    r.set("width_spacing_nm", Quantity::of(s.width_nm, "nm", "W = hbar v_F pi / dE, " + source));
    r.set("half_plateau_value", Quantity::of(s.half_plateau_value, "2e^2/h", method));
  } catch (const Error& e) {
    r.set("delta_E_meV", Quantity::absent("meV", method, e.what()));
    r.set("width_spacing_nm", Quantity::absent("nm", "W = hbar v_F pi / dE", e.what()));
  }
}

void add_energy_scales(ExtractionReport& r, const InputSet& in, const AnalysisConfig& cfg) {
  double b = 0, t = 0;
  if (!in.traces.empty()) {
    b = in.primary().trace.b_tesla;
    t = in.primary().trace.temperature_k;
  } else if (!in.maps.empty()) {
    b = in.maps.front().map.b_tesla;
  }
  if (cfg.energy_b_t) b = *cfg.energy_b_t;
  if (cfg.energy_temperature_k) t = *cfg.energy_temperature_k;
  const auto e = energy_scales(b, t, cfg.g_factor);
  r.set("zeeman_ueV", Quantity::of(e.zeeman_ev * 1e6, "ueV", "g mu_B B at B = " + fmt(b) + " T"));
  r.set("thermal_ueV", Quantity::of(e.thermal_ev * 1e6, "ueV", "k_B T at T = " + fmt(t) + " K"));
  if (t > 0) {
    r.set("zeeman_thermal_ratio", Quantity::of(e.ratio, "1", "g mu_B B / k_B T"));
  } else {
    r.set("zeeman_thermal_ratio", Quantity::absent("1", "g mu_B B / k_B T", "temperature is zero"));
  }
}

}  // namespace

const IngestedTrace& InputSet::primary() const {
  if (traces.empty()) throw ValidationError("no conductance trace among the inputs");
  const Trace* best = &traces.front();
  for (const auto& t : traces) {
    if (std::abs(t.data.trace.b_tesla) < std::abs(best->data.trace.b_tesla)) best = &t;
  }
  return best->data;
}

void InputSet::add_csv(const std::string& text, const std::string& source, const std::string& role) {
  if (role == "bias-map") {
    maps.push_back(parse_bias_map_csv(text, source));
    return;
  }
  if (!role.empty()) {
    traces.push_back({role, parse_trace_csv(text, source)});
    return;
  }
  if (sniff_csv_kind(text, source) == CsvKind::bias_map) {
    maps.push_back(parse_bias_map_csv(text, source));
  } else {
    traces.push_back({"trace", parse_trace_csv(text, source)});
  }
}

bool is_analysis_role(const std::string& role) {
  return role == "trace" || role == "fan-trace" || role == "ensemble-trace" || role == "bias-map";
}

InputSet load_inputs(const std::vector<fs::path>& inputs) {
  InputSet in;
  for (const auto& path : inputs) {
    if (fs::is_directory(path)) {
      const auto manifest = path / "manifest.json";
      if (fs::exists(manifest)) {
        json m;
        try {
          m = json::parse(read_text_file(manifest));
        } catch (const json::parse_error& e) {
          throw ValidationError(manifest.string() + ": malformed manifest: " + e.what());
        }
        if (!m.contains("outputs") || !m["outputs"].is_array()) {
          throw ValidationError(manifest.string() + ": manifest has no outputs list");
        }
        for (const auto& o : m["outputs"]) {
          const auto role = o.value("role", std::string());
          if (!is_analysis_role(role)) continue;
          const auto file = path / o.value("path", std::string());
          in.add_csv(read_text_file(file), file.string(), role);
          in.sources.push_back(file.string());
        }
      } else {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path)) {
          if (e.path().extension() == ".csv") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
          in.add_csv(read_text_file(f), f.string(), "");
          in.sources.push_back(f.string());
        }
      }
    } else {
      if (!fs::exists(path)) throw ValidationError(path.string() + ": no such file");
      in.add_csv(read_text_file(path), path.string(), "");
      in.sources.push_back(path.string());
    }
  }
  if (in.traces.empty() && in.maps.empty()) throw ValidationError("no input data found");
  return in;
}

ExtractionReport analyze_inputs(const InputSet& in, const AnalysisConfig& cfg) {
  ExtractionReport r;
  r.inputs = in.sources;
  const bool have_trace = !in.traces.empty();
  auto skip = [&](const std::string& name, const std::string& unit, const std::string& method) {
    r.set(name, Quantity::absent(unit, method, "no conductance trace among the inputs"));
  };
  if (cfg.wants("plateaus")) {
    if (have_trace) {
      add_plateaus(r, in, cfg);
    } else {
      skip("plateau_count", "1", "sliding flatness");
    }
  }
  if (cfg.wants("width_semiclassical")) {
    if (have_trace) {
      add_width(r, in);
    } else {
      skip("width_semiclassical_nm", "nm", "least squares G = (2/pi) k_F W through origin");
    }
  }
  if (cfg.wants("mean_free_path")) {
    if (have_trace) {
      add_mfp(r, in, cfg);
    } else {
      skip("mfp_einstein_nm", "nm", "Einstein relation lambda = sigma h / (2 e^2 k_F)");
    }
  }
  if (cfg.wants("crossover")) add_crossover(r, in, cfg);
  if (cfg.wants("capacitance")) add_capacitance(r, in, cfg);
  if (cfg.wants("subband_spacing")) add_spacing(r, in, cfg);
  if (cfg.wants("energy_scales")) add_energy_scales(r, in, cfg);
  for (const auto& t : in.traces) {
    const auto n = t.data.trace.flagged_count();
    if (n > 0) {
      r.warnings.push_back(t.data.source + ": " + std::to_string(n) +
                           " points outside the lattice validity window");
    }
  }
  return r;
}

ExtractionReport analyze(const std::vector<fs::path>& inputs, const AnalysisConfig& config) {
  return analyze_inputs(load_inputs(inputs), config);
}

}  // namespace gcon
