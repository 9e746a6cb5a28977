#include <algorithm>
#include <cmath>
#include <cstdint>

#include "gcon/error.hpp"
#include "gcon/workbench.hpp"

namespace gcon {

using nlohmann::json;

std::string to_string(SweepKind k) {
  switch (k) {
    case SweepKind::gate: return "gate";
    case SweepKind::field_fan: return "field-fan";
    case SweepKind::bias_map: return "bias-map";
    case SweepKind::disorder_ensemble: return "disorder-ensemble";
  }
  return "?";
}

const std::vector<std::string>& extraction_names() {
  static const std::vector<std::string> names = {
      "plateaus",  "width_semiclassical", "mean_free_path", "crossover",
      "capacitance", "subband_spacing",   "energy_scales"};
  return names;
}

namespace {

using Errors = std::vector<std::string>;

/// Strict reader over one JSON object: every key must be consumed.
class Section {
 public:
  Section(const json* node, std::string path, Errors& errors)
      : node_(node), path_(std::move(path)), errors_(errors) {
    if (node_ && !node_->is_object()) {
      error("", "must be an object");
      node_ = nullptr;
    }
  }

  bool present() const { return node_ != nullptr; }
  bool has(const std::string& key) const { return node_ && node_->contains(key); }
  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void error(const std::string& key, const std::string& what) {
    errors_.push_back((key.empty() ? path_ : path(key)) + ": " + what);
  }

  const json* child(const std::string& key) {
    seen_.push_back(key);
    if (!node_) return nullptr;
    const auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }

  Section section(const std::string& key, bool required = false) {
    const json* c = child(key);
    if (!c && required && node_) error(key, "required section missing");
    return Section(c, path(key), errors_);
  }

  std::optional<double> number(const std::string& key, bool required = false) {
    const json* c = child(key);
    if (!c) {
      if (required && node_) error(key, "required number missing");
      return std::nullopt;
    }
    if (!c->is_number()) {
      error(key, "must be a number");
      return std::nullopt;
    }
    const double v = c->get<double>();
    if (!std::isfinite(v)) {
      error(key, "must be finite");
      return std::nullopt;
    }
    return v;
  }

  double number_or(const std::string& key, double fallback) {
    return number(key).value_or(fallback);
  }

  std::optional<std::int64_t> integer(const std::string& key) {
    const json* c = child(key);
    if (!c) return std::nullopt;
    if (!c->is_number_integer()) {
      error(key, "must be an integer");
      return std::nullopt;
    }
    return c->get<std::int64_t>();
  }

  std::optional<std::uint64_t> unsigned_integer(const std::string& key) {
    const json* c = child(key);
    if (!c) return std::nullopt;
    if (!c->is_number_integer() || c->get<std::int64_t>() < 0) {
      error(key, "must be a non-negative integer");
      return std::nullopt;
    }
    return c->get<std::uint64_t>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const json* c = child(key);
    if (!c) return std::nullopt;
    if (!c->is_boolean()) {
      error(key, "must be true or false");
      return std::nullopt;
    }
    return c->get<bool>();
  }

  std::optional<std::string> string(const std::string& key, bool required = false) {
    const json* c = child(key);
    if (!c) {
      if (required && node_) error(key, "required string missing");
      return std::nullopt;
    }
    if (!c->is_string()) {
      error(key, "must be a string");
      return std::nullopt;
    }
    return c->get<std::string>();
  }

  std::optional<std::vector<std::string>> strings(const std::string& key) {
    const json* c = child(key);
    if (!c) return std::nullopt;
    if (!c->is_array()) {
      error(key, "must be an array of strings");
      return std::nullopt;
    }
    std::vector<std::string> out;
    for (std::size_t k = 0; k < c->size(); ++k) {
      if (!(*c)[k].is_string()) {
        error(key + "[" + std::to_string(k) + "]", "must be a string");
        continue;
      }
      out.push_back((*c)[k].get<std::string>());
    }
    return out;
  }

  /// Either {"values": [...]} or {"start", "stop", "count"}.
  std::vector<double> grid(const std::string& key, bool required) {
    Section g = section(key, required);
    if (!g.present()) return {};
    std::vector<double> out;
    if (g.has("values")) {
      const json* v = g.child("values");
      if (!v->is_array() || v->empty()) {
        g.error("values", "must be a non-empty array of numbers");
      } else {
        for (std::size_t k = 0; k < v->size(); ++k) {
          if (!(*v)[k].is_number()) {
            g.error("values[" + std::to_string(k) + "]", "must be a number");
            return {};
          }
          out.push_back((*v)[k].get<double>());
        }
      }
      if (g.has("start") || g.has("stop") || g.has("count")) {
        g.error("", "give either values or start/stop/count, not both");
      }
      g.child("start");
      g.child("stop");
      g.child("count");
    } else {
      const auto start = g.number("start", true);
      const auto stop = g.number("stop", true);
      const auto count = g.integer("count");
      if (!count) {
        g.error("count", "required integer missing");
      } else if (*count < 1) {
        g.error("count", "must be >= 1");
      } else if (start && stop) {
        if (*count == 1) {
          if (*start != *stop) g.error("count", "a single point needs start == stop");
          out.push_back(*start);
        } else {
          for (std::int64_t k = 0; k < *count; ++k) {
            out.push_back(*start + (*stop - *start) * static_cast<double>(k) /
                                       static_cast<double>(*count - 1));
          }
        }
      }
    }
    g.finish();
    bool up = true, down = true;
    for (std::size_t k = 1; k < out.size(); ++k) {
      up = up && out[k] > out[k - 1];
      down = down && out[k] < out[k - 1];
    }
    if (out.size() > 1 && !up && !down) {
      g.error("", "grid must be strictly monotone");
      return {};
    }
    return out;
  }

  void finish() {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        errors_.push_back(path(key) + ": unknown key");
      }
    }
  }

 private:
  const json* node_;
  std::string path_;
  Errors& errors_;
  std::vector<std::string> seen_;
};

void require(Section& s, const std::string& key, bool ok, const std::string& what) {
  if (!ok) s.error(key, what);
}

void parse_lattice(Section s, LatticeParams& p) {
  p.cc_distance_nm = s.number_or("cc_distance_nm", p.cc_distance_nm);
  p.hopping_ev = s.number_or("hopping_eV", p.hopping_ev);
  p.scaling_factor = s.number_or("scaling_factor", p.scaling_factor);
  require(s, "cc_distance_nm", p.cc_distance_nm > 0, "must be positive");
  require(s, "hopping_eV", p.hopping_ev > 0, "must be positive");
  require(s, "scaling_factor", p.scaling_factor >= 1, "must be >= 1");
  s.finish();
}

void parse_geometry(Section s, DeviceConfig& d) {
  if (!s.present()) return;
  if (auto e = s.string("edge_type")) {
    if (*e == "armchair" || *e == "zigzag") {
      d.geometry.edge_type = edge_type_from_string(*e);
    } else {
      s.error("edge_type", "must be armchair or zigzag");
    }
  }
  if (d.kind == DeviceKind::ribbon) {
    const auto w = s.number("width", true);
    const auto l = s.number("length", true);
    if (w) {
      d.ribbon_width_nm = *w;
      require(s, "width", *w > 0, "must be positive");
    }
    if (l) {
      d.ribbon_length_nm = *l;
      require(s, "length", *l > 0, "must be positive");
    }
    d.ribbon_metallic_snap = s.boolean("metallic_snap").value_or(false);
    s.finish();
    return;
  }
  auto& g = d.geometry;
  const auto lead = s.number("lead_width", true);
  const auto width = s.number("constriction_width", true);
  const auto length = s.number("constriction_length", true);
  const auto total = s.number("total_length", true);
  if (lead) g.lead_width_nm = *lead;
  if (width) g.constriction_width_nm = *width;
  if (length) g.constriction_length_nm = *length;
  if (total) g.total_length_nm = *total;
  if (auto p = s.string("profile")) {
    if (*p == "abrupt" || *p == "wedge" || *p == "smooth-cosine") {
      g.profile = profile_from_string(*p);
    } else {
      s.error("profile", "must be abrupt, wedge or smooth-cosine");
    }
  }
  g.metallic_snap = s.boolean("metallic_snap").value_or(true);
  if (lead) require(s, "lead_width", *lead > 0, "must be positive");
  if (width) {
    require(s, "constriction_width", *width > 0, "must be positive");
    if (lead && *width > *lead) s.error("constriction_width", "exceeds lead_width");
  }
  if (length) {
    require(s, "constriction_length", *length >= 0, "must be >= 0");
    if (total && *length > *total) s.error("constriction_length", "exceeds total_length");
  }
  if (total) require(s, "total_length", *total > 0, "must be positive");
  s.finish();
}

void parse_disorder(Section s, DisorderSpec& d) {
  d.edge_removal_probability = s.number_or("edge_removal_probability", 0.0);
  if (auto depth = s.integer("edge_depth")) d.edge_depth = static_cast<int>(*depth);
  if (auto seed = s.unsigned_integer("seed")) d.rng_seed = *seed;
  require(s, "edge_removal_probability",
          d.edge_removal_probability >= 0 && d.edge_removal_probability <= 1, "must lie in [0, 1]");
  require(s, "edge_depth", d.edge_depth >= 1, "must be >= 1");
  s.finish();
}

void parse_device(Section s, DeviceConfig& d) {
  if (!s.present()) return;
  if (auto k = s.string("kind")) {
    if (*k == "ribbon") {
      d.kind = DeviceKind::ribbon;
    } else if (*k != "constriction") {
      s.error("kind", "must be constriction or ribbon");
    }
  }
  parse_lattice(s.section("lattice"), d.lattice);
  parse_geometry(s.section("geometry", true), d);
  parse_disorder(s.section("disorder"), d.disorder);
  d.field_tesla = s.number_or("field_T", 0.0);
  d.gauge_origin_y_nm = s.number("gauge_origin_y_nm");
  s.finish();
}

void parse_transport(Section s, TransportOptions& t) {
  t.eta_ev = s.number_or("eta_eV", t.eta_ev);
  if (auto m = s.integer("max_iterations")) t.max_iterations = static_cast<int>(*m);
  require(s, "eta_eV", t.eta_ev > 0, "must be positive");
  require(s, "max_iterations", t.max_iterations >= 1, "must be >= 1");
  s.finish();
}

void parse_sweep(Section s, SweepConfig& w) {
  if (!s.present()) return;
  const auto kind = s.string("kind", true);
  if (kind) {
    if (*kind == "gate") {
      w.kind = SweepKind::gate;
    } else if (*kind == "field-fan") {
      w.kind = SweepKind::field_fan;
    } else if (*kind == "bias-map") {
      w.kind = SweepKind::bias_map;
    } else if (*kind == "disorder-ensemble") {
      w.kind = SweepKind::disorder_ensemble;
    } else {
      s.error("kind", "must be gate, field-fan, bias-map or disorder-ensemble");
    }
  }
  w.gate_v = s.grid("gate_V", true);
  w.field_t = s.grid("field_T", w.kind == SweepKind::field_fan);
  w.bias_v = s.grid("bias_V", w.kind == SweepKind::bias_map);
  w.alpha_f_per_m2 = s.number_or("alpha_F_per_m2", w.alpha_f_per_m2);
  w.dirac_point_v = s.number_or("dirac_point_V", w.dirac_point_v);
  w.temperature_k = s.number_or("temperature_K", w.temperature_k);
  w.energy_step_ev = s.number_or("energy_step_eV", 0.0);
  require(s, "alpha_F_per_m2", w.alpha_f_per_m2 > 0, "must be positive");
  require(s, "temperature_K", w.temperature_k >= 0, "must be >= 0");
  require(s, "energy_step_eV", w.energy_step_ev >= 0, "must be >= 0");
  if (w.kind != SweepKind::field_fan && s.has("field_T")) s.error("field_T", "only used by field-fan sweeps");
  if (w.kind != SweepKind::bias_map && s.has("bias_V")) s.error("bias_V", "only used by bias-map sweeps");
  if (w.kind == SweepKind::bias_map && !w.bias_v.empty() &&
      std::find(w.bias_v.begin(), w.bias_v.end(), 0.0) == w.bias_v.end()) {
    s.error("bias_V", "must contain 0");
  }
  if (w.kind == SweepKind::bias_map && w.temperature_k > 0) {
    s.error("temperature_K", "bias maps are computed at zero temperature");
  }
  if (w.kind == SweepKind::field_fan) {
    for (double b : w.field_t) {
      if (b < 0) {
        s.error("field_T", "fields must be >= 0");
        break;
      }
    }
  }
  if (const json* seeds = s.child("seeds")) {
    if (!seeds->is_array() || seeds->empty()) {
      s.error("seeds", "must be a non-empty array of non-negative integers");
    } else {
      for (std::size_t k = 0; k < seeds->size(); ++k) {
        const auto& v = (*seeds)[k];
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
          s.error("seeds[" + std::to_string(k) + "]", "must be a non-negative integer");
        } else {
          w.seeds.push_back((*seeds)[k].get<std::uint64_t>());
        }
      }
    }
  }
  if (auto n = s.integer("seed_count")) {
    w.seed_count = static_cast<int>(*n);
    require(s, "seed_count", *n >= 1, "must be >= 1");
  }
  if (w.kind == SweepKind::disorder_ensemble) {
    if (w.seeds.empty() && w.seed_count == 0) s.error("seeds", "give seeds or seed_count");
    if (!w.seeds.empty() && w.seed_count != 0) s.error("seed_count", "give seeds or seed_count, not both");
  } else if (s.has("seeds") || s.has("seed_count")) {
    s.error(s.has("seeds") ? "seeds" : "seed_count", "only used by disorder-ensemble sweeps");
  }
  parse_transport(s.section("transport"), w.transport);
  s.finish();
}

void parse_analysis(Section s, AnalysisConfig& a) {
  if (auto names = s.strings("extractions")) {
    for (std::size_t k = 0; k < names->size(); ++k) {
      const auto& n = (*names)[k];
      const auto& all = extraction_names();
      if (std::find(all.begin(), all.end(), n) == all.end()) {
        s.error("extractions[" + std::to_string(k) + "]", "unknown extraction '" + n + "'");
      } else {
        a.extractions.insert(n);
      }
    }
  }
  a.plateau_tolerance = s.number_or("plateau_tolerance", a.plateau_tolerance);
  a.plateau_min_extent = s.number_or("plateau_min_extent", a.plateau_min_extent);
  a.length_nm = s.number("length_nm");
  a.width_nm = s.number("width_nm");
  if (auto i = s.integer("plateau_index")) a.plateau_index = static_cast<int>(*i);
  a.energy_b_t = s.number("energy_scale_B_T");
  a.energy_temperature_k = s.number("energy_scale_temperature_K");
  a.g_factor = s.number_or("g_factor", a.g_factor);
  a.hbar_vf_ev_nm = s.number("hbar_vF_eV_nm");
  require(s, "plateau_tolerance", a.plateau_tolerance > 0, "must be positive");
  require(s, "plateau_min_extent", a.plateau_min_extent >= 0 && a.plateau_min_extent < 1,
          "must lie in [0, 1)");
  if (a.length_nm) require(s, "length_nm", *a.length_nm > 0, "must be positive");
  if (a.width_nm) require(s, "width_nm", *a.width_nm > 0, "must be positive");
  require(s, "plateau_index", a.plateau_index >= 1, "must be >= 1");
  if (a.energy_b_t) require(s, "energy_scale_B_T", *a.energy_b_t >= 0, "must be >= 0");
  if (a.energy_temperature_k) {
    require(s, "energy_scale_temperature_K", *a.energy_temperature_k >= 0, "must be >= 0");
  }
  require(s, "g_factor", a.g_factor >= 0, "must be >= 0");
  if (a.hbar_vf_ev_nm) require(s, "hbar_vF_eV_nm", *a.hbar_vf_ev_nm > 0, "must be positive");
  s.finish();
}

void parse_output(Section s, OutputConfig& o) {
  if (!s.present()) return;
  if (auto d = s.string("directory")) {
    o.directory = *d;
    require(s, "directory", !d->empty(), "must not be empty");
  }
  if (auto f = s.strings("formats")) {
    o.csv = o.json = false;
    for (const auto& x : *f) {
      if (x == "csv") {
        o.csv = true;
      } else if (x == "json") {
        o.json = true;
      } else {
        s.error("formats", "unknown format '" + x + "' (csv, json)");
      }
    }
    require(s, "formats", o.csv || o.json, "must name at least one format");
  }
  s.finish();
}

json grid_json(const std::vector<double>& g) { return json{{"values", g}}; }

json normalized(const RunConfig& c) {
  const auto& d = c.device;
  json dev;
  dev["kind"] = d.kind == DeviceKind::ribbon ? "ribbon" : "constriction";
  dev["lattice"] = {{"cc_distance_nm", d.lattice.cc_distance_nm},
                    {"hopping_eV", d.lattice.hopping_ev},
                    {"scaling_factor", d.lattice.scaling_factor}};
  if (d.kind == DeviceKind::ribbon) {
    dev["geometry"] = {{"edge_type", to_string(d.geometry.edge_type)},
                       {"width", d.ribbon_width_nm},
                       {"length", d.ribbon_length_nm},
                       {"metallic_snap", d.ribbon_metallic_snap}};
  } else {
    const auto& g = d.geometry;
    dev["geometry"] = {{"edge_type", to_string(g.edge_type)},
                       {"lead_width", g.lead_width_nm},
                       {"constriction_width", g.constriction_width_nm},
                       {"constriction_length", g.constriction_length_nm},
                       {"total_length", g.total_length_nm},
                       {"profile", to_string(g.profile)},
                       {"metallic_snap", g.metallic_snap}};
  }
  dev["disorder"] = {{"edge_removal_probability", d.disorder.edge_removal_probability},
                     {"edge_depth", d.disorder.edge_depth},
                     {"seed", d.disorder.rng_seed}};
  dev["field_T"] = d.field_tesla;
  if (d.gauge_origin_y_nm) dev["gauge_origin_y_nm"] = *d.gauge_origin_y_nm;

  const auto& w = c.sweep;
  json sw;
  sw["kind"] = to_string(w.kind);
  sw["gate_V"] = grid_json(w.gate_v);
  if (w.kind == SweepKind::field_fan) sw["field_T"] = grid_json(w.field_t);
  if (w.kind == SweepKind::bias_map) sw["bias_V"] = grid_json(w.bias_v);
  if (w.kind == SweepKind::disorder_ensemble) {
    if (!w.seeds.empty()) {
      sw["seeds"] = w.seeds;
    } else {
      sw["seed_count"] = w.seed_count;
    }
  }
  sw["alpha_F_per_m2"] = w.alpha_f_per_m2;
  sw["dirac_point_V"] = w.dirac_point_v;
  sw["temperature_K"] = w.temperature_k;
  sw["energy_step_eV"] = w.energy_step_ev;
  sw["transport"] = {{"eta_eV", w.transport.eta_ev}, {"max_iterations", w.transport.max_iterations}};

  json out;
  out["device"] = dev;
  out["sweep"] = sw;
  if (c.analysis) {
    const auto& a = *c.analysis;
    json an;
    an["extractions"] = std::vector<std::string>(a.extractions.begin(), a.extractions.end());
    an["plateau_tolerance"] = a.plateau_tolerance;
    an["plateau_min_extent"] = a.plateau_min_extent;
    if (a.length_nm) an["length_nm"] = *a.length_nm;
    if (a.width_nm) an["width_nm"] = *a.width_nm;
    an["plateau_index"] = a.plateau_index;
    if (a.energy_b_t) an["energy_scale_B_T"] = *a.energy_b_t;
    if (a.energy_temperature_k) an["energy_scale_temperature_K"] = *a.energy_temperature_k;
    an["g_factor"] = a.g_factor;
    if (a.hbar_vf_ev_nm) an["hbar_vF_eV_nm"] = *a.hbar_vf_ev_nm;
    out["analysis"] = an;
  }
  json formats = json::array();
  if (c.output.csv) formats.push_back("csv");
  if (c.output.json) formats.push_back("json");
  out["output"] = {{"directory", c.output.directory}, {"formats", formats}};
  return out;
}

}  // namespace

RunConfig parse_config(const json& document) {
  Errors errors;
  RunConfig c;
  Section root(&document, "", errors);
  if (root.present()) {
    parse_device(root.section("device", true), c.device);
    parse_sweep(root.section("sweep", true), c.sweep);
    Section an = root.section("analysis");
    if (an.present()) {
      c.analysis.emplace();
      parse_analysis(an, *c.analysis);
    }
    parse_output(root.section("output"), c.output);
    root.finish();
  }
  if (!errors.empty()) {
    std::string what = "invalid config (" + std::to_string(errors.size()) + " error" +
                       (errors.size() == 1 ? "" : "s") + ")";
    for (const auto& e : errors) what += "\n  " + e;
    throw ValidationError(what, errors);
  }
  c.document = normalized(c);
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed config: ") + e.what(),
                          {std::string("malformed config: ") + e.what()});
  }
  return parse_config(doc);
}

AnalysisConfig parse_analysis_config(const json& section) {
  Errors errors;
  AnalysisConfig a;
  parse_analysis(Section(&section, "analysis", errors), a);
  if (!errors.empty()) {
    std::string what = "invalid analysis config";
    for (const auto& e : errors) what += "\n  " + e;
    throw ValidationError(what, errors);
  }
  return a;
}

}  // namespace gcon
