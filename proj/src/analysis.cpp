#include "gcon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "gcon/error.hpp"

namespace gcon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_flagged(const ConductanceTrace& trace, std::size_t k) {
  return k < trace.flagged.size() && trace.flagged[k] != 0;
}

FitValue fit_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  FitValue f;
  f.points = x.size();
  if (sxx == 0) {
    f.residual = kInf;
    return f;
  }
  f.value = sxy / sxx;
  double sse = 0;
  for (std::size_t k = 0; k < x.size(); ++k) sse += std::pow(y[k] - f.value * x[k], 2);
  f.residual = std::sqrt(sse / static_cast<double>(x.size()));
  return f;
}

}  // namespace

CarrierState gate_to_kf(double vg, double alpha, double vd) {
  if (!(alpha > 0)) throw ValidationError("alpha must be positive");
  CarrierState s;
  s.density_per_m2 = alpha * (vg - vd) / si::e_charge;
  s.kf_per_m = std::sqrt(std::numbers::pi * std::abs(s.density_per_m2));
  s.carrier = s.density_per_m2 > 0 ? 1 : (s.density_per_m2 < 0 ? -1 : 0);
  return s;
}

double kf_to_gate(double kf, int carrier, double alpha, double vd) {
  if (!(alpha > 0)) throw ValidationError("alpha must be positive");
  if (kf < 0) throw ValidationError("k_F must be >= 0");
  const double n = kf * kf / std::numbers::pi;
  const double sign = carrier < 0 ? -1.0 : 1.0;
  return vd + sign * n * si::e_charge / alpha;
}

BallisticEstimate ballistic_conductance(double kf, double width_nm) {
  if (kf < 0) throw ValidationError("k_F must be >= 0");
  if (!(width_nm > 0)) throw ValidationError("width must be positive");
  BallisticEstimate b;
  b.modes = kf * width_nm * 1e-9 / std::numbers::pi;
  b.conductance = 2.0 * b.modes;
  return b;
}

WidthFit fit_width_semiclassical(const ConductanceTrace& trace, std::size_t min_points) {
  trace.validate();
  std::vector<double> x_all, y_all, x_e, y_e, x_h, y_h;
  for (std::size_t k = 0; k < trace.gate_v.size(); ++k) {
    if (is_flagged(trace, k)) continue;
    const auto c = gate_to_kf(trace.gate_v[k], trace.alpha_f_per_m2, trace.dirac_point_v);
    if (c.carrier == 0) continue;
    x_all.push_back(c.kf_per_m);
    y_all.push_back(trace.conductance[k]);
    (c.carrier > 0 ? x_e : x_h).push_back(c.kf_per_m);
    (c.carrier > 0 ? y_e : y_h).push_back(trace.conductance[k]);
  }
  if (x_all.size() < min_points) {
    throw ValidationError("width fit needs at least " + std::to_string(min_points) +
                          " usable points, got " + std::to_string(x_all.size()));
  }
  // G = (2/pi) k_F W  =>  W = slope pi / 2
  auto to_width = [](FitValue f) {
    const double scale = std::numbers::pi / 2.0 * 1e9;
    f.value *= scale;  // residual stays in units of 2e^2/h
    return f;
  };
  WidthFit out;
  out.combined = to_width(fit_through_origin(x_all, y_all));
  if (x_e.size() >= min_points) out.electrons = to_width(fit_through_origin(x_e, y_e));
  if (x_h.size() >= min_points) out.holes = to_width(fit_through_origin(x_h, y_h));
  return out;
}

std::vector<double> PlateauSet::means() const {
  std::vector<double> m;
  for (const auto& p : plateaus) m.push_back(p.mean);
  return m;
}

PlateauSet detect_plateaus(std::vector<double> gate_v, std::vector<double> g,
                           double tol, double min_extent_fraction) {
  if (gate_v.size() != g.size()) throw ValidationError("trace arrays differ in length");
  if (!(tol > 0)) throw ValidationError("plateau tolerance must be positive");
  if (min_extent_fraction < 0) throw ValidationError("minimum extent must be >= 0");
  std::vector<std::size_t> order(gate_v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return gate_v[a] < gate_v[b]; });
  std::vector<double> x, y;
  for (auto k : order) {
    x.push_back(gate_v[k]);
    y.push_back(g[k]);
  }
  PlateauSet set;
  set.value_tolerance = tol;
  const std::size_t n = x.size();
  if (n < 2) return set;
  set.min_extent_v = min_extent_fraction * (x.back() - x.front());

  // longest valid run starting at each point
  struct Run {
    std::size_t lo, hi;
    double mean, rms;
  };
  std::vector<Run> runs;
  std::size_t reach = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0, lo = y[i], hi = y[i];
    std::size_t j = i;
    for (; j < n; ++j) {
      const double s = sum + y[j];
      const double l = std::min(lo, y[j]), h = std::max(hi, y[j]);
      const double m = s / static_cast<double>(j - i + 1);
      if (h - m > tol || m - l > tol) break;
      sum = s;
      lo = l;
      hi = h;
    }
    const std::size_t last = j - 1;
    if (i > 0 && last <= reach) continue;  // contained in an earlier run
    reach = last;
    if (last == i) continue;
    const double mean = sum / static_cast<double>(last - i + 1);
    double sse = 0;
    for (std::size_t k = i; k <= last; ++k) sse += (y[k] - mean) * (y[k] - mean);
    runs.push_back({i, last, mean, std::sqrt(sse / static_cast<double>(last - i + 1))});
  }
  // longest first, then flattest, then leftmost
  std::sort(runs.begin(), runs.end(), [&](const Run& a, const Run& b) {
    const double ea = x[a.hi] - x[a.lo], eb = x[b.hi] - x[b.lo];
    if (ea != eb) return ea > eb;
    if (a.rms != b.rms) return a.rms < b.rms;
    return a.lo < b.lo;
  });
  std::vector<char> used(n, 0);
  for (const auto& r : runs) {
    const double extent = x[r.hi] - x[r.lo];
    if (extent <= 0 || extent < set.min_extent_v) continue;
    bool clash = false;
    for (std::size_t k = r.lo; k <= r.hi && !clash; ++k) clash = used[k] != 0;
    if (clash) continue;
    std::fill(used.begin() + static_cast<std::ptrdiff_t>(r.lo),
              used.begin() + static_cast<std::ptrdiff_t>(r.hi) + 1, 1);
    Plateau p;
    p.start_v = x[r.lo];
    p.end_v = x[r.hi];
    p.center_v = 0.5 * (p.start_v + p.end_v);
    p.extent_v = extent;
    p.mean = r.mean;
    p.residual = r.rms;
    p.points = r.hi - r.lo + 1;
    set.plateaus.push_back(p);
  }
  std::sort(set.plateaus.begin(), set.plateaus.end(),
            [](const Plateau& a, const Plateau& b) { return a.center_v < b.center_v; });
  return set;
}

PlateauSet detect_plateaus(const ConductanceTrace& trace, double tol, double min_extent_fraction) {
  return detect_plateaus(trace.gate_v, trace.conductance, tol, min_extent_fraction);
}

CrossoverFit crossover_width(std::vector<std::pair<double, double>> pts, double alpha,
                             int plateau_index) {
  if (!(alpha > 0)) throw ValidationError("alpha must be positive");
  if (pts.size() < 8) throw ValidationError("crossover fit needs at least 4 points per regime");
  std::sort(pts.begin(), pts.end());
  const std::size_t n = pts.size();
  for (const auto& [b, dv] : pts) {
    if (!(b >= 0)) throw ValidationError("field values must be >= 0");
    if (!std::isfinite(dv)) throw ValidationError("non-finite plateau position");
  }
  CrossoverFit best;
  best.plateau_index = plateau_index;
  double best_sse = kInf;
  for (std::size_t m = 4; m + 4 <= n; ++m) {
    double c = 0;
    for (std::size_t k = 0; k < m; ++k) c += pts[k].second;
    c /= static_cast<double>(m);
    double sbb = 0, sbv = 0;
    for (std::size_t k = m; k < n; ++k) {
      sbb += pts[k].first * pts[k].first;
      sbv += pts[k].first * pts[k].second;
    }
    if (sbb == 0) continue;
    const double s = sbv / sbb;
    double sse = 0;
    for (std::size_t k = 0; k < m; ++k) sse += std::pow(pts[k].second - c, 2);
    for (std::size_t k = m; k < n; ++k) sse += std::pow(pts[k].second - s * pts[k].first, 2);
    if (sse < best_sse) {
      best_sse = sse;
      best.saturated_dv = c;
      best.slope_v_per_t = s;
    }
  }
  if (!std::isfinite(best_sse)) throw ValidationError("crossover fit has no usable split");

  // single-regime alternatives
  double mean_all = 0;
  for (const auto& p : pts) mean_all += p.second;
  mean_all /= static_cast<double>(n);
  double sse_const = 0, sbb = 0, sbv = 0;
  for (const auto& [b, dv] : pts) {
    sse_const += (dv - mean_all) * (dv - mean_all);
    sbb += b * b;
    sbv += b * dv;
  }
  double sse_line = kInf;
  if (sbb > 0) {
    sse_line = 0;
    for (const auto& [b, dv] : pts) sse_line += std::pow(dv - sbv / sbb * b, 2);
  }

  const double c = best.saturated_dv, s = best.slope_v_per_t;
  best.residual = std::sqrt(best_sse / static_cast<double>(n));
  best.ambiguous = !(s != 0 && c / s > 0) || best_sse > 0.5 * std::min(sse_const, sse_line);
  if (!best.ambiguous) {
    best.b_star_t = c / s;
    best.ambiguous = best.b_star_t < pts.front().first || best.b_star_t > pts.back().first;
  }
  if (best.ambiguous) {
    best.residual = kInf;
    if (s != 0) best.b_star_t = c / s;
  }
  best.kf_per_m = gate_to_kf(std::abs(c), alpha, 0.0).kf_per_m;
  if (best.b_star_t > 0) {
    best.width_nm = 2.0 * si::hbar * best.kf_per_m / (si::e_charge * best.b_star_t) * 1e9;
  }
  return best;
}

CapacitanceFit extract_capacitance(const std::vector<std::pair<double, double>>& nu_vg,
                                   double b_tesla, double vd) {
  if (nu_vg.size() < 2) throw ValidationError("capacitance fit needs at least 2 plateaus");
  if (!(b_tesla > 0)) throw ValidationError("field must be positive");
  const double nb = static_cast<double>(nu_vg.size());
  double mx = 0, my = 0;
  std::vector<double> x, y;
  for (const auto& [nu, vg] : nu_vg) {
    x.push_back(vg - vd);
    y.push_back(nu * si::e_charge * b_tesla / si::h);
    mx += x.back();
    my += y.back();
  }
  mx /= nb;
  my /= nb;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx <= 0 || sxy == 0) throw ValidationError("degenerate capacitance fit");
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  CapacitanceFit f;
  f.alpha_f_per_m2 = si::e_charge * slope;
  f.offset_v = -icpt / slope;
  double sse = 0;
  for (std::size_t k = 0; k < x.size(); ++k) sse += std::pow(y[k] - icpt - slope * x[k], 2);
  f.residual = std::sqrt(sse / nb);
  return f;
}

double mean_free_path(double g, double kf, double length_nm, double width_nm) {
  if (!(length_nm > 0) || !(width_nm > 0)) throw ValidationError("L and W must be positive");
  if (!(kf > 0)) throw ValidationError("k_F must be positive");
  // sigma in units of 2e^2/h; lambda = sigma / k_F
  const double sigma = g * length_nm / width_nm;
  return sigma / kf * 1e9;
}

std::vector<MfpPoint> mean_free_path(const ConductanceTrace& trace, double length_nm,
                                     double width_nm) {
  trace.validate();
  if (!(length_nm > 0) || !(width_nm > 0)) throw ValidationError("L and W must be positive");
  std::vector<MfpPoint> out;
  for (std::size_t k = 0; k < trace.gate_v.size(); ++k) {
    const auto c = gate_to_kf(trace.gate_v[k], trace.alpha_f_per_m2, trace.dirac_point_v);
    if (!(c.kf_per_m > 0)) continue;
    out.push_back({c.kf_per_m, mean_free_path(trace.conductance[k], c.kf_per_m, length_nm,
                                              width_nm)});
  }
  return out;
}

TransmissionFraction transmission_fraction(double g, double kf, double width_nm,
                                           double length_nm) {
  if (!(g > 0) || !(kf > 0) || !(width_nm > 0) || !(length_nm > 0)) {
    throw ValidationError("transmission fraction needs positive inputs");
  }
  TransmissionFraction t;
  t.fraction = g / ballistic_conductance(kf, width_nm).conductance;
  t.lambda_nm = t.fraction * length_nm;
  t.inconsistent = t.fraction > 1.05;
  return t;
}

SubbandSpacing subband_spacing_from_bias(const BiasMap& map, double hbar_vf, double tol,
                                         double min_extent_fraction) {
  if (map.gate_v.empty() || map.bias_v.empty()) throw ValidationError("empty bias map");
  if (!(hbar_vf > 0)) throw ValidationError("hbar v_F must be positive");
  std::size_t zero = map.bias_v.size();
  for (std::size_t b = 0; b < map.bias_v.size(); ++b) {
    if (map.bias_v[b] == 0.0) zero = b;
  }
  if (zero == map.bias_v.size()) throw ValidationError("bias map has no V_sd = 0 column");
  auto column = [&](std::size_t b) {
    std::vector<double> g(map.gate_v.size());
    for (std::size_t k = 0; k < map.gate_v.size(); ++k) g[k] = map.g_diff[k][b];
    return g;
  };
  const auto base = detect_plateaus(map.gate_v, column(zero), tol, min_extent_fraction);
  // first adjacent pair with distinct values
  const Plateau* lower = nullptr;
  const Plateau* upper = nullptr;
  for (std::size_t k = 0; k + 1 < base.plateaus.size(); ++k) {
    const auto& a = base.plateaus[k];
    const auto& b = base.plateaus[k + 1];
    if (std::abs(b.mean - a.mean) > 2 * tol) {
      lower = &a;
      upper = &b;
      break;
    }
  }
  if (!lower) throw ValidationError("no zero-bias plateau pair in bias map");
  SubbandSpacing out;
  out.half_plateau_value = 0.5 * (lower->mean + upper->mean);
  bool any_bias = false;
  for (std::size_t b = 0; b < map.bias_v.size(); ++b) {
    const double v = map.bias_v[b];
    if (v == 0.0) continue;
    any_bias = true;
    const auto set = detect_plateaus(map.gate_v, column(b), tol, min_extent_fraction);
    double extent = 0;
    for (const auto& p : set.plateaus) {
      if (std::abs(p.mean - out.half_plateau_value) > tol) continue;
      if (p.center_v <= lower->center_v || p.center_v >= upper->center_v) continue;
      extent = std::max(extent, p.extent_v);
    }
    out.extent_vs_bias.emplace_back(std::abs(v), extent);
  }
  if (!any_bias) throw ValidationError("bias map has no finite-bias data");
  std::sort(out.extent_vs_bias.begin(), out.extent_vs_bias.end());
  double best = 0;
  for (const auto& [v, e] : out.extent_vs_bias) {
    if (e > best) {
      best = e;
      out.bias_v = v;
    }
  }
  if (best <= 0) throw PhysicsError("no half plateau resolvable in bias map");
  out.half_plateau_extent_v = best;
  out.delta_e_mev = out.bias_v * 1e3;
  out.width_nm = hbar_vf * std::numbers::pi / out.bias_v;
  return out;
}

EnergyScales energy_scales(double b_tesla, double temperature_k, double g_factor) {
  if (b_tesla < 0 || temperature_k < 0 || g_factor < 0) {
    throw ValidationError("energy scales need non-negative inputs");
  }
  EnergyScales e;
  e.zeeman_ev = g_factor * si::mu_b_ev_per_t * b_tesla;
  e.thermal_ev = si::k_b_ev_per_k * temperature_k;
  e.ratio = e.thermal_ev > 0 ? e.zeeman_ev / e.thermal_ev : kInf;
  return e;
}

ConductanceTrace subtract_series_resistance(const ConductanceTrace& trace, double r_ohm) {
  if (!std::isfinite(r_ohm)) throw ValidationError("series resistance must be finite");
  ConductanceTrace out = trace;
  for (std::size_t k = 0; k < trace.conductance.size(); ++k) {
    const double g = trace.conductance[k] * si::conductance_quantum;
    if (g == 0) continue;
    const double r = 1.0 / g - r_ohm;
    if (r <= 0) {
      throw ValidationError("series resistance " + std::to_string(r_ohm) +
                            " Ohm exceeds the raw resistance at V_g = " +
                            std::to_string(trace.gate_v[k]) + " V");
    }
    out.conductance[k] = 1.0 / r / si::conductance_quantum;
  }
  out.series_resistance_ohm = trace.series_resistance_ohm + r_ohm;
  return out;
}

double dirac_point_from_minimum(const ConductanceTrace& trace) {
  if (trace.conductance.empty()) throw ValidationError("empty trace");
  const auto it = std::min_element(trace.conductance.begin(), trace.conductance.end());
  return trace.gate_v[static_cast<std::size_t>(it - trace.conductance.begin())];
}

Quantity Quantity::absent(std::string unit, std::string method, std::string why) {
  Quantity q;
  q.unit = std::move(unit);
  q.method = std::move(method);
  q.note = std::move(why);
  q.residual = kInf;
  return q;
}

Quantity Quantity::of(double value, std::string unit, std::string method, double residual) {
  Quantity q;
  q.value = value;
  q.unit = std::move(unit);
  q.method = std::move(method);
  q.residual = residual;
  return q;
}

void ExtractionReport::set(const std::string& name, Quantity q) {
  for (auto& [k, v] : quantities) {
    if (k == name) {
      v = std::move(q);
      return;
    }
  }
  quantities.emplace_back(name, std::move(q));
}

const Quantity* ExtractionReport::find(const std::string& name) const {
  for (const auto& [k, v] : quantities) {
    if (k == name) return &v;
  }
  return nullptr;
}

nlohmann::json ExtractionReport::to_json() const {
  auto number = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
  };
  nlohmann::json j;
  j["inputs"] = inputs;
  nlohmann::json q = nlohmann::json::object();
  for (const auto& [name, v] : quantities) {
    nlohmann::json e;
    e["present"] = v.value.has_value();
    e["value"] = v.value ? number(*v.value) : nlohmann::json(nullptr);
    e["unit"] = v.unit;
    e["method"] = v.method;
    e["residual"] = number(v.residual);
    if (!v.note.empty()) e["note"] = v.note;
    q[name] = e;
  }
  j["quantities"] = q;
  nlohmann::json mfp = nlohmann::json::array();
  for (const auto& p : mfp_vs_kf) mfp.push_back({p.kf_per_m, p.lambda_nm});
  j["mfp_nm_vs_kf"] = {{"columns", {"kF_per_m", "lambda_nm"}}, {"points", mfp}};
  nlohmann::json pl = nlohmann::json::array();
  for (const auto& p : plateaus) {
    pl.push_back({{"center_V", p.center_v},
                  {"mean_2e2_over_h", p.mean},
                  {"extent_V", p.extent_v},
                  {"residual", p.residual}});
  }
  j["plateaus"] = pl;
  j["warnings"] = warnings;
  return j;
}

}  // namespace gcon
