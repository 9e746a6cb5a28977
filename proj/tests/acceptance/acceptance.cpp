// Acceptance suite: one PASS/FAIL line per criterion.
//
//   gcon_acceptance            run criteria 1-8
//   gcon_acceptance 2 5        run selected criteria
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Eigenvalues>

#include "gcon/analysis.hpp"
#include "gcon/bands.hpp"
#include "gcon/constants.hpp"
#include "gcon/csv.hpp"
#include "gcon/lattice.hpp"
#include "gcon/parallel.hpp"
#include "gcon/transport.hpp"
#include "gcon/workbench.hpp"

namespace fs = std::filesystem;
using namespace gcon;

namespace {

constexpr double kAlpha = 8e-6;  // F/m^2

class Checks {
 public:
  void check(bool ok, const std::string& what) {
    std::printf("    %s  %s\n", ok ? "ok  " : "FAIL", what.c_str());
    std::fflush(stdout);
    all_ &= ok;
  }
  void note(const std::string& what) {
    std::printf("          %s\n", what.c_str());
    std::fflush(stdout);
  }
  bool passed() const { return all_; }

 private:
  bool all_ = true;
};

std::string fmt(const char* f, double a) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

/// Gate voltage (V_D = 0) putting E_F at energy e (eV) for the given hbar v_F.
double gate_for_energy(double e_ev, double hbar_vf_ev_nm) {
  const double k = e_ev / hbar_vf_ev_nm * 1e9;  // 1/m
  return k * k / std::numbers::pi * si::e_charge / kAlpha;
}

LatticeParams scaled() {
  LatticeParams p;
  p.scaling_factor = 20;
  return p;
}

TransportOptions transport_opts() {
  TransportOptions o;
  o.threads = default_thread_count();
  return o;
}

/// The detected plateau whose mean lies closest to `value`, if within `rel` (relative).
const Plateau* find_plateau(const PlateauSet& set, double value, double rel) {
  const Plateau* best = nullptr;
  for (const auto& p : set.plateaus) {
    if (std::abs(p.mean - value) > rel * value) continue;
    if (!best || std::abs(p.mean - value) < std::abs(best->mean - value)) best = &p;
  }
  return best;
}

std::string means_string(const PlateauSet& set) {
  std::string s = "[";
  for (const auto& p : set.plateaus) {
    if (s.size() > 1) s += ", ";
    s += fmt("%.4f@%.1fV", p.mean, p.center_v);
  }
  return s + "]";
}

/// Every expected value must be matched by a detected plateau within `rel`.
void expect_sequence(Checks& c, const PlateauSet& set, const std::vector<int>& expected, double rel,
                     const std::string& label) {
  c.note(label + " plateaus " + means_string(set));
  for (int v : expected) {
    const auto* p = find_plateau(set, v, rel);
    c.check(p != nullptr, label + fmt(": plateau %.0f within %.0f%%", v, rel * 100) +
                              (p ? fmt(" (mean %.4f, %.1f V wide)", p->mean, p->extent_v) : ""));
  }
}

// ---------------------------------------------------------------------------
// 1. Formula regressions against published numbers.

bool criterion1() {
  Checks c;
  const auto t0 = std::chrono::steady_clock::now();
  const PhysicalConstants pc;  // v_F = 1e6 m/s

  const auto gb = ballistic_conductance(70e6, 2500);
  c.check(near(gb.conductance, 110.0, 0.5),
          fmt("ballistic_conductance(70e6 /m, 2.5 um) = %.2f, published 110 (3 s.f.)", gb.conductance));

  const auto tf = transmission_fraction(21, 70e6, 2500, 1000);
  c.check(near(tf.fraction, 0.19, 0.01), fmt("sample #1 transmission %.4f, published 0.19 +- 0.01", tf.fraction));
  c.check(near(tf.lambda_nm, 190, 10), fmt("sample #1 mean free path %.1f nm, published 190 +- 10", tf.lambda_nm));

  const double e2 = landau_level(pc, 0.5, 2), e3 = landau_level(pc, 0.5, 3), e4 = landau_level(pc, 0.5, 4);
  const double avg = 0.5 * ((e3 - e2) + (e4 - e3)) * 1e3;
  c.check(near(avg, 7.5, 0.2), fmt("mean LL spacing E3-E2, E4-E3 at 0.5 T = %.3f meV, published 7.5 +- 0.2", avg));

  const double de = hard_wall_subband_spacing(pc, 240) * 1e3;
  c.check(near(de, 8.6, 0.05), fmt("hard_wall_subband_spacing(240 nm) = %.3f meV, expected 8.6", de));
  c.check(std::abs(de - 8.0) <= 0.1 * 8.0, fmt("  and within 10%% of the published 8 meV (%.1f%%)", (de / 8 - 1) * 100));

  const auto es = energy_scales(0.2, 4.2);
  const double z = es.zeeman_ev * 1e6;
  c.check(near(z, 23, 0.5), fmt("Zeeman at 0.2 T = %.2f ueV, expected 23", z));
  c.check(std::abs(z - 25) <= 0.15 * 25, fmt("  and within 15%% of the published 25 ueV (%.1f%%)", (z / 25 - 1) * 100));
  c.check(es.ratio < 0.1, fmt("Zeeman / thermal(4.2 K) = %.4f < 0.1", es.ratio));

  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.check(dt < 1.0, fmt("runtime %.4f s < 1 s", dt));
  return c.passed();
}

// ---------------------------------------------------------------------------
// 2. Zero-field quantization.

bool criterion2() {
  Checks c;
  const auto p = scaled();
  const double hv = p.hbar_vf_ev_nm();

  GeometrySpec g;
  g.edge_type = EdgeType::armchair;
  g.lead_width_nm = 250;
  g.constriction_width_nm = 100;
  g.constriction_length_nm = 80;
  g.total_length_nm = 300;
  g.profile = Profile::smooth_cosine;
  const auto dev = build_constriction(p, g);
  c.note(fmt("armchair constriction: %.0f -> %.0f rows, W = %.1f nm", dev.geometry.lead_rows,
             dev.geometry.constriction_rows, dev.geometry.actual_constriction_width_nm));
  const TransportSystem sys(dev, transport_opts());
  const auto t0 = std::chrono::steady_clock::now();
  const double vmax = gate_for_energy(sys.validity_window_ev(), hv);
  const auto trace = conductance_vs_gate(sys, linspace(0, vmax, 121), kAlpha, 0);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  expect_sequence(c, detect_plateaus(trace), {1, 2, 3}, 0.03, "armchair constriction");
  c.check(dt <= 600, fmt("armchair trace runtime %.0f s <= 600 s", dt));

  const auto zz = build_ribbon(p, EdgeType::zigzag, 150, 150);
  c.note(fmt("zigzag ribbon: %.0f rows, W = %.1f nm", zz.geometry.constriction_rows,
             zz.geometry.actual_constriction_width_nm));
  const TransportSystem zsys(zz, transport_opts());
  const auto ztrace = conductance_vs_gate(zsys, linspace(0, gate_for_energy(0.042, hv), 129), kAlpha, 0);
  expect_sequence(c, detect_plateaus(ztrace), {1, 3, 5}, 0.03, "zigzag ribbon");
  return c.passed();
}

// ---------------------------------------------------------------------------
// 3. Transmission of clean ribbons equals the band-structure channel count.

bool criterion3() {
  Checks c;
  const auto p = scaled();
  struct Case {
    const char* name;
    EdgeType edge;
    double width;
    bool snap;
  };
  const Case cases[] = {{"metallic armchair 100 nm", EdgeType::armchair, 100, true},
                        {"semiconducting armchair 97 nm", EdgeType::armchair, 97, false},
                        {"zigzag 150 nm", EdgeType::zigzag, 150, false}};
  std::mt19937_64 rng(20260416);
  std::uniform_real_distribution<double> energy(-0.08, 0.08);
  int total = 0;
  for (const auto& k : cases) {
    RibbonOptions ro;
    ro.metallic_snap = k.snap;
    const auto rib = build_ribbon(p, k.edge, k.width, 60, ro);
    const auto bands = ribbon_bands(rib, 4001);
    const TransportSystem sys(rib, transport_opts());
    double worst = 0;
    int used = 0, skipped = 0;
    while (used < 20) {
      const double e = energy(rng);
      const auto m = count_propagating_modes(bands, e);
      if (m.ambiguous) {
        ++skipped;
        continue;
      }
      worst = std::max(worst, std::abs(sys.transmission(e) - m.count));
      ++used;
    }
    total += used;
    c.check(worst <= 1e-6, std::string(k.name) +
                               fmt(": max |T - modes| = %.2e over %.0f energies", worst, used) +
                               fmt(" (%.0f near band edges skipped)", skipped));
  }
  c.check(total >= 50, fmt("%.0f random energies in total (>= 50)", total));
  return c.passed();
}

}  // namespace

namespace {

// ---------------------------------------------------------------------------
// 4. Quantum Hall limit of the same constriction.

DeviceLattice qhe_constriction(double b, std::optional<std::uint64_t> disorder_seed) {
  GeometrySpec g;
  g.edge_type = EdgeType::armchair;
  g.lead_width_nm = 250;
  g.constriction_width_nm = 100;
  g.constriction_length_nm = 80;
  g.total_length_nm = 300;
  g.profile = Profile::smooth_cosine;
  auto dev = build_constriction(scaled(), g);
  if (disorder_seed) {
    DisorderSpec d;
    d.edge_removal_probability = 0.1;
    d.rng_seed = *disorder_seed;
    dev = apply_edge_disorder(dev, d);
  }
  double y0 = 0;
  for (const auto& q : dev.left_lead.positions) y0 += q.y;
  y0 /= static_cast<double>(dev.left_lead.size());
  return apply_peierls(dev, b, y0);
}

/// Gate grid reaching filling 13 (past the 5 plateau) in ~1.25 V steps.
std::vector<double> qhe_gates(double b) {
  const double vmax = 13.0 * b * si::e_charge / si::h * si::e_charge / kAlpha;
  return linspace(0, vmax, static_cast<int>(std::ceil(vmax / 1.25)) + 1);
}

bool criterion4() {
  Checks c;
  const std::vector<double> fields = {2.0, 2.25, 2.5};
  const std::vector<int> values = {1, 3, 5};
  std::map<int, std::vector<std::pair<double, double>>> centres;  // value -> (B, n)
  double width = 0;
  for (double b : fields) {
    const auto dev = qhe_constriction(b, std::nullopt);
    width = dev.geometry.actual_constriction_width_nm;
    const TransportSystem sys(dev, transport_opts());
    const auto trace = conductance_vs_gate(sys, qhe_gates(b), kAlpha, 0);
    const auto set = detect_plateaus(trace);
    expect_sequence(c, set, values, 0.02, fmt("B = %.2f T", b));
    for (int v : values) {
      if (const auto* p = find_plateau(set, v, 0.02)) {
        centres[v].emplace_back(b, kAlpha * p->center_v / si::e_charge);
      }
    }
    if (const auto* p5 = find_plateau(set, 5, 0.02)) {
      const double kf = gate_to_kf(p5->end_v, kAlpha, 0).kf_per_m;
      const double two_lc = 2 * si::hbar * kf / (si::e_charge * b) * 1e9;
      c.check(two_lc < width, fmt("B = %.2f T: 2 l_c = %.1f nm < W = %.1f nm at the top of the 5 plateau", b,
                                  two_lc, width));
    }
  }
  for (int v : values) {
    const auto& pts = centres[v];
    if (pts.size() != fields.size()) {
      c.check(false, fmt("plateau %.0f centre density at every field", v));
      continue;
    }
    double sxy = 0, sxx = 0;
    for (const auto& [b, n] : pts) {
      sxy += b * n;
      sxx += b * b;
    }
    const double slope = sxy / sxx;
    double worst = 0;
    for (const auto& [b, n] : pts) worst = std::max(worst, std::abs(n - slope * b) / (slope * b));
    c.check(worst <= 0.05, fmt("plateau %.0f: centre density linear in B, max deviation %.2f%% (<= 5%%); "
                               "slope %.3g /m^2/T",
                               v, worst * 100, slope));
  }
  for (std::uint64_t seed : {1u, 2u}) {
    const double b = 2.0;
    const auto dev = qhe_constriction(b, seed);
    const TransportSystem sys(dev, transport_opts());
    const auto trace = conductance_vs_gate(sys, qhe_gates(b), kAlpha, 0);
    expect_sequence(c, detect_plateaus(trace), values, 0.02,
                    fmt("B = %.2f T, 10%% edge disorder seed %.0f", b, static_cast<double>(seed)));
  }
  return c.passed();
}

// ---------------------------------------------------------------------------
// 5 uses a short abrupt constriction with three-row steps per side.

DeviceLattice desk_constriction(double b) {
  GeometrySpec g;
  g.edge_type = EdgeType::armchair;
  g.lead_width_nm = 115;
  g.constriction_width_nm = 100;
  g.constriction_length_nm = 80;
  g.total_length_nm = 200;
  g.profile = Profile::abrupt;
  auto dev = build_constriction(scaled(), g);
  if (b == 0) return dev;
  double y0 = 0;
  for (const auto& q : dev.left_lead.positions) y0 += q.y;
  y0 /= static_cast<double>(dev.left_lead.size());
  return apply_peierls(dev, b, y0);
}

bool criterion5() {
  Checks c;
  const auto fields = linspace(0, 0.8, 17);
  const auto gates = linspace(0, 17, 52);
  std::vector<std::pair<double, double>> dv;
  double width = 0;
  for (double b : fields) {
    const auto dev = desk_constriction(b);
    width = dev.geometry.actual_constriction_width_nm;
    const TransportSystem sys(dev, transport_opts());
    const auto set = detect_plateaus(conductance_vs_gate(sys, gates, kAlpha, 0));
    if (const auto* p = find_plateau(set, 1, kDefaultPlateauTolerance)) {
      dv.emplace_back(b, p->center_v);
      c.note(fmt("B = %.2f T: plateau 1 centre %.3f V (%.2f V wide)", b, p->center_v, p->extent_v));
    } else {
      c.note(fmt("B = %.2f T: no plateau 1 in ", b) + means_string(set));
    }
  }
  c.check(dv.size() >= 8, fmt("plateau 1 located at %.0f of %.0f fields", dv.size(), fields.size()));
  if (dv.size() < 8) return false;
  const auto fit = crossover_width(dv, kAlpha, 1);
  std::size_t below = 0;
  for (const auto& [b, v] : dv) below += b < fit.b_star_t;
  c.note(fmt("B* = %.3f T, saturated dV = %.3f V, slope %.3f V/T", fit.b_star_t, fit.saturated_dv,
             fit.slope_v_per_t));
  c.check(!fit.ambiguous, "piecewise fit distinguishes a saturated and a linear regime");
  c.check(below >= 4, fmt("%.0f fields in the saturated regime (>= 4)", below));
  const double rel = std::abs(fit.width_nm - width) / width;
  c.check(rel <= 0.25, fmt("crossover width %.1f nm vs built %.1f nm (%.1f%%, <= 25%%)", fit.width_nm, width,
                           rel * 100));
  return c.passed();
}

// ---------------------------------------------------------------------------
// 6. Bias spectroscopy.

/// Energies (eV) where the channel count of the ribbon first exceeds 1 and 3.
std::pair<double, double> odd_thresholds(const BandStructure& bands) {
  double first = -1, second = -1;
  for (double e = 1e-4; e < 0.1 && second < 0; e += 1e-4) {
    const int n = count_propagating_modes(bands, e).count;
    if (first < 0 && n > 1) first = e;
    if (n > 3) second = e;
  }
  return {first, second};
}

bool criterion6() {
  Checks c;
  // A uniform metallic channel: the three-row steps of the desk constriction
  // soften the 1 -> 3 riser over ~8 meV, which smears the half plateau.
  RibbonOptions ro;
  ro.metallic_snap = true;
  const auto dev = build_ribbon(scaled(), EdgeType::armchair, 100, 80, ro);
  const double hv = dev.params.hbar_vf_ev_nm();
  const auto [e1, e2] = odd_thresholds(ribbon_bands(dev, 4001));
  const double spacing_mev = (e2 - e1) * 1e3;
  c.note(fmt("%.0f-row ribbon: band thresholds %.1f and %.1f meV", dev.geometry.constriction_rows, e1 * 1e3,
             e2 * 1e3) +
         fmt(", spacing %.1f meV", spacing_mev));

  const TransportSystem sys(dev, transport_opts());
  const auto gates = linspace(0, 20, 81);
  const auto biases = linspace(0, 0.03, 31);
  const double step_mev = (biases[1] - biases[0]) * 1e3;
  const auto map = bias_map(sys, gates, biases, kAlpha, 0, 2.5e-4);
  const auto linear = conductance_vs_gate(sys, gates, kAlpha, 0);
  double worst = 0;
  for (std::size_t k = 0; k < gates.size(); ++k) worst = std::max(worst, std::abs(map.g_diff[k][0] - linear.conductance[k]));
  c.check(worst <= 1e-9, fmt("V_sd = 0 column equals the linear trace: max diff %.2e (<= 1e-9)", worst));

  try {
    const auto s = subband_spacing_from_bias(map, hv, kDefaultPlateauTolerance, kDefaultPlateauMinExtent);
    for (const auto& [v, ext] : s.extent_vs_bias) {
      if (ext > 0) c.note(fmt("V_sd = %.1f mV: half plateau %.2f V wide", v * 1e3, ext));
    }
    c.check(near(s.half_plateau_value, 2.0, kDefaultPlateauTolerance),
            fmt("half plateau at %.3f between zero-bias plateaus 1 and 3", s.half_plateau_value));
    const double rel = std::abs(s.bias_v * 1e3 - spacing_mev) / spacing_mev;
    c.check(rel <= 0.2, fmt("widest at V_sd = %.1f mV, %.1f%% from the threshold spacing (<= 20%%)",
                            s.bias_v * 1e3, rel * 100));
    c.check(std::abs(s.delta_e_mev - spacing_mev) <= step_mev,
            fmt("subband_spacing_from_bias: %.2f meV vs %.2f meV (within one %.1f mV step)", s.delta_e_mev,
                spacing_mev, step_mev));
  } catch (const std::exception& e) {
    c.check(false, std::string("subband_spacing_from_bias: ") + e.what());
  }
  return c.passed();
}

}  // namespace

namespace {

// ---------------------------------------------------------------------------
// 7. Edge disorder: short constriction against long ribbon.
//
// "Detectable first plateau": a plateau found by detect_plateaus (default
// tolerance) inside the first-subband gate window, with mean within 0.25 of 1
// and covering at least a quarter of that window.

struct RetentionResult {
  int retained = 0;
  int total = 0;
};

RetentionResult first_plateau_retention(const DeviceLattice& clean, const std::vector<double>& gates,
                                        const std::string& label, Checks& c) {
  RetentionResult r;
  const double window = gates.back() - gates.front();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    DisorderSpec d;
    d.edge_removal_probability = 0.1;
    d.rng_seed = seed;
    const auto dev = apply_edge_disorder(clean, d);
    const TransportSystem sys(dev, transport_opts());
    const auto trace = conductance_vs_gate(sys, gates, kAlpha, 0);
    const auto set = detect_plateaus(trace);
    const Plateau* best = nullptr;
    for (const auto& p : set.plateaus) {
      if (std::abs(p.mean - 1.0) <= 0.25 && p.extent_v >= 0.25 * window &&
          (!best || p.extent_v > best->extent_v)) {
        best = &p;
      }
    }
    r.retained += best != nullptr;
    ++r.total;
    c.note(label + fmt(" seed %2.0f: ", static_cast<double>(seed)) + (best ? "retained " : "lost     ") +
           means_string(set));
  }
  return r;
}

bool criterion7() {
  Checks c;
  const auto p = scaled();
  GeometrySpec g;
  g.edge_type = EdgeType::armchair;
  g.lead_width_nm = 115;
  g.constriction_width_nm = 100;
  g.constriction_length_nm = 80;
  g.total_length_nm = 100;
  g.profile = Profile::abrupt;
  const auto shorty = build_constriction(p, g);
  RibbonOptions ro;
  ro.metallic_snap = true;
  const auto longy = build_ribbon(p, EdgeType::armchair, 100, 500, ro);
  const double w = shorty.geometry.actual_constriction_width_nm;
  c.note(fmt("short: L = %.0f nm, W = %.1f nm; long: L = %.0f nm", g.constriction_length_nm, w, 500.0));

  const auto [e1, e2] = odd_thresholds(ribbon_bands(longy, 4001));
  (void)e2;
  const auto gates = linspace(0.1, gate_for_energy(e1, p.hbar_vf_ev_nm()) * 0.98, 25);
  c.note(fmt("first-subband window 0 .. %.1f meV (%.2f V)", e1 * 1e3, gates.back()));

  const auto s = first_plateau_retention(shorty, gates, "short", c);
  const auto l = first_plateau_retention(longy, gates, "long ", c);
  c.check(s.retained >= 14, fmt("short constriction retains the first plateau in %.0f/%.0f seeds (>= 70%%)",
                                s.retained, s.total));
  c.check(l.retained <= 4, fmt("long ribbon retains the first plateau in %.0f/%.0f seeds (<= 20%%)", l.retained,
                               l.total));
  return c.passed();
}

// ---------------------------------------------------------------------------
// 8. Numerical hygiene.

double wrap_phase(double x) { return std::remainder(x, 2 * std::numbers::pi); }

/// Worst deviation of the accumulated hopping phase around every hexagon from 2 pi B A / phi_0.
std::pair<double, int> plaquette_flux_defect(const DeviceLattice& dev, double b) {
  std::map<std::pair<std::size_t, std::size_t>, cplx> amp;
  std::vector<std::vector<std::size_t>> adj(dev.size());
  for (const auto& h : dev.hoppings) {
    amp[{h.i, h.j}] = h.amplitude;
    adj[h.i].push_back(h.j);
  }
  double worst = 0;
  int count = 0;
  std::vector<std::size_t> path;
  std::function<void(std::size_t)> walk = [&](std::size_t at) {
    if (path.size() == 6) {
      const std::size_t first = path.front();
      if (!amp.count({first, at}) || path[1] > path[5]) return;
      double phase = 0, area = 0;
      for (std::size_t k = 0; k < 6; ++k) {
        const std::size_t a = path[k], z = path[(k + 1) % 6];
        phase += std::arg(amp.at({z, a}) / -dev.params.t());
        const auto pa = dev.sites[a].pos, pz = dev.sites[z].pos;
        area += pa.x * pz.y - pz.x * pa.y;
      }
      area *= 0.5e-18;  // m^2, signed (counter-clockwise positive)
      const double expected = 2 * std::numbers::pi * b * area / si::flux_quantum;
      worst = std::max(worst, std::abs(wrap_phase(phase - expected)));
      ++count;
      return;
    }
    for (std::size_t next : adj[at]) {
      if (next <= path.front() || std::find(path.begin(), path.end(), next) != path.end()) continue;
      path.push_back(next);
      walk(next);
      path.pop_back();
    }
  };
  for (std::size_t i = 0; i < dev.size(); ++i) {
    path = {i};
    walk(i);
  }
  return {worst, count};
}

bool criterion8() {
  Checks c;
  const auto p = scaled();
  GeometrySpec g;
  g.edge_type = EdgeType::armchair;
  g.lead_width_nm = 115;
  g.constriction_width_nm = 60;
  g.constriction_length_nm = 40;
  g.total_length_nm = 80;
  g.profile = Profile::smooth_cosine;
  const auto clean = build_constriction(p, g);
  DisorderSpec d;
  d.edge_removal_probability = 0.1;
  d.rng_seed = 7;
  const auto rough = apply_edge_disorder(clean, d);
  double y0 = 0;
  for (const auto& q : rough.left_lead.positions) y0 += q.y;
  y0 /= static_cast<double>(rough.left_lead.size());
  const double b = 1.5;
  const auto field = apply_peierls(rough, b, y0);
  const auto shifted = apply_peierls(rough, b, y0 + 37.0);

  c.check(hermiticity_defect(field) <= 1e-14 && hermiticity_defect(clean) <= 1e-14,
          fmt("Hamiltonian hermitian: defect %.1e (B = 0), %.1e (B = 1.5 T, disordered)",
              hermiticity_defect(clean), hermiticity_defect(field)));

  const auto [flux_err, plaquettes] = plaquette_flux_defect(field, b);
  c.check(plaquettes > 100 && flux_err <= 1e-9,
          fmt("plaquette flux identity: max phase error %.1e rad over %.0f hexagons", flux_err, plaquettes));

  const TransportSystem s_field(field), s_shift(shifted), s_clean(clean);
  double gauge = 0, recip = 0, ph = 0;
  // E = 0 sits on the flat zeroth Landau level of the leads, where T is ill-conditioned.
  for (double e : linspace(-0.0395, 0.0405, 17)) {
    const double t1 = s_field.transmission(e), t2 = s_shift.transmission(e);
    gauge = std::max(gauge, std::abs(t1 - t2) / std::max(t1, 1e-12));
    recip = std::max(recip, std::abs(t1 - s_field.transmission_right_to_left(e)));
  }
  for (double e : linspace(0.0013, 0.0413, 11)) {
    ph = std::max(ph, std::abs(s_clean.transmission(e) - s_clean.transmission(-e)));
  }
  c.check(gauge <= 1e-8, fmt("gauge invariance under a 37 nm origin shift: max relative change %.1e", gauge));
  c.check(recip <= 1e-9, fmt("reciprocity T_LR = T_RL at 1.5 T: max difference %.1e", recip));
  c.check(ph <= 1e-8, fmt("particle-hole symmetry T(E) = T(-E), clean lattice: max difference %.1e", ph));

  double min_eig = 0, scale = 0;
  for (const auto* lead : {&clean.left_lead, &field.right_lead}) {
    for (double e : {-0.03, -0.004, lead == &clean.left_lead ? 0.0 : 7e-4, 0.011, 0.05}) {
      const auto se = lead_self_energy(*lead, e, {});
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (se.gamma + se.gamma.adjoint()));
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
      scale = std::max(scale, es.eigenvalues().maxCoeff());
    }
  }
  c.check(min_eig >= -1e-10 * scale, fmt("lead broadening Gamma positive semidefinite: min eigenvalue %.1e (max %.2f)",
                                         min_eig, scale));

  TransmissionCurve flat;
  flat.energies = linspace(-0.05, 0.05, 20001);
  flat.transmission.assign(flat.energies.size(), 1.0);
  double norm = 0;
  for (double t : {0.3, 4.2, 20.0}) norm = std::max(norm, std::abs(thermal_broadening(flat, t, 0.003) - 1.0));
  c.check(norm <= 1e-6, fmt("thermal broadening of T = 1 integrates to 1: max error %.1e", norm));

  const auto cfg = parse_config_text(R"({
    "device": {"kind": "ribbon", "lattice": {"scaling_factor": 20},
               "geometry": {"edge_type": "armchair", "width": 60, "length": 60},
               "disorder": {"edge_removal_probability": 0.1, "seed": 3}},
    "sweep": {"kind": "disorder-ensemble", "gate_V": {"start": 0.5, "stop": 10, "count": 9}, "seed_count": 3},
    "analysis": {},
    "output": {"directory": "unused", "formats": ["csv", "json"]}
  })");
  const auto base = fs::temp_directory_path() / ("gcon_accept_" + std::to_string(::getpid()));
  RunOptions a, bb;
  a.out_dir = base / "a";
  a.threads = 1;
  bb.out_dir = base / "b";
  bb.threads = 3;
  auto ma = run(cfg, a).manifest, mb = run(cfg, bb).manifest;
  for (auto* m : {&ma, &mb}) {
    m->erase("wall_clock_s");
    m->erase("threads");
  }
  bool same_files = true;
  for (const auto& e : ma["outputs"]) {
    const auto name = e["path"].get<std::string>();
    same_files &= read_text_file(base / "a" / name) == read_text_file(base / "b" / name);
  }
  c.check(ma == mb && same_files && !ma["outputs"].empty(),
          fmt("manifests and %.0f outputs bit-identical across runs with 1 and 3 threads",
              ma["outputs"].size()));
  fs::remove_all(base);
  return c.passed();
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<bool()>>> criteria = {
      {"formula regressions", criterion1},
      {"zero-field quantization", criterion2},
      {"mode-count oracle", criterion3},
      {"quantum Hall limit", criterion4},
      {"crossover width", criterion5},
      {"bias spectroscopy", criterion6},
      {"disorder contrast", criterion7},
      {"numerical hygiene", criterion8},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s' (1-%zu)\n", argv[i], criteria.size());
      return 2;
    }
    selected.push_back(k);
  }
  if (selected.empty()) {
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.push_back(k);
  }
  std::vector<std::pair<int, bool>> results;
  for (int k : selected) {
    const auto& [name, fn] = criteria[static_cast<std::size_t>(k - 1)];
    std::printf("criterion %d (%s)\n", k, name);
    std::fflush(stdout);
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      std::printf("    FAIL  unexpected exception: %s\n", e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("    (%.1f s)\n", dt);
    results.emplace_back(k, ok);
  }
  std::printf("\n");
  bool all = true;
  for (const auto& [k, ok] : results) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", k, criteria[static_cast<std::size_t>(k - 1)].first);
    all &= ok;
  }
  return all ? 0 : 1;
}
