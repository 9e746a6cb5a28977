#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "gcon/analysis.hpp"
#include "gcon/constants.hpp"
#include "gcon/error.hpp"

using namespace gcon;
using testutil::linspace;

namespace {

constexpr double kAlpha = 8e-6;

/// Ballistic trace G = 2 k_F W / pi on both carrier sides.
ConductanceTrace ballistic_trace(double width_nm, double vd) {
  ConductanceTrace t;
  t.alpha_f_per_m2 = kAlpha;
  t.dirac_point_v = vd;
  t.hbar_vf_ev_nm = 0.575;
  for (double v : linspace(vd - 30, vd + 30, 61)) {
    t.gate_v.push_back(v);
    t.conductance.push_back(ballistic_conductance(gate_to_kf(v, kAlpha, vd).kf_per_m, width_nm).conductance);
    t.flagged.push_back(0);
  }
  return t;
}

/// Staircase T(E) with thresholds at +-e1, +-2 e1, ... (values 1, 3, 5, ...).
double staircase(double e, double e1) {
  return 1.0 + 2.0 * std::floor(std::abs(e) / e1);
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("gate to Fermi wavevector") {
  const auto c = gate_to_kf(10.8, kAlpha, 0.8);
  CHECK(c.carrier == 1);
  CHECK(c.density_per_m2 == doctest::Approx(kAlpha * 10 / si::e_charge));
  CHECK(c.kf_per_m == doctest::Approx(std::sqrt(std::numbers::pi * c.density_per_m2)));
  CHECK(gate_to_kf(-9.2, kAlpha, 0.8).carrier == -1);
  CHECK(gate_to_kf(0.8, kAlpha, 0.8).kf_per_m == 0.0);
  for (double v : {-12.0, 3.5, 40.0}) {
    const auto s = gate_to_kf(v, kAlpha, 0.8);
    CHECK(kf_to_gate(s.kf_per_m, s.carrier, kAlpha, 0.8) == doctest::Approx(v));
  }
  CHECK_THROWS_AS(gate_to_kf(1.0, 0.0, 0.0), ValidationError);
}

TEST_CASE("ballistic conductance") {
  const auto b = ballistic_conductance(70e6, 2500);
  CHECK(b.modes == doctest::Approx(70e6 * 2500e-9 / std::numbers::pi));
  CHECK(b.conductance == doctest::Approx(2 * b.modes));
  CHECK(ballistic_conductance(80e6, 1500).conductance == doctest::Approx(76.4).epsilon(1e-3));
}

TEST_CASE("semiclassical width fit") {
  const auto fit = fit_width_semiclassical(ballistic_trace(240, 0.8));
  CHECK(fit.combined.value == doctest::Approx(240).epsilon(1e-9));
  REQUIRE(fit.electrons);
  REQUIRE(fit.holes);
  CHECK(fit.electrons->value == doctest::Approx(240).epsilon(1e-9));
  CHECK(fit.holes->value == doctest::Approx(240).epsilon(1e-9));
  CHECK(fit.combined.residual < 1e-9);

  auto few = ballistic_trace(240, 0.8);
  for (std::size_t k = 0; k < few.flagged.size(); ++k) few.flagged[k] = k > 5;
  CHECK_THROWS_AS(fit_width_semiclassical(few), ValidationError);
}

TEST_CASE("plateau detection") {
  SUBCASE("ideal staircase") {
    std::vector<double> v = linspace(0, 30, 301), g;
    for (double x : v) g.push_back(x < 10 ? 1.0 : x < 20 ? 3.0 : 5.0);
    const auto set = detect_plateaus(v, g);
    REQUIRE(set.plateaus.size() == 3);
    CHECK(set.means() == std::vector<double>{1.0, 3.0, 5.0});
    CHECK(std::abs(set.plateaus[0].center_v - 4.95) <= 0.1);
    CHECK(std::abs(set.plateaus[1].center_v - 14.95) <= 0.1);
    CHECK(std::abs(set.plateaus[2].center_v - 25.0) <= 0.1);
  }
  SUBCASE("ramp has no plateaus") {
    std::vector<double> v = linspace(0, 30, 301), g;
    for (double x : v) g.push_back(0.3 * x);
    CHECK(detect_plateaus(v, g).plateaus.empty());
  }
  SUBCASE("unsorted input and ripples within tolerance") {
    std::vector<double> v = {3, 1, 2, 0, 4, 5, 9, 8, 7, 6}, g;
    for (double x : v) g.push_back(x < 5 ? 1.0 + 0.02 * std::sin(7 * x) : 2.0);
    const auto set = detect_plateaus(v, g, 0.05, 0.2);
    REQUIRE(set.plateaus.size() == 2);
    CHECK(set.plateaus[0].mean == doctest::Approx(1.0).epsilon(0.03));
  }
}

TEST_CASE("crossover width") {
  const double kf = 1.37e7;
  const double c = kf_to_gate(kf, 1, kAlpha, 0);
  SUBCASE("published magnitudes") {
    std::vector<std::pair<double, double>> pts;
    for (double b : linspace(0, 0.2, 21)) pts.emplace_back(b, std::max(c, c * b / 0.06));
    const auto fit = crossover_width(pts, kAlpha);
    CHECK_FALSE(fit.ambiguous);
    CHECK(fit.b_star_t == doctest::Approx(0.06).epsilon(1e-8));
    CHECK(fit.kf_per_m == doctest::Approx(kf).epsilon(1e-8));
    CHECK(fit.width_nm == doctest::Approx(2 * si::hbar * kf / (si::e_charge * 0.06) * 1e9).epsilon(1e-8));
    CHECK(fit.width_nm == doctest::Approx(300).epsilon(0.01));
  }
  SUBCASE("higher plateau gives the same width") {
    const double w = 300;
    const double k3 = 3 * kf;  // saturates later
    const double b3 = 2 * si::hbar * k3 / (si::e_charge * w * 1e-9);
    const double c3 = kf_to_gate(k3, 1, kAlpha, 0);
    std::vector<std::pair<double, double>> pts;
    for (double b : linspace(0, 3 * b3, 25)) pts.emplace_back(b, std::max(c3, c3 * b / b3));
    const auto fit = crossover_width(pts, kAlpha, 3);
    CHECK(fit.width_nm == doctest::Approx(w).epsilon(0.1));
  }
  SUBCASE("pure line is ambiguous") {
    std::vector<std::pair<double, double>> pts;
    for (double b : linspace(0.1, 1, 10)) pts.emplace_back(b, 2 * b);
    const auto fit = crossover_width(pts, kAlpha);
    CHECK(fit.ambiguous);
    CHECK(std::isinf(fit.residual));
  }
  SUBCASE("too few points") {
    std::vector<std::pair<double, double>> pts = {{0, 1}, {0.1, 1}, {0.2, 2}};
    CHECK_THROWS_AS(crossover_width(pts, kAlpha), ValidationError);
  }
}

TEST_CASE("capacitance from quantum Hall plateaus") {
  // nu = 2 at 0.5 T sits 4.8 V above the Dirac point for 8 aF/um^2
  const double n2 = 2 * si::e_charge * 0.5 / si::h;
  CHECK(n2 * 1e-4 == doctest::Approx(2.42e10).epsilon(1e-3));
  CHECK(n2 * si::e_charge / kAlpha == doctest::Approx(4.84).epsilon(1e-3));
  const double vd = 0.8, alpha0 = 7.3e-6;
  std::vector<std::pair<double, double>> pts;
  for (int nu : {2, 6, 10}) pts.emplace_back(nu, vd + nu * si::e_charge * 0.5 / si::h * si::e_charge / alpha0);
  const auto fit = extract_capacitance(pts, 0.5, vd);
  CHECK(fit.alpha_f_per_m2 == doctest::Approx(alpha0).epsilon(1e-10));
  CHECK(std::abs(fit.offset_v) < 1e-9);
  CHECK_THROWS_AS(extract_capacitance({{2, 3.0}}, 0.5, vd), ValidationError);
  CHECK_THROWS_AS(extract_capacitance(pts, 0.0, vd), ValidationError);
}

TEST_CASE("mean free path and transmission fraction") {
  const double kf = 5e7, w = 200, l = 200;
  const double gbal = ballistic_conductance(kf, w).conductance;
  // Einstein relation and T L differ by the 2D angular average pi / 2
  CHECK(mean_free_path(gbal, kf, l, w) == doctest::Approx(2 * l / std::numbers::pi));
  CHECK(transmission_fraction(gbal, kf, w, l).lambda_nm == doctest::Approx(l));
  CHECK(mean_free_path(0.0, kf, l, w) == 0.0);

  const auto s2 = transmission_fraction(35, 80e6, 1500, 1000);
  CHECK(s2.fraction == doctest::Approx(0.47).epsilon(0.1));
  CHECK(s2.lambda_nm == doctest::Approx(470).epsilon(0.1));
  CHECK_FALSE(s2.inconsistent);
  CHECK(transmission_fraction(1.2 * gbal, kf, w, l).inconsistent);

  const auto pts = mean_free_path(ballistic_trace(240, 0.0), 240, 240);
  CHECK(pts.size() == 60);
  for (const auto& p : pts) CHECK(p.lambda_nm == doctest::Approx(2 * 240 / std::numbers::pi));
}

TEST_CASE("subband spacing from a synthetic bias map") {
  const double e1 = 0.008, hv = 0.575;
  BiasMap map;
  map.alpha_f_per_m2 = kAlpha;
  map.hbar_vf_ev_nm = hv;
  map.gate_v = linspace(0, 20, 161);
  map.bias_v = linspace(0, 0.02, 41);
  for (double v : map.gate_v) {
    const auto s = gate_to_kf(v, kAlpha, 0);
    const double ef = s.carrier * hv * s.kf_per_m * 1e-9;
    std::vector<double> row;
    for (double b : map.bias_v) row.push_back(0.5 * (staircase(ef + b / 2, e1) + staircase(ef - b / 2, e1)));
    map.g_diff.push_back(row);
    map.flagged.push_back(0);
  }
  const auto s = subband_spacing_from_bias(map, hv);
  CHECK(s.half_plateau_value == doctest::Approx(2.0));
  CHECK(std::abs(s.delta_e_mev - e1 * 1e3) <= 0.5);
  CHECK(s.width_nm == doctest::Approx(hv * std::numbers::pi / s.bias_v));

  auto flat = map;
  for (auto& row : flat.g_diff) std::fill(row.begin(), row.end(), 1.0);
  CHECK_THROWS(subband_spacing_from_bias(flat, hv));
}

TEST_CASE("energy scales") {
  const auto e = energy_scales(0.2, 4.2);
  CHECK(e.zeeman_ev * 1e6 == doctest::Approx(23.15).epsilon(1e-3));
  CHECK(e.thermal_ev * 1e6 == doctest::Approx(361.9).epsilon(1e-3));
  CHECK(e.ratio < 0.1);
  CHECK_THROWS_AS(energy_scales(-1, 4.2), ValidationError);
}

TEST_CASE("series resistance") {
  ConductanceTrace t;
  t.gate_v = {1, 2};
  const double r3 = si::resistance_quantum / 3;
  t.conductance = {si::resistance_quantum / (r3 + 80), 0.0};
  t.flagged = {0, 0};
  const auto out = subtract_series_resistance(t, 80);
  CHECK(out.conductance[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(out.conductance[1] == 0.0);
  CHECK(out.series_resistance_ohm == 80);
  CHECK(subtract_series_resistance(out, -80).conductance[0] == doctest::Approx(t.conductance[0]));
  CHECK_THROWS_AS(subtract_series_resistance(t, 1e6), ValidationError);
}

TEST_CASE("Dirac point from the conductance minimum") {
  ConductanceTrace t;
  for (double v : linspace(-5, 5, 101)) {
    t.gate_v.push_back(v);
    t.conductance.push_back(std::abs(v - 0.8) + 0.1);
  }
  CHECK(dirac_point_from_minimum(t) == doctest::Approx(0.8));
}

TEST_CASE("extraction report JSON") {
  ExtractionReport r;
  r.set("width_semiclassical_nm", Quantity::of(240.5, "nm", "fit", 0.1));
  r.set("crossover_B_T", Quantity::absent("T", "fit", "no fan traces"));
  r.set("width_semiclassical_nm", Quantity::of(241.0, "nm", "fit", 0.1));
  REQUIRE(r.find("width_semiclassical_nm"));
  CHECK(*r.find("width_semiclassical_nm")->value == 241.0);
  CHECK(r.quantities.size() == 2);
  const auto j = r.to_json();
  const auto& q = j["quantities"];
  CHECK(q["crossover_B_T"]["present"] == false);
  CHECK(q["crossover_B_T"]["value"].is_null());
  CHECK(q["crossover_B_T"]["residual"] == "inf");
  CHECK(q["width_semiclassical_nm"]["value"] == 241.0);
}

}  // TEST_SUITE
