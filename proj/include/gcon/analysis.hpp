#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "gcon/constants.hpp"
#include "gcon/transport.hpp"

namespace gcon {

// Lengths are in nm, Fermi wavenumbers in 1/m, conductances in units of 2e^2/h.

struct CarrierState {
  double density_per_m2 = 0;  // signed: > 0 electrons, < 0 holes
  double kf_per_m = 0;
  int carrier = 0;            // +1 electrons, -1 holes, 0 at the Dirac point
};

CarrierState gate_to_kf(double vg, double alpha_f_per_m2, double dirac_point_v);
/// Inverse of gate_to_kf for a given carrier sign.
double kf_to_gate(double kf_per_m, int carrier, double alpha_f_per_m2, double dirac_point_v);

struct BallisticEstimate {
  double modes = 0;        // k_F W / pi
  double conductance = 0;  // 2 k_F W / pi
};

BallisticEstimate ballistic_conductance(double kf_per_m, double width_nm);

struct FitValue {
  double value = 0;
  double residual = 0;  // RMS of the fit; +inf when the fit is ambiguous
  std::size_t points = 0;
};

struct WidthFit {
  FitValue combined;
  std::optional<FitValue> electrons;
  std::optional<FitValue> holes;
};

/// G = (2/pi) k_F W through the origin; each carrier side also fitted alone.
/// Flagged points and the Dirac point itself are skipped.
WidthFit fit_width_semiclassical(const ConductanceTrace& trace, std::size_t min_points = 8);

struct Plateau {
  double center_v = 0;
  double mean = 0;
  double extent_v = 0;
  double residual = 0;  // RMS deviation from the mean
  double start_v = 0;
  double end_v = 0;
  std::size_t points = 0;
};

struct PlateauSet {
  std::vector<Plateau> plateaus;  // ordered by center
  double value_tolerance = 0;
  double min_extent_v = 0;

  std::vector<double> means() const;
};

inline constexpr double kDefaultPlateauTolerance = 0.05;
inline constexpr double kDefaultPlateauMinExtent = 0.05;  // fraction of the sweep span

PlateauSet detect_plateaus(std::vector<double> gate_v, std::vector<double> conductance,
                           double value_tolerance = kDefaultPlateauTolerance,
                           double min_extent_fraction = kDefaultPlateauMinExtent);
PlateauSet detect_plateaus(const ConductanceTrace& trace,
                           double value_tolerance = kDefaultPlateauTolerance,
                           double min_extent_fraction = kDefaultPlateauMinExtent);

struct CrossoverFit {
  double b_star_t = 0;
  double width_nm = 0;
  double kf_per_m = 0;
  double saturated_dv = 0;
  double slope_v_per_t = 0;
  double residual = 0;  // RMS; +inf when ambiguous
  bool ambiguous = false;
  int plateau_index = 1;
};

/// Constant below B*, linear through the origin above. Input pairs are (B, V_center - V_D).
CrossoverFit crossover_width(std::vector<std::pair<double, double>> dv_vs_b, double alpha_f_per_m2,
                             int plateau_index = 1);

struct CapacitanceFit {
  double alpha_f_per_m2 = 0;
  double offset_v = 0;  // fitted gate offset of n = 0 relative to V_D
  double residual = 0;  // RMS in density (1/m^2)
};

/// Plateau centres (filling, V_g) at field B: n = nu e B / h against V_g - V_D.
CapacitanceFit extract_capacitance(const std::vector<std::pair<double, double>>& nu_vg,
                                   double b_tesla, double dirac_point_v);

struct MfpPoint {
  double kf_per_m = 0;
  double lambda_nm = 0;
};

/// Einstein relation: sigma = G L / W, lambda = sigma h / (2 e^2 k_F).
std::vector<MfpPoint> mean_free_path(const ConductanceTrace& trace, double length_nm,
                                     double width_nm);
double mean_free_path(double conductance, double kf_per_m, double length_nm, double width_nm);

struct TransmissionFraction {
  double fraction = 0;
  double lambda_nm = 0;
  bool inconsistent = false;  // fraction above 1.05
};

TransmissionFraction transmission_fraction(double conductance, double kf_per_m, double width_nm,
                                           double length_nm);

struct SubbandSpacing {
  double delta_e_mev = 0;
  double width_nm = 0;
  double bias_v = 0;
  double half_plateau_value = 0;
  double half_plateau_extent_v = 0;
  std::vector<std::pair<double, double>> extent_vs_bias;  // (|V_sd|, gate extent)
};

/// Bias at which the half plateau between the first two zero-bias plateaus is widest in gate.
SubbandSpacing subband_spacing_from_bias(const BiasMap& map, double hbar_vf_ev_nm,
                                         double value_tolerance = kDefaultPlateauTolerance,
                                         double min_extent_fraction = 0.0);

struct EnergyScales {
  double zeeman_ev = 0;
  double thermal_ev = 0;
  double ratio = 0;
};

EnergyScales energy_scales(double b_tesla, double temperature_k, double g_factor = 2.0);

/// G = 1 / (1/G_raw - R). Negative R puts a resistance back.
ConductanceTrace subtract_series_resistance(const ConductanceTrace& trace, double r_ohm);

/// Gate voltage of the conductance minimum (resistance maximum).
double dirac_point_from_minimum(const ConductanceTrace& trace);

struct Quantity {
  std::optional<double> value;
  std::string unit;
  std::string method;
  double residual = 0;
  std::string note;

  static Quantity absent(std::string unit, std::string method, std::string why);
  static Quantity of(double value, std::string unit, std::string method, double residual = 0);
};

struct ExtractionReport {
  std::vector<std::pair<std::string, Quantity>> quantities;
  std::vector<MfpPoint> mfp_vs_kf;
  std::vector<Plateau> plateaus;
  std::vector<std::string> warnings;
  std::vector<std::string> inputs;

  void set(const std::string& name, Quantity q);
  const Quantity* find(const std::string& name) const;
  nlohmann::json to_json() const;
};

}  // namespace gcon
