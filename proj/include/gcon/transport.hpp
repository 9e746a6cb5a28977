#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gcon/lattice.hpp"

namespace gcon {

struct TransportOptions {
  /// Broadening of the lead surface Green's functions only.
  double eta_ev = 1e-9;
  int max_iterations = 200;
  /// Decimation stops when the residual coupling drops below tolerance * t'.
  double tolerance = 1e-14;
  /// Extra decimation steps after convergence (fixed-point checks).
  int extra_iterations = 0;
  int threads = 1;
};

struct LeadSelfEnergy {
  Eigen::MatrixXcd sigma;
  Eigen::MatrixXcd gamma;  // i (Sigma - Sigma^dagger)
  int iterations = 0;
};

/// Surface Green's function by decimation, folded into the boundary slice.
LeadSelfEnergy lead_self_energy(const LeadCell& lead, double energy, const TransportOptions& opts);

/// Block-tridiagonal form of a device, ready for recursive Green's function sweeps.
class TransportSystem {
 public:
  explicit TransportSystem(const DeviceLattice& lattice, TransportOptions opts = {});

  /// Tr[Gamma_L G Gamma_R G^dagger] at real energy E (eV).
  double transmission(double energy) const;
  /// Same quantity with the sweep run from the right lead.
  double transmission_right_to_left(double energy) const;

  const DeviceLattice& lattice() const { return lattice_; }
  const TransportOptions& options() const { return opts_; }
  /// Largest |E_F| considered free of lattice artefacts: t'/3.
  double validity_window_ev() const { return lattice_.params.t() / 3.0; }

 private:
  double sweep(double energy, bool reversed) const;
  double sweep_once(double energy, bool reversed, const TransportOptions& o) const;

  DeviceLattice lattice_;
  TransportOptions opts_;
  std::vector<Eigen::MatrixXcd> onsite_blocks_;
  std::vector<Eigen::MatrixXcd> couplings_;  // H(slice i, slice i+1)
};

/// Convenience wrapper building a one-off TransportSystem.
double transmission(const DeviceLattice& device, double energy, TransportOptions opts = {});

struct TransmissionCurve {
  std::vector<double> energies;
  std::vector<double> transmission;
  std::string fingerprint;
  double b_tesla = 0;

  /// Linear interpolation; exact at sample points. Throws outside the range.
  double at(double energy) const;
};

TransmissionCurve transmission_curve(const TransportSystem& system, std::vector<double> energies);

/// Fermi-window average of T(E) around E_F (trapezoidal rule over +-10 k_B T).
double thermal_broadening(const TransmissionCurve& curve, double temperature_k, double fermi_ev);

struct GateMapping {
  double alpha_f_per_m2 = 0;
  double dirac_point_v = 0;
  double hbar_vf_ev_nm = 0;

  double density_per_m2(double vg) const;
  double fermi_energy_ev(double vg) const;
};

struct ConductanceTrace {
  std::vector<double> gate_v;
  std::vector<double> conductance;  // units of 2e^2/h
  std::vector<char> flagged;        // E_F outside the validity window
  double alpha_f_per_m2 = 0;
  double dirac_point_v = 0;
  double b_tesla = 0;
  double temperature_k = 0;
  double series_resistance_ohm = 0;
  double hbar_vf_ev_nm = 0;
  double validity_window_ev = 0;  // 0 when unknown
  std::string fingerprint;

  std::size_t flagged_count() const;
  void validate() const;
};

ConductanceTrace conductance_vs_gate(const TransportSystem& system, const std::vector<double>& gates,
                                     double alpha_f_per_m2, double dirac_point_v,
                                     double temperature_k = 0);

struct BiasMap {
  std::vector<double> gate_v;
  std::vector<double> bias_v;
  std::vector<std::vector<double>> g_diff;  // [gate][bias], units of 2e^2/h
  std::vector<char> flagged;                // per gate
  double alpha_f_per_m2 = 0;
  double dirac_point_v = 0;
  double b_tesla = 0;
  double hbar_vf_ev_nm = 0;
  double validity_window_ev = 0;
  std::string fingerprint;
};

/// Symmetric source-drain split: g = (T(E_F + eV/2) + T(E_F - eV/2)) / 2.
/// Finite-bias energies are interpolated on a grid of spacing energy_step_ev
/// that also contains every E_F exactly.
BiasMap bias_map(const TransportSystem& system, const std::vector<double>& gates,
                 const std::vector<double>& biases, double alpha_f_per_m2, double dirac_point_v,
                 double energy_step_ev = 0);

std::string trace_csv(const ConductanceTrace& trace);
std::string bias_map_csv(const BiasMap& map);

}  // namespace gcon
