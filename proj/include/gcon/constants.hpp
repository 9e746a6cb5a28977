#pragma once

#include <numbers>

namespace gcon {

/// CODATA values. Energies in eV unless the name says otherwise.
namespace si {
inline constexpr double e_charge = 1.602176634e-19;     // C
inline constexpr double h = 6.62607015e-34;             // J s
inline constexpr double hbar = h / (2.0 * std::numbers::pi);
inline constexpr double hbar_ev_s = hbar / e_charge;    // eV s
inline constexpr double h_ev_s = h / e_charge;          // eV s
inline constexpr double mu_b_ev_per_t = 5.7883818060e-5;
inline constexpr double k_b_ev_per_k = 8.617333262e-5;
inline constexpr double flux_quantum = h / e_charge;    // T m^2
/// Resistance of one spin-degenerate channel, h/2e^2 (Ohm).
inline constexpr double resistance_quantum = h / (2.0 * e_charge * e_charge);
/// 2e^2/h in Siemens.
inline constexpr double conductance_quantum = 1.0 / resistance_quantum;
}  // namespace si

struct PhysicalConstants {
  double hbar = si::hbar;
  double e_charge = si::e_charge;
  double h = si::h;
  double v_fermi = 1.0e6;  // m/s
  double g_factor = 2.0;
  double mu_b = si::mu_b_ev_per_t;
  double k_b = si::k_b_ev_per_k;

  /// hbar * v_F in eV nm.
  double hbar_vf_ev_nm() const { return hbar * v_fermi / e_charge * 1e9; }

  /// Throws ValidationError if any constant is non-positive or h != 2 pi hbar.
  void validate() const;

  static PhysicalConstants with_fermi_velocity(double v) {
    PhysicalConstants c;
    c.v_fermi = v;
    return c;
  }
};

}  // namespace gcon
